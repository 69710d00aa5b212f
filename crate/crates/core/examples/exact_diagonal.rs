//! Build 64 orthonormal vectors of shift(256) with diagonal 0.3+0.2i and audit the certificate.

use blaschke_forge::diagonal::{build_exact_diagonal_complex, verify_certificate, BuildOptions};
use blaschke_forge::foundation::{cx, hermitian_parts, DenseSequence, Operator, OperatorTuple};
use blaschke_forge::numrange::{we_model, ConvexRegion};

fn main() -> blaschke_forge::Result<()> {
    let t = Operator::shift(256)?;
    let model = we_model(&ConvexRegion::disc([0.0, 0.0], 0.9), &t, 0.0)?;
    let tt = OperatorTuple::single(&t);
    let targets = vec![vec![cx(0.3, 0.2)]; 64];
    let dense = DenseSequence::standard(256);
    let (frame, cert) = build_exact_diagonal_complex(&tt, &model.region, &targets, &dense, &BuildOptions::default())?;
    let audit = verify_certificate(&cert, &frame, &hermitian_parts(&tt), &dense);
    println!("steps {}, max residual {:.2e}, audit passed: {}", frame.len(), cert.max_residual(), audit.passed);
    if let Some(last) = cert.steps.iter().rev().find_map(|s| s.log_dist2.map(|l| (s.step, l, s.ledger_bound))) {
        println!("step {}: ln dist^2 = {:.3} <= ledger {:.3}", last.0, last.1, last.2);
    }
    Ok(())
}
