//! Pinch shift(2048) onto 32 copies of the zero block and a few normal 2x2 blocks, then audit.

use blaschke_forge::foundation::{cx, CMat, DenseSequence, Operator};
use blaschke_forge::pinching::{pinch_blaschke, verify_plan, PinchOptions};

fn main() -> blaschke_forge::Result<()> {
    let t = Operator::shift(2048)?;
    let dense = DenseSequence::standard(2048);
    let mut blocks = vec![CMat::zeros(1, 1); 32];
    let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![cx(0.4, 0.1), cx(-0.3, 0.0)]));
    blocks.extend(std::iter::repeat_n(d, 4));
    let plan = pinch_blaschke(&t, &blocks, &dense, &PinchOptions::default(), None)?;
    let audit = verify_plan(&plan, &t, &dense);
    let last = plan.blocks.last().unwrap();
    println!("{} blocks, max compression residual {:.2e}, audit passed: {}", plan.blocks.len(), plan.max_compression_residual(), audit.passed);
    println!("ln dist^2 = {:.4} <= {:.4}", last.log_dist2.unwrap_or(f64::NEG_INFINITY), last.ledger_bound);
    Ok(())
}
