//! Approximate diagonal: |<Tu_k,u_k> - 0| <= 1/k on shift(256).

use blaschke_forge::diagonal::{build_approx_diagonal, BuildOptions};
use blaschke_forge::foundation::{cx, DenseSequence, Operator, OperatorTuple};
use blaschke_forge::numrange::ConvexRegion;

fn main() -> blaschke_forge::Result<()> {
    let t = Operator::shift(256)?;
    let k = 64;
    let alphas: Vec<f64> = (1..=k).map(|j| 1.0 / j as f64).collect();
    let targets = vec![vec![cx(0.0, 0.0)]; k];
    let (frame, cert) = build_approx_diagonal(
        &OperatorTuple::single(&t),
        &ConvexRegion::disc([0.0, 0.0], 0.9),
        &targets,
        &alphas,
        &DenseSequence::standard(256),
        &BuildOptions::default(),
    )?;
    let worst = cert.steps.iter().map(|s| s.residual * (s.step as f64)).fold(0.0, f64::max);
    println!("{} vectors; max k·residual = {worst:.3e} (must be <= 1)", frame.len());
    Ok(())
}
