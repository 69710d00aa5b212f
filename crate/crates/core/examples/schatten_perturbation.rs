//! Targets 1 + 1/k^2 just outside the model disc become a diagonal after a Hilbert-Schmidt perturbation.

use blaschke_forge::diagonal::{build_schatten_perturbation, BuildOptions};
use blaschke_forge::foundation::{cx, DenseSequence, Operator, OperatorTuple};
use blaschke_forge::numrange::ConvexRegion;

fn main() -> blaschke_forge::Result<()> {
    let dim = 2048;
    let t = Operator::shift(dim)?;
    let targets: Vec<_> = (1..=64).map(|k| vec![cx(1.0 + 1.0 / (k * k) as f64, 0.0)]).collect();
    let (_, report) = build_schatten_perturbation(
        &OperatorTuple::single(&t),
        &targets,
        2.0,
        &ConvexRegion::disc([0.0, 0.0], 1.0),
        &DenseSequence::standard(dim),
        &BuildOptions::default(),
    )?;
    println!(
        "sum |kappa_k|^2 = {:.4} <= {:.4}: {}",
        report.kappa_partial_sums.last().unwrap(),
        report.dominating_partial_sums.last().unwrap(),
        report.within_bound
    );
    Ok(())
}
