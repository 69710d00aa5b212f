//! Vectors with <Tu,u> = <T^2u,u> = 0 on shift(512).

use blaschke_forge::diagonal::{build_power_diagonal, BuildOptions, SpectralDisc};
use blaschke_forge::foundation::{cx, DenseSequence, Operator};

fn main() -> blaschke_forge::Result<()> {
    let t = Operator::shift(512)?;
    let disc = SpectralDisc { center: cx(0.0, 0.0), radius: 1.0 };
    let (frame, cert) = build_power_diagonal(&t, &vec![cx(0.0, 0.0); 32], 2, &disc, &DenseSequence::standard(512), &BuildOptions::default())?;
    let t2 = t.power_csr(2);
    let worst = frame
        .vectors()
        .iter()
        .map(|u| u.dotc(&t.apply(u)).norm().max(u.dotc(&t2.apply(u)).norm()))
        .fold(0.0, f64::max);
    println!("{} vectors, worst power value {worst:.2e}, certificate max residual {:.2e}", frame.len(), cert.max_residual());
    Ok(())
}
