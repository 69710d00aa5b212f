//! Necessary conditions and characterizations on finite data.

use blaschke_forge::diagnostics::{kadison_condition, shift_characterization, unitary_diag_condition, TailedSequence};
use blaschke_forge::foundation::cx;

fn main() -> blaschke_forge::Result<()> {
    for d in [
        TailedSequence::Explicit { head: vec![], tail: 0.5 },
        TailedSequence::List(vec![0.75, 0.25, 0.0]),
        TailedSequence::List(vec![0.75, 1.0 / 3.0, 0.0]),
    ] {
        let r = kadison_condition(&d)?;
        println!("kadison {d:?}: {:?}", r.verdict);
    }
    let u = unitary_diag_condition(&[cx(0.9, 0.0), cx(1.0, 0.0)])?;
    println!("unitary (0.9, 1, 1, ...): lhs {:.2} rhs {:?} holds {}", u.lhs, u.rhs, u.holds);

    let harmonic: Vec<_> = (1..=1000).map(|k| cx(1.0 - 1.0 / k as f64, 0.0)).collect();
    let geometric: Vec<_> = (1..=50).map(|k| cx(1.0 - 0.5f64.powi(k), 0.0)).collect();
    println!("1 - 1/k: {:?}", shift_characterization(&harmonic)?.verdict);
    println!("1 - 2^-k: {:?}", shift_characterization(&geometric)?.verdict);
    Ok(())
}
