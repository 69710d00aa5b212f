//! Trace W(T) for a truncated shift and accept the unit-disc model shrunk by a margin.

use blaschke_forge::foundation::Operator;
use blaschke_forge::numrange::{numrange_boundary, we_model, ConvexRegion};

fn main() -> blaschke_forge::Result<()> {
    let t = Operator::shift(256)?;
    let b = numrange_boundary(&t, 64)?;
    let rmin = b.samples.iter().map(|s| s.point.norm()).fold(f64::INFINITY, f64::min);
    println!("64 boundary points, smallest modulus {rmin:.6} (cos(pi/257) = {:.6})", (std::f64::consts::PI / 257.0).cos());

    let model = we_model(&ConvexRegion::disc([0.0, 0.0], 0.95), &t, 0.02)?;
    println!("accepted model: {:?}", model.region);

    let small = Operator::shift(8)?;
    match we_model(&ConvexRegion::disc([0.0, 0.0], 0.99), &small, 0.0) {
        Err(e) => println!("shift(8) rejects radius 0.99: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}
