//! Write a point of C^n as a positive combination of moment-curve points on a circle.

use blaschke_forge::foundation::cx;
use blaschke_forge::moments::{b_bound, certify_hull_membership, circle_moment_decompose, hull_distance_lower_bound, max_norm, moment_curve};

fn main() -> blaschke_forge::Result<()> {
    let eps = vec![cx(0.3, -0.1), cx(0.05, 0.2), cx(-0.4, 0.0)];
    let dec = circle_moment_decompose(&eps, 1.0);
    println!("{} points, total weight {:.6} <= b_3 |eps| = {:.6}", dec.points.len(), dec.total_weight(), b_bound(3, 1.0) * max_norm(&eps));
    println!("reconstruction residual {:.2e}", dec.residual());

    let lambda = cx(0.5, 0.0);
    let r = hull_distance_lower_bound(lambda, 0.5, 2)?;
    let p: Vec<_> = moment_curve(lambda, 2).into_iter().map(|z| z + cx(0.0, 0.99 * r)).collect();
    let cert = certify_hull_membership(&p, lambda, 0.5).expect("inside the certified ball");
    println!("ball radius {r:.4e}; point certified with {} nodes, residual {:.2e}", cert.nodes.len(), cert.residual);
    Ok(())
}
