//! Find unit vectors with a prescribed numerical-range value, orthogonal to a given set.

use blaschke_forge::foundation::linalg::unit;
use blaschke_forge::foundation::{hermitian_parts, Operator, OperatorTuple};
use blaschke_forge::inverse_range::attain_value;

fn main() -> blaschke_forge::Result<()> {
    let t = Operator::shift(64)?;
    let s = hermitian_parts(&OperatorTuple::single(&t));
    let avoid = vec![unit(64, 0), unit(64, 1)];
    for target in [[0.25, 0.0], [0.0, -0.6], [0.5, 0.5]] {
        let x = attain_value(&s, &target, &avoid, 1e-10)?;
        let v = s.values(&x);
        println!("target {target:?} -> ({:.12}, {:.12}), |<x,e1>| = {:.1e}", v[0], v[1], x[0].norm());
    }
    Ok(())
}
