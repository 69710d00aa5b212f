//! Power pinching with n = 2 and the convex splitting behind each block.

use blaschke_forge::foundation::{cx, CMat, DenseSequence, Operator};
use blaschke_forge::pinching::{egervary_dilation, corner_residual, pinch_power_blaschke, verify_plan, L32Constants, PinchOptions};

fn main() -> blaschke_forge::Result<()> {
    for n in 1..=3 {
        let k = L32Constants::new(n, 0.5)?;
        println!("n = {n}: c' = {:.6}, d' = {:.6}, margin = {:.6}, eps' = {:.3e}", k.c_prime, k.d_prime, k.margin, k.eps_prime);
    }
    let c = CMat::from_element(1, 1, cx(0.5, 0.0));
    let u = egervary_dilation(&c, 3);
    println!("dilation corner residual {:.1e}", corner_residual(&u, &c, 3));

    let t = Operator::shift(2048)?;
    let dense = DenseSequence::standard(2048);
    let plan = pinch_power_blaschke(&t, &vec![CMat::zeros(1, 1); 16], 2, &dense, &PinchOptions::default())?;
    let audit = verify_plan(&plan, &t, &dense);
    let b = &plan.blocks[0];
    println!("rho^2 = {:.3e}, deviations {:?} <= {:?}", b.rho * b.rho, b.deviations, b.deviation_bounds);
    let ledger = b.combination.as_ref().unwrap();
    println!("splitting: {} summands, reconstruction {:.1e}, all members {}", ledger.summands.len(), ledger.reconstruction_residual, ledger.all_members());
    println!("audit passed: {}", audit.passed);
    Ok(())
}
