//! Operator-valued diagonals: subspaces K_k on which T (or T, …, Tⁿ) compresses to
//! prescribed contractions, built by correcting each block, realizing the corrected block
//! in separated index windows of a banded T and gluing in the tracked vector.

mod block;
mod dilation;
mod plan;
mod windows;

pub use block::{bourin_correction, glue_block};
pub use dilation::{corner_residual, egervary_dilation, l32_ledger, ConvexCombinationLedger, L32Constants, LedgerSummand};
pub use plan::{
    pinch_blaschke, pinch_power_blaschke, verify_plan, InnerRequest, InnerWitness, PinchBlock, PinchBranch, PinchOptions,
    PinchingPlan, PlanAudit,
};
pub use windows::{circle_target, split_subspaces, uniform_pinch_banded, SplitSubspace};

/// Default tolerance of the compression identities.
pub const TOL_PINCH: f64 = 1e-8;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::foundation::linalg::{spectral_norm, unit};
    use crate::foundation::{cx, CMat, DenseSequence, Frame, Operator, TOL_ORTHO};

    fn scalar(z: f64) -> CMat {
        CMat::from_element(1, 1, cx(z, 0.0))
    }

    #[test]
    fn correction_scalar_examples() {
        let c = bourin_correction(&scalar(0.0), 0.1f64.sqrt(), cx(0.3, 0.0), &unit(1, 0)).unwrap();
        assert!((c[(0, 0)] - cx(-1.0 / 30.0, 0.0)).norm() < 1e-15);
        let c0 = CMat::from_row_slice(2, 2, &[cx(0.2, 0.1), cx(0.3, 0.0), cx(0.0, -0.1), cx(0.4, 0.0)]);
        let same = bourin_correction(&c0, 0.0, cx(0.7, 0.0), &unit(2, 0)).unwrap();
        assert!((same - &c0).norm() < 1e-15);
        assert!(matches!(bourin_correction(&scalar(1.0), 0.1, cx(0.0, 0.0), &unit(1, 0)), Err(Error::Input(_))));
    }

    #[test]
    fn correction_diagonal_commuting_block() {
        let c = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![cx(0.5, 0.0), cx(-0.25, 0.0)]));
        let r2: f64 = 0.04;
        let got = bourin_correction(&c, r2.sqrt(), cx(0.0, 0.0), &unit(2, 0)).unwrap();
        let p = unit(2, 0) * unit(2, 0).adjoint();
        let want = &c + &p * &c * &p * cx(r2 / (1.0 - r2), 0.0);
        assert!((got - want).norm() < 1e-15);
    }

    #[test]
    fn glue_scalar_block_exact() {
        let t = Operator::shift(64).unwrap();
        let b = unit(64, 0);
        // ⟨Tf,f⟩ = 0 for f supported on even indices far from b
        let mut f = unit(64, 20) + unit(64, 30);
        f.unscale_mut(2f64.sqrt());
        let kp = Frame::new(vec![f], TOL_ORTHO).unwrap();
        let rho = 0.25;
        let tau = b.dotc(&t.apply(&b));
        let cp = bourin_correction(&scalar(0.0), rho, tau, &unit(1, 0)).unwrap();
        assert!(cp[(0, 0)].norm() < 1e-15);
        let (k, v) = glue_block(&t, &scalar(0.0), &kp, &b, rho, 0).unwrap();
        assert!((k.vectors()[0].dotc(&b) - cx(rho, 0.0)).norm() < 1e-15);
        let val = v.column(0).dotc(&t.apply(&v.column(0).into_owned()));
        assert!(val.norm() < 1e-12);
        let (k0, _) = glue_block(&t, &scalar(0.0), &kp, &b, 0.0, 0).unwrap();
        assert_eq!(k0.vectors()[0], kp.vectors()[0]);
    }

    #[test]
    fn glue_rejects_missing_tb_orthogonality() {
        let t = Operator::shift(8).unwrap();
        let b = unit(8, 3);
        let kp = Frame::new(vec![unit(8, 2)], TOL_ORTHO).unwrap();
        assert!(matches!(glue_block(&t, &scalar(0.0), &kp, &b, 0.2, 0), Err(Error::Geometry(_))));
    }

    #[test]
    fn uniform_pinch_two_values() {
        let t = Operator::shift(64).unwrap();
        let f = uniform_pinch_banded(&t, &[cx(0.3, 0.0), cx(-0.2, 0.0)], 16).unwrap();
        assert_eq!(f.len(), 2);
        let (a, b) = (&f.vectors()[0], &f.vectors()[1]);
        assert_eq!(b.dotc(&t.apply(a)), cx(0.0, 0.0));
        assert_eq!(a.dotc(&t.apply(b)), cx(0.0, 0.0));
        assert!((a.dotc(&t.apply(a)) - cx(0.3, 0.0)).norm() < 1e-10);
        assert!((b.dotc(&t.apply(b)) - cx(-0.2, 0.0)).norm() < 1e-10);
        let dense = Operator::dense(t.matrix().clone()).unwrap();
        assert!(matches!(uniform_pinch_banded(&dense, &[cx(0.0, 0.0)], 16), Err(Error::Input(_))));
    }

    #[test]
    fn split_subspaces_shift() {
        let t = Operator::shift(1024).unwrap();
        let spaces = split_subspaces(&t, 2, 8, 4, 0).unwrap();
        assert_eq!(spaces.len(), 2);
        let all: Vec<_> = spaces.iter().flat_map(|s| s.vectors.iter().cloned()).collect();
        Frame::new(all, TOL_ORTHO).unwrap();
        for s in &spaces {
            for (v, (si, j)) in s.vectors.iter().zip(&s.labels) {
                let val = v.dotc(&t.apply(v));
                assert!((val - circle_target(*si, 8)).norm() < 1.0 / *j as f64);
            }
        }
        assert!(matches!(split_subspaces(&Operator::shift(6).unwrap(), 1, 8, 1, 0), Err(Error::NotAttained { step: Some(_), .. })));
    }

    #[test]
    fn egervary_examples() {
        let u = egervary_dilation(&scalar(0.0), 2);
        let cyc = CMat::from_row_slice(3, 3, &[0., 0., 1., 1., 0., 0., 0., 1., 0.].map(|x| cx(x, 0.0)));
        assert!((&u - cyc).norm() < 1e-15);
        let u = egervary_dilation(&scalar(0.5), 3);
        assert!((u.adjoint() * &u - CMat::identity(4, 4)).norm() < 1e-14);
        let mut p = u.clone();
        for k in 1..=3 {
            assert!((p[(0, 0)] - cx(0.5f64.powi(k), 0.0)).norm() < 1e-14);
            p = &p * &u;
        }
        let rot = CMat::from_row_slice(2, 2, &[cx(0.0, 1.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(-1.0, 0.0)]);
        let u = egervary_dilation(&rot, 2);
        assert!(corner_residual(&u, &rot, 2) < 1e-15);
    }

    #[test]
    fn l32_constants_and_ledger() {
        let k = L32Constants::new(1, 0.5).unwrap();
        assert!((k.d - 1.0 / 128.0).abs() < 1e-16);
        assert!((k.c_prime - 0.5625).abs() < 1e-16);
        assert!((k.d_prime - 0.25).abs() < 1e-16);
        assert!((1.0 - k.margin - 0.951_388_888_888_889).abs() < 1e-12);
        assert!((k.eps_prime - 0.012_152_777_777_777_8).abs() < 1e-12);
        let c = scalar(0.5);
        let l = l32_ledger(&c, &[CMat::zeros(1, 1)], 1, 1.0).unwrap();
        assert!(l.reconstruction_residual < 1e-14);
        assert!((l.weight_sum() + l.leftover - 1.0).abs() < 1e-12);
        assert!(l.all_members());
        let big = scalar(0.01);
        assert!(matches!(l32_ledger(&c, &[big], 1, 1.0), Err(Error::Input(_))));
    }

    #[test]
    fn l32_ledger_with_perturbation() {
        let c = CMat::from_row_slice(2, 2, &[cx(0.3, 0.1), cx(0.2, 0.0), cx(0.0, 0.0), cx(-0.4, 0.2)]);
        let n = 2;
        let d = L32Constants::new(n, spectral_norm(&c)).unwrap().d;
        let a1 = CMat::from_row_slice(2, 2, &[cx(0.5, 0.0), cx(0.0, 0.3), cx(0.1, 0.0), cx(-0.2, 0.4)]);
        let a1 = &a1 * cx(0.9 * d / spectral_norm(&a1), 0.0);
        let a2 = a1.adjoint();
        let l = l32_ledger(&c, &[a1, a2], n, 1.0).unwrap();
        assert!(l.reconstruction_residual < 1e-10);
        assert!(l.corner_residual < 1e-12);
        assert!(l.constants.margin > 0.0);
        assert_eq!(l.summands.len(), 1 + 2 * n + 4 * n);
        assert!(l.summands.iter().skip(1).all(|s| s.member));
    }

    #[test]
    fn pinch_zero_blocks_small() {
        let t = Operator::shift(256).unwrap();
        let blocks = vec![scalar(0.0); 4];
        let dense = DenseSequence::standard(256);
        let plan = pinch_blaschke(&t, &blocks, &dense, &PinchOptions::default(), None).unwrap();
        assert_eq!(plan.blocks.len(), 4);
        let audit = verify_plan(&plan, &t, &dense);
        assert!(audit.passed, "{audit:?}");
        assert!(plan.max_compression_residual() < 1e-8);
        let r2 = 1.0 / 16.0;
        let want = 4.0 * (1.0f64 - r2).ln();
        assert!((plan.blocks[3].log_dist2.unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn pinch_two_by_two_normal_block() {
        let t = Operator::shift(512).unwrap();
        let c = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![cx(0.3, 0.2), cx(-0.4, 0.0)]));
        let dense = DenseSequence::standard(512);
        let plan = pinch_blaschke(&t, &[c.clone(), c], &dense, &PinchOptions::default(), None).unwrap();
        assert!(verify_plan(&plan, &t, &dense).passed);
    }

    #[test]
    fn pinch_rejects_norm_one_and_nonnormal() {
        let t = Operator::shift(128).unwrap();
        let dense = DenseSequence::standard(128);
        let err = pinch_blaschke(&t, &[scalar(1.0)], &dense, &PinchOptions::default(), None);
        assert!(matches!(err, Err(Error::Input(_))));
        let j = CMat::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(0.5, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]);
        let err = pinch_blaschke(&t, &[j], &dense, &PinchOptions::default(), None);
        assert!(matches!(err, Err(Error::UnsupportedBlock { block: 1, .. })));
    }

    #[test]
    fn nonnormal_block_through_witness() {
        let t = Operator::shift(128).unwrap();
        let dense = DenseSequence::standard(128);
        let j = CMat::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(0.5, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]);
        let witness = |req: &InnerRequest| {
            // C' is nilpotent with (0,1) entry a; realize it by (e_p, cos θ e_{p+1} + sin θ e_{p+3}) with cos θ = a
            let a = req.corrected[0][(0, 1)];
            let theta = a.re.acos();
            let mut u = CMat::zeros(128, 2);
            u[(60, 0)] = cx(1.0, 0.0);
            u[(61, 1)] = cx(theta.cos(), 0.0);
            u[(63, 1)] = cx(theta.sin(), 0.0);
            Ok(u)
        };
        let plan = pinch_blaschke(&t, &[j], &dense, &PinchOptions::default(), Some(&witness));
        let plan = plan.unwrap();
        assert!(verify_plan(&plan, &t, &dense).passed);
    }

    #[test]
    fn power_pinch_zero_blocks_small() {
        let t = Operator::shift(512).unwrap();
        let dense = DenseSequence::standard(512);
        let plan = pinch_power_blaschke(&t, &vec![scalar(0.0); 3], 2, &dense, &PinchOptions::default()).unwrap();
        let audit = verify_plan(&plan, &t, &dense);
        assert!(audit.passed, "{audit:?}");
        for b in &plan.blocks {
            assert!(b.deviations.iter().zip(&b.deviation_bounds).all(|(d, u)| d <= u));
            let l = b.combination.as_ref().unwrap();
            assert!(l.reconstruction_residual < 1e-10);
        }
        let one = pinch_power_blaschke(&t, &[scalar(0.2)], 1, &dense, &PinchOptions::default()).unwrap();
        assert_eq!(one.constant, 512.0);
    }
}
