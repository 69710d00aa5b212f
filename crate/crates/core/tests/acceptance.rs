//! End-to-end acceptance runs. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use blaschke_forge::diagnostics::{
    kadison_condition, shift_characterization, unitary_diag_condition, KadisonVerdict, ShiftVerdict, TailedSequence,
};
use blaschke_forge::diagonal::{
    build_approx_diagonal, build_exact_diagonal_complex, build_power_diagonal, build_schatten_perturbation,
    verify_certificate, BuildOptions, SpectralDisc,
};
use blaschke_forge::foundation::{audit_frame, cx, hermitian_parts, CMat, DenseSequence, Operator, OperatorTuple, C64};
use blaschke_forge::moments::{
    b_bound, certify_hull_membership, circle_moment_decompose, hull_distance_lower_bound, max_norm, moment_curve,
};
use blaschke_forge::numrange::{we_model, ConvexRegion};
use blaschke_forge::pinching::{
    corner_residual, egervary_dilation, l32_ledger, pinch_blaschke, pinch_power_blaschke, verify_plan, L32Constants,
    PinchOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_point(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::from_polar(radius * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>())
}

fn moment_decomposition() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_rel = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for n in 1..=5 {
        for rho in [0.5, 1.0, 2.0] {
            for _ in 0..1000 {
                let scale = 10.0 * rng.random::<f64>();
                let eps: Vec<C64> = (0..n).map(|_| random_point(&mut rng, scale)).collect();
                let norm = max_norm(&eps);
                let d = circle_moment_decompose(&eps, rho);
                ensure(d.points.iter().all(|p| (p.norm() - rho).abs() <= 1e-12), || "point off the circle".into())?;
                ensure(d.weights.iter().all(|w| *w >= 0.0), || "negative weight".into())?;
                let rel = d.residual() / (rho.powi(n as i32).max(1.0) * norm.max(f64::MIN_POSITIVE));
                worst_rel = worst_rel.max(rel);
                ensure(rel <= 1e-10, || format!("n={n} rho={rho}: relative residual {rel:.3e}"))?;
                let bound = b_bound(n, rho) * norm;
                ensure(d.total_weight() <= bound * (1.0 + 1e-12), || format!("n={n} rho={rho}: weight above b_n"))?;
                if bound > 0.0 {
                    worst_ratio = worst_ratio.max(d.total_weight() / bound);
                }
            }
        }
    }
    ensure((b_bound(1, 1.0) - 1.0).abs() < 1e-15 && b_bound(2, 1.0) == 3.0 && b_bound(3, 1.0) == 7.0, || {
        "b_n(1) differs from 1, 3, 7".into()
    })?;
    let el = start.elapsed();
    ensure(el < Duration::from_secs(5), || format!("took {el:?}"))?;
    Ok(format!("15000 targets, max rel residual {worst_rel:.2e}, max weight/b_n {worst_ratio:.3}, {el:.2?}"))
}

fn hull_bound() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let lambdas = [cx(0.0, 0.0), cx(0.5, 0.0), cx(1.0, 1.0) / 2f64.sqrt()];
    let mut count = 0;
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for rho in [0.25, 0.5, 1.0] {
            for lambda in lambdas {
                let r = hull_distance_lower_bound(lambda, rho, n).map_err(|e| e.to_string())? * (1.0 - 1e-6);
                let center = moment_curve(lambda, n);
                for i in 0..400 {
                    // even i: a vertex of the max-norm ball, odd i: a random interior point
                    let p: Vec<C64> = center
                        .iter()
                        .map(|c| {
                            let mag = if i % 2 == 0 { r } else { r * rng.random::<f64>() };
                            c + C64::from_polar(mag, 2.0 * PI * rng.random::<f64>())
                        })
                        .collect();
                    let cert = certify_hull_membership(&p, lambda, rho)
                        .ok_or_else(|| format!("n={n} rho={rho} lambda={lambda}: not certified"))?;
                    ensure(cert.is_convex(), || "weights are not a convex combination".into())?;
                    ensure(cert.nodes.iter().all(|z| (z - lambda).norm() <= rho * (1.0 + 1e-12)), || {
                        "node outside the disc".into()
                    })?;
                    ensure(cert.residual <= 1e-8, || format!("membership residual {:.3e}", cert.residual))?;
                    worst = worst.max(cert.residual);
                    count += 1;
                }
            }
        }
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(30), || format!("took {el:?}"))?;
    Ok(format!("{count} ball points certified, max residual {worst:.2e}, {el:.2?}"))
}

fn exact_diagonal() -> Outcome {
    let start = Instant::now();
    let t = Operator::shift(256).map_err(|e| e.to_string())?;
    let model = we_model(&ConvexRegion::disc([0.0, 0.0], 0.9), &t, 0.0).map_err(|e| e.to_string())?;
    let tt = OperatorTuple::single(&t);
    let s = hermitian_parts(&tt);
    let dense = DenseSequence::standard(256);
    let k = 64;
    let mut notes = Vec::new();
    for lambda in [cx(0.0, 0.0), cx(0.3, 0.2)] {
        let targets = vec![vec![lambda]; k];
        let (frame, cert) = build_exact_diagonal_complex(&tt, &model.region, &targets, &dense, &BuildOptions::default())
            .map_err(|e| e.to_string())?;
        let fa = audit_frame(&frame);
        ensure(fa.passes(1e-10), || format!("frame orthonormality {fa:?}"))?;
        for (i, u) in frame.vectors().iter().enumerate() {
            let r = (u.dotc(&t.apply(u)) - lambda).norm();
            ensure(r <= 1e-8, || format!("lambda={lambda}: step {} residual {r:.3e}", i + 1))?;
        }
        let audit = verify_certificate(&cert, &frame, &s, &dense);
        ensure(audit.passed, || format!("audit: {:?}", audit.reason))?;
        ensure(audit.max_ledger_excess <= 1e-6, || format!("ledger excess {:.3e}", audit.max_ledger_excess))?;
        let m = cert.max_norm;
        let mut last = f64::NEG_INFINITY;
        for st in &cert.steps {
            if let Some(l) = st.log_dist2 {
                ensure(l <= st.ledger_bound + 1e-6, || format!("step {}: ledger", st.step))?;
                // ln dist ≤ −N·0.9/(8M)
                let trend = -(st.step as f64) * 0.9 / (8.0 * m);
                ensure(0.5 * l <= trend, || format!("lambda={lambda}: step {} ln dist {:.3} above {trend:.3}", st.step, 0.5 * l))?;
                last = 0.5 * l;
            }
        }
        let trend = -(k as f64) * 0.9 / (8.0 * m);
        notes.push(if last == f64::NEG_INFINITY {
            format!("dist 0 vs trend ln {trend:.1}")
        } else {
            format!("ln dist {last:.1} vs trend {trend:.1}")
        });
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(60), || format!("took {el:?}"))?;
    Ok(format!("two runs of {k} steps, {}, {el:.2?}", notes.join("; ")))
}

fn approx_diagonal() -> Outcome {
    let t = Operator::shift(256).map_err(|e| e.to_string())?;
    let k = 64;
    let alphas: Vec<f64> = (1..=k).map(|j| 1.0 / j as f64).collect();
    let (frame, _) = build_approx_diagonal(
        &OperatorTuple::single(&t),
        &ConvexRegion::disc([0.0, 0.0], 0.9),
        &vec![vec![cx(0.0, 0.0)]; k],
        &alphas,
        &DenseSequence::standard(256),
        &BuildOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure(audit_frame(&frame).passes(1e-10), || "frame not orthonormal".into())?;
    let mut worst = 0.0f64;
    for (i, u) in frame.vectors().iter().enumerate() {
        let v = u.dotc(&t.apply(u)).norm();
        ensure(v <= 1.0 / (i + 1) as f64, || format!("k={}: {v:.3e} > 1/k", i + 1))?;
        worst = worst.max(v * (i + 1) as f64);
    }
    Ok(format!("{k} vectors, max k·|<Tu_k,u_k>| = {worst:.2e}"))
}

fn schatten() -> Outcome {
    let dim = 2048;
    let t = Operator::shift(dim).map_err(|e| e.to_string())?;
    let k = 64;
    let targets: Vec<Vec<C64>> = (1..=k).map(|j| vec![cx(1.0 + 1.0 / (j * j) as f64, 0.0)]).collect();
    let (frame, report) = build_schatten_perturbation(
        &OperatorTuple::single(&t),
        &targets,
        2.0,
        &ConvexRegion::disc([0.0, 0.0], 1.0),
        &DenseSequence::standard(dim),
        &BuildOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    // recompute κ from the frame
    let mut sum = 0.0;
    for (j, u) in frame.vectors().iter().enumerate() {
        let kappa = targets[j][0] - u.dotc(&t.apply(u));
        sum += kappa.norm_sqr();
    }
    let bound: f64 = (1..=k).map(|j| (1.0 / (j * j) as f64 + 1.0 / j as f64).powi(2)).sum();
    ensure(sum.is_finite() && sum <= bound + 1e-6, || format!("sum {sum:.6} above {bound:.6}"))?;
    ensure(report.within_bound, || "report flags the bound".into())?;
    Ok(format!("sum |kappa_k|^2 = {sum:.4} <= {bound:.4}"))
}

fn power_diagonal() -> Outcome {
    let t = Operator::shift(512).map_err(|e| e.to_string())?;
    let disc = SpectralDisc { center: cx(0.0, 0.0), radius: 1.0 };
    let (frame, _) =
        build_power_diagonal(&t, &vec![cx(0.0, 0.0); 32], 2, &disc, &DenseSequence::standard(512), &BuildOptions::default())
            .map_err(|e| e.to_string())?;
    ensure(frame.len() == 32, || "wrong frame size".into())?;
    ensure(audit_frame(&frame).passes(1e-10), || "frame not orthonormal".into())?;
    let mut worst = 0.0f64;
    for u in frame.vectors() {
        let tu = t.apply(u);
        let t2u = t.apply(&tu);
        worst = worst.max(u.dotc(&tu).norm()).max(u.dotc(&t2u).norm());
    }
    ensure(worst <= 1e-8, || format!("power value {worst:.3e}"))?;
    Ok(format!("32 vectors, max |<T^j u,u>| = {worst:.2e}"))
}

fn pinching() -> Outcome {
    let start = Instant::now();
    let t = Operator::shift(2048).map_err(|e| e.to_string())?;
    let dense = DenseSequence::standard(2048);
    let plan = pinch_blaschke(&t, &vec![CMat::zeros(1, 1); 32], &dense, &PinchOptions::default(), None)
        .map_err(|e| e.to_string())?;
    let audit = verify_plan(&plan, &t, &dense);
    ensure(audit.passed, || format!("audit: {:?}", audit.reason))?;
    ensure(plan.blocks.len() == 32, || "wrong block count".into())?;
    for b in &plan.blocks {
        ensure(b.compression_residual <= 1e-8, || format!("block {}: compression", b.index))?;
        ensure(b.corrected_norm <= b.norm_bound && b.norm_bound < 1.0, || format!("block {}: norm ledger", b.index))?;
        if let Some(l) = b.log_dist2 {
            ensure(l <= b.ledger_bound + 1e-6, || format!("block {}: ln dist^2 {l:.4} > {:.4}", b.index, b.ledger_bound))?;
        }
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(120), || format!("took {el:?}"))?;
    Ok(format!("32 blocks, compression residual {:.2e}, ledger excess {:.2e}, {el:.2?}", audit.max_compression_residual, audit.max_ledger_excess))
}

fn splitting_constants() -> Outcome {
    let mut min_margin = f64::INFINITY;
    for n in 1..=3usize {
        for c in [0.25, 0.5, 0.75] {
            let k = L32Constants::new(n, c).map_err(|e| e.to_string())?;
            let nf = n as f64;
            let q = (1.0 - c).powi(n as i32);
            let d = q / (nf * 2f64.powi(2 * n as i32 + 4));
            let cp = c + c * q / 2f64.powi(n as i32 + 1);
            let dp = 2f64.powi(-(n as i32 + 1));
            let margin = 1.0 - c / cp - 2.0 * nf * d / dp;
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-14;
            ensure(close(k.d, d) && close(k.c_prime, cp) && close(k.d_prime, dp), || format!("n={n} c={c}: constants"))?;
            ensure(close(k.eps_prime, margin / (4.0 * nf)), || format!("n={n} c={c}: eps'"))?;
            ensure(k.margin > 0.0, || format!("n={n} c={c}: margin {}", k.margin))?;
            min_margin = min_margin.min(k.margin);

            let cm = CMat::from_element(1, 1, cx(c, 0.0));
            let a: Vec<CMat> = (0..n).map(|j| CMat::from_element(1, 1, cx(0.5 * d, 0.25 * d * j as f64))).collect();
            let ledger = l32_ledger(&cm, &a, n, 1.0).map_err(|e| e.to_string())?;
            ensure(ledger.reconstruction_residual <= 1e-10, || format!("n={n} c={c}: reconstruction"))?;
            ensure(ledger.weight_sum() <= 1.0 + 1e-15, || "weights exceed 1".into())?;
            ensure(ledger.summands.iter().all(|s| s.weight >= 0.0), || "negative weight".into())?;

            let contraction = CMat::from_row_slice(2, 2, &[cx(c, 0.0), cx(0.1, 0.0), cx(0.0, 0.0), cx(0.0, -c / 2.0)]);
            let u = egervary_dilation(&contraction, n);
            let unitary = (u.adjoint() * &u - CMat::identity(u.nrows(), u.nrows())).norm();
            ensure(unitary <= 1e-12, || format!("dilation not unitary {unitary:.2e}"))?;
            let corner = corner_residual(&u, &contraction, n);
            ensure(corner <= 1e-12, || format!("n={n} c={c}: corner {corner:.2e}"))?;
        }
    }
    let k = L32Constants::new(1, 0.5).map_err(|e| e.to_string())?;
    ensure((1.0 - k.margin - 0.951_388_888_888_889).abs() < 1e-12, || format!("n=1, c=0.5 sum {}", 1.0 - k.margin))?;
    Ok(format!("9 pairs, min margin {min_margin:.3e}, n=1 c=0.5 sum {:.4}", 1.0 - k.margin))
}

fn power_pinching() -> Outcome {
    let t = Operator::shift(2048).map_err(|e| e.to_string())?;
    let dense = DenseSequence::standard(2048);
    let plan = pinch_power_blaschke(&t, &vec![CMat::zeros(1, 1); 16], 2, &dense, &PinchOptions::default())
        .map_err(|e| e.to_string())?;
    let audit = verify_plan(&plan, &t, &dense);
    ensure(audit.passed, || format!("audit: {:?}", audit.reason))?;
    let norm_t = t.norm();
    for b in &plan.blocks {
        // ⟨T^j v, v⟩ against C^j = 0
        for (j, p) in [t.power_csr(1), t.power_csr(2)].iter().enumerate() {
            let r = b.basis.iter().map(|v| v.dotc(&p.apply(v)).norm()).fold(0.0, f64::max);
            ensure(r <= 1e-8, || format!("block {}: power {} residual {r:.3e}", b.index, j + 1))?;
        }
        for (j, c) in b.corrected.iter().enumerate() {
            let dev = c.norm();
            let bound = 8.0 * b.rho * b.rho * norm_t.powi(j as i32 + 1);
            ensure(dev <= bound, || format!("block {}: deviation {dev:.3e} > {bound:.3e}", b.index))?;
        }
    }
    Ok(format!("16 blocks, compression residual {:.2e}", audit.max_compression_residual))
}

fn diagnostics() -> Outcome {
    let cases = [
        (TailedSequence::Explicit { head: vec![], tail: 0.5 }, KadisonVerdict::DivergentAdmissible),
        (TailedSequence::List(vec![0.75, 0.25, 0.0]), KadisonVerdict::Admissible),
        (TailedSequence::List(vec![0.75, 1.0 / 3.0, 0.0]), KadisonVerdict::Inadmissible),
    ];
    for (d, want) in cases {
        let got = kadison_condition(&d).map_err(|e| e.to_string())?.verdict;
        ensure(got == want, || format!("kadison {d:?}: {got:?}"))?;
    }
    let u = unitary_diag_condition(&[cx(0.9, 0.0), cx(1.0, 0.0)]).map_err(|e| e.to_string())?;
    ensure(!u.holds, || "unitary condition accepted (0.9, 1, 1, ...)".into())?;
    let harmonic: Vec<C64> = (1..=1000).map(|k| cx(1.0 - 1.0 / k as f64, 0.0)).collect();
    let geometric: Vec<C64> = (1..=50).map(|k| cx(1.0 - 0.5f64.powi(k), 0.0)).collect();
    ensure(shift_characterization(&harmonic).map_err(|e| e.to_string())?.verdict == ShiftVerdict::IsDiagonal, || {
        "1 - 1/k rejected".into()
    })?;
    ensure(shift_characterization(&geometric).map_err(|e| e.to_string())?.verdict == ShiftVerdict::NotDiagonal, || {
        "1 - 2^-k accepted".into()
    })?;

    let t = Operator::shift(128).map_err(|e| e.to_string())?;
    let tt = OperatorTuple::single(&t);
    let region = ConvexRegion::disc([0.0, 0.0], 0.9);
    let dense = DenseSequence::standard(128);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for run in 0..20 {
        let targets: Vec<Vec<C64>> = (0..16).map(|_| vec![random_point(&mut rng, 0.8)]).collect();
        let opts = BuildOptions { seed: run, ..BuildOptions::default() };
        let (frame, _) = build_exact_diagonal_complex(&tt, &region, &targets, &dense, &opts).map_err(|e| e.to_string())?;
        let diag: Vec<C64> = frame.vectors().iter().map(|u| u.dotc(&t.apply(u))).collect();
        let v = shift_characterization(&diag).map_err(|e| e.to_string())?.verdict;
        ensure(v == ShiftVerdict::IsDiagonal, || format!("run {run}: builder diagonal classified {v:?}"))?;
    }
    Ok("kadison triple, unitary, shift oracles and 20 builder sequences".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("moment decomposition", moment_decomposition),
        ("hull bound", hull_bound),
        ("exact diagonal", exact_diagonal),
        ("approximate diagonal", approx_diagonal),
        ("schatten perturbation", schatten),
        ("power diagonal", power_diagonal),
        ("pinching", pinching),
        ("splitting constants", splitting_constants),
        ("power pinching", power_pinching),
        ("diagnostics", diagnostics),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
