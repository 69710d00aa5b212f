use serde::{Deserialize, Serialize};

use super::certificate::{Branch, BuildKind, Certificate, StepRecord, CERT_SLACK};
use super::exact::{step_seed, Progress};
use super::{complex_to_real, partition_indices, real_to_complex, BuildOptions};
use crate::diagnostics::{classify_trend, Trend, TrendReport};
use crate::error::{Error, Result};
use crate::foundation::linalg::normalized;
use crate::foundation::{cx, hermitian_parts, CVec, Complement, DenseSequence, Frame, OperatorTuple, SelfAdjointTuple, C64, TOL_ORTHO};
use crate::inverse_range::{attain_in, AttainOptions, Attained};
use crate::numrange::ConvexRegion;
use crate::SCHEMA;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A unit vector in the complement whose value is within `budget` of λ. Boundary
/// targets are pulled toward the region's interior by 0.9·budget and attained to
/// 0.1·budget.
fn attain_near(
    s: &SelfAdjointTuple,
    lambda: &[f64],
    budget: f64,
    comp: &Complement,
    region: &ConvexRegion,
    seed: u64,
    step: usize,
) -> Result<Attained> {
    let base = AttainOptions { tol: 0.9 * budget, seed, rounds: 40, multistarts: 2, ..AttainOptions::for_s(s.s()) };
    // a truncation never reaches the boundary of the essential range, so only targets
    // well inside are tried as they are
    if region.dist_to_complement(lambda) >= budget {
        match attain_in(s, lambda, comp, &base) {
            Ok(a) => return Ok(a),
            Err(Error::NotAttained { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let reference = region.interior_reference();
    let d = dist(lambda, &reference);
    if d == 0.0 {
        return Err(Error::NotAttained { step: Some(step), reason: "target unreachable at the region's reference point".into() });
    }
    let pull = (0.9 * budget).min(d);
    let target: Vec<f64> = lambda.iter().zip(&reference).map(|(l, r)| l + (r - l) * pull / d).collect();
    let inner = AttainOptions { tol: 0.1 * budget, ..base };
    attain_in(s, &target, comp, &inner).map_err(|e| e.at_step(step))
}

/// Approximate diagonal: ‖⟨𝒯u_k,u_k⟩ − λ_k‖ ≤ |α_k| for targets in the region, with
/// the mixing u = c b + √(1−c²) v and c = min{1, (|α|/(4 max‖T_j‖))^{1/2}}.
pub fn build_approx_diagonal(
    t: &OperatorTuple,
    region: &ConvexRegion,
    targets: &[Vec<C64>],
    alphas: &[f64],
    dense: &DenseSequence,
    opts: &BuildOptions,
) -> Result<(Frame, Certificate)> {
    region.validate()?;
    let k = targets.len();
    if alphas.len() < k {
        return Err(Error::Input(format!("{} tolerances for {k} targets", alphas.len())));
    }
    let s = hermitian_parts(t);
    let ns = s.s();
    let real: Vec<Vec<f64>> = targets.iter().map(|z| complex_to_real(z)).collect();
    let mut weights = Vec::with_capacity(k);
    for (i, (l, a)) in real.iter().zip(alphas).enumerate() {
        if l.len() != region.ambient() || l.len() != ns {
            return Err(Error::Input(format!("target {} does not match the tuple and region", i + 1)));
        }
        if !a.is_finite() || *a == 0.0 {
            return Err(Error::Input(format!("tolerance {} must be nonzero", i + 1)));
        }
        if !region.contains(l, 1e-12) {
            return Err(Error::Geometry(format!("target {} lies outside the region", i + 1)));
        }
        weights.push(a.abs());
    }
    let max_norm = t.norms().into_iter().fold(0.0, f64::max);
    let scale = 4.0 * max_norm;
    let groups = partition_indices(&weights, opts.groups);
    let mut pr = Progress::new(s.dim(), dense, &groups, k)?;
    let mut steps = Vec::with_capacity(k);
    for n in 0..k {
        let step = n + 1;
        let lambda = &real[n];
        let a = weights[n];
        let seed = step_seed(opts.seed, step);
        let c = (a / scale).sqrt().min(1.0);
        let (tt, b) = pr.split(n);
        let mut rec = StepRecord {
            step,
            group: pr.owner[n],
            branch: Branch::Absorbed,
            t: tt,
            rho: 0.0,
            delta: a / 2.0,
            mix: 0.0,
            attain_residual: 0.0,
            residual: 0.0,
            running_sum: 0.0,
            ledger_bound: 0.0,
            log_dist2: None,
            b_value: Vec::new(),
            mu: Vec::new(),
        };
        let room = |comp: &Complement| {
            if comp.rank() + ns >= comp.dim() {
                Err(Error::NotAttained { step: Some(step), reason: "truncation exhausted".into() })
            } else {
                Ok(())
            }
        };
        let u: CVec = match b {
            None => {
                room(&pr.comp)?;
                let v = attain_near(&s, lambda, a / 2.0, &pr.comp, region, seed, step)?;
                rec.attain_residual = v.residual;
                v.x
            }
            Some(b) => {
                let vb = s.values(&b);
                rec.rho = dist(&vb, lambda);
                rec.b_value = vb;
                if c >= 1.0 {
                    rec.branch = Branch::Direct;
                    rec.mix = 1.0;
                    b
                } else {
                    let mut comp = pr.comp.clone();
                    comp.push(&b);
                    for j in 0..ns {
                        comp.push(&s.apply(j, &b));
                    }
                    room(&comp)?;
                    let v = attain_near(&s, lambda, a / 2.0, &comp, region, seed, step)?;
                    rec.attain_residual = v.residual;
                    rec.branch = Branch::Mixed;
                    rec.mix = c * c;
                    let mut u = v.x.scale((1.0 - c * c).sqrt());
                    u.axpy(cx(c, 0.0), &b, cx(1.0, 0.0));
                    normalized(&u).unwrap_or(u)
                }
            }
        };
        rec.residual = dist(&s.values(&u), lambda);
        if rec.residual > a {
            return Err(Error::NotAttained {
                step: Some(step),
                reason: format!("residual {:.3e} exceeds |α| = {a:.3e}", rec.residual),
            });
        }
        pr.push(u);
        let m = pr.owner[n];
        pr.running[m] += a;
        rec.running_sum = pr.running[m];
        rec.ledger_bound = -pr.running[m] / scale;
        rec.log_dist2 = pr.log_dist2(n);
        steps.push(rec);
    }
    let trend = classify_trend(&weights).trend;
    let cert = Certificate {
        schema: SCHEMA.to_string(),
        kind: BuildKind::Approximate,
        s: ns,
        max_norm,
        slack: CERT_SLACK,
        tol_attain: 0.0,
        seed: opts.seed,
        targets: real,
        bounds: weights.clone(),
        weights,
        groups,
        weight_trend: trend,
        weak_divergence: trend != Trend::DivergingTrend,
        steps,
    };
    Ok((Frame::unchecked(pr.frame, TOL_ORTHO), cert))
}

/// Diagonal of a perturbation 𝒦 with 𝒯 + 𝒦 having diagonal (λ_k).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchattenReport {
    pub p: f64,
    /// λ'_k, the nearest points of the region.
    #[serde(with = "crate::io::complex_vecvec")]
    pub nearest: Vec<Vec<C64>>,
    /// κ_k = λ_k − ⟨𝒯u_k,u_k⟩.
    #[serde(with = "crate::io::complex_vecvec")]
    pub kappa: Vec<Vec<C64>>,
    /// Σ_{j≤k} ‖κ_j‖^p
    pub kappa_partial_sums: Vec<f64>,
    /// Σ_{j≤k} (‖λ_j − λ'_j‖ + 1/j)^p
    pub dominating_partial_sums: Vec<f64>,
    pub within_bound: bool,
    /// Trend of Σ dist^p{λ_k, region}, the finite-horizon hypothesis.
    pub hypothesis: TrendReport,
    pub certificate: Certificate,
}

/// Perturbation with p-summable diagonal: λ'_k is the nearest point of the region,
/// u_k comes from the approximate builder with α_k = 1/k, and κ_k closes the gap.
pub fn build_schatten_perturbation(
    t: &OperatorTuple,
    targets: &[Vec<C64>],
    p: f64,
    region: &ConvexRegion,
    dense: &DenseSequence,
    opts: &BuildOptions,
) -> Result<(Frame, SchattenReport)> {
    if !(p > 1.0) {
        return Err(Error::Input(format!("exponent p = {p} must exceed 1")));
    }
    region.validate()?;
    let real: Vec<Vec<f64>> = targets.iter().map(|z| complex_to_real(z)).collect();
    if real.iter().any(|l| l.len() != region.ambient()) {
        return Err(Error::Input("targets do not match the region".into()));
    }
    let nearest_real: Vec<Vec<f64>> = real.iter().map(|l| region.nearest_point(l)).collect();
    let gaps: Vec<f64> = real.iter().zip(&nearest_real).map(|(l, q)| dist(l, q)).collect();
    let nearest: Vec<Vec<C64>> = nearest_real.iter().map(|q| real_to_complex(q)).collect();
    let alphas: Vec<f64> = (1..=targets.len()).map(|k| 1.0 / k as f64).collect();
    let (frame, certificate) = build_approx_diagonal(t, region, &nearest, &alphas, dense, opts)?;
    let mut kappa = Vec::with_capacity(targets.len());
    let mut kappa_partial_sums = Vec::with_capacity(targets.len());
    let mut dominating_partial_sums = Vec::with_capacity(targets.len());
    let (mut acc, mut dom) = (0.0, 0.0);
    for (k, u) in frame.vectors().iter().enumerate() {
        let vals = t.values(u);
        let kap: Vec<C64> = targets[k].iter().zip(&vals).map(|(l, v)| l - v).collect();
        let norm = kap.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        acc += norm.powf(p);
        dom += (gaps[k] + alphas[k]).powf(p);
        kappa.push(kap);
        kappa_partial_sums.push(acc);
        dominating_partial_sums.push(dom);
    }
    let within_bound = kappa_partial_sums.iter().zip(&dominating_partial_sums).all(|(a, b)| *a <= b + 1e-12);
    let hypothesis = classify_trend(&gaps.iter().map(|g| g.powf(p)).collect::<Vec<_>>());
    Ok((
        frame,
        SchattenReport { p, nearest, kappa, kappa_partial_sums, dominating_partial_sums, within_bound, hypothesis, certificate },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagonal::verify_certificate;
    use crate::foundation::Operator;

    #[test]
    fn approx_zero_with_harmonic_tolerances() {
        let t = Operator::shift(128).unwrap();
        let tuple = OperatorTuple::single(&t);
        let region = ConvexRegion::disc([0.0, 0.0], 0.9);
        let targets = vec![vec![cx(0.0, 0.0)]; 24];
        let alphas: Vec<f64> = (1..=24).map(|k| 1.0 / k as f64).collect();
        let dense = DenseSequence::standard(128);
        let (frame, cert) = build_approx_diagonal(&tuple, &region, &targets, &alphas, &dense, &BuildOptions::default()).unwrap();
        for (k, u) in frame.vectors().iter().enumerate() {
            assert!(u.dotc(&t.apply(u)).norm() <= alphas[k]);
        }
        let s = hermitian_parts(&tuple);
        assert!(verify_certificate(&cert, &frame, &s, &dense).passed);
    }

    #[test]
    fn huge_tolerance_takes_b() {
        let t = Operator::shift(32).unwrap();
        let region = ConvexRegion::disc([0.0, 0.0], 0.9);
        let (_, cert) = build_approx_diagonal(
            &OperatorTuple::single(&t),
            &region,
            &[vec![cx(0.0, 0.0)]],
            &[5.0],
            &DenseSequence::standard(32),
            &BuildOptions::default(),
        )
        .unwrap();
        assert_eq!(cert.steps[0].branch, Branch::Direct);
    }

    #[test]
    fn schatten_needs_p_above_one() {
        let t = Operator::shift(16).unwrap();
        let r = build_schatten_perturbation(
            &OperatorTuple::single(&t),
            &[vec![cx(0.0, 0.0)]],
            1.0,
            &ConvexRegion::disc([0.0, 0.0], 1.0),
            &DenseSequence::standard(16),
            &BuildOptions::default(),
        );
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn schatten_inside_region() {
        let t = Operator::shift(96).unwrap();
        let targets: Vec<Vec<C64>> = (1..=12).map(|k| vec![cx(0.3 / k as f64, 0.1)]).collect();
        let (_, rep) = build_schatten_perturbation(
            &OperatorTuple::single(&t),
            &targets,
            2.0,
            &ConvexRegion::disc([0.0, 0.0], 0.9),
            &DenseSequence::standard(96),
            &BuildOptions::default(),
        )
        .unwrap();
        for (k, kap) in rep.kappa.iter().enumerate() {
            assert!(kap[0].norm() <= 1.0 / (k + 1) as f64);
        }
        assert!(rep.within_bound);
    }
}
