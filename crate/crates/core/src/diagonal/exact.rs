use serde::{Deserialize, Serialize};

use super::certificate::{Branch, BuildKind, Certificate, StepRecord, CERT_SLACK};
use super::{complex_to_real, owners, partition_indices, BuildOptions, TIE_TOL};
use crate::diagnostics::{classify_trend, Trend};
use crate::error::{Error, Result};
use crate::foundation::linalg::normalized;
use crate::foundation::{cx, hermitian_parts, CVec, Complement, DenseSequence, Frame, Operator, OperatorTuple, SelfAdjointTuple, C64, TOL_ORTHO};
use crate::inverse_range::{attain_in, default_tol, AttainOptions};
use crate::moments::hull_distance_lower_bound;
use crate::numrange::{affine_hull, ConvexRegion};
use crate::SCHEMA;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(super) fn step_seed(seed: u64, step: usize) -> u64 {
    seed ^ (step as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Orthonormal family u_1, …, u_K with ⟨𝒮u_k,u_k⟩ = λ_k, the tracked residuals
/// y_m − P_M y_m, and the running complement of M.
pub(super) struct Progress {
    pub frame: Vec<CVec>,
    pub comp: Complement,
    pub residuals: Vec<CVec>,
    pub owner: Vec<usize>,
    pub running: Vec<f64>,
}

impl Progress {
    pub fn new(dim: usize, dense: &DenseSequence, groups: &[Vec<usize>], k: usize) -> Result<Self> {
        if groups.len() > dense.len() {
            return Err(Error::Input(format!("{} groups but only {} spanning vectors", groups.len(), dense.len())));
        }
        if dense.vectors()[0].len() != dim {
            return Err(Error::Input("spanning sequence does not match the dimension".into()));
        }
        Ok(Progress {
            frame: Vec::with_capacity(k),
            comp: Complement::full(dim),
            residuals: dense.vectors()[..groups.len()].to_vec(),
            owner: owners(groups, k),
            running: vec![0.0; groups.len()],
        })
    }

    /// The tracked vector of the group owning step n, split as t·b.
    pub fn split(&self, n: usize) -> (f64, Option<CVec>) {
        let r = self.comp.project(&self.residuals[self.owner[n]]);
        let t = r.norm();
        if t <= TIE_TOL {
            (t, None)
        } else {
            (t, Some(r.unscale(t)))
        }
    }

    pub fn push(&mut self, u: CVec) {
        for r in self.residuals.iter_mut() {
            let c = u.dotc(r);
            r.axpy(-c, &u, cx(1.0, 0.0));
        }
        self.comp.push(&u);
        self.frame.push(u);
    }

    pub fn log_dist2(&self, n: usize) -> Option<f64> {
        let d2 = self.comp.project(&self.residuals[self.owner[n]]).norm_squared();
        (d2 > 0.0).then(|| d2.ln())
    }
}

fn exhausted(step: usize, comp: &Complement, s: usize) -> Error {
    Error::NotAttained {
        step: Some(step),
        reason: format!("truncation exhausted: {} of {} dimensions used with s = {s}", comp.rank(), comp.dim()),
    }
}

/// Greedy exact construction on a selfadjoint tuple with per-step ledger weights w_k > 0.
pub(super) fn exact_core(
    s: &SelfAdjointTuple,
    targets: &[Vec<f64>],
    weights: &[f64],
    dense: &DenseSequence,
    opts: &BuildOptions,
    kind: BuildKind,
) -> Result<(Frame, Certificate)> {
    let k = targets.len();
    let ns = s.s();
    for (i, (t, w)) in targets.iter().zip(weights).enumerate() {
        if t.len() != ns {
            return Err(Error::Input(format!("target {} has {} coordinates, tuple has {ns}", i + 1, t.len())));
        }
        if !(*w > 0.0) {
            return Err(Error::Geometry(format!("target {} is not interior (weight {w:.3e})", i + 1)));
        }
    }
    let tol = opts.tol.unwrap_or(default_tol(ns));
    let max_norm = s.max_norm();
    let scale = 4.0 * max_norm;
    let groups = partition_indices(weights, opts.groups);
    let mut pr = Progress::new(s.dim(), dense, &groups, k)?;
    let mut steps = Vec::with_capacity(k);
    for n in 0..k {
        let step = n + 1;
        let lambda = &targets[n];
        let attain_opts = AttainOptions { tol, seed: step_seed(opts.seed, step), ..AttainOptions::for_s(ns) };
        let (t, b) = pr.split(n);
        let mut rec = StepRecord {
            step,
            group: pr.owner[n],
            branch: Branch::Absorbed,
            t,
            rho: 0.0,
            delta: weights[n] / 2.0,
            mix: 0.0,
            attain_residual: 0.0,
            residual: 0.0,
            running_sum: 0.0,
            ledger_bound: 0.0,
            log_dist2: None,
            b_value: Vec::new(),
            mu: Vec::new(),
        };
        let u = match b {
            None => {
                if pr.comp.rank() + ns >= s.dim() {
                    return Err(exhausted(step, &pr.comp, ns));
                }
                let a = attain_in(s, lambda, &pr.comp, &attain_opts).map_err(|e| e.at_step(step))?;
                rec.attain_residual = a.residual;
                a.x
            }
            Some(b) => {
                let vb = s.values(&b);
                let rho = dist(&vb, lambda);
                rec.rho = rho;
                rec.b_value = vb.clone();
                if rho <= TIE_TOL {
                    rec.branch = Branch::Direct;
                    rec.mix = 1.0;
                    b
                } else {
                    let delta = rec.delta;
                    let mu: Vec<f64> = lambda.iter().zip(&vb).map(|(l, v)| l - delta * (v - l) / rho).collect();
                    let mut comp = pr.comp.clone();
                    comp.push(&b);
                    for j in 0..ns {
                        comp.push(&s.apply(j, &b));
                    }
                    if comp.rank() + ns >= s.dim() {
                        return Err(exhausted(step, &comp, ns));
                    }
                    let a = attain_in(s, &mu, &comp, &attain_opts).map_err(|e| e.at_step(step))?;
                    rec.attain_residual = a.residual;
                    rec.branch = Branch::Mixed;
                    rec.mix = delta / (rho + delta);
                    rec.mu = mu;
                    let mut u = a.x.scale((rho / (rho + delta)).sqrt());
                    u.axpy(cx(rec.mix.sqrt(), 0.0), &b, cx(1.0, 0.0));
                    normalized(&u).unwrap_or(u)
                }
            }
        };
        rec.residual = dist(&s.values(&u), lambda);
        if rec.residual > tol {
            return Err(Error::NotAttained {
                step: Some(step),
                reason: format!("diagonal residual {:.3e} above {tol:.1e}", rec.residual),
            });
        }
        pr.push(u);
        let m = pr.owner[n];
        pr.running[m] += weights[n];
        rec.running_sum = pr.running[m];
        rec.ledger_bound = -pr.running[m] / scale;
        rec.log_dist2 = pr.log_dist2(n);
        steps.push(rec);
    }
    let trend = classify_trend(weights).trend;
    let cert = Certificate {
        schema: SCHEMA.to_string(),
        kind,
        s: ns,
        max_norm,
        slack: CERT_SLACK,
        tol_attain: tol,
        seed: opts.seed,
        targets: targets.to_vec(),
        weights: weights.to_vec(),
        bounds: vec![tol; k],
        groups,
        weight_trend: trend,
        weak_divergence: trend != Trend::DivergingTrend,
        steps,
    };
    Ok((Frame::unchecked(pr.frame, TOL_ORTHO), cert))
}

/// Exact diagonal for a selfadjoint tuple: ⟨𝒮u_k,u_k⟩ = λ_k for targets in the interior
/// of a region standing in for the essential joint range.
pub fn build_exact_diagonal(
    s: &SelfAdjointTuple,
    region: &ConvexRegion,
    targets: &[Vec<f64>],
    dense: &DenseSequence,
    opts: &BuildOptions,
) -> Result<(Frame, Certificate)> {
    region.validate()?;
    let mut weights = Vec::with_capacity(targets.len());
    for (i, t) in targets.iter().enumerate() {
        if t.len() != region.ambient() {
            return Err(Error::Input(format!("target {} lives in R^{}, region in R^{}", i + 1, t.len(), region.ambient())));
        }
        let w = region.dist_to_complement(t);
        if w <= 0.0 {
            return Err(Error::Geometry(format!("target {} is not in the interior of the region", i + 1)));
        }
        weights.push(w);
    }
    exact_core(s, targets, &weights, dense, opts, BuildKind::Exact)
}

/// Run the exact builder in the orthonormal coordinates of the affine hull of the joint
/// range, then report the certificate in the original coordinates.
fn build_reduced(
    s: &SelfAdjointTuple,
    targets: &[Vec<f64>],
    weights: Option<&[f64]>,
    region: Option<&ConvexRegion>,
    dense: &DenseSequence,
    opts: &BuildOptions,
    kind: BuildKind,
) -> Result<(Frame, Certificate)> {
    let hull = affine_hull(s);
    if hull.dim() == 0 {
        return Err(Error::Geometry("the joint range is a single point".into()));
    }
    for (i, t) in targets.iter().enumerate() {
        if t.len() != s.s() {
            return Err(Error::Input(format!("target {} has {} coordinates, tuple has {}", i + 1, t.len(), s.s())));
        }
        hull.check_target(i + 1, t, 1e-8)?;
    }
    let reduced_targets: Vec<Vec<f64>> = targets.iter().map(|t| hull.to_reduced(t)).collect();
    let weights = match (weights, region) {
        (Some(w), _) => w.to_vec(),
        (None, Some(r)) => {
            r.validate()?;
            let rr = r.reduce(&hull)?;
            let mut w = Vec::with_capacity(targets.len());
            for (i, y) in reduced_targets.iter().enumerate() {
                let d = rr.dist_to_complement(y);
                if d <= 0.0 {
                    return Err(Error::Geometry(format!("target {} is not in the relative interior of the region", i + 1)));
                }
                w.push(d);
            }
            w
        }
        (None, None) => return Err(Error::Input("neither weights nor a region were given".into())),
    };
    let reduced = hull.reduce_tuple(s);
    let opts = BuildOptions { tol: Some(opts.tol.unwrap_or(default_tol(reduced.s()))), ..opts.clone() };
    let (frame, mut cert) = exact_core(&reduced, &reduced_targets, &weights, dense, &opts, kind)?;
    let tol = cert.tol_attain;
    cert.s = s.s();
    cert.bounds = targets
        .iter()
        .map(|t| tol + dist(t, &hull.from_reduced(&hull.to_reduced(t))) + 1e-9)
        .collect();
    for (rec, u) in cert.steps.iter_mut().zip(frame.vectors()) {
        let i = rec.step - 1;
        rec.residual = dist(&s.values(u), &targets[i]);
        if rec.residual > cert.bounds[i] {
            return Err(Error::NotAttained {
                step: Some(rec.step),
                reason: format!("reconstructed residual {:.3e} above {:.3e}", rec.residual, cert.bounds[i]),
            });
        }
        if !rec.b_value.is_empty() {
            rec.b_value = hull.from_reduced(&rec.b_value);
        }
        if !rec.mu.is_empty() {
            rec.mu = hull.from_reduced(&rec.mu);
        }
    }
    cert.targets = targets.to_vec();
    Ok((frame, cert))
}

/// Exact diagonal for a tuple of arbitrary operators with targets in ℂⁿ, via the
/// selfadjoint parts and the affine hull of their joint range.
pub fn build_exact_diagonal_complex(
    t: &OperatorTuple,
    region: &ConvexRegion,
    targets: &[Vec<C64>],
    dense: &DenseSequence,
    opts: &BuildOptions,
) -> Result<(Frame, Certificate)> {
    let s = hermitian_parts(t);
    let real: Vec<Vec<f64>> = targets.iter().map(|z| complex_to_real(z)).collect();
    build_reduced(&s, &real, None, Some(region), dense, opts, BuildKind::Exact)
}

/// Declared disc standing in for the polynomial hull of the spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDisc {
    #[serde(with = "crate::io::complex")]
    pub center: C64,
    pub radius: f64,
}

/// Power diagonal: ⟨T^j u_k,u_k⟩ = λ_k^j for j = 1..n, through the exact builder on
/// (T, …, Tⁿ) with weights given by the hull-distance lower bound around the moment point.
pub fn build_power_diagonal(
    t: &Operator,
    lambdas: &[C64],
    n: usize,
    disc: &SpectralDisc,
    dense: &DenseSequence,
    opts: &BuildOptions,
) -> Result<(Frame, Certificate)> {
    if n == 0 {
        return Err(Error::Input("power n must be at least 1".into()));
    }
    let mut weights = Vec::with_capacity(lambdas.len());
    let mut targets = Vec::with_capacity(lambdas.len());
    for (i, &l) in lambdas.iter().enumerate() {
        let rho = (disc.radius - (l - disc.center).norm()).min(1.0);
        if rho <= 0.0 {
            return Err(Error::Geometry(format!("point {} is not inside the declared spectral disc", i + 1)));
        }
        weights.push(hull_distance_lower_bound(l, rho, n)?);
        let mut p = cx(1.0, 0.0);
        let moments: Vec<C64> = (0..n)
            .map(|_| {
                p *= l;
                p
            })
            .collect();
        targets.push(complex_to_real(&moments));
    }
    let s = hermitian_parts(&OperatorTuple::powers(t, n));
    build_reduced(&s, &targets, Some(&weights), None, dense, opts, BuildKind::Power)
}
