//! Attainment: a unit vector, orthogonal to a given finite family, whose joint value
//! ⟨Sx, x⟩ equals a prescribed point.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::foundation::linalg::{lanczos_extremes, normalized};
use crate::foundation::{cx, CVec, Complement, SelfAdjointTuple, C64};
use crate::numrange::convex_hull_2d;

/// Solver knobs.
#[derive(Clone, Debug)]
pub struct AttainOptions {
    pub tol: f64,
    pub seed: u64,
    /// Hull refinement rounds for s ≤ 2.
    pub rounds: usize,
    pub multistarts: usize,
    pub krylov: usize,
}

impl AttainOptions {
    /// Defaults: tolerance 1e-10 for s ≤ 2 and 1e-8 otherwise.
    pub fn for_s(s: usize) -> Self {
        AttainOptions { tol: default_tol(s), seed: 0, rounds: 200, multistarts: 50, krylov: 120 }
    }
}

pub fn default_tol(s: usize) -> f64 {
    if s <= 2 {
        1e-10
    } else {
        1e-8
    }
}

/// Attained vector and its residual ‖⟨Sx,x⟩ − λ‖.
#[derive(Clone, Debug)]
pub struct Attained {
    pub x: CVec,
    pub residual: f64,
}

/// Find a unit x ⊥ avoid with ‖⟨Sx,x⟩ − λ‖ ≤ tol.
pub fn attain_value(s: &SelfAdjointTuple, lambda: &[f64], avoid: &[CVec], tol: f64) -> Result<CVec> {
    let comp = Complement::new(s.dim(), avoid);
    let opts = AttainOptions { tol, ..AttainOptions::for_s(s.s()) };
    attain_in(s, lambda, &comp, &opts).map(|a| a.x)
}

/// As [`attain_value`] with a prepared complement and explicit options.
pub fn attain_in(s: &SelfAdjointTuple, lambda: &[f64], comp: &Complement, opts: &AttainOptions) -> Result<Attained> {
    if lambda.len() != s.s() {
        return Err(Error::Input(format!("target has {} coordinates, tuple has {}", lambda.len(), s.s())));
    }
    if comp.dim() != s.dim() {
        return Err(Error::Input("avoid vectors do not match the tuple dimension".into()));
    }
    if comp.rank() + s.s() >= s.dim() {
        return Err(Error::Input(format!(
            "avoid set of rank {} leaves too little room in dimension {}",
            comp.rank(),
            s.dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let first = if s.s() <= 2 { planar(s, lambda, comp, opts, &mut rng) } else { Err(Error::not_attained("")) };
    let found = match first {
        Ok(x) => Some(x),
        Err(Error::NotAttained { .. }) => {
            // the planar search is conclusive up to Lanczos accuracy, so only a short retry
            let starts = if s.s() <= 2 { opts.multistarts.min(4) } else { opts.multistarts };
            gauss_newton_multistart(s, lambda, comp, &AttainOptions { multistarts: starts, ..opts.clone() }, &mut rng)
        }
        Err(e) => return Err(e),
    };
    let Some(x) = found else {
        return Err(Error::not_attained(format!("no unit vector reached the target within {:.1e}", opts.tol)));
    };
    let x = finish(s, lambda, comp, x, opts);
    let residual = residual(s, lambda, &x);
    if residual > opts.tol {
        return Err(Error::not_attained(format!("best residual {residual:.3e} exceeds {:.1e}", opts.tol)));
    }
    Ok(Attained { x, residual })
}

fn residual(s: &SelfAdjointTuple, lambda: &[f64], x: &CVec) -> f64 {
    s.values(x).iter().zip(lambda).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Final projection, normalisation and a Gauss-Newton polish when needed.
fn finish(s: &SelfAdjointTuple, lambda: &[f64], comp: &Complement, x: CVec, opts: &AttainOptions) -> CVec {
    let x = normalized(&comp.project(&x)).unwrap_or(x);
    if residual(s, lambda, &x) <= opts.tol * 1e-2 {
        return x;
    }
    let polished = gauss_newton(s, lambda, comp, x.clone(), 30);
    let polished = normalized(&comp.project(&polished)).unwrap_or(polished);
    if residual(s, lambda, &polished) < residual(s, lambda, &x) {
        polished
    } else {
        x
    }
}

/// Planar case: the target is a complex number for the operator A = S₁ (+ i S₂).
struct Planar<'a> {
    s: &'a SelfAdjointTuple,
    comp: &'a Complement,
}

impl Planar<'_> {
    fn apply(&self, x: &CVec) -> CVec {
        let mut y = self.s.apply(0, x);
        if self.s.s() == 2 {
            y.axpy(cx(0.0, 1.0), &self.s.apply(1, x), cx(1.0, 0.0));
        }
        y
    }

    fn value(&self, x: &CVec) -> C64 {
        x.dotc(&self.apply(x)) / x.norm_squared()
    }

    /// Support witnesses of Re(e^{−iθ}A) restricted to the complement, in directions θ and θ + π.
    fn witnesses(&self, theta: f64, start: &CVec, krylov: usize, rng: &mut ChaCha8Rng) -> [CVec; 2] {
        let (c, sn) = (theta.cos(), theta.sin());
        let u: Vec<f64> = if self.s.s() == 2 { vec![c, sn] } else { vec![c] };
        let (lo, hi) = lanczos_extremes(|x| self.s.apply_combination(&u, x), self.comp, start, krylov, rng);
        [hi.vector, lo.vector]
    }

    /// Unit vector in span{x1, x2} whose value is the point `target` of the segment
    /// [value(x1), value(x2)]. The path x1 + t e^{iφ} x2 stays on the line through the
    /// two values once φ cancels the transverse part; the remaining scalar equation is
    /// a quadratic in t.
    fn two_witness(&self, x1: &CVec, x2: &CVec, target: C64) -> CVec {
        let w1 = self.value(x1);
        let w2 = self.value(x2);
        let delta = w2 - w1;
        if delta.norm() <= 1e-15 * (w1.norm() + w2.norm()).max(1.0) {
            return x1.clone();
        }
        let m = ((target - w1) / delta).re;
        if m <= 0.0 {
            return x1.clone();
        }
        if m >= 1.0 {
            return x2.clone();
        }
        let ax1 = self.apply(x1);
        let ax2 = self.apply(x2);
        let kappa = x1.dotc(x2);
        let beta = (x1.dotc(&ax2) - w1 * kappa) / delta;
        let gamma = (x2.dotc(&ax1) - w1 * kappa.conj()) / delta;
        let q = beta - gamma.conj();
        let phase = if q.norm() > 0.0 { C64::from_polar(1.0, -q.arg()) } else { cx(1.0, 0.0) };
        let c = (phase * beta + phase.conj() * gamma).re;
        let r = (phase * kappa).re;
        let a = 1.0 - m;
        let b = c - 2.0 * m * r;
        let disc = (b * b + 4.0 * a * m).max(0.0).sqrt();
        let t = if b >= 0.0 { 2.0 * m / (b + disc) } else { (disc - b) / (2.0 * a) };
        let mut x = x1.clone();
        x.axpy(phase * t, x2, cx(1.0, 0.0));
        normalized(&x).unwrap_or_else(|| x1.clone())
    }
}

fn planar(s: &SelfAdjointTuple, lambda: &[f64], comp: &Complement, opts: &AttainOptions, rng: &mut ChaCha8Rng) -> Result<CVec> {
    let p = Planar { s, comp };
    let mu = if s.s() == 2 { cx(lambda[0], lambda[1]) } else { cx(lambda[0], 0.0) };
    let start = comp.random_unit(rng);
    let mut wit: Vec<(C64, CVec)> = Vec::new();
    let push = |p: &Planar, x: CVec, wit: &mut Vec<(C64, CVec)>| {
        let v = p.value(&x);
        wit.push((v, x));
    };
    let initial: &[f64] = if s.s() == 2 { &[0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0] } else { &[0.0] };
    for &th in initial {
        let [a, b] = p.witnesses(th, &start, opts.krylov, rng);
        push(&p, a, &mut wit);
        push(&p, b, &mut wit);
    }
    for _ in 0..opts.rounds {
        let pts: Vec<[f64; 2]> = wit.iter().map(|(v, _)| [v.re, v.im]).collect();
        let hull = convex_hull_2d(&pts);
        let idx: Vec<usize> = hull
            .iter()
            .map(|h| pts.iter().position(|q| q[0] == h[0] && q[1] == h[1]).unwrap_or(0))
            .collect();
        let scale = pts.iter().map(|q| q[0].abs().max(q[1].abs())).fold(1.0, f64::max);
        match hull.len() {
            1 => {
                return if (mu - wit[idx[0]].0).norm() <= opts.tol { Ok(wit[idx[0]].1.clone()) } else { Err(Error::not_attained("range is a point")) };
            }
            2 => {
                let (a, b) = (wit[idx[0]].0, wit[idx[1]].0);
                let d = b - a;
                let t = (((mu - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
                let proj = a + d * t;
                if s.s() == 1 || (mu - proj).norm() <= opts.tol {
                    if (mu - proj).norm() > opts.tol {
                        return Err(Error::not_attained("target outside the compressed range"));
                    }
                    return Ok(p.two_witness(&wit[idx[0]].1, &wit[idx[1]].1, proj));
                }
                // collinear so far; probe the normal directions
                let n = d * cx(0.0, 1.0);
                let th = n.arg();
                let mut improved = false;
                for dir in [th, th + PI] {
                    let [a2, _] = p.witnesses(dir, &start, opts.krylov, rng);
                    let v = p.value(&a2);
                    let offset = (a * C64::from_polar(1.0, -dir)).re;
                    if (v * C64::from_polar(1.0, -dir)).re > offset + 1e-13 * scale {
                        improved = true;
                    }
                    push(&p, a2, &mut wit);
                }
                if !improved {
                    return Err(Error::not_attained("target off the segment range"));
                }
            }
            k => {
                // outward normals (e.y, −e.x) for a counter-clockwise hull
                let mut worst: Option<(f64, f64)> = None;
                for i in 0..k {
                    let (a, b) = (hull[i], hull[(i + 1) % k]);
                    let e = [b[0] - a[0], b[1] - a[1]];
                    let l = (e[0] * e[0] + e[1] * e[1]).sqrt();
                    let nrm = [e[1] / l, -e[0] / l];
                    let viol = nrm[0] * (mu.re - a[0]) + nrm[1] * (mu.im - a[1]);
                    if viol > 0.0 && worst.is_none_or(|(w, _)| viol > w) {
                        worst = Some((viol, nrm[1].atan2(nrm[0])));
                    }
                }
                match worst {
                    None => {
                        // inside: fan triangulation from hull[0]
                        let v0 = wit[idx[0]].0;
                        for i in 1..k - 1 {
                            let (v1, v2) = (wit[idx[i]].0, wit[idx[i + 1]].0);
                            if let Some((_, bb, cc)) = barycentric(mu, v0, v1, v2) {
                                if bb + cc <= 1e-15 {
                                    return Ok(wit[idx[0]].1.clone());
                                }
                                let q = (v1 * bb + v2 * cc) / (bb + cc);
                                let xq = p.two_witness(&wit[idx[i]].1, &wit[idx[i + 1]].1, q);
                                return Ok(p.two_witness(&wit[idx[0]].1, &xq, mu));
                            }
                        }
                        return Err(Error::Internal("fan triangulation missed an interior point".into()));
                    }
                    Some((viol, dir)) => {
                        let [a2, _] = p.witnesses(dir, &start, opts.krylov, rng);
                        let v = p.value(&a2);
                        let offset_gain = (v * C64::from_polar(1.0, -dir)).re - (mu * C64::from_polar(1.0, -dir)).re + viol;
                        push(&p, a2, &mut wit);
                        if offset_gain <= 1e-13 * scale {
                            // no progress in the most violated direction: settle for the
                            // nearest hull point when it is close enough
                            let pts: Vec<[f64; 2]> = wit.iter().map(|(v, _)| [v.re, v.im]).collect();
                            let region = crate::numrange::ConvexRegion::Polygon { vertices: pts };
                            let near = region.nearest_point(&[mu.re, mu.im]);
                            let nearc = cx(near[0], near[1]);
                            if (nearc - mu).norm() <= opts.tol {
                                let inner = Planar { s, comp };
                                return planar_inside(&inner, &wit, nearc);
                            }
                            return Err(Error::not_attained("target outside the compressed range"));
                        }
                    }
                }
            }
        }
    }
    Err(Error::not_attained("hull refinement budget exhausted"))
}

/// Fan triangulation for a point known to lie in the witness hull.
fn planar_inside(p: &Planar, wit: &[(C64, CVec)], mu: C64) -> Result<CVec> {
    let pts: Vec<[f64; 2]> = wit.iter().map(|(v, _)| [v.re, v.im]).collect();
    let hull = convex_hull_2d(&pts);
    let idx: Vec<usize> = hull.iter().map(|h| pts.iter().position(|q| q[0] == h[0] && q[1] == h[1]).unwrap_or(0)).collect();
    let k = hull.len();
    let v0 = wit[idx[0]].0;
    let mut best: Option<(f64, usize, f64, f64)> = None;
    for i in 1..k.saturating_sub(1) {
        let (v1, v2) = (wit[idx[i]].0, wit[idx[i + 1]].0);
        if let Some((a, b, c)) = barycentric_raw(mu, v0, v1, v2) {
            let worst = a.min(b).min(c);
            if best.is_none_or(|bb| worst > bb.0) {
                best = Some((worst, i, b.max(0.0), c.max(0.0)));
            }
        }
    }
    let Some((_, i, b, c)) = best else {
        return Err(Error::not_attained("degenerate witness hull"));
    };
    if b + c <= 1e-15 {
        return Ok(wit[idx[0]].1.clone());
    }
    let q = (wit[idx[i]].0 * b + wit[idx[i + 1]].0 * c) / (b + c);
    let xq = p.two_witness(&wit[idx[i]].1, &wit[idx[i + 1]].1, q);
    Ok(p.two_witness(&wit[idx[0]].1, &xq, mu))
}

fn barycentric_raw(p: C64, a: C64, b: C64, c: C64) -> Option<(f64, f64, f64)> {
    let v0 = b - a;
    let v1 = c - a;
    let v2 = p - a;
    let det = v0.re * v1.im - v0.im * v1.re;
    if det.abs() <= 1e-300 {
        return None;
    }
    let bb = (v2.re * v1.im - v2.im * v1.re) / det;
    let cc = (v0.re * v2.im - v0.im * v2.re) / det;
    Some((1.0 - bb - cc, bb, cc))
}

fn barycentric(p: C64, a: C64, b: C64, c: C64) -> Option<(f64, f64, f64)> {
    let (x, y, z) = barycentric_raw(p, a, b, c)?;
    let eps = -1e-12;
    if x >= eps && y >= eps && z >= eps {
        Some((x.max(0.0), y.max(0.0), z.max(0.0)))
    } else {
        None
    }
}

/// Projected Gauss-Newton on the unit sphere of the complement, minimising
/// ‖⟨Sx,x⟩ − λ‖² with the minimum-norm step.
fn gauss_newton(s: &SelfAdjointTuple, lambda: &[f64], comp: &Complement, mut x: CVec, iters: usize) -> CVec {
    let k = s.s();
    let mut res = residual(s, lambda, &x);
    let floor = 1e-15 * lambda.iter().map(|v| v.abs()).fold(1.0, f64::max);
    for _ in 0..iters {
        if res <= floor {
            break;
        }
        let sx: Vec<CVec> = (0..k).map(|j| s.apply(j, &x)).collect();
        let f: Vec<f64> = sx.iter().map(|v| x.dotc(v).re).collect();
        let g: Vec<CVec> = sx
            .iter()
            .zip(&f)
            .map(|(v, fj)| {
                let mut gj = comp.project(v);
                gj.axpy(cx(-fj, 0.0), &x, cx(1.0, 0.0));
                gj
            })
            .collect();
        let gram = DMatrix::<f64>::from_fn(k, k, |i, j| g[i].dotc(&g[j]).re);
        let rhs = nalgebra::DVector::<f64>::from_fn(k, |j, _| -(f[j] - lambda[j]) / 2.0);
        let svd = gram.svd(true, true);
        let Ok(c) = svd.solve(&rhs, 1e-14 * svd.singular_values.max().max(1e-300)) else {
            break;
        };
        let mut step = CVec::zeros(x.len());
        for j in 0..k {
            step.axpy(cx(c[j], 0.0), &g[j], cx(1.0, 0.0));
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut y = x.clone();
            y.axpy(cx(alpha, 0.0), &step, cx(1.0, 0.0));
            if let Some(y) = normalized(&comp.project(&y)) {
                let r = residual(s, lambda, &y);
                if r < res {
                    x = y;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    x
}

fn gauss_newton_multistart(
    s: &SelfAdjointTuple,
    lambda: &[f64],
    comp: &Complement,
    opts: &AttainOptions,
    rng: &mut ChaCha8Rng,
) -> Option<CVec> {
    let mut best: Option<(f64, CVec)> = None;
    for start in 0..opts.multistarts {
        let x0 = if start % 2 == 1 {
            // lean towards the target along a support witness
            let center = s.values(&comp.random_unit(rng));
            let dir: Vec<f64> = lambda.iter().zip(&center).map(|(a, b)| a - b).collect();
            let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let r = comp.random_unit(rng);
            if n > 0.0 {
                let u: Vec<f64> = dir.iter().map(|v| v / n).collect();
                let (_, hi) = lanczos_extremes(|x| s.apply_combination(&u, x), comp, &r, 24, rng);
                let mut m = r.clone();
                m.axpy(cx(1.0, 0.0), &hi.vector, cx(1.0, 0.0));
                normalized(&m).unwrap_or(r)
            } else {
                r
            }
        } else {
            comp.random_unit(rng)
        };
        let x = gauss_newton(s, lambda, comp, x0, 100);
        let r = residual(s, lambda, &x);
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, x));
        }
        if r <= opts.tol * 1e-3 {
            break;
        }
    }
    best.filter(|(r, _)| *r <= opts.tol).map(|(_, x)| x)
}
