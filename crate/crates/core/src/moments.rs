//! Circular moment decompositions, the affine maps G_λ and the power-curve hull bounds.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::{cx, C64};

/// Max-norm on ℂⁿ.
pub fn max_norm(z: &[C64]) -> f64 {
    z.iter().map(|w| w.norm()).fold(0.0, f64::max)
}

/// Weights α_j ≥ 0 and points μ_j on the circle of radius ρ with Σ α_j μ_j^k = ε_k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentDecomposition {
    pub rho: f64,
    pub n: usize,
    #[serde(with = "crate::io::complex_vec")]
    pub points: Vec<C64>,
    pub weights: Vec<f64>,
    #[serde(with = "crate::io::complex_vec")]
    pub target: Vec<C64>,
}

impl MomentDecomposition {
    /// (Σ α_j μ_j^k)_{k=1..n}
    pub fn moments(&self) -> Vec<C64> {
        (1..=self.n)
            .map(|k| {
                self.points
                    .iter()
                    .zip(&self.weights)
                    .map(|(p, a)| p.powi(k as i32) * *a)
                    .sum()
            })
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest |Σ α_j μ_j^k − ε_k| over k.
    pub fn residual(&self) -> f64 {
        let m = self.moments();
        m.iter().zip(&self.target).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// b₁ = 1/ρ, b_n = 2 b_{n−1} + ρ⁻ⁿ.
pub fn b_bound(n: usize, rho: f64) -> f64 {
    let mut b = 0.0;
    for k in 1..=n {
        b = 2.0 * b + rho.powi(-(k as i32));
    }
    b
}

/// Inductive decomposition: match the first k−1 moments, then correct the k-th with
/// k equally spaced points, whose lower moments cancel.
pub fn circle_moment_decompose(eps: &[C64], rho: f64) -> MomentDecomposition {
    let n = eps.len();
    let mut points: Vec<C64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for k in 1..=n {
        let current: C64 = points.iter().zip(&weights).map(|(p, a)| p.powi(k as i32) * *a).sum();
        let resid = eps[k - 1] - current;
        let mag = resid.norm();
        if mag == 0.0 {
            continue;
        }
        let phi = resid.arg();
        let beta = mag / (k as f64 * rho.powi(k as i32));
        for j in 1..=k {
            let angle = (phi + 2.0 * PI * j as f64) / k as f64;
            points.push(C64::from_polar(rho, angle));
            weights.push(beta);
        }
    }
    MomentDecomposition { rho, n, points, weights, target: eps.to_vec() }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// (G_λ z)_k = Σ_{j=1}^{k} C(k,j) z_j λ^{k−j} + λ^k.
pub fn apply_g(lambda: C64, z: &[C64]) -> Vec<C64> {
    (1..=z.len())
        .map(|k| {
            let mut acc = lambda.powi(k as i32);
            for j in 1..=k {
                acc += z[j - 1] * lambda.powi((k - j) as i32) * binomial(k, j);
            }
            acc
        })
        .collect()
}

/// Inverse of G_λ, which is G_{−λ}.
pub fn invert_g(lambda: C64, w: &[C64]) -> Vec<C64> {
    apply_g(-lambda, w)
}

/// Lipschitz constant 2ⁿ max{1, |λ|ⁿ} of G_λ in the max-norm.
pub fn g_lipschitz(lambda: C64, n: usize) -> f64 {
    2f64.powi(n as i32) * lambda.norm().powi(n as i32).max(1.0)
}

/// Lower bound on the distance from (λ, …, λⁿ) to the boundary of
/// conv{(μ, …, μⁿ) : |μ − λ| ≤ ρ}; needs 0 < ρ ≤ 1.
pub fn hull_distance_lower_bound(lambda: C64, rho: f64, n: usize) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Input(format!("hull bound needs 0 < rho <= 1, got {rho}")));
    }
    if n == 0 {
        return Err(Error::Input("hull bound needs n >= 1".into()));
    }
    let n = n as i32;
    if lambda == cx(0.0, 0.0) {
        Ok(rho.powi(n) / 2f64.powi(n))
    } else {
        Ok(rho.powi(n) / (4f64.powi(n) * lambda.norm().powi(n).max(1.0)))
    }
}

/// ‖μ‖ < 2⁻ⁿ ρⁿ, the sufficient condition for a point to be an infinite joint value of
/// the power tuple when the polynomial hull contains the disc of radius ρ.
pub fn winf_membership_power(mu: &[C64], rho: f64) -> bool {
    let n = mu.len() as i32;
    max_norm(mu) < rho.powi(n) / 2f64.powi(n)
}

/// (z, z², …, zⁿ)
pub fn moment_curve(z: C64, n: usize) -> Vec<C64> {
    (1..=n).map(|k| z.powi(k as i32)).collect()
}

/// Convex combination of curve points expressing a target inside the power hull.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HullCertificate {
    /// Curve parameters μ with |μ − λ| ≤ ρ.
    #[serde(with = "crate::io::complex_vec")]
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
    pub residual: f64,
}

impl HullCertificate {
    pub fn is_convex(&self) -> bool {
        self.weights.iter().all(|w| *w >= 0.0) && (self.weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12
    }
}

/// Express `p` as a convex combination of points (μ, …, μⁿ) with |μ − λ| ≤ ρ by pulling
/// back through G_λ and decomposing on the circle. Returns None when the pulled-back
/// weights exceed one, i.e. the construction does not certify membership.
pub fn certify_hull_membership(p: &[C64], lambda: C64, rho: f64) -> Option<HullCertificate> {
    let n = p.len();
    let eps = invert_g(lambda, p);
    let dec = circle_moment_decompose(&eps, rho);
    let total = dec.total_weight();
    if total > 1.0 {
        return None;
    }
    let mut nodes: Vec<C64> = dec.points.iter().map(|m| lambda + m).collect();
    let mut weights = dec.weights.clone();
    nodes.push(lambda);
    weights.push(1.0 - total);
    let mut recon = vec![cx(0.0, 0.0); n];
    for (z, w) in nodes.iter().zip(&weights) {
        for (k, c) in moment_curve(*z, n).into_iter().enumerate() {
            recon[k] += c * *w;
        }
    }
    let residual = recon.iter().zip(p).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Some(HullCertificate { nodes, weights, residual })
}

/// Sampled inner approximation of conv{(μ, …, μⁿ) : |μ − λ| ≤ ρ}: `m` curve points
/// followed by `m` random convex combinations of them.
pub fn hull_oracle<R: Rng>(lambda: C64, rho: f64, n: usize, m: usize, rng: &mut R) -> Vec<Vec<C64>> {
    let mut curve: Vec<Vec<C64>> = (0..m)
        .map(|i| {
            let r = if i % 2 == 0 { rho } else { rho * rng.random::<f64>().sqrt() };
            let t = 2.0 * PI * rng.random::<f64>();
            moment_curve(lambda + C64::from_polar(r, t), n)
        })
        .collect();
    let mut mixes = Vec::with_capacity(m);
    for _ in 0..m {
        let w: Vec<f64> = (0..curve.len()).map(|_| -rng.random::<f64>().ln()).collect();
        let total: f64 = w.iter().sum();
        let mut p = vec![cx(0.0, 0.0); n];
        for (c, wi) in curve.iter().zip(&w) {
            for k in 0..n {
                p[k] += c[k] * (*wi / total);
            }
        }
        mixes.push(p);
    }
    curve.extend(mixes);
    curve
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14 * b.abs().max(1.0)
    }

    #[test]
    fn b_bound_examples() {
        assert!(close(b_bound(1, 1.0), 1.0));
        assert!(close(b_bound(3, 1.0), 7.0));
        assert!(close(b_bound(2, 0.5), 8.0));
    }

    #[test]
    fn base_case_is_a_single_point() {
        let eps = [C64::from_polar(0.5, PI / 3.0)];
        let d = circle_moment_decompose(&eps, 1.0);
        assert_eq!(d.weights.len(), 1);
        assert!(close(d.weights[0], 0.5));
        assert!((d.points[0] - C64::from_polar(1.0, PI / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_target_is_empty() {
        let d = circle_moment_decompose(&[cx(0.0, 0.0); 4], 0.7);
        assert!(d.weights.is_empty());
        assert_eq!(d.residual(), 0.0);
    }

    #[test]
    fn second_moment_correction_by_hand() {
        let d = circle_moment_decompose(&[cx(0.0, 0.0), cx(0.3, 0.0)], 1.0);
        assert_eq!(d.weights.len(), 2);
        assert!(d.weights.iter().all(|w| close(*w, 0.15)));
        let mut pts: Vec<f64> = d.points.iter().map(|p| p.re).collect();
        pts.sort_by(f64::total_cmp);
        assert!((pts[0] + 1.0).abs() < 1e-15 && (pts[1] - 1.0).abs() < 1e-15);
        let m = d.moments();
        assert!(m[0].norm() < 1e-15);
        assert!((m[1] - cx(0.3, 0.0)).norm() < 1e-15);
        assert!(d.total_weight() <= b_bound(2, 1.0) * 0.3);
    }

    #[test]
    fn g_examples() {
        let z = [cx(0.3, 0.1), cx(-0.2, 0.4)];
        assert_eq!(apply_g(cx(0.0, 0.0), &z), z.to_vec());
        let w = apply_g(cx(1.0, 0.0), &[cx(2.0, 0.0), cx(4.0, 0.0)]);
        assert!((w[0] - cx(3.0, 0.0)).norm() < 1e-15 && (w[1] - cx(9.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hull_bound_examples() {
        assert!(close(hull_distance_lower_bound(cx(0.0, 0.0), 1.0, 1).unwrap(), 0.5));
        assert!(close(hull_distance_lower_bound(cx(0.0, 0.0), 0.5, 2).unwrap(), 0.0625));
        assert!(close(hull_distance_lower_bound(cx(1.0, 0.0), 0.5, 2).unwrap(), 0.015625));
        assert!(matches!(hull_distance_lower_bound(cx(0.0, 0.0), 1.5, 2), Err(Error::Input(_))));
    }

    #[test]
    fn membership_examples() {
        assert!(winf_membership_power(&[cx(0.4, 0.0)], 1.0));
        assert!(!winf_membership_power(&[cx(0.5, 0.0)], 1.0));
        assert!(winf_membership_power(&[cx(0.2, 0.0), cx(0.2, 0.0)], 1.0));
    }

    #[test]
    fn oracle_degenerates_to_a_point() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let cloud = hull_oracle(cx(0.5, 0.0), 0.0, 3, 8, &mut rng);
        for p in cloud {
            for (k, c) in p.iter().enumerate() {
                assert!((c - cx(0.5f64.powi(k as i32 + 1), 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn ball_around_curve_point_is_certified() {
        let lambda = cx(0.5, 0.0);
        let r = hull_distance_lower_bound(lambda, 0.5, 2).unwrap();
        let center = moment_curve(lambda, 2);
        let p: Vec<C64> = center.iter().map(|c| c + C64::from_polar(r * 0.999, 1.0)).collect();
        let cert = certify_hull_membership(&p, lambda, 0.5).unwrap();
        assert!(cert.is_convex());
        assert!(cert.residual < 1e-12);
        assert!(cert.nodes.iter().all(|z| (z - lambda).norm() <= 0.5 + 1e-12));
    }
}
