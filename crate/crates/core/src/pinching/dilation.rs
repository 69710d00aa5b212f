use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::linalg::{hermitian_eigen, spectral_norm};
use crate::foundation::{cx, CMat, C64};
use crate::moments::{certify_hull_membership, moment_curve, winf_membership_power};

/// √M for a Hermitian positive semidefinite M, negative rounding clipped to zero.
fn psd_sqrt(m: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|v| cx(v.max(0.0).sqrt(), 0.0))));
    &vecs * d * vecs.adjoint()
}

/// Block-companion unitary on the (n+1)-fold space whose top-left corner of U^k is C^k
/// for 1 ≤ k ≤ n:
///
/// ```text
/// [ C    0 … 0  D_{C*} ]
/// [ D_C  0 … 0  −C*    ]
/// [ 0    I      0      ]
/// [        ⋱           ]
/// [ 0    …   I  0      ]
/// ```
pub fn egervary_dilation(c: &CMat, n: usize) -> CMat {
    let k = c.nrows();
    let id = CMat::identity(k, k);
    let dc = psd_sqrt(&(&id - c.adjoint() * c));
    let dcs = psd_sqrt(&(&id - c * c.adjoint()));
    let size = (n + 1) * k;
    let mut u = CMat::zeros(size, size);
    u.view_mut((0, 0), (k, k)).copy_from(c);
    if n == 0 {
        return u;
    }
    u.view_mut((0, n * k), (k, k)).copy_from(&dcs);
    u.view_mut((k, 0), (k, k)).copy_from(&dc);
    u.view_mut((k, n * k), (k, k)).copy_from(&(-c.adjoint()));
    for b in 2..=n {
        u.view_mut((b * k, (b - 1) * k), (k, k)).copy_from(&id);
    }
    u
}

/// max_{1≤j≤n} ‖corner of U^j − C^j‖.
pub fn corner_residual(u: &CMat, c: &CMat, n: usize) -> f64 {
    let k = c.nrows();
    let mut up = u.clone();
    let mut cp = c.clone();
    let mut worst = 0.0f64;
    for j in 1..=n {
        if j > 1 {
            up = &up * u;
            cp = &cp * c;
        }
        worst = worst.max(spectral_norm(&(up.view((0, 0), (k, k)).into_owned() - &cp)));
    }
    worst
}

/// The closed-form constants of the convex splitting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L32Constants {
    pub n: usize,
    pub c: f64,
    /// (1−c)ⁿ / (n 2^{2n+4})
    pub d: f64,
    /// c + c(1−c)ⁿ / 2^{n+1}
    pub c_prime: f64,
    /// 2^{−(n+1)}
    pub d_prime: f64,
    /// 1 − c/c' − 2n d/d', positive
    pub margin: f64,
    /// margin / (4n)
    pub eps_prime: f64,
    /// ε'/(n 2^{n+1}), inside (0, ε'/(n 2ⁿ))
    pub eps: f64,
}

impl L32Constants {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        if n == 0 || !(0.0..1.0).contains(&c) {
            return Err(Error::Input(format!("need n >= 1 and 0 <= c < 1, got n = {n}, c = {c}")));
        }
        let nf = n as f64;
        let q = (1.0 - c).powi(n as i32);
        let d = q / (nf * 2f64.powi(2 * n as i32 + 4));
        let c_prime = c + c * q / 2f64.powi(n as i32 + 1);
        let d_prime = 1.0 / 2f64.powi(n as i32 + 1);
        let ratio = if c == 0.0 { 0.0 } else { c / c_prime };
        let margin = 1.0 - ratio - 2.0 * nf * d / d_prime;
        let eps_prime = margin / (4.0 * nf);
        let eps = eps_prime / (nf * 2f64.powi(n as i32 + 1));
        Ok(L32Constants { n, c, d, c_prime, d_prime, margin, eps_prime, eps })
    }

    /// Weight c/c' of the dilation-power summand (zero when c = 0).
    pub fn power_weight(&self) -> f64 {
        if self.c == 0.0 {
            0.0
        } else {
            self.c / self.c_prime
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LedgerSummand {
    pub label: String,
    pub weight: f64,
    #[serde(with = "crate::io::complex_mats")]
    pub tuple: Vec<CMat>,
    /// Largest modulus among the diagonal entries of the tuple in its diagonalizing basis.
    pub entry_bound: f64,
    pub member: bool,
}

/// Convex splitting of (cU + Ã₁, …, (cU)ⁿ + Ãₙ) into jointly diagonal tuples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvexCombinationLedger {
    pub constants: L32Constants,
    /// Radius of the disc the spectral surrogate of T is assumed to contain.
    pub rho_model: f64,
    pub hypothesis_norms: Vec<f64>,
    #[serde(with = "crate::io::complex_mat")]
    pub dilation: CMat,
    pub corner_residual: f64,
    #[serde(with = "crate::io::complex_vec")]
    pub dilation_eigenvalues: Vec<C64>,
    pub summands: Vec<LedgerSummand>,
    pub leftover: f64,
    pub reconstruction_residual: f64,
}

impl ConvexCombinationLedger {
    pub fn all_members(&self) -> bool {
        self.summands.iter().all(|s| s.member)
    }

    pub fn weight_sum(&self) -> f64 {
        self.summands.iter().map(|s| s.weight).sum()
    }
}

fn slot(n: usize, j: usize, m: CMat) -> Vec<CMat> {
    let size = m.nrows();
    (0..n).map(|i| if i == j { m.clone() } else { CMat::zeros(size, size) }).collect()
}

fn hermitian_entries(m: &CMat) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Split (cU + Ã_j)_j as c/c'·(c'/c)(D, …, Dⁿ) + Σ d/d'·(d'/d)(… Re Ã_j …) + Σ d/d'·(d'/d)(… i Im Ã_j …)
/// plus Σ ε'·(1/ε')(compact residues), where U dilates C/c, D = cU exactly and every compact
/// residue vanishes.
pub fn l32_ledger(c: &CMat, a: &[CMat], n: usize, rho_model: f64) -> Result<ConvexCombinationLedger> {
    let k = c.nrows();
    if a.len() != n || a.iter().any(|m| m.nrows() != k || m.ncols() != k) {
        return Err(Error::Input(format!("need {n} perturbations of size {k}")));
    }
    if !(rho_model >= 1.0) {
        return Err(Error::Input(format!("the model disc must contain the closed unit disc, radius {rho_model}")));
    }
    let cn = spectral_norm(c);
    let consts = L32Constants::new(n, cn)?;
    let hypothesis_norms: Vec<f64> = a.iter().map(spectral_norm).collect();
    if let Some((j, v)) = hypothesis_norms.iter().enumerate().find(|(_, v)| **v > consts.d * (1.0 + 1e-12)) {
        return Err(Error::Input(format!(
            "hypothesis ‖A_j‖ <= (1−‖C‖)^n/(n 2^(2n+4)) fails for j = {}: {v:.3e} > {:.3e}",
            j + 1,
            consts.d
        )));
    }
    let contraction = if cn > 0.0 { c * cx(1.0 / cn, 0.0) } else { c.clone() };
    let u = egervary_dilation(&contraction, n);
    let corner = corner_residual(&u, &contraction, n);
    let size = u.nrows();
    let cu = &u * cx(cn, 0.0);
    let (_, tri) = cu.clone().schur().unpack();
    let eig: Vec<C64> = tri.diagonal().iter().copied().collect();
    let threshold = 2f64.powi(-(n as i32)) * rho_model.min(1.0).powi(n as i32);

    let mut summands = Vec::new();
    // dilation powers: D = cU, so (c'/c)(D, …, Dⁿ)
    let mut powers = Vec::with_capacity(n);
    let mut p = CMat::identity(size, size);
    for _ in 0..n {
        p = &p * &cu;
        powers.push(p.clone());
    }
    let w0 = consts.power_weight();
    let (tuple, member, bound) = if w0 > 0.0 {
        let scale = cx(consts.c_prime / cn, 0.0);
        let reach = (rho_model - cn).min(1.0);
        let ok = eig.iter().all(|z: &C64| {
            let pt: Vec<C64> = moment_curve(*z, n).into_iter().map(|m| m * scale).collect();
            certify_hull_membership(&pt, *z, reach).is_some_and(|h| h.is_convex() && h.residual <= 1e-10)
        });
        (powers.iter().map(|m| m * scale).collect(), ok, consts.c_prime)
    } else {
        (vec![CMat::zeros(size, size); n], true, 0.0)
    };
    summands.push(LedgerSummand { label: "dilation_powers".into(), weight: w0, tuple, entry_bound: bound, member });

    let mut embedded = Vec::with_capacity(n);
    for aj in a {
        let mut m = CMat::zeros(size, size);
        m.view_mut((0, 0), (k, k)).copy_from(aj);
        embedded.push(m);
    }
    let scale = consts.d_prime / consts.d;
    for (j, m) in embedded.iter().enumerate() {
        let re = (m + m.adjoint()) * cx(0.5, 0.0);
        let im = (m - m.adjoint()) * cx(0.0, -0.5);
        for (label, h, phase) in [("re_a", re, cx(1.0, 0.0)), ("im_a", im, cx(0.0, 1.0))] {
            let entries = hermitian_entries(&h);
            let top = entries.iter().fold(0.0f64, |acc, e| acc.max((e * scale).abs()));
            let mut probe = vec![cx(0.0, 0.0); n];
            probe[j] = cx(top, 0.0);
            summands.push(LedgerSummand {
                label: format!("{label}_{}", j + 1),
                weight: consts.d / consts.d_prime,
                tuple: slot(n, j, h * phase * cx(scale, 0.0)),
                entry_bound: top,
                member: top < threshold && winf_membership_power(&probe, rho_model.min(1.0)),
            });
        }
    }
    for j in 0..n {
        for label in ["re_k", "im_k", "k_prime", "k_dprime"] {
            summands.push(LedgerSummand {
                label: format!("{label}_{}", j + 1),
                weight: consts.eps_prime,
                tuple: slot(n, j, CMat::zeros(size, size)),
                entry_bound: 0.0,
                member: winf_membership_power(&vec![cx(0.0, 0.0); n], rho_model.min(1.0)),
            });
        }
    }

    let total: f64 = summands.iter().map(|s| s.weight).sum();
    let mut worst = 0.0f64;
    for j in 0..n {
        let mut acc = CMat::zeros(size, size);
        for s in &summands {
            acc += &s.tuple[j] * cx(s.weight, 0.0);
        }
        let target = &powers[j] + &embedded[j];
        worst = worst.max(spectral_norm(&(acc - target)));
    }
    Ok(ConvexCombinationLedger {
        constants: consts,
        rho_model,
        hypothesis_norms,
        dilation: u,
        corner_residual: corner,
        dilation_eigenvalues: eig,
        summands,
        leftover: (1.0 - total).max(0.0),
        reconstruction_residual: worst,
    })
}
