use nalgebra::Schur;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::foundation::linalg::{spectral_norm, Csr};
use crate::foundation::{cx, CMat, CVec, Frame, Operator, C64, TOL_ORTHO};

/// C' = QCQ + a(QCP + PCQ) + (PCP − ρ²τP)/(1−ρ²) with P = xx*, Q = I − P, a = (1−ρ²)^{−1/2}.
pub(crate) fn correction(c: &CMat, rho: f64, tau: C64, x: &CVec) -> CMat {
    let k = c.nrows();
    let p = x * x.adjoint();
    let q = CMat::identity(k, k) - &p;
    let r2 = rho * rho;
    let a = cx(1.0 / (1.0 - r2).sqrt(), 0.0);
    let pcp = &p * c * &p;
    &q * c * &q + (&q * c * &p + &p * c * &q) * a + (pcp - &p * (tau * r2)) * cx(1.0 / (1.0 - r2), 0.0)
}

/// The corrected block C' whose gluing with ρb reproduces C.
///
/// Fails with `Input` when ‖C‖ ≥ 1 and with `Internal` when ‖C'‖ exceeds ‖C‖ + (1−‖C‖)/2,
/// which means ρ was too large for this T.
pub fn bourin_correction(c: &CMat, rho: f64, tau: C64, x: &CVec) -> Result<CMat> {
    if c.nrows() != c.ncols() || x.len() != c.nrows() {
        return Err(Error::Input("block and vector sizes disagree".into()));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Input(format!("rho must lie in [0, 1), got {rho}")));
    }
    if (x.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Input("x must be a unit vector".into()));
    }
    let norm = spectral_norm(c);
    if norm >= 1.0 {
        return Err(Error::Input(format!("block norm {norm} is not below 1")));
    }
    let out = correction(c, rho, tau, x);
    let got = spectral_norm(&out);
    let bound = norm + (1.0 - norm) / 2.0;
    if got > bound + 1e-12 {
        return Err(Error::Internal(format!("corrected norm {got:.6} exceeds {bound:.6}; rho {rho} too large")));
    }
    Ok(out)
}

/// Replace the x-th vector of K' by v = √(1−ρ²)·K'_x + ρb. The returned frame lists V e_i;
/// the matrix is the isometry L → H with those columns.
pub fn glue_block(t: &Operator, c: &CMat, kprime: &Frame, b: &CVec, rho: f64, x_index: usize) -> Result<(Frame, CMat)> {
    glue_powers(&[t.csr().clone()], std::slice::from_ref(c), kprime, b, rho, x_index, super::TOL_PINCH, t.norm())
}

/// Gluing against T, …, Tⁿ given as sparse powers; `targets[j]` is C^{j+1}.
#[allow(clippy::too_many_arguments)]
pub(crate) fn glue_powers(
    powers: &[Csr],
    targets: &[CMat],
    kprime: &Frame,
    b: &CVec,
    rho: f64,
    x_index: usize,
    tol: f64,
    norm_t: f64,
) -> Result<(Frame, CMat)> {
    let k = kprime.len();
    if x_index >= k || targets.iter().any(|c| c.nrows() != k) {
        return Err(Error::Input(format!("block of size {k} does not fit x index {x_index}")));
    }
    if rho > 0.0 {
        for u in kprime.vectors() {
            if u.len() != b.len() {
                return Err(Error::Input("gluing vector has the wrong dimension".into()));
            }
            let mut worst = u.dotc(b).norm();
            for p in powers {
                worst = worst.max(u.dotc(&p.apply(b)).norm()).max(u.dotc(&p.apply_adjoint(b)).norm());
            }
            if worst > TOL_ORTHO {
                return Err(Error::Geometry(format!("K' is not orthogonal to b, Tb, T*b (defect {worst:.3e})")));
            }
        }
    }
    let mut vectors = kprime.vectors().to_vec();
    let u = vectors[x_index].clone();
    vectors[x_index] = u * cx((1.0 - rho * rho).sqrt(), 0.0) + b * cx(rho, 0.0);
    let frame = Frame::new(vectors, TOL_ORTHO)?;
    let v = frame.to_matrix();
    for (j, (p, c)) in powers.iter().zip(targets).enumerate() {
        let dev = compression_deviation(p, frame.vectors(), c);
        if dev > tol * (1.0 + norm_t.powi(j as i32 + 1)) {
            return Err(Error::Internal(format!("glued compression off by {dev:.3e}")));
        }
    }
    Ok((frame, v))
}

/// max |⟨P V e_j, V e_i⟩ − C_ij|.
pub(crate) fn compression_deviation(p: &Csr, basis: &[CVec], c: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for (j, vj) in basis.iter().enumerate() {
        let pv = p.apply(vj);
        for (i, vi) in basis.iter().enumerate() {
            worst = worst.max((vi.dotc(&pv) - c[(i, j)]).norm());
        }
    }
    worst
}

/// Common unitary Q with Q*C_jQ diagonal for every j, or None when the family is not
/// simultaneously unitarily diagonalizable within `tol`.
pub(crate) fn joint_diagonalize(cs: &[CMat], seed: u64, tol: f64) -> Option<(CMat, Vec<Vec<C64>>)> {
    let k = cs[0].nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mix = CMat::zeros(k, k);
    for c in cs {
        mix += c * cx(rng.random::<f64>() + 0.5, rng.random::<f64>() - 0.5);
    }
    let (q, _) = Schur::new(mix).unpack();
    let mut values = vec![Vec::with_capacity(cs.len()); k];
    for c in cs {
        let d = q.adjoint() * c * &q;
        let scale = 1.0 + spectral_norm(c);
        for i in 0..k {
            for j in 0..k {
                if i != j && d[(i, j)].norm() > tol * scale {
                    return None;
                }
            }
            values[i].push(d[(i, i)]);
        }
    }
    Some((q, values))
}
