use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linalg::{cx, lanczos_extremes, spectral_norm, CMat, CVec, Complement, Csr, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Generator tag kept alongside the matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Dense,
    Shift,
    WeightedShift,
    Jordan,
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Banded(usize),
    Full,
}

/// A square complex matrix standing in for a truncated operator.
#[derive(Clone, Debug)]
pub struct Operator {
    kind: OperatorKind,
    matrix: CMat,
    csr: Csr,
    bandwidth: Bandwidth,
}

const DENSE_NORM_LIMIT: usize = 256;
const NORM_KRYLOV: usize = 200;

impl Operator {
    fn from_parts(kind: OperatorKind, matrix: CMat) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(Error::Input(format!(
                "operator must be square with dim >= 1, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input("operator entries must be finite".into()));
        }
        let csr = Csr::from_dense(&matrix);
        let bandwidth = match kind {
            OperatorKind::Dense => Bandwidth::Full,
            _ => Bandwidth::Banded(csr.bandwidth()),
        };
        Ok(Operator { kind, matrix, csr, bandwidth })
    }

    pub fn dense(matrix: CMat) -> Result<Self> {
        Self::from_parts(OperatorKind::Dense, matrix)
    }

    /// Truncated shift: ones on the first superdiagonal.
    pub fn shift(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let m = CMat::from_fn(dim, dim, |i, j| if j == i + 1 { ONE } else { ZERO });
        Self::from_parts(OperatorKind::Shift, m)
    }

    /// Weighted shift with `weights[i]` at position (i, i+1); needs dim - 1 weights.
    pub fn weighted_shift(weights: &[C64]) -> Result<Self> {
        let dim = weights.len() + 1;
        let m = CMat::from_fn(dim, dim, |i, j| if j == i + 1 { weights[i] } else { ZERO });
        Self::from_parts(OperatorKind::WeightedShift, m)
    }

    pub fn jordan(dim: usize, lambda: C64) -> Result<Self> {
        check_dim(dim)?;
        let m = CMat::from_fn(dim, dim, |i, j| {
            if i == j {
                lambda
            } else if j == i + 1 {
                ONE
            } else {
                ZERO
            }
        });
        Self::from_parts(OperatorKind::Jordan, m)
    }

    pub fn diagonal(entries: &[C64]) -> Result<Self> {
        check_dim(entries.len())?;
        let m = CMat::from_diagonal(&DVector::from_column_slice(entries));
        Self::from_parts(OperatorKind::Diagonal, m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.bandwidth
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn csr(&self) -> &Csr {
        &self.csr
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        self.csr.apply(x)
    }

    pub fn apply_adjoint(&self, x: &CVec) -> CVec {
        self.csr.apply_adjoint(x)
    }

    /// Sparse form of T^j (j ≥ 1).
    pub fn power_csr(&self, j: usize) -> Csr {
        let mut p = self.csr.clone();
        for _ in 1..j {
            p = p.matmul(&self.csr);
        }
        p
    }

    /// Operator norm. Closed form for the structured generators, SVD for small dense
    /// matrices and a Lanczos estimate on T*T otherwise.
    pub fn norm(&self) -> f64 {
        let d = &self.matrix;
        match self.kind {
            OperatorKind::Shift => {
                if self.dim() > 1 {
                    1.0
                } else {
                    0.0
                }
            }
            OperatorKind::WeightedShift => (0..self.dim() - 1).map(|i| d[(i, i + 1)].norm()).fold(0.0, f64::max),
            OperatorKind::Diagonal => (0..self.dim()).map(|i| d[(i, i)].norm()).fold(0.0, f64::max),
            _ => csr_norm(&self.csr, Some(&self.matrix)),
        }
    }
}

/// Operator norm of a sparse matrix; `dense` enables the exact SVD path at small sizes.
pub fn csr_norm(csr: &Csr, dense: Option<&CMat>) -> f64 {
    let n = csr.dim();
    if n <= DENSE_NORM_LIMIT {
        let owned;
        let m = match dense {
            Some(m) => m,
            None => {
                owned = csr.to_dense();
                &owned
            }
        };
        return spectral_norm(m);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let comp = Complement::full(n);
    let start = comp.random_unit(&mut rng);
    let (_, hi) = lanczos_extremes(|x| csr.apply_adjoint(&csr.apply(x)), &comp, &start, NORM_KRYLOV, &mut rng);
    hi.value.max(0.0).sqrt()
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 1 {
        Err(Error::Input("dim must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Tuple of complex matrices sharing one dimension.
#[derive(Clone, Debug)]
pub struct OperatorTuple {
    parts: Vec<CMat>,
    csr: Vec<Csr>,
}

impl OperatorTuple {
    pub fn new(parts: Vec<CMat>) -> Result<Self> {
        check_shared(&parts)?;
        let csr = parts.iter().map(Csr::from_dense).collect();
        Ok(OperatorTuple { parts, csr })
    }

    pub fn single(t: &Operator) -> Self {
        OperatorTuple { parts: vec![t.matrix.clone()], csr: vec![t.csr.clone()] }
    }

    /// The power tuple (T, T², …, Tⁿ).
    pub fn powers(t: &Operator, n: usize) -> Self {
        let csr: Vec<Csr> = (1..=n).map(|j| t.power_csr(j)).collect();
        let parts = csr.iter().map(Csr::to_dense).collect();
        OperatorTuple { parts, csr }
    }

    pub fn n(&self) -> usize {
        self.parts.len()
    }

    pub fn dim(&self) -> usize {
        self.parts[0].nrows()
    }

    pub fn parts(&self) -> &[CMat] {
        &self.parts
    }

    pub fn apply(&self, j: usize, x: &CVec) -> CVec {
        self.csr[j].apply(x)
    }

    pub fn apply_adjoint(&self, j: usize, x: &CVec) -> CVec {
        self.csr[j].apply_adjoint(x)
    }

    /// (⟨T_j x, x⟩)_j
    pub fn values(&self, x: &CVec) -> Vec<C64> {
        (0..self.n()).map(|j| x.dotc(&self.apply(j, x))).collect()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.csr.iter().zip(&self.parts).map(|(c, m)| csr_norm(c, Some(m))).collect()
    }
}

/// Tuple of Hermitian matrices sharing one dimension.
#[derive(Clone, Debug)]
pub struct SelfAdjointTuple {
    parts: Vec<CMat>,
    csr: Vec<Csr>,
}

impl SelfAdjointTuple {
    pub fn new(parts: Vec<CMat>) -> Result<Self> {
        check_shared(&parts)?;
        let mut sym = Vec::with_capacity(parts.len());
        for (j, p) in parts.into_iter().enumerate() {
            let scale = p.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let dev = (&p - p.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if dev > 1e-12 * scale {
                return Err(Error::Input(format!("part {j} is not Hermitian (deviation {dev:.3e})")));
            }
            sym.push((&p + p.adjoint()) * cx(0.5, 0.0));
        }
        let csr = sym.iter().map(Csr::from_dense).collect();
        Ok(SelfAdjointTuple { parts: sym, csr })
    }

    pub fn s(&self) -> usize {
        self.parts.len()
    }

    pub fn dim(&self) -> usize {
        self.parts[0].nrows()
    }

    pub fn parts(&self) -> &[CMat] {
        &self.parts
    }

    pub fn apply(&self, j: usize, x: &CVec) -> CVec {
        self.csr[j].apply(x)
    }

    /// Σ_j u_j S_j x
    pub fn apply_combination(&self, u: &[f64], x: &CVec) -> CVec {
        let mut y = CVec::zeros(self.dim());
        for (j, &w) in u.iter().enumerate() {
            if w != 0.0 {
                y.axpy(cx(w, 0.0), &self.apply(j, x), ONE);
            }
        }
        y
    }

    /// (⟨S_j x, x⟩)_j for a vector x (not normalised).
    pub fn values(&self, x: &CVec) -> Vec<f64> {
        (0..self.s()).map(|j| x.dotc(&self.apply(j, x)).re).collect()
    }

    /// Operator norms ‖S_j‖.
    pub fn norms(&self) -> Vec<f64> {
        self.csr
            .iter()
            .zip(&self.parts)
            .map(|(c, m)| {
                if c.dim() <= DENSE_NORM_LIMIT {
                    spectral_norm(m)
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
                    let comp = Complement::full(c.dim());
                    let start = comp.random_unit(&mut rng);
                    let (lo, hi) = lanczos_extremes(|x| c.apply(x), &comp, &start, NORM_KRYLOV, &mut rng);
                    lo.value.abs().max(hi.value.abs())
                }
            })
            .collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.norms().into_iter().fold(0.0, f64::max)
    }
}

fn check_shared(parts: &[CMat]) -> Result<()> {
    let Some(first) = parts.first() else {
        return Err(Error::Input("tuple needs at least one part".into()));
    };
    let d = first.nrows();
    if d == 0 {
        return Err(Error::Input("dim must be at least 1".into()));
    }
    for (j, p) in parts.iter().enumerate() {
        if p.nrows() != d || p.ncols() != d {
            return Err(Error::Input(format!("part {j} is {}x{}, expected {d}x{d}", p.nrows(), p.ncols())));
        }
        if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input(format!("part {j} has non-finite entries")));
        }
    }
    Ok(())
}

/// ((T_j + T_j*)/2, (T_j − T_j*)/(2i)) for every part, in that order.
pub fn hermitian_parts(t: &OperatorTuple) -> SelfAdjointTuple {
    let mut parts = Vec::with_capacity(2 * t.n());
    for m in t.parts() {
        let adj = m.adjoint();
        parts.push((m + &adj) * cx(0.5, 0.0));
        parts.push((m - &adj) * cx(0.0, -0.5));
    }
    SelfAdjointTuple::new(parts).expect("real and imaginary parts are Hermitian")
}
