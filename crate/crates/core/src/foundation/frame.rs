use serde::{Deserialize, Serialize};

use super::linalg::{unit, CMat, CVec, Complement};
use super::operator::OperatorTuple;
use crate::error::{Error, Result};

pub const TOL_ORTHO: f64 = 1e-10;

/// Ordered orthonormal family of vectors (a partial orthonormal basis).
#[derive(Clone, Debug)]
pub struct Frame {
    vectors: Vec<CVec>,
    tol_ortho: f64,
}

/// Orthonormality residuals of a frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameAudit {
    pub max_offdiag: f64,
    pub max_norm_dev: f64,
}

impl FrameAudit {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_offdiag <= tol && self.max_norm_dev <= tol
    }
}

impl Frame {
    pub fn new(vectors: Vec<CVec>, tol_ortho: f64) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != vectors[0].len()) {
            return Err(Error::Frame(format!("mixed vector lengths {} and {}", vectors[0].len(), v.len())));
        }
        let f = Frame { vectors, tol_ortho };
        let a = audit_frame(&f);
        if !a.passes(tol_ortho) {
            return Err(Error::Frame(format!(
                "not orthonormal: off-diagonal {:.3e}, norm deviation {:.3e}",
                a.max_offdiag, a.max_norm_dev
            )));
        }
        Ok(f)
    }

    pub(crate) fn unchecked(vectors: Vec<CVec>, tol_ortho: f64) -> Self {
        Frame { vectors, tol_ortho }
    }

    pub fn standard(dim: usize) -> Self {
        Frame { vectors: (0..dim).map(|i| unit(dim, i)).collect(), tol_ortho: TOL_ORTHO }
    }

    pub fn vectors(&self) -> &[CVec] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<CVec> {
        self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn tol_ortho(&self) -> f64 {
        self.tol_ortho
    }

    pub fn dim(&self) -> Option<usize> {
        self.vectors.first().map(|v| v.len())
    }

    /// Columns are the frame vectors.
    pub fn to_matrix(&self) -> CMat {
        let d = self.dim().unwrap_or(0);
        let mut m = CMat::zeros(d, self.len());
        for (k, v) in self.vectors.iter().enumerate() {
            m.set_column(k, v);
        }
        m
    }
}

/// Exact Gram residuals of a frame.
pub fn audit_frame(f: &Frame) -> FrameAudit {
    let mut max_offdiag = 0.0f64;
    let mut max_norm_dev = 0.0f64;
    for (i, u) in f.vectors.iter().enumerate() {
        max_norm_dev = max_norm_dev.max((u.norm_squared() - 1.0).abs());
        for v in &f.vectors[..i] {
            max_offdiag = max_offdiag.max(u.dotc(v).norm());
        }
    }
    FrameAudit { max_offdiag, max_norm_dev }
}

/// Spanning sequence of unit vectors (y_m).
#[derive(Clone, Debug)]
pub struct DenseSequence {
    vectors: Vec<CVec>,
}

impl DenseSequence {
    pub fn standard(dim: usize) -> Self {
        DenseSequence { vectors: (0..dim).map(|i| unit(dim, i)).collect() }
    }

    pub fn new(vectors: Vec<CVec>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::Input("dense sequence is empty".into()));
        };
        let dim = first.len();
        let mut span = Complement::full(dim);
        let mut out = Vec::with_capacity(vectors.len());
        for v in vectors {
            if v.len() != dim {
                return Err(Error::Input("dense sequence vectors differ in length".into()));
            }
            let n = v.norm();
            if n == 0.0 {
                return Err(Error::Input("dense sequence contains a zero vector".into()));
            }
            span.push(&v);
            out.push(v.unscale(n));
        }
        if span.rank() != dim {
            return Err(Error::Input(format!("dense sequence spans rank {} < dim {dim}", span.rank())));
        }
        Ok(DenseSequence { vectors: out })
    }

    pub fn vectors(&self) -> &[CVec] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Compression of every part to the span of an orthonormal frame:
/// entries ⟨T_j u_b, u_a⟩.
pub fn compress(t: &OperatorTuple, basis: &Frame) -> Result<OperatorTuple> {
    let a = audit_frame(basis);
    if !a.passes(basis.tol_ortho) {
        return Err(Error::Frame(format!(
            "basis not orthonormal: off-diagonal {:.3e}, norm deviation {:.3e}",
            a.max_offdiag, a.max_norm_dev
        )));
    }
    if basis.dim().is_some_and(|d| d != t.dim()) {
        return Err(Error::Frame("basis vectors do not match the operator dimension".into()));
    }
    let parts = (0..t.n())
        .map(|j| compress_with(|x| t.apply(j, x), basis.vectors()))
        .collect();
    OperatorTuple::new(parts)
}

/// k×k matrix of ⟨A u_b, u_a⟩ for any linear map A given by its action.
pub fn compress_with<F: Fn(&CVec) -> CVec>(apply: F, vectors: &[CVec]) -> CMat {
    let k = vectors.len();
    let mut m = CMat::zeros(k, k);
    for (b, ub) in vectors.iter().enumerate() {
        let tub = apply(ub);
        for (a, ua) in vectors.iter().enumerate() {
            m[(a, b)] = ua.dotc(&tub);
        }
    }
    m
}
