use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::{CMat, SelfAdjointTuple};

/// Smallest affine subspace containing the joint numerical range of a Hermitian tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineHull {
    offset: Vec<f64>,
    /// Orthonormal basis of the direction space.
    directions: Vec<Vec<f64>>,
    /// Rows (α₀, α₁, …, α_s) with α₀ I + Σ α_j S_j = 0, in reduced row echelon form.
    relations: Vec<Vec<f64>>,
}

const RELATION_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Re tr(A B) for Hermitian A, B.
fn trace_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}

impl AffineHull {
    /// The whole of ℝ^s.
    pub fn full(s: usize) -> Self {
        let directions = (0..s)
            .map(|k| {
                let mut e = vec![0.0; s];
                e[k] = 1.0;
                e
            })
            .collect();
        AffineHull { offset: vec![0.0; s], directions, relations: Vec::new() }
    }

    pub fn s(&self) -> usize {
        self.offset.len()
    }

    /// Dimension of the direction space.
    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn relations(&self) -> &[Vec<f64>] {
        &self.relations
    }

    /// Largest |α₀ + Σ α_j λ_j| over the relations, scaled by the relation's size.
    pub fn relation_residual(&self, lambda: &[f64]) -> f64 {
        self.relations
            .iter()
            .map(|r| {
                let scale = r[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
                (r[0] + dot(&r[1..], lambda)).abs() / scale
            })
            .fold(0.0, f64::max)
    }

    /// Coordinates y = Bᵀ(λ − a).
    pub fn to_reduced(&self, lambda: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = lambda.iter().zip(&self.offset).map(|(x, a)| x - a).collect();
        self.directions.iter().map(|b| dot(b, &d)).collect()
    }

    /// a + B y
    pub fn from_reduced(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.offset.clone();
        for (b, yi) in self.directions.iter().zip(y) {
            for (xk, bk) in x.iter_mut().zip(b) {
                *xk += yi * bk;
            }
        }
        x
    }

    /// Bᵀ u for a direction u ∈ ℝ^s.
    pub fn project_direction(&self, u: &[f64]) -> Vec<f64> {
        self.directions.iter().map(|b| dot(b, u)).collect()
    }

    /// Reduced tuple S'_i = Σ_j B_{ji} (S_j − a_j I): the same joint range, expressed in
    /// the orthonormal coordinates of the hull.
    pub fn reduce_tuple(&self, s: &SelfAdjointTuple) -> SelfAdjointTuple {
        let dim = s.dim();
        let parts = self
            .directions
            .iter()
            .map(|b| {
                let mut m = CMat::zeros(dim, dim);
                let mut shift = 0.0;
                for (j, bj) in b.iter().enumerate() {
                    if *bj != 0.0 {
                        m += &s.parts()[j] * nalgebra::Complex::new(*bj, 0.0);
                        shift += bj * self.offset[j];
                    }
                }
                for i in 0..dim {
                    m[(i, i)] -= nalgebra::Complex::new(shift, 0.0);
                }
                m
            })
            .collect();
        SelfAdjointTuple::new(parts).expect("real combinations of Hermitian matrices are Hermitian")
    }

    /// Check a target against the relations.
    pub fn check_target(&self, index: usize, lambda: &[f64], tol: f64) -> Result<()> {
        let r = self.relation_residual(lambda);
        if r > tol {
            return Err(Error::RelationMismatch { index, residual: r });
        }
        Ok(())
    }
}

/// Affine hull of the joint numerical range, from the null space of the Gram matrix of
/// {I, S₁, …, S_s} under the normalised trace inner product.
pub fn affine_hull(s: &SelfAdjointTuple) -> AffineHull {
    let dim = s.dim();
    let k = s.s() + 1;
    let d = dim as f64;
    let traces: Vec<f64> = s.parts().iter().map(|m| m.trace().re).collect();
    let mut g = DMatrix::<f64>::zeros(k, k);
    g[(0, 0)] = 1.0;
    for j in 0..s.s() {
        g[(0, j + 1)] = traces[j] / d;
        g[(j + 1, 0)] = traces[j] / d;
        for i in 0..=j {
            let v = trace_inner(&s.parts()[i], &s.parts()[j]) / d;
            g[(i + 1, j + 1)] = v;
            g[(j + 1, i + 1)] = v;
        }
    }
    let eig = SymmetricEigen::new(g.clone());
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let mut null: Vec<Vec<f64>> = Vec::new();
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev > 1e-12 * top.max(1.0) {
            continue;
        }
        let alpha: Vec<f64> = eig.eigenvectors.column(i).iter().cloned().collect();
        // confirm the relation on the matrices themselves
        let mut v = CMat::zeros(dim, dim);
        for i in 0..dim {
            v[(i, i)] = nalgebra::Complex::new(alpha[0], 0.0);
        }
        for j in 0..s.s() {
            v += &s.parts()[j] * nalgebra::Complex::new(alpha[j + 1], 0.0);
        }
        if v.norm() <= RELATION_TOL {
            null.push(alpha);
        }
    }
    let relations = echelon(null, s.s());
    let offset: Vec<f64> = traces.iter().map(|t| t / d).collect();

    // orthonormal complement of the relation rows (coefficients α₁..α_s)
    let mut row_basis: Vec<Vec<f64>> = Vec::new();
    for r in &relations {
        push_orthonormal(&mut row_basis, r[1..].to_vec());
    }
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for kk in 0..s.s() {
        if directions.len() + row_basis.len() == s.s() {
            break;
        }
        let mut e = vec![0.0; s.s()];
        e[kk] = 1.0;
        let mut all = row_basis.clone();
        all.extend(directions.iter().cloned());
        if let Some(v) = orthonormal_residual(&all, e) {
            directions.push(v);
        }
    }
    AffineHull { offset, directions, relations }
}

fn orthonormal_residual(basis: &[Vec<f64>], mut v: Vec<f64>) -> Option<Vec<f64>> {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let n = dot(&v, &v).sqrt();
    if n <= 1e-8 {
        return None;
    }
    Some(v.into_iter().map(|x| x / n).collect())
}

fn push_orthonormal(basis: &mut Vec<Vec<f64>>, v: Vec<f64>) {
    if let Some(u) = orthonormal_residual(basis, v) {
        basis.push(u);
    }
}

/// Reduced row echelon form with pivots among the coefficients α₁..α_s.
fn echelon(rows: Vec<Vec<f64>>, s: usize) -> Vec<Vec<f64>> {
    let mut m = rows;
    let mut out_rows = 0;
    for col in 1..=s {
        if out_rows == m.len() {
            break;
        }
        let (piv, val) = (out_rows..m.len())
            .map(|r| (r, m[r][col].abs()))
            .fold((out_rows, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= 1e-9 {
            continue;
        }
        m.swap(out_rows, piv);
        let p = m[out_rows][col];
        for x in m[out_rows].iter_mut() {
            *x /= p;
        }
        for r in 0..m.len() {
            if r != out_rows {
                let f = m[r][col];
                if f != 0.0 {
                    for c in 0..=s {
                        m[r][c] -= f * m[out_rows][c];
                    }
                }
            }
        }
        out_rows += 1;
    }
    m.truncate(out_rows);
    for r in &mut m {
        for x in r.iter_mut() {
            if x.abs() < 1e-13 {
                *x = 0.0;
            }
        }
    }
    m
}
