//! Small dense and sparse helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Inner product, linear in the first slot: ⟨x, y⟩ = Σ x_i conj(y_i).
pub fn inner(x: &CVec, y: &CVec) -> C64 {
    y.dotc(x)
}

pub fn unit(dim: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[i] = ONE;
    v
}

pub fn normalized(v: &CVec) -> Option<CVec> {
    let n = v.norm();
    if n > 0.0 && n.is_finite() {
        Some(v.unscale(n))
    } else {
        None
    }
}

/// Compressed sparse row copy of a square matrix, used for matvecs.
#[derive(Clone, Debug)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    pub fn from_dense(m: &CMat) -> Self {
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn apply(&self, x: &CVec) -> CVec {
        let mut y = CVec::zeros(self.n);
        for i in 0..self.n {
            let mut acc = ZERO;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            y[i] = acc;
        }
        y
    }

    pub fn apply_adjoint(&self, x: &CVec) -> CVec {
        let mut y = CVec::zeros(self.n);
        for i in 0..self.n {
            let xi = x[i];
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.cols[p]] += self.vals[p].conj() * xi;
            }
        }
        y
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Csr) -> Csr {
        let n = self.n;
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut acc = vec![ZERO; n];
        let mut seen = vec![false; n];
        let mut touched = Vec::new();
        for i in 0..n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let k = self.cols[p];
                for q in other.row_ptr[k]..other.row_ptr[k + 1] {
                    let j = other.cols[q];
                    if !seen[j] {
                        seen[j] = true;
                        touched.push(j);
                    }
                    acc[j] += self.vals[p] * other.vals[q];
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != ZERO {
                    cols.push(j);
                    vals.push(acc[j]);
                }
                acc[j] = ZERO;
                seen[j] = false;
            }
            touched.clear();
            row_ptr.push(cols.len());
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.n, self.n);
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[p])] = self.vals[p];
            }
        }
        m
    }

    /// Dense copy of the principal block on indices start..start+len.
    pub fn block(&self, start: usize, len: usize) -> CMat {
        let mut m = CMat::zeros(len, len);
        for i in start..(start + len).min(self.n) {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[p];
                if j >= start && j < start + len {
                    m[(i - start, j - start)] = self.vals[p];
                }
            }
        }
        m
    }

    /// Largest |i - j| over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut w = 0;
        for i in 0..self.n {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                w = w.max(i.abs_diff(self.cols[p]));
            }
        }
        w
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// Equal eigenvalues keep the solver's column order, so the result is deterministic.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(m.nrows(), m.ncols());
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Orthogonal complement of a finite family of vectors, kept as an orthonormal basis
/// of the family's span. Projections use two Gram-Schmidt sweeps.
#[derive(Clone, Debug)]
pub struct Complement {
    dim: usize,
    basis: Vec<CVec>,
}

impl Complement {
    pub fn new(dim: usize, avoid: &[CVec]) -> Self {
        let mut c = Complement { dim, basis: Vec::new() };
        for v in avoid {
            c.push(v);
        }
        c
    }

    pub fn full(dim: usize) -> Self {
        Complement { dim, basis: Vec::new() }
    }

    /// Add a vector to the avoided span. Returns false when it is already (numerically) inside.
    pub fn push(&mut self, v: &CVec) -> bool {
        let scale = v.norm();
        if scale == 0.0 {
            return false;
        }
        let r = self.project(v);
        let n = r.norm();
        if n <= 1e-12 * scale {
            return false;
        }
        self.basis.push(r.unscale(n));
        true
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn complement_dim(&self) -> usize {
        self.dim - self.basis.len()
    }

    pub fn basis(&self) -> &[CVec] {
        &self.basis
    }

    pub fn project(&self, v: &CVec) -> CVec {
        let mut r = v.clone();
        for _ in 0..2 {
            for q in &self.basis {
                let c = q.dotc(&r);
                r.axpy(-c, q, ONE);
            }
        }
        r
    }

    /// Seeded random unit vector inside the complement.
    pub fn random_unit(&self, rng: &mut ChaCha8Rng) -> CVec {
        loop {
            let v = CVec::from_fn(self.dim, |_, _| {
                cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            if let Some(u) = normalized(&self.project(&v)) {
                return u;
            }
        }
    }
}

/// A Ritz pair from a Lanczos run.
#[derive(Clone, Debug)]
pub struct Ritz {
    pub value: f64,
    pub vector: CVec,
}

/// Lanczos with full reorthogonalisation for the extreme eigenpairs of the compression
/// P A P of a Hermitian map to a complement. When the Krylov space exhausts the
/// complement the result is exact.
pub fn lanczos_extremes<F>(
    apply: F,
    complement: &Complement,
    start: &CVec,
    max_krylov: usize,
    rng: &mut ChaCha8Rng,
) -> (Ritz, Ritz)
where
    F: Fn(&CVec) -> CVec,
{
    let cdim = complement.complement_dim();
    let kmax = max_krylov.min(cdim).max(1);
    let mut q = match normalized(&complement.project(start)) {
        Some(q) => q,
        None => complement.random_unit(rng),
    };
    let mut basis: Vec<CVec> = Vec::with_capacity(kmax);
    let mut alpha: Vec<f64> = Vec::with_capacity(kmax);
    let mut beta: Vec<f64> = Vec::with_capacity(kmax);
    let mut last_check: Option<(f64, f64)> = None;
    let mut scale = 0.0f64;
    loop {
        let mut w = complement.project(&apply(&q));
        let a = q.dotc(&w).re;
        basis.push(q.clone());
        alpha.push(a);
        for _ in 0..2 {
            for v in &basis {
                let c = v.dotc(&w);
                w.axpy(-c, v, ONE);
            }
        }
        let b = w.norm();
        scale = scale.max(a.abs()).max(b);
        let k = basis.len();
        if k >= kmax {
            break;
        }
        if k.is_multiple_of(8) && k >= 24 {
            let (lo, hi) = tridiagonal_extreme_values(&alpha, &beta);
            if let Some((plo, phi)) = last_check {
                let tol = 1e-11 * scale.max(1e-300);
                if (lo - plo).abs() <= tol && (hi - phi).abs() <= tol {
                    break;
                }
            }
            last_check = Some((lo, hi));
        }
        if b <= 1e-12 * scale.max(1e-300) {
            // invariant subspace: restart with a fresh direction orthogonal to the basis
            let mut fresh = None;
            for _ in 0..4 {
                let mut r = complement.random_unit(rng);
                for _ in 0..2 {
                    for v in &basis {
                        let c = v.dotc(&r);
                        r.axpy(-c, v, ONE);
                    }
                }
                if let Some(u) = normalized(&r) {
                    if r.norm() > 1e-8 {
                        fresh = Some(u);
                        break;
                    }
                }
            }
            match fresh {
                Some(u) => {
                    beta.push(0.0);
                    q = u;
                }
                None => break,
            }
        } else {
            beta.push(b);
            q = w.unscale(b);
        }
    }
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut imin = 0;
    let mut imax = 0;
    for i in 0..k {
        if eig.eigenvalues[i] < eig.eigenvalues[imin] {
            imin = i;
        }
        if eig.eigenvalues[i] > eig.eigenvalues[imax] {
            imax = i;
        }
    }
    let ritz = |i: usize| {
        let mut v = CVec::zeros(complement.dim());
        for (j, b) in basis.iter().enumerate() {
            v.axpy(cx(eig.eigenvectors[(j, i)], 0.0), b, ONE);
        }
        let v = complement.project(&v);
        let v = normalized(&v).unwrap_or_else(|| basis[0].clone());
        let value = v.dotc(&complement.project(&apply(&v))).re;
        Ritz { value, vector: v }
    };
    (ritz(imin), ritz(imax))
}

/// Extreme eigenvalues of a symmetric tridiagonal matrix by Sturm bisection.
fn tridiagonal_extreme_values(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let left = if i > 0 { beta[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - left - right);
        hi = hi.max(alpha[i] + left + right);
    }
    // number of eigenvalues strictly below x
    let count = |x: f64| {
        let mut c = 0;
        let mut d = 1.0f64;
        for i in 0..k {
            let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                c += 1;
            }
        }
        c
    };
    let bisect = |target: usize| {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if count(m) > target {
                b = m;
            } else {
                a = m;
            }
            if b - a <= 1e-15 * (a.abs() + b.abs()).max(1e-300) {
                break;
            }
        }
        0.5 * (a + b)
    };
    (bisect(0), bisect(k - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn csr_round_trip_and_adjoint() {
        let m = CMat::from_fn(5, 5, |i, j| if j == i + 1 { cx(1.0, 0.5) } else { ZERO });
        let s = Csr::from_dense(&m);
        assert_eq!(s.nnz(), 4);
        assert_eq!(s.bandwidth(), 1);
        assert_eq!(s.to_dense(), m);
        let x = CVec::from_fn(5, |i, _| cx(i as f64, 1.0));
        assert!((s.apply(&x) - &m * &x).norm() < 1e-15);
        assert!((s.apply_adjoint(&x) - m.adjoint() * &x).norm() < 1e-15);
        let sq = s.matmul(&s).to_dense();
        assert!((sq - &m * &m).norm() < 1e-15);
    }

    #[test]
    fn lanczos_matches_dense_eigen_on_small_problem() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = CMat::from_fn(12, 12, |i, j| cx(((i * 7 + j * 3) % 5) as f64, (i as f64) - (j as f64)));
        let h = (&a + a.adjoint()) * cx(0.5, 0.0);
        let (vals, _) = hermitian_eigen(&h);
        let comp = Complement::full(12);
        let start = comp.random_unit(&mut rng);
        let (lo, hi) = lanczos_extremes(|x| &h * x, &comp, &start, 64, &mut rng);
        assert!((lo.value - vals[0]).abs() < 1e-10);
        assert!((hi.value - vals[11]).abs() < 1e-10);
    }

    #[test]
    fn complement_projection_is_orthogonal() {
        let avoid = vec![unit(4, 0), CVec::from_element(4, cx(0.5, 0.0))];
        let c = Complement::new(4, &avoid);
        assert_eq!(c.complement_dim(), 2);
        let p = c.project(&CVec::from_element(4, ONE));
        for v in &avoid {
            assert!(inner(&p, v).norm() < 1e-15);
        }
    }
}
