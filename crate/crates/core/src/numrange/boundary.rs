use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::region::{convex_hull_2d, hull_halfspaces_2d, ConvexRegion};
use crate::error::{Error, Result};
use crate::foundation::linalg::{hermitian_eigen, lanczos_extremes};
use crate::foundation::{cx, CMat, CVec, Complement, Operator, SelfAdjointTuple, C64};

/// Default number of directions for boundary tracing.
pub const BOUNDARY_SAMPLES: usize = 720;
const DENSE_SUPPORT_LIMIT: usize = 256;
const DENSE_BOUNDARY_LIMIT: usize = 32;
const BOUNDARY_KRYLOV: usize = 64;
const SUPPORT_KRYLOV: usize = 200;

/// Largest eigenvalue of Σ u_j S_j with a unit eigenvector. Dense and exact up to
/// dimension 256, Lanczos beyond.
pub fn support_point(s: &SelfAdjointTuple, u: &[f64]) -> (f64, CVec) {
    let dim = s.dim();
    if dim <= DENSE_SUPPORT_LIMIT {
        let mut h = CMat::zeros(dim, dim);
        for (j, w) in u.iter().enumerate() {
            h += &s.parts()[j] * cx(*w, 0.0);
        }
        let (vals, vecs) = hermitian_eigen(&h);
        let top = vals[dim - 1];
        // lowest index among the eigenvalues tied with the maximum
        let tie = 1e-14 * top.abs().max(1.0);
        let i = (0..dim).find(|&i| top - vals[i] <= tie).unwrap_or(dim - 1);
        return (vals[i], vecs.column(i).into_owned());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let comp = Complement::full(dim);
    let start = comp.random_unit(&mut rng);
    let (_, hi) = lanczos_extremes(|x| s.apply_combination(u, x), &comp, &start, SUPPORT_KRYLOV, &mut rng);
    (hi.value, hi.vector)
}

/// One traced direction: θ, support value, attained point ⟨Tx,x⟩ and its witness x.
#[derive(Clone, Debug)]
pub struct BoundarySample {
    pub theta: f64,
    pub value: f64,
    pub point: C64,
    pub witness: CVec,
}

/// Inner polygonal approximation of W(T).
#[derive(Clone, Debug)]
pub struct Boundary {
    pub samples: Vec<BoundarySample>,
}

impl Boundary {
    pub fn vertices(&self) -> Vec<[f64; 2]> {
        self.samples.iter().map(|s| [s.point.re, s.point.im]).collect()
    }

    pub fn polygon(&self) -> ConvexRegion {
        ConvexRegion::Polygon { vertices: convex_hull_2d(&self.vertices()) }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,value,re,im\n");
        for s in &self.samples {
            let _ = writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", s.theta, s.value, s.point.re, s.point.im);
        }
        out
    }
}

/// Rotation method: for θ_k = 2πk/m take the top eigenvector x of Re(e^{−iθ}T); the
/// vertex is ⟨Tx,x⟩. Each direction is computed independently from a fixed start, so
/// the m-gon is a sub-polygon of the 2m-gon.
pub fn numrange_boundary(t: &Operator, samples: usize) -> Result<Boundary> {
    if samples < 3 {
        return Err(Error::Input(format!("boundary tracing needs at least 3 samples, got {samples}")));
    }
    let dim = t.dim();
    let comp = Complement::full(dim);
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let theta = 2.0 * PI * k as f64 / samples as f64;
        let rot = C64::from_polar(1.0, -theta);
        let x = if dim <= DENSE_BOUNDARY_LIMIT {
            let m = t.matrix();
            let h = (m * rot + m.adjoint() * rot.conj()) * cx(0.5, 0.0);
            let (vals, vecs) = hermitian_eigen(&h);
            let top = vals[dim - 1];
            let i = (0..dim).find(|&i| top - vals[i] <= 1e-14 * top.abs().max(1.0)).unwrap_or(dim - 1);
            vecs.column(i).into_owned()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let start = comp.random_unit(&mut rng);
            let apply = |x: &CVec| (t.apply(x) * rot + t.apply_adjoint(x) * rot.conj()) * cx(0.5, 0.0);
            lanczos_extremes(apply, &comp, &start, BOUNDARY_KRYLOV, &mut rng).1.vector
        };
        let point = x.dotc(&t.apply(&x));
        let value = (point * rot).re;
        out.push(BoundarySample { theta, value, point, witness: x });
    }
    Ok(Boundary { samples: out })
}

/// A declared stand-in for the essential numerical range that passed the containment check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRegion {
    pub region: ConvexRegion,
    pub margin: f64,
}

/// Accept the declared region when, shrunk by `margin`, it lies inside the traced
/// polygon of W(T).
pub fn we_model(declared: &ConvexRegion, t: &Operator, margin: f64) -> Result<ModelRegion> {
    declared.validate()?;
    if declared.ambient() != 2 {
        return Err(Error::Input("the numerical range of an operator lives in the plane".into()));
    }
    if !(margin >= 0.0) {
        return Err(Error::Input("margin must be nonnegative".into()));
    }
    let boundary = numrange_boundary(t, BOUNDARY_SAMPLES)?;
    let hull = convex_hull_2d(&boundary.vertices());
    let shrunk = declared.shrink(margin)?;
    for h in hull_halfspaces_2d(&hull) {
        let sup = shrunk.support(&h.normal)?;
        if sup > h.offset + 1e-9 * (1.0 + h.offset.abs()) {
            return Err(Error::Model(format!(
                "declared region minus margin {margin} leaves the traced numerical range (excess {:.3e})",
                sup - h.offset
            )));
        }
    }
    Ok(ModelRegion { region: declared.clone(), margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::{hermitian_parts, OperatorTuple};

    #[test]
    fn support_examples() {
        let d = CMat::from_diagonal(&CVec::from_vec(vec![cx(0.0, 0.0), cx(1.0, 0.0)]));
        let s = SelfAdjointTuple::new(vec![d.clone()]).unwrap();
        let (v, x) = support_point(&s, &[1.0]);
        assert_eq!(v, 1.0);
        assert!((x[1].norm() - 1.0).abs() < 1e-15);
        let e = CMat::from_diagonal(&CVec::from_vec(vec![cx(1.0, 0.0), cx(0.0, 0.0)]));
        let s2 = SelfAdjointTuple::new(vec![d, e]).unwrap();
        let (v, x) = support_point(&s2, &[1.0, 0.0]);
        assert_eq!(v, 1.0);
        assert!((x[1].norm() - 1.0).abs() < 1e-15);

        let n = Operator::dense(CMat::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)])).unwrap();
        let sp = hermitian_parts(&OperatorTuple::single(&n));
        for k in 0..12 {
            let th = k as f64 * 0.5;
            let (v, _) = support_point(&sp, &[th.cos(), th.sin()]);
            assert!((v - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn boundary_examples() {
        let d = Operator::diagonal(&[cx(0.0, 0.0), cx(1.0, 0.0)]).unwrap();
        let b = numrange_boundary(&d, 16).unwrap();
        let hull = convex_hull_2d(&b.vertices());
        assert_eq!(hull.len(), 2);

        let n = Operator::dense(CMat::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)])).unwrap();
        let b = numrange_boundary(&n, 12).unwrap();
        for s in &b.samples {
            assert!((s.point.norm() - 0.5).abs() < 1e-14);
        }
        assert!(matches!(numrange_boundary(&n, 2), Err(Error::Input(_))));
    }

    #[test]
    fn we_model_examples() {
        let r = ConvexRegion::disc([0.0, 0.0], 0.99);
        assert!(matches!(we_model(&r, &Operator::shift(8).unwrap(), 0.0), Err(Error::Model(_))));
        let seg = ConvexRegion::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0]] };
        let d = Operator::diagonal(&[cx(0.0, 0.0), cx(1.0, 0.0)]).unwrap();
        assert!(we_model(&seg, &d, 0.01).is_ok());
    }
}
