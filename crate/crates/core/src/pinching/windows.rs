use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagonal::complex_to_real;
use crate::error::{Error, Result};
use crate::foundation::linalg::Csr;
use crate::foundation::{hermitian_parts, Bandwidth, CMat, CVec, Complement, Frame, Operator, OperatorTuple, C64, TOL_ORTHO};
use crate::inverse_range::{attain_in, AttainOptions};

/// Smallest window tried by the adaptive placer.
const MIN_WINDOW: usize = 16;
const WINDOW_TOL: f64 = 1e-11;

/// Places unit vectors in disjoint index windows, consecutive windows separated by more
/// than the bandwidth of Tⁿ, so all cross compressions vanish identically.
pub(crate) struct WindowPlacer {
    powers: Vec<Csr>,
    gap: usize,
    pub cursor: usize,
    pub max_window: usize,
}

impl WindowPlacer {
    pub fn new(t: &Operator, n: usize, max_window: usize) -> Result<Self> {
        let bw = match t.bandwidth() {
            Bandwidth::Banded(b) => b,
            Bandwidth::Full => return Err(Error::Input("window placement needs a banded operator".into())),
        };
        Ok(WindowPlacer { powers: (1..=n).map(|j| t.power_csr(j)).collect(), gap: n * bw, cursor: 0, max_window })
    }

    pub fn powers(&self) -> &[Csr] {
        &self.powers
    }

    pub fn dim(&self) -> usize {
        self.powers[0].dim()
    }

    /// Realize the joint value (⟨Tf,f⟩, …, ⟨Tⁿf,f⟩) = `value` in the window start..start+len,
    /// with f orthogonal to `avoid`.
    fn attain_window(&self, value: &[C64], avoid: &[CVec], start: usize, len: usize, seed: u64) -> Result<CVec> {
        let parts: Vec<CMat> = self.powers.iter().map(|p| p.block(start, len)).collect();
        let s = hermitian_parts(&OperatorTuple::new(parts)?);
        let restricted: Vec<CVec> = avoid.iter().map(|a| a.rows(start, len).into_owned()).collect();
        let comp = Complement::new(len, &restricted);
        let opts = AttainOptions { tol: WINDOW_TOL, seed, rounds: 60, multistarts: 8, krylov: len };
        let got = attain_in(&s, &complex_to_real(value), &comp, &opts)?;
        let mut f = CVec::zeros(self.dim());
        f.rows_mut(start, len).copy_from(&got.x);
        Ok(f)
    }

    /// Adaptive placement: window sizes double from 16 up to `max_window`.
    pub fn place(&mut self, value: &[C64], avoid: &[CVec], seed: u64) -> Result<(CVec, (usize, usize))> {
        let mut len = MIN_WINDOW;
        let mut last = None;
        while len <= self.max_window {
            if self.cursor + len > self.dim() {
                break;
            }
            match self.attain_window(value, avoid, self.cursor, len, seed) {
                Ok(f) => {
                    let span = (self.cursor, len);
                    self.cursor += len + self.gap;
                    return Ok((f, span));
                }
                Err(e @ (Error::NotAttained { .. } | Error::Input(_))) => last = Some(e),
                Err(e) => return Err(e),
            }
            len *= 2;
        }
        Err(Error::not_attained(match last {
            Some(e) => format!("no window at index {} realizes the value: {e}", self.cursor),
            None => format!("truncation exhausted at index {} of {}", self.cursor, self.dim()),
        }))
    }

    /// Move the cursor past the support of `v`.
    pub fn skip_past(&mut self, v: &CVec) {
        if let Some(last) = (0..v.len()).rev().find(|&i| v[i].norm() > 0.0) {
            self.cursor = self.cursor.max(last + 1 + self.gap);
        }
    }
}

/// Vectors in separated windows of length w with ⟨Tf_i,f_i⟩ = D_i; the compression onto
/// them is diagonal with off-diagonal entries exactly zero.
pub fn uniform_pinch_banded(t: &Operator, d: &[C64], window: usize) -> Result<Frame> {
    let bw = match t.bandwidth() {
        Bandwidth::Banded(b) => b,
        Bandwidth::Full => return Err(Error::Input("uniform pinching needs a banded operator".into())),
    };
    if bw > window || window < 2 {
        return Err(Error::Input(format!("window {window} is narrower than the bandwidth {bw}")));
    }
    let placer = WindowPlacer::new(t, 1, window)?;
    let mut out = Vec::with_capacity(d.len());
    let mut cursor = 0;
    for (i, z) in d.iter().enumerate() {
        if cursor + window > t.dim() {
            return Err(Error::NotAttained { step: Some(i + 1), reason: format!("no room for window {}", i + 1) });
        }
        let f = placer
            .attain_window(&[*z], &[], cursor, window, i as u64)
            .map_err(|e| e.at_step(i + 1))?;
        out.push(f);
        cursor += window + bw;
    }
    Frame::new(out, TOL_ORTHO)
}

/// One of the mutually orthogonal subspaces H_m, with the circle target each vector serves.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitSubspace {
    #[serde(with = "crate::io::complex_vecs")]
    pub vectors: Vec<CVec>,
    /// (s, j): the vector's value is within 1/j of w_s.
    pub labels: Vec<(usize, usize)>,
    #[serde(with = "crate::io::complex_vec")]
    pub values: Vec<C64>,
}

impl SplitSubspace {
    pub fn frame(&self) -> Result<Frame> {
        Frame::new(self.vectors.clone(), TOL_ORTHO)
    }
}

/// w_s = exp(2πi s / count), s = 1..count.
pub fn circle_target(s: usize, count: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * s as f64 / count as f64)
}

/// Orthonormal x_k with |⟨Tx_k,x_k⟩ − w_s| < 1/j, enumerating (j, s, m) over
/// [1, j_max] × [1, targets] × [1, m] and sorting x_k into H_m.
pub fn split_subspaces(t: &Operator, m: usize, targets: usize, j_max: usize, seed: u64) -> Result<Vec<SplitSubspace>> {
    if m == 0 || targets == 0 || j_max == 0 {
        return Err(Error::Input("m, targets and j_max must be positive".into()));
    }
    let s = hermitian_parts(&OperatorTuple::single(t));
    let mut comp = Complement::full(t.dim());
    let mut out = vec![SplitSubspace { vectors: Vec::new(), labels: Vec::new(), values: Vec::new() }; m];
    let mut k = 0;
    for j in 1..=j_max {
        for si in 1..=targets {
            for space in out.iter_mut() {
                k += 1;
                if comp.rank() + 3 >= t.dim() {
                    return Err(Error::NotAttained { step: Some(k), reason: format!("truncation exhausted at vector {k}") });
                }
                let w = circle_target(si, targets);
                let aim = w * (1.0 - 0.5 / j as f64);
                let opts = AttainOptions { tol: 0.25 / j as f64, seed: seed ^ k as u64, rounds: 60, multistarts: 4, krylov: 80 };
                let got = attain_in(&s, &[aim.re, aim.im], &comp, &opts).map_err(|e| e.at_step(k))?;
                let v = s.values(&got.x);
                comp.push(&got.x);
                space.vectors.push(got.x);
                space.labels.push((si, j));
                space.values.push(C64::new(v[0], v[1]));
            }
        }
    }
    Ok(out)
}
