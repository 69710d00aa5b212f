//! Greedy inductive construction of orthonormal families with prescribed diagonals.
//!
//! Every builder tracks one vector y_m of a spanning sequence per group A_m and records,
//! step by step, how fast y_m is absorbed by the span of the family. The resulting
//! [`Certificate`] can be audited independently with [`verify_certificate`].

mod approx;
mod certificate;
mod exact;

pub use approx::{build_approx_diagonal, build_schatten_perturbation, SchattenReport};
pub use certificate::{verify_certificate, Branch, BuildKind, Certificate, CertificateAudit, StepRecord, CERT_SLACK};
pub use exact::{build_exact_diagonal, build_exact_diagonal_complex, build_power_diagonal, SpectralDisc};

use crate::foundation::C64;

/// Knobs shared by the builders. The number of steps is the number of targets.
#[derive(Clone, Debug)]
pub struct BuildOptions {
    /// Number of groups A_m, i.e. how many vectors of the spanning sequence are tracked.
    pub groups: usize,
    pub seed: u64,
    /// Attainment tolerance; defaults to 1e-10 for s ≤ 2 and 1e-8 otherwise.
    pub tol: Option<f64>,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { groups: 1, seed: 0, tol: None }
    }
}

/// Degenerate-branch threshold for t and ρ.
pub const TIE_TOL: f64 = 1e-12;

/// Split 0..K into `m` groups, always handing the next index to the group with the
/// smallest running weight (lowest group index on ties).
pub fn partition_indices(weights: &[f64], m: usize) -> Vec<Vec<usize>> {
    let m = m.max(1);
    let mut groups = vec![Vec::new(); m];
    let mut sums = vec![0.0f64; m];
    for (k, w) in weights.iter().enumerate() {
        let g = (0..m).fold(0, |best, i| if sums[i] < sums[best] { i } else { best });
        groups[g].push(k);
        sums[g] += w;
    }
    groups
}

/// Complex targets in ℂⁿ as real coordinates (Re λ₁, Im λ₁, …), matching the order of
/// [`crate::foundation::hermitian_parts`].
pub fn complex_to_real(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn real_to_complex(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|c| C64::new(c[0], c.get(1).copied().unwrap_or(0.0))).collect()
}

/// Group index of every step.
pub(crate) fn owners(groups: &[Vec<usize>], k: usize) -> Vec<usize> {
    let mut owner = vec![0; k];
    for (g, idx) in groups.iter().enumerate() {
        for &i in idx {
            owner[i] = g;
        }
    }
    owner
}
