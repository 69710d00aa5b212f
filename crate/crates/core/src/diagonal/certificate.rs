use serde::{Deserialize, Serialize};

use super::owners;
use crate::diagnostics::Trend;
use crate::foundation::{CVec, DenseSequence, Frame, SelfAdjointTuple};

/// Slack allowed in the logarithmic ledger.
pub const CERT_SLACK: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildKind {
    Exact,
    Approximate,
    Power,
}

/// How a step produced its vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// u = √(ρ/(ρ+δ)) x + √(δ/(ρ+δ)) b, or c b + √(1−c²) v.
    Mixed,
    /// u = b, because b already has the right value.
    Direct,
    /// The tracked vector already lies in the span; any admissible u.
    Absorbed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index N.
    pub step: usize,
    /// Group m with N ∈ A_m.
    pub group: usize,
    pub branch: Branch,
    /// dist{y_m, M_{N−1}}.
    pub t: f64,
    /// ‖⟨𝒮b,b⟩ − λ_N‖.
    pub rho: f64,
    /// Half the interior distance (exact builders) or |α_N|/2 (approximate builder).
    pub delta: f64,
    /// |⟨b, u_N⟩|², the share of b in the new vector.
    pub mix: f64,
    /// Residual of the inner attainment.
    pub attain_residual: f64,
    /// ‖⟨𝒮u_N,u_N⟩ − λ_N‖.
    pub residual: f64,
    /// Σ_{k≤N, k∈A_m} w_k.
    pub running_sum: f64,
    /// −running_sum / (4 max‖S_j‖).
    pub ledger_bound: f64,
    /// ln dist²{y_m, M_N}; null when the distance is exactly zero.
    pub log_dist2: Option<f64>,
    /// ⟨𝒮b,b⟩ (empty on the absorbed branch).
    pub b_value: Vec<f64>,
    /// The auxiliary point μ (empty unless mixed).
    pub mu: Vec<f64>,
}

/// Decay certificate of a greedy diagonal construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub kind: BuildKind,
    /// Number of real coordinates of the targets.
    pub s: usize,
    /// The max‖S_j‖ (or max‖T_j‖) entering the ledger constant.
    pub max_norm: f64,
    pub slack: f64,
    pub tol_attain: f64,
    pub seed: u64,
    pub targets: Vec<Vec<f64>>,
    /// Ledger weights: interior distances, hull-radius lower bounds, or |α_k|.
    pub weights: Vec<f64>,
    /// Allowed ‖⟨𝒮u_k,u_k⟩ − λ_k‖ per step.
    pub bounds: Vec<f64>,
    pub groups: Vec<Vec<usize>>,
    /// Heuristic trend of Σ w_k at the horizon; anything but diverging is a weak-divergence flag.
    pub weight_trend: Trend,
    pub weak_divergence: bool,
    pub steps: Vec<StepRecord>,
}

impl Certificate {
    pub fn max_residual(&self) -> f64 {
        self.steps.iter().map(|s| s.residual).fold(0.0, f64::max)
    }
}

/// Outcome of an independent audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateAudit {
    pub passed: bool,
    /// 1-based step of the first failure.
    pub failed_step: Option<usize>,
    pub reason: Option<String>,
    pub max_residual: f64,
    pub max_orthogonality: f64,
    /// Largest ln dist² − ledger bound seen (≤ slack when passing).
    pub max_ledger_excess: f64,
}

impl CertificateAudit {
    fn fail(mut self, step: usize, reason: String) -> Self {
        if self.passed {
            self.passed = false;
            self.failed_step = Some(step);
            self.reason = Some(reason);
        }
        self
    }
}

/// Recompute orthonormality, diagonal residuals and every dist{y_m, span u_{≤N}} from the
/// frame itself, and check the logged ledger inequality with the certificate's slack.
pub fn verify_certificate(cert: &Certificate, frame: &Frame, s: &SelfAdjointTuple, dense: &DenseSequence) -> CertificateAudit {
    let mut audit = CertificateAudit {
        passed: true,
        failed_step: None,
        reason: None,
        max_residual: 0.0,
        max_orthogonality: 0.0,
        max_ledger_excess: f64::NEG_INFINITY,
    };
    let k = frame.len();
    if k == 0 && cert.steps.is_empty() {
        audit.max_ledger_excess = 0.0;
        return audit;
    }
    if cert.steps.len() != k || cert.targets.len() < k || cert.bounds.len() < k || cert.weights.len() < k {
        return audit.fail(1, format!("certificate covers {} steps, frame has {k}", cert.steps.len()));
    }
    if s.s() != cert.s || frame.dim() != Some(s.dim()) {
        return audit.fail(1, "tuple does not match the certificate".into());
    }
    if cert.groups.len() > dense.len() {
        return audit.fail(1, "more groups than spanning vectors".into());
    }
    let owner = owners(&cert.groups, k);
    let scale = 4.0 * cert.max_norm;
    let mut running = vec![0.0f64; cert.groups.len().max(1)];
    let mut residuals: Vec<CVec> = dense.vectors()[..cert.groups.len().max(1)].to_vec();
    let tol = frame.tol_ortho();
    for (n, u) in frame.vectors().iter().enumerate() {
        let step = n + 1;
        let mut ortho = (u.norm_squared() - 1.0).abs();
        for v in &frame.vectors()[..n] {
            ortho = ortho.max(u.dotc(v).norm());
        }
        audit.max_orthogonality = audit.max_orthogonality.max(ortho);
        if ortho > tol {
            return audit.fail(step, format!("orthonormality defect {ortho:.3e}"));
        }
        let val = s.values(u);
        let res = val.iter().zip(&cert.targets[n]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        audit.max_residual = audit.max_residual.max(res);
        if res > cert.bounds[n] {
            return audit.fail(step, format!("diagonal residual {res:.3e} exceeds {:.3e}", cert.bounds[n]));
        }
        for r in residuals.iter_mut() {
            let c = u.dotc(r);
            r.axpy(-c, u, crate::foundation::cx(1.0, 0.0));
        }
        let m = owner[n];
        running[m] += cert.weights[n];
        let d2 = residuals[m].norm_squared();
        let bound = -running[m] / scale;
        if d2 > 0.0 {
            let excess = d2.ln() - bound;
            audit.max_ledger_excess = audit.max_ledger_excess.max(excess);
            if excess > cert.slack {
                return audit.fail(step, format!("ln dist² = {:.6} above ledger bound {bound:.6}", d2.ln()));
            }
        }
    }
    if audit.max_ledger_excess == f64::NEG_INFINITY {
        audit.max_ledger_excess = 0.0;
    }
    audit
}
