use serde::{Deserialize, Serialize};

use super::block::{compression_deviation, correction, glue_powers, joint_diagonalize};
use super::dilation::{l32_ledger, ConvexCombinationLedger};
use super::windows::WindowPlacer;
use super::TOL_PINCH;
use crate::diagonal::{owners, partition_indices, CERT_SLACK, TIE_TOL};
use crate::error::{Error, Result};
use crate::foundation::linalg::{spectral_norm, unit, Csr};
use crate::foundation::{cx, CMat, CVec, DenseSequence, Frame, Operator, C64, TOL_ORTHO};
use crate::SCHEMA;

/// Normality tolerance when diagonalizing corrected blocks.
const NORMAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct PinchOptions {
    pub groups: usize,
    pub seed: u64,
    pub tol_pinch: f64,
    /// Largest index window tried when realizing one diagonal value.
    pub max_window: usize,
}

impl Default for PinchOptions {
    fn default() -> Self {
        PinchOptions { groups: 1, seed: 0, tol_pinch: TOL_PINCH, max_window: 256 }
    }
}

/// What a caller-supplied inner witness must realize: an isometry U whose columns are
/// orthogonal to `avoid` and to `taken`, with U*T^jU = `corrected[j−1]`.
pub struct InnerRequest<'a> {
    /// 1-based block index.
    pub block: usize,
    pub corrected: &'a [CMat],
    pub avoid: &'a [CVec],
    pub taken: &'a [CVec],
}

pub type InnerWitness<'a> = dyn Fn(&InnerRequest) -> Result<CMat> + 'a;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PinchBranch {
    /// The tracked vector enters through v = √(1−ρ²)Ux + ρb.
    Glued,
    /// The tracked vector is already in the span; K = K'.
    Absorbed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PinchBlock {
    /// 1-based block index N.
    pub index: usize,
    pub group: usize,
    pub branch: PinchBranch,
    #[serde(with = "crate::io::complex_mat")]
    pub target: CMat,
    /// C'_{N,j} for j = 1..n.
    #[serde(with = "crate::io::complex_mats")]
    pub corrected: Vec<CMat>,
    /// Unitary Q diagonalizing the corrected blocks (identity for witness-supplied blocks).
    #[serde(with = "crate::io::complex_mat")]
    pub inner: CMat,
    /// V e_i for the standard basis e_i of the block space.
    #[serde(with = "crate::io::complex_vecs")]
    pub basis: Vec<CVec>,
    pub x_index: usize,
    pub rho: f64,
    /// dist{y_m, span of earlier blocks}.
    pub t: f64,
    /// ⟨T^j b, b⟩.
    #[serde(with = "crate::io::complex_vec")]
    pub tau: Vec<C64>,
    pub target_norm: f64,
    pub corrected_norm: f64,
    /// ‖C‖ + (1−‖C‖)/2.
    pub norm_bound: f64,
    /// ‖C'_{N,j} − C^j‖ and the bound 8ρ²‖T‖^j.
    pub deviations: Vec<f64>,
    pub deviation_bounds: Vec<f64>,
    /// max_j max_{z,w} |⟨T^jVz,Vw⟩ − ⟨C^jz,w⟩|.
    pub compression_residual: f64,
    pub weight: f64,
    pub running_sum: f64,
    pub ledger_bound: f64,
    pub log_dist2: Option<f64>,
    /// (start, length) of every index window used.
    pub windows: Vec<(usize, usize)>,
    pub combination: Option<ConvexCombinationLedger>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PinchingPlan {
    pub schema: String,
    /// Highest power covered.
    pub n: usize,
    pub power: bool,
    pub norm_t: f64,
    /// ρ² = (1−‖C‖)ⁿ / (constant · ‖T‖ⁿ).
    pub constant: f64,
    pub slack: f64,
    pub tol_pinch: f64,
    pub seed: u64,
    pub groups: Vec<Vec<usize>>,
    pub blocks: Vec<PinchBlock>,
}

impl PinchingPlan {
    pub fn max_compression_residual(&self) -> f64 {
        self.blocks.iter().map(|b| b.compression_residual).fold(0.0, f64::max)
    }
}

/// Subspaces K_k, mutually orthogonal, with P_{K_k}T|_{K_k} unitarily equivalent to C_k.
///
/// Each step corrects C_k to C_k', realizes C_k' in fresh index windows (after exact
/// diagonalization when C_k' is normal, through `inner` otherwise) and glues in the
/// unabsorbed part b of the tracked vector with weight ρ.
pub fn pinch_blaschke(
    t: &Operator,
    blocks: &[CMat],
    dense: &DenseSequence,
    opts: &PinchOptions,
    inner: Option<&InnerWitness>,
) -> Result<PinchingPlan> {
    pinch_core(t, blocks, 1, 16.0, false, dense, opts, inner)
}

/// Power version: the k-th subspace carries (T, …, Tⁿ) to (C_k, …, C_kⁿ) simultaneously.
pub fn pinch_power_blaschke(t: &Operator, blocks: &[CMat], n: usize, dense: &DenseSequence, opts: &PinchOptions) -> Result<PinchingPlan> {
    if n == 0 {
        return Err(Error::Input("power pinching needs n >= 1".into()));
    }
    let norm_t = t.norm();
    if norm_t < 1.0 - 1e-12 {
        return Err(Error::Input(format!("‖T‖ = {norm_t} < 1 cannot have the closed unit disc in its spectrum")));
    }
    let constant = n as f64 * 2f64.powi(2 * n as i32 + 7);
    pinch_core(t, blocks, n, constant, true, dense, opts, None)
}

fn powers_of(c: &CMat, n: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(n);
    let mut p = c.clone();
    for j in 0..n {
        if j > 0 {
            p = &p * c;
        }
        out.push(p.clone());
    }
    out
}

fn step_seed(seed: u64, step: usize) -> u64 {
    seed ^ (step as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

#[allow(clippy::too_many_arguments)]
fn pinch_core(
    t: &Operator,
    blocks: &[CMat],
    n: usize,
    constant: f64,
    power: bool,
    dense: &DenseSequence,
    opts: &PinchOptions,
    inner: Option<&InnerWitness>,
) -> Result<PinchingPlan> {
    let dim = t.dim();
    let norm_t = t.norm();
    if norm_t == 0.0 {
        return Err(Error::Input("T = 0 admits no pinching".into()));
    }
    let mut norms = Vec::with_capacity(blocks.len());
    for (i, c) in blocks.iter().enumerate() {
        if c.nrows() == 0 || c.nrows() != c.ncols() {
            return Err(Error::Input(format!("block {} is not square", i + 1)));
        }
        let nc = spectral_norm(c);
        if nc >= 1.0 {
            return Err(Error::Input(format!("block {} has norm {nc} >= 1", i + 1)));
        }
        norms.push(nc);
    }
    let weights: Vec<f64> = norms.iter().map(|c| (1.0 - c).powi(n as i32) / (constant * norm_t.powi(n as i32))).collect();
    let groups = partition_indices(&weights, opts.groups);
    if groups.len() > dense.len() || dense.vectors()[0].len() != dim {
        return Err(Error::Input("spanning sequence does not match the groups or the dimension".into()));
    }
    let owner = owners(&groups, blocks.len());
    let mut placer = WindowPlacer::new(t, n, opts.max_window)?;
    let mut residuals: Vec<CVec> = dense.vectors()[..groups.len()].to_vec();
    let mut running = vec![0.0f64; groups.len()];
    let mut glued_bs: Vec<CVec> = Vec::new();
    let mut taken: Vec<CVec> = Vec::new();
    let mut out = Vec::with_capacity(blocks.len());

    for (idx, c) in blocks.iter().enumerate() {
        let step = idx + 1;
        let m = owner[idx];
        let k = c.nrows();
        let tdist = residuals[m].norm();
        let (branch, rho, b) = if tdist > TIE_TOL {
            (PinchBranch::Glued, weights[idx].sqrt(), residuals[m].unscale(tdist))
        } else {
            (PinchBranch::Absorbed, 0.0, CVec::zeros(dim))
        };
        let x = unit(k, 0);
        let c_pows = powers_of(c, n);
        let mut avoid = glued_bs.clone();
        let mut tau = Vec::with_capacity(n);
        for p in placer.powers() {
            let tb = p.apply(&b);
            tau.push(b.dotc(&tb));
            if branch == PinchBranch::Glued {
                avoid.push(tb);
                avoid.push(p.apply_adjoint(&b));
            }
        }
        if branch == PinchBranch::Glued {
            avoid.push(b.clone());
        }
        let corrected: Vec<CMat> = c_pows.iter().zip(&tau).map(|(cj, tj)| correction(cj, rho, *tj, &x)).collect();
        let corrected_norm = spectral_norm(&corrected[0]);
        let norm_bound = norms[idx] + (1.0 - norms[idx]) / 2.0;
        if corrected_norm > norm_bound + 1e-12 || corrected_norm >= 1.0 {
            return Err(Error::Internal(format!("block {step}: corrected norm {corrected_norm:.6} exceeds {norm_bound:.6}")));
        }
        let deviations: Vec<f64> = corrected.iter().zip(&c_pows).map(|(a, b)| spectral_norm(&(a - b))).collect();
        let deviation_bounds: Vec<f64> = (1..=n).map(|j| 8.0 * rho * rho * norm_t.powi(j as i32)).collect();
        if power {
            if let Some(j) = (0..n).find(|&j| deviations[j] > deviation_bounds[j] * (1.0 + 1e-9) + 1e-15) {
                return Err(Error::Internal(format!(
                    "block {step}: ‖C'_j − C^j‖ = {:.3e} above 8ρ²‖T‖^j = {:.3e} for j = {}",
                    deviations[j],
                    deviation_bounds[j],
                    j + 1
                )));
            }
        }

        let mut windows = Vec::new();
        let (inner_q, u) = match joint_diagonalize(&corrected, step_seed(opts.seed, step), NORMAL_TOL) {
            Some((q, values)) => {
                let mut w = CMat::zeros(dim, k);
                for (i, val) in values.iter().enumerate() {
                    let (f, span) = placer.place(val, &avoid, step_seed(opts.seed, step) ^ i as u64).map_err(|e| e.at_step(step))?;
                    w.set_column(i, &f);
                    windows.push(span);
                }
                let u = &w * q.adjoint();
                (q, u)
            }
            None => {
                let Some(cb) = inner else {
                    return Err(Error::UnsupportedBlock {
                        block: step,
                        reason: "corrected block is not normal; a uniform pinching witness is required".into(),
                    });
                };
                let u = cb(&InnerRequest { block: step, corrected: &corrected, avoid: &avoid, taken: &taken })?;
                check_witness(&u, &corrected, placer.powers(), &avoid, &taken, opts.tol_pinch, step)?;
                for col in u.column_iter() {
                    placer.skip_past(&col.into_owned());
                }
                (CMat::identity(k, k), u)
            }
        };
        let kprime = Frame::new(u.column_iter().map(|c| c.into_owned()).collect(), TOL_ORTHO)?;
        let (frame, _) = glue_powers(placer.powers(), &c_pows, &kprime, &b, rho, 0, opts.tol_pinch, norm_t)?;
        let basis = frame.into_vectors();
        let compression_residual =
            placer.powers().iter().zip(&c_pows).map(|(p, cj)| compression_deviation(p, &basis, cj)).fold(0.0, f64::max);
        if compression_residual > opts.tol_pinch {
            return Err(Error::Internal(format!("block {step}: compression residual {compression_residual:.3e}")));
        }
        for v in &basis {
            for r in residuals.iter_mut() {
                let z = v.dotc(r);
                r.axpy(-z, v, cx(1.0, 0.0));
            }
        }
        running[m] += weights[idx];
        let d2 = residuals[m].norm_squared();
        let log_dist2 = (d2 > 0.0).then(|| d2.ln());
        let ledger_bound = -running[m];
        if let Some(l) = log_dist2 {
            if l > ledger_bound + CERT_SLACK {
                return Err(Error::Internal(format!("block {step}: ln dist² {l:.6} above ledger bound {ledger_bound:.6}")));
            }
        }
        let combination = if power {
            let a: Vec<CMat> = corrected.iter().zip(&c_pows).map(|(a, b)| a - b).collect();
            Some(l32_ledger(c, &a, n, 1.0)?)
        } else {
            None
        };
        if branch == PinchBranch::Glued {
            glued_bs.push(b);
        }
        taken.extend(basis.iter().cloned());
        out.push(PinchBlock {
            index: step,
            group: m,
            branch,
            target: c.clone(),
            corrected,
            inner: inner_q,
            basis,
            x_index: 0,
            rho,
            t: tdist,
            tau,
            target_norm: norms[idx],
            corrected_norm,
            norm_bound,
            deviations,
            deviation_bounds,
            compression_residual,
            weight: weights[idx],
            running_sum: running[m],
            ledger_bound,
            log_dist2,
            windows,
            combination,
        });
    }
    Ok(PinchingPlan {
        schema: SCHEMA.into(),
        n,
        power,
        norm_t,
        constant,
        slack: CERT_SLACK,
        tol_pinch: opts.tol_pinch,
        seed: opts.seed,
        groups,
        blocks: out,
    })
}

fn check_witness(u: &CMat, corrected: &[CMat], powers: &[Csr], avoid: &[CVec], taken: &[CVec], tol: f64, step: usize) -> Result<()> {
    let k = corrected[0].nrows();
    if u.ncols() != k || u.nrows() != powers[0].dim() {
        return Err(Error::Input(format!("block {step}: witness has shape {}x{}", u.nrows(), u.ncols())));
    }
    let cols: Vec<CVec> = u.column_iter().map(|c| c.into_owned()).collect();
    let mut worst = 0.0f64;
    for f in &cols {
        for a in avoid.iter().chain(taken) {
            worst = worst.max(f.dotc(a).norm() / a.norm().max(1.0));
        }
    }
    if worst > TOL_ORTHO {
        return Err(Error::Geometry(format!("block {step}: witness not orthogonal to the excluded vectors ({worst:.3e})")));
    }
    let dev = powers.iter().zip(corrected).map(|(p, c)| compression_deviation(p, &cols, c)).fold(0.0, f64::max);
    if dev > tol {
        return Err(Error::Geometry(format!("block {step}: witness compression off by {dev:.3e}")));
    }
    Ok(())
}

/// Independent audit of a plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanAudit {
    pub passed: bool,
    pub failed_block: Option<usize>,
    pub reason: Option<String>,
    pub max_compression_residual: f64,
    pub max_orthogonality: f64,
    pub max_ledger_excess: f64,
}

/// Recompute orthonormality across all blocks, every compression identity, the norm
/// ledger, the deviation bounds of power plans and the log-distance ledger.
pub fn verify_plan(plan: &PinchingPlan, t: &Operator, dense: &DenseSequence) -> PlanAudit {
    let mut audit = PlanAudit {
        passed: true,
        failed_block: None,
        reason: None,
        max_compression_residual: 0.0,
        max_orthogonality: 0.0,
        max_ledger_excess: f64::NEG_INFINITY,
    };
    let fail = |mut a: PlanAudit, block: usize, reason: String| {
        a.passed = false;
        a.failed_block = Some(block);
        a.reason = Some(reason);
        a
    };
    if plan.groups.len() > dense.len() || dense.vectors()[0].len() != t.dim() {
        return fail(audit, 1, "spanning sequence does not match the plan".into());
    }
    let powers: Vec<Csr> = (1..=plan.n).map(|j| t.power_csr(j)).collect();
    let norm_t = t.norm();
    let mut seen: Vec<CVec> = Vec::new();
    let mut residuals: Vec<CVec> = dense.vectors()[..plan.groups.len()].to_vec();
    let mut running = vec![0.0f64; plan.groups.len()];
    for blk in &plan.blocks {
        let step = blk.index;
        for v in &blk.basis {
            if v.len() != t.dim() {
                return fail(audit, step, "basis vector has the wrong dimension".into());
            }
            let mut o = (v.norm_squared() - 1.0).abs();
            for w in &seen {
                o = o.max(v.dotc(w).norm());
            }
            audit.max_orthogonality = audit.max_orthogonality.max(o);
            if o > TOL_ORTHO {
                return fail(audit, step, format!("orthonormality defect {o:.3e}"));
            }
            seen.push(v.clone());
        }
        let c_pows = powers_of(&blk.target, plan.n);
        let dev = powers.iter().zip(&c_pows).map(|(p, c)| compression_deviation(p, &blk.basis, c)).fold(0.0, f64::max);
        audit.max_compression_residual = audit.max_compression_residual.max(dev);
        if dev > plan.tol_pinch {
            return fail(audit, step, format!("compression identity off by {dev:.3e}"));
        }
        let nc = spectral_norm(&blk.target);
        let ncp = blk.corrected.first().map(spectral_norm).unwrap_or(f64::INFINITY);
        if ncp > nc + (1.0 - nc) / 2.0 + 1e-12 || ncp >= 1.0 {
            return fail(audit, step, format!("corrected norm {ncp:.6} breaks the norm ledger"));
        }
        if plan.power {
            for (j, (a, b)) in blk.corrected.iter().zip(&c_pows).enumerate() {
                let d = spectral_norm(&(a - b));
                let bound = 8.0 * blk.rho * blk.rho * norm_t.powi(j as i32 + 1);
                if d > bound * (1.0 + 1e-9) + 1e-15 {
                    return fail(audit, step, format!("deviation {d:.3e} above {bound:.3e} at power {}", j + 1));
                }
            }
        }
        for v in &blk.basis {
            for r in residuals.iter_mut() {
                let z = v.dotc(r);
                r.axpy(-z, v, cx(1.0, 0.0));
            }
        }
        let m = blk.group;
        if m >= running.len() {
            return fail(audit, step, "block group out of range".into());
        }
        running[m] += (1.0 - nc).powi(plan.n as i32) / (plan.constant * norm_t.powi(plan.n as i32));
        let d2 = residuals[m].norm_squared();
        if d2 > 0.0 {
            let excess = d2.ln() + running[m];
            audit.max_ledger_excess = audit.max_ledger_excess.max(excess);
            if excess > plan.slack {
                return fail(audit, step, format!("ln dist² = {:.6} above ledger bound {:.6}", d2.ln(), -running[m]));
            }
        }
    }
    if audit.max_ledger_excess == f64::NEG_INFINITY {
        audit.max_ledger_excess = 0.0;
    }
    audit
}
