//! Necessary conditions and known characterisations, used as verdicts and as test
//! oracles. Infinite sums are only ever seen through a finite horizon, so every trend
//! verdict below is a heuristic and is labelled as one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foundation::linalg::{hermitian_eigen, lanczos_extremes};
use crate::foundation::{CMat, Complement, Operator, SelfAdjointTuple, C64};
use crate::numrange::ConvexRegion;

/// Above this tail share the partial sums count as still growing.
pub const DIVERGING_SHARE: f64 = 0.05;
/// Below this tail share the partial sums count as settled.
pub const SUMMABLE_SHARE: f64 = 0.005;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    DivergingTrend,
    SummableTrend,
    Inconclusive,
}

/// Partial sums of a nonnegative series and the share of the total contributed by its
/// second half, r = (S_K − S_{K/2}) / S_K.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrendReport {
    pub partial_sums: Vec<f64>,
    pub tail_share: f64,
    pub trend: Trend,
    pub heuristic: bool,
}

pub fn classify_trend(terms: &[f64]) -> TrendReport {
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for t in terms {
        acc += t;
        partial_sums.push(acc);
    }
    let k = terms.len();
    let total = acc;
    let (tail_share, trend) = if k == 0 || total <= 0.0 {
        (0.0, Trend::SummableTrend)
    } else {
        let half = if k / 2 == 0 { 0.0 } else { partial_sums[k / 2 - 1] };
        let r = (total - half) / total;
        let trend = if r >= DIVERGING_SHARE {
            Trend::DivergingTrend
        } else if r <= SUMMABLE_SHARE {
            Trend::SummableTrend
        } else {
            Trend::Inconclusive
        };
        (r, trend)
    };
    TrendReport { partial_sums, tail_share, trend, heuristic: true }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlaschkeReport {
    pub exponent: usize,
    pub weights: Vec<f64>,
    #[serde(flatten)]
    pub trend: TrendReport,
}

/// Σ dist^n{λ_k, complement of the region}.
pub fn blaschke_report(lambdas: &[Vec<f64>], region: &ConvexRegion, exponent: Option<usize>) -> Result<BlaschkeReport> {
    let n = exponent.unwrap_or(1);
    if n == 0 {
        return Err(Error::Input("exponent must be at least 1".into()));
    }
    let mut weights = Vec::with_capacity(lambdas.len());
    for l in lambdas {
        if l.len() != region.ambient() {
            return Err(Error::Input(format!("point in R^{} but region in R^{}", l.len(), region.ambient())));
        }
        weights.push(region.dist_to_complement(l).max(0.0).powi(n as i32));
    }
    Ok(blaschke_from_weights(weights, n))
}

pub fn blaschke_from_weights(weights: Vec<f64>, exponent: usize) -> BlaschkeReport {
    let trend = classify_trend(&weights);
    BlaschkeReport { exponent, weights, trend }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NecessaryVerdict {
    /// The necessary condition fails, so no basis realises the sequence.
    Infeasible,
    /// No obstruction found; the condition is not sufficient.
    Unknown,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NecessaryReport {
    pub verdict: NecessaryVerdict,
    /// Bottom of the numerical range of the functional (0 for the positive check).
    pub floor: f64,
    #[serde(flatten)]
    pub trend: TrendReport,
}

fn min_eigenvalue(m: &CMat) -> f64 {
    let d = m.nrows();
    if d <= 512 {
        return hermitian_eigen(m).0.first().copied().unwrap_or(0.0);
    }
    let csr = crate::foundation::linalg::Csr::from_dense(m);
    let comp = Complement::full(d);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0x5eed);
    let start = comp.random_unit(&mut rng);
    lanczos_extremes(|x| csr.apply(x), &comp, &start, 200, &mut rng).0.value
}

/// A positive operator with diagonal (λ_k) forces Σ λ_k = ∞.
pub fn positive_necessary(t: &Operator, lambdas: &[f64]) -> Result<NecessaryReport> {
    let m = t.matrix();
    let skew = (m - m.adjoint()).norm();
    if skew > 1e-12 * m.norm().max(1.0) {
        return Err(Error::Input("operator is not selfadjoint".into()));
    }
    let low = min_eigenvalue(m);
    if low < -1e-12 {
        return Err(Error::Input(format!("operator has negative eigenvalue {low:.3e}")));
    }
    let trend = classify_trend(lambdas);
    let verdict = if trend.trend == Trend::SummableTrend { NecessaryVerdict::Infeasible } else { NecessaryVerdict::Unknown };
    Ok(NecessaryReport { verdict, floor: 0.0, trend })
}

/// For V = α₀ + Σ α_j S_j with bottom a, a diagonal (λ_k) forces
/// Σ (α₀ − a + Σ α_j λ_{k,j}) = ∞.
pub fn functional_necessary(s: &SelfAdjointTuple, lambdas: &[Vec<f64>], alphas: &[f64]) -> Result<NecessaryReport> {
    if alphas.len() != s.s() + 1 {
        return Err(Error::Input(format!("need {} coefficients, got {}", s.s() + 1, alphas.len())));
    }
    if alphas[1..].iter().all(|a| *a == 0.0) {
        return Err(Error::Input("all functional coefficients vanish".into()));
    }
    let d = s.dim();
    let mut v = CMat::identity(d, d) * C64::new(alphas[0], 0.0);
    for (j, a) in alphas[1..].iter().enumerate() {
        v += &s.parts()[j] * C64::new(*a, 0.0);
    }
    let floor = min_eigenvalue(&v);
    let mut terms = Vec::with_capacity(lambdas.len());
    for l in lambdas {
        if l.len() != s.s() {
            return Err(Error::Input("target length does not match the tuple".into()));
        }
        let val: f64 = alphas[0] - floor + alphas[1..].iter().zip(l).map(|(a, x)| a * x).sum::<f64>();
        terms.push(val.max(0.0));
    }
    let trend = classify_trend(&terms);
    let verdict = if trend.trend == Trend::SummableTrend { NecessaryVerdict::Infeasible } else { NecessaryVerdict::Unknown };
    Ok(NecessaryReport { verdict, floor, trend })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftVerdict {
    IsDiagonal,
    NotDiagonal,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShiftReport {
    pub verdict: ShiftVerdict,
    /// Hypotheses on the operator that the caller asserts rather than the code checks.
    pub assumed: Vec<String>,
    #[serde(flatten)]
    pub trend: TrendReport,
}

/// For a contraction whose essential range is the closed disc and which is not Fredholm
/// of index 0, (λ_k) ⊂ 𝔻 is a diagonal iff Σ (1 − |λ_k|) = ∞.
pub fn shift_characterization(lambdas: &[C64]) -> Result<ShiftReport> {
    if let Some((k, l)) = lambdas.iter().enumerate().find(|(_, l)| l.norm() >= 1.0) {
        return Err(Error::Input(format!("point {k} has modulus {} ≥ 1", l.norm())));
    }
    let terms: Vec<f64> = lambdas.iter().map(|l| 1.0 - l.norm()).collect();
    let trend = classify_trend(&terms);
    let verdict = match trend.trend {
        Trend::DivergingTrend => ShiftVerdict::IsDiagonal,
        Trend::SummableTrend => ShiftVerdict::NotDiagonal,
        Trend::Inconclusive => ShiftVerdict::Inconclusive,
    };
    let assumed = vec![
        "norm at most 1".to_string(),
        "essential numerical range is the closed unit disc".to_string(),
        "not Fredholm of index 0".to_string(),
    ];
    Ok(ShiftReport { verdict, assumed, trend })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UnitaryReport {
    /// 2(1 − inf|d_n|)
    pub lhs: f64,
    /// Σ (1 − |d_n|); `None` when the repeated tail makes it diverge.
    pub rhs: Option<f64>,
    pub holds: bool,
}

/// 2(1 − inf|d_n|) ≤ Σ(1 − |d_n|) for a list whose last entry repeats forever.
pub fn unitary_diag_condition(d: &[C64]) -> Result<UnitaryReport> {
    let Some(last) = d.last() else {
        return Err(Error::Input("empty sequence".into()));
    };
    let sup = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if sup > 1.0 + 1e-12 {
        return Err(Error::Input(format!("sup |d_n| = {sup} exceeds 1")));
    }
    let inf = d.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let lhs = 2.0 * (1.0 - inf.min(1.0));
    let tail_gap = 1.0 - last.norm().min(1.0);
    let rhs = if tail_gap > 1e-15 {
        None
    } else {
        Some(d.iter().map(|z| 1.0 - z.norm().min(1.0)).sum())
    };
    let holds = rhs.is_none_or(|r| lhs <= r + 1e-15);
    Ok(UnitaryReport { lhs, rhs, holds })
}

/// A finite head followed by a value repeated forever.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TailedSequence {
    Explicit { head: Vec<f64>, tail: f64 },
    /// Plain list: the last entry is the tail.
    List(Vec<f64>),
}

impl TailedSequence {
    pub fn parts(&self) -> Result<(&[f64], f64)> {
        match self {
            TailedSequence::Explicit { head, tail } => Ok((head, *tail)),
            TailedSequence::List(v) => match v.split_last() {
                Some((t, h)) => Ok((h, *t)),
                None => Err(Error::Input("empty sequence".into())),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KadisonVerdict {
    Admissible,
    Inadmissible,
    DivergentAdmissible,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KadisonReport {
    /// Σ_{d<1/2} d, `None` if infinite.
    pub a: Option<f64>,
    /// Σ_{d≥1/2} (1 − d), `None` if infinite.
    pub b: Option<f64>,
    pub verdict: KadisonVerdict,
}

pub const KADISON_INTEGER_TOL: f64 = 1e-9;

/// Diagonals of projections: either a + b = ∞, or a + b < ∞ and a − b ∈ ℤ.
pub fn kadison_condition(d: &TailedSequence) -> Result<KadisonReport> {
    let (head, tail) = d.parts()?;
    if let Some(x) = head.iter().chain(std::iter::once(&tail)).find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Input(format!("entry {x} outside [0, 1]")));
    }
    let mut a = 0.0;
    let mut b = 0.0;
    for &x in head {
        if x < 0.5 {
            a += x;
        } else {
            b += 1.0 - x;
        }
    }
    let (a, b) = if tail < 0.5 {
        (if tail > 0.0 { None } else { Some(a) }, Some(b))
    } else {
        (Some(a), if tail < 1.0 { None } else { Some(b) })
    };
    let verdict = match (a, b) {
        (Some(a), Some(b)) => {
            let diff = a - b;
            if (diff - diff.round()).abs() <= KADISON_INTEGER_TOL {
                KadisonVerdict::Admissible
            } else {
                KadisonVerdict::Inadmissible
            }
        }
        _ => KadisonVerdict::DivergentAdmissible,
    };
    Ok(KadisonReport { a, b, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::foundation::cx;

    #[test]
    fn trend_examples() {
        assert_eq!(classify_trend(&[1.0; 100]).trend, Trend::DivergingTrend);
        let geo: Vec<f64> = (1..=64).map(|k| 0.5f64.powi(k)).collect();
        assert_eq!(classify_trend(&geo).trend, Trend::SummableTrend);
        let harmonic: Vec<f64> = (1..=1000).map(|k| 1.0 / k as f64).collect();
        let r = classify_trend(&harmonic);
        assert_eq!(r.trend, Trend::DivergingTrend);
        // share of the second half of the harmonic series, against ln 2 / (ln K + γ)
        let approx = 2f64.ln() / (1000f64.ln() + 0.5772156649);
        assert!((r.tail_share - approx).abs() < 1e-3);
    }

    #[test]
    fn kadison_triple() {
        let half = TailedSequence::Explicit { head: vec![], tail: 0.5 };
        assert_eq!(kadison_condition(&half).unwrap().verdict, KadisonVerdict::DivergentAdmissible);
        let int = TailedSequence::Explicit { head: vec![0.75, 0.25], tail: 0.0 };
        let r = kadison_condition(&int).unwrap();
        assert_eq!(r.verdict, KadisonVerdict::Admissible);
        assert_eq!((r.a, r.b), (Some(0.25), Some(0.25)));
        let twelfth = TailedSequence::List(vec![0.75, 1.0 / 3.0, 0.0]);
        let r = kadison_condition(&twelfth).unwrap();
        assert_eq!(r.verdict, KadisonVerdict::Inadmissible);
        assert!((r.a.unwrap() - r.b.unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!(kadison_condition(&TailedSequence::List(vec![1.5])).is_err());
    }

    #[test]
    fn unitary_examples() {
        let r = unitary_diag_condition(&[cx(0.9, 0.0), cx(1.0, 0.0)]).unwrap();
        assert!(!r.holds);
        assert!((r.lhs - 0.2).abs() < 1e-15 && (r.rhs.unwrap() - 0.1).abs() < 1e-15);
        assert!(unitary_diag_condition(&[cx(1.0, 0.0)]).unwrap().holds);
        let r = unitary_diag_condition(&[cx(0.5, 0.0)]).unwrap();
        assert!(r.holds && r.rhs.is_none());
        assert!(unitary_diag_condition(&[cx(1.1, 0.0)]).is_err());
    }

    #[test]
    fn shift_examples() {
        let good: Vec<C64> = (1..=64).map(|k| cx(1.0 - 1.0 / k as f64, 0.0)).collect();
        assert_eq!(shift_characterization(&good).unwrap().verdict, ShiftVerdict::IsDiagonal);
        let bad: Vec<C64> = (1..=40).map(|k| cx(1.0 - 0.5f64.powi(k), 0.0)).collect();
        assert_eq!(shift_characterization(&bad).unwrap().verdict, ShiftVerdict::NotDiagonal);
        assert_eq!(shift_characterization(&[cx(0.0, 0.0); 10]).unwrap().verdict, ShiftVerdict::IsDiagonal);
        assert!(shift_characterization(&[cx(1.0, 0.0)]).is_err());
    }

    #[test]
    fn positive_and_functional() {
        let t = Operator::diagonal(&[cx(0.0, 0.0), cx(1.0, 0.0), cx(2.0, 0.0)]).unwrap();
        let sq: Vec<f64> = (1..=1000).map(|k| 1.0 / (k * k) as f64).collect();
        assert_eq!(positive_necessary(&t, &sq).unwrap().verdict, NecessaryVerdict::Infeasible);
        assert_eq!(positive_necessary(&t, &[0.5; 50]).unwrap().verdict, NecessaryVerdict::Unknown);
        let neg = Operator::diagonal(&[cx(-1.0, 0.0), cx(1.0, 0.0)]).unwrap();
        assert!(positive_necessary(&neg, &[0.5]).is_err());

        let s = SelfAdjointTuple::new(vec![t.matrix().clone()]).unwrap();
        let pts: Vec<Vec<f64>> = sq.iter().map(|x| vec![*x]).collect();
        let f = functional_necessary(&s, &pts, &[0.0, 1.0]).unwrap();
        assert_eq!(f.verdict, NecessaryVerdict::Infeasible);
        assert!(f.floor.abs() < 1e-14);
        assert!(functional_necessary(&s, &pts, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn shift_agrees_with_disc_blaschke() {
        let pts: Vec<C64> = (1..=50).map(|k| C64::from_polar(1.0 - 1.0 / (k as f64 + 1.0), k as f64)).collect();
        let sh = shift_characterization(&pts).unwrap();
        let real: Vec<Vec<f64>> = pts.iter().map(|z| vec![z.re, z.im]).collect();
        let bl = blaschke_report(&real, &ConvexRegion::disc([0.0, 0.0], 1.0), None).unwrap();
        assert_eq!(bl.trend.trend, sh.trend.trend);
        for (a, b) in bl.trend.partial_sums.iter().zip(&sh.trend.partial_sums) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
