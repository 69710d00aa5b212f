use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::linalg::{cx, CMat, C64};
use super::operator::{Operator, OperatorKind};
use crate::error::{Error, Result};

/// Operator description as read from JSON.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: Option<OperatorKind>,
    pub dim: Option<i64>,
    #[serde(default)]
    pub entries: Option<Value>,
    #[serde(default)]
    pub weights: Option<Value>,
    #[serde(default)]
    pub lambda: Option<Value>,
}

/// A number or an `[re, im]` pair.
pub fn parse_complex(v: &Value) -> Result<C64> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| cx(x, 0.0)).ok_or_else(|| Error::Input(format!("bad number {n}"))),
        Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_number) => {
            Ok(cx(a[0].as_f64().unwrap_or(f64::NAN), a[1].as_f64().unwrap_or(f64::NAN)))
        }
        other => Err(Error::Input(format!("expected a number or [re, im], got {other}"))),
    }
}

pub fn parse_complex_list(v: &Value) -> Result<Vec<C64>> {
    match v {
        Value::Array(a) => a.iter().map(parse_complex).collect(),
        other => Err(Error::Input(format!("expected a list, got {other}"))),
    }
}

/// Square matrix given as nested rows of numbers or `[re, im]` pairs.
pub fn parse_matrix(v: &Value) -> Result<CMat> {
    let Value::Array(rows) = v else {
        return Err(Error::Input("matrix must be a list of rows".into()));
    };
    let n = rows.len();
    if n == 0 {
        return Err(Error::Input("matrix has no rows".into()));
    }
    let mut m = CMat::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        let row = parse_complex_list(row)?;
        if row.len() != n {
            return Err(Error::Input(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        for (j, z) in row.into_iter().enumerate() {
            m[(i, j)] = z;
        }
    }
    Ok(m)
}

/// Build the operator described by a spec record.
pub fn load_operator(spec: &OperatorSpec) -> Result<Operator> {
    let kind = spec.kind.ok_or_else(|| Error::Input("operator spec needs a kind".into()))?;
    let dim = match spec.dim {
        Some(d) if d < 1 => return Err(Error::Input(format!("dim must be at least 1, got {d}"))),
        Some(d) => Some(d as usize),
        None => None,
    };
    let need_dim = || dim.ok_or_else(|| Error::Input("operator spec needs dim".into()));
    let op = match kind {
        OperatorKind::Shift => Operator::shift(need_dim()?)?,
        OperatorKind::Jordan => {
            let lambda = spec.lambda.as_ref().map(parse_complex).transpose()?.unwrap_or(cx(0.0, 0.0));
            Operator::jordan(need_dim()?, lambda)?
        }
        OperatorKind::WeightedShift => {
            let w = spec.weights.as_ref().ok_or_else(|| Error::Input("weighted_shift needs weights".into()))?;
            let w = parse_complex_list(w)?;
            if let Some(d) = dim {
                if w.len() + 1 != d {
                    return Err(Error::Input(format!("weighted_shift of dim {d} needs {} weights", d - 1)));
                }
            }
            Operator::weighted_shift(&w)?
        }
        OperatorKind::Diagonal => {
            let e = spec.entries.as_ref().ok_or_else(|| Error::Input("diagonal needs entries".into()))?;
            let e = parse_complex_list(e)?;
            if dim.is_some_and(|d| d != e.len()) {
                return Err(Error::Input("diagonal entries do not match dim".into()));
            }
            Operator::diagonal(&e)?
        }
        OperatorKind::Dense => {
            let e = spec.entries.as_ref().ok_or_else(|| Error::Input("dense needs entries".into()))?;
            let m = parse_matrix(e)?;
            if dim.is_some_and(|d| d != m.nrows()) {
                return Err(Error::Input("dense entries do not match dim".into()));
            }
            Operator::dense(m)?
        }
    };
    Ok(op)
}
