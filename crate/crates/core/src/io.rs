//! Serde adapters writing complex numbers as `[re, im]` pairs, plus artifact records.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::foundation::{cx, CMat, CVec, C64};

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        pair(z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(cx(re, im))
    }
}

pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(pair).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?.into_iter().map(|[a, b]| cx(a, b)).collect())
    }
}

/// Matrices as a list of rows.
pub mod complex_mat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(&m[(i, j)])).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(CMat::from_fn(r, c, |i, j| cx(rows[i][j][0], rows[i][j][1])))
    }
}

pub mod complex_mats {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "super::complex_mat")] CMat);

    pub fn serialize<S: Serializer>(v: &[CMat], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|m| Wrap(m.clone())).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
        Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

pub mod complex_vecs {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[CVec], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.iter().map(pair).collect::<Vec<_>>()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CVec>, D::Error> {
        Ok(Vec::<Vec<[f64; 2]>>::deserialize(d)?
            .into_iter()
            .map(|v| CVec::from_iterator(v.len(), v.into_iter().map(|[a, b]| cx(a, b))))
            .collect())
    }
}

pub mod complex_vecvec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.iter().map(pair).collect::<Vec<_>>()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C64>>, D::Error> {
        Ok(Vec::<Vec<[f64; 2]>>::deserialize(d)?
            .into_iter()
            .map(|v| v.into_iter().map(|[a, b]| cx(a, b)).collect())
            .collect())
    }
}

/// On-disk form of a frame.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameFile {
    pub schema: String,
    pub dim: usize,
    #[serde(with = "complex_vecs")]
    pub vectors: Vec<CVec>,
}

impl FrameFile {
    pub fn new(frame: &crate::foundation::Frame, dim: usize) -> Self {
        FrameFile { schema: crate::SCHEMA.into(), dim, vectors: frame.vectors().to_vec() }
    }

    /// Rebuild the frame, checking lengths and orthonormality.
    pub fn to_frame(&self) -> crate::Result<crate::foundation::Frame> {
        if let Some(v) = self.vectors.iter().find(|v| v.len() != self.dim) {
            return Err(crate::Error::Input(format!("frame vector of length {} in dimension {}", v.len(), self.dim)));
        }
        crate::foundation::Frame::new(self.vectors.clone(), crate::foundation::TOL_ORTHO)
    }
}
