//! JSON file formats for tensors, polytopes and patches.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{MtlError, Result};
use crate::patch::{ConeRegion, PatchPiece, PositionRegion, SupportPatch};
use crate::polytope::Polytope;
use crate::spherical::ConeConstraint;
use crate::tensor::SymTensor;

/// Coefficients smaller than this are left out of files.
pub const WRITE_CUTOFF: f64 = 1e-14;

fn index_key(idx: &[usize]) -> String {
    let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn parse_key(key: &str) -> Result<Vec<usize>> {
    let inner = key
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| MtlError::MalformedIndex(format!("{key:?} is not of the form [i1,...]")))?;
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|s| match s.trim().parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i - 1),
            _ => Err(MtlError::MalformedIndex(format!("bad index {s:?} in {key:?}"))),
        })
        .collect()
}

struct Coeffs<'a>(&'a SymTensor);

impl Serialize for Coeffs<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let kept: Vec<_> = self.0.coeffs().iter().filter(|(_, c)| c.abs() >= WRITE_CUTOFF).collect();
        let mut m = s.serialize_map(Some(kept.len()))?;
        for (idx, c) in kept {
            m.serialize_entry(&index_key(idx), c)?;
        }
        m.end()
    }
}

impl Serialize for SymTensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SymTensor", 3)?;
        st.serialize_field("n", &self.dim())?;
        st.serialize_field("rank", &self.rank())?;
        st.serialize_field("coeffs", &Coeffs(self))?;
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorRecord {
    n: usize,
    rank: usize,
    coeffs: BTreeMap<String, f64>,
}

impl<'de> Deserialize<'de> for SymTensor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = TensorRecord::deserialize(d)?;
        let entries = rec
            .coeffs
            .iter()
            .map(|(k, v)| Ok((parse_key(k)?, *v)))
            .collect::<Result<Vec<_>>>()
            .map_err(de::Error::custom)?;
        SymTensor::from_polynomial(&entries, rec.n, rec.rank).map_err(de::Error::custom)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeFile {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
}

impl PolytopeFile {
    pub fn from_polytope(p: &Polytope) -> Self {
        Self {
            dim: p.ambient_dim(),
            vertices: p.vertices().to_vec(),
        }
    }

    pub fn to_polytope(&self) -> Result<Polytope> {
        if let Some(v) = self.vertices.iter().find(|v| v.len() != self.dim) {
            return Err(MtlError::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Polytope::new(&self.vertices)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum PositionRecord {
    All,
    Box { min: Vec<f64>, max: Vec<f64> },
    Polytope { vertices: Vec<Vec<f64>> },
}

/// Normals define closed constraints `<u, a> >= 0` unless flagged strict.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum NormalRecord {
    All,
    Halfspaces {
        normals: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strict: Option<Vec<bool>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceRecord {
    pub position: PositionRecord,
    pub normal: NormalRecord,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchFile {
    pub patches: Vec<PieceRecord>,
}

impl PatchFile {
    pub fn to_patch(&self) -> Result<SupportPatch> {
        let pieces = self
            .patches
            .iter()
            .map(|p| {
                let position = match &p.position {
                    PositionRecord::All => PositionRegion::All,
                    PositionRecord::Box { min, max } => {
                        if min.len() != max.len() {
                            return Err(MtlError::DimensionMismatch {
                                expected: min.len(),
                                found: max.len(),
                            });
                        }
                        PositionRegion::Box {
                            min: min.clone(),
                            max: max.clone(),
                        }
                    }
                    PositionRecord::Polytope { vertices } => {
                        if vertices.is_empty() {
                            return Err(MtlError::EmptyInput("position polytope"));
                        }
                        PositionRegion::Polytope(vertices.clone())
                    }
                };
                let normal = match &p.normal {
                    NormalRecord::All => ConeRegion::All,
                    NormalRecord::Halfspaces { normals, strict } => {
                        let flags = strict.clone().unwrap_or_else(|| vec![false; normals.len()]);
                        if flags.len() != normals.len() {
                            return Err(MtlError::Parse(
                                "strict flags must match the normals one to one".into(),
                            ));
                        }
                        ConeRegion::Halfspaces(
                            normals
                                .iter()
                                .zip(flags)
                                .map(|(a, s)| ConeConstraint {
                                    normal: a.clone(),
                                    strict: s,
                                })
                                .collect(),
                        )
                    }
                };
                Ok(PatchPiece { position, normal })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SupportPatch::with_pieces(pieces))
    }

    /// File form of a patch; pieces given by general halfspaces have none.
    pub fn from_patch(patch: &SupportPatch) -> Result<Self> {
        let patches = patch
            .pieces
            .iter()
            .map(|p| {
                let position = match &p.position {
                    PositionRegion::All => PositionRecord::All,
                    PositionRegion::Box { min, max } => PositionRecord::Box {
                        min: min.clone(),
                        max: max.clone(),
                    },
                    PositionRegion::Polytope(v) => PositionRecord::Polytope { vertices: v.clone() },
                    PositionRegion::Halfspaces(_) => {
                        return Err(MtlError::InvalidArgument(
                            "halfspace positions have no file form".into(),
                        ))
                    }
                };
                let normal = match &p.normal {
                    ConeRegion::All => NormalRecord::All,
                    ConeRegion::Halfspaces(c) => NormalRecord::Halfspaces {
                        normals: c.iter().map(|c| c.normal.clone()).collect(),
                        strict: c.iter().any(|c| c.strict).then(|| c.iter().map(|c| c.strict).collect()),
                    },
                };
                Ok(PieceRecord { position, normal })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { patches })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| MtlError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| MtlError::Parse(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?).map_err(|e| MtlError::Io(format!("{}: {e}", path.display())))
}

pub fn read_polytope(path: &Path) -> Result<Polytope> {
    read_json::<PolytopeFile>(path)?.to_polytope()
}

pub fn read_patch(path: &Path) -> Result<SupportPatch> {
    read_json::<PatchFile>(path)?.to_patch()
}

pub fn read_tensor(path: &Path) -> Result<SymTensor> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_round_trip() {
        let t = SymTensor::from_coeffs(3, 2, [(vec![0, 1], 1.5), (vec![2, 2], -2.0), (vec![0, 0], 1e-16)]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"n":3,"rank":2,"coeffs":{"[1,2]":1.5,"[3,3]":-2.0}}"#);
        let back: SymTensor = serde_json::from_str(&s).unwrap();
        assert!(back.approx_eq(&t, 1e-15));
    }

    #[test]
    fn scalar_key() {
        let t = SymTensor::scalar(2, 3.0);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"n":2,"rank":0,"coeffs":{"[]":3.0}}"#);
    }

    #[test]
    fn bad_keys_rejected() {
        for bad in [
            r#"{"n":2,"rank":1,"coeffs":{"[0]":1.0}}"#,
            r#"{"n":2,"rank":1,"coeffs":{"[3]":1.0}}"#,
            r#"{"n":2,"rank":2,"coeffs":{"[2,1]":1.0}}"#,
            r#"{"n":2,"rank":2,"coeffs":{"1,1":1.0}}"#,
        ] {
            assert!(serde_json::from_str::<SymTensor>(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn patch_file_round_trip() {
        let text = r#"{"patches":[
            {"position":{"type":"box","min":[0,0],"max":[1,1]},"normal":{"type":"halfspaces","normals":[[1,0]]}},
            {"position":{"type":"all"},"normal":{"type":"all"}}]}"#;
        let f: PatchFile = serde_json::from_str(text).unwrap();
        let patch = f.to_patch().unwrap();
        assert_eq!(patch.pieces.len(), 2);
        let again = PatchFile::from_patch(&patch).unwrap().to_patch().unwrap();
        assert_eq!(again, patch);
    }

    #[test]
    fn polytope_dimension_checked() {
        let f: PolytopeFile = serde_json::from_str(r#"{"dim":3,"vertices":[[0,0],[1,0]]}"#).unwrap();
        assert!(f.to_polytope().is_err());
    }
}
