//! Borel sets of Sigma^n = R^n x S^{n-1} that are finite unions of products
//! `position x normal-cone`.

use crate::error::{MtlError, Result};
use crate::polytope::{Halfspace, Polytope};
use crate::spherical::{ConeConstraint, SphericalRegion};
use crate::tensor::Rotation;

/// Position factor of a patch piece.
#[derive(Clone, Debug, PartialEq)]
pub enum PositionRegion {
    All,
    /// Half-open box `[min, max)`, so that boxes sharing a wall are disjoint.
    Box { min: Vec<f64>, max: Vec<f64> },
    /// Closed convex hull of the given points.
    Polytope(Vec<Vec<f64>>),
    /// Intersection of affine constraints.
    Halfspaces(Vec<Halfspace>),
}

/// Normal factor of a patch piece: a polyhedral cone intersected with the
/// unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub enum ConeRegion {
    All,
    Halfspaces(Vec<ConeConstraint>),
}

impl PositionRegion {
    /// The region as a list of constraints (empty for `All`).
    pub fn constraints(&self) -> Result<Vec<Halfspace>> {
        match self {
            PositionRegion::All => Ok(Vec::new()),
            PositionRegion::Box { min, max } => {
                if min.len() != max.len() {
                    return Err(MtlError::DimensionMismatch {
                        expected: min.len(),
                        found: max.len(),
                    });
                }
                let n = min.len();
                let mut out = Vec::with_capacity(2 * n);
                for i in 0..n {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    out.push(Halfspace::ge(e.clone(), min[i]));
                    e[i] = -1.0;
                    out.push(Halfspace::gt(e, -max[i]));
                }
                Ok(out)
            }
            PositionRegion::Polytope(v) => Ok(Polytope::new(v)?.halfspaces()),
            PositionRegion::Halfspaces(h) => Ok(h.clone()),
        }
    }

    pub fn contains(&self, x: &[f64], eps: f64) -> Result<bool> {
        Ok(self.constraints()?.iter().all(|h| h.contains(x, eps)))
    }

    fn transformed(&self, theta: &Rotation, t: &[f64]) -> Result<PositionRegion> {
        Ok(match self {
            PositionRegion::All => PositionRegion::All,
            PositionRegion::Polytope(v) => PositionRegion::Polytope(
                v.iter()
                    .map(|p| crate::linalg::add(&theta.apply(p), t))
                    .collect(),
            ),
            PositionRegion::Box { min, max } if theta == &Rotation::identity(min.len()) => {
                PositionRegion::Box {
                    min: crate::linalg::add(min, t),
                    max: crate::linalg::add(max, t),
                }
            }
            other => PositionRegion::Halfspaces(
                other
                    .constraints()?
                    .iter()
                    .map(|h| h.transformed(theta, t))
                    .collect(),
            ),
        })
    }

    fn dim(&self) -> Option<usize> {
        match self {
            PositionRegion::All => None,
            PositionRegion::Box { min, .. } => Some(min.len()),
            PositionRegion::Polytope(v) => v.first().map(|p| p.len()),
            PositionRegion::Halfspaces(h) => h.first().map(|c| c.normal.len()),
        }
    }
}

impl ConeRegion {
    pub fn constraints(&self) -> &[ConeConstraint] {
        match self {
            ConeRegion::All => &[],
            ConeRegion::Halfspaces(c) => c,
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        self.constraints().iter().all(|c| c.contains(u))
    }

    fn transformed(&self, theta: &Rotation) -> ConeRegion {
        match self {
            ConeRegion::All => ConeRegion::All,
            ConeRegion::Halfspaces(c) => ConeRegion::Halfspaces(
                c.iter()
                    .map(|c| ConeConstraint {
                        normal: theta.apply(&c.normal),
                        strict: c.strict,
                    })
                    .collect(),
            ),
        }
    }
}

/// One product piece `position x normal`.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchPiece {
    pub position: PositionRegion,
    pub normal: ConeRegion,
}

/// Finite union of pairwise disjoint product pieces. Disjointness is the
/// caller's responsibility; [`SupportPatch::check_disjoint_samples`] offers
/// a sampled sanity check.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportPatch {
    pub pieces: Vec<PatchPiece>,
}

impl SupportPatch {
    pub fn all() -> Self {
        Self::single(PositionRegion::All, ConeRegion::All)
    }

    pub fn empty() -> Self {
        Self { pieces: Vec::new() }
    }

    pub fn single(position: PositionRegion, normal: ConeRegion) -> Self {
        Self {
            pieces: vec![PatchPiece { position, normal }],
        }
    }

    pub fn with_pieces(pieces: Vec<PatchPiece>) -> Self {
        Self { pieces }
    }

    /// Disjoint union (not checked).
    pub fn union(&self, other: &SupportPatch) -> SupportPatch {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        SupportPatch { pieces }
    }

    /// Restricts every piece by an extra position constraint.
    pub fn restrict_position(&self, h: &Halfspace) -> Result<SupportPatch> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut c = p.position.constraints()?;
                c.push(h.clone());
                Ok(PatchPiece {
                    position: PositionRegion::Halfspaces(c),
                    normal: p.normal.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SupportPatch { pieces })
    }

    /// Restricts every piece by an extra normal constraint.
    pub fn restrict_normal(&self, c: &ConeConstraint) -> SupportPatch {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut cs = p.normal.constraints().to_vec();
                cs.push(c.clone());
                PatchPiece {
                    position: p.position.clone(),
                    normal: ConeRegion::Halfspaces(cs),
                }
            })
            .collect();
        SupportPatch { pieces }
    }

    pub fn contains(&self, x: &[f64], u: &[f64]) -> Result<bool> {
        for p in &self.pieces {
            if p.normal.contains(u) && p.position.contains(x, 1e-12)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Image under `(x, u) -> (theta x + t, theta u)`.
    pub fn affine_image(&self, theta: &Rotation, t: &[f64]) -> Result<SupportPatch> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                Ok(PatchPiece {
                    position: p.position.transformed(theta, t)?,
                    normal: p.normal.transformed(theta),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SupportPatch { pieces })
    }

    pub fn translate(&self, t: &[f64]) -> Result<SupportPatch> {
        self.affine_image(&Rotation::identity(t.len()), t)
    }

    pub fn transform(&self, theta: &Rotation) -> Result<SupportPatch> {
        self.affine_image(theta, &vec![0.0; theta.dim()])
    }

    /// Verifies that all explicit dimensions agree with `n`.
    pub fn check_dim(&self, n: usize) -> Result<()> {
        for p in &self.pieces {
            if let Some(d) = p.position.dim() {
                if d != n {
                    return Err(MtlError::DimensionMismatch { expected: n, found: d });
                }
            }
            if let Some(c) = p.normal.constraints().iter().find(|c| c.normal.len() != n) {
                return Err(MtlError::DimensionMismatch {
                    expected: n,
                    found: c.normal.len(),
                });
            }
        }
        Ok(())
    }

    /// Reports whether any of the sample pairs lies in two pieces.
    pub fn check_disjoint_samples(&self, samples: &[(Vec<f64>, Vec<f64>)]) -> Result<bool> {
        for (x, u) in samples {
            let mut hits = 0;
            for p in &self.pieces {
                if p.normal.contains(u) && p.position.contains(x, 1e-12)? {
                    hits += 1;
                }
            }
            if hits > 1 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Restricts a face polytope to a position region. `None` means empty.
pub(crate) fn clip_to_position(face: &Polytope, pos: &PositionRegion) -> Result<Option<Polytope>> {
    match pos {
        PositionRegion::All => Ok(Some(face.clone())),
        _ => face.clip_all(&pos.constraints()?),
    }
}

/// Normal region of a face restricted to a cone region.
pub(crate) fn restrict_cone(region: &SphericalRegion, cone: &ConeRegion) -> SphericalRegion {
    match cone {
        ConeRegion::All => region.clone(),
        ConeRegion::Halfspaces(c) => region.intersect_with_cone(c),
    }
}
