//! Vertex-presented convex polytopes in R^n (n <= 4) with their face
//! lattice, direction spaces and normal cones.
//!
//! The hull is found by brute-force supporting-hyperplane enumeration in the
//! coordinates of the affine hull, so lower-dimensional polytopes (points,
//! segments, polygons in R^3, ...) are handled by the same code path.

use std::collections::BTreeSet;

use crate::error::{MtlError, Result};
use crate::linalg::{self, dot, norm, sub};
use crate::spherical::{ConeConstraint, SphericalRegion};
use crate::tensor::{Rotation, Subspace};

/// Relative tolerance of the supporting-hyperplane predicates.
pub const HULL_TOL: f64 = 1e-9;
/// Classification residuals in `(eps, AMBIGUITY_FACTOR * eps]` are rejected.
const AMBIGUITY_FACTOR: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    /// `<a, x> >= b`
    Ge,
    /// `<a, x> > b`
    Gt,
    /// `<a, x> = b`
    Eq,
}

/// Affine constraint `<normal, x> (relation) offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub relation: Relation,
}

impl Halfspace {
    pub fn ge(normal: Vec<f64>, offset: f64) -> Self {
        Self {
            normal,
            offset,
            relation: Relation::Ge,
        }
    }

    pub fn gt(normal: Vec<f64>, offset: f64) -> Self {
        Self {
            normal,
            offset,
            relation: Relation::Gt,
        }
    }

    pub fn eq(normal: Vec<f64>, offset: f64) -> Self {
        Self {
            normal,
            offset,
            relation: Relation::Eq,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    pub fn contains(&self, x: &[f64], eps: f64) -> bool {
        let f = self.value(x);
        match self.relation {
            Relation::Ge => f >= -eps,
            Relation::Gt => f > eps,
            Relation::Eq => f.abs() <= eps,
        }
    }

    /// Image under `x -> theta x + t`.
    pub fn transformed(&self, theta: &Rotation, t: &[f64]) -> Halfspace {
        let normal = theta.apply(&self.normal);
        Halfspace {
            offset: self.offset + dot(&normal, t),
            normal,
            relation: self.relation,
        }
    }
}

/// Index of a face inside [`Polytope::faces`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceId {
    pub dim: usize,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub dim: usize,
    /// Sorted indices into [`Polytope::vertices`].
    pub vertex_indices: Vec<usize>,
    pub direction_space: Subspace,
    /// Outer unit normals (within the direction space of P) of the facets
    /// of P containing this face.
    pub normal_generators: Vec<Vec<f64>>,
}

/// `<normal, x> <= offset`, with `normal` a unit vector in L(P).
#[derive(Clone, Debug, PartialEq)]
struct FacetInequality {
    normal: Vec<f64>,
    offset: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    ambient_dim: usize,
    vertices: Vec<Vec<f64>>,
    intrinsic_dim: usize,
    hull_space: Subspace,
    faces: Vec<Vec<Face>>,
    facets: Vec<FacetInequality>,
    eps: f64,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}


impl Polytope {
    /// Convex hull of a finite point set.
    pub fn new(points: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(MtlError::EmptyInput("polytope needs at least one point"));
        };
        let n = first.len();
        if n == 0 {
            return Err(MtlError::InvalidArgument("ambient dimension must be positive".into()));
        }
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(MtlError::DimensionMismatch {
                expected: n,
                found: p.len(),
            });
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(MtlError::InvalidArgument("non-finite coordinate".into()));
        }
        let scale = points
            .iter()
            .flatten()
            .fold(1.0f64, |m, c| m.max(c.abs()));
        let eps = HULL_TOL * scale;

        // dedupe, keeping a canonical (lexicographic) order
        let mut pts: Vec<Vec<f64>> = points.to_vec();
        pts.sort_by(|a, b| lex_cmp(a, b));
        let mut uniq: Vec<Vec<f64>> = Vec::new();
        for p in pts {
            if !uniq.iter().any(|q| linalg::max_abs_diff(q, &p) <= eps) {
                uniq.push(p);
            }
        }
        let pts = uniq;

        let origin = pts[0].clone();
        let diffs: Vec<Vec<f64>> = pts.iter().map(|p| sub(p, &origin)).collect();
        let hull_space = Subspace::span(n, &diffs, eps)?;
        let d = hull_space.dim();
        let local: Vec<Vec<f64>> = diffs.iter().map(|v| hull_space.coordinates(v)).collect();

        // facets: (point set, outer unit normal in local coordinates)
        let mut facet_sets: Vec<(Vec<usize>, Vec<f64>, f64)> = Vec::new();
        match d {
            0 => {}
            1 => {
                let (imin, imax) = (0..local.len()).fold((0, 0), |(lo, hi), i| {
                    (
                        if local[i][0] < local[lo][0] { i } else { lo },
                        if local[i][0] > local[hi][0] { i } else { hi },
                    )
                });
                facet_sets.push((vec![imin], vec![-1.0], 0.0));
                facet_sets.push((vec![imax], vec![1.0], 0.0));
            }
            _ => {
                // Best-conditioned subsets first, so each facet plane comes from
                // its widest spanning points; subsets inside a known facet are
                // skipped. Small facets left by clipping near a vertex survive.
                let mut candidates: Vec<(f64, Vec<usize>, Vec<f64>)> = Vec::new();
                for subset in linalg::combinations(local.len(), d) {
                    let base = &local[subset[0]];
                    let rows: Vec<Vec<f64>> =
                        subset[1..].iter().map(|&i| sub(&local[i], base)).collect();
                    let a = linalg::null_vector(&rows, d);
                    let la = norm(&a);
                    let spread: f64 = rows.iter().map(|r| norm(r)).product();
                    if la <= 1e-9 * spread || la == 0.0 {
                        continue;
                    }
                    candidates.push((la, subset, linalg::scale(&a, 1.0 / la)));
                }
                candidates.sort_by(|x, y| y.0.total_cmp(&x.0));
                for (_, subset, a) in candidates {
                    if facet_sets
                        .iter()
                        .any(|(on, _, _)| subset.iter().all(|i| on.binary_search(i).is_ok()))
                    {
                        continue;
                    }
                    let base = &local[subset[0]];
                    let b = dot(&a, base);
                    let deltas: Vec<f64> = local.iter().map(|z| dot(&a, z) - b).collect();
                    let hi = deltas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let lo = deltas.iter().cloned().fold(f64::INFINITY, f64::min);
                    let outer = if hi <= eps {
                        a
                    } else if lo >= -eps {
                        linalg::scale(&a, -1.0)
                    } else {
                        if hi <= AMBIGUITY_FACTOR * eps || lo >= -AMBIGUITY_FACTOR * eps {
                            return Err(MtlError::Degenerate(format!(
                                "points within {:.1e} of a supporting hyperplane",
                                hi.min(-lo)
                            )));
                        }
                        continue;
                    };
                    let on: Vec<usize> = (0..local.len())
                        .filter(|&i| deltas[i].abs() <= eps)
                        .collect();
                    let off = dot(&outer, &local[on[0]]);
                    facet_sets.push((on, outer, off));
                }
                if facet_sets.len() < d + 1 {
                    return Err(MtlError::Degenerate("could not resolve hull facets".into()));
                }
            }
        }

        // face lattice as the intersection closure of the facets
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut queue: Vec<Vec<usize>> = Vec::new();
        for (s, _, _) in &facet_sets {
            if all.insert(s.clone()) {
                queue.push(s.clone());
            }
        }
        while let Some(s) = queue.pop() {
            for (f, _, _) in &facet_sets {
                let inter: Vec<usize> = s.iter().filter(|i| f.binary_search(i).is_ok()).cloned().collect();
                if !inter.is_empty() && all.insert(inter.clone()) {
                    queue.push(inter);
                }
            }
        }
        all.insert((0..pts.len()).collect());

        // vertices are the singleton faces; pts is already lexicographic
        let vertex_points: Vec<usize> = if d == 0 {
            vec![0]
        } else {
            all.iter().filter(|s| s.len() == 1).map(|s| s[0]).collect::<BTreeSet<_>>().into_iter().collect()
        };
        let relabel = |s: &[usize]| -> Vec<usize> {
            s.iter().filter_map(|i| vertex_points.binary_search(i).ok()).collect()
        };
        let vertices: Vec<Vec<f64>> = vertex_points.iter().map(|&i| pts[i].clone()).collect();

        let facets: Vec<(Vec<usize>, FacetInequality)> = facet_sets
            .iter()
            .map(|(s, a, off)| {
                let normal = hull_space.embed(a);
                let offset = off + dot(&normal, &origin);
                (relabel(s), FacetInequality { normal, offset })
            })
            .collect();

        let mut faces: Vec<Vec<Face>> = vec![Vec::new(); d + 1];
        let face_sets: BTreeSet<Vec<usize>> = all.iter().map(|s| relabel(s)).collect();
        for vs in face_sets {
            if vs.is_empty() {
                continue;
            }
            let fp: Vec<&Vec<f64>> = vs.iter().map(|&i| &vertices[i]).collect();
            let diffs: Vec<Vec<f64>> = fp.iter().map(|p| sub(p, fp[0])).collect();
            let direction_space = Subspace::span(n, &diffs, eps)?;
            let dim = direction_space.dim();
            let normal_generators = facets
                .iter()
                .filter(|(s, _)| dim < d && vs.iter().all(|i| s.binary_search(i).is_ok()))
                .map(|(_, f)| f.normal.clone())
                .collect();
            faces[dim].push(Face {
                dim,
                vertex_indices: vs,
                direction_space,
                normal_generators,
            });
        }
        for level in faces.iter_mut() {
            level.sort_by(|a, b| a.vertex_indices.cmp(&b.vertex_indices));
        }
        if faces[d].len() != 1 {
            return Err(MtlError::Degenerate("face lattice has no unique top face".into()));
        }
        Ok(Self {
            ambient_dim: n,
            vertices,
            intrinsic_dim: d,
            hull_space,
            faces,
            facets: facets.into_iter().map(|(_, f)| f).collect(),
            eps,
        })
    }

    /// Axis-parallel box `[min, max]`.
    pub fn axis_box(min: &[f64], max: &[f64]) -> Result<Self> {
        if min.len() != max.len() {
            return Err(MtlError::DimensionMismatch {
                expected: min.len(),
                found: max.len(),
            });
        }
        let n = min.len();
        let pts: Vec<Vec<f64>> = (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask & (1 << i) != 0 { max[i] } else { min[i] })
                    .collect()
            })
            .collect();
        Self::new(&pts)
    }

    pub fn unit_cube(n: usize) -> Self {
        Self::axis_box(&vec![0.0; n], &vec![1.0; n]).expect("unit cube is well formed")
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Direction space of the affine hull.
    pub fn hull_space(&self) -> &Subspace {
        &self.hull_space
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn faces(&self) -> &[Vec<Face>] {
        &self.faces
    }

    /// Faces of dimension `k` (empty if `k > intrinsic_dim`).
    pub fn faces_of_dim(&self, k: usize) -> &[Face] {
        self.faces.get(k).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn face(&self, id: FaceId) -> Result<&Face> {
        self.faces
            .get(id.dim)
            .and_then(|l| l.get(id.index))
            .ok_or(MtlError::NotAFace)
    }

    pub fn face_counts(&self) -> Vec<usize> {
        self.faces.iter().map(|l| l.len()).collect()
    }

    pub fn top_face(&self) -> &Face {
        &self.faces[self.intrinsic_dim][0]
    }

    pub fn face_points(&self, face: &Face) -> Vec<Vec<f64>> {
        face.vertex_indices.iter().map(|&i| self.vertices[i].clone()).collect()
    }

    /// Locates the face whose vertex set matches `points` (tolerance `eps`).
    pub fn find_face(&self, points: &[Vec<f64>]) -> Option<FaceId> {
        let mut idx: Vec<usize> = Vec::with_capacity(points.len());
        for p in points {
            let i = self
                .vertices
                .iter()
                .position(|v| linalg::max_abs_diff(v, p) <= 1e3 * self.eps)?;
            idx.push(i);
        }
        idx.sort_unstable();
        idx.dedup();
        let dim = self.faces.iter().position(|l| l.iter().any(|f| f.vertex_indices == idx))?;
        let index = self.faces[dim].iter().position(|f| f.vertex_indices == idx)?;
        Some(FaceId { dim, index })
    }

    fn owns(&self, face: &Face) -> bool {
        self.faces
            .get(face.dim)
            .is_some_and(|l| l.iter().any(|f| f.vertex_indices == face.vertex_indices))
    }

    /// Normal cone `nu(P, F)` as a spherical region in `S_{L(F)^perp}`.
    pub fn normal_cone(&self, face: &Face) -> Result<SphericalRegion> {
        if !self.owns(face) {
            return Err(MtlError::NotAFace);
        }
        let carrier = face.direction_space.orthogonal_complement();
        let x_f = &self.vertices[face.vertex_indices[0]];
        let constraints = (0..self.vertices.len())
            .filter(|i| face.vertex_indices.binary_search(i).is_err())
            .map(|i| {
                let a = carrier.project(&sub(x_f, &self.vertices[i]));
                ConeConstraint::closed(a)
            })
            .collect();
        Ok(SphericalRegion::new(carrier, constraints))
    }

    /// Closed H-representation: one `Ge` constraint per facet plus `Eq`
    /// constraints cutting out the affine hull when P is not full-dimensional.
    pub fn halfspaces(&self) -> Vec<Halfspace> {
        let x0 = &self.vertices[0];
        let mut out: Vec<Halfspace> = self
            .hull_space
            .orthogonal_complement()
            .basis()
            .iter()
            .map(|c| Halfspace::eq(c.clone(), dot(c, x0)))
            .collect();
        out.extend(
            self.facets
                .iter()
                .map(|f| Halfspace::ge(linalg::scale(&f.normal, -1.0), -f.offset)),
        );
        out
    }

    /// The face as a polytope of its own.
    pub fn face_polytope(&self, face: &Face) -> Result<Polytope> {
        Polytope::new(&self.face_points(face))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let rel = sub(x, &self.vertices[0]);
        if !self.hull_space.contains(&rel, tol) {
            return false;
        }
        self.facets.iter().all(|f| dot(&f.normal, x) <= f.offset + tol)
    }

    /// Whether `(x, u)` lies in the normal bundle of P (tolerance 1e-9).
    pub fn normal_bundle_contains(&self, x: &[f64], u: &[f64]) -> bool {
        const TOL: f64 = 1e-9;
        if x.len() != self.ambient_dim || u.len() != self.ambient_dim {
            return false;
        }
        if (norm(u) - 1.0).abs() > TOL || !self.contains(x, TOL * self.eps / HULL_TOL) {
            return false;
        }
        self.vertices.iter().all(|w| dot(u, &sub(w, x)) <= TOL)
    }

    pub fn translate(&self, t: &[f64]) -> Result<Polytope> {
        Polytope::new(&self.vertices.iter().map(|v| linalg::add(v, t)).collect::<Vec<_>>())
    }

    pub fn transform(&self, theta: &Rotation) -> Result<Polytope> {
        Polytope::new(&self.vertices.iter().map(|v| theta.apply(v)).collect::<Vec<_>>())
    }

    /// `x -> theta x + t`
    pub fn affine_image(&self, theta: &Rotation, t: &[f64]) -> Result<Polytope> {
        Polytope::new(
            &self
                .vertices
                .iter()
                .map(|v| linalg::add(&theta.apply(v), t))
                .collect::<Vec<_>>(),
        )
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.ambient_dim;
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for v in &self.vertices {
            for i in 0..n {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    pub fn vertex_centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.ambient_dim];
        for v in &self.vertices {
            c = linalg::add(&c, v);
        }
        linalg::scale(&c, 1.0 / self.vertices.len() as f64)
    }

    /// Intersection with one constraint, or `None` when the result is empty.
    /// Points on the boundary count as inside for `Ge`/`Eq` and outside for
    /// `Gt`; a strict cut that only touches P returns `None`.
    pub fn clip(&self, h: &Halfspace) -> Result<Option<Polytope>> {
        if h.normal.len() != self.ambient_dim {
            return Err(MtlError::DimensionMismatch {
                expected: self.ambient_dim,
                found: h.normal.len(),
            });
        }
        let eps = self.eps.max(HULL_TOL * h.offset.abs());
        let f: Vec<f64> = self.vertices.iter().map(|v| h.value(v)).collect();
        let above = f.iter().filter(|&&v| v > eps).count();
        let below = f.iter().filter(|&&v| v < -eps).count();
        let total = f.len();
        match h.relation {
            Relation::Ge if below == 0 => return Ok(Some(self.clone())),
            Relation::Gt if above == total => return Ok(Some(self.clone())),
            Relation::Eq if above == 0 && below == 0 => return Ok(Some(self.clone())),
            Relation::Ge if below == total => return Ok(None),
            Relation::Gt if above == 0 => return Ok(None),
            Relation::Eq if above == total || below == total => return Ok(None),
            _ => {}
        }
        let mut pts: Vec<Vec<f64>> = Vec::new();
        for (v, &fv) in self.vertices.iter().zip(&f) {
            let keep = match h.relation {
                Relation::Ge | Relation::Gt => fv >= -eps,
                Relation::Eq => fv.abs() <= eps,
            };
            if keep {
                pts.push(v.clone());
            }
        }
        for e in self.faces_of_dim(1) {
            let (i, j) = (e.vertex_indices[0], e.vertex_indices[1]);
            let (fi, fj) = (f[i], f[j]);
            if (fi > eps && fj < -eps) || (fi < -eps && fj > eps) {
                let t = fi / (fi - fj);
                let p = linalg::add(
                    &self.vertices[i],
                    &linalg::scale(&sub(&self.vertices[j], &self.vertices[i]), t),
                );
                pts.push(p);
            }
        }
        if pts.is_empty() {
            return Ok(None);
        }
        Polytope::new(&pts).map(Some)
    }

    /// Intersection with several constraints.
    pub fn clip_all(&self, hs: &[Halfspace]) -> Result<Option<Polytope>> {
        let mut cur = self.clone();
        for h in hs {
            match cur.clip(h)? {
                Some(p) => cur = p,
                None => return Ok(None),
            }
        }
        Ok(Some(cur))
    }

    /// Pulling triangulation of a face into simplices (lists of vertex
    /// indices, each with `face.dim + 1` entries).
    pub fn triangulate_face(&self, face: &Face) -> Vec<Vec<usize>> {
        if face.dim == 0 {
            return vec![vec![face.vertex_indices[0]]];
        }
        let apex = face.vertex_indices[0];
        let mut out = Vec::new();
        for sub_face in self.faces_of_dim(face.dim - 1) {
            let inside = sub_face
                .vertex_indices
                .iter()
                .all(|i| face.vertex_indices.binary_search(i).is_ok());
            if !inside || sub_face.vertex_indices.binary_search(&apex).is_ok() {
                continue;
            }
            for mut s in self.triangulate_face(sub_face) {
                s.insert(0, apex);
                out.push(s);
            }
        }
        out
    }

    pub fn triangulate(&self) -> Vec<Vec<usize>> {
        self.triangulate_face(self.top_face())
    }

    /// k-dimensional volume of the polytope (k = intrinsic dimension).
    pub fn volume(&self) -> f64 {
        self.triangulate()
            .iter()
            .map(|s| {
                let pts: Vec<&Vec<f64>> = s.iter().map(|&i| &self.vertices[i]).collect();
                simplex_volume(&pts)
            })
            .sum()
    }
}

/// k-volume of the simplex spanned by `k + 1` points in R^n.
pub fn simplex_volume(pts: &[&Vec<f64>]) -> f64 {
    let k = pts.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let e: Vec<Vec<f64>> = pts[1..].iter().map(|p| sub(p, pts[0])).collect();
    let gram: Vec<Vec<f64>> = e.iter().map(|a| e.iter().map(|b| dot(a, b)).collect()).collect();
    linalg::det(&gram).max(0.0).sqrt() / linalg::factorial(k)
}

/// `v_F` for an edge: the unit direction whose first nonzero coordinate is
/// positive.
pub fn edge_unit_vector(p: &Polytope, edge: &Face) -> Result<Vec<f64>> {
    if edge.dim != 1 {
        return Err(MtlError::InvalidArgument(format!(
            "edge_unit_vector needs a 1-face, got dimension {}",
            edge.dim
        )));
    }
    let a = &p.vertices()[edge.vertex_indices[0]];
    let b = &p.vertices()[edge.vertex_indices[1]];
    let v = linalg::normalize(&sub(b, a)).ok_or(MtlError::Degenerate("zero-length edge".into()))?;
    Ok(canonical_sign(v))
}

/// Flips `v` so that its first coordinate above 1e-12 in magnitude is positive.
pub fn canonical_sign(v: Vec<f64>) -> Vec<f64> {
    match v.iter().find(|c| c.abs() > 1e-12) {
        Some(&c) if c < 0.0 => linalg::scale(&v, -1.0),
        _ => v,
    }
}

/// `u-bar` in R^2 (so that `det[u, u-bar] = 1`), or `v x u` in R^3.
pub fn oriented_complement(u: &[f64], v: Option<&[f64]>) -> Result<Vec<f64>> {
    const TOL: f64 = 1e-10;
    if (norm(u) - 1.0).abs() > TOL {
        return Err(MtlError::InvalidArgument("u is not a unit vector".into()));
    }
    match (u.len(), v) {
        (2, None) => Ok(vec![-u[1], u[0]]),
        (3, Some(v)) => {
            if v.len() != 3 {
                return Err(MtlError::DimensionMismatch {
                    expected: 3,
                    found: v.len(),
                });
            }
            if (norm(v) - 1.0).abs() > TOL || dot(u, v).abs() > TOL {
                return Err(MtlError::InvalidArgument("u, v are not orthonormal".into()));
            }
            Ok(linalg::cross(v, u).to_vec())
        }
        (2, Some(_)) | (3, None) => Err(MtlError::InvalidArgument(
            "n = 2 takes one vector, n = 3 takes two".into(),
        )),
        (n, _) => Err(MtlError::InvalidArgument(format!(
            "oriented complement is only defined for n = 2, 3 (got {n})"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_and_cube_face_counts() {
        assert_eq!(Polytope::unit_cube(2).face_counts(), vec![4, 4, 1]);
        assert_eq!(Polytope::unit_cube(3).face_counts(), vec![8, 12, 6, 1]);
        assert_eq!(Polytope::unit_cube(4).face_counts(), vec![16, 32, 24, 8, 1]);
    }

    #[test]
    fn clipping_just_past_a_corner_keeps_the_small_facet() {
        let b = Polytope::axis_box(&[-0.04335, 0.42692, -0.68992], &[0.59384, 2.01610, 1.06513]).unwrap();
        let a = vec![-0.5174852730835782, 0.6368046185908108, 0.5715670300874838];
        let c = dot(&a, &[-0.04335, 0.42692, 1.06513]) - 8e-4;
        let p1 = b.clip(&Halfspace::ge(a.clone(), c)).unwrap().unwrap();
        let p2 = b.clip(&Halfspace::ge(linalg::scale(&a, -1.0), -c)).unwrap().unwrap();
        assert_eq!(p1.vertices().len(), 10);
        assert!((p1.volume() + p2.volume() - b.volume()).abs() < 1e-12);
    }

    #[test]
    fn segment_in_plane() {
        let p = Polytope::new(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(p.intrinsic_dim(), 1);
        assert_eq!(p.face_counts(), vec![2, 1]);
    }

    #[test]
    fn interior_and_duplicate_points_are_dropped() {
        let p = Polytope::new(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 0.0],
            vec![0.0, 1.0],
            vec![0.2, 0.2],
            vec![1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(p.vertices().len(), 3);
        assert_eq!(p.face_counts(), vec![3, 3, 1]);
    }

    #[test]
    fn ambiguous_configuration_is_reported() {
        let r = Polytope::new(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 1e-8],
            vec![0.0, 1.0],
        ]);
        assert!(matches!(r, Err(MtlError::Degenerate(_))), "{r:?}");
    }

    #[test]
    fn euler_relation() {
        let polys = [
            Polytope::unit_cube(3),
            Polytope::new(&[vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap(),
            Polytope::new(&[
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ])
            .unwrap(),
        ];
        for p in &polys {
            let d = p.intrinsic_dim() as i32;
            let chi: i32 = (0..d as usize)
                .map(|k| (-1i32).pow(k as u32) * p.faces_of_dim(k).len() as i32)
                .sum();
            assert_eq!(chi, 1 - (-1i32).pow(d as u32));
        }
    }

    #[test]
    fn direction_spaces() {
        let c = Polytope::unit_cube(3);
        let e = c.find_face(&[vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
        let l = &c.face(e).unwrap().direction_space;
        assert_eq!(l.dim(), 1);
        assert!(l.contains(&[1.0, 0.0, 0.0], 1e-12));
        let v = c.find_face(&[vec![0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(c.face(v).unwrap().direction_space.dim(), 0);
        let sq = Polytope::new(&[
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0],
        ])
        .unwrap();
        let l = &sq.top_face().direction_space;
        assert_eq!(l.dim(), 2);
        assert!(l.contains(&[1.0, 0.0, 0.0], 1e-12) && l.contains(&[0.0, 1.0, 0.0], 1e-12));
    }

    #[test]
    fn facet_has_one_generator_orthogonal_to_face() {
        let c = Polytope::unit_cube(3);
        for f in c.faces_of_dim(2) {
            assert_eq!(f.normal_generators.len(), 1);
        }
        for k in 0..3 {
            for f in c.faces_of_dim(k) {
                for g in &f.normal_generators {
                    for b in f.direction_space.basis() {
                        assert!(dot(g, b).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn permutation_invariance() {
        let pts = vec![
            vec![0.0, 0.0, 0.0],
            vec![2.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.3, 0.2, 1.5],
            vec![1.0, 1.0, 1.0],
        ];
        let a = Polytope::new(&pts).unwrap();
        let mut rev = pts.clone();
        rev.reverse();
        rev.swap(0, 2);
        let b = Polytope::new(&rev).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_vectors_follow_sign_rule() {
        let p = Polytope::new(&[vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(edge_unit_vector(&p, p.top_face()).unwrap(), vec![0.0, 0.0, 1.0]);
        let p = Polytope::new(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let v = edge_unit_vector(&p, p.top_face()).unwrap();
        let s = 0.5f64.sqrt();
        assert!(linalg::max_abs_diff(&v, &[s, -s, 0.0]) < 1e-15);
    }

    #[test]
    fn oriented_complements() {
        assert_eq!(oriented_complement(&[1.0, 0.0], None).unwrap(), vec![0.0, 1.0]);
        assert_eq!(oriented_complement(&[0.0, 1.0], None).unwrap(), vec![-1.0, 0.0]);
        assert_eq!(
            oriented_complement(&[1.0, 0.0, 0.0], Some(&[0.0, 0.0, 1.0])).unwrap(),
            vec![0.0, 1.0, 0.0]
        );
        let th: f64 = 0.77;
        let u = [th.cos(), th.sin(), 0.0];
        let w = oriented_complement(&u, Some(&[0.0, 0.0, 1.0])).unwrap();
        assert!(linalg::max_abs_diff(&w, &[-th.sin(), th.cos(), 0.0]) < 1e-15);
        assert!(oriented_complement(&[1.0, 0.0, 0.0, 0.0], None).is_err());
        assert!(oriented_complement(&[1.0, 0.0, 0.0], Some(&[1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn normal_bundle_membership() {
        let c = Polytope::unit_cube(3);
        assert!(c.normal_bundle_contains(&[1.0, 0.5, 0.5], &[1.0, 0.0, 0.0]));
        assert!(!c.normal_bundle_contains(&[0.5, 0.5, 0.5], &[1.0, 0.0, 0.0]));
        let s = 0.5f64.sqrt();
        assert!(c.normal_bundle_contains(&[1.0, 1.0, 0.5], &[s, s, 0.0]));
        assert!(!c.normal_bundle_contains(&[1.0, 0.5, 0.5], &[s, s, 0.0]));
    }

    #[test]
    fn clipping_and_volume() {
        let c = Polytope::unit_cube(3);
        let half = c.clip(&Halfspace::ge(vec![1.0, 0.0, 0.0], 0.5)).unwrap().unwrap();
        assert!((half.volume() - 0.5).abs() < 1e-14);
        let corner = c.clip(&Halfspace::ge(vec![-1.0, -1.0, -1.0], -1.0)).unwrap().unwrap();
        assert!((corner.volume() - 1.0 / 6.0).abs() < 1e-14);
        // a strict cut that only touches the cube is empty, a closed one is a face
        assert!(c.clip(&Halfspace::gt(vec![1.0, 0.0, 0.0], 1.0)).unwrap().is_none());
        let face = c.clip(&Halfspace::ge(vec![1.0, 0.0, 0.0], 1.0)).unwrap().unwrap();
        assert_eq!(face.intrinsic_dim(), 2);
        let plane = c.clip(&Halfspace::eq(vec![0.0, 0.0, 1.0], 0.25)).unwrap().unwrap();
        assert_eq!(plane.intrinsic_dim(), 2);
        assert!((plane.volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn triangulation_covers_volume() {
        // triangular prism: base area 1/2, height 2
        let mut pts = Vec::new();
        for z in [0.0, 2.0] {
            pts.extend([vec![0.0, 0.0, z], vec![1.0, 0.0, z], vec![0.0, 1.0, z]]);
        }
        let p = Polytope::new(&pts).unwrap();
        assert_eq!(p.face_counts(), vec![6, 9, 5, 1]);
        assert!((p.volume() - 1.0).abs() < 1e-13, "{}", p.volume());
        for s in p.triangulate() {
            assert_eq!(s.len(), 4);
        }
    }
}
