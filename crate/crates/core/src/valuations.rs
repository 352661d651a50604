//! Local tensor valuations on polytopes: the generalized local Minkowski
//! tensors `phi_k^{r,s,j}`, the rotation-only covariant families in R^3 and
//! R^2, and the basis built from them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{MtlError, Result};
use crate::linalg;
use crate::patch::{clip_to_position, restrict_cone, SupportPatch};
use crate::polytope::{edge_unit_vector, Face, Polytope};
use crate::spherical::{omega, polytope_moment, spherical_moment, Weight};
use crate::tensor::SymTensor;

/// `C_{n,k}^{r,s} = 1 / (r! s! omega_{n-k+s})`
pub fn normalizing_constant(n: usize, k: usize, r: usize, s: usize) -> f64 {
    1.0 / (linalg::factorial(r) * linalg::factorial(s) * omega(n - k + s))
}

/// `sum over pieces of eta: int_{F cap pos} x^r  (x)  int_{nu(P,F) cap cone} w(u) u^s`
fn face_integral(
    p: &Polytope,
    face: &Face,
    eta: &SupportPatch,
    r: usize,
    s: usize,
    weight: &Weight,
) -> Result<SymTensor> {
    let n = p.ambient_dim();
    let extra = usize::from(*weight != Weight::None);
    let mut acc = SymTensor::zero(n, r + s + extra);
    if eta.pieces.is_empty() {
        return Ok(acc);
    }
    let cone = p.normal_cone(face)?;
    let face_poly = p.face_polytope(face)?;
    for piece in &eta.pieces {
        // the position clip is cheap next to the spherical cubature
        let Some(a) = clip_to_position(&face_poly, &piece.position)? else {
            continue;
        };
        if a.intrinsic_dim() < face.dim {
            continue;
        }
        let b = restrict_cone(&cone, &piece.normal);
        let sm = spherical_moment(&b, s, weight)?;
        if sm.is_zero() {
            continue;
        }
        let pm = polytope_moment(&a, r);
        acc += &pm.sym_product(&sm)?;
    }
    Ok(acc)
}

/// The generalized local Minkowski tensor `phi_k^{r,s,j}(P, eta)`.
pub fn phi(p: &Polytope, eta: &SupportPatch, k: usize, r: usize, s: usize, j: usize) -> Result<SymTensor> {
    let n = p.ambient_dim();
    eta.check_dim(n)?;
    if k >= n {
        return Err(MtlError::InvalidIndices(format!("k = {k} must be below n = {n}")));
    }
    if k == 0 && j > 0 {
        return Err(MtlError::InvalidIndices("j must be 0 when k = 0".into()));
    }
    let mut acc = SymTensor::zero(n, 2 * j + r + s);
    for face in p.faces_of_dim(k) {
        let inner = face_integral(p, face, eta, r, s, &Weight::None)?;
        if inner.is_zero() {
            continue;
        }
        let qj = SymTensor::metric_on_subspace(&face.direction_space).power(j);
        acc += &qj.sym_product(&inner)?;
    }
    Ok(acc.scaled(normalizing_constant(n, k, r, s)))
}

/// `phi_tilde^{r,s,j}` on polytopes in R^3.
pub fn phi_tilde_3d(p: &Polytope, eta: &SupportPatch, r: usize, s: usize, j: usize) -> Result<SymTensor> {
    phi_tilde_3d_signed(p, eta, r, s, j, false)
}

/// As [`phi_tilde_3d`], optionally with every edge direction `v_F` negated.
/// The value does not depend on this choice; the flag exists for testing.
pub fn phi_tilde_3d_signed(
    p: &Polytope,
    eta: &SupportPatch,
    r: usize,
    s: usize,
    j: usize,
    flip_edges: bool,
) -> Result<SymTensor> {
    let n = p.ambient_dim();
    if n != 3 {
        return Err(MtlError::InvalidArgument(format!(
            "phi_tilde_3d needs n = 3, got {n}"
        )));
    }
    eta.check_dim(n)?;
    let mut acc = SymTensor::zero(3, 2 * j + r + s + 2);
    for face in p.faces_of_dim(1) {
        let mut v = edge_unit_vector(p, face)?;
        if flip_edges {
            v = linalg::scale(&v, -1.0);
        }
        let inner = face_integral(p, face, eta, r, s, &Weight::CrossWith(v.clone()))?;
        if inner.is_zero() {
            continue;
        }
        acc += &SymTensor::vector_power(&v, 2 * j + 1).sym_product(&inner)?;
    }
    Ok(acc)
}

/// `phi_tilde_k^{r,s}` on polytopes in R^2, k in {0, 1}.
pub fn phi_tilde_2d(p: &Polytope, eta: &SupportPatch, k: usize, r: usize, s: usize) -> Result<SymTensor> {
    let n = p.ambient_dim();
    if n != 2 {
        return Err(MtlError::InvalidArgument(format!(
            "phi_tilde_2d needs n = 2, got {n}"
        )));
    }
    if k > 1 {
        return Err(MtlError::InvalidIndices(format!("k = {k} must be 0 or 1")));
    }
    eta.check_dim(n)?;
    let mut acc = SymTensor::zero(2, r + s + 1);
    for face in p.faces_of_dim(k) {
        acc += &face_integral(p, face, eta, r, s, &Weight::PerpComplement)?;
    }
    Ok(acc)
}

/// Global Minkowski tensor `Phi_k^{r,s}(P) = phi_k^{r,s}(P, Sigma^n)`.
pub fn minkowski_tensor(p: &Polytope, k: usize, r: usize, s: usize) -> Result<SymTensor> {
    phi(p, &SupportPatch::all(), k, r, s, 0)
}

/// `Q^m T`
pub fn q_power_multiply(m: usize, t: &SymTensor) -> SymTensor {
    if m == 0 {
        return t.clone();
    }
    SymTensor::metric_power(t.dim(), m)
        .sym_product(t)
        .expect("dimensions agree by construction")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Phi,
    Tilde3,
    Tilde2,
}

/// Names one basis valuation `Q^m phi_k^{r,s,j}`, `Q^m phi_tilde^{r,s,j}`
/// or `Q^m phi_tilde_k^{r,s}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub kind: BasisKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub m: usize,
    pub r: usize,
    pub s: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
}

impl BasisDescriptor {
    pub fn phi(k: usize, m: usize, r: usize, s: usize, j: usize) -> Self {
        Self {
            kind: BasisKind::Phi,
            k: Some(k),
            m,
            r,
            s,
            j: Some(j),
        }
    }

    pub fn tilde3(m: usize, r: usize, s: usize, j: usize) -> Self {
        Self {
            kind: BasisKind::Tilde3,
            k: None,
            m,
            r,
            s,
            j: Some(j),
        }
    }

    pub fn tilde2(k: usize, m: usize, r: usize, s: usize) -> Self {
        Self {
            kind: BasisKind::Tilde2,
            k: Some(k),
            m,
            r,
            s,
            j: None,
        }
    }

    /// Tensor rank of the valuation.
    pub fn rank(&self) -> usize {
        let j = self.j.unwrap_or(0);
        match self.kind {
            BasisKind::Phi => 2 * self.m + 2 * j + self.r + self.s,
            BasisKind::Tilde3 => 2 * self.m + 2 * j + self.r + self.s + 2,
            BasisKind::Tilde2 => 2 * self.m + self.r + self.s + 1,
        }
    }

    /// Degree of the translation-covariance polynomial.
    pub fn translation_degree(&self) -> usize {
        self.r
    }

    pub fn is_tilde(&self) -> bool {
        self.kind != BasisKind::Phi
    }

    /// Checks the index constraints of a basis element in dimension n.
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(MtlError::InvalidIndices(msg));
        match self.kind {
            BasisKind::Phi => {
                let (Some(k), Some(j)) = (self.k, self.j) else {
                    return bad("phi descriptors need k and j".into());
                };
                if k >= n {
                    return bad(format!("k = {k} must be below n = {n}"));
                }
                if j > 0 && (k == 0 || k == n - 1) {
                    return bad(format!("j must be 0 for k = {k} in dimension {n}"));
                }
            }
            BasisKind::Tilde3 => {
                if n != 3 {
                    return bad(format!("tilde3 needs n = 3, got {n}"));
                }
                if self.j.is_none() || self.k.is_some() {
                    return bad("tilde3 descriptors take j and no k".into());
                }
            }
            BasisKind::Tilde2 => {
                if n != 2 {
                    return bad(format!("tilde2 needs n = 2, got {n}"));
                }
                match (self.k, self.j) {
                    (Some(0 | 1), None) => {}
                    _ => return bad("tilde2 descriptors take k in {0, 1} and no j".into()),
                }
            }
        }
        Ok(())
    }

    /// Evaluates the basis valuation without the `Q^m` factor.
    pub fn evaluate_core(&self, p: &Polytope, eta: &SupportPatch) -> Result<SymTensor> {
        self.validate(p.ambient_dim())?;
        let j = self.j.unwrap_or(0);
        let k = self.k.unwrap_or(0);
        match self.kind {
            BasisKind::Phi => phi(p, eta, k, self.r, self.s, j),
            BasisKind::Tilde3 => phi_tilde_3d(p, eta, self.r, self.s, j),
            BasisKind::Tilde2 => phi_tilde_2d(p, eta, k, self.r, self.s),
        }
    }

    pub fn evaluate(&self, p: &Polytope, eta: &SupportPatch) -> Result<SymTensor> {
        Ok(q_power_multiply(self.m, &self.evaluate_core(p, eta)?))
    }

    /// Same element without the metric power.
    pub fn without_q(&self) -> Self {
        Self { m: 0, ..*self }
    }
}

impl fmt::Display for BasisDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m > 0 {
            write!(f, "Q^{} ", self.m)?;
        }
        let j = self.j.unwrap_or(0);
        let k = self.k.unwrap_or(0);
        match self.kind {
            BasisKind::Phi => write!(f, "phi_{k}^{{{},{},{j}}}", self.r, self.s),
            BasisKind::Tilde3 => write!(f, "tilde3^{{{},{},{j}}}", self.r, self.s),
            BasisKind::Tilde2 => write!(f, "tilde2_{k}^{{{},{}}}", self.r, self.s),
        }
    }
}

/// All basis elements of rank p in dimension n (n >= 2), in a fixed order:
/// kind, then k, m, j, r, s.
pub fn enumerate_basis(n: usize, p: usize) -> Vec<BasisDescriptor> {
    let mut out = Vec::new();
    for k in 0..n {
        for m in 0..=p / 2 {
            for j in 0..=(p - 2 * m) / 2 {
                if j > 0 && (k == 0 || k == n - 1) {
                    continue;
                }
                let rest = p - 2 * m - 2 * j;
                for r in (0..=rest).rev() {
                    out.push(BasisDescriptor::phi(k, m, r, rest - r, j));
                }
            }
        }
    }
    if n == 3 && p >= 2 {
        for m in 0..=(p - 2) / 2 {
            for j in 0..=(p - 2 - 2 * m) / 2 {
                let rest = p - 2 - 2 * m - 2 * j;
                for r in (0..=rest).rev() {
                    out.push(BasisDescriptor::tilde3(m, r, rest - r, j));
                }
            }
        }
    }
    if n == 2 && p >= 1 {
        for k in 0..2 {
            for m in 0..=(p - 1) / 2 {
                let rest = p - 1 - 2 * m;
                for r in (0..=rest).rev() {
                    out.push(BasisDescriptor::tilde2(k, m, r, rest - r));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patch::{ConeRegion, PositionRegion};
    use crate::spherical::ConeConstraint;
    use crate::tensor::Rotation;
    use std::f64::consts::PI;

    fn vertex_patch(c: &[f64]) -> SupportPatch {
        let lo: Vec<f64> = c.iter().map(|x| x - 0.1).collect();
        let hi: Vec<f64> = c.iter().map(|x| x + 0.1).collect();
        SupportPatch::single(PositionRegion::Box { min: lo, max: hi }, ConeRegion::All)
    }

    #[test]
    fn constants() {
        assert!((normalizing_constant(3, 2, 0, 0) - 0.5).abs() < 1e-15);
        assert!((normalizing_constant(2, 1, 0, 1) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((normalizing_constant(3, 1, 1, 1) - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn cube_intrinsic_volumes() {
        let c = Polytope::unit_cube(3);
        for (k, want) in [(0, 1.0), (1, 3.0), (2, 3.0)] {
            let v = phi(&c, &SupportPatch::all(), k, 0, 0, 0).unwrap().scalar_value();
            assert!((v - want).abs() < 1e-9, "k={k}: {v}");
        }
    }

    #[test]
    fn minkowski_relation_on_cube() {
        let c = Polytope::unit_cube(3);
        assert!(minkowski_tensor(&c, 2, 0, 1).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn square_vertex_exterior_angle() {
        let sq = Polytope::unit_cube(2);
        let v = phi(&sq, &vertex_patch(&[1.0, 1.0]), 0, 0, 0, 0).unwrap();
        assert!((v.scalar_value() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn tilde3_examples() {
        let c = Polytope::unit_cube(3);
        assert!(phi_tilde_3d(&c, &SupportPatch::all(), 0, 0, 0).unwrap().max_abs() < 1e-14);
        // the edge x = y = 1 along e3 has the quarter arc e1 -> e2 as normal cone
        let eta = SupportPatch::single(
            PositionRegion::Box {
                min: vec![0.9, 0.9, -0.5],
                max: vec![1.1, 1.1, 1.5],
            },
            ConeRegion::Halfspaces(vec![
                ConeConstraint::strict(vec![1.0, 0.0, 0.0]),
                ConeConstraint::strict(vec![0.0, 1.0, 0.0]),
            ]),
        );
        let v = phi_tilde_3d(&c, &eta, 0, 0, 0).unwrap();
        let want = SymTensor::from_coeffs(3, 2, [(vec![1, 2], 1.0), (vec![0, 2], -1.0)]).unwrap();
        assert!(v.approx_eq(&want, 1e-14), "{v:?}");
        let flipped = phi_tilde_3d_signed(&c, &eta, 0, 0, 0, true).unwrap();
        assert!(flipped.approx_eq(&v, 1e-14));
        assert!(phi_tilde_3d(&Polytope::unit_cube(2), &SupportPatch::all(), 0, 0, 0).is_err());
    }

    #[test]
    fn tilde2_examples() {
        let seg = Polytope::new(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let up = SupportPatch::single(
            PositionRegion::All,
            ConeRegion::Halfspaces(vec![ConeConstraint::strict(vec![0.0, 1.0])]),
        );
        let v = phi_tilde_2d(&seg, &up, 1, 0, 0).unwrap();
        assert!(v.approx_eq(&SymTensor::vector(&[-1.0, 0.0]), 1e-15));
        assert!(phi_tilde_2d(&seg, &SupportPatch::all(), 1, 0, 0).unwrap().is_zero());
        let sq = Polytope::unit_cube(2);
        let v = phi_tilde_2d(&sq, &vertex_patch(&[1.0, 1.0]), 0, 0, 0).unwrap();
        assert!(v.approx_eq(&SymTensor::vector(&[-1.0, 1.0]), 1e-14));
        let d = BasisDescriptor::tilde2(0, 1, 0, 0);
        let q = d.evaluate(&sq, &vertex_patch(&[1.0, 1.0])).unwrap();
        let want = SymTensor::metric(2).sym_product(&SymTensor::vector(&[-1.0, 1.0])).unwrap();
        assert!(q.approx_eq(&want, 1e-14));
        assert!(phi_tilde_2d(&sq, &SupportPatch::all(), 2, 0, 0).is_err());
    }

    #[test]
    fn q_power_commutes_with_rotation() {
        let t = SymTensor::from_coeffs(3, 2, [(vec![0, 1], 1.0), (vec![2, 2], -0.5)]).unwrap();
        let th = Rotation::from_columns_orthonormalized(
            &[vec![1.0, 0.2, 0.3], vec![-0.1, 1.0, 0.4], vec![0.3, 0.1, 1.0]],
            true,
        )
        .unwrap();
        let a = q_power_multiply(2, &t).rotate(&th).unwrap();
        let b = q_power_multiply(2, &t.rotate(&th).unwrap());
        assert!(a.approx_eq(&b, 1e-12));
        assert_eq!(q_power_multiply(0, &t), t);
        assert_eq!(q_power_multiply(1, &SymTensor::scalar(2, 1.0)), SymTensor::metric(2));
    }

    #[test]
    fn basis_counts() {
        let count = |n, p| enumerate_basis(n, p).len();
        assert_eq!(count(3, 0), 3);
        assert_eq!(count(3, 2), 14);
        assert_eq!(count(2, 1), 6);
        assert_eq!(count(2, 2), 12);
        assert_eq!(count(3, 3), 22);
        assert_eq!(count(2, 3), 20);
        for n in 2..=4 {
            for p in 0..=4 {
                for d in enumerate_basis(n, p) {
                    d.validate(n).unwrap();
                    assert_eq!(d.rank(), p, "{d}");
                }
            }
        }
    }

    #[test]
    fn descriptor_json() {
        let d = BasisDescriptor::tilde2(1, 0, 0, 1);
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"kind":"tilde2","k":1,"m":0,"r":0,"s":1}"#);
        let back: BasisDescriptor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
