//! Integration over polytopes and over polyhedral regions of great spheres.
//!
//! Spherical integrals are computed monomial by monomial in the coordinates
//! of the carrier subspace and then assembled into tensors. Depending on the
//! region dimension the monomial integrals are point sums (dimension 0),
//! closed-form arc integrals (dimension 1) or adaptive cubature over
//! spherical simplices (dimensions 2 and 3).

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use crate::error::{MtlError, Result};
use crate::linalg::{self, dot, norm};
use crate::polytope::Polytope;
use crate::tensor::{exponents, multi_indices, Rotation, Subspace, SymTensor};

/// Membership slack for point masses on 0-dimensional regions.
const POINT_TOL: f64 = 1e-12;
const MAX_DEPTH_2D: usize = 14;
const MAX_DEPTH_3D: usize = 8;

/// `omega(n)`, the surface area of the unit sphere in R^n.
pub fn omega(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * omega(n - 2) / (n - 2) as f64,
    }
}

/// `<normal, u> >= 0`, or `> 0` when `strict`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeConstraint {
    pub normal: Vec<f64>,
    pub strict: bool,
}

impl ConeConstraint {
    pub fn closed(normal: Vec<f64>) -> Self {
        Self {
            normal,
            strict: false,
        }
    }

    pub fn strict(normal: Vec<f64>) -> Self {
        Self {
            normal,
            strict: true,
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        let v = dot(&self.normal, u);
        if self.strict {
            v > POINT_TOL
        } else {
            v >= -POINT_TOL
        }
    }
}

/// Intersection of the unit sphere of `carrier` with finitely many linear
/// halfspaces.
#[derive(Clone, Debug, PartialEq)]
pub struct SphericalRegion {
    carrier: Subspace,
    constraints: Vec<ConeConstraint>,
}

/// Extra linear factor in a spherical moment.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    None,
    /// `v x u` (n = 3)
    CrossWith(Vec<f64>),
    /// `u-bar`, the positive quarter turn of `u` (n = 2)
    PerpComplement,
}

/// Tolerances of the adaptive engines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Integrate arcs adaptively (Gauss-Legendre) instead of in closed form.
    pub adaptive_arcs: bool,
    pub arc_tol: f64,
    pub tol_2d: f64,
    pub tol_3d: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            adaptive_arcs: false,
            arc_tol: 1e-12,
            tol_2d: 1e-10,
            tol_3d: 1e-7,
        }
    }
}

impl SphericalRegion {
    /// Projects constraint normals into the carrier and prunes constraints
    /// that are implied by others.
    pub fn new(carrier: Subspace, constraints: Vec<ConeConstraint>) -> Self {
        let mut r = Self {
            carrier,
            constraints: Vec::new(),
        };
        r.merge(constraints);
        r
    }

    pub fn full(carrier: Subspace) -> Self {
        Self {
            carrier,
            constraints: Vec::new(),
        }
    }

    pub fn full_sphere(n: usize) -> Self {
        Self::full(Subspace::full(n))
    }

    pub fn carrier(&self) -> &Subspace {
        &self.carrier
    }

    pub fn constraints(&self) -> &[ConeConstraint] {
        &self.constraints
    }

    /// Dimension of the great sphere the region lives in (may be -1 for the
    /// zero carrier, reported as `None`).
    pub fn dim(&self) -> Option<usize> {
        self.carrier.dim().checked_sub(1)
    }

    fn merge(&mut self, extra: Vec<ConeConstraint>) {
        for c in extra {
            let a = self.carrier.project(&c.normal);
            let l = norm(&a);
            let scale = norm(&c.normal).max(1.0);
            if l <= 1e-14 * scale {
                if c.strict {
                    // <a, u> = 0 on the whole carrier
                    self.constraints = vec![ConeConstraint::strict(vec![0.0; a.len()])];
                    return;
                }
                continue;
            }
            let a = linalg::scale(&a, 1.0 / l);
            if self.is_empty_marker() {
                return;
            }
            if let Some(existing) = self
                .constraints
                .iter_mut()
                .find(|e| linalg::max_abs_diff(&e.normal, &a) <= 1e-14)
            {
                existing.strict |= c.strict;
                continue;
            }
            self.constraints.push(ConeConstraint {
                normal: a,
                strict: c.strict,
            });
        }
    }

    fn is_empty_marker(&self) -> bool {
        self.constraints.iter().any(|c| c.strict && norm(&c.normal) == 0.0)
    }

    /// Halfspace merge with extra cone constraints.
    pub fn intersect_with_cone(&self, cone: &[ConeConstraint]) -> SphericalRegion {
        let mut r = self.clone();
        r.merge(cone.to_vec());
        r
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        (norm(u) - 1.0).abs() <= 1e-9
            && self.carrier.contains(u, 1e-9)
            && self.constraints.iter().all(|c| c.contains(u))
    }

    pub fn transform(&self, theta: &Rotation) -> SphericalRegion {
        SphericalRegion {
            carrier: self.carrier.transform(theta),
            constraints: self
                .constraints
                .iter()
                .map(|c| ConeConstraint {
                    normal: theta.apply(&c.normal),
                    strict: c.strict,
                })
                .collect(),
        }
    }

    /// Constraint normals in carrier coordinates.
    fn local_constraints(&self) -> Vec<(Vec<f64>, bool)> {
        self.constraints
            .iter()
            .map(|c| (self.carrier.coordinates(&c.normal), c.strict))
            .collect()
    }

    /// `H^{dim}` measure of the region.
    pub fn measure(&self) -> f64 {
        self.measure_with(&QuadratureConfig::default())
    }

    pub fn measure_with(&self, cfg: &QuadratureConfig) -> f64 {
        local_monomial_integrals(self, 0, cfg)
            .map(|m| m.values().next().copied().unwrap_or(0.0))
            .unwrap_or(0.0)
    }

    /// Whether the region has zero measure in its own dimension.
    pub fn is_null(&self) -> bool {
        self.measure() == 0.0
    }
}

/// Monomial integrals `int z^beta` over the region in carrier coordinates,
/// for all `|beta| = degree`, keyed by exponent vector.
type MonomialTable = BTreeMap<Vec<usize>, f64>;

thread_local! {
    static CACHE: RefCell<HashMap<Vec<u64>, MonomialTable>> = RefCell::new(HashMap::new());
}

fn cache_key(region: &SphericalRegion, degree: usize, cfg: &QuadratureConfig) -> Vec<u64> {
    let mut key = vec![
        region.carrier.dim() as u64,
        degree as u64,
        cfg.adaptive_arcs as u64,
        cfg.arc_tol.to_bits(),
        cfg.tol_2d.to_bits(),
        cfg.tol_3d.to_bits(),
    ];
    for (a, strict) in region.local_constraints() {
        key.push(strict as u64);
        key.extend(a.iter().map(|x| x.to_bits()));
    }
    key
}

/// Drops every cached spherical integral of the current thread.
pub fn clear_cache() {
    CACHE.with(|c| c.borrow_mut().clear());
}

fn local_monomial_integrals(
    region: &SphericalRegion,
    degree: usize,
    cfg: &QuadratureConfig,
) -> Result<MonomialTable> {
    let key = cache_key(region, degree, cfg);
    if let Some(hit) = CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return Ok(hit);
    }
    let c = region.carrier.dim();
    let exps: Vec<Vec<usize>> = multi_indices(c, degree)
        .iter()
        .map(|i| exponents(i, c))
        .collect();
    let values: Vec<f64> = if region.is_empty_marker() || c == 0 {
        vec![0.0; exps.len()]
    } else {
        let cons = region.local_constraints();
        match c {
            1 => point_sum(&cons, &exps),
            2 => {
                let arcs = arc_intervals(&cons);
                if cfg.adaptive_arcs {
                    arcs.iter().fold(vec![0.0; exps.len()], |acc, &(a, b)| {
                        add_vec(&acc, &adaptive_arc(a, b, &exps, cfg.arc_tol))
                    })
                } else {
                    exps.iter()
                        .map(|e| arcs.iter().map(|&(a, b)| cos_sin_integral(e[0], e[1], a, b)).sum())
                        .collect()
                }
            }
            _ => simplex_cubature(&cons, c, &exps, cfg)?,
        }
    };
    let table: MonomialTable = exps.into_iter().zip(values).collect();
    CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        if cache.len() > 200_000 {
            cache.clear();
        }
        cache.insert(key, table.clone());
    });
    Ok(table)
}

fn add_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn monomial(z: &[f64], e: &[usize]) -> f64 {
    z.iter().zip(e).map(|(x, &k)| x.powi(k as i32)).product()
}

fn point_sum(cons: &[(Vec<f64>, bool)], exps: &[Vec<usize>]) -> Vec<f64> {
    let mut out = vec![0.0; exps.len()];
    for z in [[1.0], [-1.0]] {
        let inside = cons.iter().all(|(a, strict)| {
            let v = a[0] * z[0];
            if *strict {
                v > POINT_TOL
            } else {
                v >= -POINT_TOL
            }
        });
        if inside {
            for (o, e) in out.iter_mut().zip(exps) {
                *o += monomial(&z, e);
            }
        }
    }
    out
}

/// Angular intervals of the arc region, as `(start, end)` with
/// `0 <= start < end <= 2 pi`.
pub(crate) fn arc_intervals(cons: &[(Vec<f64>, bool)]) -> Vec<(f64, f64)> {
    use std::f64::consts::{FRAC_PI_2, TAU};
    let mut breaks = vec![0.0, TAU];
    for (a, _) in cons {
        let phi = a[1].atan2(a[0]);
        for b in [phi - FRAC_PI_2, phi + FRAC_PI_2] {
            breaks.push(b.rem_euclid(TAU));
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 1e-15 {
            continue;
        }
        let m = 0.5 * (a + b);
        let z = [m.cos(), m.sin()];
        if cons.iter().all(|(c, _)| c[0] * z[0] + c[1] * z[1] > 0.0) {
            match out.last_mut() {
                Some(last) if last.1 == a => last.1 = b,
                _ => out.push((a, b)),
            }
        }
    }
    out
}

/// `int_a^b cos^p(t) sin^q(t) dt` by the standard reduction formulas.
pub fn cos_sin_integral(p: usize, q: usize, a: f64, b: f64) -> f64 {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    #[allow(clippy::too_many_arguments)]
    fn rec(p: usize, q: usize, a: f64, b: f64, sa: f64, ca: f64, sb: f64, cb: f64) -> f64 {
        let pq = (p + q) as f64;
        if p >= 2 {
            let bd = cb.powi(p as i32 - 1) * sb.powi(q as i32 + 1)
                - ca.powi(p as i32 - 1) * sa.powi(q as i32 + 1);
            return bd / pq + (p - 1) as f64 / pq * rec(p - 2, q, a, b, sa, ca, sb, cb);
        }
        if q >= 2 {
            let bd = -(cb.powi(p as i32 + 1) * sb.powi(q as i32 - 1))
                + ca.powi(p as i32 + 1) * sa.powi(q as i32 - 1);
            return bd / pq + (q - 1) as f64 / pq * rec(p, q - 2, a, b, sa, ca, sb, cb);
        }
        match (p, q) {
            (0, 0) => b - a,
            (1, 0) => sb - sa,
            (0, 1) => ca - cb,
            _ => 0.5 * (sb * sb - sa * sa),
        }
    }
    rec(p, q, a, b, sa, ca, sb, cb)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            if m == 1 {
                p1 = z;
                p0 = 1.0;
            }
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_m(z), p0 = P_{m-1}(z)
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

fn gl_arc(a: f64, b: f64, exps: &[Vec<usize>], nodes: &(Vec<f64>, Vec<f64>)) -> Vec<f64> {
    let (h, c) = (0.5 * (b - a), 0.5 * (a + b));
    let mut out = vec![0.0; exps.len()];
    for (x, w) in nodes.0.iter().zip(&nodes.1) {
        let t = c + h * x;
        let z = [t.cos(), t.sin()];
        for (o, e) in out.iter_mut().zip(exps) {
            *o += w * h * monomial(&z, e);
        }
    }
    out
}

/// Adaptive Gauss-Legendre integration of arc monomials (cross-check engine).
pub(crate) fn adaptive_arc(a: f64, b: f64, exps: &[Vec<usize>], tol: f64) -> Vec<f64> {
    let nodes = gauss_legendre(10);
    fn rec(a: f64, b: f64, whole: Vec<f64>, exps: &[Vec<usize>], tol: f64, depth: usize, nodes: &(Vec<f64>, Vec<f64>)) -> Vec<f64> {
        let m = 0.5 * (a + b);
        let l = gl_arc(a, m, exps, nodes);
        let r = gl_arc(m, b, exps, nodes);
        let sum = add_vec(&l, &r);
        if depth >= 30 || linalg::max_abs_diff(&sum, &whole) < tol {
            return sum;
        }
        add_vec(
            &rec(a, m, l, exps, tol / 2.0, depth + 1, nodes),
            &rec(m, b, r, exps, tol / 2.0, depth + 1, nodes),
        )
    }
    let whole = gl_arc(a, b, exps, &nodes);
    rec(a, b, whole, exps, tol, 0, &nodes)
}

/// Adaptive cubature over the region (carrier dimension 3 or 4). The region
/// is split by coordinate orthants into pointed cones, each cone is cut by
/// the hyperplane `sum sigma_i z_i = 1`, and the resulting polytope is
/// triangulated into cones over simplices.
fn simplex_cubature(
    cons: &[(Vec<f64>, bool)],
    c: usize,
    exps: &[Vec<usize>],
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; exps.len()];
    let region_normals: Vec<Vec<f64>> = cons.iter().map(|(a, _)| a.clone()).collect();
    for mask in 0..(1usize << c) {
        let sigma: Vec<f64> = (0..c).map(|i| if mask & (1 << i) != 0 { -1.0 } else { 1.0 }).collect();
        let mut normals = region_normals.clone();
        for (i, &s) in sigma.iter().enumerate() {
            let mut e = vec![0.0; c];
            e[i] = s;
            normals.push(e);
        }
        let rays = cone_section_vertices(&normals, &sigma, c);
        if rays.len() < c {
            continue;
        }
        let section = match Polytope::new(&rays) {
            Ok(p) => p,
            Err(MtlError::Degenerate(_)) => {
                return Err(MtlError::Degenerate(
                    "spherical region has nearly coincident corners".into(),
                ))
            }
            Err(e) => return Err(e),
        };
        if section.intrinsic_dim() + 1 != c {
            continue;
        }
        for simplex in section.triangulate() {
            let verts: Vec<Vec<f64>> = simplex
                .iter()
                .map(|&i| linalg::normalize(&section.vertices()[i]).unwrap())
                .collect();
            let part = if c == 3 {
                adaptive_triangle(&verts, exps, cfg.tol_2d, 0)
            } else {
                adaptive_tetrahedron(&verts, exps, cfg.tol_3d, 0)
            };
            out = add_vec(&out, &part);
        }
    }
    Ok(out)
}

/// Vertices of `{z : <a, z> >= 0 for all a} cap {<sigma, z> = 1}`.
fn cone_section_vertices(normals: &[Vec<f64>], sigma: &[f64], c: usize) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for subset in linalg::combinations(normals.len(), c - 1) {
        let mut rows: Vec<Vec<f64>> = subset.iter().map(|&i| normals[i].clone()).collect();
        rows.push(sigma.to_vec());
        let d = linalg::det(&rows);
        if d.abs() < 1e-12 {
            continue;
        }
        // Cramer's rule for rows * z = (0, .., 0, 1)
        let z: Vec<f64> = (0..c)
            .map(|j| {
                let mut m = rows.clone();
                for (r, row) in m.iter_mut().enumerate() {
                    row[j] = if r == c - 1 { 1.0 } else { 0.0 };
                }
                linalg::det(&m) / d
            })
            .collect();
        if normals.iter().all(|a| dot(a, &z) >= -1e-12) && !pts.iter().any(|p| linalg::max_abs_diff(p, &z) < 1e-11) {
            pts.push(z);
        }
    }
    pts
}

fn radon_rule() -> [([f64; 3], f64); 7] {
    let s15 = 15f64.sqrt();
    let a = (6.0 - s15) / 21.0;
    let b = (6.0 + s15) / 21.0;
    let wa = (155.0 - s15) / 1200.0;
    let wb = (155.0 + s15) / 1200.0;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 9.0 / 40.0),
        ([a, a, 1.0 - 2.0 * a], wa),
        ([a, 1.0 - 2.0 * a, a], wa),
        ([1.0 - 2.0 * a, a, a], wa),
        ([b, b, 1.0 - 2.0 * b], wb),
        ([b, 1.0 - 2.0 * b, b], wb),
        ([1.0 - 2.0 * b, b, b], wb),
    ]
}

/// Integral over the cone-projected simplex with the Jacobian
/// `|det V| / |x|^c` of the radial projection.
fn simplex_rule(verts: &[Vec<f64>], exps: &[Vec<usize>], pts: &[(Vec<f64>, f64)]) -> Vec<f64> {
    let c = verts.len();
    let detv = linalg::det(verts).abs();
    let mut out = vec![0.0; exps.len()];
    for (lambda, w) in pts {
        let mut x = vec![0.0; c];
        for (l, v) in lambda.iter().zip(verts) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += l * vi;
            }
        }
        let r = norm(&x);
        let jac = detv / r.powi(c as i32);
        let u: Vec<f64> = x.iter().map(|v| v / r).collect();
        for (o, e) in out.iter_mut().zip(exps) {
            *o += w * jac * monomial(&u, e);
        }
    }
    out
}

fn triangle_points() -> &'static [(Vec<f64>, f64)] {
    use std::sync::OnceLock;
    static PTS: OnceLock<Vec<(Vec<f64>, f64)>> = OnceLock::new();
    // reference triangle in barycentric coordinates has area 1/2
    PTS.get_or_init(|| radon_rule().iter().map(|(l, w)| (l.to_vec(), 0.5 * w)).collect())
}

fn tetra_points() -> &'static [(Vec<f64>, f64)] {
    use std::sync::OnceLock;
    static PTS: OnceLock<Vec<(Vec<f64>, f64)>> = OnceLock::new();
    PTS.get_or_init(|| {
        // collapsed (Duffy) product of 4-point Gauss rules on [0, 1]; exact to
        // degree 5 in the barycentric coordinates
        let (x, w) = gauss_legendre(4);
        let g: Vec<(f64, f64)> = x.iter().zip(&w).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
        let mut out = Vec::new();
        for &(a, wa) in &g {
            for &(b, wb) in &g {
                for &(c, wc) in &g {
                    let l1 = a;
                    let l2 = b * (1.0 - a);
                    let l3 = c * (1.0 - a) * (1.0 - b);
                    let jac = (1.0 - a) * (1.0 - a) * (1.0 - b);
                    out.push((vec![1.0 - l1 - l2 - l3, l1, l2, l3], wa * wb * wc * jac));
                }
            }
        }
        out
    })
}

fn unit_mid(a: &[f64], b: &[f64]) -> Vec<f64> {
    linalg::normalize(&linalg::add(a, b)).unwrap()
}

fn adaptive_triangle(v: &[Vec<f64>], exps: &[Vec<usize>], tol: f64, depth: usize) -> Vec<f64> {
    let whole = simplex_rule(v, exps, triangle_points());
    refine_triangle(v, whole, exps, tol, depth)
}

fn refine_triangle(v: &[Vec<f64>], whole: Vec<f64>, exps: &[Vec<usize>], tol: f64, depth: usize) -> Vec<f64> {
    let m01 = unit_mid(&v[0], &v[1]);
    let m12 = unit_mid(&v[1], &v[2]);
    let m02 = unit_mid(&v[0], &v[2]);
    let children = [
        vec![v[0].clone(), m01.clone(), m02.clone()],
        vec![v[1].clone(), m12.clone(), m01.clone()],
        vec![v[2].clone(), m02.clone(), m12.clone()],
        vec![m01, m12, m02],
    ];
    let parts: Vec<Vec<f64>> = children.iter().map(|ch| simplex_rule(ch, exps, triangle_points())).collect();
    let sum = parts.iter().fold(vec![0.0; exps.len()], |acc, p| add_vec(&acc, p));
    if depth >= MAX_DEPTH_2D || linalg::max_abs_diff(&sum, &whole) < tol {
        return sum;
    }
    children
        .iter()
        .zip(parts)
        .fold(vec![0.0; exps.len()], |acc, (ch, p)| {
            add_vec(&acc, &refine_triangle(ch, p, exps, tol / 2.0, depth + 1))
        })
}

fn adaptive_tetrahedron(v: &[Vec<f64>], exps: &[Vec<usize>], tol: f64, depth: usize) -> Vec<f64> {
    let whole = simplex_rule(v, exps, tetra_points());
    refine_tetrahedron(v, whole, exps, tol, depth)
}

fn refine_tetrahedron(v: &[Vec<f64>], whole: Vec<f64>, exps: &[Vec<usize>], tol: f64, depth: usize) -> Vec<f64> {
    let m = |i: usize, j: usize| unit_mid(&v[i], &v[j]);
    let (m01, m02, m03, m12, m13, m23) = (m(0, 1), m(0, 2), m(0, 3), m(1, 2), m(1, 3), m(2, 3));
    let children = [
        vec![v[0].clone(), m01.clone(), m02.clone(), m03.clone()],
        vec![v[1].clone(), m01.clone(), m12.clone(), m13.clone()],
        vec![v[2].clone(), m02.clone(), m12.clone(), m23.clone()],
        vec![v[3].clone(), m03.clone(), m13.clone(), m23.clone()],
        vec![m02.clone(), m13.clone(), m01.clone(), m03.clone()],
        vec![m02.clone(), m13.clone(), m03.clone(), m23.clone()],
        vec![m02.clone(), m13.clone(), m23.clone(), m12.clone()],
        vec![m02, m13, m12, m01],
    ];
    let parts: Vec<Vec<f64>> = children.iter().map(|ch| simplex_rule(ch, exps, tetra_points())).collect();
    let sum = parts.iter().fold(vec![0.0; exps.len()], |acc, p| add_vec(&acc, p));
    if depth >= MAX_DEPTH_3D || linalg::max_abs_diff(&sum, &whole) < tol {
        return sum;
    }
    children
        .iter()
        .zip(parts)
        .fold(vec![0.0; exps.len()], |acc, (ch, p)| {
            add_vec(&acc, &refine_tetrahedron(ch, p, exps, tol / 2.0, depth + 1))
        })
}

/// Polynomial in `(y, z)`: map from (sorted y-index, z-exponent) to coefficient.
type Mixed = BTreeMap<(Vec<usize>, Vec<usize>), f64>;

/// Expands `prod_k <F_k z, y>` where each `F_k` is an n x c matrix (rows
/// indexed by the ambient coordinate).
fn expand_linear_forms(forms: &[Vec<Vec<f64>>], c: usize) -> Mixed {
    let mut poly: Mixed = BTreeMap::new();
    poly.insert((Vec::new(), vec![0; c]), 1.0);
    for f in forms {
        let mut next: Mixed = BTreeMap::new();
        for ((yi, ze), coef) in &poly {
            for (i, row) in f.iter().enumerate() {
                for (j, &fij) in row.iter().enumerate() {
                    if fij == 0.0 {
                        continue;
                    }
                    let mut y = yi.clone();
                    let pos = y.partition_point(|&v| v <= i);
                    y.insert(pos, i);
                    let mut z = ze.clone();
                    z[j] += 1;
                    *next.entry((y, z)).or_insert(0.0) += coef * fij;
                }
            }
        }
        poly = next;
    }
    poly
}

/// `int_R prod_k (M_k u)^{e_k} dH(u)` for square matrices `M_k` on R^n.
pub fn spherical_moment_factors(
    region: &SphericalRegion,
    factors: &[(Vec<Vec<f64>>, usize)],
    cfg: &QuadratureConfig,
) -> Result<SymTensor> {
    let n = region.carrier.ambient_dim();
    let c = region.carrier.dim();
    let mut forms: Vec<Vec<Vec<f64>>> = Vec::new();
    for (m, e) in factors {
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(MtlError::DimensionMismatch {
                expected: n,
                found: m.len(),
            });
        }
        // (M B)[i][j] = sum_l M[i][l] b_j[l]
        let mb: Vec<Vec<f64>> = (0..n)
            .map(|i| region.carrier.basis().iter().map(|b| dot(&m[i], b)).collect())
            .collect();
        forms.extend(std::iter::repeat_n(mb, *e));
    }
    let degree = forms.len();
    let mut out = SymTensor::zero(n, degree);
    if c == 0 {
        return Ok(out);
    }
    let table = local_monomial_integrals(region, degree, cfg)?;
    let poly = expand_linear_forms(&forms, c);
    let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for ((y, z), coef) in poly {
        let v = table.get(&z).copied().unwrap_or(0.0);
        if v != 0.0 {
            *acc.entry(y).or_insert(0.0) += coef * v;
        }
    }
    out.add_scaled(&SymTensor::from_coeffs(n, degree, acc)?, 1.0)?;
    Ok(out)
}

pub fn identity_matrix(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| linalg::unit(n, i)).collect()
}

/// Matrix of `u -> v x u`.
pub fn cross_matrix(v: &[f64]) -> Vec<Vec<f64>> {
    vec![
        vec![0.0, -v[2], v[1]],
        vec![v[2], 0.0, -v[0]],
        vec![-v[1], v[0], 0.0],
    ]
}

/// Matrix of the positive quarter turn `u -> u-bar` in R^2.
pub fn quarter_turn() -> Vec<Vec<f64>> {
    vec![vec![0.0, -1.0], vec![1.0, 0.0]]
}

/// `int_R w(u) u^s dH^{dim R}(u)`.
pub fn spherical_moment(region: &SphericalRegion, s: usize, weight: &Weight) -> Result<SymTensor> {
    spherical_moment_with(region, s, weight, &QuadratureConfig::default())
}

pub fn spherical_moment_with(
    region: &SphericalRegion,
    s: usize,
    weight: &Weight,
    cfg: &QuadratureConfig,
) -> Result<SymTensor> {
    let n = region.carrier.ambient_dim();
    let mut factors = Vec::with_capacity(2);
    match weight {
        Weight::None => {}
        Weight::CrossWith(v) => {
            if n != 3 || v.len() != 3 {
                return Err(MtlError::WeightCarrierMismatch(
                    "cross-product weight needs n = 3".into(),
                ));
            }
            if region.carrier.dim() != 2
                || region.carrier.basis().iter().any(|b| dot(b, v).abs() > 1e-10)
            {
                return Err(MtlError::WeightCarrierMismatch(
                    "cross-product weight needs a 2-dimensional carrier orthogonal to v".into(),
                ));
            }
            factors.push((cross_matrix(v), 1));
        }
        Weight::PerpComplement => {
            if n != 2 {
                return Err(MtlError::WeightCarrierMismatch(
                    "quarter-turn weight needs n = 2".into(),
                ));
            }
            factors.push((quarter_turn(), 1));
        }
    }
    factors.push((identity_matrix(n), s));
    spherical_moment_factors(region, &factors, cfg)
}

/// Complete homogeneous sum `sum_{|alpha| = r} prod_i v_i^{alpha_i}`.
fn complete_homogeneous(points: &[&Vec<f64>], r: usize, n: usize) -> SymTensor {
    // h_r(v_0..v_m) = sum_j v_m^j h_{r-j}(v_0..v_{m-1})
    let mut h: Vec<SymTensor> = (0..=r)
        .map(|d| if d == 0 { SymTensor::scalar(n, 1.0) } else { SymTensor::zero(n, d) })
        .collect();
    for v in points {
        let pows: Vec<SymTensor> = (0..=r).map(|j| SymTensor::vector_power(v, j)).collect();
        let mut next = Vec::with_capacity(r + 1);
        for d in 0..=r {
            let mut acc = SymTensor::zero(n, d);
            for j in 0..=d {
                acc += &pows[j].sym_product(&h[d - j]).unwrap();
            }
            next.push(acc);
        }
        h = next;
    }
    h.pop().unwrap()
}

/// `int_S x^r dH^k` over a k-simplex given by its vertices.
pub fn simplex_moment(points: &[&Vec<f64>], r: usize) -> SymTensor {
    let n = points[0].len();
    let k = points.len() - 1;
    let vol = crate::polytope::simplex_volume(points);
    let c = vol * linalg::factorial(k) * linalg::factorial(r) / linalg::factorial(k + r);
    complete_homogeneous(points, r, n).scaled(c)
}

/// `int_A x^r dH^k` with k the dimension of A.
pub fn polytope_moment(a: &Polytope, r: usize) -> SymTensor {
    let n = a.ambient_dim();
    let mut out = SymTensor::zero(n, r);
    for s in a.triangulate() {
        let pts: Vec<&Vec<f64>> = s.iter().map(|&i| &a.vertices()[i]).collect();
        out += &simplex_moment(&pts, r);
    }
    out
}
