//! Densities of a translation invariant valuation on flat polytopes, and
//! their fit against the spanning families of invariant representations.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use super::decompose::least_squares;
use super::sampling::{self, SampleRng};
use super::ValuationOracle;
use crate::error::{MtlError, Result};
use crate::linalg;
use crate::patch::{ConeRegion, PositionRegion, SupportPatch};
use crate::polytope::{Halfspace, Polytope};
use crate::spherical::{
    identity_matrix, quarter_turn, spherical_moment, spherical_moment_factors, ConeConstraint,
    QuadratureConfig, SphericalRegion, Weight,
};
use crate::tensor::{multi_indices, Subspace, SymTensor};

/// Host-polytope independence tolerance of [`extract_delta`].
pub const DELTA_TOLERANCE: f64 = 1e-9;

fn cube_in(l: &Subspace, lo: f64, hi: f64) -> Result<Polytope> {
    let k = l.dim();
    let n = l.ambient_dim();
    let mut pts = Vec::with_capacity(1 << k);
    for mask in 0..(1usize << k) {
        let mut x = vec![0.0; n];
        for (i, b) in l.basis().iter().enumerate() {
            let c = if mask >> i & 1 == 1 { hi } else { lo };
            x = linalg::axpy(&x, c, b);
        }
        pts.push(x);
    }
    Polytope::new(&pts)
}

/// `Gamma(P, A x B) / H^k(A)` for the unit box `A` of `L`, taken inside the
/// relative interior of a larger box `P` so that only the top face of `P`
/// meets `A`. The value is recomputed with a larger host polytope and must
/// agree within [`DELTA_TOLERANCE`].
pub fn extract_delta(g: &ValuationOracle, l: &Subspace, b: &SphericalRegion) -> Result<SymTensor> {
    let n = g.n;
    let k = l.dim();
    if l.ambient_dim() != n || b.carrier().ambient_dim() != n {
        return Err(MtlError::DimensionMismatch {
            expected: n,
            found: l.ambient_dim(),
        });
    }
    if k >= n {
        return Err(MtlError::InvalidArgument(format!("subspace dimension {k} must be below {n}")));
    }
    let carrier = b.carrier();
    if carrier.dim() != n - k
        || carrier
            .basis()
            .iter()
            .any(|c| l.basis().iter().any(|v| linalg::dot(c, v).abs() > 1e-10))
    {
        return Err(MtlError::InvalidArgument(
            "the normal region must lie in the orthogonal complement of L".into(),
        ));
    }
    let normal = ConeRegion::Halfspaces(b.constraints().to_vec());
    let (position, wide) = if k == 0 {
        (
            PositionRegion::All,
            PositionRegion::Box {
                min: vec![-1.0; n],
                max: vec![1.0; n],
            },
        )
    } else {
        let mut hs = Vec::with_capacity(2 * k);
        for v in l.basis() {
            hs.push(Halfspace::ge(v.clone(), 0.0));
            hs.push(Halfspace::gt(linalg::scale(v, -1.0), -1.0));
        }
        (PositionRegion::Halfspaces(hs.clone()), PositionRegion::Halfspaces(hs))
    };
    let host = cube_in(l, -1.0, 2.0)?;
    let value = g.eval(&host, &SupportPatch::single(position, normal.clone()))?;
    let larger = cube_in(l, -2.0, 3.0)?;
    let check = g.eval(&larger, &SupportPatch::single(wide, normal))?;
    let difference = value.max_abs_diff(&check);
    if difference > DELTA_TOLERANCE * value.max_abs().max(1.0) {
        return Err(MtlError::PolytopeDependence { difference });
    }
    Ok(value)
}

/// A random pair `(L, B)` with `dim L = k` and `B` a polyhedral region of
/// the unit sphere of `L^perp`.
pub fn random_site(rng: &mut SampleRng, n: usize, k: usize) -> (Subspace, SphericalRegion) {
    let frame = sampling::random_frame(rng, n, k);
    let l = Subspace::from_orthonormal(n, frame).expect("orthonormal frame");
    let comp = l.orthogonal_complement();
    let c = comp.dim();
    let constraints = if c == 1 {
        let w = comp.basis()[0].clone();
        match rng.random_range(0..3) {
            0 => vec![ConeConstraint::closed(w)],
            1 => vec![ConeConstraint::closed(linalg::scale(&w, -1.0))],
            _ => Vec::new(),
        }
    } else if rng.random_bool(0.2) {
        Vec::new()
    } else {
        let count = rng.random_range(1..=2);
        (0..count)
            .map(|_| {
                let z = sampling::gaussian_vector(rng, c);
                ConeConstraint {
                    normal: comp.embed(&z),
                    strict: rng.random_bool(0.5),
                }
            })
            .collect()
    };
    (l, SphericalRegion::new(comp, constraints))
}

#[derive(Clone, Debug)]
pub struct DeltaSample {
    pub l: Subspace,
    pub b: SphericalRegion,
    pub value: SymTensor,
}

/// Members of the spanning families for flat densities. `u-bar` is the
/// quarter turn in the plane and `v_L` a unit vector spanning a line `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DeltaTerm {
    /// `Q^a Q_L^{b-a} int_B u^{p-2b}`
    Moment { a: usize, b: usize },
    /// `Q^a Q_L^{b-a} v_L int_B (v_L x u) u^{p-2b-2}`
    Cross { a: usize, b: usize },
    /// `int_B u-bar^j u^{p-j}`
    PerpPower { j: usize },
    /// `Q^a int_B u-bar u^{p-2a-1}`
    PerpMoment { a: usize },
}

impl fmt::Display for DeltaTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaTerm::Moment { a, b } => write!(f, "Q^{a} Q_L^{} int u^(p-{})", b - a, 2 * b),
            DeltaTerm::Cross { a, b } => write!(f, "Q^{a} Q_L^{} v_L int (v_L x u) u^(p-{})", b - a, 2 * b + 2),
            DeltaTerm::PerpPower { j } => write!(f, "int ubar^{j} u^(p-{j})"),
            DeltaTerm::PerpMoment { a } => write!(f, "Q^{a} int ubar u^(p-{})", 2 * a + 1),
        }
    }
}

/// The spanning family for `(n, k, p)`. Without `include_tilde` the members
/// that are covariant under rotations only are left out.
pub fn delta_family(n: usize, k: usize, p: usize, include_tilde: bool) -> Vec<DeltaTerm> {
    let mut out = Vec::new();
    if k == 0 {
        if n == 2 && include_tilde {
            out.extend((0..=p).map(|j| DeltaTerm::PerpPower { j }));
        } else {
            out.extend((0..=p / 2).map(|a| DeltaTerm::Moment { a, b: a }));
        }
        return out;
    }
    if n == 2 {
        out.extend((0..=p / 2).map(|a| DeltaTerm::Moment { a, b: a }));
        if include_tilde {
            out.extend((0..).take_while(|a| 2 * a < p).map(|a| DeltaTerm::PerpMoment { a }));
        }
        return out;
    }
    for b in 0..=p / 2 {
        for a in 0..=b {
            out.push(DeltaTerm::Moment { a, b });
        }
    }
    if n == 3 && k == 1 && include_tilde && p >= 2 {
        for b in 0..=(p - 2) / 2 {
            for a in 0..=b {
                out.push(DeltaTerm::Cross { a, b });
            }
        }
    }
    out
}

fn metric_factors(l: &Subspace, a: usize, b: usize, t: SymTensor) -> Result<SymTensor> {
    let n = l.ambient_dim();
    let mut out = t;
    if a > 0 {
        out = SymTensor::metric_power(n, a).sym_product(&out)?;
    }
    if b > a {
        out = SymTensor::metric_on_subspace(l).power(b - a).sym_product(&out)?;
    }
    Ok(out)
}

/// Value of one family member at `(L, B)`.
pub fn term_value(term: DeltaTerm, l: &Subspace, b: &SphericalRegion, p: usize) -> Result<SymTensor> {
    let n = l.ambient_dim();
    match term {
        DeltaTerm::Moment { a, b: bb } => metric_factors(l, a, bb, spherical_moment(b, p - 2 * bb, &Weight::None)?),
        DeltaTerm::Cross { a, b: bb } => {
            let v = l.basis()[0].clone();
            let inner = spherical_moment(b, p - 2 * bb - 2, &Weight::CrossWith(v.clone()))?;
            metric_factors(l, a, bb, SymTensor::vector(&v).sym_product(&inner)?)
        }
        DeltaTerm::PerpPower { j } => spherical_moment_factors(
            b,
            &[(quarter_turn(), j), (identity_matrix(n), p - j)],
            &QuadratureConfig::default(),
        ),
        DeltaTerm::PerpMoment { a } => metric_factors(l, a, a, spherical_moment(b, p - 2 * a - 1, &Weight::PerpComplement)?),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaFit {
    pub terms: Vec<(DeltaTerm, f64)>,
    /// `|A c - y| / |y|` over all samples and argument tuples.
    pub residual: f64,
    pub rank: usize,
    pub condition: f64,
    pub rows: usize,
}

/// Least-squares fit of sampled densities against [`delta_family`].
pub fn fit_delta_representation(
    samples: &[DeltaSample],
    n: usize,
    k: usize,
    p: usize,
    include_tilde: bool,
    seed: u64,
) -> Result<DeltaFit> {
    if samples.is_empty() {
        return Err(MtlError::EmptyInput("delta samples"));
    }
    for s in samples {
        if s.l.ambient_dim() != n || s.value.dim() != n {
            return Err(MtlError::DimensionMismatch {
                expected: n,
                found: s.value.dim(),
            });
        }
        if s.l.dim() != k || s.value.rank() != p {
            return Err(MtlError::InvalidArgument(format!(
                "sample has dim L = {} and rank {}, expected {k} and {p}",
                s.l.dim(),
                s.value.rank()
            )));
        }
    }
    let family = delta_family(n, k, p, include_tilde);
    let mut rng = sampling::rng(seed);
    let count = if p == 0 { 1 } else { 2 * multi_indices(n, p).len() + 2 };
    let tuples = sampling::argument_tuples(&mut rng, n, p, count);
    let rows = samples.len() * tuples.len();
    let mut a = DMatrix::zeros(rows, family.len());
    let mut y = DVector::zeros(rows);
    for (si, s) in samples.iter().enumerate() {
        let base = si * tuples.len();
        for (ti, v) in sampling::flatten(&s.value, &tuples)?.into_iter().enumerate() {
            y[base + ti] = v;
        }
        for (c, term) in family.iter().enumerate() {
            let t = term_value(*term, &s.l, &s.b, p)?;
            for (ti, v) in sampling::flatten(&t, &tuples)?.into_iter().enumerate() {
                a[(base + ti, c)] = v;
            }
        }
    }
    let sol = least_squares(&a, &y, 1e-10)?;
    let y_norm = y.norm();
    let err = (&a * &sol.x - &y).norm();
    if sol.rank == 0 && y_norm > 0.0 {
        return Err(MtlError::RankDeficient {
            condition: f64::INFINITY,
        });
    }
    Ok(DeltaFit {
        terms: family.into_iter().zip(sol.x.iter().copied()).collect(),
        residual: if y_norm > 0.0 { err / y_norm } else { err },
        rank: sol.rank,
        condition: sol.condition,
        rows,
    })
}
