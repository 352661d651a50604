//! Splitting a tensor into metric powers of a subspace times tensors on its
//! orthogonal complement.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::decompose::least_squares;
use super::{relative_residual, sampling};
use crate::error::{MtlError, Result};
use crate::linalg;
use crate::tensor::{multi_indices, Rotation, Subspace, SymTensor};

/// Largest tolerated deviation from invariance under rotations of `L`.
pub const INVARIANCE_TOLERANCE: f64 = 1e-8;
const INVARIANCE_PROBES: usize = 6;

/// `T = sum_j F_j (x) pi^* T_j`, where `F_j` is `Q_L^j` when `dim L >= 2`
/// and `v_L^j` when `L` is a line. Components are given in the coordinates
/// of `complement`.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantDecomposition {
    #[serde(skip)]
    pub subspace: Subspace,
    #[serde(skip)]
    pub complement: Subspace,
    /// Unit vector spanning `L` when `L` is a line.
    pub direction: Option<Vec<f64>>,
    /// Rank of the decomposed tensor.
    pub rank: usize,
    pub components: Vec<(usize, SymTensor)>,
    /// Relative recomposition error.
    pub residual: f64,
    /// Relative deviation from invariance (0 for lines).
    pub invariance_residual: f64,
}

impl InvariantDecomposition {
    pub fn component(&self, j: usize) -> Option<&SymTensor> {
        self.components.iter().find(|(i, _)| *i == j).map(|(_, t)| t)
    }

    /// The factor multiplying component `j`.
    fn factor(&self, j: usize) -> SymTensor {
        match &self.direction {
            Some(v) => SymTensor::vector_power(v, j),
            None => SymTensor::metric_on_subspace(&self.subspace).power(j),
        }
    }

    /// `F_j (x) pi^* T_j` as a tensor on the ambient space.
    pub fn ambient_term(&self, j: usize) -> Result<SymTensor> {
        let c = self
            .component(j)
            .ok_or_else(|| MtlError::InvalidArgument(format!("no component {j}")))?;
        self.factor(j).sym_product(&c.pullback(&self.complement)?)
    }

    pub fn recompose(&self) -> Result<SymTensor> {
        let n = self.subspace.ambient_dim();
        let mut acc = SymTensor::zero(n, self.rank);
        for (j, _) in &self.components {
            acc += &self.ambient_term(*j)?;
        }
        Ok(acc)
    }
}

pub fn decompose_invariant_tensor(t: &SymTensor, l: &Subspace) -> Result<InvariantDecomposition> {
    let n = t.dim();
    if l.ambient_dim() != n {
        return Err(MtlError::DimensionMismatch {
            expected: n,
            found: l.ambient_dim(),
        });
    }
    match l.dim() {
        0 => Err(MtlError::InvalidArgument("the subspace must be nonzero".into())),
        1 => Ok(split_on_line(t, l)?),
        _ => split_on_subspace(t, l),
    }
}

/// Exact split by powers of the coordinate along the line.
fn split_on_line(t: &SymTensor, l: &Subspace) -> Result<InvariantDecomposition> {
    let n = t.dim();
    let r = t.rank();
    let v = l.basis()[0].clone();
    let complement = l.orthogonal_complement();
    let mut frame = vec![v.clone()];
    frame.extend(complement.basis().iter().cloned());
    let s = t.in_frame(&frame)?;
    let mut groups: BTreeMap<usize, Vec<(Vec<usize>, f64)>> = BTreeMap::new();
    for (idx, c) in s.coeffs() {
        let j = idx.iter().take_while(|&&i| i == 0).count();
        let rest: Vec<usize> = idx[j..].iter().map(|i| i - 1).collect();
        groups.entry(j).or_default().push((rest, *c));
    }
    let components = (0..=r)
        .map(|j| {
            let entries = groups.remove(&j).unwrap_or_default();
            Ok((j, SymTensor::from_coeffs(n - 1, r - j, entries)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = InvariantDecomposition {
        subspace: l.clone(),
        complement,
        direction: Some(v),
        rank: t.rank(),
        components,
        residual: 0.0,
        invariance_residual: 0.0,
    };
    out.residual = relative_residual(&out.recompose()?, t);
    Ok(out)
}

/// `I + B (R - I) B^T` for an orthonormal basis `B` of `L` and `R` in SO(k).
fn rotation_on(l: &Subspace, r: &Rotation) -> Result<Rotation> {
    let n = l.ambient_dim();
    let b = l.basis();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| linalg::unit(n, i)).collect();
    for (row, mrow) in m.iter_mut().enumerate() {
        for (col, entry) in mrow.iter_mut().enumerate() {
            for (a, ba) in b.iter().enumerate() {
                for (c, bc) in b.iter().enumerate() {
                    let delta = if a == c { 1.0 } else { 0.0 };
                    *entry += ba[row] * (r.matrix()[a][c] - delta) * bc[col];
                }
            }
        }
    }
    Rotation::new(m)
}

fn split_on_subspace(t: &SymTensor, l: &Subspace) -> Result<InvariantDecomposition> {
    let n = t.dim();
    let r = t.rank();
    let k = l.dim();
    let mut rng = sampling::rng(0x5EED_1A7E);
    let mut invariance = 0.0f64;
    for _ in 0..INVARIANCE_PROBES {
        let theta = rotation_on(l, &sampling::random_rotation(&mut rng, k, true))?;
        invariance = invariance.max(relative_residual(&t.rotate(&theta)?, t));
    }
    if invariance > INVARIANCE_TOLERANCE {
        return Err(MtlError::InvarianceViolated { residual: invariance });
    }

    let complement = l.orthogonal_complement();
    let c = complement.dim();
    let q_l = SymTensor::metric_on_subspace(l);
    let mut columns: Vec<(usize, Vec<usize>, SymTensor)> = Vec::new();
    for j in 0..=r / 2 {
        let factor = q_l.power(j);
        let deg = r - 2 * j;
        if c == 0 && deg > 0 {
            continue;
        }
        for idx in multi_indices(c, deg) {
            let e = SymTensor::from_coeffs(c, deg, [(idx.clone(), 1.0)])?;
            columns.push((j, idx, factor.sym_product(&e.pullback(&complement)?)?));
        }
    }
    let rows = multi_indices(n, r);
    let row_of: BTreeMap<&Vec<usize>, usize> = rows.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let mut a = DMatrix::zeros(rows.len(), columns.len());
    for (ci, (_, _, col)) in columns.iter().enumerate() {
        for (idx, v) in col.coeffs() {
            a[(row_of[idx], ci)] = *v;
        }
    }
    let mut y = DVector::zeros(rows.len());
    for (idx, v) in t.coeffs() {
        y[row_of[idx]] = *v;
    }
    let x = if columns.is_empty() {
        DVector::zeros(0)
    } else {
        least_squares(&a, &y, 1e-12)?.x
    };
    let mut groups: BTreeMap<usize, Vec<(Vec<usize>, f64)>> = BTreeMap::new();
    for ((j, idx, _), coef) in columns.iter().zip(x.iter()) {
        groups.entry(*j).or_default().push((idx.clone(), *coef));
    }
    let components = (0..=r / 2)
        .filter(|j| c > 0 || r == 2 * j)
        .map(|j| {
            let entries = groups.remove(&j).unwrap_or_default();
            Ok((j, SymTensor::from_coeffs(c, r - 2 * j, entries)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = InvariantDecomposition {
        subspace: l.clone(),
        complement,
        direction: None,
        rank: t.rank(),
        components,
        residual: 0.0,
        invariance_residual: invariance,
    };
    out.residual = relative_residual(&out.recompose()?, t);
    Ok(out)
}
