//! Symmetric tensors on R^n in the homogeneous-polynomial model.
//!
//! A symmetric p-tensor `T` is stored through the coefficients of its
//! associated polynomial `p_T(y) = sum t_I y_{i_1} ... y_{i_p}` over sorted
//! multi-indices `I`. The symmetric product is polynomial multiplication and
//! evaluation on `p` vectors is the averaged polarization, so that
//! `T(y, ..., y) = p_T(y)` and `(S T)(y, ..., y) = S(y, ...) T(y, ...)`.
//!
//! Multi-indices are 0-based in memory; the JSON form uses 1-based indices.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{MtlError, Result};
use crate::linalg::{self, dot};

/// Sorted, 0-based multi-index.
pub type MultiIndex = Vec<usize>;

const ORTHO_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor {
    dim: usize,
    rank: usize,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl SymTensor {
    pub fn zero(dim: usize, rank: usize) -> Self {
        Self {
            dim,
            rank,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut t = Self::zero(dim, 0);
        if value != 0.0 {
            t.coeffs.insert(Vec::new(), value);
        }
        t
    }

    /// Rank-1 tensor identified with the vector `x`.
    pub fn vector(x: &[f64]) -> Self {
        let mut t = Self::zero(x.len(), 1);
        for (i, &v) in x.iter().enumerate() {
            if v != 0.0 {
                t.coeffs.insert(vec![i], v);
            }
        }
        t
    }

    /// Builds a tensor from (multi-index, coefficient) pairs. Indices are
    /// sorted here; repeated keys are summed.
    pub fn from_coeffs<I>(dim: usize, rank: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut t = Self::zero(dim, rank);
        for (mut idx, c) in entries {
            if idx.len() != rank {
                return Err(MtlError::MalformedIndex(format!(
                    "{idx:?} has length {} but rank is {rank}",
                    idx.len()
                )));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(MtlError::MalformedIndex(format!(
                    "index {bad} out of range for dimension {dim}"
                )));
            }
            idx.sort_unstable();
            *t.coeffs.entry(idx).or_insert(0.0) += c;
        }
        t.prune();
        Ok(t)
    }

    /// Inverse of [`SymTensor::to_polynomial`]. Unlike `from_coeffs` this
    /// requires every index to be sorted already.
    pub fn from_polynomial(coeffs: &[(MultiIndex, f64)], dim: usize, rank: usize) -> Result<Self> {
        if let Some((idx, _)) = coeffs.iter().find(|(i, _)| i.windows(2).any(|w| w[0] > w[1])) {
            return Err(MtlError::MalformedIndex(format!("{idx:?} is not sorted")));
        }
        Self::from_coeffs(dim, rank, coeffs.iter().cloned())
    }

    pub fn to_polynomial(&self) -> Vec<(MultiIndex, f64)> {
        self.coeffs.iter().map(|(k, v)| (k.clone(), *v)).collect()
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, v| *v != 0.0);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, f64> {
        &self.coeffs
    }

    pub fn coeff(&self, idx: &[usize]) -> f64 {
        let mut k = idx.to_vec();
        k.sort_unstable();
        self.coeffs.get(&k).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Value of a rank-0 tensor (0 for the empty mapping).
    pub fn scalar_value(&self) -> f64 {
        self.coeffs.get(&Vec::new()).copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coefficient-wise max distance; tensors of different shape are
    /// infinitely far apart.
    pub fn max_abs_diff(&self, other: &SymTensor) -> f64 {
        if self.dim != other.dim || self.rank != other.rank {
            return f64::INFINITY;
        }
        let mut m: f64 = 0.0;
        for (k, v) in &self.coeffs {
            m = m.max((v - other.coeffs.get(k).copied().unwrap_or(0.0)).abs());
        }
        for (k, v) in &other.coeffs {
            if !self.coeffs.contains_key(k) {
                m = m.max(v.abs());
            }
        }
        m
    }

    pub fn approx_eq(&self, other: &SymTensor, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn scaled(&self, s: f64) -> SymTensor {
        let mut t = self.clone();
        for v in t.coeffs.values_mut() {
            *v *= s;
        }
        t.prune();
        t
    }

    pub fn try_add(&self, other: &SymTensor) -> Result<SymTensor> {
        self.check_same_shape(other)?;
        let mut t = self.clone();
        t.add_assign_unchecked(other, 1.0);
        Ok(t)
    }

    fn add_assign_unchecked(&mut self, other: &SymTensor, s: f64) {
        for (k, v) in &other.coeffs {
            *self.coeffs.entry(k.clone()).or_insert(0.0) += s * v;
        }
        self.prune();
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &SymTensor, s: f64) -> Result<()> {
        self.check_same_shape(other)?;
        self.add_assign_unchecked(other, s);
        Ok(())
    }

    fn check_same_shape(&self, other: &SymTensor) -> Result<()> {
        if self.dim != other.dim {
            return Err(MtlError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.rank != other.rank {
            return Err(MtlError::InvalidArgument(format!(
                "rank mismatch: {} vs {}",
                self.rank, other.rank
            )));
        }
        Ok(())
    }

    /// Symmetric tensor product: the polynomial of the result is `p_S * p_T`.
    pub fn sym_product(&self, other: &SymTensor) -> Result<SymTensor> {
        if self.dim != other.dim {
            return Err(MtlError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(self.product_unchecked(other))
    }

    fn product_unchecked(&self, other: &SymTensor) -> SymTensor {
        let mut out = SymTensor::zero(self.dim, self.rank + other.rank);
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                let k = merge_sorted(a, b);
                *out.coeffs.entry(k).or_insert(0.0) += x * y;
            }
        }
        out.prune();
        out
    }

    /// `x^r`, the tensor with polynomial `<x, y>^r`.
    pub fn vector_power(x: &[f64], r: usize) -> SymTensor {
        let n = x.len();
        let mut out = SymTensor::zero(n, r);
        // multinomial expansion over exponent vectors
        for idx in multi_indices(n, r) {
            let alpha = exponents(&idx, n);
            let mut c = multinomial(&alpha);
            for (i, &a) in alpha.iter().enumerate() {
                c *= x[i].powi(a as i32);
            }
            if c != 0.0 {
                out.coeffs.insert(idx, c);
            }
        }
        out
    }

    /// Metric tensor `Q` on R^n.
    pub fn metric(n: usize) -> SymTensor {
        let mut t = SymTensor::zero(n, 2);
        for i in 0..n {
            t.coeffs.insert(vec![i, i], 1.0);
        }
        t
    }

    /// `Q_L`, the metric composed with the orthogonal projection onto `L`.
    pub fn metric_on_subspace(l: &Subspace) -> SymTensor {
        let mut t = SymTensor::zero(l.ambient_dim(), 2);
        for b in l.basis() {
            t.add_assign_unchecked(&SymTensor::vector_power(b, 2), 1.0);
        }
        t
    }

    /// `Q^m`
    pub fn metric_power(n: usize, m: usize) -> SymTensor {
        let q = SymTensor::metric(n);
        let mut out = SymTensor::scalar(n, 1.0);
        for _ in 0..m {
            out = out.product_unchecked(&q);
        }
        out
    }

    /// `self^m` under the symmetric product.
    pub fn power(&self, m: usize) -> SymTensor {
        let mut out = SymTensor::scalar(self.dim, 1.0);
        for _ in 0..m {
            out = out.product_unchecked(self);
        }
        out
    }

    /// Substitutes variable `i` of the polynomial by the linear form
    /// `<forms[i], y>`, producing a tensor on R^{out_dim}.
    fn compose_linear(&self, forms: &[Vec<f64>], out_dim: usize) -> SymTensor {
        debug_assert_eq!(forms.len(), self.dim);
        let mut pow_cache: BTreeMap<(usize, usize), SymTensor> = BTreeMap::new();
        let mut out = SymTensor::zero(out_dim, self.rank);
        for (idx, c) in &self.coeffs {
            let alpha = exponents(idx, self.dim);
            let mut term = SymTensor::scalar(out_dim, *c);
            for (i, &a) in alpha.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let p = pow_cache
                    .entry((i, a))
                    .or_insert_with(|| SymTensor::vector_power(&forms[i], a));
                term = term.product_unchecked(p);
            }
            out.add_assign_unchecked(&term, 1.0);
        }
        out
    }

    /// `(theta T)(x_1..x_p) = T(theta^{-1} x_1, ..)`; improper maps allowed.
    pub fn rotate(&self, theta: &Rotation) -> Result<SymTensor> {
        if theta.dim() != self.dim {
            return Err(MtlError::DimensionMismatch {
                expected: self.dim,
                found: theta.dim(),
            });
        }
        // y_i -> (theta^{-1} y)_i = <theta e_i, y>
        let forms: Vec<Vec<f64>> = (0..self.dim).map(|i| theta.column(i)).collect();
        Ok(self.compose_linear(&forms, self.dim))
    }

    /// `pi_L^* T` for a tensor given in the coordinates of `L`'s basis.
    pub fn pullback(&self, l: &Subspace) -> Result<SymTensor> {
        if l.dim() != self.dim {
            return Err(MtlError::DimensionMismatch {
                expected: l.dim(),
                found: self.dim,
            });
        }
        Ok(self.compose_linear(l.basis(), l.ambient_dim()))
    }

    /// Re-expresses the tensor in the coordinates of an orthonormal frame:
    /// the result `S` satisfies `p_S(z) = p_T(sum z_j f_j)`.
    pub fn in_frame(&self, frame: &[Vec<f64>]) -> Result<SymTensor> {
        if frame.len() != self.dim || frame.iter().any(|f| f.len() != self.dim) {
            return Err(MtlError::DimensionMismatch {
                expected: self.dim,
                found: frame.len(),
            });
        }
        // y_i = sum_j f_j[i] z_j
        let forms: Vec<Vec<f64>> = (0..self.dim)
            .map(|i| frame.iter().map(|f| f[i]).collect())
            .collect();
        Ok(self.compose_linear(&forms, self.dim))
    }

    /// Value of the associated polynomial at `y`.
    pub fn polynomial_value(&self, y: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .map(|(idx, c)| c * idx.iter().map(|&i| y[i]).product::<f64>())
            .sum()
    }

    /// Fully symmetric multilinear form obtained by averaged polarization.
    pub fn evaluate(&self, args: &[Vec<f64>]) -> Result<f64> {
        if args.len() != self.rank {
            return Err(MtlError::ArityMismatch {
                rank: self.rank,
                args: args.len(),
            });
        }
        if let Some(a) = args.iter().find(|a| a.len() != self.dim) {
            return Err(MtlError::DimensionMismatch {
                expected: self.dim,
                found: a.len(),
            });
        }
        let p = self.rank;
        let norm = linalg::factorial(p);
        let mut dp = vec![0.0; 1 << p];
        let mut total = 0.0;
        for (idx, c) in &self.coeffs {
            // permanent of M[row][col] = args[col][idx[row]] by subset DP
            dp.iter_mut().for_each(|v| *v = 0.0);
            dp[0] = 1.0;
            for mask in 0usize..(1 << p) {
                let v = dp[mask];
                if v == 0.0 {
                    continue;
                }
                let row = mask.count_ones() as usize;
                if row == p {
                    continue;
                }
                for (col, a) in args.iter().enumerate() {
                    if mask & (1 << col) == 0 {
                        dp[mask | (1 << col)] += v * a[idx[row]];
                    }
                }
            }
            total += c * dp[(1 << p) - 1];
        }
        Ok(total / norm)
    }
}

impl Add for &SymTensor {
    type Output = SymTensor;
    fn add(self, rhs: &SymTensor) -> SymTensor {
        self.try_add(rhs).expect("tensor shapes must agree")
    }
}

impl Sub for &SymTensor {
    type Output = SymTensor;
    fn sub(self, rhs: &SymTensor) -> SymTensor {
        let mut t = self.clone();
        t.add_scaled(rhs, -1.0).expect("tensor shapes must agree");
        t
    }
}

impl Neg for &SymTensor {
    type Output = SymTensor;
    fn neg(self) -> SymTensor {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for &SymTensor {
    type Output = SymTensor;
    fn mul(self, rhs: f64) -> SymTensor {
        self.scaled(rhs)
    }
}

impl AddAssign<&SymTensor> for SymTensor {
    fn add_assign(&mut self, rhs: &SymTensor) {
        self.add_scaled(rhs, 1.0).expect("tensor shapes must agree");
    }
}

fn merge_sorted(a: &[usize], b: &[usize]) -> MultiIndex {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// All sorted multi-indices of length `p` over `0..n`, lexicographic.
pub fn multi_indices(n: usize, p: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    if n == 0 {
        if p == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0usize; p];
    loop {
        out.push(cur.clone());
        let Some(i) = (0..p).rev().find(|&i| cur[i] + 1 < n) else {
            return out;
        };
        let v = cur[i] + 1;
        for c in cur.iter_mut().skip(i) {
            *c = v;
        }
    }
}

/// Exponent vector of a sorted multi-index.
pub fn exponents(idx: &[usize], n: usize) -> Vec<usize> {
    let mut a = vec![0; n];
    for &i in idx {
        a[i] += 1;
    }
    a
}

/// Multi-index from an exponent vector.
pub fn from_exponents(alpha: &[usize]) -> MultiIndex {
    alpha
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| std::iter::repeat_n(i, a))
        .collect()
}

/// `|alpha|! / prod alpha_i!`
pub fn multinomial(alpha: &[usize]) -> f64 {
    let total: usize = alpha.iter().sum();
    let mut r = linalg::factorial(total);
    for &a in alpha {
        r /= linalg::factorial(a);
    }
    r.round()
}

/// Linear subspace of R^n with an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<f64>>,
}

impl Subspace {
    /// Wraps a basis that is already orthonormal (checked at 1e-12).
    pub fn from_orthonormal(ambient_dim: usize, basis: Vec<Vec<f64>>) -> Result<Self> {
        if basis.len() > ambient_dim {
            return Err(MtlError::InvalidArgument(format!(
                "{} basis vectors in R^{ambient_dim}",
                basis.len()
            )));
        }
        for (i, b) in basis.iter().enumerate() {
            if b.len() != ambient_dim {
                return Err(MtlError::DimensionMismatch {
                    expected: ambient_dim,
                    found: b.len(),
                });
            }
            for (j, c) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot(b, c) - target).abs() > ORTHO_TOL {
                    return Err(MtlError::InvalidArgument(
                        "subspace basis is not orthonormal".into(),
                    ));
                }
            }
        }
        Ok(Self { ambient_dim, basis })
    }

    /// Span of arbitrary vectors; directions shorter than `tol` are dropped.
    pub fn span(ambient_dim: usize, vectors: &[Vec<f64>], tol: f64) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(MtlError::DimensionMismatch {
                expected: ambient_dim,
                found: v.len(),
            });
        }
        Ok(Self {
            ambient_dim,
            basis: linalg::orthonormal_span(vectors, tol),
        })
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: (0..ambient_dim).map(|i| linalg::unit(ambient_dim, i)).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn orthogonal_complement(&self) -> Subspace {
        Subspace {
            ambient_dim: self.ambient_dim,
            basis: linalg::orthogonal_complement(&self.basis, self.ambient_dim),
        }
    }

    /// Coordinates of `x` in the basis (i.e. of its projection).
    pub fn coordinates(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| dot(b, x)).collect()
    }

    pub fn embed(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.ambient_dim];
        for (b, &c) in self.basis.iter().zip(z) {
            for (o, v) in out.iter_mut().zip(b) {
                *o += c * v;
            }
        }
        out
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.embed(&self.coordinates(x))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        linalg::norm(&linalg::sub(x, &self.project(x))) <= tol
    }

    pub fn transform(&self, theta: &Rotation) -> Subspace {
        Subspace {
            ambient_dim: self.ambient_dim,
            basis: self.basis.iter().map(|b| theta.apply(b)).collect(),
        }
    }
}

/// Orthogonal map of R^n (proper or improper).
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    /// row-major
    matrix: Vec<Vec<f64>>,
    det: f64,
}

impl Rotation {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) {
            return Err(MtlError::InvalidArgument("matrix is not square".into()));
        }
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|k| matrix[k][i] * matrix[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (s - target).abs() > ORTHO_TOL {
                    return Err(MtlError::InvalidArgument(format!(
                        "matrix is not orthogonal (entry ({i},{j}) of M^T M is {s})"
                    )));
                }
            }
        }
        let d = linalg::det(&matrix);
        let det = if d > 0.0 { 1.0 } else { -1.0 };
        if (d - det).abs() > ORTHO_TOL {
            return Err(MtlError::InvalidArgument(format!("determinant {d} is not +-1")));
        }
        Ok(Self { matrix, det })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: (0..n).map(|i| linalg::unit(n, i)).collect(),
            det: 1.0,
        }
    }

    /// Counterclockwise rotation of the plane by `angle`.
    pub fn plane(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            matrix: vec![vec![c, -s], vec![s, c]],
            det: 1.0,
        }
    }

    /// Reflection `x -> x - 2 <a, x> a` across the hyperplane orthogonal to `a`.
    pub fn reflection(a: &[f64]) -> Result<Self> {
        let a = linalg::normalize(a)
            .ok_or_else(|| MtlError::InvalidArgument("zero reflection normal".into()))?;
        let n = a.len();
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 1.0 } else { 0.0 } - 2.0 * a[i] * a[j])
                    .collect()
            })
            .collect();
        Ok(Self { matrix, det: -1.0 })
    }

    /// Orthonormalizes the columns of an arbitrary nonsingular matrix
    /// (Gram-Schmidt), then fixes the determinant sign if `proper`.
    pub fn from_columns_orthonormalized(cols: &[Vec<f64>], proper: bool) -> Result<Self> {
        let n = cols.len();
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
        for c in cols {
            let mut v = c.clone();
            for _ in 0..2 {
                for b in &q {
                    let d = dot(&v, b);
                    v = linalg::axpy(&v, -d, b);
                }
            }
            let v = linalg::normalize(&v)
                .filter(|_| linalg::norm(c) > 0.0)
                .ok_or_else(|| MtlError::Degenerate("singular matrix".into()))?;
            q.push(v);
        }
        let mut matrix: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| q[j][i]).collect()).collect();
        let d = linalg::det(&matrix);
        if (d > 0.0) != proper {
            for row in matrix.iter_mut() {
                row[0] = -row[0];
            }
        }
        Rotation::new(matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn determinant(&self) -> f64 {
        self.det
    }

    pub fn is_proper(&self) -> bool {
        self.det > 0.0
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.matrix.iter().map(|r| r[j]).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.iter().map(|r| dot(r, x)).collect()
    }

    pub fn inverse(&self) -> Rotation {
        let n = self.dim();
        Rotation {
            matrix: (0..n).map(|i| self.column(i)).collect(),
            det: self.det,
        }
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let n = self.dim();
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum())
                    .collect()
            })
            .collect();
        Rotation {
            matrix,
            det: self.det * other.det,
        }
    }
}
