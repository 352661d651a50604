//! Small dense vector helpers for the low dimensions (n <= 4) used here.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; anything that needs a real
//! factorization (SVD, least squares) lives in the analysis layer.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn normalize(a: &[f64]) -> Option<Vec<f64>> {
    let l = norm(a);
    if l > 0.0 && l.is_finite() {
        Some(scale(a, 1.0 / l))
    } else {
        None
    }
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

pub fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Determinant of a small square matrix given as rows (partial pivoting LU).
pub fn det(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    if n == 0 {
        return 1.0;
    }
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c];
        let (top, rest) = m.split_at_mut(c + 1);
        let pivot = &top[c];
        for row in rest {
            let f = row[c] / pivot[c];
            if f != 0.0 {
                for (x, y) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= f * y;
                }
            }
        }
    }
    d
}

/// Generalized cross product: for `dim - 1` row vectors in R^dim returns the
/// cofactor vector orthogonal to all of them (zero if they are dependent).
pub fn null_vector(rows: &[Vec<f64>], dim: usize) -> Vec<f64> {
    debug_assert_eq!(rows.len() + 1, dim);
    if dim == 1 {
        return vec![1.0];
    }
    (0..dim)
        .map(|i| {
            let minor: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != i)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * det(&minor)
        })
        .collect()
}

/// Orthonormal basis of the span of `vectors`, dropping directions whose
/// residual norm falls below `tol`. Largest residual is picked first, so the
/// result is stable for nearly dependent input.
pub fn orthonormal_span(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut residual: Vec<Vec<f64>> = vectors.to_vec();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    loop {
        let best = residual
            .iter()
            .enumerate()
            .map(|(i, v)| (i, norm(v)))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((i, l)) = best else { break };
        if l <= tol {
            break;
        }
        let mut b = scale(&residual[i], 1.0 / l);
        // second pass against the existing basis
        for q in &basis {
            let c = dot(&b, q);
            b = axpy(&b, -c, q);
        }
        let b = normalize(&b).unwrap();
        for v in residual.iter_mut() {
            let c = dot(v, &b);
            *v = axpy(v, -c, &b);
        }
        residual.swap_remove(i);
        basis.push(b);
    }
    basis
}

/// Completes an orthonormal family to an orthonormal basis of R^n and
/// returns only the added vectors.
pub fn orthogonal_complement(basis: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = basis.to_vec();
    let mut out = Vec::new();
    for i in 0..n {
        if all.len() == n {
            break;
        }
        let mut v = unit(n, i);
        for _ in 0..2 {
            for q in &all {
                let c = dot(&v, q);
                v = axpy(&v, -c, q);
            }
        }
        if norm(&v) > 1e-6 {
            let v = normalize(&v).unwrap();
            all.push(v.clone());
            out.push(v);
        }
    }
    out
}

/// Binomial coefficient as f64 (exact for the small arguments used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// All k-element subsets of 0..m in lexicographic order.
pub fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + m - k) else {
            return out;
        };
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_null_vector() {
        let m = vec![vec![2.0, 0.0, 1.0], vec![1.0, 3.0, 0.0], vec![0.0, 1.0, 1.0]];
        assert!((det(&m) - 7.0).abs() < 1e-12);
        let v = null_vector(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]], 3);
        assert_eq!(v, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(
            combinations(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn complement_is_orthonormal() {
        let b = orthonormal_span(&[vec![1.0, 1.0, 0.0]], 1e-12);
        let c = orthogonal_complement(&b, 3);
        assert_eq!(c.len(), 2);
        for v in &c {
            assert!((norm(v) - 1.0).abs() < 1e-14);
            assert!(dot(v, &b[0]).abs() < 1e-14);
        }
        assert!(dot(&c[0], &c[1]).abs() < 1e-14);
    }
}
