//! Thin SVD through Householder QR followed by one-sided Jacobi on the
//! triangular factor. nalgebra's bidiagonal SVD loses accuracy on some
//! exactly rank-deficient designs (the reconstruction error can reach 1e-3),
//! which is the common case for the dependent spanning families fitted here.

use nalgebra::{DMatrix, DVector};

pub(crate) struct ThinSvd {
    /// Left singular vectors as columns, `m x n`.
    pub u: DMatrix<f64>,
    /// Singular values, largest first.
    pub sigma: Vec<f64>,
    /// Right singular vectors as columns, `n x n`.
    pub v: DMatrix<f64>,
}

const MAX_SWEEPS: usize = 60;

pub(crate) fn thin_svd(a: &DMatrix<f64>) -> ThinSvd {
    let (m, n) = a.shape();
    let (q, mut b) = if m > n {
        let qr = a.clone().qr();
        (Some(qr.q()), qr.r())
    } else {
        (None, a.clone())
    };
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = b.column(i).norm_squared();
                let beta = b.column(j).norm_squared();
                let gamma = b.column(i).dot(&b.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut b, i, j, c, s);
                rotate_columns(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|i| b.column(i).norm()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let rows = b.nrows();
    let mut ub = DMatrix::zeros(rows, n);
    let mut vs = DMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        let s = norms[i];
        if s > 0.0 {
            ub.set_column(k, &(b.column(i) / s));
        }
        vs.set_column(k, &v.column(i));
        sigma.push(s);
    }
    let u = match q {
        Some(q) => q * ub,
        None => ub,
    };
    ThinSvd { u, sigma, v: vs }
}

fn rotate_columns(m: &mut DMatrix<f64>, i: usize, j: usize, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let (x, y) = (m[(r, i)], m[(r, j)]);
        m[(r, i)] = c * x - s * y;
        m[(r, j)] = s * x + c * y;
    }
}

impl ThinSvd {
    /// Minimum-norm least-squares solution ignoring singular values at or
    /// below `cutoff`.
    pub fn solve(&self, y: &DVector<f64>, cutoff: f64) -> DVector<f64> {
        let n = self.v.nrows();
        let mut x = DVector::zeros(n);
        for (k, &s) in self.sigma.iter().enumerate() {
            if s > cutoff && s > 0.0 {
                let coef = self.u.column(k).dot(y) / s;
                x += self.v.column(k) * coef;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_a_rank_deficient_matrix() {
        // third column = first - second
        let a = DMatrix::from_fn(40, 3, |r, c| {
            let x = (r as f64 * 0.37).sin();
            let y = (r as f64 * 1.3).cos();
            [x, y, x - y][c]
        });
        let svd = thin_svd(&a);
        assert!(svd.sigma[2] < 1e-14 * svd.sigma[0]);
        let rebuilt = &svd.u * DMatrix::from_diagonal(&DVector::from_vec(svd.sigma.clone())) * svd.v.transpose();
        assert!((rebuilt - &a).norm() < 1e-13);
        let y = a.column(0) * 2.0 + a.column(1);
        let x = svd.solve(&y.into_owned(), 1e-10 * svd.sigma[0]);
        assert!((&a * &x - a.column(0) * 2.0 - a.column(1)).norm() < 1e-13);
    }

    #[test]
    fn wide_matrices() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let svd = thin_svd(&a);
        let rebuilt = &svd.u * DMatrix::from_diagonal(&DVector::from_vec(svd.sigma.clone())) * svd.v.transpose();
        assert!((rebuilt - &a).norm() < 1e-13);
        assert!(svd.sigma[2] < 1e-14);
    }
}
