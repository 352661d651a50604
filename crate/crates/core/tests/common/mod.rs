//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use mtl_core::tensor::{Rotation, Subspace};
use mtl_core::SymTensor;

/// `e_k(a_1, ..., a_n)`, the intrinsic volume `V_k` of a box with sides `a`.
pub fn elementary_symmetric(a: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; a.len() + 1];
    e[0] = 1.0;
    for &x in a {
        for j in (1..e.len()).rev() {
            e[j] += e[j - 1] * x;
        }
    }
    e[k]
}

/// `int_a^b cos^i(t) sin^j(t) dt` through the Fourier expansion of the
/// integrand.
pub fn trig_monomial_integral(i: usize, j: usize, a: f64, b: f64) -> f64 {
    // cos = (z + 1/z)/2, sin = (z - 1/z)/(2i); collect coefficients of z^m
    let deg = i + j;
    let mut re = vec![0.0; 2 * deg + 1];
    let mut im = vec![0.0; 2 * deg + 1];
    re[deg] = 1.0;
    let mul = |re: &mut Vec<f64>, im: &mut Vec<f64>, c_plus: (f64, f64), c_minus: (f64, f64)| {
        let mut nr = vec![0.0; re.len()];
        let mut ni = vec![0.0; im.len()];
        for m in 0..re.len() {
            let (r, q) = (re[m], im[m]);
            if r == 0.0 && q == 0.0 {
                continue;
            }
            if m + 1 < re.len() {
                nr[m + 1] += r * c_plus.0 - q * c_plus.1;
                ni[m + 1] += r * c_plus.1 + q * c_plus.0;
            }
            if m >= 1 {
                nr[m - 1] += r * c_minus.0 - q * c_minus.1;
                ni[m - 1] += r * c_minus.1 + q * c_minus.0;
            }
        }
        *re = nr;
        *im = ni;
    };
    for _ in 0..i {
        mul(&mut re, &mut im, (0.5, 0.0), (0.5, 0.0));
    }
    for _ in 0..j {
        // 1/(2i) = -i/2
        mul(&mut re, &mut im, (0.0, -0.5), (0.0, 0.5));
    }
    let mut total = 0.0;
    for m in 0..re.len() {
        let k = m as f64 - deg as f64;
        let (r, q) = (re[m], im[m]);
        if k == 0.0 {
            total += r * (b - a);
        } else {
            // int e^{ikt} = (e^{ikb} - e^{ika}) / (ik); keep the real part
            let (sb, cb) = (k * b).sin_cos();
            let (sa, ca) = (k * a).sin_cos();
            let (dr, di) = ((sb - sa) / k, -(cb - ca) / k);
            total += r * dr - q * di;
        }
    }
    total
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

/// Closure of the generators under multiplication.
fn generate_group(gens: &[Vec<Vec<f64>>]) -> Vec<Vec<Vec<f64>>> {
    let n = gens[0].len();
    let id: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut group = vec![id];
    let mut frontier = group.clone();
    let close = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| {
        a.iter().zip(b).all(|(r, s)| r.iter().zip(s).all(|(x, y)| (x - y).abs() < 1e-9))
    };
    while let Some(g) = frontier.pop() {
        for h in gens {
            let gh = mat_mul(&g, h);
            if !group.iter().any(|e| close(e, &gh)) {
                group.push(gh.clone());
                frontier.push(gh);
            }
            assert!(group.len() <= 200, "group did not close");
        }
    }
    group
}

/// Rotations by multiples of `2 pi / order` in the plane.
pub fn cyclic_group(order: usize) -> Vec<Vec<Vec<f64>>> {
    (0..order)
        .map(|i| {
            let (s, c) = (2.0 * std::f64::consts::PI * i as f64 / order as f64).sin_cos();
            vec![vec![c, -s], vec![s, c]]
        })
        .collect()
}

/// The 60 rotations of the icosahedron.
pub fn icosahedral_group() -> Vec<Vec<Vec<f64>>> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let cyc = vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
    let flip = vec![vec![1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, -1.0]];
    // rotation by 2 pi / 5 about the vertex axis (0, 1, phi)
    let norm = (1.0 + phi * phi).sqrt();
    let axis = [0.0, 1.0 / norm, phi / norm];
    let (s, c) = (2.0 * std::f64::consts::PI / 5.0).sin_cos();
    let mut five = vec![vec![0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let cross = match (i, j) {
                (0, 1) => -axis[2],
                (0, 2) => axis[1],
                (1, 0) => axis[2],
                (1, 2) => -axis[0],
                (2, 0) => -axis[1],
                (2, 1) => axis[0],
                _ => 0.0,
            };
            five[i][j] = c * f64::from(u8::from(i == j)) + s * cross + (1.0 - c) * axis[i] * axis[j];
        }
    }
    let g = generate_group(&[cyc, flip, five]);
    assert_eq!(g.len(), 60);
    g
}

/// Embeds a rotation of `L` (in the coordinates of its basis) into R^n,
/// fixing `L^perp` pointwise.
pub fn embed_rotation(l: &Subspace, r: &[Vec<f64>]) -> Rotation {
    let n = l.ambient_dim();
    let b = l.basis();
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for row in 0..n {
        for col in 0..n {
            for (a, ba) in b.iter().enumerate() {
                for (c, bc) in b.iter().enumerate() {
                    let delta = f64::from(u8::from(a == c));
                    m[row][col] += ba[row] * (r[a][c] - delta) * bc[col];
                }
            }
        }
    }
    Rotation::new(m).unwrap()
}

/// Average of `theta T` over a finite group acting on `L`.
pub fn group_average(t: &SymTensor, l: &Subspace, group: &[Vec<Vec<f64>>]) -> SymTensor {
    let mut acc = SymTensor::zero(t.dim(), t.rank());
    for g in group {
        acc += &t.rotate(&embed_rotation(l, g)).unwrap();
    }
    acc.scaled(1.0 / group.len() as f64)
}
