//! Seeded random inputs: rotations, polytopes of every dimension, patches
//! and evaluation arguments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{MtlError, Result};
use crate::linalg;
use crate::patch::{ConeRegion, PositionRegion, SupportPatch};
use crate::polytope::Polytope;
use crate::spherical::ConeConstraint;
use crate::tensor::{Rotation, SymTensor};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(rng: &mut SampleRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn random_unit(rng: &mut SampleRng, n: usize) -> Vec<f64> {
    loop {
        if let Some(u) = linalg::normalize(&gaussian_vector(rng, n)) {
            return u;
        }
    }
}

pub fn uniform_vector(rng: &mut SampleRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Gram-Schmidt on a Gaussian matrix, with the determinant sign fixed.
pub fn random_rotation(rng: &mut SampleRng, n: usize, proper: bool) -> Rotation {
    loop {
        let cols: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vector(rng, n)).collect();
        if linalg::det(&cols).abs() < 1e-6 {
            continue;
        }
        if let Ok(r) = Rotation::from_columns_orthonormalized(&cols, proper) {
            return r;
        }
    }
}

/// Orthonormal basis of a random d-dimensional subspace of R^n.
pub fn random_frame(rng: &mut SampleRng, n: usize, d: usize) -> Vec<Vec<f64>> {
    loop {
        let v: Vec<Vec<f64>> = (0..d).map(|_| gaussian_vector(rng, n)).collect();
        let b = linalg::orthonormal_span(&v, 1e-3);
        if b.len() == d {
            return b;
        }
    }
}

fn hull_retrying(rng: &mut SampleRng, mut gen: impl FnMut(&mut SampleRng) -> Vec<Vec<f64>>, dim: usize) -> Result<Polytope> {
    for _ in 0..100 {
        match Polytope::new(&gen(rng)) {
            Ok(p) if p.intrinsic_dim() == dim && well_shaped(&p) => return Ok(p),
            Ok(_) | Err(MtlError::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(MtlError::Degenerate("could not sample a well-shaped polytope".into()))
}

/// Rejects slivers whose faces would make the numerics needlessly stiff.
fn well_shaped(p: &Polytope) -> bool {
    let v = p.vertices();
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            if linalg::norm(&linalg::sub(&v[i], &v[j])) < 0.05 {
                return false;
            }
        }
    }
    let d = p.intrinsic_dim();
    if d >= 2 {
        let (lo, hi) = p.bounding_box();
        let diam = linalg::norm(&linalg::sub(&hi, &lo));
        if p.volume() < 1e-3 * diam.powi(d as i32) {
            return false;
        }
    }
    true
}

/// Convex hull of a few random points, full-dimensional.
pub fn random_polytope(rng: &mut SampleRng, n: usize) -> Result<Polytope> {
    let count = rng.random_range(n + 1..=n + 4);
    hull_retrying(rng, |r| (0..count).map(|_| uniform_vector(r, n, -1.0, 1.0)).collect(), n)
}

/// Axis-parallel box with random corner and side lengths in [0.3, 2].
pub fn random_box(rng: &mut SampleRng, n: usize) -> Polytope {
    let lo = uniform_vector(rng, n, -1.0, 1.0);
    let hi: Vec<f64> = lo.iter().map(|l| l + rng.random_range(0.3..2.0)).collect();
    Polytope::axis_box(&lo, &hi).expect("boxes are well formed")
}

pub fn random_simplex(rng: &mut SampleRng, n: usize) -> Result<Polytope> {
    hull_retrying(rng, |r| (0..=n).map(|_| uniform_vector(r, n, -1.0, 1.0)).collect(), n)
}

/// A d-dimensional polytope inside a random affine d-plane of R^n.
pub fn random_flat(rng: &mut SampleRng, n: usize, d: usize) -> Result<Polytope> {
    if d == n {
        return random_polytope(rng, n);
    }
    let frame = random_frame(rng, n, d);
    let origin = uniform_vector(rng, n, -0.5, 0.5);
    let count = if d == 0 { 1 } else { rng.random_range(d + 1..=d + 3) };
    hull_retrying(
        rng,
        |r| {
            (0..count)
                .map(|_| {
                    let z = uniform_vector(r, d, -1.0, 1.0);
                    let mut x = origin.clone();
                    for (b, c) in frame.iter().zip(&z) {
                        x = linalg::axpy(&x, *c, b);
                    }
                    x
                })
                .collect()
        },
        d,
    )
}

/// Polytope of random dimension `0..=n` (full-dimensional half of the time).
pub fn random_polytope_any_dim(rng: &mut SampleRng, n: usize) -> Result<Polytope> {
    if rng.random_bool(0.5) {
        random_polytope(rng, n)
    } else {
        let d = rng.random_range(0..n);
        random_flat(rng, n, d)
    }
}

pub fn random_cone(rng: &mut SampleRng, n: usize) -> ConeRegion {
    let count = rng.random_range(1..=2);
    ConeRegion::Halfspaces(
        (0..count)
            .map(|_| ConeConstraint {
                normal: random_unit(rng, n),
                strict: rng.random_bool(0.5),
            })
            .collect(),
    )
}

/// Random half-open box that overlaps the bounding box of `p`.
pub fn random_position_box(rng: &mut SampleRng, p: &Polytope) -> PositionRegion {
    let (lo, hi) = p.bounding_box();
    let n = lo.len();
    let mut min = Vec::with_capacity(n);
    let mut max = Vec::with_capacity(n);
    for i in 0..n {
        let w = (hi[i] - lo[i]).max(0.2);
        let c = rng.random_range(lo[i] - 0.1 * w..hi[i] + 0.1 * w);
        let h = rng.random_range(0.3 * w..0.9 * w);
        min.push(c - h);
        max.push(c + h);
    }
    PositionRegion::Box { min, max }
}

/// A product patch `beta x omega` around `p` (either factor may be "all").
pub fn random_patch(rng: &mut SampleRng, p: &Polytope) -> SupportPatch {
    let n = p.ambient_dim();
    let position = if rng.random_bool(0.25) {
        PositionRegion::All
    } else {
        random_position_box(rng, p)
    };
    let normal = if rng.random_bool(0.3) {
        ConeRegion::All
    } else {
        random_cone(rng, n)
    };
    SupportPatch::single(position, normal)
}

/// `count` tuples of `p` random argument vectors.
pub fn argument_tuples(rng: &mut SampleRng, n: usize, p: usize, count: usize) -> Vec<Vec<Vec<f64>>> {
    (0..count)
        .map(|_| (0..p).map(|_| uniform_vector(rng, n, -1.0, 1.0)).collect())
        .collect()
}

/// Values of `t` on each argument tuple.
pub fn flatten(t: &SymTensor, tuples: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
    tuples.iter().map(|a| t.evaluate(a)).collect()
}
