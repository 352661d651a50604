//! Decomposition of a valuation on the basis, and rank certificates for the
//! basis itself.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::sampling::{self, SampleRng};
use super::svd::thin_svd;
use super::ValuationOracle;
use crate::error::{MtlError, Result};
use crate::patch::SupportPatch;
use crate::polytope::Polytope;
use crate::valuations::{enumerate_basis, BasisDescriptor};

/// Designs with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e10;
/// Relative singular value cutoff for numeric rank.
pub const RANK_CUTOFF: f64 = 1e-8;

pub(crate) struct LeastSquares {
    pub x: DVector<f64>,
    pub rank: usize,
    pub condition: f64,
}

/// Minimum-norm least squares on column-normalized data, discarding singular
/// values below `rel_cutoff * sigma_max`.
pub(crate) fn least_squares(a: &DMatrix<f64>, y: &DVector<f64>, rel_cutoff: f64) -> Result<LeastSquares> {
    let (scaled, scales) = normalize_columns(a);
    let svd = thin_svd(&scaled);
    let smax = svd.sigma.first().copied().unwrap_or(0.0);
    let smin = svd.sigma.last().copied().unwrap_or(0.0);
    let cutoff = rel_cutoff * smax;
    let rank = svd.sigma.iter().filter(|s| **s > cutoff && **s > 0.0).count();
    let z = svd.solve(y, cutoff);
    let x = DVector::from_iterator(z.len(), z.iter().zip(&scales).map(|(v, s)| v / s));
    Ok(LeastSquares {
        x,
        rank,
        condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
    })
}

fn normalize_columns(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let mut out = a.clone();
    let mut scales = Vec::with_capacity(a.ncols());
    for mut c in out.column_iter_mut() {
        let s = c.norm();
        let s = if s > 0.0 { s } else { 1.0 };
        c /= s;
        scales.push(s);
    }
    (out, scales)
}

/// Evaluates `f` on every item, spreading the work over the available cores.
fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    if threads <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| {
                let f = &f;
                scope.spawn(move || c.iter().map(f).collect::<Vec<R>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sample evaluation panicked"))
            .collect()
    })
}

#[derive(Clone, Debug)]
pub struct SampleSpec {
    pub seed: u64,
    /// Number of (polytope, patch) samples; `None` picks a size from the
    /// number of columns.
    pub samples: Option<usize>,
    pub tuples_per_sample: usize,
}

impl SampleSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            samples: None,
            tuples_per_sample: 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DesignSample {
    pub polytope: Polytope,
    pub patch: SupportPatch,
    pub tuples: Vec<Vec<Vec<f64>>>,
}

/// Basis values over a seeded sample set; one row per (sample, tuple).
#[derive(Clone, Debug)]
pub struct Design {
    pub n: usize,
    pub p: usize,
    pub basis: Vec<BasisDescriptor>,
    pub samples: Vec<DesignSample>,
    pub matrix: DMatrix<f64>,
    pub row_sample: Vec<usize>,
}

/// Flat polytopes of every dimension and full-dimensional ones, each with a
/// random product patch.
fn draw_samples(rng: &mut SampleRng, n: usize, p: usize, count: usize, tuples: usize) -> Result<Vec<DesignSample>> {
    let mut dims: Vec<usize> = (0..count).map(|i| i % (n + 2)).collect();
    dims.shuffle(rng);
    let mut out = Vec::with_capacity(count);
    for d in dims {
        let polytope = if d == n + 1 {
            sampling::random_box(rng, n)
        } else {
            sampling::random_flat(rng, n, d)?
        };
        let patch = sampling::random_patch(rng, &polytope);
        let t = if p == 0 { 1 } else { tuples.max(1) };
        let tuples = sampling::argument_tuples(rng, n, p, t);
        out.push(DesignSample { polytope, patch, tuples });
    }
    Ok(out)
}

fn default_sample_count(columns: usize, p: usize) -> usize {
    let per = if p == 0 { 6 } else { 3 };
    (per * columns).max(24).next_multiple_of(2)
}

fn sample_values(samples: &[DesignSample], eval: impl Fn(&Polytope, &SupportPatch) -> Result<crate::SymTensor> + Sync) -> Result<Vec<f64>> {
    let per: Vec<Result<Vec<f64>>> = parallel_map(samples, |s| {
        let t = eval(&s.polytope, &s.patch)?;
        sampling::flatten(&t, &s.tuples)
    });
    let mut out = Vec::new();
    for v in per {
        out.extend(v?);
    }
    Ok(out)
}

pub fn build_design(n: usize, p: usize, basis: &[BasisDescriptor], spec: &SampleSpec) -> Result<Design> {
    if basis.is_empty() {
        return Err(MtlError::EmptyInput("basis"));
    }
    for d in basis {
        d.validate(n)?;
        if d.rank() != p {
            return Err(MtlError::InvalidArgument(format!("{d} has rank {}, expected {p}", d.rank())));
        }
    }
    let count = spec.samples.unwrap_or_else(|| default_sample_count(basis.len(), p));
    let mut rng = sampling::rng(spec.seed);
    let samples = draw_samples(&mut rng, n, p, count, spec.tuples_per_sample)?;
    let row_sample: Vec<usize> = samples
        .iter()
        .enumerate()
        .flat_map(|(i, s)| std::iter::repeat_n(i, s.tuples.len()))
        .collect();
    let mut matrix = DMatrix::zeros(row_sample.len(), basis.len());
    for (c, d) in basis.iter().enumerate() {
        let col = sample_values(&samples, |poly, eta| d.evaluate(poly, eta))?;
        matrix.set_column(c, &DVector::from_vec(col));
    }
    Ok(Design {
        n,
        p,
        basis: basis.to_vec(),
        samples,
        matrix,
        row_sample,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionResult {
    pub coefficients: Vec<(BasisDescriptor, f64)>,
    /// Normalized RMS misfit on the held-out half of the samples.
    pub residual: f64,
    pub sample_count: usize,
    pub condition: f64,
    pub within_tolerance: bool,
}

impl DecompositionResult {
    pub fn coefficient(&self, d: &BasisDescriptor) -> Option<f64> {
        self.coefficients.iter().find(|(e, _)| e == d).map(|(_, c)| *c)
    }
}

fn rows_where(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

fn rms(v: &DVector<f64>) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        (v.norm_squared() / v.len() as f64).sqrt()
    }
}

/// Fits the oracle on the even-numbered samples and reports the misfit on
/// the odd-numbered ones.
pub fn decompose_with_design(design: &Design, g: &ValuationOracle, tol: f64) -> Result<DecompositionResult> {
    if g.n != design.n || g.p != design.p {
        return Err(MtlError::InvalidArgument(format!(
            "oracle has (n, p) = ({}, {}), design has ({}, {})",
            g.n, g.p, design.n, design.p
        )));
    }
    let y = DVector::from_vec(sample_values(&design.samples, |poly, eta| g.eval(poly, eta))?);
    let (train, held): (Vec<usize>, Vec<usize>) =
        (0..design.row_sample.len()).partition(|&r| design.row_sample[r].is_multiple_of(2));
    if train.len() < design.basis.len() {
        return Err(MtlError::SampleTooSmall {
            rows: train.len(),
            columns: design.basis.len(),
        });
    }
    let a_train = rows_where(&design.matrix, &train);
    let y_train = DVector::from_iterator(train.len(), train.iter().map(|&r| y[r]));
    let sol = least_squares(&a_train, &y_train, 1e-14)?;
    if sol.condition > MAX_CONDITION {
        return Err(MtlError::IllConditioned {
            condition: sol.condition,
        });
    }
    let a_held = rows_where(&design.matrix, &held);
    let y_held = DVector::from_iterator(held.len(), held.iter().map(|&r| y[r]));
    let err = rms(&(&a_held * &sol.x - &y_held));
    let scale = rms(&y_held);
    let residual = if scale > 0.0 { err / scale } else { err };
    Ok(DecompositionResult {
        coefficients: design.basis.iter().copied().zip(sol.x.iter().copied()).collect(),
        residual,
        sample_count: design.samples.len(),
        condition: sol.condition,
        within_tolerance: residual < tol,
    })
}

/// Decomposes `g` on the full basis of its rank.
pub fn decompose_on_basis(g: &ValuationOracle, spec: &SampleSpec, tol: f64) -> Result<DecompositionResult> {
    let basis = enumerate_basis(g.n, g.p);
    decompose_with_design(&build_design(g.n, g.p, &basis, spec)?, g, tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub n: usize,
    pub p: usize,
    pub rank: usize,
    pub expected: usize,
    /// Singular values of the normalized design, largest first.
    pub sigma: Vec<f64>,
    /// `sigma_r / sigma_{r+1}` after appending a column that lies in the span
    /// of the others, so the gap separates signal from numerical noise.
    pub gap: f64,
    pub passed: bool,
}

/// Numeric rank of the basis evaluated on a seeded sample set.
pub fn independence_rank(n: usize, p: usize, seed: u64) -> Result<RankReport> {
    let basis = enumerate_basis(n, p);
    let cols = basis.len();
    let spec = SampleSpec {
        seed,
        samples: Some(default_sample_count(cols, p).max(4 * cols)),
        tuples_per_sample: 4,
    };
    let design = build_design(n, p, &basis, &spec)?;
    let rows = design.matrix.nrows();
    if rows < cols + 1 {
        return Err(MtlError::SampleTooSmall { rows, columns: cols + 1 });
    }
    let (scaled, _) = normalize_columns(&design.matrix);
    let sigma = sorted_singular_values(&scaled);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().filter(|s| **s > RANK_CUTOFF * smax).count();

    let mut rng = sampling::rng(seed ^ 0xA5A5_A5A5);
    let weights: Vec<f64> = (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect();
    let probe = scaled.clone() * DVector::from_vec(weights);
    let augmented = scaled.insert_column(cols, 0.0);
    let mut augmented = augmented;
    augmented.set_column(cols, &probe);
    let aug_sigma = sorted_singular_values(&augmented);
    let gap = if rank == 0 {
        0.0
    } else {
        let below = aug_sigma.get(rank).copied().unwrap_or(0.0);
        if below > 0.0 {
            aug_sigma[rank - 1] / below
        } else {
            f64::INFINITY
        }
    };
    Ok(RankReport {
        n,
        p,
        rank,
        expected: cols,
        sigma,
        gap,
        passed: rank == cols,
    })
}

fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    thin_svd(m).sigma
}
