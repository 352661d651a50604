//! Randomized checks of the defining properties of a local tensor valuation.

use rand::Rng;
use serde::Serialize;

use super::sampling::{self, SampleRng};
use super::{relative_residual, ValuationOracle};
use crate::error::Result;
use crate::linalg;
use crate::patch::{ConeRegion, PositionRegion, SupportPatch};
use crate::polytope::{Halfspace, Polytope};
use crate::spherical::ConeConstraint;
use crate::tensor::SymTensor;

#[derive(Clone, Debug)]
pub struct AxiomOptions {
    pub trials: usize,
    pub tolerance: f64,
    /// Draw orientation-reversing maps in the rotation check.
    pub improper_rotations: bool,
}

impl Default for AxiomOptions {
    fn default() -> Self {
        Self {
            trials: 50,
            tolerance: 1e-7,
            improper_rotations: false,
        }
    }
}

/// Input on which a check came out worst.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub trial: usize,
    pub vertices: Vec<Vec<f64>>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub passed: bool,
    pub max_residual: f64,
    pub trials: usize,
    pub witness: Option<Witness>,
    /// For the rotation check: worst residual of `Gamma(theta P) = -theta Gamma(P)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_flip_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub oracle: String,
    pub n: usize,
    pub p: usize,
    pub declared_degree: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub checks: Vec<AxiomCheck>,
    pub passed: bool,
}

impl AxiomReport {
    pub fn check(&self, name: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const MEASURE_ADDITIVITY: &str = "measure_additivity";
pub const TRANSLATION: &str = "translation";
pub const ROTATION: &str = "rotation";
pub const VALUATION: &str = "valuation";
pub const LOCALITY: &str = "local_definedness";

pub fn axiom_report(oracle: &ValuationOracle, seed: u64, trials: usize) -> AxiomReport {
    axiom_report_with(
        oracle,
        seed,
        &AxiomOptions {
            trials,
            ..AxiomOptions::default()
        },
    )
}

pub fn axiom_report_with(oracle: &ValuationOracle, seed: u64, opts: &AxiomOptions) -> AxiomReport {
    let trials = opts.trials.max(1);
    let sub_rng = |i: u64| sampling::rng(seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i + 1));
    let mut checks = Vec::with_capacity(5);
    checks.push(run_check(MEASURE_ADDITIVITY, trials, opts.tolerance, sub_rng(0), |rng| {
        additivity_trial(oracle, rng)
    }));
    checks.push(run_check(TRANSLATION, trials, opts.tolerance, sub_rng(1), |rng| {
        translation_trial(oracle, rng)
    }));
    let mut flip = 0.0f64;
    let mut rot = run_check(ROTATION, trials, opts.tolerance, sub_rng(2), |rng| {
        let (res, f) = rotation_trial(oracle, rng, !opts.improper_rotations)?;
        flip = flip.max(f.0);
        Ok((res, f.1))
    });
    rot.sign_flip_residual = Some(flip);
    checks.push(rot);
    checks.push(run_check(VALUATION, trials, opts.tolerance, sub_rng(3), |rng| {
        valuation_trial(oracle, rng)
    }));
    checks.push(run_check(LOCALITY, trials, opts.tolerance, sub_rng(4), |rng| {
        locality_trial(oracle, rng)
    }));
    let passed = checks.iter().all(|c| c.passed);
    AxiomReport {
        oracle: oracle.name.clone(),
        n: oracle.n,
        p: oracle.p,
        declared_degree: oracle.declared_degree,
        seed,
        tolerance: opts.tolerance,
        checks,
        passed,
    }
}

type TrialOutcome = Result<(f64, Witness)>;

fn run_check(
    name: &'static str,
    trials: usize,
    tol: f64,
    mut rng: SampleRng,
    mut trial: impl FnMut(&mut SampleRng) -> TrialOutcome,
) -> AxiomCheck {
    let mut worst = 0.0f64;
    let mut witness = None;
    for i in 0..trials {
        let (res, mut w) = match trial(&mut rng) {
            Ok(x) => x,
            Err(e) => (
                f64::INFINITY,
                Witness {
                    trial: i,
                    vertices: Vec::new(),
                    detail: format!("evaluation failed: {e}"),
                },
            ),
        };
        w.trial = i;
        if witness.is_none() || res > worst || res.is_nan() {
            worst = if res.is_nan() { f64::INFINITY } else { res };
            witness = Some(w);
        }
    }
    AxiomCheck {
        name,
        passed: worst <= tol,
        max_residual: worst,
        trials,
        witness,
        sign_flip_residual: None,
    }
}

fn witness(p: &Polytope, detail: String) -> Witness {
    Witness {
        trial: 0,
        vertices: p.vertices().to_vec(),
        detail,
    }
}

fn random_interior_point(rng: &mut SampleRng, p: &Polytope) -> Vec<f64> {
    let v = p.vertices();
    let w: Vec<f64> = (0..v.len()).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut x = vec![0.0; p.ambient_dim()];
    for (vi, wi) in v.iter().zip(&w) {
        x = linalg::axpy(&x, wi / total, vi);
    }
    x
}

fn additivity_trial(g: &ValuationOracle, rng: &mut SampleRng) -> TrialOutcome {
    let p = sampling::random_polytope_any_dim(rng, g.n)?;
    let eta = sampling::random_patch(rng, &p);
    let a = sampling::random_unit(rng, g.n);
    let (e1, e2, how) = if rng.random_bool(0.5) {
        let c = linalg::dot(&a, &random_interior_point(rng, &p));
        (
            eta.restrict_position(&Halfspace::ge(a.clone(), c))?,
            eta.restrict_position(&Halfspace::gt(linalg::scale(&a, -1.0), -c))?,
            format!("position split <{a:?}, x> = {c}"),
        )
    } else {
        (
            eta.restrict_normal(&ConeConstraint::closed(a.clone())),
            eta.restrict_normal(&ConeConstraint::strict(linalg::scale(&a, -1.0))),
            format!("normal split <{a:?}, u> = 0"),
        )
    };
    let whole = g.eval(&p, &eta)?;
    let parts = g.eval(&p, &e1)?.try_add(&g.eval(&p, &e2)?)?;
    let joined = g.eval(&p, &e1.union(&e2))?;
    let res = relative_residual(&parts, &whole).max(relative_residual(&joined, &whole));
    Ok((res, witness(&p, how)))
}

fn translation_trial(g: &ValuationOracle, rng: &mut SampleRng) -> TrialOutcome {
    let p = sampling::random_polytope_any_dim(rng, g.n)?;
    let eta = sampling::random_patch(rng, &p);
    let t = sampling::uniform_vector(rng, g.n, -1.0, 1.0);
    let q = g.declared_degree;
    // The (q+1)-st finite difference of a polynomial of degree q vanishes.
    let mut diff = SymTensor::zero(g.n, g.p);
    let mut scale = 1.0f64;
    for i in 0..=q + 1 {
        let shift = linalg::scale(&t, i as f64);
        let v = g.eval(&p.translate(&shift)?, &eta.translate(&shift)?)?;
        scale = scale.max(v.max_abs());
        let sign = if (q + 1 - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        diff.add_scaled(&v, sign * linalg::binomial(q + 1, i))?;
    }
    let mut res = diff.max_abs() / scale;
    if let Some(pred) = g.predicted_translate(&p, &eta, &t) {
        let actual = g.eval(&p.translate(&t)?, &eta.translate(&t)?)?;
        res = res.max(relative_residual(&actual, &pred?));
    }
    Ok((res, witness(&p, format!("t = {t:?}"))))
}

/// Returns the covariance residual and the anti-covariance residual.
fn rotation_trial(g: &ValuationOracle, rng: &mut SampleRng, proper: bool) -> Result<(f64, (f64, Witness))> {
    let p = sampling::random_polytope_any_dim(rng, g.n)?;
    let eta = sampling::random_patch(rng, &p);
    let theta = sampling::random_rotation(rng, g.n, proper);
    let moved = g.eval(&p.transform(&theta)?, &eta.transform(&theta)?)?;
    let expected = g.eval(&p, &eta)?.rotate(&theta)?;
    let res = relative_residual(&moved, &expected);
    let flip = relative_residual(&moved, &-&expected);
    Ok((
        res,
        (flip, witness(&p, format!("theta = {:?}", theta.matrix()))),
    ))
}

fn valuation_trial(g: &ValuationOracle, rng: &mut SampleRng) -> TrialOutcome {
    let p = if rng.random_bool(0.5) {
        sampling::random_box(rng, g.n)
    } else {
        sampling::random_simplex(rng, g.n)?
    };
    let eta = sampling::random_patch(rng, &p);
    let a = sampling::random_unit(rng, g.n);
    let c = linalg::dot(&a, &random_interior_point(rng, &p));
    let clip = |h: Halfspace| -> Result<Polytope> {
        p.clip(&h)?
            .ok_or_else(|| crate::MtlError::Degenerate("split hyperplane misses the polytope".into()))
    };
    let p1 = clip(Halfspace::ge(a.clone(), c))?;
    let p2 = clip(Halfspace::ge(linalg::scale(&a, -1.0), -c))?;
    let p12 = clip(Halfspace::eq(a.clone(), c))?;
    let lhs = g.eval(&p1, &eta)?.try_add(&g.eval(&p2, &eta)?)?;
    let rhs = g.eval(&p, &eta)?.try_add(&g.eval(&p12, &eta)?)?;
    Ok((
        relative_residual(&lhs, &rhs),
        witness(&p, format!("split <{a:?}, x> = {c}")),
    ))
}

/// Cuts `P` by a hyperplane and compares both polytopes on a patch that only
/// sees the part of the normal bundle they share.
fn locality_trial(g: &ValuationOracle, rng: &mut SampleRng) -> TrialOutcome {
    let p = sampling::random_polytope(rng, g.n)?;
    let a = sampling::random_unit(rng, g.n);
    let c = linalg::dot(&a, &random_interior_point(rng, &p));
    let top = p.vertices().iter().map(|v| linalg::dot(&a, v)).fold(f64::MIN, f64::max);
    let cut = p
        .clip(&Halfspace::ge(a.clone(), c))?
        .ok_or_else(|| crate::MtlError::Degenerate("cut misses the polytope".into()))?;
    let far = c + 0.25 * (top - c);
    let normal = if rng.random_bool(0.5) {
        ConeRegion::All
    } else {
        sampling::random_cone(rng, g.n)
    };
    let eta = SupportPatch::single(PositionRegion::Halfspaces(vec![Halfspace::gt(a.clone(), far)]), normal);
    let full = g.eval(&p, &eta)?;
    let part = g.eval(&cut, &eta)?;
    Ok((
        relative_residual(&part, &full),
        witness(&p, format!("cut <{a:?}, x> >= {c}, patch beyond {far}")),
    ))
}

