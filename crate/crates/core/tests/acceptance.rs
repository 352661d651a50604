//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the test
//! harness so the lines always reach the console; exits non-zero on failure.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use mtl_core::analysis::delta::random_site;
use mtl_core::analysis::{
    axiom_report, build_design, decompose_invariant_tensor, decompose_with_design, extract_delta,
    fit_delta_representation, independence_rank, sampling, DeltaSample, SampleSpec, ValuationOracle,
};
use mtl_core::linalg::binomial;
use mtl_core::spherical::{omega, spherical_moment_with, ConeConstraint, QuadratureConfig, SphericalRegion, Weight};
use mtl_core::tensor::{multi_indices, Subspace};
use mtl_core::valuations::{enumerate_basis, phi, BasisDescriptor};
use mtl_core::{Polytope, SupportPatch, SymTensor};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn criterion_1() -> Outcome {
    let mut rng = sampling::rng(101);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let n = 2 + i % 2;
        let sides: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
        let lo = sampling::uniform_vector(&mut rng, n, -1.0, 1.0);
        let hi: Vec<f64> = lo.iter().zip(&sides).map(|(l, a)| l + a).collect();
        let b = Polytope::axis_box(&lo, &hi).unwrap();
        for k in 0..=n {
            let v = if k == n {
                b.volume()
            } else {
                phi(&b, &SupportPatch::all(), k, 0, 0, 0).unwrap().scalar_value()
            };
            worst = worst.max((v - common::elementary_symmetric(&sides, k)).abs());
        }
    }
    outcome(worst < 1e-8, format!("20 boxes, max abs error {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let mut rng = sampling::rng(202);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let n = 2 + i % 2;
        let p = sampling::random_polytope(&mut rng, n).unwrap();
        let t = phi(&p, &SupportPatch::all(), n - 1, 0, 1, 0).unwrap();
        worst = worst.max(t.max_abs());
    }
    outcome(worst < 1e-8, format!("20 polytopes, max coefficient {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut count = 0;
    for n in 2..=3 {
        for p in 0..=3 {
            for d in enumerate_basis(n, p) {
                let g = ValuationOracle::from_descriptor(n, d).unwrap();
                let rep = axiom_report(&g, 303 + count as u64, 50);
                count += 1;
                for c in &rep.checks {
                    worst = worst.max(c.max_residual);
                    if c.max_residual >= 1e-7 {
                        failures.push(format!("n={n} {d}: {} {:.2e}", c.name, c.max_residual));
                    }
                }
            }
        }
    }
    let mut detail = format!("{count} elements x 5 checks x 50 trials, max residual {worst:.2e}");
    if !failures.is_empty() {
        detail.push_str(&format!("; failing: {}", failures.join(", ")));
    }
    outcome(failures.is_empty(), detail)
}

fn criterion_4() -> Outcome {
    let mut rng = sampling::rng(404);
    let mut worst_phi = 0.0f64;
    let mut worst_tilde = 0.0f64;
    for n in 2..=3 {
        let basis: Vec<BasisDescriptor> = (0..=3).flat_map(|p| enumerate_basis(n, p)).collect();
        for _ in 0..20 {
            let theta = sampling::random_rotation(&mut rng, n, false);
            assert!(theta.determinant() < 0.0);
            let p = sampling::random_polytope_any_dim(&mut rng, n).unwrap();
            let eta = sampling::random_patch(&mut rng, &p);
            let (tp, teta) = (p.transform(&theta).unwrap(), eta.transform(&theta).unwrap());
            for d in &basis {
                let moved = d.evaluate(&tp, &teta).unwrap();
                let rotated = d.evaluate(&p, &eta).unwrap().rotate(&theta).unwrap();
                let scale = rotated.max_abs().max(1.0);
                if d.is_tilde() {
                    worst_tilde = worst_tilde.max(moved.try_add(&rotated).unwrap().max_abs() / scale);
                } else {
                    worst_phi = worst_phi.max(moved.max_abs_diff(&rotated) / scale);
                }
            }
        }
    }
    outcome(
        worst_phi < 1e-8 && worst_tilde < 1e-8,
        format!("20 improper maps per n; covariance {worst_phi:.2e}, anti-covariance {worst_tilde:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (n, p, want) in [(3, 2, 14), (2, 1, 6), (2, 2, 12)] {
        let r = independence_rank(n, p, 505).unwrap();
        ok &= r.rank == want && r.expected == want && r.gap > 1e6;
        parts.push(format!("(n={n},p={p}) ({},{}) gap {:.1e}", r.rank, r.expected, r.gap));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut rng = sampling::rng(606);
    let mut worst_coef = 0.0f64;
    let mut worst_res = 0.0f64;
    for (n, p) in [(2, 1), (2, 2), (3, 2), (3, 3)] {
        let basis = enumerate_basis(n, p);
        let design = build_design(n, p, &basis, &SampleSpec::new(6060 + n as u64 * 10 + p as u64)).unwrap();
        for _ in 0..30 {
            let coefs: Vec<f64> = basis.iter().map(|_| rng.random_range(-10.0..10.0)).collect();
            let terms: Vec<_> = coefs.iter().copied().zip(basis.iter().copied()).collect();
            let g = ValuationOracle::linear_combination(n, &terms).unwrap();
            let res = decompose_with_design(&design, &g, 1e-7).unwrap();
            for ((_, got), want) in res.coefficients.iter().zip(&coefs) {
                worst_coef = worst_coef.max((got - want).abs());
            }
            worst_res = worst_res.max(res.residual);
        }
    }
    let tilde = ValuationOracle::from_descriptor(3, BasisDescriptor::tilde3(0, 0, 0, 0)).unwrap();
    let phi_only: Vec<_> = enumerate_basis(3, 2).into_iter().filter(|d| !d.is_tilde()).collect();
    let design = build_design(3, 2, &phi_only, &SampleSpec::new(607)).unwrap();
    let separated = decompose_with_design(&design, &tilde, 1e-7).unwrap().residual;
    outcome(
        worst_coef < 1e-5 && worst_res < 1e-7 && separated > 0.1,
        format!(
            "120 combinations: max coefficient error {worst_coef:.2e}, held-out residual {worst_res:.2e}; \
             tilde against phi-only residual {separated:.3}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    let mut fits = 0;
    let mut errors = Vec::new();
    let mut cases: Vec<(usize, usize, usize)> = Vec::new();
    for n in 2..=3 {
        for k in 0..n {
            for p in 0..=3 {
                cases.push((n, k, p));
            }
        }
    }
    for k in 1..4 {
        for p in 0..=2 {
            cases.push((4, k, p));
        }
    }
    for (n, k, p) in cases {
        let mut rng = sampling::rng(707 + (n * 100 + k * 10 + p) as u64);
        let sites: Vec<_> = (0..30).map(|_| random_site(&mut rng, n, k)).collect();
        for d in enumerate_basis(n, p).into_iter().filter(|d| d.r == 0) {
            let g = ValuationOracle::from_descriptor(n, d).unwrap();
            let samples: Result<Vec<DeltaSample>, _> = sites
                .iter()
                .map(|(l, b)| {
                    extract_delta(&g, l, b).map(|value| DeltaSample {
                        l: l.clone(),
                        b: b.clone(),
                        value,
                    })
                })
                .collect();
            let fit = samples.and_then(|s| fit_delta_representation(&s, n, k, p, true, 77));
            match fit {
                Ok(fit) => {
                    worst = worst.max(fit.residual);
                    if fit.residual >= 1e-7 {
                        errors.push(format!("n={n} k={k} {d}: residual {:.2e}", fit.residual));
                    }
                }
                Err(e) => errors.push(format!("n={n} k={k} {d}: {e}")),
            }
            fits += 1;
        }
    }
    let mut detail = format!("{fits} fits over 30 sites each, max residual {worst:.2e}");
    if !errors.is_empty() {
        detail.push_str(&format!("; failing: {}", errors.join(", ")));
    }
    outcome(errors.is_empty(), detail)
}

fn random_tensor(rng: &mut sampling::SampleRng, n: usize, r: usize) -> SymTensor {
    let entries: Vec<_> = multi_indices(n, r)
        .into_iter()
        .map(|i| (i, rng.random_range(-1.0..1.0)))
        .collect();
    SymTensor::from_coeffs(n, r, entries).unwrap()
}

fn criterion_8() -> Outcome {
    let mut rng = sampling::rng(808);
    let mut worst_b = 0.0f64;
    for n in 2..=4 {
        for r in 0..=4 {
            for _ in 0..3 {
                let t = random_tensor(&mut rng, n, r);
                let l = Subspace::from_orthonormal(n, sampling::random_frame(&mut rng, n, 1)).unwrap();
                worst_b = worst_b.max(decompose_invariant_tensor(&t, &l).unwrap().residual);
            }
        }
    }
    let mut worst_a = 0.0f64;
    let cyclic = common::cyclic_group(16);
    let ico = common::icosahedral_group();
    for (n, k) in [(3, 2), (3, 3), (4, 2), (4, 3)] {
        let group = if k == 2 { &cyclic } else { &ico };
        for r in 0..=4 {
            let l = Subspace::from_orthonormal(n, sampling::random_frame(&mut rng, n, k)).unwrap();
            let t = common::group_average(&random_tensor(&mut rng, n, r), &l, group);
            let dec = decompose_invariant_tensor(&t, &l).unwrap();
            worst_a = worst_a.max(dec.residual);
        }
    }
    outcome(
        worst_b < 1e-12 && worst_a < 1e-8,
        format!("line case residual {worst_b:.2e}; subspace case residual {worst_a:.2e}"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = sampling::rng(909);
    let cfg = QuadratureConfig {
        adaptive_arcs: true,
        ..QuadratureConfig::default()
    };
    let plane = Subspace::full(2);
    let mut worst_arc = 0.0f64;
    for _ in 0..100 {
        let a = rng.random_range(-PI..PI);
        let b = a + rng.random_range(0.01..PI - 0.01);
        let s = rng.random_range(0..=6);
        let region = SphericalRegion::new(
            plane.clone(),
            vec![
                ConeConstraint::closed(vec![-a.sin(), a.cos()]),
                ConeConstraint::closed(vec![b.sin(), -b.cos()]),
            ],
        );
        let t = spherical_moment_with(&region, s, &Weight::None, &cfg).unwrap();
        for i in 0..=s {
            let mut idx = vec![0; i];
            idx.extend(std::iter::repeat_n(1, s - i));
            let want = binomial(s, i) * common::trig_monomial_integral(i, s - i, a, b);
            worst_arc = worst_arc.max((t.coeff(&idx) - want).abs());
        }
    }
    let full = spherical_moment_with(&SphericalRegion::full_sphere(3), 2, &Weight::None, &QuadratureConfig::default())
        .unwrap();
    let want = SymTensor::metric(3).scaled(omega(3) / 3.0);
    let sphere_err = full.max_abs_diff(&want);
    outcome(
        worst_arc < 1e-9 && sphere_err < 1e-8,
        format!("100 arcs max error {worst_arc:.2e}; full-sphere s=2 error {sphere_err:.2e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let criteria: [Criterion; 9] = [
        ("intrinsic volumes of boxes", criterion_1),
        ("Minkowski relation", criterion_2),
        ("axiom suite", criterion_3),
        ("reflection dichotomy", criterion_4),
        ("linear independence", criterion_5),
        ("basis decomposition", criterion_6),
        ("flat density representations", criterion_7),
        ("invariant tensor round trip", criterion_8),
        ("quadrature cross-check", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {} ({name}): {verdict} [{:.1}s] {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
