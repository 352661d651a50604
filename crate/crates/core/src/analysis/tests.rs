use super::*;
use crate::linalg::unit;
use crate::patch::{ConeRegion, PositionRegion};
use crate::spherical::{omega, ConeConstraint, SphericalRegion};
use crate::tensor::Subspace;
use crate::valuations::{enumerate_basis, BasisDescriptor};

fn line(n: usize, i: usize) -> Subspace {
    Subspace::from_orthonormal(n, vec![unit(n, i)]).unwrap()
}

#[test]
fn axiom_report_passes_for_a_basis_element() {
    let g = ValuationOracle::from_descriptor(3, BasisDescriptor::phi(1, 0, 0, 1, 0)).unwrap();
    let rep = axiom_report(&g, 7, 4);
    for c in &rep.checks {
        assert!(c.passed, "{} residual {:e} {:?}", c.name, c.max_residual, c.witness);
        assert!(c.max_residual < 1e-8);
    }
    assert!(rep.passed);
}

#[test]
fn improper_maps_flip_the_tilde_family() {
    let g = ValuationOracle::from_descriptor(3, BasisDescriptor::tilde3(0, 0, 0, 0)).unwrap();
    let rep = axiom_report_with(
        &g,
        3,
        &AxiomOptions {
            trials: 4,
            improper_rotations: true,
            ..AxiomOptions::default()
        },
    );
    let rot = rep.check(axioms::ROTATION).unwrap();
    assert!(!rot.passed);
    assert!(rot.sign_flip_residual.unwrap() < 1e-8);
}

#[test]
fn per_polytope_constant_breaks_locality() {
    let base = ValuationOracle::from_descriptor(2, BasisDescriptor::phi(1, 0, 0, 1, 0)).unwrap();
    let inner = base.clone();
    let g = ValuationOracle::new("corrupted", 2, 1, 0, move |p, eta| {
        let mut t = inner.eval(p, eta)?;
        let bump: f64 = p.vertices().iter().map(|v| crate::linalg::dot(v, v)).sum();
        t.add_scaled(&crate::SymTensor::vector(&[1.0, 0.0]), 0.1 * bump)?;
        Ok(t)
    });
    let rep = axiom_report(&g, 11, 4);
    assert!(!rep.check(axioms::LOCALITY).unwrap().passed);
}

#[test]
fn delta_examples() {
    let g = ValuationOracle::from_descriptor(2, BasisDescriptor::phi(1, 0, 0, 0, 0)).unwrap();
    let b = SphericalRegion::new(line(2, 1), vec![ConeConstraint::closed(unit(2, 1))]);
    let d = extract_delta(&g, &line(2, 0), &b).unwrap();
    assert!((d.scalar_value() - 0.5).abs() < 1e-12);

    for s in [1, 3] {
        let g = ValuationOracle::from_descriptor(3, BasisDescriptor::phi(0, 0, 0, s, 0)).unwrap();
        let d = extract_delta(&g, &Subspace::zero(3), &SphericalRegion::full_sphere(3)).unwrap();
        assert!(d.max_abs() < 1e-10);
    }

    let g = ValuationOracle::from_descriptor(3, BasisDescriptor::tilde3(0, 0, 0, 0)).unwrap();
    let plane = Subspace::from_orthonormal(3, vec![unit(3, 0), unit(3, 1)]).unwrap();
    let arc = SphericalRegion::new(
        plane,
        vec![ConeConstraint::closed(unit(3, 0)), ConeConstraint::closed(unit(3, 1))],
    );
    let d = extract_delta(&g, &line(3, 2), &arc).unwrap();
    let expected = crate::SymTensor::vector(&[0.0, 0.0, 1.0])
        .sym_product(&crate::SymTensor::vector(&[-1.0, 1.0, 0.0]))
        .unwrap();
    assert!(d.approx_eq(&expected, 1e-10), "{d:?}");
}

#[test]
fn delta_rejects_wrong_carrier() {
    let g = ValuationOracle::from_descriptor(2, BasisDescriptor::phi(1, 0, 0, 0, 0)).unwrap();
    let b = SphericalRegion::full(line(2, 0));
    assert!(extract_delta(&g, &line(2, 0), &b).is_err());
}

#[test]
fn delta_rejects_polytope_dependence() {
    let g = ValuationOracle::new("size", 2, 0, 0, |p, _| Ok(crate::SymTensor::scalar(2, p.bounding_box().1[0])));
    let b = SphericalRegion::full(line(2, 1));
    assert!(matches!(
        extract_delta(&g, &line(2, 0), &b),
        Err(crate::MtlError::PolytopeDependence { .. })
    ));
}

fn delta_samples(g: &ValuationOracle, k: usize, count: usize, seed: u64) -> Vec<DeltaSample> {
    let mut rng = sampling::rng(seed);
    (0..count)
        .map(|_| {
            let (l, b) = delta::random_site(&mut rng, g.n, k);
            let value = extract_delta(g, &l, &b).unwrap();
            DeltaSample { l, b, value }
        })
        .collect()
}

#[test]
fn delta_fit_examples() {
    let g = ValuationOracle::from_descriptor(3, BasisDescriptor::phi(2, 0, 0, 0, 0)).unwrap();
    let fit = fit_delta_representation(&delta_samples(&g, 2, 8, 1), 3, 2, 0, true, 5).unwrap();
    assert_eq!(fit.terms.len(), 1);
    assert!(fit.residual < 1e-9);
    assert!((fit.terms[0].1 - 1.0 / omega(1)).abs() < 1e-9);

    let g = ValuationOracle::from_descriptor(3, BasisDescriptor::tilde3(0, 0, 0, 0)).unwrap();
    let samples = delta_samples(&g, 1, 12, 2);
    let without = fit_delta_representation(&samples, 3, 1, 2, false, 5).unwrap();
    assert!(without.residual > 0.1, "{}", without.residual);
    let with = fit_delta_representation(&samples, 3, 1, 2, true, 5).unwrap();
    assert!(with.residual < 1e-8, "{}", with.residual);
}

#[test]
fn rank_small_cases() {
    let r = independence_rank(2, 1, 7).unwrap();
    assert_eq!((r.rank, r.expected), (6, 6));
    let r = independence_rank(3, 0, 7).unwrap();
    assert_eq!((r.rank, r.expected), (3, 3));
    assert!(r.gap > 1e6);
}

#[test]
fn decompose_examples() {
    let q_phi = BasisDescriptor::phi(0, 1, 0, 0, 0);
    let tilde = BasisDescriptor::tilde3(0, 0, 0, 0);
    let g = ValuationOracle::linear_combination(3, &[(2.0, q_phi), (3.0, tilde)]).unwrap();
    let res = decompose_on_basis(&g, &SampleSpec::new(9), 1e-8).unwrap();
    for (d, c) in &res.coefficients {
        let want = if *d == q_phi {
            2.0
        } else if *d == tilde {
            3.0
        } else {
            0.0
        };
        assert!((c - want).abs() < 1e-6, "{d}: {c}");
    }
    assert!(res.residual < 1e-8 && res.within_tolerance);

    let tilde2 = BasisDescriptor::tilde2(0, 0, 0, 0);
    let g = ValuationOracle::from_descriptor(2, tilde2).unwrap();
    let phi_only: Vec<_> = enumerate_basis(2, 1).into_iter().filter(|d| !d.is_tilde()).collect();
    let design = build_design(2, 1, &phi_only, &SampleSpec::new(3)).unwrap();
    let res = decompose_with_design(&design, &g, 1e-8).unwrap();
    assert!(res.residual > 0.1, "{}", res.residual);
}

#[test]
fn invariant_examples() {
    let q = crate::SymTensor::metric(3);
    let l = Subspace::from_orthonormal(3, vec![unit(3, 0), unit(3, 1)]).unwrap();
    let dec = decompose_invariant_tensor(&q, &l).unwrap();
    assert!((dec.component(1).unwrap().scalar_value() - 1.0).abs() < 1e-12);
    let q_perp = crate::SymTensor::metric_on_subspace(&l.orthogonal_complement());
    assert!(dec.ambient_term(0).unwrap().approx_eq(&q_perp, 1e-12));
    assert!(dec.residual < 1e-12);

    let t = crate::SymTensor::from_coeffs(2, 2, [(vec![0, 1], 1.0)]).unwrap();
    let dec = decompose_invariant_tensor(&t, &line(2, 0)).unwrap();
    let e2 = crate::SymTensor::vector(&[0.0, 1.0]);
    let j1 = dec.component(1).unwrap().pullback(&dec.complement).unwrap();
    assert!(j1.approx_eq(&e2, 1e-14));
    assert!(dec.component(0).unwrap().is_zero());
    assert!(dec.component(2).unwrap().is_zero());
    assert_eq!(dec.residual, 0.0);
}

#[test]
fn invariant_rejects_non_invariant() {
    let t = crate::SymTensor::from_coeffs(3, 2, [(vec![0, 0], 1.0)]).unwrap();
    let l = Subspace::from_orthonormal(3, vec![unit(3, 0), unit(3, 1)]).unwrap();
    assert!(matches!(
        decompose_invariant_tensor(&t, &l),
        Err(crate::MtlError::InvarianceViolated { .. })
    ));
}

#[test]
fn patch_regions_used_by_sampling_are_valid() {
    let mut rng = sampling::rng(1);
    for n in 2..=3 {
        for _ in 0..10 {
            let p = sampling::random_polytope_any_dim(&mut rng, n).unwrap();
            let eta = sampling::random_patch(&mut rng, &p);
            eta.check_dim(n).unwrap();
            for piece in &eta.pieces {
                if let PositionRegion::Box { min, max } = &piece.position {
                    assert!(min.iter().zip(max).all(|(a, b)| a < b));
                }
                if let ConeRegion::Halfspaces(c) = &piece.normal {
                    assert!(!c.is_empty());
                }
            }
        }
    }
}
