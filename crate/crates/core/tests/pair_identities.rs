//! Integration tests for subalgebra pairs on trivial-extension examples:
//! the boundary homomorphism, splitting independence, the kappa whiskering
//! identity, ladder projections, and ambidexterity on cohomology.

use ainf_core::ainfty::{trivial_extension, validate_ainfty};
use ainf_core::bimod::{
    diagonal, for_each_context, prehom_differential, prehom_is_zero, prehom_sub, prehoms_equal,
    shift, validate_bimodule, PreHom,
};
use ainf_core::graded::{BaseRing, BasisElem, Elem, GradedMap, GradedSpace};
use ainf_core::pair::{
    ambidexterity, bimodule_cohomology, delta_from_ses, kappa_source, ladder,
    ladder_projection_induced, splitting_correction_dim, whisker_sides, SubalgebraPair,
};
use ainf_core::scalar::FieldSpec;
use ainf_core::AInftyAlgebra;
use std::rc::Rc;

/// The annulus pair: A = K, B = K ⊕ Kx with |x| = 1 (split extension).
fn annulus() -> Rc<SubalgebraPair> {
    let k = AInftyAlgebra::ground(FieldSpec::Rational);
    let p = shift(&diagonal(&k), -1);
    let (b, a_part) = trivial_extension(&k, &p, 4).unwrap();
    assert!(validate_ainfty(&b, 6).ok());
    SubalgebraPair::new(&b, &a_part, None).unwrap()
}

/// A directed two-object algebra: units e1, e2 and one arrow x: 1 -> 2.
fn arrow_algebra() -> Rc<AInftyAlgebra> {
    let space = Rc::new(GradedSpace::new(
        FieldSpec::Rational,
        BaseRing::new(2),
        vec![
            BasisElem { name: "e1".into(), degree: 0, left: 1, right: 1 },
            BasisElem { name: "e2".into(), degree: 0, left: 2, right: 2 },
            BasisElem { name: "x".into(), degree: 0, left: 1, right: 2 },
        ],
    ));
    let a = ainf_core::ainfty::from_associative(space, vec![0, 1], &[]).unwrap();
    assert!(validate_ainfty(&a, 6).ok());
    a
}

/// Trivial extension of the arrow algebra by its diagonal bimodule, with an
/// optional splitting correction scaled by `lambda`.
fn arrow_pair(lambda: i64) -> Rc<SubalgebraPair> {
    let a = arrow_algebra();
    let p = diagonal(&a);
    let (b, a_part) = trivial_extension(&a, &p, 4).unwrap();
    assert!(validate_ainfty(&b, 6).ok());
    if lambda == 0 {
        SubalgebraPair::new(&b, &a_part, None).unwrap()
    } else {
        // quotient basis = the P copies of (e1, e2, x); correct by
        // lambda * (matching A element)
        let quot_basis: Vec<BasisElem> = b
            .space
            .basis
            .iter()
            .enumerate()
            .filter(|(i, _)| !a_part.contains(&(*i as u32)))
            .map(|(_, e)| e.clone())
            .collect();
        let quot_space = Rc::new(GradedSpace::new(b.space.field, b.space.ring, quot_basis));
        let mut corr = GradedMap::zero(quot_space.clone(), b.space.clone(), 0);
        // correct only the arrow column: the resulting splitting is not a
        // bimodule homomorphism, so its boundary is nonzero
        for q in quot_space.indices() {
            if quot_space.labels(q) != (1, 2) {
                continue;
            }
            let a_match = b
                .space
                .indices()
                .find(|&i| {
                    a_part.contains(&i)
                        && b.space.degree(i) == quot_space.degree(q)
                        && b.space.labels(i) == (1, 2)
                })
                .unwrap();
            corr.set_col(q, b.space.basis_elem(a_match).scale_i64(lambda));
        }
        SubalgebraPair::new(&b, &a_part, Some(&corr)).unwrap()
    }
}

#[test]
fn trivial_extension_quotient_equals_the_bimodule() {
    let a = arrow_algebra();
    let p = diagonal(&a);
    let (b, a_part) = trivial_extension(&a, &p, 4).unwrap();
    let pr = SubalgebraPair::new(&b, &a_part, None).unwrap();
    // the quotient bimodule has the same structure constants as P
    for_each_context(&p, 3, &mut |l, m, r| {
        let v1 = p.mu(l, m, r);
        let v2 = pr.ses.quotient.mu(l, m, r);
        // carriers are aligned index-by-index: same order of basis elements
        assert_eq!(
            v1.terms().len(),
            v2.terms().len(),
            "quotient differs from P on a component"
        );
        for ((i1, c1), (i2, c2)) in v1.terms().iter().zip(v2.terms()) {
            assert_eq!(p.space.name(*i1), {
                let n = pr.ses.quotient.space.name(*i2);
                n.strip_prefix("p:").unwrap_or(n)
            });
            assert_eq!(c1, c2);
        }
    });
    assert!(validate_bimodule(&pr.ses.quotient, 4).ok());
    assert!(validate_bimodule(&pr.b_bimod, 4).ok());
}

#[test]
fn canonical_splitting_of_a_trivial_extension_has_zero_boundary() {
    for pr in [annulus(), arrow_pair(0)] {
        let delta = pr.delta_shift();
        assert!(prehom_is_zero(&delta, 4));
        let delta2 = delta_from_ses(&pr);
        assert!(prehom_is_zero(&delta2, 4));
    }
}

#[test]
fn delta_from_both_routes_agree() {
    for lambda in [0, 1, 3] {
        let pr = arrow_pair(lambda);
        let d1 = pr.delta_shift();
        let d2 = delta_from_ses(&pr);
        assert!(prehoms_equal(&d1, &d2, 4), "lambda = {lambda}");
    }
}

#[test]
fn boundary_is_a_cocycle_and_splitting_independent_up_to_exactness() {
    let pr0 = arrow_pair(0);
    let pr1 = arrow_pair(2);
    let d0 = pr0.delta_shift();
    let d1 = pr1.delta_shift();
    assert!(prehom_is_zero(&prehom_differential(&d1), 4));
    assert!(!prehom_is_zero(&d1, 4), "corrected splitting gives nonzero delta");
    // delta' - delta = ∂(eta) where eta is the correction, viewed as a
    // degree -1 pre-homomorphism (B/A)[-1] -> A through the shift
    let eta = {
        // the correction sends the quotient arrow to lambda * x; build it as
        // a linear map on the shifted quotient
        let mut map = GradedMap::zero(
            pr0.ba_shift.space.clone(),
            pr0.a_diag.space.clone(),
            -1,
        );
        for q in pr0.ba_shift.space.indices() {
            if pr0.ba_shift.space.labels(q) != (1, 2) {
                continue;
            }
            let name = pr0.ba_shift.space.name(q);
            let stripped = name.strip_prefix("p:").unwrap_or(name);
            let i = pr0.a_diag.space.lookup(stripped).unwrap();
            map.set_col(q, pr0.a_diag.space.basis_elem(i).scale_i64(2));
        }
        PreHom::linear(&pr0.ba_shift, &pr0.a_diag, map)
    };
    let boundary_eta = prehom_differential(&eta);
    let diff = prehom_sub(&d1, &d0);
    // orientation: delta' - delta = ±∂eta; exactly one sign must match
    let plus = prehoms_equal(&diff, &boundary_eta, 4);
    let minus = prehoms_equal(&prehom_sub(&d0, &d1), &boundary_eta, 4);
    assert!(plus || minus, "splitting difference must be exact");
}

#[test]
fn kappa_identity_on_trivial_extensions() {
    for (name, pr) in [
        ("annulus", annulus()),
        ("arrow-canonical", arrow_pair(0)),
        ("arrow-corrected", arrow_pair(1)),
    ] {
        let src = kappa_source(&pr);
        let kappa = pr.kappa(&src);
        let dk = prehom_differential(&kappa);
        let (right, left) = whisker_sides(&pr, &src);
        let difference = prehom_sub(&right, &left);
        assert!(
            prehoms_equal(&dk, &difference, 4),
            "kappa identity fails on {name}"
        );
    }
}

#[test]
fn ladder_p1_is_shifted_b() {
    let pr = arrow_pair(0);
    let lad = ladder(&pr, 1);
    assert!(validate_bimodule(&lad.bimodule, 3).ok());
    // same structure constants as tB[1] = B[-1] under the name bijection
    for_each_context(&pr.b_shift, 3, &mut |l, m, r| {
        let v_shift = pr.b_shift.mu(l, m, r);
        let lm = lad
            .bimodule
            .space
            .lookup(&format!("t1·{}", pr.b_shift.space.name(m)))
            .unwrap();
        let v_lad = lad.bimodule.mu(l, lm, r);
        let transported = v_lad.map_indices(|i| {
            let n = lad.bimodule.space.name(i);
            pr.b_shift.space.lookup(n.strip_prefix("t1·").unwrap())
        });
        assert_eq!(v_shift, transported);
    });
}

#[test]
fn ladder_projection_is_quasi_iso_for_p2() {
    for pr in [annulus(), arrow_pair(0), arrow_pair(1)] {
        let lad = ladder(&pr, 2);
        let rep = validate_bimodule(&lad.bimodule, 3);
        assert!(rep.ok(), "{:?}", rep.violations.first());
        let (_ind, iso) = ladder_projection_induced(&lad);
        assert!(iso, "pi^2 must induce an isomorphism on cohomology");
    }
}

#[test]
fn ladder_weight_conservation() {
    let pr = arrow_pair(0);
    let lad = ladder(&pr, 2);
    // every structure map conserves total weight p = 2: outputs stay inside
    // the p = 2 carrier by construction (the rule would panic otherwise);
    // spot check some products are nonzero
    let mut nonzero = 0;
    for_each_context(&lad.bimodule, 2, &mut |l, m, r| {
        if !lad.bimodule.mu(l, m, r).is_zero() {
            nonzero += 1;
        }
    });
    assert!(nonzero > 0);
}

#[test]
fn ambidexterity_on_trivial_extensions() {
    // M = the free module Ae1 materialized as a left module
    for pr in [annulus(), arrow_pair(0), arrow_pair(1)] {
        let m = ainf_core::curved::projective_module(&pr.a, 1);
        let amb = ambidexterity(&pr, &m);
        assert!(amb.agree, "the two whiskerings must agree on cohomology");
        // for trivial extensions with canonical sigma both maps vanish
    }
}

#[test]
fn whiskers_vanish_on_cohomology_for_canonical_trivial_extension() {
    let pr = arrow_pair(0);
    let m = ainf_core::curved::projective_module(&pr.a, 1);
    let amb = ambidexterity(&pr, &m);
    for (_, mat, _) in &amb.right.per_degree {
        assert!(mat.is_zero());
    }
}

#[test]
fn exterior_style_cohomology_of_quotient() {
    // sanity: the quotient of the arrow pair has the diagonal cohomology
    let pr = arrow_pair(0);
    let h = bimodule_cohomology(&pr.ses.quotient);
    assert_eq!(h.total_dim(), 3);
    let _ = splitting_correction_dim(&pr);
    let _ = Elem::zero();
}
