//! The exterior fixture's boundary class: the canonical cocycle
//! epsilon ∘ (delta[-1] ⊗ 1) on the simple module at the first vertex has
//! cohomology class the cubic s (up to a nonzero scalar), detected through
//! the pairing with Sym³H inside H ⊗ H ⊗ H.

use ainf_core::bimod::{hom_complex, prehom_differential, prehom_is_zero};
use ainf_core::curved::projective_module;
use ainf_core::fixtures::{build_exterior, Exterior};
use ainf_core::graded::Elem;
use ainf_core::matrix::Span;
use ainf_core::pair::{splitting_correction_dim, t_component};
use ainf_core::scalar::{FieldSpec, Scalar};
use ainf_core::tensor::tensor_chain;

struct ClassData {
    /// dimension of H^0 of the hom complex
    h0_dim: usize,
    /// is the class of T_M nonzero in H^0
    nonzero: bool,
    /// values of the cocycle functional on the ten symmetrized monomials,
    /// indexed by sorted triples (a, b, c)
    sym_values: Vec<((u8, u8, u8), Scalar)>,
}

fn class_data(fx: &Exterior) -> ClassData {
    let pr = &fx.pair;
    let field = pr.b.field();
    let m = projective_module(&pr.a, 1);
    assert_eq!(m.space.dim(), 1, "Ae1 is simple for the directed subalgebra");
    let x1 = tensor_chain(vec![pr.ba_shift.clone(), m.clone()], None);
    let tm = t_component(pr, &m);
    assert_eq!(tm.degree, 0);
    assert!(prehom_is_zero(&prehom_differential(&tm), 4), "T_M is a cocycle");
    let hc = hom_complex(&x1, &m, 4).unwrap();
    let h = hc.complex.cohomology().unwrap();
    let h0_dim = h.dim_in_degree(0);

    // coordinates of the cocycle in degree 0
    let (deg, coords) = hc.coords_in_degree(&tm, 4).unwrap();
    assert_eq!(deg, 0);
    // class nonzero: not in the image of the incoming differential
    let slot0 = hc.complex.slot(0).unwrap();
    let mut img = Span::new(field);
    if slot0 > 0 {
        let d_in = &hc.complex.diffs[slot0 - 1];
        for c in 0..d_in.ncols {
            img.insert_untracked(d_in.col(c).clone());
        }
    }
    let nonzero = !img.contains(&coords);

    // identify degree-0 generators with triples (a, b, c): the generator
    // with left word (h12.a, h23.b), slot word h31.c ⊗ e1
    let gens = &hc.gens[slot0];
    let triple_of = |gi: usize| -> (u8, u8, u8) {
        let g = &gens[gi];
        assert_eq!(g.key.l.len(), 2);
        let n1 = pr.a.space.name(g.key.l[0]);
        let n2 = pr.a.space.name(g.key.l[1]);
        let w = &x1.chain_words().unwrap()[g.key.m as usize];
        let n3 = pr.ba_shift.space.name(w.slots[0]);
        let parse = |n: &str, prefix: &str| -> u8 {
            n.strip_prefix(prefix).unwrap().parse::<u8>().unwrap()
        };
        (parse(n1, "h12."), parse(n2, "h23."), parse(n3, "h31."))
    };
    assert_eq!(gens.len(), 27);
    let mut index_of_triple = std::collections::HashMap::new();
    for gi in 0..gens.len() {
        index_of_triple.insert(triple_of(gi), gi as u32);
    }

    // the ten symmetrized monomials span the kernel of the transposed
    // incoming differential (the cycles of the dual wedge complex)
    let d_in = &hc.complex.diffs[slot0 - 1];
    let mut sym_values = Vec::new();
    let mut sym_vectors: Vec<Elem> = Vec::new();
    for a in 1u8..=3 {
        for b in a..=3 {
            for c in b..=3 {
                let mut perms = vec![
                    (a, b, c),
                    (a, c, b),
                    (b, a, c),
                    (b, c, a),
                    (c, a, b),
                    (c, b, a),
                ];
                perms.sort();
                perms.dedup();
                let v = Elem::from_terms(
                    perms
                        .iter()
                        .map(|t| (index_of_triple[t], field.one()))
                        .collect(),
                );
                // perpendicular to the image of the incoming differential
                for col in 0..d_in.ncols {
                    let mut dot = field.zero();
                    for (i, cc) in d_in.col(col).terms() {
                        if let Some(vc) = v.coeff(*i) {
                            dot += &(vc * cc);
                        }
                    }
                    assert!(dot.is_zero(), "symmetrized tensors must be cycles");
                }
                // pair with the cocycle
                let mut val = field.zero();
                for (i, cc) in v.terms() {
                    if let Some(fc) = coords.coeff(*i) {
                        val += &(fc * cc);
                    }
                }
                sym_values.push(((a, b, c), val));
                sym_vectors.push(v);
            }
        }
    }
    // the ten vectors are independent
    let mut span = Span::new(field);
    for v in &sym_vectors {
        assert!(span.insert_untracked(v.clone()));
    }
    ClassData { h0_dim, nonzero, sym_values }
}

#[test]
fn sigma_is_unique_for_the_exterior_pair() {
    let f = FieldSpec::Rational;
    let fx = build_exterior(f, &f.one()).unwrap();
    assert_eq!(splitting_correction_dim(&fx.pair), 0);
}

#[test]
fn hom_h0_is_sym3_dual_and_class_is_the_cubic() {
    let f = FieldSpec::Rational;
    let fx = build_exterior(f, &f.one()).unwrap();
    let data = class_data(&fx);
    assert_eq!(data.h0_dim, 10);
    assert!(data.nonzero, "the boundary class must be nonzero for c = 1");
    for ((a, b, c), val) in &data.sym_values {
        if (*a, *b, *c) == (1, 2, 3) {
            assert!(!val.is_zero(), "the class must hit the h1h2h3 monomial");
        } else {
            assert!(
                val.is_zero(),
                "the class must vanish on the monomial ({a},{b},{c})"
            );
        }
    }
}

#[test]
fn class_vanishes_for_zero_cubic() {
    let f = FieldSpec::Rational;
    let fx = build_exterior(f, &f.zero()).unwrap();
    let data = class_data(&fx);
    assert_eq!(data.h0_dim, 10);
    assert!(!data.nonzero, "the boundary class must vanish for c = 0");
    for (_, val) in &data.sym_values {
        assert!(val.is_zero());
    }
}

#[test]
fn class_scales_linearly_in_c() {
    let f = FieldSpec::Rational;
    let d1 = class_data(&build_exterior(f, &f.one()).unwrap());
    let d2 = class_data(&build_exterior(f, &f.from_i64(2)).unwrap());
    let v1 = &d1.sym_values.iter().find(|(t, _)| *t == (1, 2, 3)).unwrap().1;
    let v2 = &d2.sym_values.iter().find(|(t, _)| *t == (1, 2, 3)).unwrap().1;
    assert_eq!(v2, &(v1 * &f.from_i64(2)));
}

#[test]
fn class_over_a_prime_field() {
    let f = FieldSpec::prime(13).unwrap();
    let fx = build_exterior(f, &f.one()).unwrap();
    let data = class_data(&fx);
    assert_eq!(data.h0_dim, 10);
    assert!(data.nonzero);
}
