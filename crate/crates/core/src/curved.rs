//! The curved algebra D = A ⊕ tB[[t]] (weight-truncated), torsion modules
//! by pullback, the hom complex of pullback modules with its t-adic
//! filtration, the cocycle psi and homotopy nu, localized Hom spaces as
//! direct limits, and the enlarged tensor complex with its weight
//! filtration. Module constructors for left modules live here too.

use crate::ainfty::AInftyAlgebra;
use crate::bimod::{BimKind, Bimodule, OpKey};
use crate::graded::{BasisElem, Elem, GradedSpace};
use crate::sign::sign_pow;
use std::rc::Rc;

/// The free left module A e_i, as an (A, K)-bimodule.
pub fn projective_module(a: &Rc<AInftyAlgebra>, idem: u8) -> Rc<Bimodule> {
    let keep: Vec<u32> = a
        .space
        .indices()
        .filter(|&x| a.space.labels(x).1 == idem)
        .collect();
    module_on_subset(a, keep)
}

fn module_on_subset(a: &Rc<AInftyAlgebra>, keep: Vec<u32>) -> Rc<Bimodule> {
    let ground = AInftyAlgebra::ground(a.field());
    let basis: Vec<BasisElem> = keep
        .iter()
        .map(|&x| {
            let b = &a.space.basis[x as usize];
            BasisElem {
                name: b.name.clone(),
                degree: b.degree,
                left: b.left,
                // the right action is by the ground field only
                right: 1,
            }
        })
        .collect();
    let space = Rc::new(GradedSpace::new(a.field(), a.space.ring, basis));
    let aa = a.clone();
    let keep_rc = Rc::new(keep);
    let back: Rc<std::collections::HashMap<u32, u32>> = Rc::new(
        keep_rc
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, i as u32))
            .collect(),
    );
    let rule = move |_me: &Bimodule, key: &OpKey| -> Elem {
        if !key.r.is_empty() {
            return Elem::zero();
        }
        let circ: i64 = key.l.iter().map(|&x| aa.red_deg(x)).sum();
        let mut w = key.l.clone();
        w.push(keep_rc[key.m as usize]);
        let v = aa.mu_word(&w).scale_i64(sign_pow(circ + 1));
        let out = v.map_indices(|i| back.get(&i).copied());
        debug_assert_eq!(out.terms().len(), v.terms().len(), "module not closed");
        out
    };
    Bimodule::new(a.clone(), ground, space, BimKind::Rule(Rc::new(rule)))
}

/// The simple module R e_i: the unit line with all higher actions zero.
pub fn simple_module(a: &Rc<AInftyAlgebra>, idem: u8) -> Rc<Bimodule> {
    let ground = AInftyAlgebra::ground(a.field());
    let unit = a.units[(idem - 1) as usize];
    let basis = vec![BasisElem {
        name: a.space.name(unit).to_string(),
        degree: 0,
        left: idem,
        right: 1,
    }];
    let space = Rc::new(GradedSpace::new(a.field(), a.space.ring, basis));
    let rule = move |_me: &Bimodule, _key: &OpKey| -> Elem { Elem::zero() };
    Bimodule::new(a.clone(), ground, space, BimKind::Rule(Rc::new(rule)))
}
