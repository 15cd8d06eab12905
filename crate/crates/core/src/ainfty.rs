//! Strictly unital A-infinity algebras over R = K^d: structure maps, the
//! associativity equations (curved and uncurved), and the bar differential.
//!
//! Structure constants are stored on reduced words only (no unit entries);
//! the unit acts through the strict unitality rules. The curvature term mu0
//! is carried uniformly and is zero for honest algebras.

use crate::complex::TruncatedComplex;
use crate::graded::{BasisElem, Elem, GradedSpace};
use crate::matrix::SparseMat;
use crate::scalar::FieldSpec;
use crate::sign::sign_pow;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;

#[derive(Clone, Debug)]
pub struct AInftyAlgebra {
    pub space: Rc<GradedSpace>,
    /// units[i] is the basis index of e_{i+1}.
    pub units: Vec<u32>,
    /// Basis indices of the reduced part (complement of the unit lines).
    pub reduced: Vec<u32>,
    /// Structure constants on reduced words; key length d gives mu^d.
    mu: BTreeMap<Vec<u32>, Elem>,
    /// Curvature mu^0, a degree-2 element with diagonal labels.
    pub mu0: Elem,
    /// Largest arity with a (possibly) nonzero structure map.
    pub d_max: u32,
}

impl PartialEq for AInftyAlgebra {
    fn eq(&self, other: &Self) -> bool {
        *self.space == *other.space
            && self.units == other.units
            && self.mu == other.mu
            && self.mu0 == other.mu0
    }
}

impl AInftyAlgebra {
    pub fn new(
        space: Rc<GradedSpace>,
        units: Vec<u32>,
        mu: BTreeMap<Vec<u32>, Elem>,
        mu0: Elem,
    ) -> Result<Rc<AInftyAlgebra>, String> {
        let d = space.ring.d as usize;
        if units.len() != d {
            return Err(format!("need {} unit elements, got {}", d, units.len()));
        }
        for (i, &u) in units.iter().enumerate() {
            let b = &space.basis[u as usize];
            if b.degree != 0 || b.left != (i + 1) as u8 || b.right != (i + 1) as u8 {
                return Err(format!("unit {} must have degree 0 and labels ({},{})", b.name, i + 1, i + 1));
            }
        }
        let unit_set: HashSet<u32> = units.iter().copied().collect();
        let reduced: Vec<u32> = space.indices().filter(|i| !unit_set.contains(i)).collect();
        let mut d_max = 2u32;
        let mut table = BTreeMap::new();
        for (key, val) in mu {
            if val.is_zero() {
                continue;
            }
            if key.is_empty() {
                return Err("mu^0 must be passed separately".into());
            }
            for &x in &key {
                if unit_set.contains(&x) {
                    return Err(format!(
                        "structure constant on a word containing the unit {}",
                        space.name(x)
                    ));
                }
            }
            // composability of the word
            for w in key.windows(2) {
                if space.labels(w[0]).1 != space.labels(w[1]).0 {
                    return Err(format!(
                        "non-composable word ({}, {})",
                        space.name(w[0]),
                        space.name(w[1])
                    ));
                }
            }
            let want_deg: i64 =
                key.iter().map(|&x| space.degree(x)).sum::<i64>() + 2 - key.len() as i64;
            let want_left = space.labels(key[0]).0;
            let want_right = space.labels(*key.last().unwrap()).1;
            for (j, _) in val.terms() {
                if space.degree(*j) != want_deg {
                    return Err(format!(
                        "mu^{} on ({}) is not degree-homogeneous",
                        key.len(),
                        key.iter().map(|&x| space.name(x)).collect::<Vec<_>>().join(", ")
                    ));
                }
                if space.labels(*j) != (want_left, want_right) {
                    return Err(format!(
                        "mu^{} on ({}) violates idempotent labels",
                        key.len(),
                        key.iter().map(|&x| space.name(x)).collect::<Vec<_>>().join(", ")
                    ));
                }
            }
            d_max = d_max.max(key.len() as u32);
            table.insert(key, val);
        }
        for (j, _) in mu0.terms() {
            let b = &space.basis[*j as usize];
            if b.degree != 2 || b.left != b.right {
                return Err("curvature must have degree 2 and diagonal labels".into());
            }
        }
        Ok(Rc::new(AInftyAlgebra {
            space,
            units,
            reduced,
            mu: table,
            mu0,
            d_max,
        }))
    }

    pub fn field(&self) -> FieldSpec {
        self.space.field
    }

    pub fn is_curved(&self) -> bool {
        !self.mu0.is_zero()
    }

    pub fn is_unit(&self, i: u32) -> bool {
        self.units.contains(&i)
    }

    /// The ground field K as the trivial algebra (d = 1, only the unit).
    pub fn ground(field: FieldSpec) -> Rc<AInftyAlgebra> {
        let space = Rc::new(GradedSpace::new(
            field,
            crate::graded::BaseRing::new(1),
            vec![BasisElem { name: "1".into(), degree: 0, left: 1, right: 1 }],
        ));
        AInftyAlgebra::new(space, vec![0], BTreeMap::new(), Elem::zero()).unwrap()
    }

    /// Reduced degree ||a|| = |a| - 1 of a basis element.
    pub fn red_deg(&self, i: u32) -> i64 {
        self.space.degree(i) - 1
    }

    pub fn table(&self) -> &BTreeMap<Vec<u32>, Elem> {
        &self.mu
    }

    /// mu^d on a basis word; entries may include units, which act through
    /// the strict unitality rules. Non-composable words give 0.
    pub fn mu_word(&self, word: &[u32]) -> Elem {
        match word.len() {
            0 => self.mu0.clone(),
            1 => {
                if self.is_unit(word[0]) {
                    Elem::zero()
                } else {
                    self.mu.get(word).cloned().unwrap_or_else(Elem::zero)
                }
            }
            2 => {
                let (x, y) = (word[0], word[1]);
                match (self.is_unit(x), self.is_unit(y)) {
                    (true, _) => {
                        // mu^2(e_i, a) = a when labels match
                        if self.space.labels(x).1 == self.space.labels(y).0 {
                            self.space.basis_elem(y)
                        } else {
                            Elem::zero()
                        }
                    }
                    (false, true) => {
                        // mu^2(a, e_i) = (-1)^{||a||+1} a
                        if self.space.labels(x).1 == self.space.labels(y).0 {
                            self.space
                                .basis_elem(x)
                                .scale_i64(sign_pow(self.red_deg(x) + 1))
                        } else {
                            Elem::zero()
                        }
                    }
                    (false, false) => self.mu.get(word).cloned().unwrap_or_else(Elem::zero),
                }
            }
            _ => {
                if word.iter().any(|&x| self.is_unit(x)) {
                    Elem::zero()
                } else {
                    self.mu.get(word).cloned().unwrap_or_else(Elem::zero)
                }
            }
        }
    }

    /// Multilinear extension of mu over element entries.
    pub fn mu_elems(&self, entries: &[Elem]) -> Elem {
        let mut words: Vec<(Vec<u32>, crate::scalar::Scalar)> =
            vec![(Vec::new(), self.field().one())];
        for e in entries {
            let mut next = Vec::new();
            for (w, c) in &words {
                for (i, a) in e.terms() {
                    let mut w2 = w.clone();
                    w2.push(*i);
                    next.push((w2, c * a));
                }
            }
            words = next;
            if words.is_empty() {
                return Elem::zero();
            }
        }
        let mut out = Elem::zero();
        for (w, c) in words {
            out.add_assign(&self.mu_word(&w).scale(&c));
        }
        out
    }

    /// Project an element to the reduced part (drop unit components).
    pub fn reduce_elem(&self, e: &Elem) -> Elem {
        e.map_indices(|i| if self.is_unit(i) { None } else { Some(i) })
    }

    /// All composable reduced words of length between lo and hi, optionally
    /// with fixed boundary labels.
    pub fn reduced_words(
        &self,
        lo: usize,
        hi: usize,
        left: Option<u8>,
        right: Option<u8>,
    ) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut stack: Vec<Vec<u32>> = vec![Vec::new()];
        while let Some(w) = stack.pop() {
            if w.len() >= lo {
                let ok_l = left.map_or(true, |l| {
                    w.first().map_or(true, |&x| self.space.labels(x).0 == l)
                });
                let ok_r = right.map_or(true, |r| {
                    w.last().map_or(true, |&x| self.space.labels(x).1 == r)
                });
                // empty word matches any single label constraint pair l==r
                let ok_empty = !w.is_empty() || left.is_none() || right.is_none() || left == right;
                if ok_l && ok_r && ok_empty {
                    out.push(w.clone());
                }
            }
            if w.len() < hi {
                for &x in &self.reduced {
                    if let Some(&last) = w.last() {
                        if self.space.labels(last).1 != self.space.labels(x).0 {
                            continue;
                        }
                    } else if let Some(l) = left {
                        if self.space.labels(x).0 != l {
                            continue;
                        }
                    }
                    let mut w2 = w.clone();
                    w2.push(x);
                    stack.push(w2);
                }
            }
        }
        out.sort();
        out
    }

    /// True when morphisms flow strictly upward through the idempotent
    /// order, which bounds all bar words by length d-1.
    pub fn is_directed(&self) -> bool {
        self.reduced.iter().all(|&x| {
            let (l, r) = self.space.labels(x);
            l < r
        })
    }
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub tuple: Vec<String>,
    pub residual: String,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub arity_checked: u32,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the A-infinity associativity equations on all reduced basis tuples
/// up to the arity bound, including curvature insertions when mu0 != 0.
/// Tuples on which every term vanishes are skipped soundly.
pub fn validate_ainfty(a: &AInftyAlgebra, arity_bound: u32) -> ValidationReport {
    let mut violations = Vec::new();
    let keys: HashSet<&Vec<u32>> = a.table().keys().collect();
    let curved = a.is_curved();
    let mut seen = 0usize;
    for_each_composable_word(a, arity_bound as usize, &mut |word| {
        seen += 1;
        // quick skip: no contiguous block hits the table and no curvature
        if !curved {
            let mut hit = word.len() == 1 && keys.contains(&word.to_vec());
            'scan: for i in 0..word.len() {
                for j in i + 1..=word.len() {
                    if keys.contains(&word[i..j].to_vec()) {
                        hit = true;
                        break 'scan;
                    }
                }
            }
            if !hit {
                return;
            }
        }
        let residual = ainfty_residual(a, word);
        if !residual.is_zero() {
            violations.push(Violation {
                tuple: word.iter().map(|&x| a.space.name(x).to_string()).collect(),
                residual: residual.render(&a.space),
            });
        }
    });
    ValidationReport { violations, arity_checked: arity_bound }
}

/// The left side of the associativity equation on one reduced word.
pub fn ainfty_residual(a: &AInftyAlgebra, word: &[u32]) -> Elem {
    let s = word.len();
    let mut out = Elem::zero();
    // n >= 1 insertions
    for m in 0..s {
        for n in 1..=s - m {
            let inner = a.mu_word(&word[m..m + n]);
            if inner.is_zero() {
                continue;
            }
            let star: i64 = word[..m].iter().map(|&x| a.red_deg(x)).sum();
            let outer = outer_apply(a, &word[..m], &inner, &word[m + n..]);
            out.add_assign(&outer.scale_i64(sign_pow(star)));
        }
    }
    // curvature insertions (n = 0)
    if a.is_curved() {
        for m in 0..=s {
            let star: i64 = word[..m].iter().map(|&x| a.red_deg(x)).sum();
            let outer = outer_apply(a, &word[..m], &a.mu0, &word[m..]);
            out.add_assign(&outer.scale_i64(sign_pow(star)));
        }
    }
    out
}

fn outer_apply(a: &AInftyAlgebra, left: &[u32], mid: &Elem, right: &[u32]) -> Elem {
    let mut out = Elem::zero();
    for (i, c) in mid.terms() {
        let mut w = left.to_vec();
        w.push(*i);
        w.extend_from_slice(right);
        out.add_assign(&a.mu_word(&w).scale(c));
    }
    out
}

fn for_each_composable_word(a: &AInftyAlgebra, max_len: usize, f: &mut impl FnMut(&[u32])) {
    let mut word: Vec<u32> = Vec::new();
    fn rec(a: &AInftyAlgebra, word: &mut Vec<u32>, max_len: usize, f: &mut impl FnMut(&[u32])) {
        if !word.is_empty() {
            f(word);
        }
        if word.len() == max_len {
            return;
        }
        for &x in &a.reduced {
            if let Some(&last) = word.last() {
                if a.space.labels(last).1 != a.space.labels(x).0 {
                    continue;
                }
            }
            word.push(x);
            rec(a, word, max_len, f);
            word.pop();
        }
    }
    rec(a, &mut word, max_len, f);
    // curved algebras also have equations on the empty word
    if a.is_curved() {
        f(&[]);
    }
    let _ = word;
}

/// The trivial extension algebra B = A ⊕ P of an algebra by a bimodule:
/// mu_B restricts to mu_A on A entries, equals (-1)^{o+1} mu_P^{r|1|s} on
/// words with exactly one P entry, and vanishes on two or more P entries.
/// Returns the algebra together with the basis indices of the A part.
/// The enumeration of P components is bounded by `arity`.
pub fn trivial_extension(
    a: &Rc<AInftyAlgebra>,
    p: &Rc<crate::bimod::Bimodule>,
    arity: u32,
) -> Result<(Rc<AInftyAlgebra>, Vec<u32>), String> {
    use crate::bimod::for_each_context;
    assert!(Rc::ptr_eq(&p.left, a) && Rc::ptr_eq(&p.right, a), "P must be an (A,A)-bimodule");
    let mut basis: Vec<BasisElem> = a.space.basis.clone();
    let offset = basis.len() as u32;
    for b in &p.space.basis {
        let name = if a.space.lookup(&b.name).is_some() {
            format!("p:{}", b.name)
        } else {
            b.name.clone()
        };
        basis.push(BasisElem { name, degree: b.degree, left: b.left, right: b.right });
    }
    let space = Rc::new(GradedSpace::new(a.space.field, a.space.ring, basis));
    let mut mu: BTreeMap<Vec<u32>, Elem> = a.table().clone();
    for (key, val) in a.table() {
        mu.insert(key.clone(), val.clone());
    }
    let mut err = None;
    for_each_context(p, arity, &mut |l, m, r| {
        if err.is_some() {
            return;
        }
        let v = p.mu(l, m, r);
        if v.is_zero() {
            return;
        }
        let circ: i64 = l.iter().map(|&x| a.red_deg(x)).sum();
        let mut key: Vec<u32> = l.to_vec();
        key.push(m + offset);
        key.extend_from_slice(r);
        let shifted = v
            .map_indices(|i| Some(i + offset))
            .scale_i64(sign_pow(circ + 1));
        if mu.insert(key, shifted).is_some() {
            err = Some("key collision in trivial extension".to_string());
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let b = AInftyAlgebra::new(space, a.units.clone(), mu, Elem::zero())?;
    let a_part: Vec<u32> = (0..offset).collect();
    Ok((b, a_part))
}

/// Build a strictly unital A-infinity algebra from an ordinary associative
/// product table on non-unit basis elements, via mu^2(x, y) = (-1)^{|x|} x*y.
pub fn from_associative(
    space: Rc<GradedSpace>,
    units: Vec<u32>,
    products: &[((u32, u32), Elem)],
) -> Result<Rc<AInftyAlgebra>, String> {
    let mut mu = BTreeMap::new();
    for ((x, y), v) in products {
        if v.is_zero() {
            continue;
        }
        let tw = v.scale_i64(sign_pow(space.degree(*x)));
        mu.insert(vec![*x, *y], tw);
    }
    AInftyAlgebra::new(space, units, mu, Elem::zero())
}

/// Names for bar words: "[]i" for the empty word at e_i, else "[x|y|..]".
fn bar_word_name(a: &AInftyAlgebra, word: &[u32], idem: u8) -> String {
    if word.is_empty() {
        format!("[]{}", idem)
    } else {
        format!(
            "[{}]",
            word.iter().map(|&x| a.space.name(x)).collect::<Vec<_>>().join("|")
        )
    }
}

/// The reduced bar complex ⊕_{l ≤ L} (Ā[1])^{⊗l} with the coalgebra
/// differential. Requires an uncurved algebra.
pub fn bar_differential(a: &Rc<AInftyAlgebra>, max_len: usize) -> Result<TruncatedComplex, String> {
    if a.is_curved() {
        return Err("bar construction requires an uncurved algebra".into());
    }
    // enumerate words grouped by degree
    #[derive(Clone)]
    struct W {
        word: Vec<u32>,
        idem: u8, // for empty words
        degree: i64,
    }
    let mut words: Vec<W> = Vec::new();
    for i in a.space.ring.idempotents() {
        words.push(W { word: vec![], idem: i, degree: 0 });
    }
    for len in 1..=max_len {
        for w in a.reduced_words(len, len, None, None) {
            let degree = w.iter().map(|&x| a.red_deg(x)).sum();
            let idem = a.space.labels(w[0]).0;
            words.push(W { word: w, idem, degree });
        }
    }
    let complete = a.reduced_words(max_len + 1, max_len + 1, None, None).is_empty();
    let (lo, hi) = match (words.iter().map(|w| w.degree).min(), words.iter().map(|w| w.degree).max()) {
        (Some(a), Some(b)) => (a, b),
        _ => (0, 0),
    };
    let mut bases: Vec<Vec<String>> = vec![Vec::new(); (hi - lo + 1) as usize];
    let mut index: HashMap<(Vec<u32>, u8), (usize, usize)> = HashMap::new();
    for w in &words {
        let slot = (w.degree - lo) as usize;
        let key = (w.word.clone(), if w.word.is_empty() { w.idem } else { 0 });
        index.insert(key, (slot, bases[slot].len()));
        bases[slot].push(bar_word_name(a, &w.word, w.idem));
    }
    let mut diffs: Vec<SparseMat> = (0..bases.len())
        .map(|k| {
            let next = if k + 1 < bases.len() { bases[k + 1].len() } else { 0 };
            SparseMat::zero(next, bases[k].len(), a.field())
        })
        .collect();
    for w in &words {
        let key = (w.word.clone(), if w.word.is_empty() { w.idem } else { 0 });
        let (slot, col) = index[&key];
        let image = bar_diff_word(a, &w.word);
        for (nw, coeff) in image {
            let nkey_idem = if nw.is_empty() {
                // empty word output keeps the boundary idempotent
                a.space.labels(w.word[0]).0
            } else {
                0
            };
            if let Some(&(tslot, trow)) = index.get(&(nw.clone(), nkey_idem)) {
                assert_eq!(tslot, slot + 1, "bar differential must raise degree by 1");
                let old = diffs[slot].get(trow, col);
                diffs[slot].set(trow, col, &old + &coeff);
            } else if complete {
                panic!("bar differential left the enumerated carrier");
            }
        }
    }
    Ok(TruncatedComplex::new(a.field(), lo, bases, diffs, complete))
}

/// One application of the bar differential to a reduced word: all block
/// insertions of mu, outputs reprojected to the reduced part.
pub fn bar_diff_word(a: &AInftyAlgebra, word: &[u32]) -> Vec<(Vec<u32>, crate::scalar::Scalar)> {
    let mut out: Vec<(Vec<u32>, crate::scalar::Scalar)> = Vec::new();
    let s = word.len();
    for m in 0..s {
        for n in 1..=s - m {
            let inner = a.reduce_elem(&a.mu_word(&word[m..m + n]));
            if inner.is_zero() {
                continue;
            }
            let star: i64 = word[..m].iter().map(|&x| a.red_deg(x)).sum();
            for (i, c) in inner.terms() {
                let mut w = word[..m].to_vec();
                w.push(*i);
                w.extend_from_slice(&word[m + n..]);
                out.push((w, c.times_sign(star)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::BaseRing;

    fn ground_plus_square_zero() -> Rc<AInftyAlgebra> {
        // K[x]/(x^2) flavoured: unit e and one generator x of degree 1 with x*x = 0
        let space = Rc::new(GradedSpace::new(
            FieldSpec::Rational,
            BaseRing::new(1),
            vec![
                BasisElem { name: "e".into(), degree: 0, left: 1, right: 1 },
                BasisElem { name: "x".into(), degree: 1, left: 1, right: 1 },
            ],
        ));
        from_associative(space, vec![0], &[]).unwrap()
    }

    #[test]
    fn associative_algebra_is_valid() {
        let a = ground_plus_square_zero();
        assert!(validate_ainfty(&a, 6).ok());
    }

    #[test]
    fn unit_rules() {
        let a = ground_plus_square_zero();
        // mu^2(e, x) = x
        assert_eq!(a.mu_word(&[0, 1]), a.space.basis_elem(1));
        // mu^2(x, e) = (-1)^{||x||+1} x = -x for |x| = 1
        assert_eq!(a.mu_word(&[1, 0]), a.space.basis_elem(1).scale_i64(-1));
        // mu^2(e, e) = e
        assert_eq!(a.mu_word(&[0, 0]), a.space.basis_elem(0));
        assert!(a.mu_word(&[1, 1]).is_zero());
    }

    #[test]
    fn bar_of_trivial_reduced_part_is_units_only() {
        let k = AInftyAlgebra::ground(FieldSpec::Rational);
        let bar = bar_differential(&k, 3).unwrap();
        assert_eq!(bar.total_dim(), 1);
        assert!(bar.complete);
    }

    #[test]
    fn bar_differential_with_mu1_matches_hand_expansion() {
        // A with reduced part spanned by x (deg 0), y (deg 1), mu^1(x) = y
        let space = Rc::new(GradedSpace::new(
            FieldSpec::Rational,
            BaseRing::new(1),
            vec![
                BasisElem { name: "e".into(), degree: 0, left: 1, right: 1 },
                BasisElem { name: "x".into(), degree: 0, left: 1, right: 1 },
                BasisElem { name: "y".into(), degree: 1, left: 1, right: 1 },
            ],
        ));
        let mut mu = BTreeMap::new();
        mu.insert(vec![1], space.basis_elem(2));
        let a = AInftyAlgebra::new(space, vec![0], mu, Elem::zero()).unwrap();
        assert!(validate_ainfty(&a, 4).ok());
        // d(x ⊗ x) = y ⊗ x + (-1)^{||x||} x ⊗ y = y ⊗ x - x ⊗ y
        let img = bar_diff_word(&a, &[1, 1]);
        let mut map: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
        for (w, c) in img {
            assert!(c.field() == FieldSpec::Rational);
            let v = if c.is_one() { 1 } else { -1 };
            *map.entry(w).or_insert(0) += v;
        }
        assert_eq!(map.get(&vec![2, 1]), Some(&1));
        assert_eq!(map.get(&vec![1, 2]), Some(&-1));
        // and the whole complex squares to zero
        bar_differential(&a, 3).unwrap();
    }

    #[test]
    fn perturbed_constant_is_rejected_with_named_tuple() {
        // truncated polynomial algebra x*x = z, x*z = z*x = w; scaling one
        // constant breaks associativity on (x, x, x)
        let space = Rc::new(GradedSpace::new(
            FieldSpec::Rational,
            BaseRing::new(1),
            vec![
                BasisElem { name: "e".into(), degree: 0, left: 1, right: 1 },
                BasisElem { name: "x".into(), degree: 2, left: 1, right: 1 },
                BasisElem { name: "z".into(), degree: 4, left: 1, right: 1 },
                BasisElem { name: "w".into(), degree: 6, left: 1, right: 1 },
            ],
        ));
        let good = from_associative(
            space.clone(),
            vec![0],
            &[
                ((1, 1), space.basis_elem(2)),
                ((1, 2), space.basis_elem(3)),
                ((2, 1), space.basis_elem(3)),
            ],
        )
        .unwrap();
        assert!(validate_ainfty(&good, 6).ok());
        let mut bad_mu = good.table().clone();
        bad_mu.insert(vec![1, 2], space.basis_elem(3).scale_i64(2));
        let bad = AInftyAlgebra::new(space, vec![0], bad_mu, Elem::zero()).unwrap();
        let report = validate_ainfty(&bad, 6);
        assert!(!report.ok());
        assert_eq!(report.violations[0].tuple, vec!["x", "x", "x"]);
    }
}
