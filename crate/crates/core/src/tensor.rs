//! Bar tensor products of bimodules, their functoriality, the counit maps
//! epsilon with their strict quasi-inverses xi, and cyclic tensor products.
//!
//! Tensor products are kept flat: P_1 ⊗_{A_1} ... ⊗_{A_{k-1}} P_k is one
//! carrier of words (slot, segment, slot, ...), so iterated products need
//! no rebracketing and the two bracketings of a triple product coincide
//! literally.

use crate::ainfty::AInftyAlgebra;
use crate::bimod::{BimKind, Bimodule, ChainWord, HomBody, OpKey, PreHom};
use crate::complex::{ComplexMap, TruncatedComplex};
use crate::graded::{BasisElem, Elem, GradedSpace};
use crate::matrix::SparseMat;
use crate::scalar::Scalar;
use crate::sign::sign_pow;
use std::collections::HashMap;
use std::rc::Rc;

fn seg_words(alg: &AInftyAlgebra, from: u8, to: u8, cap: Option<usize>) -> Vec<Vec<u32>> {
    let max = match cap {
        Some(c) => c,
        None => {
            assert!(
                alg.is_directed(),
                "tensor segment over a non-directed algebra needs a length cap"
            );
            (alg.space.ring.d as usize).saturating_sub(1)
        }
    };
    alg.reduced_words(0, max, Some(from), Some(to))
}

fn word_name(factors: &[Rc<Bimodule>], w: &ChainWord) -> String {
    let mut s = String::new();
    for i in 0..w.slots.len() {
        if i > 0 {
            let seg = &w.segs[i - 1];
            s.push('⟨');
            s.push_str(
                &seg.iter()
                    .map(|&x| factors[i - 1].right.space.name(x))
                    .collect::<Vec<_>>()
                    .join("|"),
            );
            s.push('⟩');
        }
        s.push_str(factors[i].space.name(w.slots[i]));
    }
    s
}

fn word_degree(factors: &[Rc<Bimodule>], w: &ChainWord) -> i64 {
    let mut d = 0;
    for i in 0..w.slots.len() {
        d += factors[i].space.degree(w.slots[i]);
        if i + 1 < w.slots.len() {
            d += w.segs[i]
                .iter()
                .map(|&x| factors[i].right.red_deg(x))
                .sum::<i64>();
        }
    }
    d
}

/// Splice nested tensor chains into a flat factor list.
pub fn chain_factors_of(x: &Rc<Bimodule>) -> Vec<Rc<Bimodule>> {
    match x.chain_factors() {
        Some(fs) => fs.to_vec(),
        None => vec![x.clone()],
    }
}

/// The flat bar tensor product of a list of bimodules over matching
/// algebras; nested chains are spliced. Middle segments are enumerated in
/// full (requires directed middle algebras) unless a cap is given.
pub fn tensor_chain(factors: Vec<Rc<Bimodule>>, seg_cap: Option<usize>) -> Rc<Bimodule> {
    let factors: Vec<Rc<Bimodule>> = factors.iter().flat_map(chain_factors_of).collect();
    assert!(!factors.is_empty());
    if factors.len() == 1 {
        return factors[0].clone();
    }
    for i in 0..factors.len() - 1 {
        assert!(
            Rc::ptr_eq(&factors[i].right, &factors[i + 1].left),
            "tensor factors over mismatched algebras"
        );
    }
    let mut words: Vec<ChainWord> = Vec::new();
    fn rec(
        factors: &[Rc<Bimodule>],
        i: usize,
        w: &mut ChainWord,
        cap: Option<usize>,
        out: &mut Vec<ChainWord>,
    ) {
        if i == factors.len() {
            out.push(w.clone());
            return;
        }
        for slot in factors[i].space.indices() {
            if i > 0 {
                let prev_right = if let Some(&last) = w.segs[i - 1].last() {
                    factors[i - 1].right.space.labels(last).1
                } else {
                    factors[i - 1].space.labels(w.slots[i - 1]).1
                };
                if prev_right != factors[i].space.labels(slot).0 {
                    continue;
                }
            }
            w.slots.push(slot);
            if i + 1 == factors.len() {
                rec(factors, i + 1, w, cap, out);
            } else {
                let from = factors[i].space.labels(slot).1;
                for to in factors[i].right.space.ring.idempotents() {
                    for seg in seg_words(&factors[i].right, from, to, cap) {
                        w.segs.push(seg);
                        rec(factors, i + 1, w, cap, out);
                        w.segs.pop();
                    }
                }
            }
            w.slots.pop();
        }
    }
    let mut w = ChainWord { slots: vec![], segs: vec![] };
    rec(&factors, 0, &mut w, seg_cap, &mut words);
    words.sort();
    words.dedup();
    let basis: Vec<BasisElem> = words
        .iter()
        .map(|w| {
            let left = factors[0].space.labels(w.slots[0]).0;
            let right = factors
                .last()
                .unwrap()
                .space
                .labels(*w.slots.last().unwrap())
                .1;
            BasisElem {
                name: word_name(&factors, w),
                degree: word_degree(&factors, w),
                left,
                right,
            }
        })
        .collect();
    let left_alg = factors[0].left.clone();
    let right_alg = factors.last().unwrap().right.clone();
    let field = factors[0].space.field;
    let ring = factors.iter().fold(
        crate::graded::BaseRing::new(left_alg.space.ring.d.max(right_alg.space.ring.d)),
        |r, f| crate::graded::BaseRing::new(r.d.max(f.space.ring.d)),
    );
    let space = Rc::new(GradedSpace::new(field, ring, basis));
    let index: HashMap<ChainWord, u32> = words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i as u32))
        .collect();
    Bimodule::new(
        left_alg,
        right_alg,
        space,
        BimKind::TensorChain { factors, words, index },
    )
}

/// A ⊗_A X: the chain extended by the diagonal bimodule on the left.
pub fn a_tensor_left(x: &Rc<Bimodule>) -> Rc<Bimodule> {
    let mut factors = vec![crate::bimod::diagonal(&x.left)];
    factors.extend(chain_factors_of(x));
    tensor_chain(factors, None)
}

/// X ⊗_{A'} A': extended by the diagonal on the right.
pub fn a_tensor_right(x: &Rc<Bimodule>) -> Rc<Bimodule> {
    let mut factors = chain_factors_of(x);
    factors.push(crate::bimod::diagonal(&x.right));
    tensor_chain(factors, None)
}

/// Split an ext-chain word into (first slot, first segment, index of the
/// remaining word in x).
fn split_first(ext: &Bimodule, x: &Rc<Bimodule>, m: u32) -> (u32, Vec<u32>, u32) {
    let w = &ext.chain_words().unwrap()[m as usize];
    let rest = ChainWord {
        slots: w.slots[1..].to_vec(),
        segs: w.segs[1..].to_vec(),
    };
    let rest_idx = if x.chain_words().is_some() {
        x.chain_index(&rest).expect("suffix word in x")
    } else {
        debug_assert_eq!(rest.slots.len(), 1);
        rest.slots[0]
    };
    (w.slots[0], w.segs[0].clone(), rest_idx)
}

fn split_last(ext: &Bimodule, x: &Rc<Bimodule>, m: u32) -> (u32, Vec<u32>, u32) {
    let w = &ext.chain_words().unwrap()[m as usize];
    let k = w.slots.len();
    let rest = ChainWord {
        slots: w.slots[..k - 1].to_vec(),
        segs: w.segs[..k - 2].to_vec(),
    };
    let rest_idx = if x.chain_words().is_some() {
        x.chain_index(&rest).expect("prefix word in x")
    } else {
        debug_assert_eq!(rest.slots.len(), 1);
        rest.slots[0]
    };
    (*w.slots.last().unwrap(), w.segs[k - 2].clone(), rest_idx)
}

/// epsilon_left: A ⊗_A X -> X with components (-1)^o mu_X^{r+1+t|1|s}.
pub fn epsilon_left(ext: &Rc<Bimodule>, x: &Rc<Bimodule>) -> Rc<PreHom> {
    let xx = x.clone();
    let rule = move |me: &PreHom, key: &OpKey| -> Elem {
        let (a, seg, rest) = split_first(&me.source, &xx, key.m);
        let circ: i64 = key.l.iter().map(|&i| me.source.left.red_deg(i)).sum();
        let mut left = key.l.clone();
        left.push(a);
        left.extend_from_slice(&seg);
        xx.mu(&left, rest, &key.r).scale_i64(sign_pow(circ))
    };
    PreHom::new(ext.clone(), x.clone(), 0, HomBody::Rule(Rc::new(rule)))
}

/// xi_left: X -> A ⊗_A X, the strict quasi-inverse:
/// xi^{r|1|0}(a_1..a_r, x) = e ⊗ a_1 ⊗ ... ⊗ a_r ⊗ x, other components 0.
pub fn xi_left(ext: &Rc<Bimodule>, x: &Rc<Bimodule>) -> Rc<PreHom> {
    let xx = x.clone();
    let rule = move |me: &PreHom, key: &OpKey| -> Elem {
        if !key.r.is_empty() {
            return Elem::zero();
        }
        let label = if let Some(&f) = key.l.first() {
            me.source.left.space.labels(f).0
        } else {
            me.source.space.labels(key.m).0
        };
        let unit = me.source.left.units[(label - 1) as usize];
        let rest = if let Some(words) = xx.chain_words() {
            words[key.m as usize].clone()
        } else {
            ChainWord { slots: vec![key.m], segs: vec![] }
        };
        let mut slots = vec![unit];
        slots.extend(rest.slots);
        let mut segs = vec![key.l.clone()];
        segs.extend(rest.segs);
        let w = ChainWord { slots, segs };
        match me.target.chain_index(&w) {
            Some(i) => me.target.space.basis_elem(i),
            None => panic!("xi word missing from the extended carrier"),
        }
    };
    PreHom::new(x.clone(), ext.clone(), 0, HomBody::Rule(Rc::new(rule)))
}

/// epsilon_right: X ⊗_{A'} A' -> X with components (-1)^‡ mu_X^{r|1|s+1+t},
/// ‡ = (reduced left degrees) + |x part| + (reduced segment degrees) + 1.
pub fn epsilon_right(ext: &Rc<Bimodule>, x: &Rc<Bimodule>) -> Rc<PreHom> {
    let xx = x.clone();
    let rule = move |me: &PreHom, key: &OpKey| -> Elem {
        let (a, seg, rest) = split_last(&me.source, &xx, key.m);
        let lw: i64 = key.l.iter().map(|&i| me.source.left.red_deg(i)).sum();
        let segw: i64 = seg.iter().map(|&i| xx.right.red_deg(i)).sum();
        let ddag = lw + xx.space.degree(rest) + segw + 1;
        let mut right = seg.clone();
        right.push(a);
        right.extend_from_slice(&key.r);
        xx.mu(&key.l, rest, &right).scale_i64(sign_pow(ddag))
    };
    PreHom::new(ext.clone(), x.clone(), 0, HomBody::Rule(Rc::new(rule)))
}

/// xi_right: X -> X ⊗_{A'} A': xi^{0|1|s}(x, a'..) = x ⊗ a' ⊗ ... ⊗ e'.
pub fn xi_right(ext: &Rc<Bimodule>, x: &Rc<Bimodule>) -> Rc<PreHom> {
    let xx = x.clone();
    let rule = move |me: &PreHom, key: &OpKey| -> Elem {
        if !key.l.is_empty() {
            return Elem::zero();
        }
        let label = if let Some(&f) = key.r.last() {
            me.source.right.space.labels(f).1
        } else {
            me.source.space.labels(key.m).1
        };
        let unit = me.source.right.units[(label - 1) as usize];
        let rest = if let Some(words) = xx.chain_words() {
            words[key.m as usize].clone()
        } else {
            ChainWord { slots: vec![key.m], segs: vec![] }
        };
        let mut slots = rest.slots;
        slots.push(unit);
        let mut segs = rest.segs;
        segs.push(key.r.clone());
        let w = ChainWord { slots, segs };
        match me.target.chain_index(&w) {
            Some(i) => me.target.space.basis_elem(i),
            None => panic!("xi word missing from the extended carrier"),
        }
    };
    PreHom::new(x.clone(), ext.clone(), 0, HomBody::Rule(Rc::new(rule)))
}

/// The naturality homotopy for the epsilon_left square of a
/// pre-homomorphism rho: X -> Y: components (-1)^o rho^{r+1+t|1|s}, of
/// degree |rho| - 1, from A ⊗_A X to Y.
pub fn epsilon_natural_homotopy(
    ext: &Rc<Bimodule>,
    x: &Rc<Bimodule>,
    rho: &Rc<PreHom>,
) -> Rc<PreHom> {
    let xx = x.clone();
    let inner = rho.clone();
    let rule = move |me: &PreHom, key: &OpKey| -> Elem {
        let (a, seg, rest) = split_first(&me.source, &xx, key.m);
        let circ: i64 = key.l.iter().map(|&i| me.source.left.red_deg(i)).sum();
        let mut left = key.l.clone();
        left.push(a);
        left.extend_from_slice(&seg);
        inner.comp(&left, rest, &key.r).scale_i64(sign_pow(circ))
    };
    PreHom::new(
        ext.clone(),
        rho.target.clone(),
        rho.degree - 1,
        HomBody::Rule(Rc::new(rule)),
    )
}

/// Outer product of a left module M over (A, K) and a right module N over
/// (K, A'): the (A, A')-bimodule M ⊗_K N.
pub fn outer_product(m: &Rc<Bimodule>, n: &Rc<Bimodule>) -> Rc<Bimodule> {
    assert_eq!(m.right.space.ring.d, 1, "left module expected");
    assert_eq!(n.left.space.ring.d, 1, "right module expected");
    let mut basis = Vec::new();
    let mut pairs = Vec::new();
    for i in m.space.indices() {
        for j in n.space.indices() {
            basis.push(BasisElem {
                name: format!("{}×{}", m.space.name(i), n.space.name(j)),
                degree: m.space.degree(i) + n.space.degree(j),
                left: m.space.labels(i).0,
                right: n.space.labels(j).1,
            });
            pairs.push((i, j));
        }
    }
    let space = Rc::new(GradedSpace::new(
        m.space.field,
        crate::graded::BaseRing::new(m.left.space.ring.d.max(n.right.space.ring.d)),
        basis,
    ));
    let n_dim = n.space.dim() as u32;
    let mm = m.clone();
    let nn = n.clone();
    let rule = move |me: &Bimodule, key: &OpKey| -> Elem {
        let (i, j) = (key.m / n_dim, key.m % n_dim);
        if !key.l.is_empty() && !key.r.is_empty() {
            return Elem::zero();
        }
        if key.r.is_empty() && !key.l.is_empty() {
            // left action on the M factor
            return mm
                .mu(&key.l, i, &[])
                .map_indices(|mi| Some(mi * n_dim + j));
        }
        if key.l.is_empty() && !key.r.is_empty() {
            // right action on the N factor, jumping over M
            return nn
                .mu(&[], j, &key.r)
                .map_indices(|nj| Some(i * n_dim + nj))
                .scale_i64(sign_pow(mm.space.degree(i)));
        }
        // differential
        let mut out = mm.mu(&[], i, &[]).map_indices(|mi| Some(mi * n_dim + j));
        out.add_assign(
            &nn.mu(&[], j, &[])
                .map_indices(|nj| Some(i * n_dim + nj))
                .scale_i64(sign_pow(mm.space.degree(i))),
        );
        let _ = me;
        out
    };
    Bimodule::new(m.left.clone(), n.right.clone(), space, BimKind::Rule(Rc::new(rule)))
}

// ---------------------------------------------------------------------------
// cyclic tensor products
// ---------------------------------------------------------------------------

/// A closed word: slot_0, seg_0, slot_1, ..., slot_{l-1}, seg_{l-1},
/// wrapping back to slot_0. Over R = K^d only closed composable words
/// appear (the diagonal part).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord {
    pub slots: Vec<u32>,
    pub segs: Vec<Vec<u32>>,
}

pub struct CyclicComplex {
    pub factors: Vec<Rc<Bimodule>>,
    pub complex: TruncatedComplex,
    /// words per degree slot, aligned with complex.bases
    pub words: Vec<Vec<CyclicWord>>,
    index: HashMap<CyclicWord, (usize, usize)>,
}

impl CyclicComplex {
    pub fn index_of(&self, w: &CyclicWord) -> Option<(usize, usize)> {
        self.index.get(w).copied()
    }
}

fn cyclic_word_degree(factors: &[Rc<Bimodule>], w: &CyclicWord) -> i64 {
    let mut d = 0;
    for i in 0..w.slots.len() {
        d += factors[i].space.degree(w.slots[i]);
        d += w.segs[i]
            .iter()
            .map(|&x| factors[i].right.red_deg(x))
            .sum::<i64>();
    }
    d
}

fn cyclic_word_name(factors: &[Rc<Bimodule>], w: &CyclicWord) -> String {
    let mut s = String::from("(");
    for i in 0..w.slots.len() {
        if i > 0 {
            s.push('·');
        }
        s.push_str(factors[i].space.name(w.slots[i]));
        s.push('⟨');
        s.push_str(
            &w.segs[i]
                .iter()
                .map(|&x| factors[i].right.space.name(x))
                .collect::<Vec<_>>()
                .join("|"),
        );
        s.push('⟩');
    }
    s.push(')');
    s
}

/// The cyclic tensor product of bimodules over a closed chain of algebras.
/// For a single factor this is the reduced Hochschild complex of the
/// algebra with coefficients in that bimodule.
pub fn cyclic_tensor(factors: Vec<Rc<Bimodule>>, seg_cap: Option<usize>) -> CyclicComplex {
    let l = factors.len();
    assert!(l >= 1);
    for i in 0..l {
        let next = (i + 1) % l;
        assert!(
            Rc::ptr_eq(&factors[i].right, &factors[next].left),
            "cyclic chain of algebras does not close"
        );
    }
    let mut words: Vec<CyclicWord> = Vec::new();
    fn rec(
        factors: &[Rc<Bimodule>],
        i: usize,
        w: &mut CyclicWord,
        cap: Option<usize>,
        out: &mut Vec<CyclicWord>,
    ) {
        let l = factors.len();
        if i == l {
            let last_right = if let Some(&x) = w.segs[l - 1].last() {
                factors[l - 1].right.space.labels(x).1
            } else {
                factors[l - 1].space.labels(w.slots[l - 1]).1
            };
            if last_right == factors[0].space.labels(w.slots[0]).0 {
                out.push(w.clone());
            }
            return;
        }
        for slot in factors[i].space.indices() {
            if i > 0 {
                let prev_right = if let Some(&x) = w.segs[i - 1].last() {
                    factors[i - 1].right.space.labels(x).1
                } else {
                    factors[i - 1].space.labels(w.slots[i - 1]).1
                };
                if prev_right != factors[i].space.labels(slot).0 {
                    continue;
                }
            }
            w.slots.push(slot);
            let from = factors[i].space.labels(slot).1;
            for to in factors[i].right.space.ring.idempotents() {
                for seg in seg_words(&factors[i].right, from, to, cap) {
                    w.segs.push(seg);
                    rec(factors, i + 1, w, cap, out);
                    w.segs.pop();
                }
            }
            w.slots.pop();
        }
    }
    let mut w = CyclicWord { slots: vec![], segs: vec![] };
    rec(&factors, 0, &mut w, seg_cap, &mut words);
    words.sort();
    words.dedup();

    let field = factors[0].space.field;
    if words.is_empty() {
        return CyclicComplex {
            factors,
            complex: TruncatedComplex::empty(field),
            words: vec![],
            index: HashMap::new(),
        };
    }
    let lo = words.iter().map(|w| cyclic_word_degree(&factors, w)).min().unwrap();
    let hi = words.iter().map(|w| cyclic_word_degree(&factors, w)).max().unwrap();
    let n_slots = (hi - lo + 1) as usize;
    let mut by_deg: Vec<Vec<CyclicWord>> = vec![Vec::new(); n_slots];
    for w in words {
        let d = (cyclic_word_degree(&factors, &w) - lo) as usize;
        by_deg[d].push(w);
    }
    let mut index: HashMap<CyclicWord, (usize, usize)> = HashMap::new();
    let mut bases: Vec<Vec<String>> = Vec::new();
    for (s, ws) in by_deg.iter().enumerate() {
        let mut names = Vec::new();
        for (p, w) in ws.iter().enumerate() {
            index.insert(w.clone(), (s, p));
            names.push(cyclic_word_name(&factors, w));
        }
        bases.push(names);
    }
    let mut diffs: Vec<SparseMat> = (0..n_slots)
        .map(|s| {
            let next = if s + 1 < n_slots { by_deg[s + 1].len() } else { 0 };
            SparseMat::zero(next, by_deg[s].len(), field)
        })
        .collect();
    for (s, ws) in by_deg.iter().enumerate() {
        for (col, w) in ws.iter().enumerate() {
            for (tw, c) in cyclic_diff_word(&factors, w) {
                let (ts, trow) = *index.get(&tw).expect("cyclic differential left the carrier");
                assert_eq!(ts, s + 1);
                let old = diffs[s].get(trow, col);
                diffs[s].set(trow, col, &old + &c);
            }
        }
    }
    let complex = TruncatedComplex::new(field, lo, bases, diffs, seg_cap.is_none());
    CyclicComplex { factors, complex, words: by_deg, index }
}

fn cyclic_prefix_degree(factors: &[Rc<Bimodule>], w: &CyclicWord, slot_i: usize, letters: usize) -> i64 {
    let mut d = 0;
    for j in 0..=slot_i {
        d += factors[j].space.degree(w.slots[j]);
        let seg = &w.segs[j];
        let upto = if j == slot_i { letters } else { seg.len() };
        for &x in &seg[..upto] {
            d += factors[j].right.red_deg(x);
        }
    }
    d
}

fn cyclic_diff_word(factors: &[Rc<Bimodule>], w: &CyclicWord) -> Vec<(CyclicWord, Scalar)> {
    let l = factors.len();
    let mut out: Vec<(CyclicWord, Scalar)> = Vec::new();
    // interior slot actions (slots 1..l-1)
    for i in 1..l {
        let prev = &w.segs[i - 1];
        let seg = &w.segs[i];
        for tl in 0..=prev.len() {
            let tail = &prev[prev.len() - tl..];
            for hd in 0..=seg.len() {
                let v = factors[i].mu(tail, w.slots[i], &seg[..hd]);
                if v.is_zero() {
                    continue;
                }
                let star = cyclic_prefix_degree(factors, w, i - 1, prev.len() - tl);
                for (j, c) in v.terms() {
                    let mut w2 = w.clone();
                    w2.segs[i - 1] = prev[..prev.len() - tl].to_vec();
                    w2.segs[i] = seg[hd..].to_vec();
                    w2.slots[i] = *j;
                    out.push((w2, c.times_sign(star)));
                }
            }
        }
    }
    // coalgebra insertions inside segments (plus curvature letters)
    for si in 0..l {
        let seg = &w.segs[si];
        let alg = &factors[si].right;
        for a in 0..seg.len() {
            for b in a + 1..=seg.len() {
                let v = alg.reduce_elem(&alg.mu_word(&seg[a..b]));
                if v.is_zero() {
                    continue;
                }
                let star = cyclic_prefix_degree(factors, w, si, a);
                for (j, c) in v.terms() {
                    let mut w2 = w.clone();
                    let mut ns = seg[..a].to_vec();
                    ns.push(*j);
                    ns.extend_from_slice(&seg[b..]);
                    w2.segs[si] = ns;
                    out.push((w2, c.times_sign(star)));
                }
            }
        }
        if alg.is_curved() {
            for a in 0..=seg.len() {
                let star = cyclic_prefix_degree(factors, w, si, a);
                for (j, c) in alg.mu0.terms() {
                    let mut w2 = w.clone();
                    let mut ns = seg[..a].to_vec();
                    ns.push(*j);
                    ns.extend_from_slice(&seg[a..]);
                    w2.segs[si] = ns;
                    out.push((w2, c.times_sign(star)));
                }
            }
        }
    }
    // wrap-around action of slot_0
    let last = &w.segs[l - 1];
    let seg0 = &w.segs[0];
    for tl in 0..=last.len() {
        let tail = &last[last.len() - tl..];
        for hd in 0..=seg0.len() {
            if l == 1 && hd + tl > seg0.len() {
                continue;
            }
            let head = &seg0[..hd];
            let v = factors[0].mu(tail, w.slots[0], head);
            if v.is_zero() {
                continue;
            }
            let tail_deg: i64 = tail
                .iter()
                .map(|&x| factors[l - 1].right.red_deg(x))
                .sum();
            let total = cyclic_prefix_degree(factors, w, l - 1, last.len());
            let hash = tail_deg * (total - tail_deg);
            for (j, c) in v.terms() {
                let mut w2 = w.clone();
                w2.slots[0] = *j;
                if l == 1 {
                    w2.segs[0] = seg0[hd..seg0.len() - tl].to_vec();
                } else {
                    w2.segs[l - 1] = last[..last.len() - tl].to_vec();
                    w2.segs[0] = seg0[hd..].to_vec();
                }
                out.push((w2, c.times_sign(hash)));
            }
        }
    }
    out
}

/// The chain map phi_1 ⊗ ... ⊗ phi_l ⊗ cycl between cyclic complexes with
/// aligned factors. The wrap sign # and the placement signs § follow the
/// rotation bookkeeping of the differential.
pub fn cyclic_map(src: &CyclicComplex, tgt: &CyclicComplex, maps: &[Rc<PreHom>]) -> ComplexMap {
    let l = src.factors.len();
    assert_eq!(maps.len(), l);
    let degree: i64 = maps.iter().map(|m| m.degree).sum();
    ComplexMap::build(&src.complex, &tgt.complex, degree, |k, col| {
        let slot = src.complex.slot(k).unwrap();
        let w = &src.words[slot][col];
        let img = cyclic_map_word(src, tgt, maps, w);
        // img is already in target-degree coordinates
        let _ = k;
        img
    })
}

fn cyclic_map_word(
    src: &CyclicComplex,
    tgt: &CyclicComplex,
    maps: &[Rc<PreHom>],
    w: &CyclicWord,
) -> Elem {
    let l = src.factors.len();
    let total_deg: i64 = maps.iter().map(|m| m.degree).sum();
    let src_deg = cyclic_word_degree(&src.factors, w);
    let want_deg = src_deg + total_deg;
    let mut out = Elem::zero();
    let last = &w.segs[l - 1];
    for tl in 0..=last.len() {
        if l == 1 && tl > w.segs[0].len() {
            break;
        }
        let tail_letters = &last[last.len() - tl..];
        let tail_deg: i64 = tail_letters
            .iter()
            .map(|&x| src.factors[l - 1].right.red_deg(x))
            .sum();
        let total = cyclic_prefix_degree(&src.factors, w, l - 1, last.len());
        let hash = tail_deg * (total - tail_deg);

        // walk the rotated word assembling each map's block
        #[allow(clippy::too_many_arguments)]
        fn go(
            src: &CyclicComplex,
            tgt: &CyclicComplex,
            maps: &[Rc<PreHom>],
            w: &CyclicWord,
            wrap_tl: usize,
            i: usize,
            tail: Vec<u32>,
            prefix_deg: i64,
            acc_slots: Vec<Elem>,
            acc_segs: Vec<Vec<u32>>,
            sign: i64,
            want_deg: i64,
            out: &mut Elem,
        ) {
            let l = maps.len();
            let seg_i = &w.segs[i];
            let avail: &[u32] = if i == l - 1 {
                &seg_i[..seg_i.len() - wrap_tl]
            } else {
                seg_i
            };
            let tail_deg: i64 = tail
                .iter()
                .map(|&x| {
                    let ai = if i == 0 { l - 1 } else { i - 1 };
                    src.factors[ai].right.red_deg(x)
                })
                .sum();
            let slot = w.slots[i];
            let slot_deg = src.factors[i].space.degree(slot);
            for hd in 0..=avail.len() {
                let head = &avail[..hd];
                let v = maps[i].comp(&tail, slot, head);
                if v.is_zero() {
                    continue;
                }
                let s2 = sign * sign_pow(maps[i].degree * prefix_deg);
                let head_deg: i64 = head
                    .iter()
                    .map(|&x| src.factors[i].right.red_deg(x))
                    .sum();
                let block_deg = tail_deg + slot_deg + head_deg;
                let remaining = &avail[hd..];
                if i == l - 1 {
                    let mut slots2 = acc_slots.clone();
                    slots2.push(v);
                    let mut segs2 = acc_segs.clone();
                    segs2.push(remaining.to_vec());
                    expand_cyclic(tgt, &slots2, &segs2, s2, want_deg, out);
                } else {
                    for tl_next in 0..=remaining.len() {
                        let keep = &remaining[..remaining.len() - tl_next];
                        let keep_deg: i64 = keep
                            .iter()
                            .map(|&x| src.factors[i].right.red_deg(x))
                            .sum();
                        let mut slots2 = acc_slots.clone();
                        slots2.push(v.clone());
                        let mut segs2 = acc_segs.clone();
                        segs2.push(keep.to_vec());
                        let next_tail = remaining[remaining.len() - tl_next..].to_vec();
                        go(
                            src,
                            tgt,
                            maps,
                            w,
                            wrap_tl,
                            i + 1,
                            next_tail,
                            prefix_deg + block_deg + keep_deg,
                            slots2,
                            segs2,
                            s2,
                            want_deg,
                            out,
                        );
                    }
                }
            }
        }
        fn expand_cyclic(
            tgt: &CyclicComplex,
            slots: &[Elem],
            segs: &[Vec<u32>],
            sign: i64,
            want_deg: i64,
            out: &mut Elem,
        ) {
            fn recx(
                tgt: &CyclicComplex,
                slots: &[Elem],
                segs: &[Vec<u32>],
                i: usize,
                picked: Vec<u32>,
                coeff: Scalar,
                want_deg: i64,
                out: &mut Elem,
            ) {
                if i == slots.len() {
                    let w = CyclicWord { slots: picked, segs: segs.to_vec() };
                    match tgt.index_of(&w) {
                        Some((s, p)) => {
                            debug_assert_eq!(
                                tgt.complex.min_degree + s as i64,
                                want_deg,
                                "cyclic map degree bookkeeping"
                            );
                            out.add_assign(&Elem::single(p as u32, coeff));
                        }
                        None => panic!("cyclic map left the carrier"),
                    }
                    return;
                }
                for (j, c) in slots[i].terms() {
                    let mut p2 = picked.clone();
                    p2.push(*j);
                    recx(tgt, slots, segs, i + 1, p2, &coeff * c, want_deg, out);
                }
            }
            let unit = tgt.factors[0].space.field.from_i64(sign);
            recx(tgt, slots, segs, 0, Vec::new(), unit, want_deg, out);
        }
        let mut contrib = Elem::zero();
        go(
            src,
            tgt,
            maps,
            w,
            tl,
            0,
            tail_letters.to_vec(),
            0,
            Vec::new(),
            Vec::new(),
            1,
            want_deg,
            &mut contrib,
        );
        out.add_assign(&contrib.scale_i64(sign_pow(hash)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfty::{from_associative, validate_ainfty};
    use crate::bimod::{diagonal, prehom_differential, prehom_is_zero, validate_bimodule};
    use crate::graded::BaseRing;
    use crate::scalar::FieldSpec;

    fn poly() -> Rc<AInftyAlgebra> {
        let space = Rc::new(GradedSpace::new(
            FieldSpec::Rational,
            BaseRing::new(1),
            vec![
                BasisElem { name: "e".into(), degree: 0, left: 1, right: 1 },
                BasisElem { name: "x".into(), degree: 1, left: 1, right: 1 },
                BasisElem { name: "z".into(), degree: 2, left: 1, right: 1 },
            ],
        ));
        let a = from_associative(space.clone(), vec![0], &[((1, 1), space.basis_elem(2))])
            .unwrap();
        assert!(validate_ainfty(&a, 6).ok());
        a
    }

    #[test]
    #[should_panic(expected = "needs a length cap")]
    fn non_directed_needs_cap() {
        let a = poly();
        let d = diagonal(&a);
        tensor_chain(vec![d.clone(), d], None);
    }

    #[test]
    fn capped_tensor_is_a_bimodule_with_vanishing_mixed_part() {
        let a = poly();
        let d = diagonal(&a);
        let t = tensor_chain(vec![d.clone(), d], Some(2));
        assert!(t.space.dim() > 0);
        // within the cap the low-arity bimodule equation holds... validated
        // thoroughly on directed fixtures; here check mixed vanishing
        for m in t.space.indices() {
            assert!(t.mu(&[1], m, &[1]).is_zero());
        }
    }

    #[test]
    fn hochschild_complex_of_ground_field() {
        let k = crate::ainfty::AInftyAlgebra::ground(FieldSpec::Rational);
        let z = cyclic_tensor(vec![diagonal(&k)], None);
        assert_eq!(z.complex.total_dim(), 1);
        let h = z.complex.cohomology().unwrap();
        assert_eq!(h.dim_in_degree(0), 1);
    }

    #[test]
    fn epsilon_xi_pointwise_section() {
        let a = poly();
        let d = diagonal(&a);
        let ext = tensor_chain(vec![diagonal(&a), d.clone()], Some(3));
        let eps = epsilon_left(&ext, &d);
        let xi = xi_left(&ext, &d);
        for m in d.space.indices() {
            let x = xi.comp(&[], m, &[]);
            let mut back = Elem::zero();
            for (i, c) in x.terms() {
                back.add_assign(&eps.comp(&[], *i, &[]).scale(c));
            }
            assert_eq!(back, d.space.basis_elem(m));
        }
    }

    #[test]
    fn outer_product_is_a_bimodule() {
        let a = poly();
        let k = crate::ainfty::AInftyAlgebra::ground(FieldSpec::Rational);
        // M = A as a left module, N = A as a right module
        let m = Bimodule::new(
            a.clone(),
            k.clone(),
            a.space.clone(),
            BimKind::Rule({
                let aa = a.clone();
                Rc::new(move |_me: &Bimodule, key: &OpKey| {
                    if !key.r.is_empty() {
                        return Elem::zero();
                    }
                    let circ: i64 = key.l.iter().map(|&x| aa.red_deg(x)).sum();
                    let mut w = key.l.clone();
                    w.push(key.m);
                    aa.mu_word(&w).scale_i64(sign_pow(circ + 1))
                })
            }),
        );
        let n = Bimodule::new(
            k.clone(),
            a.clone(),
            a.space.clone(),
            BimKind::Rule({
                let aa = a.clone();
                Rc::new(move |_me: &Bimodule, key: &OpKey| {
                    if !key.l.is_empty() {
                        return Elem::zero();
                    }
                    let mut w = vec![key.m];
                    w.extend_from_slice(&key.r);
                    aa.mu_word(&w).scale_i64(-1)
                })
            }),
        );
        assert!(validate_bimodule(&m, 4).ok());
        assert!(validate_bimodule(&n, 4).ok());
        let p = outer_product(&m, &n);
        let rep = validate_bimodule(&p, 3);
        assert!(rep.ok(), "{:?}", rep.violations.first());
        let _ = prehom_differential(&PreHom::identity(&p));
        assert!(prehom_is_zero(
            &prehom_differential(&PreHom::identity(&p)),
            2
        ));
    }
}
