//! Graded vector spaces over a semisimple base ring R = K^d.
//!
//! Every basis element carries an integer degree and a pair of idempotent
//! labels (left, right). Elements are sparse linear combinations; maps are
//! sparse column tables. Everything is immutable after construction.

use crate::scalar::{FieldSpec, Scalar};
use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

/// The semisimple base ring R = K^d with idempotents e_1,...,e_d.
/// Idempotent indices are 1-based to match the usual e_i notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BaseRing {
    pub d: u8,
}

impl BaseRing {
    pub fn new(d: u8) -> BaseRing {
        assert!(d >= 1, "base ring needs at least one idempotent");
        BaseRing { d }
    }

    pub fn idempotents(&self) -> impl Iterator<Item = u8> {
        1..=self.d
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElem {
    pub name: String,
    pub degree: i64,
    /// left idempotent label, 1-based
    pub left: u8,
    /// right idempotent label, 1-based
    pub right: u8,
}

/// A finite-rank Z-graded R-bimodule with a distinguished basis.
#[derive(Clone, Debug)]
pub struct GradedSpace {
    pub field: FieldSpec,
    pub ring: BaseRing,
    pub basis: Vec<BasisElem>,
    index: HashMap<String, u32>,
}

impl PartialEq for GradedSpace {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.ring == other.ring && self.basis == other.basis
    }
}

impl GradedSpace {
    pub fn new(field: FieldSpec, ring: BaseRing, basis: Vec<BasisElem>) -> GradedSpace {
        let mut index = HashMap::new();
        for (i, b) in basis.iter().enumerate() {
            assert!(b.left >= 1 && b.left <= ring.d, "bad left label on {}", b.name);
            assert!(b.right >= 1 && b.right <= ring.d, "bad right label on {}", b.name);
            let old = index.insert(b.name.clone(), i as u32);
            assert!(old.is_none(), "duplicate basis name {}", b.name);
        }
        GradedSpace { field, ring, basis, index }
    }

    pub fn empty(field: FieldSpec, ring: BaseRing) -> GradedSpace {
        GradedSpace::new(field, ring, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn lookup(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn degree(&self, i: u32) -> i64 {
        self.basis[i as usize].degree
    }

    pub fn labels(&self, i: u32) -> (u8, u8) {
        (self.basis[i as usize].left, self.basis[i as usize].right)
    }

    pub fn name(&self, i: u32) -> &str {
        &self.basis[i as usize].name
    }

    pub fn indices(&self) -> impl Iterator<Item = u32> {
        0..self.basis.len() as u32
    }

    /// Dimension of the degree-k piece.
    pub fn dim_in_degree(&self, k: i64) -> usize {
        self.basis.iter().filter(|b| b.degree == k).count()
    }

    pub fn degree_range(&self) -> Option<(i64, i64)> {
        let lo = self.basis.iter().map(|b| b.degree).min()?;
        let hi = self.basis.iter().map(|b| b.degree).max()?;
        Some((lo, hi))
    }

    pub fn basis_elem(&self, i: u32) -> Elem {
        Elem {
            terms: vec![(i, self.field.one())],
        }
    }
}

/// A sparse element: sorted (basis index, coefficient) pairs, no zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Elem {
    terms: Vec<(u32, Scalar)>,
}

impl Elem {
    pub fn zero() -> Elem {
        Elem { terms: Vec::new() }
    }

    pub fn single(i: u32, c: Scalar) -> Elem {
        if c.is_zero() {
            Elem::zero()
        } else {
            Elem { terms: vec![(i, c)] }
        }
    }

    pub fn from_terms(mut terms: Vec<(u32, Scalar)>) -> Elem {
        terms.sort_by_key(|t| t.0);
        let mut out: Vec<(u32, Scalar)> = Vec::with_capacity(terms.len());
        for (i, c) in terms {
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += &c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Elem { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(u32, Scalar)] {
        &self.terms
    }

    pub fn coeff(&self, i: u32) -> Option<&Scalar> {
        self.terms
            .binary_search_by_key(&i, |t| t.0)
            .ok()
            .map(|k| &self.terms[k].1)
    }

    pub fn add(&self, other: &Elem) -> Elem {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Elem::from_terms(terms)
    }

    pub fn sub(&self, other: &Elem) -> Elem {
        self.add(&other.scale_i64(-1))
    }

    pub fn scale(&self, c: &Scalar) -> Elem {
        if c.is_zero() {
            return Elem::zero();
        }
        Elem {
            terms: self.terms.iter().map(|(i, a)| (*i, a * c)).collect(),
        }
    }

    pub fn scale_i64(&self, n: i64) -> Elem {
        if n == 1 {
            return self.clone();
        }
        if self.terms.is_empty() {
            return Elem::zero();
        }
        let f = self.terms[0].1.field();
        self.scale(&f.from_i64(n))
    }

    pub fn add_assign(&mut self, other: &Elem) {
        if other.is_zero() {
            return;
        }
        *self = self.add(other);
    }

    /// Map basis indices; merges coefficients if the map is not injective.
    pub fn map_indices(&self, f: impl Fn(u32) -> Option<u32>) -> Elem {
        Elem::from_terms(
            self.terms
                .iter()
                .filter_map(|(i, c)| f(*i).map(|j| (j, c.clone())))
                .collect(),
        )
    }

    /// Expand each basis term through `f` and sum the images.
    pub fn flat_map(&self, f: impl Fn(u32) -> Elem) -> Elem {
        let mut out = Elem::zero();
        for (i, c) in &self.terms {
            out.add_assign(&f(*i).scale(c));
        }
        out
    }

    pub fn render(&self, space: &GradedSpace) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(i, c)| format!("{} {}", c.render(), space.name(*i)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (i, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}·#{}", c.render(), i)?;
        }
        Ok(())
    }
}

/// A degree-homogeneous linear map between graded spaces, stored as sparse
/// columns (image of each source basis element).
#[derive(Clone, Debug)]
pub struct GradedMap {
    pub source: Rc<GradedSpace>,
    pub target: Rc<GradedSpace>,
    pub degree: i64,
    cols: Vec<Elem>,
}

impl GradedMap {
    pub fn zero(source: Rc<GradedSpace>, target: Rc<GradedSpace>, degree: i64) -> GradedMap {
        let cols = vec![Elem::zero(); source.dim()];
        GradedMap { source, target, degree, cols }
    }

    pub fn identity(space: Rc<GradedSpace>) -> GradedMap {
        let cols = space.indices().map(|i| space.basis_elem(i)).collect();
        GradedMap { source: space.clone(), target: space, degree: 0, cols }
    }

    pub fn from_cols(
        source: Rc<GradedSpace>,
        target: Rc<GradedSpace>,
        degree: i64,
        cols: Vec<Elem>,
    ) -> Result<GradedMap, String> {
        assert_eq!(cols.len(), source.dim());
        let m = GradedMap { source, target, degree, cols };
        m.check_homogeneous()?;
        Ok(m)
    }

    /// Every entry must respect degree and idempotent labels.
    pub fn check_homogeneous(&self) -> Result<(), String> {
        for i in self.source.indices() {
            let (l, r) = self.source.labels(i);
            let want = self.source.degree(i) + self.degree;
            for (j, _) in self.cols[i as usize].terms() {
                if self.target.degree(*j) != want {
                    return Err(format!(
                        "entry {} -> {} violates degree ({} + {} != {})",
                        self.source.name(i),
                        self.target.name(*j),
                        self.source.degree(i),
                        self.degree,
                        self.target.degree(*j)
                    ));
                }
                if self.target.labels(*j) != (l, r) {
                    return Err(format!(
                        "entry {} -> {} violates idempotent labels",
                        self.source.name(i),
                        self.target.name(*j)
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn set_col(&mut self, i: u32, e: Elem) {
        self.cols[i as usize] = e;
    }

    pub fn col(&self, i: u32) -> &Elem {
        &self.cols[i as usize]
    }

    pub fn apply(&self, e: &Elem) -> Elem {
        e.flat_map(|i| self.cols[i as usize].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_zero())
    }

    pub fn compose(&self, inner: &GradedMap) -> GradedMap {
        assert_eq!(*inner.target, *self.source, "composition mismatch");
        GradedMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            degree: self.degree + inner.degree,
            cols: inner.cols.iter().map(|c| self.apply(c)).collect(),
        }
    }

    pub fn add(&self, other: &GradedMap) -> GradedMap {
        assert_eq!(self.degree, other.degree);
        GradedMap {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: self.degree,
            cols: self
                .cols
                .iter()
                .zip(&other.cols)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale_i64(&self, n: i64) -> GradedMap {
        GradedMap {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: self.degree,
            cols: self.cols.iter().map(|c| c.scale_i64(n)).collect(),
        }
    }

    /// Per-degree (rank, nullity); used for the rank-nullity invariant.
    pub fn rank_nullity_in_degree(&self, k: i64) -> (usize, usize) {
        use crate::matrix::SparseMat;
        let src: Vec<u32> = self
            .source
            .indices()
            .filter(|i| self.source.degree(*i) == k)
            .collect();
        let tgt: Vec<u32> = self
            .target
            .indices()
            .filter(|j| self.target.degree(*j) == k + self.degree)
            .collect();
        let tpos: HashMap<u32, u32> = tgt.iter().enumerate().map(|(a, j)| (*j, a as u32)).collect();
        let mut m = SparseMat::zero(tgt.len(), src.len(), self.source.field);
        for (c, i) in src.iter().enumerate() {
            for (j, v) in self.cols[*i as usize].terms() {
                m.set(tpos[j] as usize, c, v.clone());
            }
        }
        let r = m.rank();
        (r, src.len() - r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> GradedSpace {
        GradedSpace::new(
            FieldSpec::Rational,
            BaseRing::new(2),
            vec![
                BasisElem { name: "x".into(), degree: 0, left: 1, right: 2 },
                BasisElem { name: "y".into(), degree: 1, left: 1, right: 2 },
                BasisElem { name: "z".into(), degree: 1, left: 1, right: 2 },
            ],
        )
    }

    #[test]
    fn elem_algebra() {
        let s = space();
        let f = s.field;
        let a = Elem::from_terms(vec![(0, f.one()), (1, f.from_i64(2))]);
        let b = Elem::from_terms(vec![(1, f.from_i64(-2)), (2, f.one())]);
        let c = a.add(&b);
        assert_eq!(c.coeff(1), None);
        assert!(c.coeff(0).unwrap().is_one());
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn degree_and_label_checks() {
        let s = Rc::new(space());
        let mut m = GradedMap::zero(s.clone(), s.clone(), 1);
        m.set_col(0, s.basis_elem(1));
        assert!(m.check_homogeneous().is_ok());
        m.set_col(1, s.basis_elem(0));
        assert!(m.check_homogeneous().is_err());
    }

    #[test]
    fn rank_nullity() {
        let s = Rc::new(space());
        let mut m = GradedMap::zero(s.clone(), s.clone(), 1);
        m.set_col(0, s.basis_elem(1).add(&s.basis_elem(2)));
        let (rank, null) = m.rank_nullity_in_degree(0);
        assert_eq!((rank, null), (1, 0));
        let (rank1, null1) = m.rank_nullity_in_degree(1);
        assert_eq!((rank1, null1), (0, 2));
    }
}
