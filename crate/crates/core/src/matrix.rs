//! Exact sparse linear algebra: Gaussian elimination over the ground field,
//! rank/kernel computation, and incremental span tracking with coordinates.

use crate::graded::Elem;
use crate::scalar::{FieldSpec, Scalar};
use std::collections::BTreeMap;

/// A sparse matrix stored column-wise.
#[derive(Clone, Debug)]
pub struct SparseMat {
    pub nrows: usize,
    pub ncols: usize,
    pub field: FieldSpec,
    cols: Vec<Elem>,
}

impl SparseMat {
    pub fn zero(nrows: usize, ncols: usize, field: FieldSpec) -> SparseMat {
        SparseMat {
            nrows,
            ncols,
            field,
            cols: vec![Elem::zero(); ncols],
        }
    }

    pub fn from_cols(nrows: usize, field: FieldSpec, cols: Vec<Elem>) -> SparseMat {
        let ncols = cols.len();
        for c in &cols {
            for (i, _) in c.terms() {
                assert!((*i as usize) < nrows, "row index out of range");
            }
        }
        SparseMat { nrows, ncols, field, cols }
    }

    pub fn identity(n: usize, field: FieldSpec) -> SparseMat {
        let cols = (0..n as u32).map(|i| Elem::single(i, field.one())).collect();
        SparseMat { nrows: n, ncols: n, field, cols }
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        let col = &mut self.cols[c];
        let mut terms: Vec<(u32, Scalar)> =
            col.terms().iter().filter(|(i, _)| *i as usize != r).cloned().collect();
        if !v.is_zero() {
            terms.push((r as u32, v));
        }
        *col = Elem::from_terms(terms);
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &Scalar) {
        let col = &mut self.cols[c];
        *col = col.add(&Elem::single(r as u32, v.clone()));
    }

    pub fn col(&self, c: usize) -> &Elem {
        &self.cols[c]
    }

    pub fn set_col(&mut self, c: usize, e: Elem) {
        for (i, _) in e.terms() {
            assert!((*i as usize) < self.nrows);
        }
        self.cols[c] = e;
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.cols[c]
            .coeff(r as u32)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn apply(&self, v: &Elem) -> Elem {
        let mut out = Elem::zero();
        for (i, c) in v.terms() {
            out.add_assign(&self.cols[*i as usize].scale(c));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_zero())
    }

    /// self ∘ inner (matrix product).
    pub fn compose(&self, inner: &SparseMat) -> SparseMat {
        assert_eq!(self.ncols, inner.nrows, "matrix composition mismatch");
        SparseMat {
            nrows: self.nrows,
            ncols: inner.ncols,
            field: self.field,
            cols: inner.cols.iter().map(|c| self.apply(c)).collect(),
        }
    }

    pub fn add(&self, other: &SparseMat) -> SparseMat {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            field: self.field,
            cols: self
                .cols
                .iter()
                .zip(&other.cols)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale_i64(&self, n: i64) -> SparseMat {
        SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            field: self.field,
            cols: self.cols.iter().map(|c| c.scale_i64(n)).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        let mut span = Span::new(self.field);
        for c in &self.cols {
            span.insert_untracked(c.clone());
        }
        span.rank()
    }

    /// Basis of { v : self * v = 0 }, as vectors over column indices.
    pub fn kernel_basis(&self) -> Vec<Elem> {
        let mut span = Span::new(self.field);
        let mut kernel = Vec::new();
        for (j, c) in self.cols.iter().enumerate() {
            if let Some(combo) = span.insert(c.clone(), j as u32) {
                kernel.push(combo);
            }
        }
        kernel
    }

    /// Solve self * x = b; x over column indices.
    pub fn solve(&self, b: &Elem) -> Option<Elem> {
        let mut span = Span::new(self.field);
        for (j, c) in self.cols.iter().enumerate() {
            span.insert(c.clone(), j as u32);
        }
        span.express(b)
    }
}

/// Incrementally built row-reduced span with expression tracking: each
/// reduced vector remembers a combination of the inserted generators that
/// produces it.
pub struct Span {
    field: FieldSpec,
    /// pivot column -> (reduced vector with pivot 1, combination over generators)
    rows: BTreeMap<u32, (Elem, Elem)>,
}

impl Span {
    pub fn new(field: FieldSpec) -> Span {
        Span { field, rows: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce v against the current pivots; returns the residual and the
    /// combination of generators that was subtracted.
    fn reduce(&self, mut v: Elem) -> (Elem, Elem) {
        let mut used = Elem::zero();
        loop {
            let Some((pivot, coeff)) = v
                .terms()
                .iter()
                .find(|(i, _)| self.rows.contains_key(i))
                .map(|(i, c)| (*i, c.clone()))
            else {
                return (v, used);
            };
            let (row, combo) = &self.rows[&pivot];
            v = v.sub(&row.scale(&coeff));
            used.add_assign(&combo.scale(&coeff));
        }
    }

    /// Insert a generator; `Some(kernel_combo)` when v is dependent (the
    /// combination, including this generator with coefficient 1, maps to 0).
    pub fn insert(&mut self, v: Elem, gen: u32) -> Option<Elem> {
        let (resid, used) = self.reduce(v);
        let own = Elem::single(gen, self.field.one());
        if resid.is_zero() {
            let mut combo = own;
            combo.add_assign(&used.scale_i64(-1));
            return Some(combo);
        }
        let (pivot, lead) = {
            let t = resid.terms();
            // pick the entry with the cheapest coefficient as pivot
            let best = t
                .iter()
                .min_by_key(|(_, c)| c.pivot_weight())
                .expect("nonzero residual");
            (best.0, best.1.clone())
        };
        let inv = lead.inv().expect("nonzero lead");
        let mut combo = own;
        combo.add_assign(&used.scale_i64(-1));
        self.rows
            .insert(pivot, (resid.scale(&inv), combo.scale(&inv)));
        None
    }

    pub fn insert_untracked(&mut self, v: Elem) -> bool {
        let (resid, _) = self.reduce(v);
        if resid.is_zero() {
            return false;
        }
        let best = resid
            .terms()
            .iter()
            .min_by_key(|(_, c)| c.pivot_weight())
            .map(|(i, c)| (*i, c.clone()))
            .unwrap();
        let inv = best.1.inv().unwrap();
        self.rows.insert(best.0, (resid.scale(&inv), Elem::zero()));
        true
    }

    pub fn contains(&self, v: &Elem) -> bool {
        self.reduce(v.clone()).0.is_zero()
    }

    /// Express v over the inserted generators, if possible.
    pub fn express(&self, v: &Elem) -> Option<Elem> {
        let (resid, used) = self.reduce(v.clone());
        if resid.is_zero() {
            Some(used)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    fn vecq(entries: &[(u32, i64)]) -> Elem {
        Elem::from_terms(entries.iter().map(|(i, n)| (*i, q().from_i64(*n))).collect())
    }

    #[test]
    fn rank_and_kernel() {
        // columns (1,0), (0,1), (1,1): rank 2, kernel (1,1,-1)
        let m = SparseMat::from_cols(
            2,
            q(),
            vec![vecq(&[(0, 1)]), vecq(&[(1, 1)]), vecq(&[(0, 1), (1, 1)])],
        );
        assert_eq!(m.rank(), 2);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        assert!(m.apply(&k[0]).is_zero());
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = SparseMat::from_cols(3, q(), vec![vecq(&[(0, 1), (1, 2)]), vecq(&[(1, 1)])]);
        let b = vecq(&[(0, 2), (1, 5)]);
        let x = m.solve(&b).unwrap();
        assert_eq!(m.apply(&x), b);
        assert!(m.solve(&vecq(&[(2, 1)])).is_none());
    }

    #[test]
    fn prime_field_rank() {
        let f = FieldSpec::prime(5).unwrap();
        // columns (2,4) and (1,2) are dependent mod 5
        let m = SparseMat::from_cols(
            2,
            f,
            vec![
                Elem::from_terms(vec![(0, f.from_i64(2)), (1, f.from_i64(4))]),
                Elem::from_terms(vec![(0, f.from_i64(1)), (1, f.from_i64(2))]),
            ],
        );
        assert_eq!(m.rank(), 1);
    }
}
