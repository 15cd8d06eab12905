//! Finite (truncated) chain complexes with exact cohomology computation,
//! induced maps on cohomology, and chain homotopy verification.

use crate::graded::Elem;
use crate::matrix::{SparseMat, Span};
use crate::scalar::FieldSpec;
use crate::sign::sign_pow;

/// A chain complex supported on a finite degree window, with differential of
/// degree +1. Degrees outside the window are zero. `complete` records
/// whether the carrier enumeration was cut off by a truncation bound; when
/// true, every degree is reliable.
#[derive(Clone, Debug)]
pub struct TruncatedComplex {
    pub field: FieldSpec,
    pub min_degree: i64,
    /// Basis names per degree, bases[k] is degree min_degree + k.
    pub bases: Vec<Vec<String>>,
    /// diffs[k]: C^{min+k} -> C^{min+k+1}; the last one maps into 0.
    pub diffs: Vec<SparseMat>,
    pub complete: bool,
    /// Exactness per the truncation policy (directedness or degree bounds).
    pub exact: bool,
}

impl TruncatedComplex {
    pub fn new(
        field: FieldSpec,
        min_degree: i64,
        bases: Vec<Vec<String>>,
        diffs: Vec<SparseMat>,
        complete: bool,
    ) -> TruncatedComplex {
        assert_eq!(bases.len(), diffs.len());
        for k in 0..bases.len() {
            assert_eq!(diffs[k].ncols, bases[k].len(), "diff {k} has wrong source");
            let next = if k + 1 < bases.len() { bases[k + 1].len() } else { 0 };
            assert_eq!(diffs[k].nrows, next, "diff {k} has wrong target");
        }
        let cx = TruncatedComplex {
            field,
            min_degree,
            bases,
            diffs,
            complete,
            exact: complete,
        };
        if let Err(e) = cx.check_d_squared() {
            panic!("d∘d != 0: {e}");
        }
        cx
    }

    /// Empty complex.
    pub fn empty(field: FieldSpec) -> TruncatedComplex {
        TruncatedComplex {
            field,
            min_degree: 0,
            bases: vec![],
            diffs: vec![],
            complete: true,
            exact: true,
        }
    }

    pub fn max_degree(&self) -> i64 {
        self.min_degree + self.bases.len() as i64 - 1
    }

    pub fn dim_in_degree(&self, k: i64) -> usize {
        let idx = k - self.min_degree;
        if idx < 0 || idx as usize >= self.bases.len() {
            0
        } else {
            self.bases[idx as usize].len()
        }
    }

    pub fn slot(&self, k: i64) -> Option<usize> {
        let idx = k - self.min_degree;
        if idx < 0 || idx as usize >= self.bases.len() {
            None
        } else {
            Some(idx as usize)
        }
    }

    pub fn diff_at(&self, k: i64) -> Option<&SparseMat> {
        self.slot(k).map(|i| &self.diffs[i])
    }

    pub fn total_dim(&self) -> usize {
        self.bases.iter().map(|b| b.len()).sum()
    }

    pub fn check_d_squared(&self) -> Result<(), String> {
        for k in 0..self.diffs.len().saturating_sub(1) {
            let dd = self.diffs[k + 1].compose(&self.diffs[k]);
            if !dd.is_zero() {
                for c in 0..dd.ncols {
                    if !dd.col(c).is_zero() {
                        return Err(format!(
                            "on basis element {:?} in degree {}",
                            self.bases[k][c],
                            self.min_degree + k as i64
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_degree_reliable(&self, k: i64) -> bool {
        if self.complete {
            return true;
        }
        k > self.min_degree && k < self.max_degree()
    }

    /// Per-degree cohomology with explicit representative cocycles.
    pub fn cohomology(&self) -> Result<Cohomology, String> {
        self.check_d_squared()?;
        let mut degrees = Vec::new();
        for slot in 0..self.bases.len() {
            let k = self.min_degree + slot as i64;
            let kernel = self.diffs[slot].kernel_basis();
            // span of the incoming image
            let mut img = Span::new(self.field);
            let mut img_dim = 0usize;
            if slot > 0 {
                for c in 0..self.diffs[slot - 1].ncols {
                    if img.insert_untracked(self.diffs[slot - 1].col(c).clone()) {
                        img_dim += 1;
                    }
                }
            }
            // representatives: kernel vectors independent of the image
            let mut reps = Vec::new();
            for z in &kernel {
                if img.insert_untracked(z.clone()) {
                    reps.push(z.clone());
                }
            }
            let dim = kernel.len() - img_dim;
            assert_eq!(reps.len(), dim);
            degrees.push(DegreeHomology {
                degree: k,
                dim,
                reps,
                edge_unreliable: !self.is_degree_reliable(k),
            });
        }
        Ok(Cohomology { degrees })
    }
}

#[derive(Clone, Debug)]
pub struct DegreeHomology {
    pub degree: i64,
    pub dim: usize,
    /// Representative cocycles, as coordinate vectors in that degree's basis.
    pub reps: Vec<Elem>,
    pub edge_unreliable: bool,
}

#[derive(Clone, Debug)]
pub struct Cohomology {
    pub degrees: Vec<DegreeHomology>,
}

impl Cohomology {
    pub fn dim_in_degree(&self, k: i64) -> usize {
        self.degrees
            .iter()
            .find(|d| d.degree == k)
            .map(|d| d.dim)
            .unwrap_or(0)
    }

    pub fn at(&self, k: i64) -> Option<&DegreeHomology> {
        self.degrees.iter().find(|d| d.degree == k)
    }

    pub fn total_dim(&self) -> usize {
        self.degrees.iter().map(|d| d.dim).sum()
    }

    /// (degree, dim) for all degrees with nonzero carrier.
    pub fn dims(&self) -> Vec<(i64, usize)> {
        self.degrees.iter().map(|d| (d.degree, d.dim)).collect()
    }

    pub fn interior_dims(&self) -> Vec<(i64, usize)> {
        self.degrees
            .iter()
            .filter(|d| !d.edge_unreliable)
            .map(|d| (d.degree, d.dim))
            .collect()
    }

    pub fn is_zero_interior(&self) -> bool {
        self.degrees
            .iter()
            .filter(|d| !d.edge_unreliable)
            .all(|d| d.dim == 0)
    }
}

/// A degree-homogeneous graded map between two finite complexes, one matrix
/// per source degree. A chain map of degree k satisfies
/// d∘f = (-1)^k f∘d.
#[derive(Clone, Debug)]
pub struct ComplexMap {
    pub degree: i64,
    /// mats[slot]: C^{min+slot} -> D^{min+slot+degree}
    pub mats: Vec<SparseMat>,
}

impl ComplexMap {
    pub fn build(
        src: &TruncatedComplex,
        tgt: &TruncatedComplex,
        degree: i64,
        entry: impl Fn(i64, usize) -> Elem,
    ) -> ComplexMap {
        let mut mats = Vec::new();
        for slot in 0..src.bases.len() {
            let k = src.min_degree + slot as i64;
            let nrows = tgt.dim_in_degree(k + degree);
            let cols = (0..src.bases[slot].len()).map(|c| entry(k, c)).collect();
            mats.push(SparseMat::from_cols(nrows, src.field, cols));
        }
        ComplexMap { degree, mats }
    }

    pub fn zero(src: &TruncatedComplex, tgt: &TruncatedComplex, degree: i64) -> ComplexMap {
        ComplexMap::build(src, tgt, degree, |_, _| Elem::zero())
    }

    pub fn identity(cx: &TruncatedComplex) -> ComplexMap {
        ComplexMap::build(cx, cx, 0, |k, c| {
            let _ = k;
            Elem::single(c as u32, cx.field.one())
        })
    }

    pub fn mat_at(&self, src: &TruncatedComplex, k: i64) -> Option<&SparseMat> {
        src.slot(k).map(|s| &self.mats[s])
    }

    pub fn add(&self, other: &ComplexMap) -> ComplexMap {
        assert_eq!(self.degree, other.degree);
        ComplexMap {
            degree: self.degree,
            mats: self
                .mats
                .iter()
                .zip(&other.mats)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn scale_i64(&self, n: i64) -> ComplexMap {
        ComplexMap {
            degree: self.degree,
            mats: self.mats.iter().map(|m| m.scale_i64(n)).collect(),
        }
    }

    pub fn sub(&self, other: &ComplexMap) -> ComplexMap {
        self.add(&other.scale_i64(-1))
    }

    pub fn is_zero(&self) -> bool {
        self.mats.iter().all(|m| m.is_zero())
    }

    /// self ∘ inner, with inner: C -> D and self: D -> E.
    pub fn compose(
        &self,
        inner: &ComplexMap,
        src: &TruncatedComplex,
        mid: &TruncatedComplex,
    ) -> ComplexMap {
        let mut mats = Vec::new();
        for slot in 0..inner.mats.len() {
            let k = src.min_degree + slot as i64;
            let m = match mid.slot(k + inner.degree) {
                Some(s) => self.mats[s].compose(&inner.mats[slot]),
                None => SparseMat::zero(0, inner.mats[slot].ncols, src.field),
            };
            mats.push(m);
        }
        ComplexMap { degree: self.degree + inner.degree, mats }
    }

    /// d_tgt ∘ f - (-1)^{|f|} f ∘ d_src, the hom-complex differential of f.
    pub fn boundary(&self, src: &TruncatedComplex, tgt: &TruncatedComplex) -> ComplexMap {
        let mut mats = Vec::new();
        for slot in 0..src.bases.len() {
            let k = src.min_degree + slot as i64;
            let nrows = tgt.dim_in_degree(k + self.degree + 1);
            let mut m = SparseMat::zero(nrows, src.bases[slot].len(), src.field);
            // d_tgt ∘ f
            if let (Some(ts), true) = (tgt.slot(k + self.degree), nrows > 0) {
                m = m.add(&tgt.diffs[ts].compose(&self.mats[slot]));
            }
            // (-1)^{|f|} f ∘ d_src
            if slot + 1 < src.bases.len() {
                let fd = self.mats[slot + 1].compose(&src.diffs[slot]);
                if fd.nrows == nrows {
                    m = m.add(&fd.scale_i64(-sign_pow(self.degree)));
                } else {
                    assert!(fd.is_zero());
                }
            }
            mats.push(m);
        }
        ComplexMap { degree: self.degree + 1, mats }
    }

    /// Verify this is a chain map; names the offending basis element otherwise.
    pub fn check_chain_map(
        &self,
        src: &TruncatedComplex,
        tgt: &TruncatedComplex,
    ) -> Result<(), String> {
        let b = self.boundary(src, tgt);
        for (slot, m) in b.mats.iter().enumerate() {
            for c in 0..m.ncols {
                if !m.col(c).is_zero() {
                    return Err(format!(
                        "not a chain map on {:?} in degree {}",
                        src.bases[slot][c],
                        src.min_degree + slot as i64
                    ));
                }
            }
        }
        Ok(())
    }

    /// Is `self - other = ∂h`? All three maps C -> D.
    pub fn homotopic_via(
        &self,
        other: &ComplexMap,
        h: &ComplexMap,
        src: &TruncatedComplex,
        tgt: &TruncatedComplex,
    ) -> bool {
        assert_eq!(self.degree, other.degree);
        assert_eq!(h.degree, self.degree - 1);
        self.sub(other).sub(&h.boundary(src, tgt)).is_zero()
    }
}

/// The induced map on cohomology of a chain map, with iso reporting.
#[derive(Clone, Debug)]
pub struct InducedMap {
    pub degree: i64,
    /// (source degree, matrix in cohomology bases, is isomorphism)
    pub per_degree: Vec<(i64, SparseMat, bool)>,
}

impl InducedMap {
    pub fn is_iso_in(&self, k: i64) -> bool {
        self.per_degree
            .iter()
            .find(|(d, _, _)| *d == k)
            .map(|(_, _, iso)| *iso)
            .unwrap_or(false)
    }

    pub fn mat_in(&self, k: i64) -> Option<&SparseMat> {
        self.per_degree.iter().find(|(d, _, _)| *d == k).map(|(_, m, _)| m)
    }

    /// Iso in every degree where either side is nonzero, restricted to
    /// degrees both complexes consider reliable.
    pub fn iso_everywhere(&self) -> bool {
        self.per_degree.iter().all(|(_, _, iso)| *iso)
    }
}

/// Compute the map induced on cohomology by a chain map. Rejects non-chain
/// maps. Only degrees reliable in both complexes are reported.
pub fn map_on_cohomology(
    f: &ComplexMap,
    src: &TruncatedComplex,
    tgt: &TruncatedComplex,
    src_h: &Cohomology,
    tgt_h: &Cohomology,
) -> Result<InducedMap, String> {
    f.check_chain_map(src, tgt)?;
    let mut per_degree = Vec::new();
    for dh in &src_h.degrees {
        let k = dh.degree;
        if !src.is_degree_reliable(k) {
            continue;
        }
        let tk = k + f.degree;
        if !tgt.is_degree_reliable(tk) && tgt.slot(tk).is_some() {
            continue;
        }
        let tgt_dim = tgt_h.dim_in_degree(tk);
        let mut cols = Vec::new();
        // target coordinates: image of d_{tk-1} followed by the H-reps
        let mut span = Span::new(src.field);
        let mut n_gens = 0u32;
        if let Some(ts) = tgt.slot(tk - 1) {
            for c in 0..tgt.diffs[ts].ncols {
                span.insert(tgt.diffs[ts].col(c).clone(), n_gens);
                n_gens += 1;
            }
        }
        let first_rep_gen = n_gens;
        if let Some(th) = tgt_h.at(tk) {
            for r in &th.reps {
            span.insert(r.clone(), n_gens);
                n_gens += 1;
            }
        }
        for rep in &dh.reps {
            let img = match src.slot(k) {
                Some(s) => f.mats[s].apply(rep),
                None => Elem::zero(),
            };
            let expr = span.express(&img).ok_or_else(|| {
                "image of a cocycle is not a cocycle modulo boundaries".to_string()
            })?;
            let coords = expr.map_indices(|g| {
                if g >= first_rep_gen {
                    Some(g - first_rep_gen)
                } else {
                    None
                }
            });
            cols.push(coords);
        }
        let mat = SparseMat::from_cols(tgt_dim, src.field, cols);
        let iso = dh.dim == tgt_dim && mat.rank() == dh.dim;
        per_degree.push((k, mat, iso));
    }
    Ok(InducedMap { degree: f.degree, per_degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::FieldSpec;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    fn two_term_identity() -> TruncatedComplex {
        // K -> K with the identity: acyclic
        TruncatedComplex::new(
            q(),
            0,
            vec![vec!["a".into()], vec!["b".into()]],
            vec![
                SparseMat::from_cols(1, q(), vec![Elem::single(0, q().one())]),
                SparseMat::zero(0, 1, q()),
            ],
            true,
        )
    }

    #[test]
    fn zero_differential_gives_full_h() {
        // dims (2, 3) in degrees (0, 1), zero differential
        let cx = TruncatedComplex::new(
            q(),
            0,
            vec![
                vec!["a".into(), "b".into()],
                vec!["x".into(), "y".into(), "z".into()],
            ],
            vec![SparseMat::zero(3, 2, q()), SparseMat::zero(0, 3, q())],
            true,
        );
        let h = cx.cohomology().unwrap();
        assert_eq!(h.dim_in_degree(0), 2);
        assert_eq!(h.dim_in_degree(1), 3);
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let cx = two_term_identity();
        let h = cx.cohomology().unwrap();
        assert_eq!(h.total_dim(), 0);
    }

    #[test]
    fn identity_chain_map_induces_identity() {
        let cx = TruncatedComplex::new(
            q(),
            0,
            vec![vec!["a".into(), "b".into()]],
            vec![SparseMat::zero(0, 2, q())],
            true,
        );
        let h = cx.cohomology().unwrap();
        let id = ComplexMap::identity(&cx);
        let ind = map_on_cohomology(&id, &cx, &cx, &h, &h).unwrap();
        assert!(ind.iso_everywhere());
    }

    #[test]
    fn projection_of_identity_cone_to_zero_is_iso() {
        let cone = two_term_identity();
        let zero = TruncatedComplex::empty(q());
        let p = ComplexMap::build(&cone, &zero, 0, |_, _| Elem::zero());
        let hc = cone.cohomology().unwrap();
        let hz = zero.cohomology().unwrap();
        let ind = map_on_cohomology(&p, &cone, &zero, &hc, &hz).unwrap();
        assert!(ind.iso_everywhere());
    }

    #[test]
    #[should_panic(expected = "d∘d != 0")]
    fn d_squared_violation_is_reported() {
        let one = SparseMat::from_cols(1, q(), vec![Elem::single(0, q().one())]);
        TruncatedComplex::new(
            q(),
            0,
            vec![vec!["a".into()], vec!["b".into()], vec!["c".into()]],
            vec![one.clone(), one, SparseMat::zero(0, 1, q())],
            true,
        );
    }
}
