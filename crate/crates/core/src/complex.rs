//! Bounded chain complexes of finite-dimensional graded vector spaces.
//!
//! Indexing is homological: `d_n : C_n -> C_{n-1}`. Suspension raises degree,
//! `(ΣC)_n = C_{n-1}` with differential `-d`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{induced_map_on_quotients, quotient_representatives, FieldSpec, Matrix};

/// Closed range of homological degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Window> {
        if lo > hi {
            return Err(Error::Invalid(format!("empty window {lo}..{hi}")));
        }
        Ok(Window { lo, hi })
    }

    pub fn contains(&self, n: i64) -> bool {
        self.lo <= n && n <= self.hi
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Window) -> Option<Window> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Window { lo, hi })
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// Finitely supported graded vector space with labelled bases.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradedSpace {
    labels: BTreeMap<i64, Vec<String>>,
}

impl GradedSpace {
    pub fn new() -> GradedSpace {
        GradedSpace::default()
    }

    /// Builds a space from per-degree labels; empty degrees are dropped.
    pub fn from_labels(labels: BTreeMap<i64, Vec<String>>) -> GradedSpace {
        GradedSpace {
            labels: labels.into_iter().filter(|(_, v)| !v.is_empty()).collect(),
        }
    }

    pub fn from_dims(dims: &[(i64, usize)], prefix: &str) -> GradedSpace {
        let mut labels = BTreeMap::new();
        for &(n, k) in dims {
            let v: &mut Vec<String> = labels.entry(n).or_default();
            let start = v.len();
            v.extend((start..start + k).map(|i| format!("{prefix}{n}_{i}")));
        }
        GradedSpace::from_labels(labels)
    }

    pub fn dim(&self, n: i64) -> usize {
        self.labels.get(&n).map_or(0, Vec::len)
    }

    pub fn labels(&self, n: i64) -> &[String] {
        self.labels.get(&n).map_or(&[], Vec::as_slice)
    }

    pub fn all_labels(&self) -> &BTreeMap<i64, Vec<String>> {
        &self.labels
    }

    pub fn push(&mut self, n: i64, label: String) -> usize {
        let v = self.labels.entry(n).or_default();
        v.push(label);
        v.len() - 1
    }

    /// Degrees with nonzero dimension, ascending.
    pub fn support(&self) -> Vec<i64> {
        self.labels.keys().copied().collect()
    }

    pub fn bottom(&self) -> Option<i64> {
        self.labels.keys().next().copied()
    }

    pub fn top(&self) -> Option<i64> {
        self.labels.keys().next_back().copied()
    }

    pub fn total_dim(&self) -> usize {
        self.labels.values().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn shifted(&self, t: i64) -> GradedSpace {
        GradedSpace {
            labels: self.labels.iter().map(|(n, v)| (n + t, v.clone())).collect(),
        }
    }
}

/// Homology data in one degree.
#[derive(Clone, Debug)]
pub struct HomologyGroup {
    pub dim: usize,
    /// Columns span `ker d_n`.
    pub cycles: Matrix,
    /// Columns span `im d_{n+1}`.
    pub boundaries: Matrix,
    /// Columns are cycle representatives of a basis of `H_n`.
    pub representatives: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Complex {
    field: FieldSpec,
    space: GradedSpace,
    d: BTreeMap<i64, Matrix>,
}

impl Complex {
    /// Builds a complex, checking only that the differential blocks have the
    /// right shapes. Use [`Complex::validate`] for `d∘d = 0`.
    pub fn new(field: FieldSpec, space: GradedSpace, d: BTreeMap<i64, Matrix>) -> Result<Complex> {
        let mut kept = BTreeMap::new();
        for (n, m) in d {
            if m.rows() != space.dim(n - 1) || m.cols() != space.dim(n) {
                return Err(Error::Shape(format!(
                    "d_{n} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    space.dim(n - 1),
                    space.dim(n)
                )));
            }
            if m.field() != field {
                return Err(Error::Shape(format!("d_{n} has the wrong field")));
            }
            if !m.is_zero() {
                kept.insert(n, m);
            }
        }
        Ok(Complex {
            field,
            space,
            d: kept,
        })
    }

    pub fn zero(field: FieldSpec) -> Complex {
        Complex {
            field,
            space: GradedSpace::new(),
            d: BTreeMap::new(),
        }
    }

    /// A single copy of the field in degree `n`.
    pub fn point(field: FieldSpec, n: i64) -> Complex {
        Complex {
            field,
            space: GradedSpace::from_dims(&[(n, 1)], "e"),
            d: BTreeMap::new(),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn dim(&self, n: i64) -> usize {
        self.space.dim(n)
    }

    pub fn bottom(&self) -> Option<i64> {
        self.space.bottom()
    }

    pub fn top(&self) -> Option<i64> {
        self.space.top()
    }

    /// `d_n : C_n -> C_{n-1}`.
    pub fn d_at(&self, n: i64) -> Matrix {
        self.d
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.field, self.dim(n - 1), self.dim(n)))
    }

    pub fn d_ref(&self, n: i64) -> Option<&Matrix> {
        self.d.get(&n)
    }

    /// Checks `d_{n-1} d_n = 0` everywhere, reporting the first failure.
    pub fn validate(&self) -> Result<()> {
        for &n in self.d.keys() {
            if let Some(lower) = self.d.get(&(n - 1)) {
                let prod = lower.mul(&self.d[&n]);
                for j in 0..prod.cols() {
                    if (0..prod.rows()).any(|i| !prod.get(i, j).is_zero()) {
                        return Err(Error::NotAComplex { degree: n, column: j });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn homology_at(&self, n: i64) -> HomologyGroup {
        let dim = self.dim(n);
        let cycles = self.d_at(n).kernel().basis;
        let boundaries = self.d_at(n + 1);
        let representatives = quotient_representatives(self.field, dim, &cycles, &boundaries);
        HomologyGroup {
            dim: representatives.cols(),
            cycles,
            boundaries,
            representatives,
        }
    }

    pub fn homology(&self, w: Window) -> BTreeMap<i64, HomologyGroup> {
        w.degrees().map(|n| (n, self.homology_at(n))).collect()
    }

    pub fn homology_dims(&self, w: Window) -> BTreeMap<i64, usize> {
        w.degrees().map(|n| (n, self.homology_dim(n))).collect()
    }

    pub fn homology_dim(&self, n: i64) -> usize {
        let dim = self.dim(n);
        if dim == 0 {
            return 0;
        }
        let rank_out = self.d.get(&n).map_or(0, Matrix::rank);
        let rank_in = self.d.get(&(n + 1)).map_or(0, Matrix::rank);
        dim - rank_out - rank_in
    }

    /// The window spanning the support, widened by one on each side.
    pub fn support_window(&self) -> Window {
        match (self.bottom(), self.top()) {
            (Some(b), Some(t)) => Window { lo: b - 1, hi: t + 1 },
            _ => Window { lo: 0, hi: 0 },
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.space
            .all_labels()
            .iter()
            .map(|(n, v)| if n.rem_euclid(2) == 0 { v.len() as i64 } else { -(v.len() as i64) })
            .sum()
    }

    /// `Σ^t C`: `(Σ^t C)_n = C_{n-t}` with differential `(-1)^t d`.
    pub fn shift(&self, t: i64) -> Complex {
        let sign = self.field.sign(t);
        Complex {
            field: self.field,
            space: self.space.shifted(t),
            d: self.d.iter().map(|(n, m)| (n + t, m.scale(&sign))).collect(),
        }
    }

    pub fn direct_sum(field: FieldSpec, parts: &[&Complex]) -> Complex {
        let mut labels: BTreeMap<i64, Vec<String>> = BTreeMap::new();
        for c in parts {
            for (n, v) in c.space.all_labels() {
                labels.entry(*n).or_default().extend(v.iter().cloned());
            }
        }
        let space = GradedSpace::from_labels(labels);
        let mut d = BTreeMap::new();
        for n in space.support() {
            let blocks: Vec<Matrix> = parts.iter().map(|c| c.d_at(n)).collect();
            let refs: Vec<&Matrix> = blocks.iter().collect();
            d.insert(n, Matrix::block_diag(field, &refs));
        }
        Complex::new(field, space, d).expect("block sums are well shaped")
    }

    pub fn is_acyclic_on(&self, w: Window) -> bool {
        w.degrees().all(|n| self.homology_dim(n) == 0)
    }
}

/// A degree-zero map of complexes.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub source: Arc<Complex>,
    pub target: Arc<Complex>,
    maps: BTreeMap<i64, Matrix>,
}

impl ChainMap {
    /// Builds the map, checking shapes. Use [`ChainMap::validate`] for the
    /// commutation identity.
    pub fn new(source: Arc<Complex>, target: Arc<Complex>, maps: BTreeMap<i64, Matrix>) -> Result<ChainMap> {
        let mut kept = BTreeMap::new();
        for (n, m) in maps {
            if m.rows() != target.dim(n) || m.cols() != source.dim(n) {
                return Err(Error::Shape(format!(
                    "f_{n} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    target.dim(n),
                    source.dim(n)
                )));
            }
            if !m.is_zero() {
                kept.insert(n, m);
            }
        }
        Ok(ChainMap {
            source,
            target,
            maps: kept,
        })
    }

    pub fn identity(c: Arc<Complex>) -> ChainMap {
        let maps = c
            .space()
            .support()
            .into_iter()
            .map(|n| (n, Matrix::identity(c.field(), c.dim(n))))
            .collect();
        ChainMap {
            source: c.clone(),
            target: c,
            maps,
        }
    }

    pub fn zero(source: Arc<Complex>, target: Arc<Complex>) -> ChainMap {
        ChainMap {
            source,
            target,
            maps: BTreeMap::new(),
        }
    }

    pub fn f_at(&self, n: i64) -> Matrix {
        self.maps.get(&n).cloned().unwrap_or_else(|| {
            Matrix::zeros(self.source.field(), self.target.dim(n), self.source.dim(n))
        })
    }

    pub fn blocks(&self) -> &BTreeMap<i64, Matrix> {
        &self.maps
    }

    /// Checks `d^tgt f = f d^src` in every degree.
    pub fn validate(&self) -> Result<()> {
        let mut degrees: Vec<i64> = self.source.space().support();
        degrees.extend(self.target.space().support().into_iter().map(|n| n + 1));
        degrees.sort_unstable();
        degrees.dedup();
        for n in degrees {
            let lhs = self.target.d_at(n).mul(&self.f_at(n));
            let rhs = self.f_at(n - 1).mul(&self.source.d_at(n));
            if lhs != rhs {
                return Err(Error::NotAChainMap {
                    degree: n,
                    detail: "d∘f ≠ f∘d".into(),
                });
            }
        }
        Ok(())
    }

    pub fn compose(&self, first: &ChainMap) -> Result<ChainMap> {
        if *first.target != *self.source {
            return Err(Error::Shape("composing maps with mismatched ends".into()));
        }
        let maps = first
            .source
            .space()
            .support()
            .into_iter()
            .map(|n| (n, self.f_at(n).mul(&first.f_at(n))))
            .collect();
        ChainMap::new(first.source.clone(), self.target.clone(), maps)
    }

    /// `H_n(f)` in the representative bases of [`Complex::homology_at`].
    pub fn homology_map(&self, n: i64) -> Result<Matrix> {
        let hs = self.source.homology_at(n);
        let ht = self.target.homology_at(n);
        Ok(induced_map_on_quotients(
            &self.f_at(n),
            &hs.cycles,
            &hs.boundaries,
            &ht.cycles,
            &ht.boundaries,
        )?)
    }

    /// Mapping cone with inclusion of the target and projection onto `Σ source`.
    pub fn cone(&self) -> (Complex, ChainMap, ChainMap) {
        let field = self.source.field();
        let tgt = &self.target;
        let src = &self.source;
        let shifted = src.shift(1);
        let mut labels: BTreeMap<i64, Vec<String>> = BTreeMap::new();
        for (n, v) in tgt.space().all_labels() {
            labels.entry(*n).or_default().extend(v.iter().cloned());
        }
        for (n, v) in shifted.space().all_labels() {
            labels
                .entry(*n)
                .or_default()
                .extend(v.iter().map(|l| format!("s{l}")));
        }
        let space = GradedSpace::from_labels(labels);
        let mut d = BTreeMap::new();
        for n in space.support() {
            let (t_hi, t_lo) = (tgt.dim(n), tgt.dim(n - 1));
            let (s_hi, s_lo) = (src.dim(n - 1), src.dim(n - 2));
            let mut m = Matrix::zeros(field, t_lo + s_lo, t_hi + s_hi);
            m.paste(0, 0, &tgt.d_at(n));
            m.paste(0, t_hi, &self.f_at(n - 1));
            m.paste(t_lo, t_hi, &src.d_at(n - 1).neg());
            d.insert(n, m);
        }
        let cone = Arc::new(Complex::new(field, space, d).expect("cone blocks are well shaped"));
        let tgt_arc = self.target.clone();
        let mut inc = BTreeMap::new();
        let mut proj = BTreeMap::new();
        for n in cone.space().support() {
            let (t, s) = (tgt.dim(n), src.dim(n - 1));
            let mut i = Matrix::zeros(field, t + s, t);
            i.paste(0, 0, &Matrix::identity(field, t));
            inc.insert(n, i);
            let mut p = Matrix::zeros(field, s, t + s);
            p.paste(0, t, &Matrix::identity(field, s));
            proj.insert(n, p);
        }
        let inclusion = ChainMap::new(tgt_arc, cone.clone(), inc).expect("inclusion shape");
        let projection = ChainMap::new(cone.clone(), Arc::new(shifted), proj).expect("projection shape");
        ((*cone).clone(), inclusion, projection)
    }
}

/// A family of degree `+1` maps `h_n : M_n -> N_{n+1}`.
#[derive(Clone, Debug)]
pub struct Homotopy {
    pub source: Arc<Complex>,
    pub target: Arc<Complex>,
    maps: BTreeMap<i64, Matrix>,
}

impl Homotopy {
    pub fn new(source: Arc<Complex>, target: Arc<Complex>, maps: BTreeMap<i64, Matrix>) -> Result<Homotopy> {
        for (n, m) in &maps {
            if m.rows() != target.dim(n + 1) || m.cols() != source.dim(*n) {
                return Err(Error::Shape(format!("h_{n} has the wrong shape")));
            }
        }
        Ok(Homotopy { source, target, maps })
    }

    pub fn zero(source: Arc<Complex>, target: Arc<Complex>) -> Homotopy {
        Homotopy {
            source,
            target,
            maps: BTreeMap::new(),
        }
    }

    pub fn h_at(&self, n: i64) -> Matrix {
        self.maps.get(&n).cloned().unwrap_or_else(|| {
            Matrix::zeros(self.source.field(), self.target.dim(n + 1), self.source.dim(n))
        })
    }
}

/// `f - g = d h + h d`, exactly, in every degree; `Err` names the first bad degree.
pub fn homotopy_defect(f: &ChainMap, g: &ChainMap, h: &Homotopy) -> Result<(), i64> {
    let mut degrees = f.source.space().support();
    degrees.extend(f.target.space().support());
    degrees.sort_unstable();
    degrees.dedup();
    for n in degrees {
        let lhs = f.f_at(n).sub(&g.f_at(n));
        let rhs = f
            .target
            .d_at(n + 1)
            .mul(&h.h_at(n))
            .add(&h.h_at(n - 1).mul(&f.source.d_at(n)));
        if lhs != rhs {
            return Err(n);
        }
    }
    Ok(())
}

pub fn check_homotopy(f: &ChainMap, g: &ChainMap, h: &Homotopy) -> bool {
    *f.source == *g.source && *f.target == *g.target && homotopy_defect(f, g, h).is_ok()
}

/// Per-degree outcome of a quasi-isomorphism test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeVerdict {
    pub degree: i64,
    pub source_dim: usize,
    pub target_dim: usize,
    pub iso: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiIsoVerdict {
    pub window: Window,
    pub degrees: Vec<DegreeVerdict>,
    pub all: bool,
}

impl QuasiIsoVerdict {
    pub fn first_failure(&self) -> Option<&DegreeVerdict> {
        self.degrees.iter().find(|d| !d.iso)
    }
}

pub fn quasi_iso(f: &ChainMap, w: Window) -> Result<QuasiIsoVerdict> {
    let mut degrees = Vec::new();
    for n in w.degrees() {
        let hs = f.source.homology_dim(n);
        let ht = f.target.homology_dim(n);
        let iso = if hs != ht {
            false
        } else if hs == 0 {
            true
        } else {
            f.homology_map(n)?.rank() == hs
        };
        degrees.push(DegreeVerdict {
            degree: n,
            source_dim: hs,
            target_dim: ht,
            iso,
        });
    }
    let all = degrees.iter().all(|d| d.iso);
    Ok(QuasiIsoVerdict { window: w, degrees, all })
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldSpec = FieldSpec::Rationals;

    fn two_term(d: Matrix, n: i64) -> Complex {
        let space = GradedSpace::from_dims(&[(n, d.cols()), (n - 1, d.rows())], "c");
        Complex::new(Q, space, BTreeMap::from([(n, d)])).unwrap()
    }

    #[test]
    fn zero_complex_is_valid() {
        assert!(Complex::zero(Q).validate().is_ok());
    }

    #[test]
    fn detects_nonzero_square() {
        let space = GradedSpace::from_dims(&[(0, 1), (1, 1), (2, 1)], "c");
        let d = BTreeMap::from([
            (1, Matrix::from_i64(Q, &[&[1]])),
            (2, Matrix::from_i64(Q, &[&[1]])),
        ]);
        let c = Complex::new(Q, space, d).unwrap();
        assert_eq!(c.validate(), Err(Error::NotAComplex { degree: 2, column: 0 }));
    }

    #[test]
    fn homology_of_point_and_diag() {
        let k = Complex::point(Q, 0);
        assert_eq!(k.homology_dims(Window { lo: -1, hi: 1 }), BTreeMap::from([(-1, 0), (0, 1), (1, 0)]));
        let c = two_term(Matrix::from_i64(Q, &[&[1, 0], &[0, 0]]), 1);
        assert_eq!(c.homology_dim(1), 1);
        assert_eq!(c.homology_dim(0), 1);
    }

    #[test]
    fn shift_moves_degrees_and_signs() {
        let k = Complex::point(Q, 0);
        let s = k.shift(1);
        assert_eq!(s.dim(1), 1);
        assert_eq!(s.dim(0), 0);
        let c = two_term(Matrix::from_i64(Q, &[&[1, 2]]), 1);
        assert_eq!(c.shift(0), c);
        assert_eq!(c.shift(1).shift(-1), c);
        assert_eq!(c.shift(1).d_at(2), Matrix::from_i64(Q, &[&[-1, -2]]));
    }

    #[test]
    fn cone_examples() {
        let k = Arc::new(Complex::point(Q, 0));
        let (cone, inc, proj) = ChainMap::identity(k.clone()).cone();
        assert!(cone.validate().is_ok());
        assert!(cone.is_acyclic_on(Window { lo: -2, hi: 3 }));
        assert!(inc.validate().is_ok());
        assert!(proj.validate().is_ok());
        let (cone0, _, _) = ChainMap::zero(k.clone(), k.clone()).cone();
        assert_eq!(cone0.homology_dim(0), 1);
        assert_eq!(cone0.homology_dim(1), 1);
    }

    #[test]
    fn direct_sums() {
        let empty = Complex::direct_sum(Q, &[]);
        assert_eq!(empty, Complex::zero(Q));
        let c = two_term(Matrix::from_i64(Q, &[&[1, 2]]), 1);
        let z = Complex::zero(Q);
        assert_eq!(Complex::direct_sum(Q, &[&c, &z]), c);
        let s = Complex::direct_sum(Q, &[&c, &c.shift(1)]);
        assert_eq!(s.dim(1), 2 + 1);
        assert_eq!(s.dim(2), 2);
    }

    #[test]
    fn homotopy_examples() {
        let k = Arc::new(Complex::point(Q, 0));
        let id = ChainMap::identity(k.clone());
        assert!(check_homotopy(&id, &id, &Homotopy::zero(k.clone(), k.clone())));
        let zero = ChainMap::zero(k.clone(), k.clone());
        assert!(!check_homotopy(&id, &zero, &Homotopy::zero(k.clone(), k.clone())));

        // cone(id_k): C_1 = s e, C_0 = e, d(s e) = e; contraction h(e) = s e
        let (cone, _, _) = ChainMap::identity(k).cone();
        let cone = Arc::new(cone);
        let id_c = ChainMap::identity(cone.clone());
        let zero_c = ChainMap::zero(cone.clone(), cone.clone());
        let h = Homotopy::new(cone.clone(), cone.clone(), BTreeMap::from([(0, Matrix::from_i64(Q, &[&[1]]))])).unwrap();
        assert!(check_homotopy(&id_c, &zero_c, &h));
    }

    #[test]
    fn quasi_iso_examples() {
        let k = Arc::new(Complex::point(Q, 0));
        let w = Window { lo: -1, hi: 1 };
        assert!(quasi_iso(&ChainMap::identity(k.clone()), w).unwrap().all);
        let v = quasi_iso(&ChainMap::zero(k.clone(), k.clone()), w).unwrap();
        assert!(!v.all);
        assert_eq!(v.first_failure().unwrap().degree, 0);
    }
}
