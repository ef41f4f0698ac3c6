use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::{axpy, is_zero_vec, koszul, signed, unit_vector, Axiom, Bilinear, Violation};
use crate::complex::{Complex, GradedSpace};
use crate::error::{Error, Result};
use crate::linalg::{FieldSpec, Matrix, Scalar};

/// A linear combination of named basis elements.
pub type LinComb = Vec<(Scalar, String)>;

/// Sparse presentation of a DGA: omitted products and differentials are zero.
#[derive(Clone, Debug, Default)]
pub struct AlgebraRules {
    pub name: String,
    pub basis: Vec<(String, i64)>,
    pub unit: Option<String>,
    pub mul: Vec<(String, String, LinComb)>,
    pub d: Vec<(String, LinComb)>,
}

/// Maps labels to `(degree, index)` positions and builds vectors.
pub(crate) struct LabelIndex {
    pos: HashMap<String, (i64, usize)>,
    space: GradedSpace,
}

impl LabelIndex {
    pub(crate) fn new(basis: &[(String, i64)]) -> Result<LabelIndex> {
        let mut space = GradedSpace::new();
        let mut pos = HashMap::new();
        for (label, deg) in basis {
            let i = space.push(*deg, label.clone());
            if pos.insert(label.clone(), (*deg, i)).is_some() {
                return Err(Error::Invalid(format!("duplicate basis label `{label}`")));
            }
        }
        Ok(LabelIndex { pos, space })
    }

    pub(crate) fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub(crate) fn lookup(&self, label: &str) -> Result<(i64, usize)> {
        self.pos
            .get(label)
            .copied()
            .ok_or_else(|| Error::Invalid(format!("unknown basis element `{label}`")))
    }

    /// Evaluates a combination that must be homogeneous of degree `deg`.
    /// Grading violations name `witness`.
    pub(crate) fn vector(&self, field: FieldSpec, comb: &LinComb, deg: i64, witness: &[String]) -> Result<Vec<Scalar>> {
        let mut v = vec![field.zero(); self.space.dim(deg)];
        for (c, label) in comb {
            let (d, i) = self.lookup(label)?;
            if c.is_zero() {
                continue;
            }
            if d != deg {
                return Err(Error::Axiom(Violation {
                    axiom: Axiom::Grading,
                    witness: witness.to_vec(),
                }));
            }
            v[i] = &v[i] + c;
        }
        Ok(v)
    }
}

#[derive(Clone, Debug)]
pub struct DgAlgebra {
    name: String,
    complex: Complex,
    unit: Vec<Scalar>,
    mul: Bilinear,
}

impl PartialEq for DgAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.complex == other.complex && self.unit == other.unit && self.mul == other.mul
    }
}

impl Eq for DgAlgebra {}

impl DgAlgebra {
    /// Assembles an algebra from parts. Call [`DgAlgebra::validate`] to certify it.
    pub fn new(name: impl Into<String>, complex: Complex, unit: Vec<Scalar>, mul: Bilinear) -> Result<DgAlgebra> {
        if unit.len() != complex.dim(0) {
            return Err(Error::Shape("unit must live in degree 0".into()));
        }
        Ok(DgAlgebra {
            name: name.into(),
            complex,
            unit,
            mul,
        })
    }

    /// The ground field as a DGA concentrated in degree 0.
    pub fn ground(field: FieldSpec) -> DgAlgebra {
        let space = GradedSpace::from_labels(BTreeMap::from([(0, vec!["1".to_string()])]));
        let complex = Complex::new(field, space.clone(), BTreeMap::new()).expect("point");
        let mul = Bilinear::from_fn(field, &space, &space, &space, |_, _, _, _| vec![field.one()]);
        DgAlgebra {
            name: "k".into(),
            complex,
            unit: vec![field.one()],
            mul,
        }
    }

    pub fn from_rules(field: FieldSpec, rules: &AlgebraRules) -> Result<DgAlgebra> {
        let index = LabelIndex::new(&rules.basis)?;
        let space = index.space().clone();
        if let Some(n) = space.bottom().filter(|&n| n < 0) {
            return Err(Error::Axiom(Violation {
                axiom: Axiom::Grading,
                witness: vec![space.labels(n)[0].clone()],
            }));
        }
        let unit_label = rules
            .unit
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("algebra `{}` has no unit", rules.name)))?;
        let (ud, ui) = index.lookup(unit_label)?;
        if ud != 0 {
            return Err(Error::Axiom(Violation {
                axiom: Axiom::Grading,
                witness: vec![unit_label.clone()],
            }));
        }
        let mut d: BTreeMap<i64, Matrix> = BTreeMap::new();
        for (a, comb) in &rules.d {
            let (p, i) = index.lookup(a)?;
            let v = index.vector(field, comb, p - 1, &[format!("d {a}")])?;
            let m = d
                .entry(p)
                .or_insert_with(|| Matrix::zeros(field, space.dim(p - 1), space.dim(p)));
            for (r, x) in v.into_iter().enumerate() {
                m.set(r, i, x);
            }
        }
        let complex = Complex::new(field, space.clone(), d)?;
        let mut table: HashMap<((i64, usize), (i64, usize)), Vec<Scalar>> = HashMap::new();
        for (a, b, comb) in &rules.mul {
            let pa = index.lookup(a)?;
            let pb = index.lookup(b)?;
            let v = index.vector(field, comb, pa.0 + pb.0, &[a.clone(), b.clone()])?;
            table.insert((pa, pb), v);
        }
        let mul = Bilinear::from_fn(field, &space, &space, &space, |p, i, q, j| {
            table
                .get(&((p, i), (q, j)))
                .cloned()
                .unwrap_or_else(|| vec![field.zero(); space.dim(p + q)])
        });
        DgAlgebra::new(rules.name.clone(), complex, unit_vector(field, space.dim(0), ui), mul)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> DgAlgebra {
        self.name = name.into();
        self
    }

    pub fn field(&self) -> FieldSpec {
        self.complex.field()
    }

    pub fn complex(&self) -> &Complex {
        &self.complex
    }

    pub fn space(&self) -> &GradedSpace {
        self.complex.space()
    }

    pub fn dim(&self, n: i64) -> usize {
        self.complex.dim(n)
    }

    pub fn unit(&self) -> &[Scalar] {
        &self.unit
    }

    pub fn multiplication(&self) -> &Bilinear {
        &self.mul
    }

    pub fn is_ground(&self) -> bool {
        self.space().total_dim() == 1 && self.dim(0) == 1
    }

    pub fn concentrated_in_degree_zero(&self) -> bool {
        self.space().support().iter().all(|&n| n == 0)
    }

    pub fn label(&self, n: i64, i: usize) -> &str {
        &self.space().labels(n)[i]
    }

    pub fn mul_basis(&self, p: i64, i: usize, q: i64, j: usize) -> Vec<Scalar> {
        self.mul
            .apply_basis(self.field(), p, i, q, j, self.dim(q), self.dim(p + q))
    }

    pub fn mul(&self, p: i64, x: &[Scalar], q: i64, y: &[Scalar]) -> Vec<Scalar> {
        self.mul.apply(self.field(), p, x, q, y, self.dim(p + q))
    }

    /// `d` applied to a homogeneous element of degree `n`.
    pub fn d(&self, n: i64, x: &[Scalar]) -> Vec<Scalar> {
        match self.complex.d_ref(n) {
            Some(m) => m.mul_vec(x),
            None => vec![self.field().zero(); self.dim(n - 1)],
        }
    }

    pub fn basis_vector(&self, n: i64, i: usize) -> Vec<Scalar> {
        unit_vector(self.field(), self.dim(n), i)
    }

    /// Checks every DGA identity on basis tuples; empty means valid.
    /// At most one violation per axiom is reported.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let field = self.field();
        let space = self.space();
        let lbl = |n: i64, i: usize| self.label(n, i).to_string();
        if let Err(Error::NotAComplex { degree, column }) = self.complex.validate() {
            out.push(Violation {
                axiom: Axiom::DSquared,
                witness: vec![lbl(degree, column)],
            });
        }
        'unit: for n in space.support() {
            for i in 0..self.dim(n) {
                let e = self.basis_vector(n, i);
                if self.mul(0, &self.unit, n, &e) != e || self.mul(n, &e, 0, &self.unit) != e {
                    out.push(Violation {
                        axiom: Axiom::Unit,
                        witness: vec![lbl(n, i)],
                    });
                    break 'unit;
                }
            }
        }
        if !is_zero_vec(&self.d(0, &self.unit)) {
            out.push(Violation {
                axiom: Axiom::Unit,
                witness: vec!["d(1)".into()],
            });
        }
        let degs = space.support();
        'assoc: for &p in &degs {
            for &q in &degs {
                for &r in &degs {
                    if self.dim(p + q + r) == 0 {
                        continue;
                    }
                    for i in 0..self.dim(p) {
                        for j in 0..self.dim(q) {
                            let ab = self.mul_basis(p, i, q, j);
                            for k in 0..self.dim(r) {
                                let c = self.basis_vector(r, k);
                                let left = self.mul(p + q, &ab, r, &c);
                                let bc = self.mul_basis(q, j, r, k);
                                let right = self.mul(p, &self.basis_vector(p, i), q + r, &bc);
                                if left != right {
                                    out.push(Violation {
                                        axiom: Axiom::Associativity,
                                        witness: vec![lbl(p, i), lbl(q, j), lbl(r, k)],
                                    });
                                    break 'assoc;
                                }
                            }
                        }
                    }
                }
            }
        }
        'leib: for &p in &degs {
            for &q in &degs {
                for i in 0..self.dim(p) {
                    for j in 0..self.dim(q) {
                        let a = self.basis_vector(p, i);
                        let b = self.basis_vector(q, j);
                        let lhs = self.d(p + q, &self.mul(p, &a, q, &b));
                        let mut rhs = self.mul(p - 1, &self.d(p, &a), q, &b);
                        let t = signed(field, koszul(p, 1), self.mul(p, &a, q - 1, &self.d(q, &b)));
                        axpy(&mut rhs, &field.one(), &t);
                        if lhs != rhs {
                            out.push(Violation {
                                axiom: Axiom::Leibniz,
                                witness: vec![lbl(p, i), lbl(q, j)],
                            });
                            break 'leib;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Same complex with `a ·op b = (-1)^{|a||b|} b a`.
    pub fn opposite(&self) -> DgAlgebra {
        let field = self.field();
        let space = self.space().clone();
        let mul = Bilinear::from_fn(field, &space, &space, &space, |p, i, q, j| {
            signed(field, koszul(p, q), self.mul_basis(q, j, p, i))
        });
        DgAlgebra {
            name: format!("{}^op", self.name),
            complex: self.complex.clone(),
            unit: self.unit.clone(),
            mul,
        }
    }
}

/// A degree-preserving map of DGAs, one matrix per degree.
#[derive(Clone, Debug)]
pub struct DgaMorphism {
    pub source: Arc<DgAlgebra>,
    pub target: Arc<DgAlgebra>,
    maps: BTreeMap<i64, Matrix>,
}

impl DgaMorphism {
    pub fn new(source: Arc<DgAlgebra>, target: Arc<DgAlgebra>, maps: BTreeMap<i64, Matrix>) -> Result<DgaMorphism> {
        for (n, m) in &maps {
            if m.rows() != target.dim(*n) || m.cols() != source.dim(*n) {
                return Err(Error::Shape(format!("morphism block {n} has the wrong shape")));
            }
        }
        Ok(DgaMorphism { source, target, maps })
    }

    /// Builds a morphism from images of named source basis elements.
    pub fn from_images(source: Arc<DgAlgebra>, target: Arc<DgAlgebra>, images: &[(String, LinComb)]) -> Result<DgaMorphism> {
        let field = source.field();
        let tbasis: Vec<(String, i64)> = target
            .space()
            .all_labels()
            .iter()
            .flat_map(|(n, v)| v.iter().map(move |l| (l.clone(), *n)))
            .collect();
        let tindex = LabelIndex::new(&tbasis)?;
        let sbasis: Vec<(String, i64)> = source
            .space()
            .all_labels()
            .iter()
            .flat_map(|(n, v)| v.iter().map(move |l| (l.clone(), *n)))
            .collect();
        let sindex = LabelIndex::new(&sbasis)?;
        let mut maps: BTreeMap<i64, Matrix> = BTreeMap::new();
        for (a, comb) in images {
            let (p, i) = sindex.lookup(a)?;
            let v = tindex.vector(field, comb, p, &[a.clone()])?;
            let m = maps
                .entry(p)
                .or_insert_with(|| Matrix::zeros(field, target.dim(p), source.dim(p)));
            for (r, x) in v.into_iter().enumerate() {
                m.set(r, i, x);
            }
        }
        DgaMorphism::new(source, target, maps)
    }

    pub fn identity(a: Arc<DgAlgebra>) -> DgaMorphism {
        let maps = a
            .space()
            .support()
            .into_iter()
            .map(|n| (n, Matrix::identity(a.field(), a.dim(n))))
            .collect();
        DgaMorphism {
            source: a.clone(),
            target: a,
            maps,
        }
    }

    pub fn block(&self, n: i64) -> Matrix {
        self.maps
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.source.field(), self.target.dim(n), self.source.dim(n)))
    }

    pub fn apply(&self, n: i64, x: &[Scalar]) -> Vec<Scalar> {
        match self.maps.get(&n) {
            Some(m) => m.mul_vec(x),
            None => vec![self.source.field().zero(); self.target.dim(n)],
        }
    }

    pub fn compose(&self, first: &DgaMorphism) -> Result<DgaMorphism> {
        if *first.target != *self.source {
            return Err(Error::AlgebraMismatch("composite of non-composable morphisms".into()));
        }
        let maps = first
            .source
            .space()
            .support()
            .into_iter()
            .map(|n| (n, self.block(n).mul(&first.block(n))))
            .collect();
        DgaMorphism::new(first.source.clone(), self.target.clone(), maps)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let (s, t) = (&self.source, &self.target);
        if self.apply(0, s.unit()) != t.unit() {
            out.push(Violation {
                axiom: Axiom::Unit,
                witness: vec!["1".into()],
            });
        }
        let degs = s.space().support();
        'mult: for &p in &degs {
            for &q in &degs {
                for i in 0..s.dim(p) {
                    for j in 0..s.dim(q) {
                        let lhs = self.apply(p + q, &s.mul_basis(p, i, q, j));
                        let rhs = t.mul(p, &self.apply(p, &s.basis_vector(p, i)), q, &self.apply(q, &s.basis_vector(q, j)));
                        if lhs != rhs {
                            out.push(Violation {
                                axiom: Axiom::Multiplicative,
                                witness: vec![s.label(p, i).into(), s.label(q, j).into()],
                            });
                            break 'mult;
                        }
                    }
                }
            }
        }
        'diff: for &p in &degs {
            for i in 0..s.dim(p) {
                let e = s.basis_vector(p, i);
                if self.apply(p - 1, &s.d(p, &e)) != t.d(p, &self.apply(p, &e)) {
                    out.push(Violation {
                        axiom: Axiom::Differential,
                        witness: vec![s.label(p, i).into()],
                    });
                    break 'diff;
                }
            }
        }
        out
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const Q: FieldSpec = FieldSpec::Rationals;

    pub(crate) fn comb(items: &[(i64, &str)]) -> LinComb {
        items.iter().map(|(c, l)| (Q.from_i64(*c), l.to_string())).collect()
    }

    /// `k[x]/(x^n)` in degree `deg` with zero differential.
    pub(crate) fn truncated_poly(n: usize, deg: i64) -> DgAlgebra {
        let mut rules = AlgebraRules {
            name: format!("k[x]/x^{n}"),
            unit: Some("1".into()),
            ..Default::default()
        };
        rules.basis.push(("1".into(), 0));
        for k in 1..n {
            rules.basis.push((format!("x{k}"), deg * k as i64));
        }
        let name = |k: usize| if k == 0 { "1".to_string() } else { format!("x{k}") };
        for a in 0..n {
            for b in 0..n {
                if a + b < n {
                    rules.mul.push((name(a), name(b), comb(&[(1, &name(a + b))])));
                }
            }
        }
        DgAlgebra::from_rules(Q, &rules).unwrap()
    }

    #[test]
    fn dual_numbers_and_exterior_are_valid() {
        assert!(truncated_poly(2, 0).is_valid());
        assert!(truncated_poly(3, 0).is_valid());
        let ext = truncated_poly(2, 1);
        assert!(ext.is_valid());
        assert!(ext.opposite().is_valid());
        assert_eq!(ext.opposite().opposite(), ext);
    }

    #[test]
    fn square_to_unit_is_a_valid_algebra() {
        // x² = 1 gives k[x]/(x²-1) ≅ k×k: no axiom fails.
        let rules = AlgebraRules {
            name: "A".into(),
            basis: vec![("1".into(), 0), ("x".into(), 0)],
            unit: Some("1".into()),
            mul: vec![
                ("1".into(), "1".into(), comb(&[(1, "1")])),
                ("1".into(), "x".into(), comb(&[(1, "x")])),
                ("x".into(), "1".into(), comb(&[(1, "x")])),
                ("x".into(), "x".into(), comb(&[(1, "1")])),
            ],
            d: vec![],
        };
        assert!(DgAlgebra::from_rules(Q, &rules).unwrap().is_valid());
    }

    #[test]
    fn violations_are_named() {
        let mut rules = AlgebraRules {
            name: "A".into(),
            basis: vec![("1".into(), 0), ("x".into(), 1), ("y".into(), 1)],
            unit: Some("1".into()),
            mul: vec![
                ("1".into(), "1".into(), comb(&[(1, "1")])),
                ("1".into(), "x".into(), comb(&[(1, "x")])),
                ("x".into(), "1".into(), comb(&[(1, "x")])),
                ("1".into(), "y".into(), comb(&[(1, "y")])),
            ],
            d: vec![],
        };
        let v = DgAlgebra::from_rules(Q, &rules).unwrap().validate();
        assert_eq!(v[0].axiom, Axiom::Unit);
        rules.mul.push(("y".into(), "1".into(), comb(&[(1, "y")])));
        assert!(DgAlgebra::from_rules(Q, &rules).unwrap().is_valid());
        rules.mul.push(("x".into(), "y".into(), comb(&[(1, "1")])));
        assert!(matches!(
            DgAlgebra::from_rules(Q, &rules),
            Err(Error::Axiom(Violation { axiom: Axiom::Grading, .. }))
        ));
    }

    #[test]
    fn commutative_opposite_unchanged() {
        let a = truncated_poly(3, 0);
        assert_eq!(a.opposite(), a);
        let ext = truncated_poly(2, 1);
        // x ·op x = -(x x) = 0
        assert!(ext.opposite().mul_basis(1, 0, 1, 0).iter().all(Scalar::is_zero));
    }

    #[test]
    fn morphism_checks() {
        let r = Arc::new(truncated_poly(2, 0));
        let k = Arc::new(DgAlgebra::ground(Q));
        let phi = DgaMorphism::from_images(r.clone(), k.clone(), &[("1".into(), comb(&[(1, "1")]))]).unwrap();
        assert!(phi.validate().is_empty());
        let bad = DgaMorphism::from_images(r.clone(), k, &[("1".into(), comb(&[(1, "1")])), ("x1".into(), comb(&[(1, "1")]))]).unwrap();
        assert_eq!(bad.validate()[0].axiom, Axiom::Multiplicative);
        assert!(DgaMorphism::identity(r).validate().is_empty());
    }
}
