use std::collections::BTreeMap;
use std::sync::Arc;

use super::algebra::{LabelIndex, LinComb};
use super::{axpy, koszul, signed, unit_vector, Axiom, Bilinear, DgAlgebra, DgaMorphism, Violation};
use crate::complex::{ChainMap, Complex, GradedSpace};
use crate::error::{Error, Result};
use crate::linalg::{FieldSpec, Matrix, Quotient, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// Sparse presentation of a bimodule. Actions of a ground-field side are
/// filled in automatically.
#[derive(Clone, Debug, Default)]
pub struct ModuleRules {
    pub name: String,
    pub basis: Vec<(String, i64)>,
    pub left_act: Vec<(String, String, LinComb)>,
    pub right_act: Vec<(String, String, LinComb)>,
    pub d: Vec<(String, LinComb)>,
}

/// An `R`-`S` DG bimodule. Left modules have `S = k`, right modules `R = k`.
#[derive(Clone, Debug)]
pub struct DgModule {
    name: String,
    left: Arc<DgAlgebra>,
    right: Arc<DgAlgebra>,
    complex: Complex,
    left_act: Bilinear,
    right_act: Bilinear,
}

impl PartialEq for DgModule {
    fn eq(&self, other: &Self) -> bool {
        self.left == other.left
            && self.right == other.right
            && self.complex == other.complex
            && self.left_act == other.left_act
            && self.right_act == other.right_act
    }
}

fn scalar_action(field: FieldSpec, a: &DgAlgebra, space: &GradedSpace, on_left: bool) -> Bilinear {
    let unit = a.unit().to_vec();
    if on_left {
        Bilinear::from_fn(field, a.space(), space, space, |p, i, n, j| {
            let mut v = vec![field.zero(); space.dim(p + n)];
            if p == 0 {
                v[j] = unit[i].clone();
            }
            v
        })
    } else {
        Bilinear::from_fn(field, space, a.space(), space, |n, j, p, i| {
            let mut v = vec![field.zero(); space.dim(n + p)];
            if p == 0 {
                v[j] = unit[i].clone();
            }
            v
        })
    }
}

impl DgModule {
    pub fn bimodule(
        name: impl Into<String>,
        left: Arc<DgAlgebra>,
        right: Arc<DgAlgebra>,
        complex: Complex,
        left_act: Bilinear,
        right_act: Bilinear,
    ) -> Result<DgModule> {
        if left.field() != complex.field() || right.field() != complex.field() {
            return Err(Error::AlgebraMismatch("module and algebras over different fields".into()));
        }
        Ok(DgModule {
            name: name.into(),
            left,
            right,
            complex,
            left_act,
            right_act,
        })
    }

    /// Left module; the right side is the ground field.
    pub fn left(name: impl Into<String>, a: Arc<DgAlgebra>, complex: Complex, act: Bilinear) -> Result<DgModule> {
        let k = Arc::new(DgAlgebra::ground(a.field()));
        let ra = scalar_action(a.field(), &k, complex.space(), false);
        DgModule::bimodule(name, a, k, complex, act, ra)
    }

    /// Right module; the left side is the ground field.
    pub fn right(name: impl Into<String>, a: Arc<DgAlgebra>, complex: Complex, act: Bilinear) -> Result<DgModule> {
        let k = Arc::new(DgAlgebra::ground(a.field()));
        let la = scalar_action(a.field(), &k, complex.space(), true);
        DgModule::bimodule(name, k, a, complex, la, act)
    }

    /// A complex over the ground field as a `k`-`k` bimodule.
    pub fn over_ground(name: impl Into<String>, complex: Complex) -> DgModule {
        let k = Arc::new(DgAlgebra::ground(complex.field()));
        let la = scalar_action(complex.field(), &k, complex.space(), true);
        let ra = scalar_action(complex.field(), &k, complex.space(), false);
        DgModule {
            name: name.into(),
            left: k.clone(),
            right: k,
            complex,
            left_act: la,
            right_act: ra,
        }
    }

    pub fn from_rules(field: FieldSpec, left: Arc<DgAlgebra>, right: Arc<DgAlgebra>, rules: &ModuleRules) -> Result<DgModule> {
        let index = LabelIndex::new(&rules.basis)?;
        let space = index.space().clone();
        let mut d: BTreeMap<i64, Matrix> = BTreeMap::new();
        for (m, comb) in &rules.d {
            let (n, j) = index.lookup(m)?;
            let v = index.vector(field, comb, n - 1, &[format!("d {m}")])?;
            let blk = d
                .entry(n)
                .or_insert_with(|| Matrix::zeros(field, space.dim(n - 1), space.dim(n)));
            for (r, x) in v.into_iter().enumerate() {
                blk.set(r, j, x);
            }
        }
        let complex = Complex::new(field, space.clone(), d)?;
        let act = |alg: &DgAlgebra, rules: &[(String, String, LinComb)], on_left: bool| -> Result<Bilinear> {
            if alg.is_ground() && rules.is_empty() {
                return Ok(scalar_action(field, alg, &space, on_left));
            }
            let aindex = LabelIndex::new(&labelled_basis(alg.space()))?;
            let mut table = BTreeMap::new();
            for (x, y, comb) in rules {
                let (ap, mp) = if on_left { (x, y) } else { (y, x) };
                let (p, i) = aindex.lookup(ap)?;
                let (n, j) = index.lookup(mp)?;
                let v = index.vector(field, comb, p + n, &[x.clone(), y.clone()])?;
                table.insert(((p, i), (n, j)), v);
            }
            let get = |p: i64, i: usize, n: i64, j: usize| {
                table
                    .get(&((p, i), (n, j)))
                    .cloned()
                    .unwrap_or_else(|| vec![field.zero(); space.dim(p + n)])
            };
            Ok(if on_left {
                Bilinear::from_fn(field, alg.space(), &space, &space, get)
            } else {
                Bilinear::from_fn(field, &space, alg.space(), &space, |n, j, p, i| get(p, i, n, j))
            })
        };
        let la = act(&left, &rules.left_act, true)?;
        let ra = act(&right, &rules.right_act, false)?;
        DgModule::bimodule(rules.name.clone(), left, right, complex, la, ra)
    }

    /// `A` as an `A`-`A` bimodule.
    pub fn regular(a: Arc<DgAlgebra>) -> DgModule {
        let mul = a.multiplication().clone();
        DgModule {
            name: a.name().to_string(),
            left: a.clone(),
            right: a.clone(),
            complex: a.complex().clone(),
            left_act: mul.clone(),
            right_act: mul,
        }
    }

    pub fn regular_left(a: Arc<DgAlgebra>) -> DgModule {
        DgModule::left(a.name().to_string(), a.clone(), a.complex().clone(), a.multiplication().clone()).expect("same field")
    }

    pub fn regular_right(a: Arc<DgAlgebra>) -> DgModule {
        DgModule::right(a.name().to_string(), a.clone(), a.complex().clone(), a.multiplication().clone()).expect("same field")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> DgModule {
        self.name = name.into();
        self
    }

    pub fn field(&self) -> FieldSpec {
        self.complex.field()
    }

    pub fn left_algebra(&self) -> &Arc<DgAlgebra> {
        &self.left
    }

    pub fn right_algebra(&self) -> &Arc<DgAlgebra> {
        &self.right
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

    pub fn left_action(&self) -> &Bilinear {
        &self.left_act
    }

    pub fn right_action(&self) -> &Bilinear {
        &self.right_act
    }

    pub fn basis_vector(&self, n: i64, i: usize) -> Vec<Scalar> {
        unit_vector(self.field(), self.dim(n), i)
    }

    pub fn label(&self, n: i64, i: usize) -> &str {
        &self.space().labels(n)[i]
    }

    pub fn d(&self, n: i64, m: &[Scalar]) -> Vec<Scalar> {
        match self.complex.d_ref(n) {
            Some(x) => x.mul_vec(m),
            None => vec![self.field().zero(); self.dim(n - 1)],
        }
    }

    /// `a · m` for `a ∈ R_p`, `m ∈ M_n`.
    pub fn act_left(&self, p: i64, a: &[Scalar], n: i64, m: &[Scalar]) -> Vec<Scalar> {
        self.left_act.apply(self.field(), p, a, n, m, self.dim(p + n))
    }

    /// `m · s` for `m ∈ M_n`, `s ∈ S_q`.
    pub fn act_right(&self, n: i64, m: &[Scalar], q: i64, s: &[Scalar]) -> Vec<Scalar> {
        self.right_act.apply(self.field(), n, m, q, s, self.dim(n + q))
    }

    /// Matrix of `m ↦ a·m` from `M_n` to `M_{n+p}`.
    pub fn left_mult_matrix(&self, p: i64, a: &[Scalar], n: i64) -> Matrix {
        let cols: Vec<Vec<Scalar>> = (0..self.dim(n))
            .map(|j| self.act_left(p, a, n, &self.basis_vector(n, j)))
            .collect();
        Matrix::from_columns(self.field(), self.dim(p + n), &cols)
    }

    /// Matrix of `m ↦ m·s` from `M_n` to `M_{n+q}`.
    pub fn right_mult_matrix(&self, q: i64, s: &[Scalar], n: i64) -> Matrix {
        let cols: Vec<Vec<Scalar>> = (0..self.dim(n))
            .map(|j| self.act_right(n, &self.basis_vector(n, j), q, s))
            .collect();
        Matrix::from_columns(self.field(), self.dim(n + q), &cols)
    }

    pub fn is_left_module(&self) -> bool {
        self.right.is_ground()
    }

    pub fn is_right_module(&self) -> bool {
        self.left.is_ground()
    }

    /// Checks d², unit, associativity and Leibniz on each side, then
    /// compatibility of the two actions.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let field = self.field();
        let ml = |n: i64, j: usize| self.label(n, j).to_string();
        if let Err(Error::NotAComplex { degree, column }) = self.complex.validate() {
            out.push(Violation {
                axiom: Axiom::DSquared,
                witness: vec![ml(degree, column)],
            });
        }
        let mdeg = self.space().support();
        let (l, r) = (&self.left, &self.right);
        // unit
        'unit: for &n in &mdeg {
            for j in 0..self.dim(n) {
                let e = self.basis_vector(n, j);
                if self.act_left(0, l.unit(), n, &e) != e || self.act_right(n, &e, 0, r.unit()) != e {
                    out.push(Violation {
                        axiom: Axiom::Unit,
                        witness: vec![ml(n, j)],
                    });
                    break 'unit;
                }
            }
        }
        // associativity, left then right
        let ldeg = l.space().support();
        let rdeg = r.space().support();
        'la: for &p in &ldeg {
            for &q in &ldeg {
                for &n in &mdeg {
                    if self.dim(p + q + n) == 0 {
                        continue;
                    }
                    for i in 0..l.dim(p) {
                        for k in 0..l.dim(q) {
                            let ab = l.mul_basis(p, i, q, k);
                            let b = l.basis_vector(q, k);
                            for j in 0..self.dim(n) {
                                let m = self.basis_vector(n, j);
                                let lhs = self.act_left(p + q, &ab, n, &m);
                                let rhs = self.act_left(p, &l.basis_vector(p, i), q + n, &self.act_left(q, &b, n, &m));
                                if lhs != rhs {
                                    out.push(Violation {
                                        axiom: Axiom::Associativity,
                                        witness: vec![l.label(p, i).into(), l.label(q, k).into(), ml(n, j)],
                                    });
                                    break 'la;
                                }
                            }
                        }
                    }
                }
            }
        }
        'ra: for &n in &mdeg {
            for &p in &rdeg {
                for &q in &rdeg {
                    if self.dim(p + q + n) == 0 {
                        continue;
                    }
                    for j in 0..self.dim(n) {
                        let m = self.basis_vector(n, j);
                        for i in 0..r.dim(p) {
                            let a = r.basis_vector(p, i);
                            let ma = self.act_right(n, &m, p, &a);
                            for k in 0..r.dim(q) {
                                let lhs = self.act_right(n + p, &ma, q, &r.basis_vector(q, k));
                                let rhs = self.act_right(n, &m, p + q, &r.mul_basis(p, i, q, k));
                                if lhs != rhs {
                                    out.push(Violation {
                                        axiom: Axiom::Associativity,
                                        witness: vec![ml(n, j), r.label(p, i).into(), r.label(q, k).into()],
                                    });
                                    break 'ra;
                                }
                            }
                        }
                    }
                }
            }
        }
        // Leibniz, left then right
        'll: for &p in &ldeg {
            for &n in &mdeg {
                for i in 0..l.dim(p) {
                    let a = l.basis_vector(p, i);
                    for j in 0..self.dim(n) {
                        let m = self.basis_vector(n, j);
                        let lhs = self.d(p + n, &self.act_left(p, &a, n, &m));
                        let mut rhs = self.act_left(p - 1, &l.d(p, &a), n, &m);
                        let t = signed(field, koszul(p, 1), self.act_left(p, &a, n - 1, &self.d(n, &m)));
                        axpy(&mut rhs, &field.one(), &t);
                        if lhs != rhs {
                            out.push(Violation {
                                axiom: Axiom::Leibniz,
                                witness: vec![l.label(p, i).into(), ml(n, j)],
                            });
                            break 'll;
                        }
                    }
                }
            }
        }
        'rl: for &n in &mdeg {
            for &q in &rdeg {
                for j in 0..self.dim(n) {
                    let m = self.basis_vector(n, j);
                    for i in 0..r.dim(q) {
                        let s = r.basis_vector(q, i);
                        let lhs = self.d(n + q, &self.act_right(n, &m, q, &s));
                        let mut rhs = self.act_right(n - 1, &self.d(n, &m), q, &s);
                        let t = signed(field, koszul(n, 1), self.act_right(n, &m, q - 1, &r.d(q, &s)));
                        axpy(&mut rhs, &field.one(), &t);
                        if lhs != rhs {
                            out.push(Violation {
                                axiom: Axiom::Leibniz,
                                witness: vec![ml(n, j), r.label(q, i).into()],
                            });
                            break 'rl;
                        }
                    }
                }
            }
        }
        'co: for &p in &ldeg {
            for &n in &mdeg {
                for &q in &rdeg {
                    if self.dim(p + n + q) == 0 {
                        continue;
                    }
                    for i in 0..l.dim(p) {
                        let a = l.basis_vector(p, i);
                        for j in 0..self.dim(n) {
                            let m = self.basis_vector(n, j);
                            let am = self.act_left(p, &a, n, &m);
                            for k in 0..r.dim(q) {
                                let s = r.basis_vector(q, k);
                                let lhs = self.act_right(p + n, &am, q, &s);
                                let rhs = self.act_left(p, &a, n + q, &self.act_right(n, &m, q, &s));
                                if lhs != rhs {
                                    out.push(Violation {
                                        axiom: Axiom::Compatibility,
                                        witness: vec![l.label(p, i).into(), ml(n, j), r.label(q, k).into()],
                                    });
                                    break 'co;
                                }
                            }
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

    /// Restricts the left action along `phi: R' -> R`.
    pub fn restrict_left(&self, phi: &DgaMorphism) -> Result<DgModule> {
        if *phi.target != *self.left {
            return Err(Error::AlgebraMismatch("restriction along a morphism into the wrong algebra".into()));
        }
        let src = phi.source.clone();
        let act = Bilinear::from_fn(self.field(), src.space(), self.space(), self.space(), |p, i, n, j| {
            self.act_left(p, &phi.apply(p, &src.basis_vector(p, i)), n, &self.basis_vector(n, j))
        });
        DgModule::bimodule(self.name.clone(), src, self.right.clone(), self.complex.clone(), act, self.right_act.clone())
    }

    /// Restricts the right action along `phi: S' -> S`.
    pub fn restrict_right(&self, phi: &DgaMorphism) -> Result<DgModule> {
        if *phi.target != *self.right {
            return Err(Error::AlgebraMismatch("restriction along a morphism into the wrong algebra".into()));
        }
        let src = phi.source.clone();
        let act = Bilinear::from_fn(self.field(), self.space(), src.space(), self.space(), |n, j, p, i| {
            self.act_right(n, &self.basis_vector(n, j), p, &phi.apply(p, &src.basis_vector(p, i)))
        });
        DgModule::bimodule(self.name.clone(), self.left.clone(), src, self.complex.clone(), self.left_act.clone(), act)
    }

    /// Forgets the right action.
    pub fn forget_right(&self) -> DgModule {
        DgModule::left(self.name.clone(), self.left.clone(), self.complex.clone(), self.left_act.clone()).expect("same field")
    }

    /// Forgets the left action.
    pub fn forget_left(&self) -> DgModule {
        DgModule::right(self.name.clone(), self.right.clone(), self.complex.clone(), self.right_act.clone()).expect("same field")
    }

    /// `Σ^t M` with `a(σm) = (-1)^{t|a|} σ(am)` and `(σm)s = σ(ms)`.
    pub fn shift(&self, t: i64) -> DgModule {
        let field = self.field();
        let complex = self.complex.shift(t);
        let space = complex.space().clone();
        let la = Bilinear::from_fn(field, self.left.space(), &space, &space, |p, i, n, j| {
            signed(
                field,
                koszul(t, p),
                self.act_left(p, &self.left.basis_vector(p, i), n - t, &self.basis_vector(n - t, j)),
            )
        });
        let ra = Bilinear::from_fn(field, &space, self.right.space(), &space, |n, j, q, i| {
            self.act_right(n - t, &self.basis_vector(n - t, j), q, &self.right.basis_vector(q, i))
        });
        DgModule {
            name: if t == 0 { self.name.clone() } else { format!("Σ^{t}{}", self.name) },
            left: self.left.clone(),
            right: self.right.clone(),
            complex,
            left_act: la,
            right_act: ra,
        }
    }

    /// Direct sum; in each degree the summands' bases are concatenated.
    pub fn direct_sum(parts: &[&DgModule]) -> Result<DgModule> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Invalid("empty direct sum".into()))?;
        for p in parts {
            if p.left != first.left || p.right != first.right {
                return Err(Error::AlgebraMismatch("summands over different algebras".into()));
            }
        }
        let field = first.field();
        let complexes: Vec<&Complex> = parts.iter().map(|p| &p.complex).collect();
        let complex = Complex::direct_sum(field, &complexes);
        let space = complex.space().clone();
        let offset = |n: i64, k: usize| -> usize { parts[..k].iter().map(|p| p.dim(n)).sum() };
        let locate = |n: i64, j: usize| -> (usize, usize) {
            let mut j = j;
            for (k, p) in parts.iter().enumerate() {
                if j < p.dim(n) {
                    return (k, j);
                }
                j -= p.dim(n);
            }
            unreachable!()
        };
        let embed = |n: i64, k: usize, v: Vec<Scalar>| -> Vec<Scalar> {
            let mut out = vec![field.zero(); space.dim(n)];
            let o = offset(n, k);
            for (i, x) in v.into_iter().enumerate() {
                out[o + i] = x;
            }
            out
        };
        let l = &first.left;
        let r = &first.right;
        let la = Bilinear::from_fn(field, l.space(), &space, &space, |p, i, n, j| {
            let (k, jj) = locate(n, j);
            let m = parts[k];
            embed(p + n, k, m.act_left(p, &l.basis_vector(p, i), n, &m.basis_vector(n, jj)))
        });
        let ra = Bilinear::from_fn(field, &space, r.space(), &space, |n, j, q, i| {
            let (k, jj) = locate(n, j);
            let m = parts[k];
            embed(n + q, k, m.act_right(n, &m.basis_vector(n, jj), q, &r.basis_vector(q, i)))
        });
        let name = parts.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(" ⊕ ");
        DgModule::bimodule(name, l.clone(), r.clone(), complex, la, ra)
    }
}

impl DgModule {
    /// Same actions with a replacement differential.
    pub fn with_differential(&self, d: BTreeMap<i64, Matrix>) -> Result<DgModule> {
        let complex = Complex::new(self.field(), self.space().clone(), d)?;
        Ok(DgModule {
            complex,
            ..self.clone()
        })
    }

    /// Mapping cone of `f: X -> Y`, with `Cone_n = Y_n ⊕ X_{n-1}`.
    pub fn cone(f: &ModuleMap) -> Result<DgModule> {
        let (x, y) = (&f.source, &f.target);
        let sum = DgModule::direct_sum(&[y, &x.shift(1)])?;
        let mut d = BTreeMap::new();
        for n in sum.space().support() {
            if sum.dim(n - 1) == 0 {
                continue;
            }
            let mut m = sum.complex().d_at(n);
            let fb = f.block(n - 1);
            if fb.rows() > 0 && fb.cols() > 0 {
                m.paste(0, y.dim(n), &fb);
            }
            d.insert(n, m);
        }
        Ok(sum.with_differential(d)?.with_name(format!("cone({} -> {})", x.name(), y.name())))
    }

    /// `M / W` for a subspace `W` closed under `d` and both actions, given
    /// per degree by spanning columns.
    pub fn quotient(&self, sub: &BTreeMap<i64, Matrix>) -> Result<DgModule> {
        let field = self.field();
        let mut quots: BTreeMap<i64, Quotient> = BTreeMap::new();
        let mut space = GradedSpace::new();
        for n in self.space().support() {
            let span = sub
                .get(&n)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(field, self.dim(n), 0));
            let q = Quotient::new(field, self.dim(n), &span);
            for &k in &q.kept {
                space.push(n, self.label(n, k).to_string());
            }
            quots.insert(n, q);
        }
        let proj = |n: i64, v: Vec<Scalar>| -> Vec<Scalar> {
            quots.get(&n).map_or_else(Vec::new, |q| q.proj.mul_vec(&v))
        };
        let lift = |n: i64, j: usize| -> Vec<Scalar> { quots[&n].section.col(j) };
        // W must be stable: its image under d and the actions projects to 0
        for (n, w) in sub {
            for c in w.columns() {
                if !proj(n - 1, self.d(*n, &c)).iter().all(Scalar::is_zero) {
                    return Err(Error::Invalid(format!("submodule is not closed under d in degree {n}")));
                }
            }
        }
        let mut d = BTreeMap::new();
        for n in space.support() {
            if space.dim(n - 1) == 0 {
                continue;
            }
            let cols: Vec<Vec<Scalar>> = (0..space.dim(n)).map(|j| proj(n - 1, self.d(n, &lift(n, j)))).collect();
            d.insert(n, Matrix::from_columns(field, space.dim(n - 1), &cols));
        }
        let complex = Complex::new(field, space.clone(), d)?;
        let (l, r) = (&self.left, &self.right);
        let la = Bilinear::from_fn(field, l.space(), &space, &space, |p, i, n, j| {
            proj(p + n, self.act_left(p, &l.basis_vector(p, i), n, &lift(n, j)))
        });
        let ra = Bilinear::from_fn(field, &space, r.space(), &space, |n, j, q, i| {
            proj(n + q, self.act_right(n, &lift(n, j), q, &r.basis_vector(q, i)))
        });
        DgModule::bimodule(format!("{}/W", self.name), l.clone(), r.clone(), complex, la, ra)
    }

    /// The smallest subspace containing `gens` that is closed under `d` and
    /// the action on `side`, as spanning columns per degree.
    pub fn generated_submodule(&self, side: Side, gens: &[(i64, Vec<Scalar>)]) -> BTreeMap<i64, Matrix> {
        let field = self.field();
        let alg = match side {
            Side::Left => self.left.clone(),
            Side::Right => self.right.clone(),
        };
        let mut span: BTreeMap<i64, Vec<Vec<Scalar>>> = BTreeMap::new();
        let mut queue: Vec<(i64, Vec<Scalar>)> = gens.to_vec();
        while let Some((n, v)) = queue.pop() {
            if v.iter().all(Scalar::is_zero) {
                continue;
            }
            let cols = span.entry(n).or_default();
            let before = Matrix::from_columns(field, self.dim(n), cols).rank();
            cols.push(v.clone());
            if Matrix::from_columns(field, self.dim(n), cols).rank() == before {
                cols.pop();
                continue;
            }
            queue.push((n - 1, self.d(n, &v)));
            for p in alg.space().support() {
                for i in 0..alg.dim(p) {
                    let a = alg.basis_vector(p, i);
                    let w = match side {
                        Side::Left => self.act_left(p, &a, n, &v),
                        Side::Right => self.act_right(n, &v, p, &a),
                    };
                    queue.push((n + p, w));
                }
            }
        }
        span.into_iter()
            .map(|(n, cols)| (n, Matrix::from_columns(field, self.dim(n), &cols)))
            .collect()
    }

    /// Compares structure constants, ignoring names and labels.
    pub fn same_structure(&self, other: &DgModule) -> bool {
        let degs = self.space().support();
        degs == other.space().support()
            && degs.iter().all(|&n| self.dim(n) == other.dim(n))
            && degs.iter().all(|&n| self.complex.d_at(n) == other.complex.d_at(n))
            && self.left == other.left
            && self.right == other.right
            && self.left_act == other.left_act
            && self.right_act == other.right_act
    }
}

pub(crate) fn labelled_basis(space: &GradedSpace) -> Vec<(String, i64)> {
    space
        .all_labels()
        .iter()
        .flat_map(|(n, v)| v.iter().map(move |l| (l.clone(), *n)))
        .collect()
}

/// Degree-0 map of bimodules, one matrix per degree.
#[derive(Clone, Debug)]
pub struct ModuleMap {
    pub source: Arc<DgModule>,
    pub target: Arc<DgModule>,
    maps: BTreeMap<i64, Matrix>,
}

impl ModuleMap {
    pub fn new(source: Arc<DgModule>, target: Arc<DgModule>, maps: BTreeMap<i64, Matrix>) -> Result<ModuleMap> {
        for (n, m) in &maps {
            if m.rows() != target.dim(*n) || m.cols() != source.dim(*n) {
                return Err(Error::Shape(format!("module map block {n} has the wrong shape")));
            }
        }
        let maps = maps.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        Ok(ModuleMap { source, target, maps })
    }

    pub fn identity(m: Arc<DgModule>) -> ModuleMap {
        let maps = m
            .space()
            .support()
            .into_iter()
            .map(|n| (n, Matrix::identity(m.field(), m.dim(n))))
            .collect();
        ModuleMap {
            source: m.clone(),
            target: m,
            maps,
        }
    }

    pub fn block(&self, n: i64) -> Matrix {
        self.maps
            .get(&n)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.source.field(), self.target.dim(n), self.source.dim(n)))
    }

    pub fn blocks(&self) -> &BTreeMap<i64, Matrix> {
        &self.maps
    }

    pub fn apply(&self, n: i64, v: &[Scalar]) -> Vec<Scalar> {
        match self.maps.get(&n) {
            Some(m) => m.mul_vec(v),
            None => vec![self.source.field().zero(); self.target.dim(n)],
        }
    }

    pub fn chain_map(&self) -> Result<ChainMap> {
        ChainMap::new(
            Arc::new(self.source.complex().clone()),
            Arc::new(self.target.complex().clone()),
            self.maps.clone(),
        )
    }

    pub fn compose(&self, first: &ModuleMap) -> Result<ModuleMap> {
        let maps = first
            .source
            .space()
            .support()
            .into_iter()
            .map(|n| (n, self.block(n).mul(&first.block(n))))
            .collect();
        ModuleMap::new(first.source.clone(), self.target.clone(), maps)
    }

    /// Checks the chain-map identity and linearity for both actions.
    pub fn validate(&self) -> Result<()> {
        let (s, t) = (&self.source, &self.target);
        if s.left_algebra() != t.left_algebra() || s.right_algebra() != t.right_algebra() {
            return Err(Error::AlgebraMismatch("map between modules over different algebras".into()));
        }
        let cm = self.chain_map()?;
        cm.validate()?;
        let l = s.left_algebra();
        let r = s.right_algebra();
        for n in s.space().support() {
            for j in 0..s.dim(n) {
                let m = s.basis_vector(n, j);
                let fm = self.apply(n, &m);
                for p in l.space().support() {
                    for i in 0..l.dim(p) {
                        let a = l.basis_vector(p, i);
                        if self.apply(p + n, &s.act_left(p, &a, n, &m)) != t.act_left(p, &a, n, &fm) {
                            return Err(Error::NotAChainMap {
                                degree: n,
                                detail: format!("not left linear at ({}, {})", l.label(p, i), s.label(n, j)),
                            });
                        }
                    }
                }
                for q in r.space().support() {
                    for i in 0..r.dim(q) {
                        let b = r.basis_vector(q, i);
                        if self.apply(n + q, &s.act_right(n, &m, q, &b)) != t.act_right(n, &fm, q, &b) {
                            return Err(Error::NotAChainMap {
                                degree: n,
                                detail: format!("not right linear at ({}, {})", s.label(n, j), r.label(q, i)),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Homogeneous elements of `M` freely generating it over one side.
#[derive(Clone, Debug)]
pub struct FreeBasis {
    pub side: Side,
    pub generators: Vec<(i64, Vec<Scalar>)>,
}

/// Columns spanned by `a·g` (or `g·a`) in degree `n` for one generator.
fn generated(m: &DgModule, side: Side, g: &(i64, Vec<Scalar>), n: i64) -> Vec<Vec<Scalar>> {
    let (gd, gv) = g;
    let alg = match side {
        Side::Left => m.left_algebra(),
        Side::Right => m.right_algebra(),
    };
    let p = n - gd;
    (0..alg.dim(p))
        .map(|i| {
            let a = alg.basis_vector(p, i);
            match side {
                Side::Left => m.act_left(p, &a, *gd, gv),
                Side::Right => m.act_right(*gd, gv, p, &a),
            }
        })
        .collect()
}

/// Searches for a free basis of the underlying one-sided module. Candidates
/// in each degree are basis vectors, then sums of two basis vectors. Returns
/// `None` if no basis is found this way.
pub fn free_basis(m: &DgModule, side: Side) -> Option<FreeBasis> {
    let field = m.field();
    let degs = m.space().support();
    let alg = match side {
        Side::Left => m.left_algebra(),
        Side::Right => m.right_algebra(),
    };
    if alg.space().bottom().is_some_and(|b| b < 0) {
        return None;
    }
    // Degrees hit by a generator in degree g.
    let top_alg = alg.space().top().unwrap_or(0);
    let mut gens: Vec<(i64, Vec<Scalar>)> = Vec::new();
    let mut span: BTreeMap<i64, Vec<Vec<Scalar>>> = BTreeMap::new();
    let rank_of = |cols: &[Vec<Scalar>], dim: usize| Matrix::from_columns(field, dim, cols).rank();
    for &n in &degs {
        let dim = m.dim(n);
        let mut candidates: Vec<Vec<Scalar>> = (0..dim).map(|i| m.basis_vector(n, i)).collect();
        for i in 0..dim {
            for j in i + 1..dim {
                let mut v = m.basis_vector(n, i);
                v[j] = field.one();
                candidates.push(v);
            }
        }
        for c in candidates {
            if span.get(&n).map_or(0, |s| s.len()) == dim {
                break;
            }
            let g = (n, c);
            let mut ok = true;
            let mut extended = Vec::new();
            for k in n..=n + top_alg {
                let new = generated(m, side, &g, k);
                if new.is_empty() {
                    continue;
                }
                let mut cols = span.get(&k).cloned().unwrap_or_default();
                let before = cols.len();
                cols.extend(new.iter().cloned());
                if rank_of(&cols, m.dim(k)) != before + new.len() {
                    ok = false;
                    break;
                }
                extended.push((k, cols));
            }
            if ok {
                for (k, cols) in extended {
                    span.insert(k, cols);
                }
                gens.push(g);
            }
        }
    }
    for &n in &degs {
        if span.get(&n).map_or(0, |s| s.len()) != m.dim(n) {
            return None;
        }
    }
    Some(FreeBasis { side, generators: gens })
}

#[cfg(test)]
mod tests {
    use super::super::algebra::tests::{comb, truncated_poly, Q};
    use super::*;

    fn k_over_dual(x_acts: bool) -> DgModule {
        let r = Arc::new(truncated_poly(2, 0));
        let mut rules = ModuleRules {
            name: "k".into(),
            basis: vec![("m".into(), 0)],
            left_act: vec![("1".into(), "m".into(), comb(&[(1, "m")]))],
            ..Default::default()
        };
        if x_acts {
            rules.left_act.push(("x1".into(), "m".into(), comb(&[(1, "m")])));
        }
        let k = Arc::new(DgAlgebra::ground(Q));
        DgModule::from_rules(Q, r, k, &rules).unwrap()
    }

    #[test]
    fn regular_and_simple_modules() {
        let r = Arc::new(truncated_poly(3, 0));
        assert!(DgModule::regular(r.clone()).is_valid());
        assert!(DgModule::regular_left(r.clone()).is_valid());
        assert!(DgModule::regular_right(r).is_valid());
        assert!(k_over_dual(false).is_valid());
        let v = k_over_dual(true).validate();
        assert_eq!(v[0].axiom, Axiom::Associativity);
    }

    #[test]
    fn shifts_and_sums_stay_valid() {
        let ext = Arc::new(truncated_poly(2, 1));
        let m = DgModule::regular(ext.clone());
        for t in [-1, 1, 2, 3] {
            assert!(m.shift(t).is_valid(), "shift {t}");
        }
        let s = DgModule::direct_sum(&[&m, &m.shift(1)]).unwrap();
        assert!(s.is_valid());
        assert_eq!(s.dim(1), 2);
    }

    #[test]
    fn restriction_along_identity_and_projection() {
        let r = Arc::new(truncated_poly(2, 0));
        let m = DgModule::regular(r.clone());
        let id = DgaMorphism::identity(r.clone());
        assert_eq!(m.restrict_left(&id).unwrap(), m);
        let k = Arc::new(DgAlgebra::ground(Q));
        let phi = DgaMorphism::from_images(r, k.clone(), &[("1".into(), comb(&[(1, "1")]))]).unwrap();
        let ks = DgModule::regular(k);
        let restricted = ks.restrict_left(&phi).unwrap();
        assert!(restricted.is_valid());
        assert!(restricted.restrict_right(&phi).unwrap().is_valid());
    }

    #[test]
    fn free_bases() {
        let r = Arc::new(truncated_poly(2, 0));
        let m = DgModule::regular(r.clone());
        let fb = free_basis(&m, Side::Left).unwrap();
        assert_eq!(fb.generators.len(), 1);
        assert!(free_basis(&k_over_dual(false), Side::Left).is_none());
        let sum = DgModule::direct_sum(&[&m, &m.shift(2)]).unwrap();
        assert_eq!(free_basis(&sum, Side::Right).unwrap().generators.len(), 2);
    }

    #[test]
    fn cones_and_quotients() {
        let r = Arc::new(truncated_poly(2, 0));
        let a = Arc::new(DgModule::regular_left(r.clone()));
        // x· : A -> A, cone has H = k ⊕ Σk
        let x = a.left_mult_matrix(0, &[Q.zero(), Q.one()], 0);
        let f = ModuleMap::new(a.clone(), a.clone(), BTreeMap::from([(0, x)])).unwrap();
        let c = DgModule::cone(&f).unwrap();
        assert!(c.is_valid());
        let w = crate::complex::Window::new(0, 1).unwrap();
        assert_eq!(c.complex().homology_dims(w), BTreeMap::from([(0, 1), (1, 1)]));
        let sub = a.generated_submodule(Side::Left, &[(0, vec![Q.zero(), Q.one()])]);
        assert_eq!(sub[&0].rank(), 1);
        let k = a.quotient(&sub).unwrap();
        assert!(k.is_valid());
        assert_eq!(k.dim(0), 1);
        assert!(k.same_structure(&k.clone().with_name("other")));
    }

    #[test]
    fn module_maps() {
        let r = Arc::new(truncated_poly(2, 0));
        let m = Arc::new(DgModule::regular_left(r));
        assert!(ModuleMap::identity(m.clone()).validate().is_ok());
        // multiplication by x is left linear for a commutative ring
        let x = m.left_mult_matrix(0, &[Q.zero(), Q.one()], 0);
        let f = ModuleMap::new(m.clone(), m.clone(), BTreeMap::from([(0, x)])).unwrap();
        assert!(f.validate().is_ok());
        let bad = Matrix::from_i64(Q, &[&[1, 0], &[0, 0]]);
        let g = ModuleMap::new(m.clone(), m, BTreeMap::from([(0, bad)])).unwrap();
        assert!(g.validate().is_err());
    }
}
