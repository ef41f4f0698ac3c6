use std::collections::BTreeMap;
use std::sync::Arc;

use super::hom::{hom_left, HomComplex};
use super::{axpy, koszul, signed, Bilinear, DgAlgebra, DgModule};
use crate::complex::{Complex, GradedSpace};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Scalar};

/// Basis layout of a ground-field tensor `X ⊗ Y`: degree `n` is the
/// concatenation over `p` of blocks `X_p ⊗ Y_{n-p}`, pair `(i, j)` at
/// `offset + i·dim Y_{n-p} + j`.
#[derive(Clone, Debug)]
struct Pairs {
    x: GradedSpace,
    y: GradedSpace,
    layout: BTreeMap<i64, Vec<(i64, usize)>>,
}

impl Pairs {
    fn new(x: &GradedSpace, y: &GradedSpace) -> Pairs {
        let mut layout: BTreeMap<i64, Vec<(i64, usize)>> = BTreeMap::new();
        let mut dims: BTreeMap<i64, usize> = BTreeMap::new();
        for p in x.support() {
            for q in y.support() {
                let d = dims.entry(p + q).or_insert(0);
                layout.entry(p + q).or_default().push((p, *d));
                *d += x.dim(p) * y.dim(q);
            }
        }
        Pairs {
            x: x.clone(),
            y: y.clone(),
            layout,
        }
    }

    fn dim(&self, n: i64) -> usize {
        self.layout
            .get(&n)
            .map_or(0, |b| b.iter().map(|(p, _)| self.x.dim(*p) * self.y.dim(n - p)).sum())
    }

    fn index(&self, p: i64, i: usize, q: i64, j: usize) -> usize {
        let &(_, o) = self.layout[&(p + q)].iter().find(|(pp, _)| *pp == p).expect("degree pair present");
        o + i * self.y.dim(q) + j
    }

    fn split(&self, n: i64, t: usize) -> (i64, usize, i64, usize) {
        let &(p, o) = self.layout[&n].iter().rev().find(|(_, o)| *o <= t).expect("index in range");
        let q = n - p;
        let dq = self.y.dim(q);
        (p, (t - o) / dq, q, (t - o) % dq)
    }

    fn space(&self) -> GradedSpace {
        let mut s = GradedSpace::new();
        for &n in self.layout.keys() {
            for t in 0..self.dim(n) {
                let (p, i, q, j) = self.split(n, t);
                s.push(n, format!("{}⊗{}", self.x.labels(p)[i], self.y.labels(q)[j]));
            }
        }
        s
    }

    /// `x ⊗ y` for homogeneous vectors.
    fn vec(&self, field: crate::linalg::FieldSpec, p: i64, x: &[Scalar], q: i64, y: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![field.zero(); self.dim(p + q)];
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if !b.is_zero() {
                    out[self.index(p, i, q, j)] = a * b;
                }
            }
        }
        out
    }
}

/// `E = R ⊗ S^op` with `(r⊗s)(r'⊗s') = (-1)^{|s||r'|} rr' ⊗ (s ·op s')`.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub algebra: Arc<DgAlgebra>,
    pub r: Arc<DgAlgebra>,
    pub s: Arc<DgAlgebra>,
    pairs: Pairs,
}

pub fn enveloping(r: Arc<DgAlgebra>, s: Arc<DgAlgebra>) -> Result<Envelope> {
    let field = r.field();
    if s.field() != field {
        return Err(Error::AlgebraMismatch("algebras over different fields".into()));
    }
    let sop = s.opposite();
    let pairs = Pairs::new(r.space(), s.space());
    let space = pairs.space();
    let mut d = BTreeMap::new();
    for n in space.support() {
        if space.dim(n - 1) == 0 {
            continue;
        }
        let cols: Vec<Vec<Scalar>> = (0..space.dim(n))
            .map(|t| {
                let (p, i, q, j) = pairs.split(n, t);
                let (x, y) = (r.basis_vector(p, i), s.basis_vector(q, j));
                let mut v = pairs.vec(field, p - 1, &r.d(p, &x), q, &y);
                let w = signed(field, koszul(p, 1), pairs.vec(field, p, &x, q - 1, &s.d(q, &y)));
                axpy(&mut v, &field.one(), &w);
                v
            })
            .collect();
        d.insert(n, Matrix::from_columns(field, space.dim(n - 1), &cols));
    }
    let complex = Complex::new(field, space.clone(), d)?;
    let mul = Bilinear::from_fn(field, &space, &space, &space, |n1, t1, n2, t2| {
        let (p, i, q, j) = pairs.split(n1, t1);
        let (p2, i2, q2, j2) = pairs.split(n2, t2);
        let rr = r.mul_basis(p, i, p2, i2);
        let ss = sop.mul_basis(q, j, q2, j2);
        signed(field, koszul(q, p2), pairs.vec(field, p + p2, &rr, q + q2, &ss))
    });
    let unit = pairs.vec(field, 0, r.unit(), 0, s.unit());
    let name = format!("{}⊗{}^op", r.name(), s.name());
    let algebra = Arc::new(DgAlgebra::new(name, complex, unit, mul)?);
    Ok(Envelope { algebra, r, s, pairs })
}

impl Envelope {
    /// `r ⊗ s` as an element of `E`.
    pub fn pure(&self, p: i64, r: &[Scalar], q: i64, s: &[Scalar]) -> Vec<Scalar> {
        self.pairs.vec(self.r.field(), p, r, q, s)
    }

    /// A bimodule as a left `E`-module: `(r⊗s)·m = (-1)^{|s||m|} r m s`.
    pub fn to_module(&self, m: &DgModule) -> Result<DgModule> {
        if **m.left_algebra() != *self.r || **m.right_algebra() != *self.s {
            return Err(Error::AlgebraMismatch(format!("{} is not a bimodule over the enveloped algebras", m.name())));
        }
        let e = &self.algebra;
        let act = Bilinear::from_fn(m.field(), e.space(), m.space(), m.space(), |n, t, k, j| {
            let (p, i, q, jj) = self.pairs.split(n, t);
            let mv = m.basis_vector(k, j);
            let ms = m.act_right(k, &mv, q, &self.s.basis_vector(q, jj));
            let rms = m.act_left(p, &self.r.basis_vector(p, i), k + q, &ms);
            signed(m.field(), koszul(q, k), rms)
        });
        DgModule::left(m.name().to_string(), e.clone(), m.complex().clone(), act)
    }

    /// Inverse of [`Envelope::to_module`]: `r·m = (r⊗1)m`, `m·s = (-1)^{|s||m|} (1⊗s)m`.
    pub fn from_module(&self, m: &DgModule) -> Result<DgModule> {
        if **m.left_algebra() != *self.algebra {
            return Err(Error::AlgebraMismatch(format!("{} is not a module over the enveloping algebra", m.name())));
        }
        let field = m.field();
        let la = Bilinear::from_fn(field, self.r.space(), m.space(), m.space(), |p, i, k, j| {
            let e = self.pure(p, &self.r.basis_vector(p, i), 0, self.s.unit());
            m.act_left(p, &e, k, &m.basis_vector(k, j))
        });
        let ra = Bilinear::from_fn(field, m.space(), self.s.space(), m.space(), |k, j, q, i| {
            let e = self.pure(0, self.r.unit(), q, &self.s.basis_vector(q, i));
            signed(field, koszul(q, k), m.act_left(q, &e, k, &m.basis_vector(k, j)))
        });
        DgModule::bimodule(m.name().to_string(), self.r.clone(), self.s.clone(), m.complex().clone(), la, ra)
    }
}

pub fn to_enveloping(env: &Envelope, m: &DgModule) -> Result<DgModule> {
    env.to_module(m)
}

pub fn from_enveloping(env: &Envelope, m: &DgModule) -> Result<DgModule> {
    env.from_module(m)
}

/// The endomorphism DGA `F = Hom_R(M, M)` of a left module, and `M` as an
/// `R`-`F^op` bimodule via `m·f = (-1)^{|m||f|} f(m)`.
#[derive(Clone, Debug)]
pub struct Endomorphisms {
    pub algebra: Arc<DgAlgebra>,
    pub opposite: Arc<DgAlgebra>,
    pub bimodule: DgModule,
    pub hom: HomComplex,
}

pub fn endomorphism_dga(m: &DgModule) -> Result<Endomorphisms> {
    let field = m.field();
    let left = Arc::new(m.forget_right());
    let hom = hom_left(left.clone(), left.clone())?;
    let space = hom.module.space().clone();
    let mut err = None;
    let mul = Bilinear::from_fn(field, &space, &space, &space, |a, i, b, j| {
        let f = super::unit_vector(field, space.dim(a), i);
        let g = super::unit_vector(field, space.dim(b), j);
        hom.from_blocks(a + b, |p| hom.block(a, &f, p + b).mul(&hom.block(b, &g, p)))
            .unwrap_or_else(|e| {
                err.get_or_insert(e);
                vec![field.zero(); space.dim(a + b)]
            })
    });
    if let Some(e) = err {
        return Err(e);
    }
    let id = hom.from_blocks(0, |p| Matrix::identity(field, left.dim(p)))?;
    let unit = if id.is_empty() { vec![field.zero(); space.dim(0)] } else { id };
    let f = Arc::new(DgAlgebra::new(
        format!("End({})", m.name()),
        hom.module.complex().clone(),
        unit,
        mul,
    )?);
    let fop = Arc::new(f.opposite());
    let ra = Bilinear::from_fn(field, left.space(), &space, left.space(), |k, j, a, i| {
        let fv = super::unit_vector(field, space.dim(a), i);
        signed(field, koszul(k, a), hom.eval(a, &fv, k, &left.basis_vector(k, j)))
    });
    let bimodule = DgModule::bimodule(
        m.name().to_string(),
        left.left_algebra().clone(),
        fop.clone(),
        left.complex().clone(),
        left.left_action().clone(),
        ra,
    )?;
    Ok(Endomorphisms {
        algebra: f,
        opposite: fop,
        bimodule,
        hom,
    })
}
