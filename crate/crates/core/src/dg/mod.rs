//! Differential graded algebras and bimodules given by structure constants.
//!
//! A one-sided module is a bimodule whose other side is the ground algebra
//! `k`. Sign conventions follow the Koszul rule:
//!
//! * opposite algebra: `a ·op b = (-1)^{|a||b|} b a`;
//! * right Leibniz: `d(ms) = d(m)s + (-1)^{|m|} m d(s)`;
//! * left-linear maps: `f(am) = (-1)^{|f||a|} a f(m)`, `D f = d f - (-1)^{|f|} f d`;
//! * right-linear maps: `f(ma) = f(m)a`, same `D`.

pub(crate) mod algebra;
mod envelope;
mod hom;
mod module;
mod tensor;

pub use algebra::{AlgebraRules, DgAlgebra, DgaMorphism, LinComb};
pub use envelope::{endomorphism_dga, enveloping, from_enveloping, to_enveloping, Endomorphisms, Envelope};
pub use hom::{hom_left, hom_right, HomComplex, HomKind};
pub use module::{free_basis, DgModule, FreeBasis, ModuleMap, ModuleRules, Side};
pub use tensor::{tensor_over, TensorComplex};

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::complex::GradedSpace;
use crate::linalg::{FieldSpec, Matrix, Scalar};

/// Which defining identity a presentation breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Axiom {
    DSquared,
    Leibniz,
    Associativity,
    Unit,
    Compatibility,
    Grading,
    Multiplicative,
    Differential,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::DSquared => "d-squared",
            Axiom::Leibniz => "leibniz",
            Axiom::Associativity => "associativity",
            Axiom::Unit => "unit",
            Axiom::Compatibility => "compatibility",
            Axiom::Grading => "grading",
            Axiom::Multiplicative => "multiplicative",
            Axiom::Differential => "differential",
        };
        f.write_str(s)
    }
}

/// A failed identity together with the basis tuple exhibiting it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at ({})", self.axiom, self.witness.join(", "))
    }
}

/// Bilinear map `X × Y -> Z` between graded spaces, one block per degree
/// pair. Block `(p, q)` has `dim Z_{p+q}` rows and `dim X_p · dim Y_q`
/// columns; the pair `(x_i, y_j)` sits in column `i · dim Y_q + j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bilinear {
    blocks: BTreeMap<(i64, i64), Matrix>,
}

impl Bilinear {
    pub fn from_fn(
        field: FieldSpec,
        left: &GradedSpace,
        right: &GradedSpace,
        out: &GradedSpace,
        mut f: impl FnMut(i64, usize, i64, usize) -> Vec<Scalar>,
    ) -> Bilinear {
        let mut blocks = BTreeMap::new();
        for p in left.support() {
            for q in right.support() {
                let od = out.dim(p + q);
                if od == 0 {
                    continue;
                }
                let (dp, dq) = (left.dim(p), right.dim(q));
                let mut m = Matrix::zeros(field, od, dp * dq);
                for i in 0..dp {
                    for j in 0..dq {
                        let v = f(p, i, q, j);
                        debug_assert_eq!(v.len(), od);
                        for (r, x) in v.into_iter().enumerate() {
                            if !x.is_zero() {
                                m.set(r, i * dq + j, x);
                            }
                        }
                    }
                }
                if !m.is_zero() {
                    blocks.insert((p, q), m);
                }
            }
        }
        Bilinear { blocks }
    }

    pub fn block(&self, p: i64, q: i64) -> Option<&Matrix> {
        self.blocks.get(&(p, q))
    }

    pub fn blocks(&self) -> &BTreeMap<(i64, i64), Matrix> {
        &self.blocks
    }

    pub fn apply_basis(&self, field: FieldSpec, p: i64, i: usize, q: i64, j: usize, dim_q: usize, out_dim: usize) -> Vec<Scalar> {
        match self.blocks.get(&(p, q)) {
            Some(m) => m.col(i * dim_q + j),
            None => vec![field.zero(); out_dim],
        }
    }

    pub fn apply(&self, field: FieldSpec, p: i64, x: &[Scalar], q: i64, y: &[Scalar], out_dim: usize) -> Vec<Scalar> {
        let mut out = vec![field.zero(); out_dim];
        let Some(m) = self.blocks.get(&(p, q)) else {
            return out;
        };
        let dq = y.len();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = xi * yj;
                let col = i * dq + j;
                for (r, o) in out.iter_mut().enumerate() {
                    let e = m.get(r, col);
                    if !e.is_zero() {
                        *o = &*o + &(e * &c);
                    }
                }
            }
        }
        out
    }
}

pub fn unit_vector(field: FieldSpec, dim: usize, i: usize) -> Vec<Scalar> {
    let mut v = vec![field.zero(); dim];
    v[i] = field.one();
    v
}

pub fn axpy(acc: &mut [Scalar], c: &Scalar, x: &[Scalar]) {
    if c.is_zero() {
        return;
    }
    for (a, b) in acc.iter_mut().zip(x) {
        if !b.is_zero() {
            *a = &*a + &(c * b);
        }
    }
}

pub(crate) fn is_zero_vec(v: &[Scalar]) -> bool {
    v.iter().all(Scalar::is_zero)
}

/// `(-1)^{ab}` as a boolean "is negative".
pub(crate) fn koszul(a: i64, b: i64) -> bool {
    (a * b).rem_euclid(2) == 1
}

pub(crate) fn signed(field: FieldSpec, negative: bool, v: Vec<Scalar>) -> Vec<Scalar> {
    if negative {
        let m1 = field.from_i64(-1);
        v.into_iter().map(|x| &x * &m1).collect()
    } else {
        v
    }
}
