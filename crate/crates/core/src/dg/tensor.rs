use std::collections::BTreeMap;
use std::sync::Arc;

use super::{axpy, koszul, signed, Bilinear, DgModule};
use crate::complex::{Complex, GradedSpace};
use crate::error::{Error, Result};
use crate::linalg::{FieldSpec, Matrix, Quotient, Scalar};

/// `M ⊗_A N` for `M` a `B`-`A` and `N` an `A`-`C` bimodule, together with
/// the data needed to move between the ground tensor `T = M ⊗_k N` and the
/// quotient.
#[derive(Clone, Debug)]
pub struct TensorComplex {
    pub module: DgModule,
    pub left: Arc<DgModule>,
    pub right: Arc<DgModule>,
    /// Per total degree, the `(p, offset)` of each block `M_p ⊗ N_{n-p}` in `T_n`.
    layout: BTreeMap<i64, Vec<(i64, usize)>>,
    tdim: BTreeMap<i64, usize>,
    quot: BTreeMap<i64, Quotient>,
}

impl TensorComplex {
    fn field(&self) -> FieldSpec {
        self.module.field()
    }

    pub fn ground_dim(&self, n: i64) -> usize {
        self.tdim.get(&n).copied().unwrap_or(0)
    }

    fn offset(&self, n: i64, p: i64) -> Option<usize> {
        self.layout.get(&n)?.iter().find(|(pp, _)| *pp == p).map(|(_, o)| *o)
    }

    /// `m ⊗ x` in the ground tensor, `m ∈ M_p`, `x ∈ N_q`.
    pub fn ground_vec(&self, p: i64, m: &[Scalar], q: i64, x: &[Scalar]) -> Vec<Scalar> {
        let n = p + q;
        let mut out = vec![self.field().zero(); self.ground_dim(n)];
        let Some(o) = self.offset(n, p) else {
            return out;
        };
        let dq = x.len();
        for (i, a) in m.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in x.iter().enumerate() {
                if !b.is_zero() {
                    out[o + i * dq + j] = a * b;
                }
            }
        }
        out
    }

    pub fn project(&self, n: i64, t: &[Scalar]) -> Vec<Scalar> {
        match self.quot.get(&n) {
            Some(q) => q.proj.mul_vec(t),
            None => Vec::new(),
        }
    }

    /// The class of `m ⊗ x` in the quotient.
    pub fn elem(&self, p: i64, m: &[Scalar], q: i64, x: &[Scalar]) -> Vec<Scalar> {
        self.project(p + q, &self.ground_vec(p, m, q, x))
    }

    /// The pair `(p, i, q, j)` with `m_i ⊗ x_j` representing quotient basis
    /// element `k` in degree `n`.
    pub fn basis_pair(&self, n: i64, k: usize) -> (i64, usize, i64, usize) {
        let t = self.quot[&n].kept[k];
        self.split(n, t)
    }

    fn split(&self, n: i64, t: usize) -> (i64, usize, i64, usize) {
        let blocks = &self.layout[&n];
        let (p, o) = *blocks.iter().rev().find(|(_, o)| *o <= t).expect("index in range");
        let q = n - p;
        let dq = self.right.dim(q);
        let r = t - o;
        (p, r / dq, q, r % dq)
    }

    /// Pairs `(p, i, q, j, c)` with `Σ c · m_i ⊗ x_j` a lift of `v ∈ (M⊗_A N)_n`.
    pub fn lift_terms(&self, n: i64, v: &[Scalar]) -> Vec<(i64, usize, i64, usize, Scalar)> {
        v.iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let (p, i, q, j) = self.basis_pair(n, k);
                (p, i, q, j, c.clone())
            })
            .collect()
    }
}

/// The quotient of `M ⊗_k N` by `ma ⊗ n - m ⊗ an`, carrying the outer
/// actions `b(m⊗n) = (bm)⊗n` and `(m⊗n)c = m⊗(nc)`.
pub fn tensor_over(m: Arc<DgModule>, n: Arc<DgModule>) -> Result<TensorComplex> {
    if m.right_algebra() != n.left_algebra() {
        return Err(Error::AlgebraMismatch(format!(
            "cannot tensor: {} is not a right module over the algebra acting on {}",
            m.name(),
            n.name()
        )));
    }
    let field = m.field();
    let a = m.right_algebra().clone();
    let mdeg = m.space().support();
    let ndeg = n.space().support();
    let mut layout: BTreeMap<i64, Vec<(i64, usize)>> = BTreeMap::new();
    let mut tdim: BTreeMap<i64, usize> = BTreeMap::new();
    for &p in &mdeg {
        for &q in &ndeg {
            let d = tdim.entry(p + q).or_insert(0);
            layout.entry(p + q).or_default().push((p, *d));
            *d += m.dim(p) * n.dim(q);
        }
    }
    let mut tc = TensorComplex {
        module: DgModule::over_ground("", Complex::zero(field)),
        left: m.clone(),
        right: n.clone(),
        layout,
        tdim,
        quot: BTreeMap::new(),
    };
    // relations
    let mut rels: BTreeMap<i64, Vec<Vec<Scalar>>> = BTreeMap::new();
    let minus = field.from_i64(-1);
    for &p in &mdeg {
        for s in a.space().support() {
            for &q in &ndeg {
                let total = p + s + q;
                if tc.ground_dim(total) == 0 {
                    continue;
                }
                for i in 0..m.dim(p) {
                    let mv = m.basis_vector(p, i);
                    for k in 0..a.dim(s) {
                        let av = a.basis_vector(s, k);
                        let ma = m.act_right(p, &mv, s, &av);
                        for j in 0..n.dim(q) {
                            let nv = n.basis_vector(q, j);
                            let mut r = tc.ground_vec(p + s, &ma, q, &nv);
                            let an = n.act_left(s, &av, q, &nv);
                            axpy(&mut r, &minus, &tc.ground_vec(p, &mv, s + q, &an));
                            if r.iter().any(|x| !x.is_zero()) {
                                rels.entry(total).or_default().push(r);
                            }
                        }
                    }
                }
            }
        }
    }
    let degrees: Vec<i64> = tc.tdim.keys().copied().collect();
    for &deg in &degrees {
        let dim = tc.ground_dim(deg);
        let span = Matrix::from_columns(field, dim, rels.get(&deg).map(Vec::as_slice).unwrap_or(&[]));
        tc.quot.insert(deg, Quotient::new(field, dim, &span));
    }
    // quotient space and labels
    let mut space = GradedSpace::new();
    for &deg in &degrees {
        for k in 0..tc.quot[&deg].dim() {
            let (p, i, q, j) = tc.basis_pair(deg, k);
            space.push(deg, format!("{}⊗{}", m.label(p, i), n.label(q, j)));
        }
    }
    // differential on T, pushed down along the section
    let ground_d = |tc: &TensorComplex, deg: i64, t: usize| -> Vec<Scalar> {
        let (p, i, q, j) = tc.split(deg, t);
        let mv = m.basis_vector(p, i);
        let nv = n.basis_vector(q, j);
        let mut out = tc.ground_vec(p - 1, &m.d(p, &mv), q, &nv);
        let second = signed(field, koszul(p, 1), tc.ground_vec(p, &mv, q - 1, &n.d(q, &nv)));
        axpy(&mut out, &field.one(), &second);
        out
    };
    let mut d = BTreeMap::new();
    for &deg in &degrees {
        let qd = tc.quot[&deg].dim();
        if qd == 0 || space.dim(deg - 1) == 0 {
            continue;
        }
        let cols: Vec<Vec<Scalar>> = (0..qd)
            .map(|k| {
                let t = tc.quot[&deg].kept[k];
                tc.project(deg - 1, &ground_d(&tc, deg, t))
            })
            .collect();
        d.insert(deg, Matrix::from_columns(field, space.dim(deg - 1), &cols));
    }
    let complex = Complex::new(field, space.clone(), d)?;
    let b = m.left_algebra().clone();
    let c = n.right_algebra().clone();
    let la = Bilinear::from_fn(field, b.space(), &space, &space, |s, i, deg, k| {
        let (p, ii, q, j) = tc.basis_pair(deg, k);
        let bm = m.act_left(s, &b.basis_vector(s, i), p, &m.basis_vector(p, ii));
        tc.elem(p + s, &bm, q, &n.basis_vector(q, j))
    });
    let ra = Bilinear::from_fn(field, &space, c.space(), &space, |deg, k, s, i| {
        let (p, ii, q, j) = tc.basis_pair(deg, k);
        let nc = n.act_right(q, &n.basis_vector(q, j), s, &c.basis_vector(s, i));
        tc.elem(p, &m.basis_vector(p, ii), q + s, &nc)
    });
    tc.module = DgModule::bimodule(format!("{}⊗{}", m.name(), n.name()), b, c, complex, la, ra)?;
    Ok(tc)
}

#[cfg(test)]
mod tests {
    use super::super::algebra::tests::{comb, truncated_poly, Q};
    use super::super::{DgAlgebra, DgaMorphism};
    use super::*;
    use crate::complex::{quasi_iso, ChainMap, Window};

    #[test]
    fn unit_law() {
        let r = Arc::new(truncated_poly(3, 0));
        let a = Arc::new(DgModule::regular(r.clone()));
        let t = tensor_over(a.clone(), a.clone()).unwrap();
        assert!(t.module.is_valid());
        assert_eq!(t.module.dim(0), 3);
        // a ⊗ n ↦ a n
        let mut maps = BTreeMap::new();
        let cols: Vec<Vec<Scalar>> = (0..3)
            .map(|k| {
                let (p, i, q, j) = t.basis_pair(0, k);
                r.mul_basis(p, i, q, j)
            })
            .collect();
        maps.insert(0, Matrix::from_columns(Q, 3, &cols));
        let f = ChainMap::new(Arc::new(t.module.complex().clone()), Arc::new(a.complex().clone()), maps).unwrap();
        assert!(quasi_iso(&f, Window::new(-1, 1).unwrap()).unwrap().all);
        assert!(f.f_at(0).rank() == 3);
    }

    #[test]
    fn exterior_tensor_is_valid() {
        let ext = Arc::new(truncated_poly(2, 1));
        let m = DgModule::regular(ext.clone());
        let m2 = Arc::new(DgModule::direct_sum(&[&m, &m.shift(2)]).unwrap());
        let t = tensor_over(m2.clone(), m2).unwrap();
        assert!(t.module.is_valid());
        assert_eq!(t.module.space().total_dim(), 8);
    }

    #[test]
    fn product_ring_first_factor() {
        // R = k×k, S = k via the first projection: S ⊗_R S is one dimensional.
        let rules = super::super::algebra::AlgebraRules {
            name: "kxk".into(),
            basis: vec![("1".into(), 0), ("e1".into(), 0)],
            unit: Some("1".into()),
            mul: vec![
                ("1".into(), "1".into(), comb(&[(1, "1")])),
                ("1".into(), "e1".into(), comb(&[(1, "e1")])),
                ("e1".into(), "1".into(), comb(&[(1, "e1")])),
                ("e1".into(), "e1".into(), comb(&[(1, "e1")])),
            ],
            d: vec![],
        };
        let r = Arc::new(DgAlgebra::from_rules(Q, &rules).unwrap());
        let k = Arc::new(DgAlgebra::ground(Q));
        let phi = DgaMorphism::from_images(
            r.clone(),
            k.clone(),
            &[("1".into(), comb(&[(1, "1")])), ("e1".into(), comb(&[(1, "1")]))],
        )
        .unwrap();
        let s = DgModule::regular(k);
        let sr = Arc::new(s.restrict_right(&phi).unwrap());
        let rs = Arc::new(s.restrict_left(&phi).unwrap());
        let t = tensor_over(sr, rs).unwrap();
        assert_eq!(t.module.dim(0), 1);
        assert_eq!(t.ground_dim(0), 1);
    }

    #[test]
    fn tensor_with_zero() {
        let r = Arc::new(truncated_poly(2, 0));
        let a = Arc::new(DgModule::regular(r.clone()));
        let zero = Arc::new(
            DgModule::bimodule("0", r.clone(), r, Complex::zero(Q), Bilinear::default(), Bilinear::default()).unwrap(),
        );
        let t = tensor_over(a, zero).unwrap();
        assert!(t.module.space().is_zero());
    }
}
