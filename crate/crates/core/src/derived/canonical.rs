//! Chain-level representatives of the canonical maps attached to an
//! `R`-`S` bimodule `M`.
//!
//! `Q_S` is `M` when `M` is free over `S^op` and the enveloping resolution
//! `Q` otherwise; `Q_R` is `M` when `M` is free on both sides and `Q`
//! otherwise. `π: Q_R -> Q_S` is the identity or the augmentation, and
//! `Z = Hom_{S^op}(Q_S, S)`.

use std::sync::Arc;

use super::{module_map_on_basis, resolve_one_sided, resolve_two_sided, tensor_map, Approx, Resolved, Trusted};
use crate::complex::ChainMap;
use crate::dg::{free_basis, hom_left, hom_right, tensor_over, unit_vector, DgAlgebra, DgModule, DgaMorphism, HomComplex, ModuleMap, Side};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Scalar};

/// A canonical map with the approximation data of both ends.
#[derive(Clone, Debug)]
pub struct CanonicalMap {
    pub name: String,
    pub map: ChainMap,
    pub source: Approx,
    pub target: Approx,
}

impl CanonicalMap {
    pub fn trusted(&self) -> Trusted {
        self.source.trusted().meet(&self.target.trusted())
    }
}

#[derive(Clone, Debug)]
pub struct Models {
    pub m: Arc<DgModule>,
    pub r: Arc<DgAlgebra>,
    pub s: Arc<DgAlgebra>,
    pub s_reg: Arc<DgModule>,
    pub q_r: Arc<DgModule>,
    pub a_r: Approx,
    pub q_s: Arc<DgModule>,
    pub a_s: Approx,
    pub pi: ModuleMap,
    /// `Q_R -> M`.
    pub eps_r: ModuleMap,
    pub z: HomComplex,
    pub a_z: Approx,
    pub depth: i64,
    pub cap: usize,
    pub provenance: Vec<String>,
}

fn scale(v: Vec<Scalar>, negative: bool) -> Vec<Scalar> {
    if negative {
        v.into_iter().map(|x| -x).collect()
    } else {
        v
    }
}

fn odd(x: i64) -> bool {
    x.rem_euclid(2) == 1
}

impl Models {
    pub fn new(m: Arc<DgModule>, depth: i64, cap: usize) -> Result<Models> {
        let r = m.left_algebra().clone();
        let s = m.right_algebra().clone();
        let s_reg = Arc::new(DgModule::regular(s.clone()));
        let s_free = free_basis(&m, Side::Right).is_some();
        let r_free = free_basis(&m, Side::Left).is_some();
        let mut provenance = Vec::new();
        let exact = Approx::exact(&m);
        let (q_r, a_r, q_s, a_s, pi, eps_r) = if s_free && r_free {
            provenance.push(format!("{} is free on both sides and is its own model", m.name()));
            let id = ModuleMap::identity(m.clone());
            (m.clone(), exact, m.clone(), exact, id.clone(), id)
        } else {
            let q = resolve_two_sided(&m, depth, cap)?;
            provenance.push(format!("{} resolved over the enveloping algebra", m.name()));
            if s_free {
                provenance.push(format!("{} is free over the right algebra", m.name()));
                (q.module.clone(), q.approx, m.clone(), exact, q.epsilon.clone(), q.epsilon)
            } else {
                let id = ModuleMap::identity(q.module.clone());
                (q.module.clone(), q.approx, q.module.clone(), q.approx, id, q.epsilon)
            }
        };
        let z = hom_right(q_s.clone(), s_reg.clone())?;
        let a_z = Approx::hom(&a_s, &Approx::exact(&s_reg)).with_support(&z.module);
        Ok(Models {
            m,
            r,
            s,
            s_reg,
            q_r,
            a_r,
            q_s,
            a_s,
            pi,
            eps_r,
            z,
            a_z,
            depth,
            cap,
            provenance,
        })
    }

    pub fn is_exact(&self) -> bool {
        self.a_r.is_exact() && self.a_s.is_exact()
    }

    pub fn resolve_left(&self, n: &DgModule) -> Result<Resolved> {
        self.check_left(n)?;
        resolve_one_sided(n, Side::Left, self.depth, self.cap)
    }

    pub fn resolve_right(&self, n: &DgModule) -> Result<Resolved> {
        if **n.right_algebra() != *self.s {
            return Err(Error::AlgebraMismatch(format!("{} is not a right module over {}", n.name(), self.s.name())));
        }
        resolve_one_sided(n, Side::Right, self.depth, self.cap)
    }

    fn check_left(&self, n: &DgModule) -> Result<()> {
        if **n.left_algebra() != *self.s {
            return Err(Error::AlgebraMismatch(format!("{} is not a left module over {}", n.name(), self.s.name())));
        }
        Ok(())
    }

    /// `z(π q)` for basis vectors `z ∈ Z_p`, `q ∈ (Q_R)_a`.
    fn pair(&self, p: i64, zi: usize, a: i64, qv: &[Scalar]) -> Vec<Scalar> {
        let zf = unit_vector(self.m.field(), self.z.module.dim(p), zi);
        self.z.eval(p, &zf, a, &self.pi.apply(a, qv))
    }

    /// `Z ⊗_R Q_R -> S`, `z ⊗ q ↦ z(πq)`.
    pub fn counit_at_s(&self) -> Result<CanonicalMap> {
        let t = tensor_over(Arc::new(self.z.module.clone()), self.q_r.clone())?;
        let map = tensor_map(&t, &self.s_reg, |p, i, q, j| Ok(self.pair(p, i, q, &self.q_r.basis_vector(q, j))))?;
        Ok(CanonicalMap {
            name: "Z ⊗ M -> S".into(),
            map,
            source: Approx::tensor(&self.a_z, &self.a_r).with_support(&t.module),
            target: Approx::exact(&self.s_reg),
        })
    }

    /// `Z ⊗_R (Q_R ⊗_S P) -> N`, `z ⊗ q ⊗ p ↦ z(πq)·ε(p)`.
    pub fn counit(&self, n: &DgModule) -> Result<CanonicalMap> {
        let p = self.resolve_left(n)?;
        let x = tensor_over(self.q_r.clone(), p.module.clone())?;
        let xa = Approx::tensor(&self.a_r, &p.approx).with_support(&x.module);
        let t = tensor_over(Arc::new(self.z.module.clone()), Arc::new(x.module.clone()))?;
        let field = n.field();
        let map = tensor_map(&t, n, |zp, zi, q, j| {
            let mut out = vec![field.zero(); n.dim(zp + q)];
            for (a, ii, b, jj, c) in x.lift_terms(q, &unit_vector(field, x.module.dim(q), j)) {
                let s = self.pair(zp, zi, a, &self.q_r.basis_vector(a, ii));
                let e = p.epsilon.apply(b, &p.module.basis_vector(b, jj));
                let v = n.act_left(zp + a, &s, b, &e);
                crate::dg::axpy(&mut out, &c, &v);
            }
            Ok(out)
        })?;
        Ok(CanonicalMap {
            name: format!("Z ⊗ (M ⊗ {0}) -> {0}", n.name()),
            map,
            source: Approx::tensor(&self.a_z, &xa).with_support(&t.module),
            target: Approx::exact(n),
        })
    }

    /// `(P° ⊗_S Z) ⊗_R (Q_R ⊗_S P') -> P° ⊗_S P'`, `p°⊗z ⊗ q⊗p ↦ p° ⊗ z(πq)p`.
    pub fn two_sided(&self, n_op: &DgModule, n: &DgModule) -> Result<CanonicalMap> {
        let po = self.resolve_right(n_op)?;
        let pl = self.resolve_left(n)?;
        let l = tensor_over(po.module.clone(), Arc::new(self.z.module.clone()))?;
        let la = Approx::tensor(&po.approx, &self.a_z).with_support(&l.module);
        let x = tensor_over(self.q_r.clone(), pl.module.clone())?;
        let xa = Approx::tensor(&self.a_r, &pl.approx).with_support(&x.module);
        let t = tensor_over(Arc::new(l.module.clone()), Arc::new(x.module.clone()))?;
        let y = tensor_over(po.module.clone(), pl.module.clone())?;
        let ya = Approx::tensor(&po.approx, &pl.approx).with_support(&y.module);
        let map = tensor_map(&t, &y.module, |p, i, q, j| {
            let (a, u, b, zi) = l.basis_pair(p, i);
            let (c, v, e, w) = x.basis_pair(q, j);
            let s = self.pair(b, zi, c, &self.q_r.basis_vector(c, v));
            let sp = pl.module.act_left(b + c, &s, e, &pl.module.basis_vector(e, w));
            Ok(y.elem(a, &po.module.basis_vector(a, u), b + c + e, &sp))
        })?;
        Ok(CanonicalMap {
            name: format!("({} ⊗ Z) ⊗ (M ⊗ {}) -> ...", n_op.name(), n.name()),
            map,
            source: Approx::tensor(&la, &xa).with_support(&t.module),
            target: ya,
        })
    }

    /// `N -> Hom_R(Q_R, Q_S ⊗_S N)`, `n ↦ (q ↦ (-1)^{|n||q|} πq ⊗ n)`.
    pub fn unit(&self, n: &DgModule) -> Result<CanonicalMap> {
        self.check_left(n)?;
        let na = Arc::new(n.clone());
        let x = tensor_over(self.q_s.clone(), na.clone())?;
        let xa = Approx::tensor(&self.a_s, &Approx::exact(n)).with_support(&x.module);
        let h = hom_left(self.q_r.clone(), Arc::new(x.module.clone()))?;
        let field = n.field();
        let map = module_map_on_basis(n, &h.module, |d, k| {
            let nv = n.basis_vector(d, k);
            h.from_blocks(d, |p| {
                let cols: Vec<Vec<Scalar>> = (0..self.q_r.dim(p))
                    .map(|j| {
                        let pq = self.pi.apply(p, &self.q_r.basis_vector(p, j));
                        scale(x.elem(p, &pq, d, &nv), odd(d * p))
                    })
                    .collect();
                Matrix::from_columns(field, x.module.dim(p + d), &cols)
            })
        })?;
        Ok(CanonicalMap {
            name: format!("{0} -> Hom(M, M ⊗ {0})", n.name()),
            map,
            source: Approx::exact(n),
            target: Approx::hom(&self.a_r, &xa).with_support(&h.module),
        })
    }

    /// `Hom_S(P, N') -> Hom_R(Q_R ⊗_S P, Q_S ⊗_S N')`,
    /// `f ↦ (q ⊗ p ↦ (-1)^{|f||q|} πq ⊗ f(p))`.
    pub fn hom_map(&self, n: &DgModule, n2: &DgModule) -> Result<CanonicalMap> {
        self.check_left(n2)?;
        let p = self.resolve_left(n)?;
        let n2a = Arc::new(n2.clone());
        let h1 = hom_left(p.module.clone(), n2a.clone())?;
        let h1a = Approx::hom(&p.approx, &Approx::exact(n2)).with_support(&h1.module);
        let x = tensor_over(self.q_r.clone(), p.module.clone())?;
        let xa = Approx::tensor(&self.a_r, &p.approx).with_support(&x.module);
        let y = tensor_over(self.q_s.clone(), n2a)?;
        let ya = Approx::tensor(&self.a_s, &Approx::exact(n2)).with_support(&y.module);
        let h2 = hom_left(Arc::new(x.module.clone()), Arc::new(y.module.clone()))?;
        let field = n.field();
        let map = module_map_on_basis(&h1.module, &h2.module, |d, k| {
            let f = unit_vector(field, h1.module.dim(d), k);
            h2.from_blocks(d, |deg| {
                let cols: Vec<Vec<Scalar>> = (0..x.module.dim(deg))
                    .map(|l| {
                        let (a, v, b, w) = x.basis_pair(deg, l);
                        let fp = h1.eval(d, &f, b, &p.module.basis_vector(b, w));
                        let pq = self.pi.apply(a, &self.q_r.basis_vector(a, v));
                        scale(y.elem(a, &pq, b + d, &fp), odd(d * a))
                    })
                    .collect();
                Matrix::from_columns(field, y.module.dim(deg + d), &cols)
            })
        })?;
        Ok(CanonicalMap {
            name: format!("RHom({}, {}) -> RHom(M ⊗ -, M ⊗ -)", n.name(), n2.name()),
            map,
            source: h1a,
            target: Approx::hom(&xa, &ya).with_support(&h2.module),
        })
    }

    /// `Q_R ⊗_S P -> Hom_S(Z, P)`, `q ⊗ p ↦ (z ↦ (-1)^{|z|(|q|+|p|)} z(πq)p)`.
    pub fn duality(&self, n: &DgModule) -> Result<CanonicalMap> {
        let p = self.resolve_left(n)?;
        let x = tensor_over(self.q_r.clone(), p.module.clone())?;
        let xa = Approx::tensor(&self.a_r, &p.approx).with_support(&x.module);
        let h = hom_left(Arc::new(self.z.module.clone()), p.module.clone())?;
        let field = n.field();
        let map = tensor_map(&x, &h.module, |a, v, b, w| {
            let qv = self.q_r.basis_vector(a, v);
            let pv = p.module.basis_vector(b, w);
            h.from_blocks(a + b, |c| {
                let cols: Vec<Vec<Scalar>> = (0..self.z.module.dim(c))
                    .map(|zi| {
                        let s = self.pair(c, zi, a, &qv);
                        scale(p.module.act_left(c + a, &s, b, &pv), odd(c * (a + b)))
                    })
                    .collect();
                Matrix::from_columns(field, p.module.dim(c + a + b), &cols)
            })
        })?;
        Ok(CanonicalMap {
            name: format!("M ⊗ {0} -> Hom(Z, {0})", n.name()),
            map,
            source: xa,
            target: Approx::hom(&self.a_z, &p.approx).with_support(&h.module),
        })
    }

    /// `S -> Hom_R(Q_R, M)`, `s ↦ (q ↦ (-1)^{|s||q|} ε(q)s)`.
    pub fn endpoint(&self) -> Result<CanonicalMap> {
        endpoint_with(&self.q_r, &self.eps_r, &self.a_r, &self.m, &self.s_reg)
    }
}

fn endpoint_with(q_r: &Arc<DgModule>, eps_r: &ModuleMap, a_r: &Approx, m: &Arc<DgModule>, s: &Arc<DgModule>) -> Result<CanonicalMap> {
    let h = hom_left(q_r.clone(), m.clone())?;
    let field = m.field();
    let map = module_map_on_basis(s, &h.module, |d, k| {
        let sv = s.basis_vector(d, k);
        h.from_blocks(d, |p| {
            let cols: Vec<Vec<Scalar>> = (0..q_r.dim(p))
                .map(|j| {
                    let e = eps_r.apply(p, &q_r.basis_vector(p, j));
                    scale(m.act_right(p, &e, d, &sv), odd(d * p))
                })
                .collect();
            Matrix::from_columns(field, m.dim(p + d), &cols)
        })
    })?;
    Ok(CanonicalMap {
        name: "S -> RHom(M, M)".into(),
        map,
        source: Approx::exact(s),
        target: Approx::hom(a_r, &Approx::exact(m)).with_support(&h.module),
    })
}

/// The endpoint map `S -> RHom_R(M, M)` using only a left model of `M`:
/// `M` itself when it is free over `R`, the enveloping resolution otherwise.
pub fn endpoint_map(m: Arc<DgModule>, depth: i64, cap: usize) -> Result<CanonicalMap> {
    let s_reg = Arc::new(DgModule::regular(m.right_algebra().clone()));
    if free_basis(&m, Side::Left).is_some() {
        let id = ModuleMap::identity(m.clone());
        return endpoint_with(&m, &id, &Approx::exact(&m), &m, &s_reg);
    }
    let q = resolve_two_sided(&m, depth, cap)?;
    endpoint_with(&q.module, &q.epsilon, &q.approx, &m, &s_reg)
}

/// `S ⊗_R P -> S`, `s ⊗ p ↦ s·ε(p)`, for `P -> S` a resolution of `S` as
/// an `R`-`S` bimodule.
pub fn multiplication_map(phi: &DgaMorphism, depth: i64, cap: usize) -> Result<CanonicalMap> {
    let s = phi.target.clone();
    let s_reg = Arc::new(DgModule::regular(s.clone()));
    let m = Arc::new(s_reg.restrict_left(phi)?);
    let models = Models::new(m, depth, cap)?;
    let sr = Arc::new(s_reg.restrict_right(phi)?);
    let t = tensor_over(sr.clone(), models.q_r.clone())?;
    let map = tensor_map(&t, &s_reg, |p, i, q, j| {
        let e = models.eps_r.apply(q, &models.q_r.basis_vector(q, j));
        Ok(s.mul(p, &s.basis_vector(p, i), q, &e))
    })?;
    Ok(CanonicalMap {
        name: "S ⊗ S -> S".into(),
        map,
        source: Approx::tensor(&Approx::exact(&sr), &models.a_r).with_support(&t.module),
        target: Approx::exact(&s_reg),
    })
}
