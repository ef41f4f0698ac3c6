//! Semifree resolutions built by killing homology of the cone of the
//! augmentation, one degree at a time.

pub mod witness;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use serde::{Deserialize, Serialize};

use crate::complex::{quasi_iso, GradedSpace, Window};
use crate::dg::{free_basis, Bilinear, DgAlgebra, DgModule, Envelope, ModuleMap, Side};
use crate::error::{Error, Result};
use crate::linalg::{quotient_representatives, FieldSpec, Matrix, Scalar};

pub use witness::{verify_build_tree, BuildNode, BuildTreeWitness};

/// Cap on generators used when the caller does not choose one.
pub const DEFAULT_MAX_GENERATORS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub label: String,
    pub degree: i64,
    pub stage: usize,
}

/// A semifree module `F = ⊕ A·g` (or `⊕ g·A`) with an augmentation
/// `ε: F -> M`.
#[derive(Clone, Debug)]
pub struct SemifreeResolution {
    pub side: Side,
    pub algebra: Arc<DgAlgebra>,
    /// The one-sided module that was resolved.
    pub target: Arc<DgModule>,
    pub module: Arc<DgModule>,
    pub generators: Vec<Generator>,
    /// Each generator as an element of `F` in its degree.
    pub elements: Vec<Vec<Scalar>>,
    pub epsilon: ModuleMap,
    /// `None` when `ε` is a quasi-isomorphism; otherwise every generator not
    /// yet added has degree at least this.
    pub missing_from: Option<i64>,
}

impl SemifreeResolution {
    pub fn is_exact(&self) -> bool {
        self.missing_from.is_none()
    }

    /// Degrees where `ε` is guaranteed to be a homology isomorphism.
    pub fn validity(&self) -> Option<Window> {
        let lo = self.target.space().bottom()?;
        match self.missing_from {
            None => {
                let hi = self.target.space().top().max(self.module.space().top()).unwrap_or(lo);
                Some(Window { lo: lo - 1, hi: hi + 1 })
            }
            Some(g) => Window::new(lo, g - 2).ok(),
        }
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }
}

struct Gen {
    degree: i64,
    stage: usize,
    dg: Vec<Scalar>,
    eps: Vec<Scalar>,
}

struct Builder<'a> {
    field: FieldSpec,
    side: Side,
    alg: &'a DgAlgebra,
    m: &'a DgModule,
    gens: Vec<Gen>,
}

impl Builder<'_> {
    fn offsets(&self, n: i64) -> (Vec<usize>, usize) {
        let mut off = Vec::with_capacity(self.gens.len());
        let mut total = 0;
        for g in &self.gens {
            off.push(total);
            total += self.alg.dim(n - g.degree);
        }
        (off, total)
    }

    fn fdim(&self, n: i64) -> usize {
        self.offsets(n).1
    }

    /// Splits an element of `F_n` into `(generator, coefficient in A)`.
    fn split(&self, n: i64, v: &[Scalar]) -> Vec<(usize, i64, Vec<Scalar>)> {
        let (off, _) = self.offsets(n);
        let mut out = Vec::new();
        for (gi, g) in self.gens.iter().enumerate() {
            let s = n - g.degree;
            let k = self.alg.dim(s);
            if k == 0 {
                continue;
            }
            let a = v[off[gi]..off[gi] + k].to_vec();
            if a.iter().any(|x| !x.is_zero()) {
                out.push((gi, s, a));
            }
        }
        out
    }

    fn place(&self, n: i64, gi: usize, a: &[Scalar], out: &mut [Scalar]) {
        let (off, _) = self.offsets(n);
        for (i, x) in a.iter().enumerate() {
            out[off[gi] + i] = &out[off[gi] + i] + x;
        }
    }

    /// `a·v` for left modules, `v·a` for right modules.
    fn mult(&self, n: i64, v: &[Scalar], p: i64, a: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![self.field.zero(); self.fdim(n + p)];
        for (gi, s, b) in self.split(n, v) {
            let c = match self.side {
                Side::Left => self.alg.mul(p, a, s, &b),
                Side::Right => self.alg.mul(s, &b, p, a),
            };
            self.place(n + p, gi, &c, &mut out);
        }
        out
    }

    fn d_basis(&self, n: i64, gi: usize, ai: usize) -> Vec<Scalar> {
        let g = &self.gens[gi];
        let s = n - g.degree;
        let a = self.alg.basis_vector(s, ai);
        let mut dg = g.dg.clone();
        dg.resize(self.fdim(g.degree - 1), self.field.zero());
        let mut body = self.mult(g.degree - 1, &dg, s, &a);
        let da = self.alg.d(s, &a);
        let mut lower = vec![self.field.zero(); body.len()];
        self.place(n - 1, gi, &da, &mut lower);
        // left: d(ag) = (da)g + (-1)^{|a|} a·dg; right: d(ga) = dg·a + (-1)^{|g|} g·da
        let (sb, sl) = match self.side {
            Side::Left => (self.field.sign(s), self.field.one()),
            Side::Right => (self.field.one(), self.field.sign(g.degree)),
        };
        for (o, l) in body.iter_mut().zip(lower) {
            *o = &(&*o * &sb) + &(&l * &sl);
        }
        body
    }

    fn eps_basis(&self, n: i64, gi: usize, ai: usize) -> Vec<Scalar> {
        let g = &self.gens[gi];
        let s = n - g.degree;
        let a = self.alg.basis_vector(s, ai);
        match self.side {
            Side::Left => self.m.act_left(s, &a, g.degree, &g.eps),
            Side::Right => self.m.act_right(g.degree, &g.eps, s, &a),
        }
    }

    fn basis_iter(&self, n: i64) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for (gi, g) in self.gens.iter().enumerate() {
            for ai in 0..self.alg.dim(n - g.degree) {
                v.push((gi, ai));
            }
        }
        v
    }

    fn d_matrix(&self, n: i64) -> Matrix {
        let cols: Vec<Vec<Scalar>> = self.basis_iter(n).into_iter().map(|(g, a)| self.d_basis(n, g, a)).collect();
        Matrix::from_columns(self.field, self.fdim(n - 1), &cols)
    }

    fn eps_matrix(&self, n: i64) -> Matrix {
        let cols: Vec<Vec<Scalar>> = self.basis_iter(n).into_iter().map(|(g, a)| self.eps_basis(n, g, a)).collect();
        Matrix::from_columns(self.field, self.m.dim(n), &cols)
    }

    /// Differential of the cone, `M_n ⊕ F_{n-1} -> M_{n-1} ⊕ F_{n-2}`.
    fn cone_d(&self, n: i64) -> Matrix {
        let (m0, m1) = (self.m.dim(n), self.m.dim(n - 1));
        let (f1, f2) = (self.fdim(n - 1), self.fdim(n - 2));
        let mut d = Matrix::zeros(self.field, m1 + f2, m0 + f1);
        d.paste(0, 0, &self.m.complex().d_at(n));
        d.paste(0, m0, &self.eps_matrix(n - 1));
        d.paste(m1, m0, &self.d_matrix(n - 1).neg());
        d
    }

    fn cone_dim(&self, n: i64) -> usize {
        self.m.dim(n) + self.fdim(n - 1)
    }

    fn cone_homology(&self, n: i64) -> Matrix {
        let dim = self.cone_dim(n);
        let ker = self.cone_d(n).kernel().basis;
        quotient_representatives(self.field, dim, &ker, &self.cone_d(n + 1))
    }

    fn top_degree(&self) -> i64 {
        let top_a = self.alg.space().top().unwrap_or(0);
        let top_f = self.gens.iter().map(|g| g.degree + top_a).max();
        self.m.space().top().max(top_f.map(|t| t + 1)).unwrap_or(0)
    }

    fn acyclic_above(&self, n: i64) -> bool {
        (n + 1..=self.top_degree() + 1).all(|k| self.cone_dim(k) == 0 || self.cone_homology(k).cols() == 0)
    }

    fn label(&self, gi: usize) -> String {
        format!("g{gi}")
    }

    fn finish(self, target: Arc<DgModule>, alg: Arc<DgAlgebra>, missing_from: Option<i64>) -> Result<SemifreeResolution> {
        let field = self.field;
        let top_a = self.alg.space().top().unwrap_or(0);
        let mut labels: BTreeMap<i64, Vec<String>> = BTreeMap::new();
        for (gi, g) in self.gens.iter().enumerate() {
            for s in 0..=top_a {
                for ai in 0..self.alg.dim(s) {
                    let a = self.alg.label(s, ai);
                    let l = match self.side {
                        Side::Left => format!("{a}·{}", self.label(gi)),
                        Side::Right => format!("{}·{a}", self.label(gi)),
                    };
                    labels.entry(g.degree + s).or_default().push(l);
                }
            }
        }
        // labels were pushed generator by generator, matching the layout
        let space = GradedSpace::from_labels(labels);
        let mut d = BTreeMap::new();
        let mut eps = BTreeMap::new();
        for n in space.support() {
            if space.dim(n - 1) > 0 {
                d.insert(n, self.d_matrix(n));
            }
            if self.m.dim(n) > 0 {
                eps.insert(n, self.eps_matrix(n));
            }
        }
        let complex = crate::complex::Complex::new(field, space.clone(), d)?;
        let act = match self.side {
            Side::Left => Bilinear::from_fn(field, self.alg.space(), &space, &space, |p, i, n, j| {
                let mut v = vec![field.zero(); space.dim(n)];
                v[j] = field.one();
                self.mult(n, &v, p, &self.alg.basis_vector(p, i))
            }),
            Side::Right => Bilinear::from_fn(field, &space, self.alg.space(), &space, |n, j, p, i| {
                let mut v = vec![field.zero(); space.dim(n)];
                v[j] = field.one();
                self.mult(n, &v, p, &self.alg.basis_vector(p, i))
            }),
        };
        let name = format!("P({})", self.m.name());
        let module = Arc::new(match self.side {
            Side::Left => DgModule::left(name, alg.clone(), complex, act)?,
            Side::Right => DgModule::right(name, alg.clone(), complex, act)?,
        });
        let mut elements = Vec::new();
        let mut generators = Vec::new();
        for (gi, g) in self.gens.iter().enumerate() {
            let mut v = vec![field.zero(); space.dim(g.degree)];
            self.place(g.degree, gi, self.alg.unit(), &mut v);
            elements.push(v);
            generators.push(Generator {
                label: self.label(gi),
                degree: g.degree,
                stage: g.stage,
            });
        }
        let epsilon = ModuleMap::new(module.clone(), target.clone(), eps)?;
        Ok(SemifreeResolution {
            side: self.side,
            algebra: alg,
            target,
            module,
            generators,
            elements,
            epsilon,
            missing_from,
        })
    }
}

fn one_sided(m: &DgModule, side: Side) -> (Arc<DgAlgebra>, Arc<DgModule>) {
    match side {
        Side::Left => (m.left_algebra().clone(), Arc::new(m.forget_right())),
        Side::Right => (m.right_algebra().clone(), Arc::new(m.forget_left())),
    }
}

/// Resolves the `side` module underlying `m` so that `ε` is a homology
/// isomorphism at least on `[bottom(M), through]`. Stops early, with an
/// exact resolution, once the cone of `ε` is acyclic. A module that is
/// already free is returned with `ε = id`.
pub fn semifree_resolution(m: &DgModule, side: Side, through: i64, max_generators: usize) -> Result<SemifreeResolution> {
    let (alg, target) = one_sided(m, side);
    let field = m.field();
    if alg.space().bottom().is_some_and(|b| b < 0) {
        return Err(Error::Unsupported("resolutions need a non-negatively graded algebra".into()));
    }
    if let Some(fb) = free_basis(&target, side) {
        if fb.generators.len() > max_generators {
            return Err(Error::ResourceBound {
                cap: max_generators,
                degree: fb.generators.last().map_or(0, |g| g.0),
                generators: fb.generators.len(),
            });
        }
        let bottom = target.space().bottom().unwrap_or(0);
        return Ok(SemifreeResolution {
            side,
            algebra: alg,
            module: target.clone(),
            generators: fb
                .generators
                .iter()
                .enumerate()
                .map(|(i, (d, _))| Generator {
                    label: format!("g{i}"),
                    degree: *d,
                    stage: (d - bottom) as usize,
                })
                .collect(),
            elements: fb.generators.into_iter().map(|(_, v)| v).collect(),
            epsilon: ModuleMap::identity(target.clone()),
            target,
            missing_from: None,
        });
    }
    let bottom = target.space().bottom().expect("the zero module is free");
    let mut b = Builder {
        field,
        side,
        alg: &alg,
        m: &target,
        gens: Vec::new(),
    };
    let last = through + 1;
    let mut missing = Some(last + 1);
    for n in bottom..=last.max(bottom) {
        let md = target.dim(n);
        // one class at a time, so that classes generated by earlier ones are
        // skipped; a generic combination generates as much as possible
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        loop {
            let reps = b.cone_homology(n);
            if reps.cols() == 0 {
                break;
            }
            let mut c = vec![field.zero(); reps.rows()];
            for j in 0..reps.cols() {
                crate::dg::axpy(&mut c, &field.from_i64(rng.gen_range(1..=7)), &reps.col(j));
            }
            let eps = c[..md].to_vec();
            let dg: Vec<Scalar> = c[md..].iter().map(|x| -x).collect();
            b.gens.push(Gen {
                degree: n,
                stage: (n - bottom) as usize,
                dg,
                eps,
            });
            if b.gens.len() > max_generators {
                return Err(Error::ResourceBound {
                    cap: max_generators,
                    degree: n,
                    generators: b.gens.len(),
                });
            }
        }
        if b.acyclic_above(n) {
            missing = None;
            break;
        }
    }
    if bottom > last {
        missing = Some(bottom);
    }
    b.finish(target.clone(), alg.clone(), missing)
}

/// A bimodule resolution obtained by resolving over the enveloping algebra.
#[derive(Clone, Debug)]
pub struct BimoduleResolution {
    pub envelope: Arc<Envelope>,
    pub over_envelope: SemifreeResolution,
    pub module: Arc<DgModule>,
    pub epsilon: ModuleMap,
}

impl BimoduleResolution {
    pub fn is_exact(&self) -> bool {
        self.over_envelope.is_exact()
    }

    pub fn validity(&self) -> Option<Window> {
        self.over_envelope.validity()
    }

    pub fn missing_from(&self) -> Option<i64> {
        self.over_envelope.missing_from
    }
}

pub fn resolve_bimodule(m: &DgModule, through: i64, max_generators: usize) -> Result<BimoduleResolution> {
    let env = Arc::new(crate::dg::enveloping(m.left_algebra().clone(), m.right_algebra().clone())?);
    resolve_bimodule_with(env, m, through, max_generators)
}

pub fn resolve_bimodule_with(env: Arc<Envelope>, m: &DgModule, through: i64, max_generators: usize) -> Result<BimoduleResolution> {
    let me = env.to_module(m)?;
    let res = semifree_resolution(&me, Side::Left, through, max_generators)?;
    let module = Arc::new(env.from_module(&res.module)?);
    let target = Arc::new(m.clone());
    let epsilon = ModuleMap::new(module.clone(), target, res.epsilon.blocks().clone())?;
    Ok(BimoduleResolution {
        envelope: env,
        over_envelope: res,
        module,
        epsilon,
    })
}

/// Columns `a·g` (or `g·a`) in degree `n` for a homogeneous generator.
fn span_of(f: &DgModule, side: Side, alg: &DgAlgebra, deg: i64, g: &[Scalar], n: i64) -> Vec<Vec<Scalar>> {
    let s = n - deg;
    (0..alg.dim(s))
        .map(|i| {
            let a = alg.basis_vector(s, i);
            match side {
                Side::Left => f.act_left(s, &a, deg, g),
                Side::Right => f.act_right(deg, g, s, &a),
            }
        })
        .collect()
}

/// Checks a resolution from its data alone: `F` is a valid module, free on
/// the listed generators, each `dg` lies in the span of earlier stages, `ε`
/// is a module map, and `ε` is a quasi-isomorphism on the claimed window.
pub fn verify_resolution(res: &SemifreeResolution) -> Result<()> {
    let f = &res.module;
    let field = f.field();
    if let Some(v) = f.validate().into_iter().next() {
        return Err(Error::Invalid(format!("resolution module: {v}")));
    }
    if res.elements.len() != res.generators.len() {
        return Err(Error::Invalid("generator list and elements differ in length".into()));
    }
    let alg = &res.algebra;
    for n in f.space().support() {
        let mut cols = Vec::new();
        for (g, v) in res.generators.iter().zip(&res.elements) {
            if v.len() != f.dim(g.degree) {
                return Err(Error::Invalid(format!("generator {} has the wrong size", g.label)));
            }
            cols.extend(span_of(f, res.side, alg, g.degree, v, n));
        }
        let dim = f.dim(n);
        if cols.len() != dim || Matrix::from_columns(field, dim, &cols).rank() != dim {
            return Err(Error::Invalid(format!("not free on the generators in degree {n}")));
        }
    }
    for (i, (g, v)) in res.generators.iter().zip(&res.elements).enumerate() {
        let dg = f.d(g.degree, v);
        if dg.iter().all(Scalar::is_zero) {
            continue;
        }
        let n = g.degree - 1;
        let mut cols = Vec::new();
        for (h, w) in res.generators.iter().zip(&res.elements) {
            if h.stage < g.stage {
                cols.extend(span_of(f, res.side, alg, h.degree, w, n));
            }
        }
        let span = Matrix::from_columns(field, f.dim(n), &cols);
        if span.solve(&dg)?.is_none() {
            return Err(Error::Invalid(format!("d({}) leaves the earlier stages (generator {i})", g.label)));
        }
    }
    res.epsilon.validate()?;
    if let Some(w) = res.validity() {
        let v = quasi_iso(&res.epsilon.chain_map()?, w)?;
        if let Some(bad) = v.first_failure() {
            return Err(Error::Invalid(format!(
                "augmentation is not a homology isomorphism in degree {} ({} vs {})",
                bad.degree, bad.source_dim, bad.target_dim
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::algebra::tests::{comb, truncated_poly, Q};
    use crate::dg::ModuleRules;

    fn residue(n: usize) -> DgModule {
        let a = Arc::new(truncated_poly(n, 0));
        let rules = ModuleRules {
            name: "k".into(),
            basis: vec![("m".into(), 0)],
            left_act: vec![("1".into(), "m".into(), comb(&[(1, "m")]))],
            ..Default::default()
        };
        let k = Arc::new(DgAlgebra::ground(Q));
        DgModule::from_rules(Q, a, k, &rules).unwrap()
    }

    #[test]
    fn dual_numbers_resolve_periodically() {
        // over k[x]/x^2 the minimal resolution of k has one generator per degree
        let m = residue(2);
        let r = semifree_resolution(&m, Side::Left, 4, 100).unwrap();
        let degs: Vec<i64> = r.generators.iter().map(|g| g.degree).collect();
        assert_eq!(degs, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(r.validity(), Some(Window { lo: 0, hi: 4 }));
        verify_resolution(&r).unwrap();
    }

    #[test]
    fn free_module_is_its_own_resolution() {
        let a = Arc::new(truncated_poly(3, 0));
        let m = DgModule::regular_left(a);
        let r = semifree_resolution(&m, Side::Left, 3, 10).unwrap();
        assert!(r.is_exact());
        assert_eq!(r.generators.len(), 1);
        assert!(r.module.same_structure(&r.target));
        verify_resolution(&r).unwrap();
    }

    #[test]
    fn cap_is_reported() {
        let m = residue(2);
        let e = semifree_resolution(&m, Side::Left, 20, 3).unwrap_err();
        assert!(matches!(e, Error::ResourceBound { cap: 3, .. }));
    }

    #[test]
    fn right_modules_resolve() {
        let a = Arc::new(truncated_poly(2, 0));
        let k = Arc::new(DgAlgebra::ground(Q));
        let rules = ModuleRules {
            name: "k".into(),
            basis: vec![("m".into(), 0)],
            right_act: vec![("m".into(), "1".into(), comb(&[(1, "m")]))],
            ..Default::default()
        };
        let m = DgModule::from_rules(Q, k, a, &rules).unwrap();
        let r = semifree_resolution(&m, Side::Right, 3, 100).unwrap();
        assert_eq!(r.generators.len(), 5);
        verify_resolution(&r).unwrap();
    }

    #[test]
    fn tampered_augmentation_is_rejected() {
        let m = residue(2);
        let mut r = semifree_resolution(&m, Side::Left, 3, 100).unwrap();
        let zero = BTreeMap::new();
        r.epsilon = ModuleMap::new(r.module.clone(), r.target.clone(), zero).unwrap();
        assert!(verify_resolution(&r).is_err());
    }

    #[test]
    fn tampered_differential_is_rejected() {
        let m = residue(2);
        let mut r = semifree_resolution(&m, Side::Left, 3, 100).unwrap();
        let mut d = BTreeMap::new();
        for n in r.module.space().support() {
            d.insert(n, r.module.complex().d_at(n));
        }
        let d1 = d.get_mut(&1).unwrap();
        let c = d1.get(0, 0).clone();
        d1.set(0, 0, &c + &Q.one());
        r.module = Arc::new(r.module.with_differential(d).unwrap());
        assert!(verify_resolution(&r).is_err());
    }

    #[test]
    fn bimodule_resolution_of_diagonal() {
        let a = Arc::new(truncated_poly(2, 0));
        let m = DgModule::regular(a);
        let r = resolve_bimodule(&m, 2, 100).unwrap();
        // the diagonal of dual numbers has a periodic bimodule resolution
        let degs: Vec<i64> = r.over_envelope.generators.iter().map(|g| g.degree).collect();
        assert_eq!(degs, vec![0, 1, 2, 3]);
        assert_eq!(r.validity(), Some(Window { lo: 0, hi: 2 }));
        r.epsilon.validate().unwrap();
        verify_resolution(&r.over_envelope).unwrap();
    }

    #[test]
    fn dg_algebra_resolution() {
        // Λ(x) with |x| = 1 and d = 0: k needs generators in every degree
        let a = Arc::new(truncated_poly(2, 1));
        let rules = ModuleRules {
            name: "k".into(),
            basis: vec![("m".into(), 0)],
            left_act: vec![("1".into(), "m".into(), comb(&[(1, "m")]))],
            ..Default::default()
        };
        let k = Arc::new(DgAlgebra::ground(Q));
        let m = DgModule::from_rules(Q, a, k, &rules).unwrap();
        let r = semifree_resolution(&m, Side::Left, 4, 100).unwrap();
        verify_resolution(&r).unwrap();
        
        let degs: Vec<i64> = r.generators.iter().map(|g| g.degree).collect();
        assert_eq!(degs, vec![0, 2, 4]);
        assert_eq!(r.validity(), Some(Window { lo: 0, hi: 4 }));
    }
}
