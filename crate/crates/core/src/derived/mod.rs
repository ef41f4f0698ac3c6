//! Derived tensor products and Hom complexes computed from semifree
//! resolutions, with explicit bounds on where truncation can be trusted.

pub mod approx;
pub mod canonical;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::complex::{quasi_iso, ChainMap, Window};
use crate::dg::{hom_left, hom_right, tensor_over, DgModule, HomComplex, ModuleMap, Side, TensorComplex};
use crate::error::Result;
use crate::linalg::{Matrix, Scalar};
use crate::resolution::{resolve_bimodule, semifree_resolution, SemifreeResolution};

pub use approx::{symmetrize, Approx, Trusted};
pub use canonical::{endpoint_map, multiplication_map, CanonicalMap, Models};

/// How many times a computation is redone with deeper resolutions before
/// settling for a smaller trusted window.
const DEEPEN_ROUNDS: usize = 4;

/// A chain-level model of a derived object.
#[derive(Clone, Debug)]
pub struct DerivedComplex {
    pub value: DgModule,
    pub approx: Approx,
    pub provenance: Vec<String>,
}

impl DerivedComplex {
    pub fn trusted(&self) -> Trusted {
        self.approx.trusted()
    }

    /// Homology dimensions on the part of `w` where they are trusted.
    pub fn homology_dims(&self, w: Window) -> BTreeMap<i64, usize> {
        match self.trusted().restrict(&w) {
            Some(t) => self.value.complex().homology_dims(t),
            None => BTreeMap::new(),
        }
    }
}

/// A module together with a resolution of it over one side.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub module: Arc<DgModule>,
    pub epsilon: ModuleMap,
    pub approx: Approx,
}

impl Resolved {
    fn from_resolution(r: SemifreeResolution) -> Resolved {
        let approx = Approx::truncated(&r.module, r.missing_from);
        Resolved {
            module: r.module,
            epsilon: r.epsilon,
            approx,
        }
    }
}

/// Resolves a one-sided module over `side`; the result keeps only that side.
pub fn resolve_one_sided(m: &DgModule, side: Side, through: i64, cap: usize) -> Result<Resolved> {
    Ok(Resolved::from_resolution(semifree_resolution(m, side, through, cap)?))
}

/// Resolves a bimodule over the enveloping algebra, keeping both actions.
pub fn resolve_two_sided(m: &DgModule, through: i64, cap: usize) -> Result<Resolved> {
    let r = resolve_bimodule(m, through, cap)?;
    let approx = Approx::truncated(&r.module, r.missing_from());
    Ok(Resolved {
        module: r.module,
        epsilon: r.epsilon,
        approx,
    })
}

/// Runs `build` with increasing depth until its trusted range covers `w`,
/// it becomes exact, or it stops improving.
pub fn deepen<T>(w: &Window, start: i64, mut build: impl FnMut(i64) -> Result<(T, Trusted)>) -> Result<(T, Trusted)> {
    let mut depth = start.max(0);
    let mut best = build(depth)?;
    for _ in 1..DEEPEN_ROUNDS {
        let short = best.1.shortfall(w);
        if short == 0 {
            break;
        }
        depth += short;
        let next = build(depth)?;
        if next.1.shortfall(w) >= short {
            best = next;
            break;
        }
        best = next;
    }
    Ok(best)
}

/// `M ⊗^L_A N` computed as `M ⊗_A P` for a resolution `P -> N`. Outer
/// actions on both factors are kept.
#[derive(Clone, Debug)]
pub struct DerivedTensor {
    pub tensor: TensorComplex,
    pub resolution: Resolved,
    pub approx: Approx,
}

impl DerivedTensor {
    pub fn derived(&self) -> DerivedComplex {
        DerivedComplex {
            value: self.tensor.module.clone(),
            approx: self.approx,
            provenance: vec![format!("{} resolved as {}", self.resolution.epsilon.target.name(), self.resolution.module.name())],
        }
    }
}

pub fn derived_tensor(m: Arc<DgModule>, n: Arc<DgModule>, w: Window, cap: usize) -> Result<DerivedTensor> {
    let bm = m.space().bottom().unwrap_or(0);
    let (t, _) = deepen(&w, w.hi - bm, |depth| {
        let res = resolve_two_sided(&n, depth, cap)?;
        let tensor = tensor_over(m.clone(), res.module.clone())?;
        let approx = Approx::tensor(&Approx::exact(&m), &res.approx).with_support(&tensor.module);
        let trusted = approx.trusted();
        Ok((
            DerivedTensor {
                tensor,
                resolution: res,
                approx,
            },
            trusted,
        ))
    })?;
    Ok(t)
}

/// `RHom_A(M, N)` computed as `Hom_A(P, N)` for a resolution `P -> M`.
#[derive(Clone, Debug)]
pub struct DerivedHom {
    pub hom: HomComplex,
    pub resolution: Resolved,
    pub approx: Approx,
}

impl DerivedHom {
    pub fn derived(&self) -> DerivedComplex {
        DerivedComplex {
            value: self.hom.module.clone(),
            approx: self.approx,
            provenance: vec![format!("{} resolved as {}", self.resolution.epsilon.target.name(), self.resolution.module.name())],
        }
    }
}

pub fn rhom(m: Arc<DgModule>, n: Arc<DgModule>, w: Window, cap: usize) -> Result<DerivedHom> {
    let tn = n.space().top().unwrap_or(0);
    let (h, _) = deepen(&w, tn - w.lo, |depth| {
        let res = resolve_two_sided(&m, depth, cap)?;
        let hom = hom_left(res.module.clone(), n.clone())?;
        let approx = Approx::hom(&res.approx, &Approx::exact(&n)).with_support(&hom.module);
        let trusted = approx.trusted();
        Ok((
            DerivedHom {
                hom,
                resolution: res,
                approx,
            },
            trusted,
        ))
    })?;
    Ok(h)
}

/// Dimensions by degree on the trusted part of the requested range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub requested: Window,
    pub trusted: Option<Window>,
    pub dims: BTreeMap<i64, usize>,
}

impl Table {
    pub fn get(&self, i: i64) -> Option<usize> {
        self.dims.get(&i).copied()
    }
}

/// `Tor_i = H_i(M ⊗^L N)` for `i` in `w`.
pub fn tor_table(m: Arc<DgModule>, n: Arc<DgModule>, w: Window, cap: usize) -> Result<Table> {
    let t = derived_tensor(m, n, w, cap)?;
    let trusted = t.approx.trusted().restrict(&w);
    let dims = trusted.map_or_else(BTreeMap::new, |tw| t.tensor.module.complex().homology_dims(tw));
    Ok(Table {
        requested: w,
        trusted,
        dims,
    })
}

/// `Ext^i = H_{-i}(RHom(M, N))` for `i` in `w`.
pub fn ext_table(m: Arc<DgModule>, n: Arc<DgModule>, w: Window, cap: usize) -> Result<Table> {
    let homological = Window { lo: -w.hi, hi: -w.lo };
    let h = rhom(m, n, homological, cap)?;
    let trusted = h
        .approx
        .trusted()
        .restrict(&homological)
        .map(|t| Window { lo: -t.hi, hi: -t.lo });
    let dims = trusted.map_or_else(BTreeMap::new, |tw| {
        tw.degrees().map(|i| (i, h.hom.module.complex().homology_dim(-i))).collect()
    });
    Ok(Table {
        requested: w,
        trusted,
        dims,
    })
}

/// `Z = RHom_{S^op}(M, S)` as an `S`-`R` bimodule.
#[derive(Clone, Debug)]
pub struct DualizedBimodule {
    pub z: HomComplex,
    pub approx: Approx,
    pub provenance: Vec<String>,
}

pub fn dualize(m: &DgModule, w: Window, cap: usize) -> Result<DualizedBimodule> {
    let s = m.right_algebra().clone();
    let s_reg = Arc::new(DgModule::regular(s));
    let ts = s_reg.space().top().unwrap_or(0);
    let (z, _) = deepen(&w, ts - w.lo, |depth| {
        let (model, approx, note) = match crate::dg::free_basis(m, Side::Right) {
            Some(_) => (Arc::new(m.clone()), Approx::exact(m), format!("{} is free over the right algebra", m.name())),
            None => {
                let r = resolve_two_sided(m, depth, cap)?;
                let note = format!("{} resolved as {}", m.name(), r.module.name());
                (r.module, r.approx, note)
            }
        };
        let z = hom_right(model, s_reg.clone())?;
        let approx = Approx::hom(&approx, &Approx::exact(&s_reg)).with_support(&z.module);
        let trusted = approx.trusted();
        Ok((
            DualizedBimodule {
                z,
                approx,
                provenance: vec![note],
            },
            trusted,
        ))
    })?;
    Ok(z)
}

/// Chain map between tensor complexes given on basis pairs `m_i ⊗ n_j`.
pub fn tensor_map(
    src: &TensorComplex,
    tgt: &DgModule,
    mut f: impl FnMut(i64, usize, i64, usize) -> Result<Vec<Scalar>>,
) -> Result<ChainMap> {
    let field = tgt.field();
    let mut maps = BTreeMap::new();
    for n in src.module.space().support() {
        if tgt.dim(n) == 0 {
            continue;
        }
        let cols = (0..src.module.dim(n))
            .map(|k| {
                let (p, i, q, j) = src.basis_pair(n, k);
                f(p, i, q, j)
            })
            .collect::<Result<Vec<_>>>()?;
        maps.insert(n, Matrix::from_columns(field, tgt.dim(n), &cols));
    }
    ChainMap::new(Arc::new(src.module.complex().clone()), Arc::new(tgt.complex().clone()), maps)
}

/// Chain map out of a module given on its basis vectors.
pub fn module_map_on_basis(src: &DgModule, tgt: &DgModule, mut f: impl FnMut(i64, usize) -> Result<Vec<Scalar>>) -> Result<ChainMap> {
    let field = tgt.field();
    let mut maps = BTreeMap::new();
    for n in src.space().support() {
        if tgt.dim(n) == 0 {
            continue;
        }
        let cols = (0..src.dim(n)).map(|k| f(n, k)).collect::<Result<Vec<_>>>()?;
        maps.insert(n, Matrix::from_columns(field, tgt.dim(n), &cols));
    }
    ChainMap::new(Arc::new(src.complex().clone()), Arc::new(tgt.complex().clone()), maps)
}

/// Quasi-isomorphism test with the homology dimensions of both sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoReport {
    pub requested: Window,
    pub checked: Option<Window>,
    pub iso: bool,
    /// `(degree, dim H(source), dim H(target), iso in that degree)`.
    pub degrees: Vec<(i64, usize, usize, bool)>,
}

impl IsoReport {
    /// First failing degree by distance from zero.
    pub fn first_failure(&self) -> Option<(i64, usize, usize)> {
        self.degrees
            .iter()
            .filter(|d| !d.3)
            .min_by_key(|d| (d.0.abs(), d.0))
            .map(|d| (d.0, d.1, d.2))
    }
}

pub fn is_derived_iso(f: &ChainMap, w: Window, trusted: Trusted) -> Result<IsoReport> {
    let Some(checked) = trusted.restrict(&w) else {
        return Ok(IsoReport {
            requested: w,
            checked: None,
            iso: true,
            degrees: Vec::new(),
        });
    };
    let v = quasi_iso(f, checked)?;
    Ok(IsoReport {
        requested: w,
        checked: Some(checked),
        iso: v.all,
        degrees: v.degrees.iter().map(|d| (d.degree, d.source_dim, d.target_dim, d.iso)).collect(),
    })
}
