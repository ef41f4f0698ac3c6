use std::collections::BTreeMap;
use std::sync::Arc;

use super::{koszul, Bilinear, DgModule};
use crate::complex::{Complex, GradedSpace};
use crate::error::{Error, Result};
use crate::linalg::{FieldSpec, Kernel, Matrix, Scalar};

/// Which side the maps are linear over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomKind {
    /// `Hom_A(M, N)` for left `A`-modules with `f(am) = (-1)^{|f||a|} a f(m)`;
    /// from `M: A-B`, `N: A-C` it is a `B`-`C` bimodule.
    Left,
    /// `Hom_{A^op}(M, N)` for right modules with `f(ma) = f(m) a`; from
    /// `M: B-A`, `N: C-A` it is a `C`-`B` bimodule.
    Right,
}

/// A Hom complex with the embedding of each component into the ground
/// maps `⊕_p Hom_k(M_p, N_{p+n})`.
#[derive(Clone, Debug)]
pub struct HomComplex {
    pub module: DgModule,
    pub source: Arc<DgModule>,
    pub target: Arc<DgModule>,
    pub kind: HomKind,
    layout: BTreeMap<i64, Vec<(i64, usize)>>,
    kernels: BTreeMap<i64, Kernel>,
}

struct Ground<'a> {
    field: FieldSpec,
    m: &'a DgModule,
    n: &'a DgModule,
    layout: &'a BTreeMap<i64, Vec<(i64, usize)>>,
}

impl Ground<'_> {
    fn dim(&self, deg: i64) -> usize {
        self.layout
            .get(&deg)
            .map_or(0, |blocks| blocks.iter().map(|(p, _)| self.n.dim(p + deg) * self.m.dim(*p)).sum())
    }

    fn index(&self, deg: i64, p: i64, r: usize, c: usize) -> Option<usize> {
        let &(_, o) = self.layout.get(&deg)?.iter().find(|(pp, _)| *pp == p)?;
        Some(o + r * self.m.dim(p) + c)
    }

    fn block(&self, deg: i64, v: &[Scalar], p: i64) -> Matrix {
        let (rows, cols) = (self.n.dim(p + deg), self.m.dim(p));
        let mut out = Matrix::zeros(self.field, rows, cols);
        if let Some(o) = self.layout.get(&deg).and_then(|b| b.iter().find(|(pp, _)| *pp == p)).map(|x| x.1) {
            for r in 0..rows {
                for c in 0..cols {
                    out.set(r, c, v[o + r * cols + c].clone());
                }
            }
        }
        out
    }

    fn from_blocks(&self, deg: i64, mut f: impl FnMut(i64) -> Matrix) -> Vec<Scalar> {
        let mut v = vec![self.field.zero(); self.dim(deg)];
        if let Some(blocks) = self.layout.get(&deg) {
            for &(p, o) in blocks {
                let b = f(p);
                let cols = self.m.dim(p);
                for r in 0..b.rows() {
                    for c in 0..cols {
                        v[o + r * cols + c] = b.get(r, c).clone();
                    }
                }
            }
        }
        v
    }
}

impl HomComplex {
    fn ground(&self) -> Ground<'_> {
        Ground {
            field: self.module.field(),
            m: &self.source,
            n: &self.target,
            layout: &self.layout,
        }
    }

    /// Component `M_p -> N_{p+n}` of the element with coordinates `f`.
    pub fn block(&self, n: i64, f: &[Scalar], p: i64) -> Matrix {
        let g = self.ground();
        match self.kernels.get(&n) {
            Some(k) => g.block(n, &k.basis.mul_vec(f), p),
            None => Matrix::zeros(self.module.field(), self.target.dim(p + n), self.source.dim(p)),
        }
    }

    /// `f(m)` for `f` of degree `n` and `m ∈ M_p`.
    pub fn eval(&self, n: i64, f: &[Scalar], p: i64, m: &[Scalar]) -> Vec<Scalar> {
        self.block(n, f, p).mul_vec(m)
    }

    /// Coordinates of the degree-`n` map with the given blocks; fails if the
    /// map is not linear in the required sense.
    pub fn from_blocks(&self, n: i64, f: impl FnMut(i64) -> Matrix) -> Result<Vec<Scalar>> {
        let g = self.ground();
        let v = g.from_blocks(n, f);
        if v.is_empty() {
            return Ok(vec![]);
        }
        match self.kernels.get(&n) {
            Some(k) => k
                .coords(&v)
                .ok_or_else(|| Error::Invalid(format!("degree {n} map is not linear over {}", self.linear_algebra_name()))),
            None => {
                if v.iter().all(Scalar::is_zero) {
                    Ok(vec![])
                } else {
                    Err(Error::Invalid(format!("degree {n} map is not linear")))
                }
            }
        }
    }

    fn linear_algebra_name(&self) -> String {
        match self.kind {
            HomKind::Left => self.source.left_algebra().name().to_string(),
            HomKind::Right => self.source.right_algebra().name().to_string(),
        }
    }
}

/// Builds the linearity constraint rows for degree `deg`.
fn constraints(g: &Ground<'_>, kind: HomKind, deg: i64) -> Matrix {
    let field = g.field;
    let (m, n) = (g.m, g.n);
    let alg = match kind {
        HomKind::Left => m.left_algebra(),
        HomKind::Right => m.right_algebra(),
    };
    let cols = g.dim(deg);
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for s in alg.space().support() {
        for p in m.space().support() {
            let out_deg = p + s + deg;
            let od = n.dim(out_deg);
            if od == 0 {
                continue;
            }
            for k in 0..alg.dim(s) {
                let a = alg.basis_vector(s, k);
                for i in 0..m.dim(p) {
                    let mv = m.basis_vector(p, i);
                    // f(am) - (-1)^{deg s} a f(m), or f(ma) - f(m) a
                    let am = match kind {
                        HomKind::Left => m.act_left(s, &a, p, &mv),
                        HomKind::Right => m.act_right(p, &mv, s, &a),
                    };
                    let act_mat = match kind {
                        HomKind::Left => n.left_mult_matrix(s, &a, p + deg),
                        HomKind::Right => n.right_mult_matrix(s, &a, p + deg),
                    };
                    let sign = match kind {
                        HomKind::Left => field.sign(deg * s),
                        HomKind::Right => field.one(),
                    };
                    for r in 0..od {
                        let mut row = vec![field.zero(); cols];
                        for (l, c) in am.iter().enumerate() {
                            if !c.is_zero() {
                                if let Some(ix) = g.index(deg, p + s, r, l) {
                                    row[ix] = &row[ix] + c;
                                }
                            }
                        }
                        for rr in 0..n.dim(p + deg) {
                            let e = act_mat.get(r, rr);
                            if !e.is_zero() {
                                if let Some(ix) = g.index(deg, p, rr, i) {
                                    row[ix] = &row[ix] - &(e * &sign);
                                }
                            }
                        }
                        if row.iter().any(|x| !x.is_zero()) {
                            rows.push(row);
                        }
                    }
                }
            }
        }
    }
    if rows.is_empty() {
        Matrix::zeros(field, 0, cols)
    } else {
        Matrix::from_rows(field, rows)
    }
}

fn build(m: Arc<DgModule>, n: Arc<DgModule>, kind: HomKind) -> Result<HomComplex> {
    let field = m.field();
    let (Some(mb), Some(mt), Some(nb), Some(nt)) = (m.space().bottom(), m.space().top(), n.space().bottom(), n.space().top()) else {
        let (outer_l, outer_r) = outer_algebras(&m, &n, kind);
        let module = DgModule::bimodule("0", outer_l, outer_r, Complex::zero(field), Bilinear::default(), Bilinear::default())?;
        return Ok(HomComplex {
            module,
            source: m,
            target: n,
            kind,
            layout: BTreeMap::new(),
            kernels: BTreeMap::new(),
        });
    };
    let mut layout: BTreeMap<i64, Vec<(i64, usize)>> = BTreeMap::new();
    for deg in nb - mt..=nt - mb {
        let mut o = 0;
        let mut blocks = Vec::new();
        for p in m.space().support() {
            let sz = n.dim(p + deg) * m.dim(p);
            if sz > 0 {
                blocks.push((p, o));
                o += sz;
            }
        }
        if !blocks.is_empty() {
            layout.insert(deg, blocks);
        }
    }
    let g = Ground {
        field,
        m: &m,
        n: &n,
        layout: &layout,
    };
    let mut kernels = BTreeMap::new();
    let mut space = GradedSpace::new();
    for &deg in layout.keys() {
        let k = constraints(&g, kind, deg).kernel();
        for j in 0..k.dim() {
            space.push(deg, format!("h{deg}.{j}"));
        }
        if k.dim() > 0 {
            kernels.insert(deg, k);
        }
    }
    let mut hc = HomComplex {
        module: DgModule::over_ground("", Complex::zero(field)),
        source: m.clone(),
        target: n.clone(),
        kind,
        layout,
        kernels,
    };
    // D f = d f - (-1)^{|f|} f d
    let mut d = BTreeMap::new();
    for (&deg, k) in &hc.kernels {
        if space.dim(deg - 1) == 0 {
            continue;
        }
        let mut cols = Vec::new();
        for j in 0..k.dim() {
            let f = super::unit_vector(field, k.dim(), j);
            let df = hc.from_blocks(deg - 1, |p| {
                let first = n.complex().d_at(p + deg).mul(&hc.block(deg, &f, p));
                let second = hc.block(deg, &f, p - 1).mul(&m.complex().d_at(p));
                if koszul(deg, 1) {
                    first.add(&second)
                } else {
                    first.sub(&second)
                }
            })?;
            cols.push(df);
        }
        d.insert(deg, Matrix::from_columns(field, space.dim(deg - 1), &cols));
    }
    let complex = Complex::new(field, space.clone(), d)?;
    let (outer_l, outer_r) = outer_algebras(&m, &n, kind);
    let mut err = None;
    let la = Bilinear::from_fn(field, outer_l.space(), &space, &space, |s, i, deg, j| {
        let x = outer_l.basis_vector(s, i);
        let f = super::unit_vector(field, space.dim(deg), j);
        let r = match kind {
            // (b f)(m) = (-1)^{|b|(|f|+|m|)} f(m b)
            HomKind::Left => hc.from_blocks(deg + s, |p| {
                let blk = hc.block(deg, &f, p + s).mul(&m.right_mult_matrix(s, &x, p));
                if koszul(s, deg + p) {
                    blk.neg()
                } else {
                    blk
                }
            }),
            // (c f)(m) = c f(m)
            HomKind::Right => hc.from_blocks(deg + s, |p| n.left_mult_matrix(s, &x, p + deg).mul(&hc.block(deg, &f, p))),
        };
        r.unwrap_or_else(|e| {
            err.get_or_insert(e);
            vec![field.zero(); space.dim(deg + s)]
        })
    });
    let ra = Bilinear::from_fn(field, &space, outer_r.space(), &space, |deg, j, s, i| {
        let x = outer_r.basis_vector(s, i);
        let f = super::unit_vector(field, space.dim(deg), j);
        let r = match kind {
            // (f c)(m) = (-1)^{|c||m|} f(m) c
            HomKind::Left => hc.from_blocks(deg + s, |p| {
                let blk = n.right_mult_matrix(s, &x, p + deg).mul(&hc.block(deg, &f, p));
                if koszul(s, p) {
                    blk.neg()
                } else {
                    blk
                }
            }),
            // (f b)(m) = f(b m)
            HomKind::Right => hc.from_blocks(deg + s, |p| hc.block(deg, &f, p + s).mul(&m.left_mult_matrix(s, &x, p))),
        };
        r.unwrap_or_else(|e| {
            err.get_or_insert(e);
            vec![field.zero(); space.dim(deg + s)]
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    hc.module = DgModule::bimodule(format!("Hom({}, {})", m.name(), n.name()), outer_l, outer_r, complex, la, ra)?;
    Ok(hc)
}

fn outer_algebras(
    m: &DgModule,
    n: &DgModule,
    kind: HomKind,
) -> (Arc<super::DgAlgebra>, Arc<super::DgAlgebra>) {
    match kind {
        HomKind::Left => (m.right_algebra().clone(), n.right_algebra().clone()),
        HomKind::Right => (n.left_algebra().clone(), m.left_algebra().clone()),
    }
}

/// `Hom_A(M, N)` for `M: A-B`, `N: A-C`, as a `B`-`C` bimodule.
pub fn hom_left(m: Arc<DgModule>, n: Arc<DgModule>) -> Result<HomComplex> {
    if m.left_algebra() != n.left_algebra() {
        return Err(Error::AlgebraMismatch(format!("{} and {} are modules over different algebras", m.name(), n.name())));
    }
    build(m, n, HomKind::Left)
}

/// `Hom_{A^op}(M, N)` for `M: B-A`, `N: C-A`, as a `C`-`B` bimodule.
pub fn hom_right(m: Arc<DgModule>, n: Arc<DgModule>) -> Result<HomComplex> {
    if m.right_algebra() != n.right_algebra() {
        return Err(Error::AlgebraMismatch(format!("{} and {} are modules over different algebras", m.name(), n.name())));
    }
    build(m, n, HomKind::Right)
}

#[cfg(test)]
mod tests {
    use super::super::algebra::tests::{truncated_poly, Q};
    use super::super::DgAlgebra;
    use super::*;

    #[test]
    fn hom_from_regular_is_target() {
        for a in [truncated_poly(2, 0), truncated_poly(3, 0), truncated_poly(2, 1)] {
            let a = Arc::new(a);
            let reg = Arc::new(DgModule::regular(a.clone()));
            let h = hom_left(reg.clone(), reg.clone()).unwrap();
            assert!(h.module.is_valid());
            for n in -3..=3 {
                assert_eq!(h.module.dim(n), a.dim(n), "degree {n}");
            }
            let hr = hom_right(reg.clone(), reg).unwrap();
            assert!(hr.module.is_valid());
        }
    }

    #[test]
    fn ground_field_hom() {
        let k = Arc::new(DgAlgebra::ground(Q));
        let v2 = Complex::new(Q, GradedSpace::from_dims(&[(0, 2)], "v"), BTreeMap::new()).unwrap();
        let v3 = Complex::new(Q, GradedSpace::from_dims(&[(0, 3)], "w"), BTreeMap::new()).unwrap();
        let m = Arc::new(DgModule::over_ground("V", v2));
        let n = Arc::new(DgModule::over_ground("W", v3));
        let h = hom_left(m, n).unwrap();
        assert_eq!(h.module.dim(0), 6);
        assert_eq!(h.module.space().total_dim(), 6);
        drop(k);
    }

    #[test]
    fn hom_of_shifted_sum_over_exterior() {
        let ext = Arc::new(truncated_poly(2, 1));
        let a = DgModule::regular(ext.clone());
        let m = Arc::new(DgModule::direct_sum(&[&a, &a.shift(1)]).unwrap());
        let h = hom_left(m.clone(), m.clone()).unwrap();
        assert!(h.module.is_valid());
        // 2×2 matrix of shifted copies of A: degree n has contributions from A_{n}, A_{n±1}
        let expect = |n: i64| -> usize {
            2 * ext.dim(n) + ext.dim(n - 1) + ext.dim(n + 1)
        };
        for n in -2..=3 {
            assert_eq!(h.module.dim(n), expect(n), "degree {n}");
        }
    }

    #[test]
    fn nonlinear_maps_rejected() {
        let a = Arc::new(truncated_poly(2, 0));
        let reg = Arc::new(DgModule::regular_left(a));
        let h = hom_left(reg.clone(), reg).unwrap();
        // swapping the basis is not A-linear
        assert!(h.from_blocks(0, |_| Matrix::from_i64(Q, &[&[0, 1], &[1, 0]])).is_err());
        assert!(h.from_blocks(0, |_| Matrix::from_i64(Q, &[&[0, 0], &[1, 0]])).is_ok());
    }
}
