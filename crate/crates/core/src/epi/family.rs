//! Seeded finite families of DG modules standing in for "all modules".

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dg::{free_basis, DgAlgebra, DgModule, ModuleMap, Side};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Scalar};

#[derive(Clone, Debug)]
pub struct Member {
    pub description: String,
    pub module: DgModule,
}

/// Left `S`-modules and, of the same length, right `S`-modules.
#[derive(Clone, Debug)]
pub struct TestFamily {
    pub seed: u64,
    pub left: Vec<Member>,
    pub right: Vec<Member>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyInfo {
    pub seed: u64,
    pub left: Vec<String>,
    pub right: Vec<String>,
}

impl TestFamily {
    pub fn info(&self) -> FamilyInfo {
        FamilyInfo {
            seed: self.seed,
            left: self.left.iter().map(|m| m.description.clone()).collect(),
            right: self.right.iter().map(|m| m.description.clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    /// Index pairs used by the two-variable conditions: all pairs among the
    /// first three members, plus the diagonal.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let k = self.len().min(3);
        let mut out: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
        out.extend((k..self.len()).map(|i| (i, i)));
        out
    }
}

fn regular(s: &Arc<DgAlgebra>, side: Side) -> DgModule {
    match side {
        Side::Left => DgModule::regular_left(s.clone()),
        Side::Right => DgModule::regular_right(s.clone()),
    }
}

fn random_combination(rng: &mut ChaCha8Rng, s: &DgAlgebra, basis: &[Vec<Scalar>], dim: usize) -> Vec<Scalar> {
    let field = s.field();
    let mut v = vec![field.zero(); dim];
    for b in basis {
        let c = field.from_i64(rng.gen_range(-2..=2));
        crate::dg::axpy(&mut v, &c, b);
    }
    v
}

fn cycles(m: &DgModule, n: i64) -> Vec<Vec<Scalar>> {
    if m.dim(n - 1) == 0 {
        return (0..m.dim(n)).map(|i| m.basis_vector(n, i)).collect();
    }
    m.complex().d_at(n).kernel_basis()
}

fn free_sum(s: &Arc<DgAlgebra>, side: Side, shifts: &[i64]) -> Result<DgModule> {
    let parts: Vec<DgModule> = shifts.iter().map(|&t| regular(s, side).shift(t)).collect();
    let refs: Vec<&DgModule> = parts.iter().collect();
    DgModule::direct_sum(&refs)
}

/// The module map out of a free module sending its generators to `images`.
pub fn map_from_generators(x: Arc<DgModule>, y: Arc<DgModule>, side: Side, images: &[Vec<Scalar>]) -> Result<ModuleMap> {
    let field = x.field();
    let basis = free_basis(&x, side).ok_or_else(|| Error::Invalid(format!("{} is not free", x.name())))?;
    if basis.generators.len() != images.len() {
        return Err(Error::Shape("one image per generator is required".into()));
    }
    let alg = match side {
        Side::Left => x.left_algebra().clone(),
        Side::Right => x.right_algebra().clone(),
    };
    let mut maps = BTreeMap::new();
    for n in x.space().support() {
        let (mut src, mut tgt) = (Vec::new(), Vec::new());
        for ((g, gv), img) in basis.generators.iter().zip(images) {
            let p = n - g;
            for i in 0..alg.dim(p) {
                let a = alg.basis_vector(p, i);
                match side {
                    Side::Left => {
                        src.push(x.act_left(p, &a, *g, gv));
                        tgt.push(y.act_left(p, &a, *g, img));
                    }
                    Side::Right => {
                        src.push(x.act_right(*g, gv, p, &a));
                        tgt.push(y.act_right(*g, img, p, &a));
                    }
                }
            }
        }
        let b = Matrix::from_columns(field, x.dim(n), &src);
        let inv = b
            .solve_matrix(&Matrix::identity(field, x.dim(n)))?
            .ok_or_else(|| Error::Invalid("generators do not form a basis".into()))?;
        maps.insert(n, Matrix::from_columns(field, y.dim(n), &tgt).mul(&inv));
    }
    ModuleMap::new(x, y, maps)
}

fn random_cone(rng: &mut ChaCha8Rng, s: &Arc<DgAlgebra>, side: Side) -> Result<DgModule> {
    let shifts = |rng: &mut ChaCha8Rng| -> Vec<i64> { (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..=1)).collect() };
    let (sx, sy) = (shifts(rng), shifts(rng));
    let x = Arc::new(free_sum(s, side, &sx)?);
    let y = Arc::new(free_sum(s, side, &sy)?);
    let basis = free_basis(&x, side).ok_or_else(|| Error::Invalid("free sum has no basis".into()))?;
    let images: Vec<Vec<Scalar>> = basis
        .generators
        .iter()
        .map(|(g, _)| random_combination(rng, s, &cycles(&y, *g), y.dim(*g)))
        .collect();
    let f = map_from_generators(x, y, side, &images)?;
    DgModule::cone(&f)
}

fn random_quotient(rng: &mut ChaCha8Rng, s: &Arc<DgAlgebra>, side: Side) -> Result<DgModule> {
    let reg = regular(s, side);
    let degs: Vec<i64> = reg.space().support().into_iter().filter(|&n| !cycles(&reg, n).is_empty()).collect();
    if degs.is_empty() {
        return Ok(reg);
    }
    let n = degs[rng.gen_range(0..degs.len())];
    let v = random_combination(rng, s, &cycles(&reg, n), reg.dim(n));
    let sub = reg.generated_submodule(side, &[(n, v)]);
    reg.quotient(&sub)
}

fn members(s: &Arc<DgAlgebra>, seed: u64, size: usize, side: Side) -> Result<Vec<Member>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![
        Member {
            description: "S".into(),
            module: regular(s, side).with_name("S"),
        },
        Member {
            description: "ΣS".into(),
            module: regular(s, side).shift(1).with_name("ΣS"),
        },
    ];
    for k in 2..size.max(2) {
        let (description, module) = if k % 2 == 0 {
            let c = random_cone(&mut rng, s, side)?;
            (format!("cone#{k} {}", c.name()), c)
        } else {
            (format!("quotient#{k}"), random_quotient(&mut rng, s, side)?)
        };
        out.push(Member {
            module: module.with_name(format!("N{k}")),
            description,
        });
    }
    Ok(out)
}

/// `S`, `ΣS`, then alternately cones of random chain maps between sums of
/// shifted free modules and quotients `S/⟨v⟩` by random cycles. The same
/// seed always gives the same family; `size` is at least 2.
pub fn generate_test_family(s: Arc<DgAlgebra>, seed: u64, size: usize) -> Result<TestFamily> {
    Ok(TestFamily {
        seed,
        left: members(&s, seed, size, Side::Left)?,
        right: members(&s, seed ^ 0x9e37_79b9_7f4a_7c15, size, Side::Right)?,
    })
}
