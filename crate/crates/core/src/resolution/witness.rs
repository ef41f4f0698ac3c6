//! Build trees exhibiting a module as a retract of an iterated cone of
//! shifted free modules.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dg::{hom_left, hom_right, DgAlgebra, DgModule, ModuleMap, Side};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Scalar};

#[derive(Clone, Debug)]
pub enum BuildNode {
    /// The regular module on the witness side.
    Leaf,
    Shift(i64, Box<BuildNode>),
    /// Cone of the named map `source -> target`.
    Cone {
        map: String,
        source: Box<BuildNode>,
        target: Box<BuildNode>,
    },
    Sum(Vec<BuildNode>),
    /// `include: Y -> X`, `project: X -> Y` and `homotopy` with
    /// `project∘include - id = dh + hd`. `Y` is the module being witnessed
    /// unless given explicitly.
    Retract {
        include: String,
        project: String,
        homotopy: String,
        node: Box<BuildNode>,
        module: Option<Arc<DgModule>>,
    },
}

impl BuildNode {
    pub fn node_count(&self) -> usize {
        match self {
            BuildNode::Leaf => 1,
            BuildNode::Shift(_, c) => 1 + c.node_count(),
            BuildNode::Cone { source, target, .. } => 1 + source.node_count() + target.node_count(),
            BuildNode::Sum(cs) => 1 + cs.iter().map(BuildNode::node_count).sum::<usize>(),
            BuildNode::Retract { node, .. } => 1 + node.node_count(),
        }
    }
}

/// Maps are per-degree matrices in the bases of the evaluated modules.
/// A homotopy block keyed `n` goes from degree `n` to `n + 1`.
#[derive(Clone, Debug)]
pub struct BuildTreeWitness {
    pub name: String,
    pub side: Side,
    pub root: BuildNode,
    pub maps: BTreeMap<String, BTreeMap<i64, Matrix>>,
}

struct Eval<'a> {
    side: Side,
    alg: Arc<DgAlgebra>,
    target: Arc<DgModule>,
    maps: &'a BTreeMap<String, BTreeMap<i64, Matrix>>,
    next: usize,
}

fn reject(node: usize, detail: impl Into<String>) -> Error {
    Error::WitnessRejected {
        node,
        detail: detail.into(),
    }
}

impl Eval<'_> {
    fn map(&self, node: usize, name: &str) -> Result<BTreeMap<i64, Matrix>> {
        self.maps
            .get(name)
            .cloned()
            .ok_or_else(|| reject(node, format!("unknown map {name}")))
    }

    fn module_map(&self, node: usize, name: &str, s: Arc<DgModule>, t: Arc<DgModule>) -> Result<ModuleMap> {
        let blocks = self.map(node, name)?;
        let f = ModuleMap::new(s, t, blocks).map_err(|e| reject(node, format!("{name}: {e}")))?;
        f.validate().map_err(|e| reject(node, format!("{name}: {e}")))?;
        Ok(f)
    }

    fn eval(&mut self, node: &BuildNode) -> Result<Arc<DgModule>> {
        let idx = self.next;
        self.next += 1;
        match node {
            BuildNode::Leaf => Ok(Arc::new(match self.side {
                Side::Left => DgModule::regular_left(self.alg.clone()),
                Side::Right => DgModule::regular_right(self.alg.clone()),
            })),
            BuildNode::Shift(t, c) => Ok(Arc::new(self.eval(c)?.shift(*t))),
            BuildNode::Cone { map, source, target } => {
                let x = self.eval(source)?;
                let y = self.eval(target)?;
                let f = self.module_map(idx, map, x, y)?;
                Ok(Arc::new(DgModule::cone(&f)?))
            }
            BuildNode::Sum(cs) => {
                let parts = cs.iter().map(|c| self.eval(c)).collect::<Result<Vec<_>>>()?;
                if parts.is_empty() {
                    return Err(reject(idx, "empty sum"));
                }
                let refs: Vec<&DgModule> = parts.iter().map(|p| p.as_ref()).collect();
                Ok(Arc::new(DgModule::direct_sum(&refs)?))
            }
            BuildNode::Retract {
                include,
                project,
                homotopy,
                node,
                module,
            } => {
                let x = self.eval(node)?;
                let y = module.clone().unwrap_or_else(|| self.target.clone());
                let side_alg = match self.side {
                    Side::Left => y.left_algebra(),
                    Side::Right => y.right_algebra(),
                };
                if **side_alg != *self.alg {
                    return Err(reject(idx, "retract module is over a different algebra"));
                }
                let i = self.module_map(idx, include, y.clone(), x.clone())?;
                let p = self.module_map(idx, project, x, y.clone())?;
                let h = self.map(idx, homotopy)?;
                self.check_homotopy(idx, &y, &p.compose(&i)?, &h)?;
                Ok(y)
            }
        }
    }

    /// `p∘i - id = dh + hd` with `h` linear up to the Koszul sign.
    fn check_homotopy(&self, idx: usize, y: &DgModule, pi: &ModuleMap, h: &BTreeMap<i64, Matrix>) -> Result<()> {
        let field = y.field();
        let hb = |n: i64| -> Matrix {
            h.get(&n)
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(field, y.dim(n + 1), y.dim(n)))
        };
        for (n, m) in h {
            if m.rows() != y.dim(n + 1) || m.cols() != y.dim(*n) {
                return Err(reject(idx, format!("homotopy block {n} has the wrong shape")));
            }
        }
        let d = |n: i64| y.complex().d_at(n);
        for n in y.space().support() {
            let lhs = pi.block(n).sub(&Matrix::identity(field, y.dim(n)));
            let rhs = d(n + 1).mul(&hb(n)).add(&hb(n - 1).mul(&d(n)));
            if lhs != rhs {
                return Err(reject(idx, format!("p∘i is not homotopic to the identity in degree {n}")));
            }
        }
        for n in y.space().support() {
            for j in 0..y.dim(n) {
                let m = y.basis_vector(n, j);
                let hm = hb(n).mul_vec(&m);
                for s in self.alg.space().support() {
                    for k in 0..self.alg.dim(s) {
                        let a = self.alg.basis_vector(s, k);
                        let (lhs, rhs) = match self.side {
                            Side::Left => (
                                hb(n + s).mul_vec(&y.act_left(s, &a, n, &m)),
                                y.act_left(s, &a, n + 1, &hm)
                                    .into_iter()
                                    .map(|x| &x * &field.sign(s))
                                    .collect::<Vec<Scalar>>(),
                            ),
                            Side::Right => (hb(n + s).mul_vec(&y.act_right(n, &m, s, &a)), y.act_right(n + 1, &hm, s, &a)),
                        };
                        if lhs != rhs {
                            return Err(reject(
                                idx,
                                format!("homotopy is not linear at ({}, {})", self.alg.label(s, k), y.label(n, j)),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Searches the degree-0 cycles of `Hom(X, M)` for an isomorphism.
fn find_isomorphism(side: Side, x: Arc<DgModule>, m: Arc<DgModule>) -> Result<bool> {
    let field = m.field();
    let hom = match side {
        Side::Left => hom_left(x.clone(), m.clone())?,
        Side::Right => hom_right(x.clone(), m.clone())?,
    };
    let cycles = hom.module.complex().d_at(0).kernel().basis;
    if cycles.cols() == 0 {
        return Ok(false);
    }
    let degs = m.space().support();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..24 {
        let coeffs: Vec<Scalar> = (0..cycles.cols()).map(|_| field.from_i64(rng.gen_range(-4..=4))).collect();
        let f = cycles.mul_vec(&coeffs);
        if degs.iter().all(|&p| hom.block(0, &f, p).rank() == m.dim(p)) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Checks that the tree evaluates to `m` (as a module on the witness side),
/// either through a top-level retract or up to an explicit isomorphism.
pub fn verify_build_tree(m: &DgModule, w: &BuildTreeWitness) -> Result<()> {
    let (alg, target) = match w.side {
        Side::Left => (m.left_algebra().clone(), Arc::new(m.forget_right())),
        Side::Right => (m.right_algebra().clone(), Arc::new(m.forget_left())),
    };
    let mut ev = Eval {
        side: w.side,
        alg,
        target: target.clone(),
        maps: &w.maps,
        next: 0,
    };
    let x = ev.eval(&w.root)?;
    if matches!(w.root, BuildNode::Retract { module: None, .. }) || x.same_structure(&target) {
        return Ok(());
    }
    for n in x.space().support().into_iter().chain(target.space().support()) {
        if x.dim(n) != target.dim(n) {
            return Err(reject(
                0,
                format!("tree has dimension {} in degree {n}, the module has {}", x.dim(n), target.dim(n)),
            ));
        }
    }
    if find_isomorphism(w.side, x, target)? {
        Ok(())
    } else {
        Err(reject(0, "no isomorphism from the tree to the module was found"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::algebra::tests::{comb, truncated_poly, Q};
    use crate::dg::ModuleRules;

    fn witness(root: BuildNode, maps: &[(&str, BTreeMap<i64, Matrix>)]) -> BuildTreeWitness {
        BuildTreeWitness {
            name: "w".into(),
            side: Side::Left,
            root,
            maps: maps.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        }
    }

    fn sum_of_shifts(a: Arc<DgAlgebra>) -> DgModule {
        let r = DgModule::regular_left(a);
        DgModule::direct_sum(&[&r, &r.shift(2)]).unwrap()
    }

    #[test]
    fn sum_tree_accepted_in_either_order() {
        let a = Arc::new(truncated_poly(2, 0));
        let m = sum_of_shifts(a);
        let t1 = BuildNode::Sum(vec![BuildNode::Leaf, BuildNode::Shift(2, Box::new(BuildNode::Leaf))]);
        let t2 = BuildNode::Sum(vec![BuildNode::Shift(2, Box::new(BuildNode::Leaf)), BuildNode::Leaf]);
        verify_build_tree(&m, &witness(t1, &[])).unwrap();
        verify_build_tree(&m, &witness(t2, &[])).unwrap();
        let t3 = BuildNode::Sum(vec![BuildNode::Leaf, BuildNode::Shift(1, Box::new(BuildNode::Leaf))]);
        assert!(matches!(
            verify_build_tree(&m, &witness(t3, &[])),
            Err(Error::WitnessRejected { node: 0, .. })
        ));
    }

    #[test]
    fn retract_of_projective_summand() {
        // k x k: the first factor is a summand of the regular module
        let a = Arc::new(
            DgAlgebra::from_rules(
                Q,
                &crate::dg::AlgebraRules {
                    name: "kxk".into(),
                    basis: vec![("1".into(), 0), ("e".into(), 0)],
                    unit: Some("1".into()),
                    mul: vec![
                        ("1".into(), "1".into(), comb(&[(1, "1")])),
                        ("1".into(), "e".into(), comb(&[(1, "e")])),
                        ("e".into(), "1".into(), comb(&[(1, "e")])),
                        ("e".into(), "e".into(), comb(&[(1, "e")])),
                    ],
                    d: vec![],
                },
            )
            .unwrap(),
        );
        let k = Arc::new(DgAlgebra::ground(Q));
        let rules = ModuleRules {
            name: "P".into(),
            basis: vec![("m".into(), 0)],
            left_act: vec![
                ("1".into(), "m".into(), comb(&[(1, "m")])),
                ("e".into(), "m".into(), comb(&[(1, "m")])),
            ],
            ..Default::default()
        };
        let p = DgModule::from_rules(Q, a, k, &rules).unwrap();
        // P = A e, included as m -> e, projected by 1 -> m, e -> m
        let inc = BTreeMap::from([(0, Matrix::from_i64(Q, &[&[0], &[1]]))]);
        let proj = BTreeMap::from([(0, Matrix::from_i64(Q, &[&[1, 1]]))]);
        let good = BuildNode::Retract {
            include: "i".into(),
            project: "p".into(),
            homotopy: "h".into(),
            node: Box::new(BuildNode::Leaf),
            module: None,
        };
        let w = witness(good.clone(), &[("i", inc.clone()), ("p", proj), ("h", BTreeMap::new())]);
        verify_build_tree(&p, &w).unwrap();
        // projecting 1 -> 0 is not linear
        let bad = BTreeMap::from([(0, Matrix::from_i64(Q, &[&[0, 1]]))]);
        let w = witness(good, &[("i", inc), ("p", bad), ("h", BTreeMap::new())]);
        assert!(matches!(
            verify_build_tree(&p, &w),
            Err(Error::WitnessRejected { node: 0, .. })
        ));
    }

    #[test]
    fn cone_of_multiplication_by_x() {
        let a = Arc::new(truncated_poly(2, 0));
        let r = Arc::new(DgModule::regular_left(a));
        let x = BTreeMap::from([(0, Matrix::from_i64(Q, &[&[0, 0], &[1, 0]]))]);
        let m = DgModule::cone(&ModuleMap::new(r.clone(), r, x.clone()).unwrap()).unwrap();
        let tree = BuildNode::Cone {
            map: "x".into(),
            source: Box::new(BuildNode::Leaf),
            target: Box::new(BuildNode::Leaf),
        };
        verify_build_tree(&m, &witness(tree.clone(), &[("x", x)])).unwrap();
        let nonlinear = BTreeMap::from([(0, Matrix::from_i64(Q, &[&[1, 0], &[0, 0]]))]);
        assert!(matches!(
            verify_build_tree(&m, &witness(tree.clone(), &[("x", nonlinear)])),
            Err(Error::WitnessRejected { node: 0, .. })
        ));
        assert!(matches!(
            verify_build_tree(&m, &witness(tree, &[])),
            Err(Error::WitnessRejected { node: 0, .. })
        ));
    }
}
