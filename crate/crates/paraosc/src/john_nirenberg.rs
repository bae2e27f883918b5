//! Stopping-time decomposition for martingale families: the recursive
//! selection of maximal stopping cubes with exact half-measure,
//! exponential-tail, and pointwise bounds, the doubling bound on
//! individual family members, the `L^p` versus weak-`L^1` testing
//! comparability, and the equivalence of oscillation moduli across
//! exponents.

use serde::Serialize;

use crate::collection::CubeCollection;
use crate::error::{Error, Result};
use crate::func::{C64, SimpleFunction, Space};
use crate::paraproduct::localized_martingale_sum;
use crate::tol::EXACT_F64;
use crate::tree::{CubeId, DyadicTree};

/// The quantile used for the stopping constant `B`.
pub const STOPPING_GAMMA: f64 = 0.25;

/// A family `Q -> lambda_Q` over a cube collection: each function is
/// supported on its cube and constant on each collection child.
pub struct MartingaleFamily {
    collection: CubeCollection,
    lambdas: Vec<SimpleFunction>,
}

impl MartingaleFamily {
    pub fn new(
        space: Space,
        collection: CubeCollection,
        lambdas: Vec<SimpleFunction>,
    ) -> Result<Self> {
        if lambdas.len() != collection.len() {
            return Err(Error::LengthMismatch {
                expected: collection.len(),
                got: lambdas.len(),
            });
        }
        let tree = space.tree;
        for (&q, lambda) in collection.ids().iter().zip(&lambdas) {
            space.check_fn(lambda)?;
            let range = tree.leaf_range(q);
            for (i, v) in lambda.values().iter().enumerate() {
                if !range.contains(&i) && v.norm_sqr() != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "function for cube {} has support outside the cube",
                        q.0
                    )));
                }
            }
            for r in collection.collection_children(tree, q) {
                let child_range = tree.leaf_range(r);
                let first = lambda.values()[child_range.start];
                if lambda.values()[child_range].iter().any(|&v| v != first) {
                    return Err(Error::InvalidParameter(format!(
                        "function for cube {} is not constant on collection child {}",
                        q.0, r.0
                    )));
                }
            }
        }
        Ok(Self {
            collection,
            lambdas,
        })
    }

    /// The family `lambda_Q = D_Q b` over a collection of non-leaf
    /// cubes.
    pub fn from_martingale_differences(
        space: Space,
        b: &SimpleFunction,
        collection: &CubeCollection,
    ) -> Result<Self> {
        let mut lambdas = Vec::with_capacity(collection.len());
        for &q in collection.ids() {
            if space.tree.is_leaf(q) {
                return Err(Error::NoChildren(q.0));
            }
            lambdas.push(space.martingale_difference(b, q)?);
        }
        Self::new(space, collection.clone(), lambdas)
    }

    pub fn collection(&self) -> &CubeCollection {
        &self.collection
    }

    pub fn lambdas(&self) -> &[SimpleFunction] {
        &self.lambdas
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `C = sup_Q ||lambda_Q||_{L^infty(mu)}`.
    pub fn sup_linfty(&self, space: Space) -> f64 {
        let w = space.mu.weights();
        let mut sup = 0.0_f64;
        for lambda in &self.lambdas {
            for (i, v) in lambda.values().iter().enumerate() {
                if w[i] > 0.0 {
                    sup = sup.max(v.norm());
                }
            }
        }
        sup
    }

    /// Whether every member is constant on each of its dyadic
    /// children (vacuous for leaf members).
    pub fn is_dyadic_child_constant(&self, tree: &DyadicTree) -> bool {
        for (&q, lambda) in self.collection.ids().iter().zip(&self.lambdas) {
            if tree.is_leaf(q) {
                continue;
            }
            for child in tree.children(q) {
                let range = tree.leaf_range(child);
                let first = lambda.values()[range.start];
                if lambda.values()[range].iter().any(|&v| v != first) {
                    return false;
                }
            }
        }
        true
    }

    /// Per-level cumulative sums: entry `[level][x]` is
    /// `sum lambda_R(x)` over member ancestors `R` of the leaf `x`
    /// with `level(R) >= level`; restricted to a cube `Q` of that
    /// level this is the cumulative sum `sum_{R in C, R subset Q}
    /// lambda_R`.
    fn level_cums(&self, space: Space) -> Vec<Vec<C64>> {
        let tree = space.tree;
        let n = tree.leaf_count();
        let depth = tree.depth();
        let dim = tree.dim();
        let mut member_lambda = vec![usize::MAX; tree.cube_count()];
        for (idx, &q) in self.collection.ids().iter().enumerate() {
            member_lambda[q.0 as usize] = idx;
        }
        let mut cums = vec![vec![C64::new(0.0, 0.0); n]; depth + 2];
        for level in (0..=depth).rev() {
            let shift = dim * (depth - level);
            let (head, tail) = cums.split_at_mut(level + 1);
            let coarser = &tail[0];
            for (x, slot) in head[level].iter_mut().enumerate() {
                let q = tree.id_at(level, x >> shift);
                let mut v = coarser[x];
                let idx = member_lambda[q.0 as usize];
                if idx != usize::MAX {
                    v += self.lambdas[idx].values()[x];
                }
                *slot = v;
            }
        }
        cums.truncate(depth + 1);
        cums
    }
}

/// Direct evaluation of `sum_{R in C, R subset Q} lambda_R`.
pub fn cumulative_sum(family: &MartingaleFamily, space: Space, q: CubeId) -> SimpleFunction {
    let mut out = SimpleFunction::zeros(space.tree);
    for (&r, lambda) in family.collection.ids().iter().zip(&family.lambdas) {
        if space.tree.contains(q, r) {
            out.add_assign(lambda);
        }
    }
    out
}

/// `B_Q`: the `L^infty_gamma` quasi-norm of the cumulative sum on `Q`.
pub fn b_gamma_constant(
    family: &MartingaleFamily,
    space: Space,
    q: CubeId,
    gamma: f64,
) -> Result<f64> {
    let cum = cumulative_sum(family, space, q);
    space.linfty_gamma_norm(&cum, q, gamma)
}

/// One selected stopping cube; `children` index into the forest's node
/// list.
#[derive(Clone, Debug, Serialize)]
pub struct StoppingNode {
    pub cube: CubeId,
    pub b_local: f64,
    pub generation: usize,
    pub children: Vec<usize>,
}

/// The recursive stopping decomposition below one root cube, with the
/// constants it was built from.
#[derive(Clone, Debug, Serialize)]
pub struct StoppingForest {
    pub root: CubeId,
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
    pub nodes: Vec<StoppingNode>,
    pub generations: Vec<Vec<CubeId>>,
    gen: Vec<u32>,
}

impl StoppingForest {
    /// Number of stopping ancestors of the leaf with index `x`.
    pub fn gen_at(&self, x: usize) -> u32 {
        self.gen[x]
    }

    /// The generation count as an integer-valued function.
    pub fn gen_function(&self, tree: &DyadicTree) -> SimpleFunction {
        let values = self.gen.iter().map(|&g| C64::new(g as f64, 0.0)).collect();
        SimpleFunction::new(tree, values).expect("generation vector has leaf length")
    }

    pub fn max_generation(&self) -> usize {
        self.generations.len()
    }
}

/// Builds the stopping forest below `f` with the default quantile.
pub fn build_stopping_forest(
    family: &MartingaleFamily,
    space: Space,
    f: CubeId,
) -> Result<StoppingForest> {
    build_stopping_forest_with_gamma(family, space, f, STOPPING_GAMMA)
}

/// Builds the forest: `B` is the supremum of `B_Q` over all cubes, and
/// the stopping children of a node `F` are the maximal members `F'`
/// strictly inside `F` on which `|sum_{F' strict subset Q subset F}
/// lambda_Q| > 2B`; the selection is iterated inside every child.
pub fn build_stopping_forest_with_gamma(
    family: &MartingaleFamily,
    space: Space,
    f: CubeId,
    gamma: f64,
) -> Result<StoppingForest> {
    let tree = space.tree;
    let cums = family.level_cums(space);
    let b_local = |q: CubeId| -> Result<f64> {
        let level = tree.level_of(q);
        let cum = SimpleFunction::new(tree, cums[level].clone())?;
        space.linfty_gamma_norm(&cum, q, gamma)
    };
    let mut b = 0.0_f64;
    for q in tree.all_cubes() {
        b = b.max(b_local(q)?);
    }
    let c = family.sup_linfty(space);

    let mut nodes = vec![StoppingNode {
        cube: f,
        b_local: b_local(f)?,
        generation: 0,
        children: Vec::new(),
    }];
    let mut generations: Vec<Vec<CubeId>> = Vec::new();
    let mut gen = vec![0u32; tree.leaf_count()];
    let mut stack = vec![0usize];
    while let Some(node_idx) = stack.pop() {
        let parent_cube = nodes[node_idx].cube;
        let parent_gen = nodes[node_idx].generation;
        let parent_level = tree.level_of(parent_cube);
        let mut accepted: Vec<CubeId> = Vec::new();
        for &q in family.collection.ids() {
            if q == parent_cube || !tree.contains(parent_cube, q) {
                continue;
            }
            if accepted.iter().any(|&a| tree.contains(a, q)) {
                continue;
            }
            let x = tree.leaf_range(q).start;
            let level = tree.level_of(q);
            let between = cums[parent_level][x] - cums[level][x];
            if between.norm() > 2.0 * b {
                accepted.push(q);
            }
        }
        for q in accepted {
            let child_gen = parent_gen + 1;
            if generations.len() < child_gen {
                generations.push(Vec::new());
            }
            generations[child_gen - 1].push(q);
            for x in tree.leaf_range(q) {
                gen[x] = child_gen as u32;
            }
            let child_idx = nodes.len();
            nodes.push(StoppingNode {
                cube: q,
                b_local: b_local(q)?,
                generation: child_gen,
                children: Vec::new(),
            });
            nodes[node_idx].children.push(child_idx);
            stack.push(child_idx);
        }
    }
    Ok(StoppingForest {
        root: f,
        b,
        c,
        gamma,
        nodes,
        generations,
        gen,
    })
}

/// One row of the exponential-tail table.
#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub k: usize,
    pub mass: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct JnBoundsReport {
    pub ok_half: bool,
    pub ok_pointwise: bool,
    pub ok_tail: bool,
    pub tail: Vec<TailRow>,
}

/// Verifies the three exact bounds of the decomposition: half-measure
/// at every node, the pointwise bound `(2B + C)(1 + gen)` on the
/// cumulative sum, and the tail `mu(gen >= k) <= 2^{-k} mu(F)`.
pub fn verify_jn_bounds(
    forest: &StoppingForest,
    family: &MartingaleFamily,
    space: Space,
) -> JnBoundsReport {
    let tree = space.tree;
    let mu = space.mu;
    let slack = EXACT_F64 * (1.0 + mu.total());

    let mut ok_half = true;
    for node in &forest.nodes {
        let child_mass: f64 = node
            .children
            .iter()
            .map(|&i| mu.mass(forest.nodes[i].cube))
            .sum();
        ok_half &= child_mass <= mu.mass(node.cube) / 2.0 + slack;
    }

    let cum = cumulative_sum(family, space, forest.root);
    let w = mu.weights();
    let scale = 2.0 * forest.b + forest.c;
    let mut ok_pointwise = true;
    for x in tree.leaf_range(forest.root) {
        if w[x] > 0.0 {
            let bound = scale * (1.0 + forest.gen_at(x) as f64);
            ok_pointwise &= cum.values()[x].norm() <= bound + EXACT_F64;
        }
    }

    let root_mass = mu.mass(forest.root);
    let max_gen = forest.max_generation();
    let mut tail = Vec::with_capacity(max_gen + 2);
    let mut ok_tail = true;
    for k in 0..=max_gen + 1 {
        // Empty sums come out as -0.0; add zero to normalize the sign.
        let mass: f64 = tree
            .leaf_range(forest.root)
            .filter(|&x| forest.gen_at(x) as usize >= k)
            .map(|x| w[x])
            .sum::<f64>()
            + 0.0;
        let bound = 0.5_f64.powi(k as i32) * root_mass;
        ok_tail &= mass <= bound + slack;
        tail.push(TailRow { k, mass, bound });
    }

    JnBoundsReport {
        ok_half,
        ok_pointwise,
        ok_tail,
        tail,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Jn2Row {
    pub cube: CubeId,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Jn2Report {
    pub doubling: f64,
    pub rows: Vec<Jn2Row>,
    pub ok: bool,
}

/// Doubling bound on the individual members: for every member `Q`,
/// `||lambda_Q||_infty <= 2 sup_{R in C, R subset Q}` of the
/// `L^infty_{gamma/2}` quasi-norm of the cumulative sum on `R`, where
/// `gamma` is the dyadic doubling constant of the measure.
pub fn jn2_doubling_bound(family: &MartingaleFamily, space: Space) -> Result<Jn2Report> {
    let doubling = space.doubling_constant();
    if doubling <= 0.0 {
        return Err(Error::NotDoubling);
    }
    if !family.is_dyadic_child_constant(space.tree) {
        return Err(Error::InvalidParameter(
            "doubling bound needs members constant on dyadic children".into(),
        ));
    }
    let tree = space.tree;
    let cums = family.level_cums(space);
    let members = family.collection.ids();
    let mut member_norms = Vec::with_capacity(members.len());
    for &r in members {
        let level = tree.level_of(r);
        let cum = SimpleFunction::new(tree, cums[level].clone())?;
        member_norms.push(space.linfty_gamma_norm(&cum, r, doubling / 2.0)?);
    }
    let w = space.mu.weights();
    let mut rows = Vec::with_capacity(members.len());
    let mut ok = true;
    for (&q, lambda) in members.iter().zip(&family.lambdas) {
        let mut lhs = 0.0_f64;
        for (i, v) in lambda.values().iter().enumerate() {
            if w[i] > 0.0 {
                lhs = lhs.max(v.norm());
            }
        }
        let mut sup = 0.0_f64;
        for (&r, &norm) in members.iter().zip(&member_norms) {
            if tree.contains(q, r) {
                sup = sup.max(norm);
            }
        }
        let rhs = 2.0 * sup;
        ok &= lhs <= rhs + EXACT_F64;
        rows.push(Jn2Row { cube: q, lhs, rhs });
    }
    Ok(Jn2Report { doubling, rows, ok })
}

#[derive(Clone, Debug, Serialize)]
pub struct Jn3Report {
    pub lp_side: f64,
    pub weak_side: f64,
    pub ratio: f64,
    pub violation: bool,
}

/// Compares the `L^p` testing supremum of the cumulative sums with the
/// normalized weak-`L^1` supremum over the members. A zero family has
/// ratio 1; a vanishing weak side with a positive strong side is
/// flagged instead of raised.
pub fn jn3_comparability(family: &MartingaleFamily, space: Space, p: f64) -> Jn3Report {
    let mu = space.mu;
    let mut lp_side = 0.0_f64;
    let mut weak_side = 0.0_f64;
    for &q in family.collection.ids() {
        let mass = mu.mass(q);
        if mass <= 0.0 {
            continue;
        }
        let cum = cumulative_sum(family, space, q);
        lp_side = lp_side.max(space.lp_norm(&cum, p, Some(q)) / mass.powf(1.0 / p));
        weak_side = weak_side.max(space.avg_weak_l1_norm(&cum, q));
    }
    let (ratio, violation) = if weak_side > 0.0 {
        (lp_side / weak_side, false)
    } else if lp_side > 0.0 {
        (f64::INFINITY, true)
    } else {
        (1.0, false)
    };
    Jn3Report {
        lp_side,
        weak_side,
        ratio,
        violation,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VmoEquivalenceRow {
    pub m: f64,
    pub heavy_p: f64,
    pub heavy_1: f64,
    pub light_p: f64,
    pub light_1: f64,
    pub distant_p: f64,
    pub distant_1: f64,
    pub ratio_heavy: f64,
    pub ratio_light: f64,
    pub ratio_distant: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VmoEquivalenceReport {
    pub p: f64,
    pub rows: Vec<VmoEquivalenceRow>,
    pub max_ratio: f64,
    pub holder_ok: bool,
}

fn modulus_ratio(num: f64, den: f64) -> f64 {
    if den > EXACT_F64 {
        num / den
    } else if num > EXACT_F64 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Compares the oscillation moduli at exponent `p` with those at
/// exponent 1 threshold by threshold: the `p`-moduli dominate exactly
/// (Hölder), and their ratio is the empirical equivalence constant.
pub fn vmo_p_equivalence(
    space: Space,
    b: &SimpleFunction,
    p: f64,
    thresholds: &[f64],
) -> Result<VmoEquivalenceReport> {
    space.check_fn(b)?;
    let rows_p = space.vmo_moduli(b, p, thresholds);
    let rows_1 = space.vmo_moduli(b, 1.0, thresholds);
    let mut rows = Vec::with_capacity(thresholds.len());
    let mut max_ratio = 0.0_f64;
    let mut holder_ok = true;
    for (rp, r1) in rows_p.iter().zip(&rows_1) {
        let row = VmoEquivalenceRow {
            m: rp.m,
            heavy_p: rp.heavy,
            heavy_1: r1.heavy,
            light_p: rp.light,
            light_1: r1.light,
            distant_p: rp.distant,
            distant_1: r1.distant,
            ratio_heavy: modulus_ratio(rp.heavy, r1.heavy),
            ratio_light: modulus_ratio(rp.light, r1.light),
            ratio_distant: modulus_ratio(rp.distant, r1.distant),
        };
        holder_ok &= r1.heavy <= rp.heavy + EXACT_F64
            && r1.light <= rp.light + EXACT_F64
            && r1.distant <= rp.distant + EXACT_F64;
        for ratio in [row.ratio_heavy, row.ratio_light, row.ratio_distant] {
            if ratio.is_finite() {
                max_ratio = max_ratio.max(ratio);
            }
        }
        rows.push(row);
    }
    Ok(VmoEquivalenceReport {
        p,
        rows,
        max_ratio,
        holder_ok,
    })
}

/// Weak-`L^1` versus `L^1` oscillation data at `Q` for the localized
/// martingale sum of `b` over a subcollection: returns
/// `(weak, osc_1, weak / osc_1)` with the ratio defaulting to 1 when
/// the oscillation vanishes.
pub fn burkholder_ratio(
    space: Space,
    b: &SimpleFunction,
    collection: &CubeCollection,
    q: CubeId,
) -> Result<(f64, f64, f64)> {
    let sum = localized_martingale_sum(space, b, collection, q)?;
    let weak = space.avg_weak_l1_norm(&sum, q);
    let osc = space.osc(b, q, 1.0);
    let ratio = if osc > EXACT_F64 {
        weak / osc
    } else if weak > EXACT_F64 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok((weak, osc, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureWeights;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    /// `lambda_root = 1/2` on the left half, `-1/2` on the right half.
    fn root_haar_family(tree: &DyadicTree, space: Space) -> MartingaleFamily {
        let mut values = vec![re(0.0); tree.leaf_count()];
        for i in tree.leaf_range(tree.id_at(1, 0)) {
            values[i] = re(0.5);
        }
        for i in tree.leaf_range(tree.id_at(1, 1)) {
            values[i] = re(-0.5);
        }
        let lambda = SimpleFunction::new(tree, values).unwrap();
        let coll = CubeCollection::new(tree, [tree.root()]).unwrap();
        MartingaleFamily::new(space, coll, vec![lambda]).unwrap()
    }

    /// Chain family on the leftmost cubes: `lambda_{Q_k} = 1_{Q_{k+1}}`
    /// for levels `k = 0..depth-1`.
    fn leftmost_chain_family(tree: &DyadicTree, space: Space) -> MartingaleFamily {
        let depth = tree.depth();
        let ids: Vec<CubeId> = (0..depth).map(|k| tree.id_at(k, 0)).collect();
        let lambdas: Vec<SimpleFunction> = (0..depth)
            .map(|k| SimpleFunction::indicator(tree, tree.id_at(k + 1, 0)))
            .collect();
        let coll = CubeCollection::new(tree, ids).unwrap();
        MartingaleFamily::new(space, coll, lambdas).unwrap()
    }

    fn random_family(
        rng: &mut ChaCha8Rng,
        tree: &DyadicTree,
        space: Space,
    ) -> MartingaleFamily {
        let members: Vec<CubeId> = tree
            .non_leaf_cubes()
            .into_iter()
            .filter(|_| rng.random_range(0.0..1.0) < 0.6)
            .collect();
        let coll = CubeCollection::new(tree, members).unwrap();
        let lambdas = coll
            .ids()
            .iter()
            .map(|&q| {
                let mut values = vec![re(0.0); tree.leaf_count()];
                for child in tree.children(q) {
                    let c = C64::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    );
                    for i in tree.leaf_range(child) {
                        values[i] = c;
                    }
                }
                SimpleFunction::new(tree, values).unwrap()
            })
            .collect();
        MartingaleFamily::new(space, coll, lambdas).unwrap()
    }

    #[test]
    fn family_validation_rejects_bad_support_and_nonconstant_children() {
        let tree = DyadicTree::unit(2);
        let mu = MeasureWeights::lebesgue(&tree);
        let space = Space::new(&tree, &mu).unwrap();

        let coll = CubeCollection::new(&tree, [tree.id_at(1, 0)]).unwrap();
        let escaped = SimpleFunction::indicator(&tree, tree.id_at(1, 1));
        assert!(
            MartingaleFamily::new(space, coll.clone(), vec![escaped]).is_err(),
            "support outside the cube is rejected"
        );

        let coll2 = CubeCollection::new(&tree, [tree.root(), tree.id_at(1, 0)]).unwrap();
        let jagged = SimpleFunction::from_real(&tree, &[1.0, 2.0, 0.0, 0.0]).unwrap();
        let inner = SimpleFunction::from_real(&tree, &[1.0, -1.0, 0.0, 0.0]).unwrap();
        assert!(
            MartingaleFamily::new(space, coll2.clone(), vec![jagged, inner.clone()]).is_err(),
            "root member must be constant on the collection child [0, 1/2)"
        );

        let flat = SimpleFunction::from_real(&tree, &[3.0, 3.0, 0.0, 0.0]).unwrap();
        assert!(
            MartingaleFamily::new(space, coll2, vec![flat, inner]).is_ok(),
            "constant-on-child family passes"
        );
    }

    #[test]
    fn b_gamma_on_simple_families() {
        let tree = DyadicTree::unit(3);
        let mu = MeasureWeights::lebesgue(&tree);
        let space = Space::new(&tree, &mu).unwrap();

        let empty = MartingaleFamily::new(space, CubeCollection::empty(&tree), vec![]).unwrap();
        assert_eq!(
            b_gamma_constant(&empty, space, tree.root(), 0.25).unwrap(),
            0.0,
            "zero family has zero stopping constant"
        );

        let haar = root_haar_family(&tree, space);
        let b = b_gamma_constant(&haar, space, tree.root(), 0.25).unwrap();
        assert!(
            (b - 0.5).abs() < EXACT_F64,
            "half-half distribution needs the full sup, got {b}"
        );

        let sup = haar.sup_linfty(space);
        assert!(b <= sup + EXACT_F64, "quasi-norm is dominated by the sup");
    }

    #[test]
    fn forest_without_stopping_cubes_has_generation_zero() {
        let tree = DyadicTree::unit(3);
        let mu = MeasureWeights::lebesgue(&tree);
        let space = Space::new(&tree, &mu).unwrap();
        let haar = root_haar_family(&tree, space);
        let forest = build_stopping_forest(&haar, space, tree.root()).unwrap();
        assert_eq!(forest.nodes.len(), 1, "only the root node");
        assert!(forest.generations.is_empty(), "no stopping generations");
        assert!(
            (0..tree.leaf_count()).all(|x| forest.gen_at(x) == 0),
            "generation count is identically zero"
        );
        let report = verify_jn_bounds(&forest, &haar, space);
        assert!(
            report.ok_half && report.ok_pointwise && report.ok_tail,
            "all bounds hold on the trivial forest"
        );
    }

    #[test]
    fn zero_family_gives_empty_forest() {
        let tree = DyadicTree::unit(4);
        let mu = MeasureWeights::lebesgue(&tree);
        let space = Space::new(&tree, &mu).unwrap();
        let empty = MartingaleFamily::new(space, CubeCollection::empty(&tree), vec![]).unwrap();
        let forest = build_stopping_forest(&empty, space, tree.root()).unwrap();
        assert_eq!(forest.b, 0.0, "stopping constant vanishes");
        assert_eq!(forest.c, 0.0, "sup norm vanishes");
        assert!(forest.generations.is_empty(), "nothing stops");
    }

    #[test]
    fn chain_family_produces_the_expected_generations() {
        let tree = DyadicTree::unit(8);
        let mu = MeasureWeights::lebesgue(&tree);
        let space = Space::new(&tree, &mu).unwrap();
        let family = leftmost_chain_family(&tree, space);
        let forest = build_stopping_forest(&family, space, tree.root()).unwrap();
        assert!((forest.b - 1.0).abs() < EXACT_F64, "B = 1, got {}", forest.b);
        assert!((forest.c - 1.0).abs() < EXACT_F64, "C = 1, got {}", forest.c);
        assert_eq!(
            forest.generations,
            vec![vec![tree.id_at(3, 0)], vec![tree.id_at(6, 0)]],
            "stopping fires when the chain sum first exceeds 2B = 2"
        );
        let report = verify_jn_bounds(&forest, &family, space);
        assert!(report.ok_half, "children cover at most half the parent");
        assert!(report.ok_pointwise, "cumulative sum obeys (2B+C)(1+gen)");
        assert!(report.ok_tail, "tail masses halve per generation");
        assert!(
            (report.tail[1].mass - 0.125).abs() < EXACT_F64,
            "generation 1 covers exactly mu(Q_3) = 1/8"
        );
        assert!(
            (report.tail[2].mass - 1.0 / 64.0).abs() < EXACT_F64,
            "generation 2 covers exactly mu(Q_6) = 1/64"
        );
    }

    #[test]
    fn jn_bounds_hold_on_random_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for trial in 0..25 {
            let depth = 4 + (trial % 3);
            let tree = DyadicTree::unit(depth);
            let w: Vec<f64> = (0..tree.leaf_count())
                .map(|_| rng.random_range(0.05..1.0))
                .collect();
            let mu = MeasureWeights::new(&tree, w).unwrap();
            let space = Space::new(&tree, &mu).unwrap();
            let family = random_family(&mut rng, &tree, space);
            let forest = build_stopping_forest(&family, space, tree.root()).unwrap();
            let report = verify_jn_bounds(&forest, &family, space);
            assert!(
                report.ok_half && report.ok_pointwise && report.ok_tail,
                "trial {trial}: half {}, pointwise {}, tail {}",
                report.ok_half,
                report.ok_pointwise,
                report.ok_tail
            );
        }
    }

    #[test]
    fn doubling_bound_on_the_root_haar() {
        let tree = DyadicTree::unit(3);
        let mu = MeasureWeights::lebesgue(&tree);
        let space = Space::new(&tree, &mu).unwrap();
        let family = root_haar_family(&tree, space);
        let report = jn2_doubling_bound(&family, space).unwrap();
        assert!((report.doubling - 0.5).abs() < EXACT_F64, "Lebesgue halves");
        assert_eq!(report.rows.len(), 1);
        assert!(
            (report.rows[0].lhs - 0.5).abs() < EXACT_F64,
            "sup norm of the Haar member is 1/2"
        );
        assert!(
            (report.rows[0].rhs - 1.0).abs() < EXACT_F64,
            "bound is twice the quarter-quantile norm"
        );
        assert!(report.ok, "doubling bound holds");
    }

    #[test]
    fn doubling_bound_across_random_doubling_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for trial in 0..25 {
            let tree = DyadicTree::unit(4);
            let w: Vec<f64> = (0..tree.leaf_count())
                .map(|_| rng.random_range(0.5..1.0))
                .collect();
            let mu = MeasureWeights::new(&tree, w).unwrap();
            let space = Space::new(&tree, &mu).unwrap();
            let family = random_family(&mut rng, &tree, space);
            let report = jn2_doubling_bound(&family, space).unwrap();
            assert!(report.doubling > 0.0, "random positive weights double");
            assert!(report.ok, "trial {trial}: member bound violated");
        }
    }

    #[test]
    fn doubling_bound_rejects_degenerate_measures() {
        let tree = DyadicTree::unit(2);
        let mu = MeasureWeights::new(&tree, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let space = Space::new(&tree, &mu).unwrap();
        let family = MartingaleFamily::new(space, CubeCollection::empty(&tree), vec![]).unwrap();
        assert!(
            matches!(jn2_doubling_bound(&family, space), Err(Error::NotDoubling)),
            "vanishing child mass is not doubling"
        );
    }

    #[test]
    fn jn3_closed_form_on_the_root_haar() {
        let tree = DyadicTree::unit(3);
        let mu = MeasureWeights::lebesgue(&tree);
        let space = Space::new(&tree, &mu).unwrap();
        let family = root_haar_family(&tree, space);
        let report = jn3_comparability(&family, space, 2.0);
        assert!((report.lp_side - 0.5).abs() < EXACT_F64, "L^2 side is 1/2");
        assert!((report.weak_side - 0.5).abs() < EXACT_F64, "weak side is 1/2");
        assert!((report.ratio - 1.0).abs() < EXACT_F64, "ratio is 1");
        assert!(!report.violation);

        let empty = MartingaleFamily::new(space, CubeCollection::empty(&tree), vec![]).unwrap();
        let zero = jn3_comparability(&empty, space, 2.0);
        assert_eq!(
            (zero.lp_side, zero.weak_side, zero.ratio),
            (0.0, 0.0, 1.0),
            "zero family reports unit ratio"
        );
    }

    #[test]
    fn vmo_equivalence_moduli_obey_holder() {
        let tree = DyadicTree::unit(5);
        let mu = MeasureWeights::lebesgue(&tree);
        let space = Space::new(&tree, &mu).unwrap();

        let constant = SimpleFunction::constant(&tree, re(4.0));
        let report = vmo_p_equivalence(space, &constant, 2.0, &[2.0, 4.0]).unwrap();
        assert!(report.holder_ok, "zero moduli satisfy Hölder trivially");
        for row in &report.rows {
            assert_eq!(
                (row.ratio_heavy, row.ratio_light, row.ratio_distant),
                (1.0, 1.0, 1.0),
                "vanishing moduli report unit ratios"
            );
        }

        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for _ in 0..10 {
            let values: Vec<f64> = (0..tree.leaf_count())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let b = SimpleFunction::from_real(&tree, &values).unwrap();
            let report = vmo_p_equivalence(space, &b, 2.0, &[1.0, 2.0, 4.0, 8.0]).unwrap();
            assert!(report.holder_ok, "1-moduli never exceed 2-moduli");
            assert!(report.max_ratio.is_finite() && report.max_ratio >= 1.0 - EXACT_F64);
        }
    }

    #[test]
    fn burkholder_ratio_is_at_most_one_for_the_full_collection() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let tree = DyadicTree::unit(4);
        let w: Vec<f64> = (0..tree.leaf_count())
            .map(|_| rng.random_range(0.05..1.0))
            .collect();
        let mu = MeasureWeights::new(&tree, w).unwrap();
        let space = Space::new(&tree, &mu).unwrap();
        let coll = CubeCollection::non_leaf(&tree);
        for _ in 0..10 {
            let values: Vec<f64> = (0..tree.leaf_count())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            let b = SimpleFunction::from_real(&tree, &values).unwrap();
            for q in tree.non_leaf_cubes() {
                let (weak, osc, ratio) = burkholder_ratio(space, &b, &coll, q).unwrap();
                assert!(
                    weak <= osc + EXACT_F64,
                    "weak norm of b - <b>_Q exceeds its L^1 norm"
                );
                assert!(ratio <= 1.0 + EXACT_F64, "full-collection ratio above 1");
            }
        }
    }

    #[test]
    fn gen_function_matches_gen_counts() {
        let tree = DyadicTree::unit(8);
        let mu = MeasureWeights::lebesgue(&tree);
        let space = Space::new(&tree, &mu).unwrap();
        let family = leftmost_chain_family(&tree, space);
        let forest = build_stopping_forest(&family, space, tree.root()).unwrap();
        let gen_fn = forest.gen_function(&tree);
        for x in 0..tree.leaf_count() {
            assert_eq!(
                gen_fn.values()[x].re as u32,
                forest.gen_at(x),
                "function view agrees with the counter"
            );
        }
    }
}

