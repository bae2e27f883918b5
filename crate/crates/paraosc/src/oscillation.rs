//! Mean oscillation, its suprema, and the cube partitions driven by
//! mass and distance thresholds.
//!
//! The oscillation of `b` over a cube is the `L^p` average of
//! `b - <b>_Q` with respect to the normalized measure on the cube.
//! Taking sups over cube families filtered by mass or distance gives
//! the three decay moduli; the partition helpers split a collection
//! into the pieces those filters isolate.

use serde::Serialize;

use crate::collection::CubeCollection;
use crate::error::{Error, Result};
use crate::func::{Space, SimpleFunction};
use crate::parallel;
use crate::tree::CubeId;

/// Decay moduli at one threshold `m`: sup of oscillation over cubes of
/// mass at least `m` (`heavy`), mass at most `1/m` (`light`), and
/// distance from the origin at least `m` (`distant`). Sups over empty
/// families are 0.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ModuliRow {
    pub m: f64,
    pub heavy: f64,
    pub light: f64,
    pub distant: f64,
}

/// A collection split by mass thresholds: `light` holds members of
/// mass below `1/m`, `heavy` those above `m`, `mid` the rest.
#[derive(Clone, Debug)]
pub struct MeasureSplit {
    pub light: CubeCollection,
    pub mid: CubeCollection,
    pub heavy: CubeCollection,
}

/// A collection split against a set of anchor cubes: `inside` holds
/// members contained in an anchor, `distant` members disjoint from
/// every anchor, and `outside` the remaining members, which each
/// strictly contain an anchor. `chains[j]` lists the outside members
/// assigned to `anchors[j]`, coarse to fine; each chain is totally
/// ordered by inclusion.
#[derive(Clone, Debug)]
pub struct PartitionReduction {
    pub anchors: Vec<CubeId>,
    pub inside: CubeCollection,
    pub distant: CubeCollection,
    pub outside: CubeCollection,
    pub chains: Vec<Vec<CubeId>>,
}

impl<'a> Space<'a> {
    /// `L^p` oscillation of `b` over `q` against the normalized
    /// measure; 0 on cubes of zero mass.
    pub fn osc(&self, b: &SimpleFunction, q: CubeId, p: f64) -> f64 {
        debug_assert!(p >= 1.0 && p.is_finite(), "p must be in [1, inf)");
        let mass = self.mu.mass(q);
        if mass == 0.0 {
            return 0.0;
        }
        let avg = self.average(b, q);
        let mut sum = 0.0;
        for i in self.tree.leaf_range(q) {
            let w = self.mu.leaf(i);
            if w > 0.0 {
                sum += (b.values()[i] - avg).norm().powf(p) * w;
            }
        }
        (sum / mass).powf(1.0 / p)
    }

    /// Oscillation of `b` at every cube, indexed by cube id.
    pub fn oscillations(&self, b: &SimpleFunction, p: f64) -> Vec<f64> {
        parallel::map_indexed(self.tree.cube_count(), |i| {
            self.osc(b, CubeId(i as u32), p)
        })
    }

    /// Sup of oscillation over all cubes.
    pub fn bmo_norm(&self, b: &SimpleFunction, p: f64) -> f64 {
        parallel::sup_or_zero(&self.tree.all_cubes(), |&q| self.osc(b, q, p))
    }

    /// Sup of oscillation over the members of a collection.
    pub fn bmo_norm_over(&self, b: &SimpleFunction, p: f64, coll: &CubeCollection) -> f64 {
        parallel::sup_or_zero(coll.ids(), |&q| self.osc(b, q, p))
    }

    /// Decay moduli of `b` at each threshold, one row per threshold.
    pub fn vmo_moduli(&self, b: &SimpleFunction, p: f64, thresholds: &[f64]) -> Vec<ModuliRow> {
        let osc = self.oscillations(b, p);
        let cubes = self.tree.all_cubes();
        parallel::map_slice(thresholds, |&m| {
            let mut heavy = 0.0f64;
            let mut light = 0.0f64;
            let mut distant = 0.0f64;
            for &q in &cubes {
                let o = osc[q.0 as usize];
                let mass = self.mu.mass(q);
                if mass >= m {
                    heavy = heavy.max(o);
                }
                if mass <= 1.0 / m {
                    light = light.max(o);
                }
                if self.tree.dist_at_least(q, m) {
                    distant = distant.max(o);
                }
            }
            ModuliRow {
                m,
                heavy,
                light,
                distant,
            }
        })
    }

    /// Smallest child-to-parent mass ratio over parents of positive
    /// mass; 1 when no such parent exists. A measure is `g`-doubling
    /// exactly when this constant is at least `g`.
    pub fn doubling_constant(&self) -> f64 {
        let mut inf = 1.0f64;
        let mut seen = false;
        for q in self.tree.non_leaf_cubes() {
            let mass = self.mu.mass(q);
            if mass == 0.0 {
                continue;
            }
            seen = true;
            for c in self.tree.children(q) {
                inf = inf.min(self.mu.mass(c) / mass);
            }
        }
        if seen {
            inf
        } else {
            1.0
        }
    }

    /// Split `base` by mass: below `1/m`, between `1/m` and `m`
    /// inclusive, above `m`. Requires `m >= 1`; `m = inf` puts every
    /// member in `mid`.
    pub fn partition_by_measure(&self, base: &CubeCollection, m: f64) -> Result<MeasureSplit> {
        if m.is_nan() || m < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "mass threshold must be at least 1, got {m}"
            )));
        }
        let lo = 1.0 / m;
        let mut light = vec![false; self.tree.cube_count()];
        let mut mid = vec![false; self.tree.cube_count()];
        let mut heavy = vec![false; self.tree.cube_count()];
        for &q in base.ids() {
            let mass = self.mu.mass(q);
            let slot = if mass < lo {
                &mut light
            } else if mass > m {
                &mut heavy
            } else {
                &mut mid
            };
            slot[q.0 as usize] = true;
        }
        Ok(MeasureSplit {
            light: CubeCollection::from_mask(light),
            mid: CubeCollection::from_mask(mid),
            heavy: CubeCollection::from_mask(heavy),
        })
    }

    /// Maximal cubes all of whose leaves sit at distance below `m`
    /// from the origin. Their union covers exactly the leaves within
    /// distance `m`, with as few cubes as possible.
    pub fn default_anchors(&self, m: f64) -> Vec<CubeId> {
        let tree = self.tree;
        let qualifies: Vec<bool> = {
            // a cube qualifies iff its farthest-reaching leaf is near
            let leaf_near: Vec<bool> = parallel::map_indexed(tree.leaf_count(), |i| {
                !tree.dist_at_least(tree.leaf_id(i), m)
            });
            parallel::map_indexed(tree.cube_count(), |i| {
                tree.leaf_range(CubeId(i as u32)).all(|j| leaf_near[j])
            })
        };
        let mut anchors = Vec::new();
        let mut stack = vec![tree.root()];
        while let Some(q) = stack.pop() {
            if qualifies[q.0 as usize] {
                anchors.push(q);
            } else if !tree.is_leaf(q) {
                // maximal qualifying cubes sit strictly below q
                let mut kids = tree.children(q);
                kids.reverse();
                stack.extend(kids);
            }
        }
        anchors.sort_by_key(|q| q.0);
        anchors
    }

    /// Split `base` against `anchors`. Every member lands in exactly
    /// one of `inside`, `distant`, or `outside`; each outside member
    /// strictly contains at least one anchor and joins the chain of
    /// the first (lowest id) anchor it contains.
    pub fn partition_reduction(
        &self,
        base: &CubeCollection,
        anchors: &[CubeId],
    ) -> PartitionReduction {
        let tree = self.tree;
        let n = tree.cube_count();
        let mut inside = vec![false; n];
        let mut distant = vec![false; n];
        let mut outside = vec![false; n];
        let mut chains = vec![Vec::new(); anchors.len()];
        for &q in base.ids() {
            if anchors.iter().any(|&a| tree.contains(a, q)) {
                inside[q.0 as usize] = true;
            } else if let Some(j) = anchors
                .iter()
                .position(|&a| tree.contains(q, a))
            {
                outside[q.0 as usize] = true;
                chains[j].push(q);
            } else {
                distant[q.0 as usize] = true;
            }
        }
        PartitionReduction {
            anchors: anchors.to_vec(),
            inside: CubeCollection::from_mask(inside),
            distant: CubeCollection::from_mask(distant),
            outside: CubeCollection::from_mask(outside),
            chains,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureWeights;
    use crate::tree::DyadicTree;
    use approx::assert_abs_diff_eq;

    fn spike_space() -> (DyadicTree, MeasureWeights) {
        let tree = DyadicTree::unit(2);
        let mu = MeasureWeights::lebesgue(&tree);
        (tree, mu)
    }

    #[test]
    fn oscillation_of_indicator_spike() {
        let (tree, mu) = spike_space();
        let sp = Space::new(&tree, &mu).unwrap();
        let b = SimpleFunction::from_real(&tree, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        // oracle: root average 1/4, so the L^1 oscillation over the
        // root is |1 - 1/4|/4 + 3 * |0 - 1/4|/4 = 3/8
        assert_abs_diff_eq!(sp.osc(&b, tree.root(), 1.0), 3.0 / 8.0, epsilon = 1e-15);
        // and over [0, 1/2) the average is 1/2, giving 1/2
        assert_abs_diff_eq!(sp.osc(&b, tree.id_at(1, 0), 1.0), 0.5, epsilon = 1e-15);
        // L^2 oscillation over the root: sqrt(9/64 + 3/64) = sqrt(3)/4
        assert_abs_diff_eq!(
            sp.osc(&b, tree.root(), 2.0),
            3.0f64.sqrt() / 4.0,
            epsilon = 1e-15
        );
        // leaves carry constants
        assert_eq!(sp.osc(&b, tree.id_at(2, 0), 1.0), 0.0);
        assert_abs_diff_eq!(sp.bmo_norm(&b, 1.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn oscillation_ignores_null_cubes() {
        let tree = DyadicTree::unit(2);
        let mu = MeasureWeights::new(&tree, vec![0.0, 0.0, 0.5, 0.5]).unwrap();
        let sp = Space::new(&tree, &mu).unwrap();
        let b = SimpleFunction::from_real(&tree, &[9.0, -9.0, 1.0, 1.0]).unwrap();
        assert_eq!(sp.osc(&b, tree.id_at(1, 0), 2.0), 0.0);
        assert_eq!(sp.bmo_norm(&b, 2.0), 0.0);
    }

    #[test]
    fn moduli_rows_for_spike() {
        let (tree, mu) = spike_space();
        let sp = Space::new(&tree, &mu).unwrap();
        let b = SimpleFunction::from_real(&tree, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let rows = sp.vmo_moduli(&b, 1.0, &[1.0, 4.0]);
        // m = 1: only the root has mass >= 1; every cube has mass
        // <= 1; no cube is at distance >= 1 from the origin
        assert_abs_diff_eq!(rows[0].heavy, 3.0 / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rows[0].light, 0.5, epsilon = 1e-15);
        assert_eq!(rows[0].distant, 0.0);
        // m = 4: no cube has mass >= 4, only leaves have mass <= 1/4
        assert_eq!(rows[1].heavy, 0.0);
        assert_eq!(rows[1].light, 0.0);
        assert_eq!(rows[1].distant, 0.0);
    }

    #[test]
    fn distant_modulus_sees_shifted_window() {
        // window [1, 2): cubes keep their distance from the origin
        let tree = DyadicTree::new(
            1,
            2,
            vec![crate::tree::parse_rational("1").unwrap()],
            crate::tree::parse_rational("1").unwrap(),
            0,
        )
        .unwrap();
        let mu = MeasureWeights::lebesgue(&tree);
        let sp = Space::new(&tree, &mu).unwrap();
        let b = SimpleFunction::from_real(&tree, &[0.0, 0.0, 1.0, 0.0]).unwrap();
        let rows = sp.vmo_moduli(&b, 1.0, &[1.2, 1.6]);
        // only [3/2, 2) and its subcubes sit at distance >= 1.2; the
        // oscillation there is 1/2 on [3/2, 2) itself
        assert_abs_diff_eq!(rows[0].distant, 0.5, epsilon = 1e-15);
        // nothing reaches distance 1.6
        assert_eq!(rows[1].distant, 0.0);
    }

    #[test]
    fn doubling_constant_of_weighted_halving() {
        let tree = DyadicTree::unit(2);
        // masses: root 1, then (3/4, 1/4), then (1/2, 1/4 | 1/8, 1/8)
        let mu = MeasureWeights::new(&tree, vec![0.5, 0.25, 0.125, 0.125]).unwrap();
        let sp = Space::new(&tree, &mu).unwrap();
        // oracle over the three parents: min(3/4, 1/4, 2/3, 1/3, 1/2)
        assert_abs_diff_eq!(sp.doubling_constant(), 0.25, epsilon = 1e-15);
        let leb = MeasureWeights::lebesgue(&tree);
        let sp2 = Space::new(&tree, &leb).unwrap();
        assert_abs_diff_eq!(sp2.doubling_constant(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn doubling_constant_degenerate_cases() {
        let tree = DyadicTree::unit(2);
        let dead = MeasureWeights::new(&tree, vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        let sp = Space::new(&tree, &dead).unwrap();
        assert_eq!(sp.doubling_constant(), 1.0);
        let half_dead = MeasureWeights::new(&tree, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let sp2 = Space::new(&tree, &half_dead).unwrap();
        assert_eq!(sp2.doubling_constant(), 0.0);
    }

    #[test]
    fn measure_split_thresholds() {
        let (tree, mu) = spike_space();
        let sp = Space::new(&tree, &mu).unwrap();
        let base = CubeCollection::full(&tree);
        let split = sp.partition_by_measure(&base, 2.0).unwrap();
        // masses are 1, 1/2, 1/2, 1/4 x4; with m = 2 nothing is heavy
        // and only the leaves fall below 1/2
        assert_eq!(split.heavy.len(), 0);
        assert_eq!(split.mid.len(), 3);
        assert_eq!(split.light.len(), 4);
        // the three parts tile the base
        let reunion = split.light.union(&split.mid).union(&split.heavy);
        assert_eq!(reunion, base);
        assert!(split.light.intersection(&split.mid).is_empty());
        // the infinite sentinel keeps everything in the middle part
        let all_mid = sp.partition_by_measure(&base, f64::INFINITY).unwrap();
        assert_eq!(all_mid.mid, base);
        assert!(sp.partition_by_measure(&base, 0.5).is_err());
    }

    #[test]
    fn light_part_is_downward_closed() {
        let tree = DyadicTree::unit_dim(2, 2);
        let mut w = vec![0.0f64; tree.leaf_count()];
        for (i, v) in w.iter_mut().enumerate() {
            *v = ((i * 7 + 3) % 5) as f64 / 10.0;
        }
        let mu = MeasureWeights::new(&tree, w).unwrap();
        let sp = Space::new(&tree, &mu).unwrap();
        let split = sp
            .partition_by_measure(&CubeCollection::full(&tree), 3.0)
            .unwrap();
        assert!(split.light.is_downward_closed(&tree));
    }

    #[test]
    fn default_anchors_cover_near_leaves_maximally() {
        let tree = DyadicTree::unit(2);
        let mu = MeasureWeights::lebesgue(&tree);
        let sp = Space::new(&tree, &mu).unwrap();
        // leaf distances are 0, 1/4, 1/2, 3/4
        let anchors = sp.default_anchors(0.6);
        assert_eq!(anchors, vec![tree.id_at(1, 0), tree.id_at(2, 2)]);
        // every leaf is near for a huge threshold
        assert_eq!(sp.default_anchors(10.0), vec![tree.root()]);
        // no leaf is near for threshold 0
        assert_eq!(sp.default_anchors(0.0), Vec::<CubeId>::new());
    }

    #[test]
    fn reduction_classifies_and_chains() {
        let tree = DyadicTree::unit(2);
        let mu = MeasureWeights::lebesgue(&tree);
        let sp = Space::new(&tree, &mu).unwrap();
        let anchors = vec![tree.id_at(1, 0), tree.id_at(2, 2)];
        let base = CubeCollection::full(&tree);
        let red = sp.partition_reduction(&base, &anchors);
        // inside: the anchors and everything below them
        let inside: Vec<CubeId> = red.inside.ids().to_vec();
        assert_eq!(
            inside,
            vec![tree.id_at(1, 0), tree.id_at(2, 0), tree.id_at(2, 1), tree.id_at(2, 2)]
        );
        // distant: the one leaf cube beyond both anchors
        assert_eq!(red.distant.ids(), &[tree.id_at(2, 3)]);
        // outside: root in the first anchor's chain, [1/2, 1) in the
        // second's
        assert_eq!(red.chains[0], vec![tree.root()]);
        assert_eq!(red.chains[1], vec![tree.id_at(1, 1)]);
        // the three parts tile the base
        let reunion = red.inside.union(&red.distant).union(&red.outside);
        assert_eq!(reunion, base);
        // each chain is totally ordered by inclusion
        for chain in &red.chains {
            for pair in chain.windows(2) {
                assert!(tree.contains(pair[0], pair[1]));
            }
        }
    }
}
