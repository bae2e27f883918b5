//! Collections of dyadic cubes.
//!
//! A [`CubeCollection`] is a set of cube ids from one tree, stored
//! sorted (coarse to fine) together with a membership mask. The
//! structural queries used by the stopping-time and partition code
//! live here: maximal and minimal members, members inside a cube,
//! collection children, chain connectedness, downward closure.

use crate::error::{Error, Result};
use crate::tree::{CubeId, DyadicTree};

#[derive(Clone, Debug, PartialEq)]
pub struct CubeCollection {
    ids: Vec<CubeId>,
    mask: Vec<bool>,
}

impl CubeCollection {
    pub fn new(tree: &DyadicTree, ids: impl IntoIterator<Item = CubeId>) -> Result<Self> {
        let n = tree.cube_count();
        let mut mask = vec![false; n];
        for q in ids {
            let idx = q.0 as usize;
            if idx >= n {
                return Err(Error::InvalidTree(format!(
                    "cube id {} outside tree with {} cubes",
                    q.0, n
                )));
            }
            mask[idx] = true;
        }
        Ok(Self::from_mask(mask))
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let ids = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(CubeId(i as u32)))
            .collect();
        Self { ids, mask }
    }

    pub fn empty(tree: &DyadicTree) -> Self {
        Self {
            ids: Vec::new(),
            mask: vec![false; tree.cube_count()],
        }
    }

    /// Every cube of the tree, leaves included.
    pub fn full(tree: &DyadicTree) -> Self {
        Self::from_mask(vec![true; tree.cube_count()])
    }

    /// Every cube that has children.
    pub fn non_leaf(tree: &DyadicTree) -> Self {
        Self::new(tree, tree.non_leaf_cubes()).expect("ids come from the tree")
    }

    pub fn from_predicate(tree: &DyadicTree, mut pred: impl FnMut(CubeId) -> bool) -> Self {
        let mask = (0..tree.cube_count())
            .map(|i| pred(CubeId(i as u32)))
            .collect();
        Self::from_mask(mask)
    }

    /// Member ids sorted coarse to fine.
    pub fn ids(&self) -> &[CubeId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, q: CubeId) -> bool {
        self.mask.get(q.0 as usize).copied().unwrap_or(false)
    }

    pub fn union(&self, other: &Self) -> Self {
        debug_assert_eq!(self.mask.len(), other.mask.len());
        Self::from_mask(
            self.mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a || b)
                .collect(),
        )
    }

    pub fn intersection(&self, other: &Self) -> Self {
        debug_assert_eq!(self.mask.len(), other.mask.len());
        Self::from_mask(
            self.mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a && b)
                .collect(),
        )
    }

    pub fn difference(&self, other: &Self) -> Self {
        debug_assert_eq!(self.mask.len(), other.mask.len());
        Self::from_mask(
            self.mask
                .iter()
                .zip(&other.mask)
                .map(|(&a, &b)| a && !b)
                .collect(),
        )
    }

    /// Members contained in `q`, `q` itself included when it belongs.
    pub fn members_within(&self, tree: &DyadicTree, q: CubeId) -> Vec<CubeId> {
        self.ids
            .iter()
            .copied()
            .filter(|&r| tree.contains(q, r))
            .collect()
    }

    /// Members with no strict ancestor in the collection.
    pub fn maximal_members(&self, tree: &DyadicTree) -> Vec<CubeId> {
        self.ids
            .iter()
            .copied()
            .filter(|&q| !tree.ancestors(q).into_iter().any(|a| self.contains(a)))
            .collect()
    }

    /// Members with no strict descendant in the collection.
    pub fn minimal_members(&self, tree: &DyadicTree) -> Vec<CubeId> {
        let mut below = vec![false; self.mask.len()];
        for &q in &self.ids {
            for a in tree.ancestors(q) {
                below[a.0 as usize] = true;
            }
        }
        self.ids
            .iter()
            .copied()
            .filter(|&q| !below[q.0 as usize])
            .collect()
    }

    /// Maximal members strictly inside `q`: members `R` with `R ⊊ q`
    /// and no member strictly between.
    pub fn collection_children(&self, tree: &DyadicTree, q: CubeId) -> Vec<CubeId> {
        self.ids
            .iter()
            .copied()
            .filter(|&r| {
                if r == q || !tree.contains(q, r) {
                    return false;
                }
                !tree
                    .ancestors(r)
                    .into_iter()
                    .take_while(|&a| a != q)
                    .any(|a| self.contains(a))
            })
            .collect()
    }

    /// Chain connectedness: whenever two members are nested, every
    /// cube between them is also a member.
    pub fn is_connected(&self, tree: &DyadicTree) -> bool {
        self.ids.iter().all(|&q| {
            let mut gap = false;
            for a in tree.ancestors(q) {
                if self.contains(a) {
                    if gap {
                        return false;
                    }
                } else {
                    gap = true;
                }
            }
            true
        })
    }

    /// Downward closure: every descendant of a member is a member.
    pub fn is_downward_closed(&self, tree: &DyadicTree) -> bool {
        self.ids.iter().all(|&q| {
            tree.is_leaf(q)
                || tree.children(q).into_iter().all(|c| self.contains(c))
        })
    }

    /// Leaves covered by at least one member.
    pub fn leaf_cover_mask(&self, tree: &DyadicTree) -> Vec<bool> {
        let mut cover = vec![false; tree.leaf_count()];
        for &q in &self.ids {
            for i in tree.leaf_range(q) {
                cover[i] = true;
            }
        }
        cover
    }
}
