//! Leaf-weight measures on a dyadic tree.
//!
//! A measure is a nonnegative weight per leaf; the mass of any cube is
//! the sum over its leaves and is cached per cube at construction.
//! Weights may vanish: averages over zero-mass cubes are 0 by the
//! crate-wide convention, and null leaves never affect norms.

use crate::error::{Error, Result};
use crate::tree::{rational_to_f64, CubeId, DyadicTree};

#[derive(Clone, Debug)]
pub struct MeasureWeights {
    leaf_weights: Vec<f64>,
    cube_mass: Vec<f64>,
}

impl MeasureWeights {
    pub fn new(tree: &DyadicTree, leaf_weights: Vec<f64>) -> Result<Self> {
        if leaf_weights.len() != tree.leaf_count() {
            return Err(Error::LengthMismatch {
                expected: tree.leaf_count(),
                got: leaf_weights.len(),
            });
        }
        if let Some(w) = leaf_weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "leaf weights must be finite and nonnegative, got {w}"
            )));
        }
        let mut cube_mass = vec![0.0; tree.cube_count()];
        // leaves first, then each level as the sum of its children, so
        // mass(parent) == sum of child masses holds exactly in f64
        let depth = tree.depth();
        for i in 0..tree.leaf_count() {
            cube_mass[tree.leaf_id(i).0 as usize] = leaf_weights[i];
        }
        for level in (0..depth).rev() {
            for idx in 0..tree.cubes_at_level(level) {
                let q = tree.id_at(level, idx);
                let mut sum = 0.0;
                for child in tree.children(q) {
                    sum += cube_mass[child.0 as usize];
                }
                cube_mass[q.0 as usize] = sum;
            }
        }
        Ok(Self {
            leaf_weights,
            cube_mass,
        })
    }

    /// Lebesgue measure of the window: every leaf gets its volume.
    pub fn lebesgue(tree: &DyadicTree) -> Self {
        let side = rational_to_f64(tree.side(tree.depth()));
        let vol = side.powi(tree.dim() as i32);
        Self::new(tree, vec![vol; tree.leaf_count()]).expect("uniform weights are valid")
    }

    pub fn mass(&self, q: CubeId) -> f64 {
        self.cube_mass[q.0 as usize]
    }

    pub fn total(&self) -> f64 {
        self.cube_mass[0]
    }

    pub fn leaf(&self, i: usize) -> f64 {
        self.leaf_weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.leaf_weights
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_weights.len()
    }

    /// Indices of leaves with strictly positive weight.
    pub fn positive_leaves(&self) -> Vec<usize> {
        (0..self.leaf_weights.len())
            .filter(|&i| self.leaf_weights[i] > 0.0)
            .collect()
    }
}
