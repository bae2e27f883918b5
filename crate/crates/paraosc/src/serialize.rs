//! JSON input and output: custom measure and symbol files and the
//! nested stopping-forest dump.
//!
//! Custom files hold a single JSON array of real leaf values, ordered
//! by leaf index; weights must be nonnegative.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::func::SimpleFunction;
use crate::john_nirenberg::StoppingForest;
use crate::measure::MeasureWeights;
use crate::tree::DyadicTree;

pub fn load_weights_json(tree: &DyadicTree, path: &Path) -> Result<MeasureWeights> {
    let text = fs::read_to_string(path)?;
    let weights: Vec<f64> = serde_json::from_str(&text)?;
    MeasureWeights::new(tree, weights)
}

pub fn load_symbol_json(tree: &DyadicTree, path: &Path) -> Result<SimpleFunction> {
    let text = fs::read_to_string(path)?;
    let values: Vec<f64> = serde_json::from_str(&text)?;
    SimpleFunction::from_real(tree, &values)
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = to_pretty_json(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// One node of the nested forest dump: the cube, its local stopping
/// constant, the cubes selected directly below it, and the recursive
/// subtrees.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForestNodeDump {
    pub cube: u32,
    pub b_local: f64,
    pub stopping: Vec<u32>,
    pub children: Vec<ForestNodeDump>,
}

/// The whole decomposition with its global constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForestDump {
    pub b: f64,
    pub c: f64,
    pub gamma: f64,
    pub root: ForestNodeDump,
}

pub fn nested_forest(forest: &StoppingForest) -> ForestDump {
    fn build(forest: &StoppingForest, idx: usize) -> ForestNodeDump {
        let node = &forest.nodes[idx];
        ForestNodeDump {
            cube: node.cube.0,
            b_local: node.b_local,
            stopping: node
                .children
                .iter()
                .map(|&i| forest.nodes[i].cube.0)
                .collect(),
            children: node.children.iter().map(|&i| build(forest, i)).collect(),
        }
    }
    ForestDump {
        b: forest.b,
        c: forest.c,
        gamma: forest.gamma,
        root: build(forest, 0),
    }
}
