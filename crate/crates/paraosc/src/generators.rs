//! Seeded generators for measures, symbols, and martingale families:
//! the named constructions behind the command-line `--measure` and
//! `--symbol` flags, plus the random families used by the property
//! suites.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::Rng;

use crate::collection::CubeCollection;
use crate::error::{Error, Result};
use crate::func::{C64, SimpleFunction, Space};
use crate::john_nirenberg::MartingaleFamily;
use crate::measure::MeasureWeights;
use crate::serialize::{load_symbol_json, load_weights_json};
use crate::tree::{CubeId, DyadicTree};

/// A named measure construction, parsed from strings like
/// `lebesgue`, `doubling(0.2)`, `pointmass(3)`, `cantor(0.3)`, or
/// `custom-json(weights.json)`.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureSpec {
    Lebesgue,
    Doubling { gamma_min: f64 },
    PointMass { count: usize },
    Cantor { theta: f64 },
    CustomJson { path: PathBuf },
}

/// A named symbol construction, parsed from strings like
/// `haar-lacunary(0.7)`, `vmo-decay(0.5)`, `bmo-not-vmo`, `random`,
/// or `custom-json(symbol.json)`.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolSpec {
    HaarLacunary { rho: f64 },
    VmoDecay { alpha: f64 },
    BmoNotVmo,
    Random,
    CustomJson { path: PathBuf },
}

fn split_spec(s: &str) -> Result<(&str, Option<&str>)> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s, None)),
        Some(open) => {
            if !s.ends_with(')') {
                return Err(Error::InvalidParameter(format!(
                    "unbalanced parentheses in spec '{s}'"
                )));
            }
            Ok((&s[..open], Some(s[open + 1..s.len() - 1].trim())))
        }
    }
}

fn require_arg<'a>(name: &str, arg: Option<&'a str>) -> Result<&'a str> {
    arg.filter(|a| !a.is_empty())
        .ok_or_else(|| Error::InvalidParameter(format!("'{name}' needs an argument")))
}

fn forbid_arg(name: &str, arg: Option<&str>) -> Result<()> {
    match arg {
        None => Ok(()),
        Some(_) => Err(Error::InvalidParameter(format!(
            "'{name}' takes no argument"
        ))),
    }
}

fn parse_float(name: &str, arg: &str) -> Result<f64> {
    arg.parse().map_err(|_| {
        Error::InvalidParameter(format!("'{name}' argument '{arg}' is not a number"))
    })
}

impl FromStr for MeasureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = split_spec(s)?;
        match name {
            "lebesgue" => {
                forbid_arg(name, arg)?;
                Ok(Self::Lebesgue)
            }
            "doubling" => {
                let gamma_min = parse_float(name, require_arg(name, arg)?)?;
                if gamma_min <= 0.0 || gamma_min >= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "doubling floor {gamma_min} outside (0, 1)"
                    )));
                }
                Ok(Self::Doubling { gamma_min })
            }
            "pointmass" => {
                let raw = require_arg(name, arg)?;
                let count = raw.parse().map_err(|_| {
                    Error::InvalidParameter(format!(
                        "pointmass argument '{raw}' is not a positive integer"
                    ))
                })?;
                if count == 0 {
                    return Err(Error::InvalidParameter(
                        "pointmass needs at least one leaf".into(),
                    ));
                }
                Ok(Self::PointMass { count })
            }
            "cantor" => {
                let theta = parse_float(name, require_arg(name, arg)?)?;
                if theta <= 0.0 || theta >= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "cantor weight {theta} outside (0, 1)"
                    )));
                }
                Ok(Self::Cantor { theta })
            }
            "custom-json" => Ok(Self::CustomJson {
                path: PathBuf::from(require_arg(name, arg)?),
            }),
            other => Err(Error::InvalidParameter(format!(
                "unknown measure generator '{other}'"
            ))),
        }
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Lebesgue => write!(f, "lebesgue"),
            Self::Doubling { gamma_min } => write!(f, "doubling({gamma_min})"),
            Self::PointMass { count } => write!(f, "pointmass({count})"),
            Self::Cantor { theta } => write!(f, "cantor({theta})"),
            Self::CustomJson { path } => write!(f, "custom-json({})", path.display()),
        }
    }
}

impl FromStr for SymbolSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = split_spec(s)?;
        match name {
            "haar-lacunary" => {
                let rho = parse_float(name, require_arg(name, arg)?)?;
                if rho <= 0.0 || rho > 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "lacunary ratio {rho} outside (0, 1]"
                    )));
                }
                Ok(Self::HaarLacunary { rho })
            }
            "vmo-decay" => {
                let alpha = parse_float(name, require_arg(name, arg)?)?;
                if alpha <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "decay rate {alpha} must be positive"
                    )));
                }
                Ok(Self::VmoDecay { alpha })
            }
            "bmo-not-vmo" => {
                forbid_arg(name, arg)?;
                Ok(Self::BmoNotVmo)
            }
            "random" => {
                forbid_arg(name, arg)?;
                Ok(Self::Random)
            }
            "custom-json" => Ok(Self::CustomJson {
                path: PathBuf::from(require_arg(name, arg)?),
            }),
            other => Err(Error::InvalidParameter(format!(
                "unknown symbol generator '{other}'"
            ))),
        }
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HaarLacunary { rho } => write!(f, "haar-lacunary({rho})"),
            Self::VmoDecay { alpha } => write!(f, "vmo-decay({alpha})"),
            Self::BmoNotVmo => write!(f, "bmo-not-vmo"),
            Self::Random => write!(f, "random"),
            Self::CustomJson { path } => write!(f, "custom-json({})", path.display()),
        }
    }
}

impl MeasureSpec {
    pub fn build(&self, tree: &DyadicTree, rng: &mut impl Rng) -> Result<MeasureWeights> {
        match self {
            Self::Lebesgue => Ok(MeasureWeights::lebesgue(tree)),
            Self::Doubling { gamma_min } => random_doubling_measure(tree, *gamma_min, rng),
            Self::PointMass { count } => point_mass_measure(tree, *count, rng),
            Self::Cantor { theta } => Ok(cantor_measure(tree, *theta)),
            Self::CustomJson { path } => load_weights_json(tree, path),
        }
    }
}

impl SymbolSpec {
    pub fn build(&self, tree: &DyadicTree, rng: &mut impl Rng) -> Result<SimpleFunction> {
        match self {
            Self::HaarLacunary { rho } => {
                let coeffs: Vec<f64> = (0..tree.depth()).map(|k| rho.powi(k as i32)).collect();
                leftmost_haar_series(tree, &coeffs)
            }
            Self::VmoDecay { alpha } => {
                let coeffs: Vec<f64> = (0..tree.depth())
                    .map(|k| 2.0_f64.powf(-alpha * k as f64))
                    .collect();
                leftmost_haar_series(tree, &coeffs)
            }
            Self::BmoNotVmo => {
                let coeffs = vec![1.0; tree.depth()];
                leftmost_haar_series(tree, &coeffs)
            }
            Self::Random => {
                let values: Vec<f64> = (0..tree.leaf_count())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect();
                SimpleFunction::from_real(tree, &values)
            }
            Self::CustomJson { path } => load_symbol_json(tree, path),
        }
    }
}

/// The unnormalized Haar function of `q`: `+1` on children with an
/// even number of set axis bits, `-1` on the others, `0` outside `q`.
pub fn haar_at(tree: &DyadicTree, q: CubeId) -> Result<SimpleFunction> {
    if tree.is_leaf(q) {
        return Err(Error::NoChildren(q.0));
    }
    let mut values = vec![C64::new(0.0, 0.0); tree.leaf_count()];
    for (bits, child) in tree.children(q).into_iter().enumerate() {
        let sign = if bits.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        for i in tree.leaf_range(child) {
            values[i] = C64::new(sign, 0.0);
        }
    }
    SimpleFunction::new(tree, values)
}

/// The Haar series `sum_k coeffs[k] h_{Q_k}` over the leftmost cube
/// `Q_k` of each level `k`, a nested chain below the root.
pub fn leftmost_haar_series(tree: &DyadicTree, coeffs: &[f64]) -> Result<SimpleFunction> {
    if coeffs.len() > tree.depth() {
        return Err(Error::LengthMismatch {
            expected: tree.depth(),
            got: coeffs.len(),
        });
    }
    let mut out = SimpleFunction::zeros(tree);
    for (k, &c) in coeffs.iter().enumerate() {
        let h = haar_at(tree, tree.id_at(k, 0))?.scale(C64::new(c, 0.0));
        out.add_assign(&h);
    }
    Ok(out)
}

/// A random measure whose child-to-parent mass ratios all stay at or
/// above `gamma_min`: each cube's mass is split among the children as
/// `gamma_min` plus a random share of the surplus.
pub fn random_doubling_measure(
    tree: &DyadicTree,
    gamma_min: f64,
    rng: &mut impl Rng,
) -> Result<MeasureWeights> {
    let arity = 1usize << tree.dim();
    let surplus = 1.0 - gamma_min * arity as f64;
    if surplus < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "doubling floor {gamma_min} impossible with {arity} children per cube"
        )));
    }
    let mut masses = vec![0.0_f64; tree.cube_count()];
    masses[tree.root().0 as usize] = 1.0;
    for level in 0..tree.depth() {
        for idx in 0..tree.cubes_at_level(level) {
            let q = tree.id_at(level, idx);
            let draws: Vec<f64> = (0..arity).map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = draws.iter().sum();
            for (child, draw) in tree.children(q).into_iter().zip(draws) {
                let share = gamma_min + surplus * draw / total;
                masses[child.0 as usize] = masses[q.0 as usize] * share;
            }
        }
    }
    let weights = (0..tree.leaf_count())
        .map(|i| masses[tree.leaf_id(i).0 as usize])
        .collect();
    MeasureWeights::new(tree, weights)
}

/// All mass on `count` distinct leaves drawn at random, `1/count`
/// each; every other leaf is null.
pub fn point_mass_measure(
    tree: &DyadicTree,
    count: usize,
    rng: &mut impl Rng,
) -> Result<MeasureWeights> {
    let n = tree.leaf_count();
    if count == 0 || count > n {
        return Err(Error::InvalidParameter(format!(
            "pointmass count {count} outside 1..={n}"
        )));
    }
    let mut weights = vec![0.0_f64; n];
    for i in rand::seq::index::sample(rng, n, count) {
        weights[i] = 1.0 / count as f64;
    }
    MeasureWeights::new(tree, weights)
}

/// The self-similar measure splitting mass `(theta, 1 - theta)` along
/// every axis at every bisection; a deterministic doubling measure
/// with child ratios `min(theta, 1 - theta)^dim`.
pub fn cantor_measure(tree: &DyadicTree, theta: f64) -> MeasureWeights {
    let n = tree.leaf_count();
    let bits = tree.dim() * tree.depth();
    let weights = (0..n)
        .map(|i| {
            let ones = i.count_ones() as i32;
            (1.0 - theta).powi(ones) * theta.powi(bits as i32 - ones)
        })
        .collect();
    MeasureWeights::new(tree, weights).expect("cantor weights are positive")
}

/// A random subfamily of the non-leaf cubes with functions constant on
/// every dyadic child, the shape required by the doubling bound.
pub fn random_martingale_family(
    space: Space,
    include_prob: f64,
    rng: &mut impl Rng,
) -> Result<MartingaleFamily> {
    let tree = space.tree;
    let members: Vec<CubeId> = tree
        .non_leaf_cubes()
        .into_iter()
        .filter(|_| rng.random_range(0.0..1.0) < include_prob)
        .collect();
    let collection = CubeCollection::new(tree, members)?;
    let lambdas = collection
        .ids()
        .iter()
        .map(|&q| {
            let mut values = vec![C64::new(0.0, 0.0); tree.leaf_count()];
            for child in tree.children(q) {
                let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                for i in tree.leaf_range(child) {
                    values[i] = c;
                }
            }
            SimpleFunction::new(tree, values).expect("values have leaf length")
        })
        .collect();
    MartingaleFamily::new(space, collection, lambdas)
}

/// Independent leaf weights drawn uniformly from `[lo, hi)`.
pub fn random_positive_weights(
    tree: &DyadicTree,
    lo: f64,
    hi: f64,
    rng: &mut impl Rng,
) -> Result<MeasureWeights> {
    let weights = (0..tree.leaf_count())
        .map(|_| rng.random_range(lo..hi))
        .collect();
    MeasureWeights::new(tree, weights)
}
