//! Simple functions and their norms.
//!
//! A [`SimpleFunction`] is one complex value per leaf in canonical
//! order. [`Space`] bundles a tree with a measure and hosts the
//! operations: averages, martingale differences, `L^p` norms, the weak
//! `L^1` norm (plain and cube-averaged), the distribution-threshold
//! norm `L^inf_gamma`, and a Chebyshev-style transfer check.
//!
//! Conventions used everywhere: averages and oscillations over a cube
//! of zero mass are 0, suprema over empty families are 0, and level
//! sets `{|f| > B}` are strict with the minimum attained over the
//! finite candidate set `{0} ∪ {|values|}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::MeasureWeights;
use crate::tol;
use crate::tree::{CubeId, DyadicTree};

pub type C64 = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct SimpleFunction {
    values: Vec<C64>,
}

impl SimpleFunction {
    pub fn new(tree: &DyadicTree, values: Vec<C64>) -> Result<Self> {
        if values.len() != tree.leaf_count() {
            return Err(Error::LengthMismatch {
                expected: tree.leaf_count(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn zeros(tree: &DyadicTree) -> Self {
        Self {
            values: vec![C64::ZERO; tree.leaf_count()],
        }
    }

    pub fn constant(tree: &DyadicTree, c: C64) -> Self {
        Self {
            values: vec![c; tree.leaf_count()],
        }
    }

    pub fn from_real(tree: &DyadicTree, values: &[f64]) -> Result<Self> {
        Self::new(tree, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// Indicator of a cube (1 on its leaves, 0 elsewhere).
    pub fn indicator(tree: &DyadicTree, q: CubeId) -> Self {
        let mut f = Self::zeros(tree);
        for v in &mut f.values[tree.leaf_range(q)] {
            *v = C64::ONE;
        }
        f
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    /// True where the function is literally nonzero (support as data,
    /// not up to null sets).
    pub fn support_mask(&self) -> Vec<bool> {
        self.values.iter().map(|v| v.norm_sqr() > 0.0).collect()
    }

    /// Restriction `1_{mask} f`.
    pub fn restrict_mask(&self, mask: &[bool]) -> Self {
        debug_assert_eq!(self.len(), mask.len());
        Self {
            values: self
                .values
                .iter()
                .zip(mask)
                .map(|(v, &m)| if m { *v } else { C64::ZERO })
                .collect(),
        }
    }
}

/// A strictly increasing map `[0, inf) -> [0, inf)` with `phi(0) = 0`,
/// together with its inverse.
pub trait MonotoneMap {
    fn apply(&self, t: f64) -> f64;
    fn invert(&self, y: f64) -> f64;
}

/// The power map `t -> t^a` for a fixed `a > 0`.
pub struct PowerMap(pub f64);

impl MonotoneMap for PowerMap {
    fn apply(&self, t: f64) -> f64 {
        t.powf(self.0)
    }

    fn invert(&self, y: f64) -> f64 {
        y.powf(1.0 / self.0)
    }
}

/// A dyadic tree together with a measure on its leaves.
#[derive(Clone, Copy)]
pub struct Space<'a> {
    pub tree: &'a DyadicTree,
    pub mu: &'a MeasureWeights,
}

impl<'a> Space<'a> {
    pub fn new(tree: &'a DyadicTree, mu: &'a MeasureWeights) -> Result<Self> {
        if mu.leaf_count() != tree.leaf_count() {
            return Err(Error::LengthMismatch {
                expected: tree.leaf_count(),
                got: mu.leaf_count(),
            });
        }
        Ok(Self { tree, mu })
    }

    pub fn leaf_count(&self) -> usize {
        self.tree.leaf_count()
    }

    pub(crate) fn check_fn(&self, f: &SimpleFunction) -> Result<()> {
        if f.len() != self.tree.leaf_count() {
            return Err(Error::LengthMismatch {
                expected: self.tree.leaf_count(),
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Measure-weighted average over `q`; 0 when `q` has zero mass.
    pub fn average(&self, f: &SimpleFunction, q: CubeId) -> C64 {
        let mass = self.mu.mass(q);
        if mass == 0.0 {
            return C64::ZERO;
        }
        let mut sum = C64::ZERO;
        for i in self.tree.leaf_range(q) {
            sum += f.values()[i] * self.mu.leaf(i);
        }
        sum / mass
    }

    /// Martingale difference at `q`: on each child the child average
    /// minus the average over `q`, zero outside `q`.
    pub fn martingale_difference(&self, b: &SimpleFunction, q: CubeId) -> Result<SimpleFunction> {
        self.check_fn(b)?;
        if self.tree.is_leaf(q) {
            return Err(Error::NoChildren(q.0));
        }
        let mut out = SimpleFunction::zeros(self.tree);
        let avg_q = self.average(b, q);
        for child in self.tree.children(q) {
            let delta = self.average(b, child) - avg_q;
            for v in &mut out.values_mut()[self.tree.leaf_range(child)] {
                *v = delta;
            }
        }
        Ok(out)
    }

    /// `L^p(mu)` norm over `q` (or the whole window when `q` is None).
    pub fn lp_norm(&self, f: &SimpleFunction, p: f64, q: Option<CubeId>) -> f64 {
        debug_assert!(p >= 1.0 && p.is_finite(), "p must be in [1, inf)");
        let range = q.map_or(0..self.tree.leaf_count(), |q| self.tree.leaf_range(q));
        let mut sum = 0.0;
        for i in range {
            let w = self.mu.leaf(i);
            if w > 0.0 {
                sum += f.values()[i].norm().powf(p) * w;
            }
        }
        sum.powf(1.0 / p)
    }

    /// `L^2(mu)` inner product `sum f conj(g) w`.
    pub fn inner(&self, f: &SimpleFunction, g: &SimpleFunction) -> C64 {
        let mut sum = C64::ZERO;
        for i in 0..self.tree.leaf_count() {
            let w = self.mu.leaf(i);
            if w > 0.0 {
                sum += f.values()[i] * g.values()[i].conj() * w;
            }
        }
        sum
    }

    /// Dual pairing against `g` with exponent weights handled by the
    /// caller; identical to [`Space::inner`] as data.
    pub fn pairing(&self, f: &SimpleFunction, g: &SimpleFunction) -> C64 {
        self.inner(f, g)
    }

    /// Weak `L^1(mu)` norm over `q`: the largest `lambda * mu(q ∩
    /// {|f| >= lambda})` over the finitely many values `lambda = |f|`.
    pub fn weak_l1_norm(&self, f: &SimpleFunction, q: CubeId) -> f64 {
        let mut pairs: Vec<(f64, f64)> = self
            .tree
            .leaf_range(q)
            .filter_map(|i| {
                let w = self.mu.leaf(i);
                let a = f.values()[i].norm();
                (w > 0.0 && a > 0.0).then_some((a, w))
            })
            .collect();
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
        let mut best = 0.0f64;
        let mut cum = 0.0;
        for k in 0..pairs.len() {
            cum += pairs[k].1;
            let boundary = k + 1 == pairs.len() || pairs[k + 1].0 < pairs[k].0;
            if boundary {
                best = best.max(pairs[k].0 * cum);
            }
        }
        best
    }

    /// Cube-averaged weak `L^1` norm: [`Space::weak_l1_norm`] divided
    /// by the mass of `q` (0 when the mass vanishes). This is the
    /// scale-free form the distribution-threshold bounds use.
    pub fn avg_weak_l1_norm(&self, f: &SimpleFunction, q: CubeId) -> f64 {
        let mass = self.mu.mass(q);
        if mass == 0.0 {
            0.0
        } else {
            self.weak_l1_norm(f, q) / mass
        }
    }

    /// `L^inf_gamma(q, mu)`: the smallest `B` in `{0} ∪ {|values on q|}`
    /// with `mu(q ∩ {|f| > B}) <= gamma * mu(q)`. Monotone nonincreasing
    /// in `gamma`; `gamma = 0` gives the essential sup and `gamma = 1`
    /// gives 0.
    pub fn linfty_gamma_norm(&self, f: &SimpleFunction, q: CubeId, gamma: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in [0, 1], got {gamma}"
            )));
        }
        let budget = gamma * self.mu.mass(q);
        let mut pairs: Vec<(f64, f64)> = self
            .tree
            .leaf_range(q)
            .filter_map(|i| {
                let w = self.mu.leaf(i);
                let a = f.values()[i].norm();
                (w > 0.0 && a > 0.0).then_some((a, w))
            })
            .collect();
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
        // tail(B) = mass of {|f| > B}; scan candidates upward from 0
        let total_positive: f64 = pairs.iter().map(|p| p.1).sum();
        if total_positive <= budget {
            return Ok(0.0);
        }
        // group boundaries descending: candidate value pairs[k].0 has
        // tail equal to the cumulative mass strictly above it
        let mut cum = 0.0;
        let mut groups: Vec<(f64, f64)> = Vec::new(); // (value, tail above)
        for k in 0..pairs.len() {
            if k == 0 || pairs[k].0 < pairs[k - 1].0 {
                groups.push((pairs[k].0, cum));
            }
            cum += pairs[k].1;
        }
        for (value, tail_above) in groups.iter().rev() {
            if *tail_above <= budget {
                return Ok(*value);
            }
        }
        Ok(groups[0].0)
    }

    /// Chebyshev transfer: `|f|` on `q` at threshold `gamma` is bounded
    /// by `phi^{-1}` of `1/gamma` times the `q`-average of `phi(|f|)`.
    pub fn chebyshev_bound_check(
        &self,
        f: &SimpleFunction,
        q: CubeId,
        gamma: f64,
        phi: &dyn MonotoneMap,
    ) -> Result<bool> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, 1], got {gamma}"
            )));
        }
        let lhs = self.linfty_gamma_norm(f, q, gamma)?;
        let mass = self.mu.mass(q);
        let avg = if mass == 0.0 {
            0.0
        } else {
            let mut sum = 0.0;
            for i in self.tree.leaf_range(q) {
                let w = self.mu.leaf(i);
                if w > 0.0 {
                    sum += phi.apply(f.values()[i].norm()) * w;
                }
            }
            sum / mass
        };
        let rhs = phi.invert(avg / gamma);
        Ok(lhs <= rhs + tol::EXACT_F64 * (1.0 + lhs.abs()))
    }
}
