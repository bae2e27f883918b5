//! Sequences of test-function families: pairing profiles as finite
//! weak-null evidence, Cesàro cancellation profiles, the greedy
//! disjointification with its improved triangle inequality, and the
//! Hilbert-space admissibility criteria.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::func::{SimpleFunction, Space};
use crate::tol::EXACT_F64;

/// Which overlap is thresholded when thinning a sequence: the norm of
/// the new function on the supports already selected, or the norms of
/// the selected functions on the new support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMode {
    Left,
    Right,
}

/// One accepted step of the greedy selection.
#[derive(Clone, Debug, Serialize)]
pub struct GreedyStep {
    pub family: usize,
    pub member: usize,
    pub overlap: f64,
    pub threshold: f64,
}

/// The thinned subsequence together with the recorded overlap norms.
#[derive(Clone, Debug, Serialize)]
pub struct GreedySelection {
    pub mode: OverlapMode,
    pub steps: Vec<GreedyStep>,
    #[serde(skip)]
    pub functions: Vec<SimpleFunction>,
}

/// Decay profile of one function against the later families.
#[derive(Clone, Debug, Serialize)]
pub struct OrthogonalityProfile {
    pub family: usize,
    pub member: usize,
    pub values: Vec<f64>,
    pub consistent: bool,
}

/// Outcome of the Hilbert-space criteria on a finite prefix.
#[derive(Clone, Debug, Serialize)]
pub struct HilbertReport {
    pub boundedness: f64,
    pub bounded: bool,
    pub profiles: Vec<OrthogonalityProfile>,
    pub consistent: bool,
}

/// A growth function `N -> phi(N)` for the improved triangle
/// inequality.
pub struct GrowthFunction {
    f: Box<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl GrowthFunction {
    pub fn new(f: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Box::new(f) }
    }

    /// The `L^p` instance `phi(N) = N^{1/p}`.
    pub fn power(p: f64) -> Self {
        Self::new(move |n| (n as f64).powf(1.0 / p))
    }

    pub fn eval(&self, n: usize) -> f64 {
        (self.f)(n)
    }

    /// Checks that `phi(N)/N` is nonincreasing over `1..=max_n`.
    pub fn ratio_decays(&self, max_n: usize) -> bool {
        let mut prev = f64::INFINITY;
        for n in 1..=max_n {
            let ratio = self.eval(n) / n as f64;
            if ratio > prev + EXACT_F64 {
                return false;
            }
            prev = ratio;
        }
        true
    }
}

/// An ordered sequence of finite test-function sets over one space.
pub struct TestFamilySequence<'a> {
    space: Space<'a>,
    p: f64,
    families: Vec<Vec<SimpleFunction>>,
}

impl<'a> TestFamilySequence<'a> {
    pub fn new(space: Space<'a>, p: f64, families: Vec<Vec<SimpleFunction>>) -> Result<Self> {
        for family in &families {
            for f in family {
                space.check_fn(f)?;
            }
        }
        Ok(Self { space, p, families })
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    pub fn families(&self) -> &[Vec<SimpleFunction>] {
        &self.families
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// `sup_i sup_{f in F_i} ||f||_p`, the boundedness statistic.
    pub fn boundedness(&self) -> f64 {
        let mut sup = 0.0_f64;
        for family in &self.families {
            for f in family {
                sup = sup.max(self.space.lp_norm(f, self.p, None));
            }
        }
        sup
    }

    /// For each dual `g` and each family index `i`, the statistic
    /// `max_{f in F_i} |<f, g>|`; decaying rows are the finite-prefix
    /// evidence for weak nullity.
    pub fn pairing_profile(&self, duals: &[SimpleFunction]) -> Result<Vec<Vec<f64>>> {
        let mut rows = Vec::with_capacity(duals.len());
        for g in duals {
            self.space.check_fn(g)?;
            let row = self
                .families
                .iter()
                .map(|family| {
                    family
                        .iter()
                        .map(|f| self.space.pairing(f, g).norm())
                        .fold(0.0_f64, f64::max)
                })
                .collect();
            rows.push(row);
        }
        Ok(rows)
    }

    /// Greedy thinning with the max-norm chooser.
    pub fn greedy_disjoint_subsequence(&self, mode: OverlapMode) -> GreedySelection {
        self.greedy_disjoint_subsequence_with(mode, |family: &[SimpleFunction]| {
            let mut best = None;
            let mut best_norm = f64::NEG_INFINITY;
            for (idx, f) in family.iter().enumerate() {
                let norm = self.space.lp_norm(f, self.p, None);
                if norm > best_norm {
                    best_norm = norm;
                    best = Some(idx);
                }
            }
            best
        })
    }

    /// Walks the families in order, picking one candidate per family
    /// through `chooser` and appending it when its overlap with the
    /// selection so far is at most `2^{-2m}` for the next position
    /// `m`. Returns the selection reached within the prefix.
    pub fn greedy_disjoint_subsequence_with<F>(
        &self,
        mode: OverlapMode,
        mut chooser: F,
    ) -> GreedySelection
    where
        F: FnMut(&[SimpleFunction]) -> Option<usize>,
    {
        let mut steps = Vec::new();
        let mut functions: Vec<SimpleFunction> = Vec::new();
        for (family_idx, family) in self.families.iter().enumerate() {
            let Some(member) = chooser(family) else {
                continue;
            };
            let candidate = &family[member];
            let overlap = match mode {
                OverlapMode::Left => {
                    let cand_masked = |sel: &SimpleFunction| {
                        candidate.restrict_mask(&sel.support_mask())
                    };
                    functions
                        .iter()
                        .map(|sel| self.space.lp_norm(&cand_masked(sel), self.p, None))
                        .fold(0.0_f64, f64::max)
                }
                OverlapMode::Right => {
                    let mask = candidate.support_mask();
                    functions
                        .iter()
                        .map(|sel| self.space.lp_norm(&sel.restrict_mask(&mask), self.p, None))
                        .fold(0.0_f64, f64::max)
                }
            };
            let threshold = 0.25_f64.powi(functions.len() as i32 + 1);
            if overlap <= threshold + EXACT_F64 {
                steps.push(GreedyStep {
                    family: family_idx,
                    member,
                    overlap,
                    threshold,
                });
                functions.push(candidate.clone());
            }
        }
        GreedySelection {
            mode,
            steps,
            functions,
        }
    }

    /// Hilbert-space criteria at `p = 2`: boundedness plus, for every
    /// function in the union, the profile `max_{g in F_i} |<g, f>|`
    /// across `i`. A profile is consistent when its tail past the
    /// source family ends below `tol` (or is empty).
    pub fn hilbert_admissibility_check(&self, tol: f64) -> Result<HilbertReport> {
        if self.p != 2.0 {
            return Err(Error::NotP2(self.p));
        }
        let boundedness = self.boundedness();
        let mut profiles = Vec::new();
        for (family_idx, family) in self.families.iter().enumerate() {
            for (member, f) in family.iter().enumerate() {
                let values: Vec<f64> = self
                    .families
                    .iter()
                    .map(|other| {
                        other
                            .iter()
                            .map(|g| self.space.inner(g, f).norm())
                            .fold(0.0_f64, f64::max)
                    })
                    .collect();
                let tail = &values[(family_idx + 1).min(values.len())..];
                let consistent = match tail.last() {
                    Some(&last) => last < tol,
                    None => true,
                };
                profiles.push(OrthogonalityProfile {
                    family: family_idx,
                    member,
                    values,
                    consistent,
                });
            }
        }
        let consistent = profiles.iter().all(|p| p.consistent);
        Ok(HilbertReport {
            boundedness,
            bounded: boundedness.is_finite(),
            profiles,
            consistent,
        })
    }
}

/// Cesàro profile `(1/K) || sum_{k <= K} f_k ||_p` for `K = 1..len`.
pub fn cesaro_profile(space: Space, funcs: &[SimpleFunction], p: f64) -> Result<Vec<f64>> {
    let mut sum = SimpleFunction::zeros(space.tree);
    let mut profile = Vec::with_capacity(funcs.len());
    for (idx, f) in funcs.iter().enumerate() {
        space.check_fn(f)?;
        sum.add_assign(f);
        profile.push(space.lp_norm(&sum, p, None) / (idx + 1) as f64);
    }
    Ok(profile)
}

/// Partial-sum norms `|| sum_{i <= N} f_i ||_p` checked against
/// `1 + phi(N)`; valid for selections of norm-one functions produced
/// by the greedy thinning.
pub fn improved_triangle_check(
    space: Space,
    selected: &[SimpleFunction],
    p: f64,
    phi: &GrowthFunction,
) -> Result<(Vec<f64>, bool)> {
    let mut sum = SimpleFunction::zeros(space.tree);
    let mut profile = Vec::with_capacity(selected.len());
    let mut ok = true;
    for (idx, f) in selected.iter().enumerate() {
        space.check_fn(f)?;
        sum.add_assign(f);
        let lhs = space.lp_norm(&sum, p, None);
        ok &= lhs <= 1.0 + phi.eval(idx + 1) + EXACT_F64;
        profile.push(lhs);
    }
    Ok((profile, ok))
}

/// Lower bound `r cos(pi/4) / ||g||` forced on every Cesàro profile of
/// a family whose pairings against `g` all have modulus at least `r`.
pub fn cesaro_floor(r: f64, dual_norm: f64) -> f64 {
    if dual_norm <= 0.0 {
        return 0.0;
    }
    r * std::f64::consts::FRAC_1_SQRT_2 / dual_norm
}
