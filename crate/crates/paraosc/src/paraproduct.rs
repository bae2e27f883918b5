//! Dyadic paraproducts over cube collections, stored as sums of
//! rank-one blocks. Provides exact `p = 2` spectra through weighted
//! singular values, an independent power-method cross-check, the
//! Carleson and telescoping testing norms, and the measure/geometry
//! reduction pipeline that splits a collection into a finite-rank
//! retained part and discarded parts controlled by oscillation moduli.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::collection::CubeCollection;
use crate::error::{Error, Result};
use crate::func::{C64, SimpleFunction, Space};
use crate::spectral::{self, SingularSpectrum};
use crate::tol::{EXACT_F64, NECESSITY_SLACK, RANK_CUTOFF};
use crate::tree::CubeId;

/// Largest leaf dimension that densification accepts.
pub const DENSE_LEAF_LIMIT: usize = 4096;

/// Default iteration cap for the power-method estimate.
pub const POWER_ITER_CAP: usize = 20_000;

struct Term {
    start: usize,
    diff: Vec<C64>,
    inv_mass: f64,
}

/// The operator `f -> sum_Q D_Q b <f>_Q 1_Q` over the members of a
/// collection, one rank-one term per positive-mass member.
pub struct Paraproduct<'a> {
    space: Space<'a>,
    symbol: SimpleFunction,
    collection: CubeCollection,
    p: f64,
    terms: Vec<Term>,
}

impl<'a> Paraproduct<'a> {
    /// Builds the operator. Members must be non-leaf cubes; zero-mass
    /// members are dropped since they act as zero.
    pub fn assemble(
        space: Space<'a>,
        b: &SimpleFunction,
        collection: &CubeCollection,
        p: f64,
    ) -> Result<Self> {
        space.check_fn(b)?;
        let tree = space.tree;
        let mut terms = Vec::new();
        for &q in collection.ids() {
            if tree.is_leaf(q) {
                return Err(Error::NoChildren(q.0));
            }
            let mass = space.mu.mass(q);
            if mass <= 0.0 {
                continue;
            }
            let range = tree.leaf_range(q);
            let start = range.start;
            let avg_q = space.average(b, q);
            let mut diff = vec![C64::new(0.0, 0.0); range.len()];
            for child in tree.children(q) {
                let step = space.average(b, child) - avg_q;
                for i in tree.leaf_range(child) {
                    diff[i - start] = step;
                }
            }
            terms.push(Term {
                start,
                diff,
                inv_mass: 1.0 / mass,
            });
        }
        Ok(Self {
            space,
            symbol: b.clone(),
            collection: collection.clone(),
            p,
            terms,
        })
    }

    pub fn symbol(&self) -> &SimpleFunction {
        &self.symbol
    }

    pub fn collection(&self) -> &CubeCollection {
        &self.collection
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// Number of stored rank-one terms (positive-mass members).
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    fn apply_raw(&self, vals: &[C64]) -> Vec<C64> {
        let w = self.space.mu.weights();
        let mut out = vec![C64::new(0.0, 0.0); vals.len()];
        for term in &self.terms {
            let range = term.start..term.start + term.diff.len();
            let mut acc = C64::new(0.0, 0.0);
            for j in range.clone() {
                acc += vals[j] * w[j];
            }
            let coeff = acc * term.inv_mass;
            for (k, j) in range.enumerate() {
                out[j] += term.diff[k] * coeff;
            }
        }
        out
    }

    fn apply_adjoint_raw(&self, vals: &[C64]) -> Vec<C64> {
        let w = self.space.mu.weights();
        let mut out = vec![C64::new(0.0, 0.0); vals.len()];
        for term in &self.terms {
            let range = term.start..term.start + term.diff.len();
            let mut acc = C64::new(0.0, 0.0);
            for (k, j) in range.clone().enumerate() {
                acc += vals[j] * term.diff[k].conj() * w[j];
            }
            let coeff = acc * term.inv_mass;
            for j in range {
                out[j] += coeff;
            }
        }
        out
    }

    /// Applies the operator through the stored terms.
    pub fn apply(&self, f: &SimpleFunction) -> Result<SimpleFunction> {
        self.space.check_fn(f)?;
        SimpleFunction::new(self.space.tree, self.apply_raw(f.values()))
    }

    /// Applies the adjoint with respect to the `L^2(mu)` inner product.
    pub fn apply_adjoint(&self, g: &SimpleFunction) -> Result<SimpleFunction> {
        self.space.check_fn(g)?;
        SimpleFunction::new(self.space.tree, self.apply_adjoint_raw(g.values()))
    }

    /// Dense matrix over leaf coordinates: column `j` carries the
    /// averaging weight `w_j`.
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        let n = self.space.leaf_count();
        if n > DENSE_LEAF_LIMIT {
            return Err(Error::TooLargeForDense(n, DENSE_LEAF_LIMIT));
        }
        let w = self.space.mu.weights();
        let mut mat = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for term in &self.terms {
            let range = term.start..term.start + term.diff.len();
            for (k, i) in range.clone().enumerate() {
                let row = term.diff[k] * term.inv_mass;
                if row.norm_sqr() == 0.0 {
                    continue;
                }
                for j in range.clone() {
                    mat[(i, j)] += row * w[j];
                }
            }
        }
        Ok(mat)
    }

    /// Singular values of the operator restricted to positive-weight
    /// leaves, computed from the densified matrix.
    pub fn singular_spectrum(&self) -> Result<SingularSpectrum> {
        let mat = self.to_dense()?;
        spectral::weighted_singular_values(&mat, self.space.mu.weights())
    }

    /// Exact `L^2(mu)` spectrum; rejects operators tagged with another
    /// exponent.
    pub fn opnorm_p2(&self) -> Result<SingularSpectrum> {
        if self.p != 2.0 {
            return Err(Error::NotP2(self.p));
        }
        self.singular_spectrum()
    }

    /// Operator norm estimate by power iteration on the stored terms,
    /// independent of the dense route.
    pub fn power_opnorm(&self, seed: u64, max_iter: usize) -> f64 {
        spectral::power_iteration_opnorm(
            self.space.leaf_count(),
            self.space.mu.weights(),
            |v| self.apply_raw(v),
            |v| self.apply_adjoint_raw(v),
            seed,
            max_iter,
        )
    }

    /// Largest Rayleigh quotient `||Pf||_p / ||f||_p` over the given
    /// candidates; a certified lower bound for the `L^p(mu)` norm.
    pub fn lower_bound_p(&self, p: f64, candidates: &[SimpleFunction]) -> Result<f64> {
        let mut best = 0.0_f64;
        for f in candidates {
            let denom = self.space.lp_norm(f, p, None);
            if denom <= 0.0 {
                continue;
            }
            let num = self.space.lp_norm(&self.apply(f)?, p, None);
            best = best.max(num / denom);
        }
        Ok(best)
    }

    /// Interpolated upper bound for the `L^p(mu)` norm from the
    /// endpoint norms of the densified matrix.
    pub fn opnorm_interpolation_bound(&self, p: f64) -> Result<f64> {
        let mat = self.to_dense()?;
        spectral::interpolated_opnorm_bound(&mat, self.space.mu.weights(), p)
    }

    /// Oscillation testing inequality at `Q`: returns
    /// `(osc_p(b, Q), 2 ||P f_Q||_p, lhs <= rhs)`. Expects an operator
    /// assembled over every non-leaf cube.
    pub fn osc_testing_inequality(&self, q: CubeId, p: f64) -> Result<(f64, f64, bool)> {
        let lhs = self.space.osc(&self.symbol, q, p);
        let f_q = testing_function(self.space, q, p);
        let rhs = 2.0 * self.space.lp_norm(&self.apply(&f_q)?, p, None);
        Ok((lhs, rhs, lhs <= rhs + NECESSITY_SLACK))
    }
}

/// The normalized test function `1_Q / mu(Q)^{1/p}`, or zero when the
/// cube is null.
pub fn testing_function(space: Space, q: CubeId, p: f64) -> SimpleFunction {
    let mass = space.mu.mass(q);
    if mass <= 0.0 {
        return SimpleFunction::zeros(space.tree);
    }
    SimpleFunction::indicator(space.tree, q).scale(C64::new(mass.powf(-1.0 / p), 0.0))
}

/// Direct evaluation of `sum_{R in C, R subset Q} D_R b`; leaf members
/// act as zero.
pub fn localized_martingale_sum(
    space: Space,
    b: &SimpleFunction,
    collection: &CubeCollection,
    q: CubeId,
) -> Result<SimpleFunction> {
    space.check_fn(b)?;
    let mut out = SimpleFunction::zeros(space.tree);
    for &r in collection.ids() {
        if !space.tree.contains(q, r) || space.tree.is_leaf(r) {
            continue;
        }
        out.add_assign(&space.martingale_difference(b, r)?);
    }
    Ok(out)
}

/// Defining sum `sum_Q D_Q b <f>_Q 1_Q` evaluated term by term; kept
/// separate from the assembled fast path for cross-checking.
pub fn defining_sum(
    space: Space,
    b: &SimpleFunction,
    collection: &CubeCollection,
    f: &SimpleFunction,
) -> Result<SimpleFunction> {
    space.check_fn(b)?;
    space.check_fn(f)?;
    let mut out = SimpleFunction::zeros(space.tree);
    for &q in collection.ids() {
        if space.tree.is_leaf(q) {
            return Err(Error::NoChildren(q.0));
        }
        let avg = space.average(f, q);
        out.add_assign(&space.martingale_difference(b, q)?.scale(avg));
    }
    Ok(out)
}

/// Carleson testing norm
/// `sup_{Q in C} mu(Q)^{-1/p} || sum_{R in C, R subset Q} D_R b ||_p`,
/// computed in one coarse-to-fine pass of per-leaf suffix sums.
pub fn carleson_testing_norm(
    space: Space,
    b: &SimpleFunction,
    collection: &CubeCollection,
    p: f64,
) -> Result<f64> {
    debug_assert!(p >= 1.0, "exponent below 1: {p}");
    space.check_fn(b)?;
    let tree = space.tree;
    let n = tree.leaf_count();
    if collection.is_empty() {
        return Ok(0.0);
    }
    let mut cube_avg = vec![C64::new(0.0, 0.0); tree.cube_count()];
    for q in tree.all_cubes() {
        cube_avg[q.0 as usize] = space.average(b, q);
    }
    let w = space.mu.weights();
    let depth = tree.depth();
    let dim = tree.dim();
    let mut suffix = vec![C64::new(0.0, 0.0); n];
    let mut best = 0.0_f64;
    for level in (0..depth).rev() {
        let shift = dim * (depth - level);
        let child_shift = dim * (depth - level - 1);
        for (i, s) in suffix.iter_mut().enumerate() {
            let q = tree.id_at(level, i >> shift);
            if collection.contains(q) && space.mu.mass(q) > 0.0 {
                let child = tree.id_at(level + 1, i >> child_shift);
                *s += cube_avg[child.0 as usize] - cube_avg[q.0 as usize];
            }
        }
        for index in 0..tree.cubes_at_level(level) {
            let q = tree.id_at(level, index);
            if !collection.contains(q) {
                continue;
            }
            let mass = space.mu.mass(q);
            if mass <= 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for i in tree.leaf_range(q) {
                if w[i] > 0.0 {
                    acc += suffix[i].norm().powf(p) * w[i];
                }
            }
            best = best.max((acc / mass).powf(1.0 / p));
        }
    }
    Ok(best)
}

/// Exact value of `|| sup |<b>_R - <b>_S| 1_S ||_p` with `S` over the
/// members inside `Q`, and `R` over members and their dyadic children
/// contained in `S`; dominates the localized martingale sum for
/// connected collections.
pub fn telescoping_bound(
    space: Space,
    b: &SimpleFunction,
    collection: &CubeCollection,
    q: CubeId,
    p: f64,
) -> Result<f64> {
    space.check_fn(b)?;
    if !collection.is_connected(space.tree) {
        return Err(Error::NotConnected);
    }
    let tree = space.tree;
    let members: Vec<CubeId> = collection
        .ids()
        .iter()
        .copied()
        .filter(|&r| tree.contains(q, r))
        .collect();
    let mut candidates = members.clone();
    for &s in &members {
        if !tree.is_leaf(s) {
            candidates.extend(tree.children(s));
        }
    }
    candidates.sort();
    candidates.dedup();
    let averages: Vec<C64> = candidates.iter().map(|&r| space.average(b, r)).collect();
    let mut envelope = vec![0.0_f64; tree.leaf_count()];
    for &s in &members {
        let avg_s = space.average(b, s);
        let mut dev = 0.0_f64;
        for (&r, &avg_r) in candidates.iter().zip(&averages) {
            if tree.contains(s, r) {
                dev = dev.max((avg_r - avg_s).norm());
            }
        }
        for i in tree.leaf_range(s) {
            envelope[i] = envelope[i].max(dev);
        }
    }
    let w = space.mu.weights();
    let mut acc = 0.0;
    for (i, &e) in envelope.iter().enumerate() {
        if w[i] > 0.0 {
            acc += e.powf(p) * w[i];
        }
    }
    Ok(acc.powf(1.0 / p))
}

/// Which discarded part of the reduction a pipeline row refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscardedPart {
    Light,
    Heavy,
    Distant,
}

impl DiscardedPart {
    pub fn label(self) -> &'static str {
        match self {
            Self::Light => "light",
            Self::Heavy => "heavy",
            Self::Distant => "distant",
        }
    }
}

/// One discarded part at one cutoff: its testing norm, the oscillation
/// modulus that controls it, and their ratio. `constant` is zero when
/// the modulus vanishes; `ok` records whether the control is
/// meaningful (a vanishing modulus forces a vanishing norm).
#[derive(Clone, Debug, Serialize)]
pub struct PipelineRow {
    pub m: f64,
    pub part: DiscardedPart,
    pub discarded_size: usize,
    pub discarded_norm: f64,
    pub modulus: f64,
    pub constant: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineStep {
    pub m: f64,
    pub rows: Vec<PipelineRow>,
    pub retained_size: usize,
    pub retained_rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SufficiencyReport {
    pub p: f64,
    pub steps: Vec<PipelineStep>,
}

fn discarded_norm(
    space: Space,
    b: &SimpleFunction,
    coll: &CubeCollection,
    p: f64,
) -> Result<f64> {
    if coll.is_empty() {
        return Ok(0.0);
    }
    if p == 2.0 && space.leaf_count() <= DENSE_LEAF_LIMIT {
        Ok(Paraproduct::assemble(space, b, coll, 2.0)?
            .singular_spectrum()?
            .opnorm())
    } else {
        carleson_testing_norm(space, b, coll, p)
    }
}

fn control_constant(norm: f64, modulus: f64) -> (f64, bool) {
    if modulus > EXACT_F64 {
        (norm / modulus, true)
    } else {
        (0.0, norm <= EXACT_F64)
    }
}

/// Runs the reduction pipeline: for each cutoff `M` the non-leaf
/// collection is split by cube measure, the moderate part is reduced
/// against the default anchors, and each discarded part is reported
/// with the oscillation modulus controlling it. The retained part is
/// `inside` plus the anchor chains; its numerical rank is bounded by
/// the member count.
pub fn sufficiency_pipeline(
    space: Space,
    b: &SimpleFunction,
    p: f64,
    schedule: &[f64],
) -> Result<SufficiencyReport> {
    space.check_fn(b)?;
    let base = CubeCollection::non_leaf(space.tree);
    let mut steps = Vec::new();
    for &m in schedule {
        let split = space.partition_by_measure(&base, m)?;
        let anchors = space.default_anchors(m);
        let reduction = space.partition_reduction(&split.mid, &anchors);
        let retained = reduction.inside.union(&reduction.outside);
        let moduli = &space.vmo_moduli(b, p, &[m])[0];
        let parts = [
            (DiscardedPart::Light, &split.light, moduli.light),
            (DiscardedPart::Heavy, &split.heavy, moduli.heavy),
            (DiscardedPart::Distant, &reduction.distant, moduli.distant),
        ];
        let mut rows = Vec::with_capacity(parts.len());
        for (part, coll, modulus) in parts {
            let norm = discarded_norm(space, b, coll, p)?;
            let (constant, ok) = control_constant(norm, modulus);
            rows.push(PipelineRow {
                m,
                part,
                discarded_size: coll.len(),
                discarded_norm: norm,
                modulus,
                constant,
                ok,
            });
        }
        let retained_rank = if retained.is_empty() {
            0
        } else {
            Paraproduct::assemble(space, b, &retained, 2.0)?
                .singular_spectrum()?
                .rank(RANK_CUTOFF)
        };
        steps.push(PipelineStep {
            m,
            rows,
            retained_size: retained.len(),
            retained_rank,
        });
    }
    Ok(SufficiencyReport { p, steps })
}

/// Cesàro propagation data for a family under a fixed operator:
/// `c_N = (1/N) || sum_{n <= N} f_n ||_p` and the transformed profile
/// `g_N` for the images, checked against `g_N <= ||T|| c_N`.
#[derive(Clone, Debug, Serialize)]
pub struct UchiyamaReport {
    pub cesaro_profile: Vec<f64>,
    pub transformed_profile: Vec<f64>,
    pub operator_bound: f64,
    pub limit_norm: f64,
    pub ok: bool,
}

pub fn uchiyama_limit_check(
    space: Space,
    t: &DMatrix<C64>,
    family: &[SimpleFunction],
    p: f64,
) -> Result<UchiyamaReport> {
    let n = space.leaf_count();
    if t.nrows() != n || t.ncols() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: t.nrows().max(t.ncols()),
        });
    }
    let w = space.mu.weights();
    let operator_bound = if p == 2.0 {
        spectral::weighted_singular_values(t, w)?.opnorm()
    } else {
        spectral::interpolated_opnorm_bound(t, w, p)?
    };
    let mut sum = SimpleFunction::zeros(space.tree);
    let mut t_sum = SimpleFunction::zeros(space.tree);
    let mut cesaro_profile = Vec::with_capacity(family.len());
    let mut transformed_profile = Vec::with_capacity(family.len());
    let mut ok = true;
    for (idx, f) in family.iter().enumerate() {
        space.check_fn(f)?;
        sum.add_assign(f);
        t_sum.add_assign(&SimpleFunction::new(
            space.tree,
            spectral::apply_dense(t, f.values()),
        )?);
        let k = (idx + 1) as f64;
        let c = space.lp_norm(&sum, p, None) / k;
        let g = space.lp_norm(&t_sum, p, None) / k;
        ok &= g <= operator_bound * c + EXACT_F64;
        cesaro_profile.push(c);
        transformed_profile.push(g);
    }
    let limit_norm = transformed_profile.last().copied().unwrap_or(0.0);
    Ok(UchiyamaReport {
        cesaro_profile,
        transformed_profile,
        operator_bound,
        limit_norm,
        ok,
    })
}
