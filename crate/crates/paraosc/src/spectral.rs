//! Singular spectra of dense operators on weighted leaf space.
//!
//! The operator norm on `L^2(mu)` of a matrix `A` acting on leaf
//! vectors is the largest singular value of `W^{1/2} A W^{-1/2}`
//! restricted to the positive-weight coordinates. Two independent
//! routes compute it: a dense SVD and a power iteration that only
//! touches the operator through matvec closures. Endpoint norms on
//! `L^1(mu)` and `L^inf(mu)` give interpolation upper bounds for the
//! remaining exponents.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::func::C64;
use crate::tol;

/// Singular values in decreasing order.
#[derive(Clone, Debug)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The `(k + 1)`-th largest singular value; 0 past the end, so the
    /// tail of a finite-rank operator reads as exact zeros.
    pub fn a(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    pub fn opnorm(&self) -> f64 {
        self.a(0)
    }

    pub fn rank(&self, cutoff: f64) -> usize {
        self.values.iter().filter(|&&s| s > cutoff).count()
    }
}

/// Singular values of a complex matrix. Real input goes through the
/// real SVD directly; otherwise the matrix embeds as the real block
/// form `[[X, -Y], [Y, X]]`, whose spectrum repeats each singular
/// value twice.
pub fn singular_values(mat: &DMatrix<C64>) -> SingularSpectrum {
    let (r, c) = mat.shape();
    if r == 0 || c == 0 {
        return SingularSpectrum::from_values(Vec::new());
    }
    if mat.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::from_fn(r, c, |i, j| mat[(i, j)].re);
        return SingularSpectrum::from_values(real.svd(false, false).singular_values.iter().copied().collect());
    }
    let embed = DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = mat[(i % r, j % c)];
        match (i >= r, j >= c) {
            (false, false) | (true, true) => z.re,
            (false, true) => -z.im,
            (true, false) => z.im,
        }
    });
    let mut vals: Vec<f64> = embed.svd(false, false).singular_values.iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    SingularSpectrum::from_values(vals.into_iter().step_by(2).collect())
}

/// Conjugate `A` to `W^{1/2} A W^{-1/2}` on the positive-weight
/// coordinates and return its singular values. This is the spectrum of
/// the operator induced on `L^2(mu)`, where values on null leaves are
/// invisible.
pub fn weighted_singular_values(mat: &DMatrix<C64>, weights: &[f64]) -> Result<SingularSpectrum> {
    let n = weights.len();
    if mat.shape() != (n, n) {
        return Err(Error::LengthMismatch {
            expected: n,
            got: mat.nrows(),
        });
    }
    let alive: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
    let b = DMatrix::from_fn(alive.len(), alive.len(), |i, j| {
        let (gi, gj) = (alive[i], alive[j]);
        mat[(gi, gj)] * (weights[gi].sqrt() / weights[gj].sqrt())
    });
    Ok(singular_values(&b))
}

/// Operator norm on `L^1(mu)`: the largest weighted column sum
/// `(1/w_j) sum_i |A_ij| w_i` over positive-weight columns.
pub fn l1_opnorm(mat: &DMatrix<C64>, weights: &[f64]) -> f64 {
    let n = weights.len();
    let mut best = 0.0f64;
    for j in 0..n {
        if weights[j] == 0.0 {
            continue;
        }
        let mut col = 0.0;
        for i in 0..n {
            if weights[i] > 0.0 {
                col += mat[(i, j)].norm() * weights[i];
            }
        }
        best = best.max(col / weights[j]);
    }
    best
}

/// Operator norm on `L^inf(mu)`: the largest row sum over the
/// positive-weight block.
pub fn linfty_opnorm(mat: &DMatrix<C64>, weights: &[f64]) -> f64 {
    let n = weights.len();
    let mut best = 0.0f64;
    for i in 0..n {
        if weights[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n {
            if weights[j] > 0.0 {
                row += mat[(i, j)].norm();
            }
        }
        best = best.max(row);
    }
    best
}

/// Upper bound for the operator norm on `L^p(mu)` by interpolating
/// the endpoint norms: `|T|_1^{1/p} * |T|_inf^{1 - 1/p}`. Exact at
/// `p = 1`.
pub fn interpolated_opnorm_bound(mat: &DMatrix<C64>, weights: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "p must lie in [1, inf), got {p}"
        )));
    }
    let t = 1.0 / p;
    Ok(l1_opnorm(mat, weights).powf(t) * linfty_opnorm(mat, weights).powf(1.0 - t))
}

fn wdot(x: &[C64], y: &[C64], w: &[f64]) -> C64 {
    let mut s = C64::ZERO;
    for i in 0..x.len() {
        if w[i] > 0.0 {
            s += x[i] * y[i].conj() * w[i];
        }
    }
    s
}

fn wnorm(x: &[C64], w: &[f64]) -> f64 {
    wdot(x, x, w).re.max(0.0).sqrt()
}

/// Largest singular value on `L^2(mu)` of an operator given only
/// through `apply` and its `mu`-adjoint, by power iteration on the
/// normal operator. Deterministic for a fixed seed. The iteration
/// stops once the Rayleigh estimate is stable to
/// [`tol::POWER_ITERATION_REL`] or after `max_iter` rounds.
pub fn power_iteration_opnorm(
    n: usize,
    weights: &[f64],
    apply: impl Fn(&[C64]) -> Vec<C64>,
    apply_adj: impl Fn(&[C64]) -> Vec<C64>,
    seed: u64,
    max_iter: usize,
) -> f64 {
    assert_eq!(weights.len(), n, "weight vector must match dimension");
    if n == 0 || weights.iter().all(|&w| w == 0.0) {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..n)
        .map(|i| {
            if weights[i] > 0.0 {
                C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            } else {
                C64::ZERO
            }
        })
        .collect();
    let nv = wnorm(&v, weights);
    if nv == 0.0 {
        return 0.0;
    }
    for x in &mut v {
        *x /= nv;
    }
    let mut sigma = 0.0f64;
    for _ in 0..max_iter {
        let u = apply(&v);
        let z = apply_adj(&u);
        let rayleigh = wdot(&z, &v, weights).re.max(0.0);
        let next = rayleigh.sqrt();
        let settled = (next - sigma).abs() <= tol::POWER_ITERATION_REL * next.max(1.0);
        sigma = next;
        let nz = wnorm(&z, weights);
        if nz == 0.0 {
            return sigma;
        }
        for (x, zi) in v.iter_mut().zip(&z) {
            *x = zi / nz;
        }
        if settled {
            break;
        }
    }
    sigma
}

/// Dense-matrix matvec on leaf vectors.
pub fn apply_dense(mat: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    let (r, c) = mat.shape();
    debug_assert_eq!(c, v.len());
    (0..r)
        .map(|i| (0..c).map(|j| mat[(i, j)] * v[j]).sum())
        .collect()
}

/// The `mu`-adjoint matvec: `(A^*_mu)_ij = (w_j / w_i) conj(A_ji)` on
/// positive-weight coordinates.
pub fn apply_dense_adjoint(mat: &DMatrix<C64>, weights: &[f64], v: &[C64]) -> Vec<C64> {
    let n = weights.len();
    debug_assert_eq!(mat.shape(), (n, n));
    (0..n)
        .map(|i| {
            if weights[i] == 0.0 {
                return C64::ZERO;
            }
            let mut s = C64::ZERO;
            for j in 0..n {
                if weights[j] > 0.0 {
                    s += mat[(j, i)].conj() * v[j] * (weights[j] / weights[i]);
                }
            }
            s
        })
        .collect()
}
