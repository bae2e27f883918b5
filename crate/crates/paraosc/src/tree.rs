//! Finite truncated dyadic trees.
//!
//! A tree covers the half-open box `[origin, origin + side)^dim` and
//! refines it through `depth` bisection levels. Level `0` is the root;
//! level `depth` holds the leaves. Every non-leaf cube has exactly
//! `2^dim` children, ordered by axis bits (for `dim = 1`, left then
//! right), which fixes a canonical depth-first leaf order used by all
//! leaf-indexed data.
//!
//! Geometry is exact: corners, side lengths, and squared distances to
//! the origin of coordinates are dyadic rationals. Measures and function
//! values live elsewhere and are plain `f64`/complex data.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact dyadic rational (denominators are powers of two throughout).
pub type Rational = num_rational::Ratio<i128>;

/// Largest supported `dim * depth`; leaf arrays stay comfortably in RAM.
pub const MAX_RESOLUTION_BITS: usize = 22;

/// Index of a cube in a [`DyadicTree`], level-major (root is id 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeId(pub u32);

#[derive(Clone, Debug)]
pub struct DyadicTree {
    dim: usize,
    depth: usize,
    coarsest_level: i32,
    origin: Vec<Rational>,
    root_side: Rational,
    /// `level_offsets[k]` is the id of the first cube at level `k`;
    /// one extra entry holds the total cube count.
    level_offsets: Vec<u32>,
}

impl DyadicTree {
    pub fn new(
        dim: usize,
        depth: usize,
        origin: Vec<Rational>,
        root_side: Rational,
        coarsest_level: i32,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidTree("dim must be at least 1".into()));
        }
        if depth == 0 {
            return Err(Error::InvalidTree(
                "depth must be at least 1 so cubes have children".into(),
            ));
        }
        if dim * depth > MAX_RESOLUTION_BITS {
            return Err(Error::InvalidTree(format!(
                "dim * depth = {} exceeds the supported {MAX_RESOLUTION_BITS} bits",
                dim * depth
            )));
        }
        if origin.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: origin.len(),
            });
        }
        if root_side <= Rational::zero() {
            return Err(Error::InvalidTree("root side must be positive".into()));
        }
        let mut level_offsets = Vec::with_capacity(depth + 2);
        let mut total: u32 = 0;
        for k in 0..=depth {
            level_offsets.push(total);
            total += 1u32 << (dim * k);
        }
        level_offsets.push(total);
        Ok(Self {
            dim,
            depth,
            coarsest_level,
            origin,
            root_side,
            level_offsets,
        })
    }

    /// The unit interval `[0, 1)` refined `depth` times.
    pub fn unit(depth: usize) -> Self {
        Self::unit_dim(1, depth)
    }

    /// The unit box `[0, 1)^dim` refined `depth` times.
    pub fn unit_dim(dim: usize, depth: usize) -> Self {
        Self::new(
            dim,
            depth,
            vec![Rational::zero(); dim],
            Rational::from_integer(1),
            0,
        )
        .expect("unit box parameters are valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn origin(&self) -> &[Rational] {
        &self.origin
    }

    pub fn root_side(&self) -> Rational {
        self.root_side
    }

    /// Label of tree level `k` in external numbering (coarsest at
    /// `coarsest_level`, finer levels increasing).
    pub fn level_label(&self, k: usize) -> i32 {
        self.coarsest_level + k as i32
    }

    pub fn coarsest_level(&self) -> i32 {
        self.coarsest_level
    }

    pub fn finest_level(&self) -> i32 {
        self.coarsest_level + self.depth as i32
    }

    /// Total number of cubes across all levels.
    pub fn cube_count(&self) -> usize {
        *self.level_offsets.last().unwrap() as usize
    }

    pub fn leaf_count(&self) -> usize {
        1usize << (self.dim * self.depth)
    }

    pub fn cubes_at_level(&self, level: usize) -> usize {
        1usize << (self.dim * level)
    }

    pub fn root(&self) -> CubeId {
        CubeId(0)
    }

    pub fn level_of(&self, q: CubeId) -> usize {
        debug_assert!((q.0 as usize) < self.cube_count());
        // level count is small; a linear scan beats binary search here
        let mut level = 0;
        while self.level_offsets[level + 1] <= q.0 {
            level += 1;
        }
        level
    }

    /// Position of the cube within its level, in canonical child order.
    pub fn index_in_level(&self, q: CubeId) -> usize {
        let level = self.level_of(q);
        (q.0 - self.level_offsets[level]) as usize
    }

    pub fn id_at(&self, level: usize, index: usize) -> CubeId {
        debug_assert!(level <= self.depth);
        debug_assert!(index < self.cubes_at_level(level));
        CubeId(self.level_offsets[level] + index as u32)
    }

    pub fn is_leaf(&self, q: CubeId) -> bool {
        self.level_of(q) == self.depth
    }

    pub fn parent(&self, q: CubeId) -> Option<CubeId> {
        let level = self.level_of(q);
        if level == 0 {
            return None;
        }
        let idx = self.index_in_level(q);
        Some(self.id_at(level - 1, idx >> self.dim))
    }

    /// Children in canonical order; empty for leaves.
    pub fn children(&self, q: CubeId) -> Vec<CubeId> {
        let level = self.level_of(q);
        if level == self.depth {
            return Vec::new();
        }
        let idx = self.index_in_level(q);
        let fan = 1usize << self.dim;
        (0..fan)
            .map(|c| self.id_at(level + 1, (idx << self.dim) | c))
            .collect()
    }

    /// Contiguous range of leaf indices below `q` in canonical order.
    pub fn leaf_range(&self, q: CubeId) -> std::ops::Range<usize> {
        let level = self.level_of(q);
        let idx = self.index_in_level(q);
        let shift = self.dim * (self.depth - level);
        (idx << shift)..((idx + 1) << shift)
    }

    /// Whether `inner` is contained in `outer` (equality counts).
    pub fn contains(&self, outer: CubeId, inner: CubeId) -> bool {
        let ro = self.leaf_range(outer);
        let ri = self.leaf_range(inner);
        ro.start <= ri.start && ri.end <= ro.end
    }

    /// Leaf cube id holding leaf index `i`.
    pub fn leaf_id(&self, i: usize) -> CubeId {
        self.id_at(self.depth, i)
    }

    pub fn all_cubes(&self) -> Vec<CubeId> {
        (0..self.cube_count() as u32).map(CubeId).collect()
    }

    pub fn non_leaf_cubes(&self) -> Vec<CubeId> {
        (0..self.level_offsets[self.depth]).map(CubeId).collect()
    }

    /// Ancestors of `q` from its parent up to the root.
    pub fn ancestors(&self, q: CubeId) -> Vec<CubeId> {
        let mut out = Vec::new();
        let mut cur = q;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out
    }

    /// Exact side length of cubes at `level`.
    pub fn side(&self, level: usize) -> Rational {
        self.root_side / Rational::from_integer(1i128 << level)
    }

    /// Lattice coordinates of `q` within its level grid, one per axis.
    pub fn lattice_position(&self, q: CubeId) -> Vec<u64> {
        let level = self.level_of(q);
        let idx = self.index_in_level(q);
        let mut coords = vec![0u64; self.dim];
        for step in 0..level {
            let choice = (idx >> (self.dim * (level - 1 - step))) & ((1 << self.dim) - 1);
            for (a, coord) in coords.iter_mut().enumerate() {
                *coord = (*coord << 1) | ((choice >> a) & 1) as u64;
            }
        }
        coords
    }

    /// Exact lower corner of `q`, one coordinate per axis.
    pub fn low_corner(&self, q: CubeId) -> Vec<Rational> {
        let level = self.level_of(q);
        let side = self.side(level);
        self.lattice_position(q)
            .iter()
            .zip(&self.origin)
            .map(|(&c, o)| *o + Rational::from_integer(c as i128) * side)
            .collect()
    }

    /// Exact squared Euclidean distance from the coordinate origin to
    /// the closed cube; zero when the origin lies in the closure.
    pub fn dist_origin_sq(&self, q: CubeId) -> Rational {
        let side = self.side(self.level_of(q));
        let mut sum = Rational::zero();
        for lo in self.low_corner(q) {
            let hi = lo + side;
            let gap = if lo > Rational::zero() {
                lo
            } else if hi < Rational::zero() {
                -hi
            } else {
                Rational::zero()
            };
            sum += gap * gap;
        }
        sum
    }

    /// Distance from the coordinate origin to the closed cube, as f64.
    pub fn dist_origin(&self, q: CubeId) -> f64 {
        rational_to_f64(self.dist_origin_sq(q)).sqrt()
    }

    /// Exact predicate `dist(0, q) >= m`, evaluated on squares.
    pub fn dist_at_least(&self, q: CubeId, m: f64) -> bool {
        if m <= 0.0 {
            return true;
        }
        rational_to_f64(self.dist_origin_sq(q)) >= m * m
    }

    /// Largest distance from the origin to a point of the closed cube.
    pub fn far_dist_origin(&self, q: CubeId) -> f64 {
        let side = self.side(self.level_of(q));
        let mut sum = Rational::zero();
        for lo in self.low_corner(q) {
            let hi = lo + side;
            let far = if lo.abs() > hi.abs() { lo.abs() } else { hi.abs() };
            sum += far * far;
        }
        rational_to_f64(sum).sqrt()
    }
}

pub fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Parses "3", "-5/8", or a dyadic decimal like "0.25" exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = |_| Error::InvalidParameter(format!("cannot parse rational from {s:?}"));
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: i128 = num.trim().parse().map_err(bad)?;
        let d: i128 = den.trim().parse().map_err(bad)?;
        if d == 0 {
            return Err(Error::InvalidParameter(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let i: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(bad)?
        };
        let digits = frac.len() as u32;
        let f: i128 = if frac.is_empty() { 0 } else { frac.parse().map_err(bad)? };
        let den = 10i128.pow(digits);
        let frac_part = Rational::new(f, den);
        let int_part = Rational::from_integer(i);
        return Ok(if neg { int_part - frac_part } else { int_part + frac_part });
    }
    let n: i128 = s.parse().map_err(bad)?;
    Ok(Rational::from_integer(n))
}

pub fn format_rational(r: Rational) -> String {
    if r.denom() == &1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
