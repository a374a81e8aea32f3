//! Uniform grids on `[0, 2pi]`, functions sampled on them, and the
//! tolerance-aware pointwise comparisons shared by every other module.

use crate::error::{Error, Result};

/// The full period. Computed once here and shared by all modules.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Default subinterval count for production solves.
pub const DEFAULT_SOLVE_N: usize = 2048;

/// Default subinterval count for verification sweeps.
pub const DEFAULT_SWEEP_N: usize = 256;

/// A uniform grid `t_i = 2pi * i / n` over `[0, 2pi]`.
///
/// `n` must be even (composite Simpson integrates panel pairs) and at least
/// [`Grid::MIN_N`]. Nodes are computed on demand; `i / n` is exact for
/// `i = 0` and `i = n`, so `node(0) == 0.0` and `node(n) == TWO_PI` exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub const MIN_N: usize = 16;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_N || n % 2 != 0 {
            return Err(Error::Grid(format!(
                "subinterval count must be an even integer >= {}, got {n}",
                Self::MIN_N
            )));
        }
        Ok(Self { n })
    }

    /// Number of subintervals.
    pub fn n(self) -> usize {
        self.n
    }

    /// Spacing `h = 2pi / n`.
    pub fn h(self) -> f64 {
        TWO_PI / self.n as f64
    }

    /// Node `t_i`, for `i` in `0..=n`.
    pub fn node(self, i: usize) -> f64 {
        debug_assert!(i <= self.n);
        TWO_PI * (i as f64 / self.n as f64)
    }

    /// `n + 1` (endpoints stored independently).
    pub fn num_nodes(self) -> usize {
        self.n + 1
    }

    pub fn nodes(self) -> impl Iterator<Item = f64> {
        (0..=self.n).map(move |i| self.node(i))
    }

    /// A grid with `factor` times as many subintervals, for refinement sweeps.
    pub fn refine(self, factor: usize) -> Result<Self> {
        Self::new(self.n * factor)
    }
}

/// Absolute and relative tolerances. Orderings use only `abs`; `rel` is
/// reserved for convergence tests (ordering near zero must not be relative).
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if !(abs > 0.0 && abs.is_finite() && rel > 0.0 && rel.is_finite()) {
            return Err(Error::Parameter(format!(
                "tolerances must be strictly positive and finite, got abs={abs}, rel={rel}"
            )));
        }
        Ok(Self { abs, rel })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-10,
            rel: 1e-8,
        }
    }
}

/// Values of a function at the nodes of a [`Grid`].
///
/// `values[0]` and `values[n]` are independent: a grid function may satisfy
/// `u(0) != u(2pi)`. Lower and upper solutions rely on exactly that freedom.
/// All values are finite by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::Grid(format!(
                "expected {} values, got {}",
                grid.num_nodes(),
                values.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!(
                    "value {v} at node {i} (t = {})",
                    grid.node(i)
                )));
            }
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.num_nodes()])
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.num_nodes()],
        }
    }

    /// Sample a closure at every node.
    pub fn sample(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    /// Sample a fallible closure at every node.
    pub fn try_sample(grid: Grid, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = grid.nodes().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(self.grid.n(), other.grid.n()));
        }
        Ok(())
    }

    /// `max_i |g(t_i)|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum value and the first node index attaining it.
    pub fn max_with_index(&self) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, &v) in self.values.iter().enumerate() {
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    }

    /// Minimum value and the first node index attaining it.
    pub fn min_with_index(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (i, &v) in self.values.iter().enumerate() {
            if v < best.0 {
                best = (v, i);
            }
        }
        best
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.grid, values)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `sup_i |self_i - other_i|`.
    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (&a, &b)| m.max((a - b).abs())))
    }
}

/// Outcome of a pointwise ordering check `g1 <= g2`.
///
/// `worst_excess` is `max_i (g1_i - g2_i)`; positive means the ordering is
/// violated by that amount at `worst_index`. Ties resolve to the smallest
/// node index so concurrent evaluation stays deterministic.
#[derive(Clone, Copy, Debug)]
pub struct OrderingReport {
    pub holds: bool,
    pub worst_index: usize,
    pub worst_t: f64,
    pub worst_excess: f64,
}

/// `true` iff `g1_i <= g2_i + tol.abs` at every node.
pub fn leq_pointwise(g1: &GridFunction, g2: &GridFunction, tol: Tolerance) -> Result<OrderingReport> {
    g1.check_same_grid(g2)?;
    let diff = g1.sub(g2)?;
    let (worst_excess, worst_index) = diff.max_with_index();
    Ok(OrderingReport {
        holds: worst_excess <= tol.abs,
        worst_index,
        worst_t: g1.grid().node(worst_index),
        worst_excess,
    })
}
