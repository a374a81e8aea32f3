//! Composite Simpson quadrature on the solver grid, plus the running
//! integrals `int_0^{t_i}` needed by the closed-form linear solve.
//!
//! Trapezoid would superconverge on periodic integrands, but the weighted
//! integrands `exp(+-M s) * sigma(s)` are not periodic, so Simpson's
//! order-4 rule is used throughout.

use crate::error::Result;
use crate::grid::GridFunction;

/// Composite Simpson approximation of `int_0^{2pi} g(t) dt`.
///
/// Exact for polynomials of degree <= 3 on each panel pair. The grid
/// guarantees an even subinterval count; the assertion is defensive.
pub fn simpson(g: &GridFunction) -> f64 {
    let n = g.grid().n();
    debug_assert!(n % 2 == 0, "composite Simpson needs an even n");
    let v = g.values();
    let mut acc = v[0] + v[n];
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 * v[i] } else { 2.0 * v[i] };
    }
    acc * g.grid().h() / 3.0
}

/// Running integrals `F_i = int_0^{t_i} g dt` at every node.
///
/// Even nodes accumulate whole Simpson panels. At an odd node the last
/// half-panel is integrated with the 3-point rule `h (5 g_k + 8 g_{k+1} -
/// g_{k+2}) / 12`, the quadratic through the panel's nodes restricted to
/// its first half.
pub fn cumulative_simpson(g: &GridFunction) -> Result<GridFunction> {
    let grid = g.grid();
    let n = grid.n();
    let h = grid.h();
    let v = g.values();
    let mut cum = vec![0.0; n + 1];
    for k in (0..n).step_by(2) {
        cum[k + 1] = cum[k] + h * (5.0 * v[k] + 8.0 * v[k + 1] - v[k + 2]) / 12.0;
        cum[k + 2] = cum[k] + h * (v[k] + 4.0 * v[k + 1] + v[k + 2]) / 3.0;
    }
    GridFunction::new(grid, cum)
}
