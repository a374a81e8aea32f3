//! Independent finite-difference verifier.
//!
//! Everything here deliberately avoids the closed-form machinery: the
//! periodic linear problem becomes a cyclic tridiagonal system from the
//! 3-point stencil, solved in O(n) by Sherman-Morrison; the nonlinear
//! problem is handled by damped Newton on the discretized equations. Both
//! converge at O(h^2), which is exactly what makes them useful as a
//! cross-check on the order-4 primary path: agreement must improve at
//! observed order 2 under grid doubling.
//!
//! Only the periodic case `mu = lambda = 0` is discretized (the case every
//! iteration step uses). General jumps are verified by residual
//! substitution instead, avoiding an awkward jump-condition stencil.

use crate::bracket::NonlinearPbvp;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, Tolerance};
use crate::linsolve::validate_m;

/// The cyclic stencil `(-u_{i-1} + 2 u_i - u_{i+1}) / h^2 + M^2 u_i`.
///
/// Symmetric positive definite for M > 0: the diagonal `2/h^2 + M^2`
/// strictly dominates the off-diagonal mass `2/h^2`.
#[derive(Clone, Copy, Debug)]
pub struct FdSystem {
    pub grid: Grid,
    pub diag: f64,
    pub off: f64,
}

impl FdSystem {
    pub fn new(m: f64, grid: Grid) -> Result<Self> {
        validate_m(m)?;
        let h = grid.h();
        Ok(Self {
            grid,
            diag: 2.0 / (h * h) + m * m,
            off: -1.0 / (h * h),
        })
    }
}

/// Thomas algorithm for a tridiagonal system with constant off-diagonals.
/// `diag` and `rhs` are consumed as scratch.
fn thomas(diag: &mut [f64], off: f64, rhs: &mut [f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut x = vec![0.0; n];
    let mut gam = vec![0.0; n];
    let mut bet = diag[0];
    if bet == 0.0 {
        return Err(Error::Newton("tridiagonal pivot vanished".into()));
    }
    rhs[0] /= bet;
    for j in 1..n {
        gam[j] = off / bet;
        bet = diag[j] - off * gam[j];
        if bet == 0.0 {
            return Err(Error::Newton("tridiagonal pivot vanished".into()));
        }
        rhs[j] = (rhs[j] - off * rhs[j - 1]) / bet;
    }
    x[n - 1] = rhs[n - 1];
    for j in (0..n - 1).rev() {
        x[j] = rhs[j] - gam[j + 1] * x[j + 1];
    }
    Ok(x)
}

/// Cyclic tridiagonal solve via the Sherman-Morrison rank-one update.
/// `corner` is the wrap-around coupling (both corners equal here).
fn solve_cyclic(diag: &[f64], off: f64, corner: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert!(n >= 3);
    let gamma = -diag[0];
    let mut modified = diag.to_vec();
    modified[0] -= gamma;
    modified[n - 1] -= corner * corner / gamma;

    let mut x = thomas(&mut modified.clone(), off, &mut rhs.to_vec())?;
    let mut unit = vec![0.0; n];
    unit[0] = gamma;
    unit[n - 1] = corner;
    let z = thomas(&mut modified, off, &mut unit)?;

    let factor = (x[0] + corner * x[n - 1] / gamma) / (1.0 + z[0] + corner * z[n - 1] / gamma);
    if !factor.is_finite() {
        return Err(Error::Newton("cyclic correction factor is not finite".into()));
    }
    for i in 0..n {
        x[i] -= factor * z[i];
    }
    Ok(x)
}

/// Solve `-u'' + M^2 u = sigma` with periodic boundary conditions on the
/// stencil, unknowns `u_0 .. u_{n-1}` and `u_n := u_0`.
pub fn fd_solve_linear(sigma: &GridFunction, m: f64, grid: Grid) -> Result<GridFunction> {
    if sigma.grid() != grid {
        return Err(Error::GridMismatch(sigma.grid().n(), grid.n()));
    }
    let sys = FdSystem::new(m, grid)?;
    let n = grid.n();
    let diag = vec![sys.diag; n];
    let rhs: Vec<f64> = sigma.values()[..n].to_vec();
    let mut u = solve_cyclic(&diag, sys.off, sys.off, &rhs)?;
    u.push(u[0]);
    GridFunction::new(grid, u)
}

/// Dense Gaussian-elimination reference for the same system, for n <= 64.
/// Exists purely so tests can validate the Sherman-Morrison reduction.
pub fn dense_solve_linear(sigma: &GridFunction, m: f64, grid: Grid) -> Result<GridFunction> {
    if grid.n() > 64 {
        return Err(Error::Parameter(format!(
            "dense reference solve is capped at n = 64, got {}",
            grid.n()
        )));
    }
    if sigma.grid() != grid {
        return Err(Error::GridMismatch(sigma.grid().n(), grid.n()));
    }
    let sys = FdSystem::new(m, grid)?;
    let n = grid.n();
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        a[i][i] = sys.diag;
        a[i][(i + 1) % n] += sys.off;
        a[i][(i + n - 1) % n] += sys.off;
        a[i][n] = sigma.value(i);
    }
    // partial pivoting
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        if a[col][col] == 0.0 {
            return Err(Error::Newton("dense solve: singular matrix".into()));
        }
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..=n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut u = vec![0.0; n + 1];
    for row in (0..n).rev() {
        let mut acc = a[row][n];
        for k in row + 1..n {
            acc -= a[row][k] * u[k];
        }
        u[row] = acc / a[row][row];
    }
    u[n] = u[0];
    GridFunction::new(grid, u)
}

fn df_du(prob: &NonlinearPbvp, t: f64, u: f64) -> Result<f64> {
    match prob.f.partial_u() {
        Ok(fu) => fu.eval(t, u),
        Err(Error::Diff(_)) => {
            let d = 1e-6 * (1.0 + u.abs());
            Ok((prob.f.eval(t, u + d)? - prob.f.eval(t, u - d)?) / (2.0 * d))
        }
        Err(e) => Err(e),
    }
}

/// Damped Newton iteration on the discretized nonlinear system
/// `(-u_{i-1} + 2 u_i - u_{i+1}) / h^2 - f(t_i, u_i) = 0` with periodic
/// wrap. Steps are halved (up to 30 times) until the residual decreases.
pub fn fd_solve_nonlinear(
    prob: &NonlinearPbvp,
    initial: &GridFunction,
    grid: Grid,
    tol: Tolerance,
    max_iter: usize,
) -> Result<GridFunction> {
    if initial.grid() != grid {
        return Err(Error::GridMismatch(initial.grid().n(), grid.n()));
    }
    let n = grid.n();
    let h = grid.h();
    let h2 = h * h;
    let mut u: Vec<f64> = initial.values()[..n].to_vec();

    let residual_of = |u: &[f64]| -> Result<Vec<f64>> {
        (0..n)
            .map(|i| {
                let um = u[(i + n - 1) % n];
                let up = u[(i + 1) % n];
                Ok((2.0 * u[i] - um - up) / h2 - prob.f.eval(grid.node(i), u[i])?)
            })
            .collect()
    };
    let sup = |g: &[f64]| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut g = residual_of(&u)?;
    let mut res = sup(&g);
    for _ in 0..max_iter {
        // the discrete residual cannot drop below rounding noise of the
        // 1/h^2 terms; accept once we are there
        let floor = 32.0 * f64::EPSILON * (2.0 / h2) * (1.0 + sup(&u));
        if res <= tol.abs.max(floor) {
            let mut out = u.clone();
            out.push(out[0]);
            return GridFunction::new(grid, out);
        }
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            diag.push(2.0 / h2 - df_du(prob, grid.node(i), u[i])?);
        }
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let step = solve_cyclic(&diag, -1.0 / h2, -1.0 / h2, &neg_g)?;

        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(x, d)| x + s * d).collect();
            match residual_of(&trial) {
                Ok(tg) => {
                    let tres = sup(&tg);
                    if tres < res {
                        u = trial;
                        g = tg;
                        res = tres;
                        accepted = true;
                        break;
                    }
                }
                Err(_) => {} // trial left f's domain; halve and retry
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(Error::Newton(format!(
                "step halving exhausted at residual {res:.3e}"
            )));
        }
    }
    let floor = 32.0 * f64::EPSILON * (2.0 / h2) * (1.0 + sup(&u));
    if res <= tol.abs.max(floor) {
        let mut out = u;
        out.push(out[0]);
        return GridFunction::new(grid, out);
    }
    Err(Error::Newton(format!(
        "no convergence after {max_iter} iterations (residual {res:.3e})"
    )))
}

/// Residuals of a candidate solution under direct substitution.
#[derive(Clone, Copy, Debug)]
pub struct ResidualReport {
    /// `sup` over interior nodes of `|-D2 u - f(t, u)|` (3-point stencil).
    pub interior: f64,
    /// `|u(0) - u(2pi)|`
    pub bc_value: f64,
    /// `|u'(0) - u'(2pi)|`, one-sided O(h^2) endpoint differences.
    pub bc_deriv: f64,
}

pub fn residual(u: &GridFunction, prob: &NonlinearPbvp) -> Result<ResidualReport> {
    let grid = u.grid();
    let n = grid.n();
    let h = grid.h();
    let v = u.values();
    let mut interior = 0.0f64;
    for i in 1..n {
        let d2 = (v[i - 1] - 2.0 * v[i] + v[i + 1]) / (h * h);
        let r = (-d2 - prob.f.eval(grid.node(i), v[i])?).abs();
        interior = interior.max(r);
    }
    let du0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    let du2pi = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
    Ok(ResidualReport {
        interior,
        bc_value: (v[0] - v[n]).abs(),
        bc_deriv: (du0 - du2pi).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Field2;
    use crate::grid::TWO_PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    #[test]
    fn zero_sigma_solves_to_zero() {
        let g = grid(64);
        let u = fd_solve_linear(&GridFunction::zeros(g), 1.0, g).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
    }

    #[test]
    fn constants_are_exact_for_the_stencil() {
        let g = grid(64);
        let one = GridFunction::constant(g, 1.0).unwrap();
        let u = fd_solve_linear(&one, 2.0, g).unwrap();
        for i in 0..=g.n() {
            assert!((u.value(i) - 0.25).abs() < 1e-13);
        }
    }

    #[test]
    fn sine_converges_at_order_two() {
        let exact_err = |n: usize| {
            let g = grid(n);
            let s = GridFunction::sample(g, f64::sin).unwrap();
            let u = fd_solve_linear(&s, 1.0, g).unwrap();
            let exact = GridFunction::sample(g, |t| t.sin() / 2.0).unwrap();
            u.sup_distance(&exact).unwrap()
        };
        let (e1, e2, e3) = (exact_err(256), exact_err(512), exact_err(1024));
        for order in [(e1 / e2).log2(), (e2 / e3).log2()] {
            assert!((order - 2.0).abs() <= 0.2, "observed order {order}");
        }
    }

    #[test]
    fn sherman_morrison_matches_dense_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [16, 32, 64] {
            let g = grid(n);
            for m in [0.3, 1.0, 9.0] {
                let shift: f64 = rng.gen_range(-1.0..1.0);
                let sigma = GridFunction::sample(g, |t| shift + t.sin()).unwrap();
                let fast = fd_solve_linear(&sigma, m, g).unwrap();
                let dense = dense_solve_linear(&sigma, m, g).unwrap();
                assert!(
                    fast.sup_distance(&dense).unwrap() <= 1e-12,
                    "n = {n}, M = {m}"
                );
            }
        }
    }

    #[test]
    fn dense_reference_is_capped() {
        let g = grid(128);
        let s = GridFunction::zeros(g);
        assert!(dense_solve_linear(&s, 1.0, g).is_err());
    }

    #[test]
    fn newton_is_exact_on_linear_problems() {
        // f(t, u) = -u + sin t: one Newton step from zero lands on the
        // discrete solution of -u'' + u = sin t.
        let g = grid(512);
        let prob = NonlinearPbvp::new(Field2::parse("-u + sin(t)").unwrap(), 1.0).unwrap();
        let u = fd_solve_nonlinear(&prob, &GridFunction::zeros(g), g, Tolerance::default(), 3)
            .unwrap();
        let exact = GridFunction::sample(g, |t| t.sin() / 2.0).unwrap();
        assert!(u.sup_distance(&exact).unwrap() < 1e-4); // O(h^2) discretization
        let lin = fd_solve_linear(&GridFunction::sample(g, f64::sin).unwrap(), 1.0, g).unwrap();
        assert!(u.sup_distance(&lin).unwrap() < 1e-11); // matches the discrete solve
    }

    #[test]
    fn newton_solves_the_manufactured_cubic() {
        // f(t, cos t) = cos t = -(cos t)'' makes cos t the exact solution.
        let g = grid(1024);
        let prob =
            NonlinearPbvp::new(Field2::parse("-u^3 + cos(t) + cos(t)^3").unwrap(), 5.0).unwrap();
        let initial = GridFunction::zeros(g);
        let u = fd_solve_nonlinear(&prob, &initial, g, Tolerance::default(), 40).unwrap();
        let exact = GridFunction::sample(g, f64::cos).unwrap();
        let err = u.sup_distance(&exact).unwrap();
        assert!(err < 4.0 * g.h() * g.h(), "error {err}");
    }

    #[test]
    fn newton_accepts_an_exact_initial_guess() {
        let g = grid(256);
        let prob = NonlinearPbvp::new(Field2::parse("-u + sin(t)").unwrap(), 1.0).unwrap();
        let exact = fd_solve_nonlinear(&prob, &GridFunction::zeros(g), g, Tolerance::default(), 10)
            .unwrap();
        // restarting from the exact discrete solution needs zero steps
        let again = fd_solve_nonlinear(&prob, &exact, g, Tolerance::default(), 0);
        assert!(again.is_ok());
        assert!(again.unwrap().sup_distance(&exact).unwrap() == 0.0);
    }

    #[test]
    fn residual_of_constants() {
        let g = grid(64);
        let prob = NonlinearPbvp::new(Field2::parse("0*u").unwrap(), 1.0).unwrap();
        let c = GridFunction::constant(g, 3.25).unwrap();
        let r = residual(&c, &prob).unwrap();
        assert!(r.interior < 1e-10);
        assert_eq!(r.bc_value, 0.0);
        assert!(r.bc_deriv < 1e-10);
    }

    #[test]
    fn residual_of_manufactured_solution_is_order_h_squared() {
        let prob =
            NonlinearPbvp::new(Field2::parse("-u^3 + cos(t) + cos(t)^3").unwrap(), 5.0).unwrap();
        for n in [256, 512] {
            let g = grid(n);
            let u = GridFunction::sample(g, f64::cos).unwrap();
            let r = residual(&u, &prob).unwrap();
            let h2 = g.h() * g.h();
            assert!(r.interior < h2, "interior {} vs h^2 {h2}", r.interior);
            assert!(r.bc_value < 1e-12);
            assert!(r.bc_deriv < h2);
        }
    }

    #[test]
    fn lower_solution_is_not_a_solution() {
        // alpha = -e^{-t} satisfies the equation for f = -u but not the
        // periodic boundary condition: bc_value = 1 - e^{-2pi}.
        let g = grid(512);
        let prob = NonlinearPbvp::new(Field2::parse("-u").unwrap(), 1.0).unwrap();
        let alpha = GridFunction::sample(g, |t| -(-t).exp()).unwrap();
        let r = residual(&alpha, &prob).unwrap();
        let h2 = g.h() * g.h();
        assert!(r.interior < h2 / 6.0); // O(h^2) on a smooth exact ODE solution
        let want = 1.0 - (-TWO_PI).exp();
        assert!((r.bc_value - want).abs() < 1e-12);
    }

    #[test]
    fn oracle_agrees_with_closed_form_at_order_two() {
        use crate::linsolve::{solve, LinearPbvp};
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [0.25, 1.0, 4.0, 12.0] {
            let mut errs = Vec::new();
            let coeffs: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for n in [256usize, 512, 1024] {
                let g = grid(n);
                let sigma = GridFunction::sample(g, |t| {
                    coeffs[0] + coeffs[1] * t.sin() + coeffs[2] * (2.0 * t).cos()
                })
                .unwrap();
                let closed = solve(&LinearPbvp::periodic(m, sigma.clone()).unwrap(), g)
                    .unwrap()
                    .u;
                let fd = fd_solve_linear(&sigma, m, g).unwrap();
                errs.push(closed.sup_distance(&fd).unwrap());
            }
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!((order - 2.0).abs() <= 0.2, "M = {m}: order {order}");
            }
        }
    }

    #[test]
    fn fd_system_is_diagonally_dominant() {
        let g = grid(64);
        let sys = FdSystem::new(3.0, g).unwrap();
        assert!(sys.diag > 2.0 * sys.off.abs());
    }
}
