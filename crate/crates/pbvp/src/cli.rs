//! Command implementations behind the `pbvp` binary.
//!
//! Each command returns a process exit code; codes are a total function of
//! the run outcome:
//!
//! | code | meaning                                             |
//! |------|-----------------------------------------------------|
//! | 0    | success (hypotheses pass / converged)               |
//! | 1    | verify: hypotheses fail, criterion not applicable   |
//! | 2    | config or usage error                               |
//! | 3    | numeric failure (evaluation, Newton divergence, io) |
//! | 4    | ANOMALY: hypotheses pass but a conclusion fails     |
//! | 5    | iteration did not converge within max_iter          |
//! | 6    | bracket validation failed                           |

use crate::bracket::{BracketPair, NonlinearPbvp};
use crate::compare::{
    check_nonnegativity_budget, check_nonpositivity_boundary, check_nonpositivity_budget,
    check_nonpositivity_uniform, Candidate, ComparisonInstance, ComparisonReport,
    ConclusionStatus, CriterionId, OmegaSpec,
};
use crate::config::ProblemConfig;
use crate::error::{Error, Result};
use crate::expr::Field1;
use crate::grid::{Grid, GridFunction, Tolerance};
use crate::linsolve::{solve, LinearPbvp, Sigma};
use crate::monotone::{iterate, IterationConfig, IterationHistory};
use crate::oracle::{fd_solve_linear, fd_solve_nonlinear};
use std::io::Write;
use std::path::Path;

pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const HYPOTHESES_NOT_MET: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const ANOMALY: i32 = 4;
    pub const NOT_CONVERGED: i32 = 5;
    pub const BRACKET: i32 = 6;
}

/// Flags shared by the subcommands.
#[derive(Clone, Debug, Default)]
pub struct CommonOpts {
    pub n: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub force: bool,
}

fn code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parameter(_) | Error::Parse(_) | Error::Expression(_) => {
            exit_code::CONFIG
        }
        Error::Bracket(_) => exit_code::BRACKET,
        Error::Anomaly(_) => exit_code::ANOMALY,
        Error::NoConvergence { .. } => exit_code::NOT_CONVERGED,
        _ => exit_code::NUMERIC,
    }
}

fn fail(w: &mut dyn Write, err: &Error) -> i32 {
    let _ = writeln!(w, "error: {err}");
    code_for(err)
}

fn tolerance(cfg: Option<&ProblemConfig>, opts: &CommonOpts) -> Result<Tolerance> {
    let abs = opts
        .tol
        .or(cfg.map(|c| c.numerics.abs_tol))
        .unwrap_or(Tolerance::default().abs);
    let rel = cfg
        .map(|c| c.numerics.rel_tol)
        .unwrap_or(Tolerance::default().rel);
    Tolerance::new(abs, rel)
}

fn resolve_grid(cfg: Option<&ProblemConfig>, opts: &CommonOpts) -> Result<Grid> {
    match cfg {
        Some(c) => c.resolve_grid(opts.n),
        None => {
            // same precedence without a config: flag, environment, default
            let n = if let Some(n) = opts.n {
                n
            } else if let Ok(s) = std::env::var("PBVP_DEFAULT_N") {
                s.parse::<usize>().map_err(|_| {
                    Error::Config(format!("PBVP_DEFAULT_N: expected an integer, got `{s}`"))
                })?
            } else {
                crate::grid::DEFAULT_SOLVE_N
            };
            Grid::new(n)
        }
    }
}

/// Full-precision decimal so CSV round-trips preserve the bit pattern.
fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv_tu(path: &Path, u: &GridFunction) -> Result<()> {
    let mut out = String::from("t,u\n");
    for (i, t) in u.grid().nodes().enumerate() {
        out.push_str(&csv_float(t));
        out.push(',');
        out.push_str(&csv_float(u.value(i)));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// `solve-linear CONFIG [--out u.csv]`
pub fn cmd_solve_linear(
    config_path: &Path,
    opts: &CommonOpts,
    out_csv: Option<&Path>,
    w: &mut dyn Write,
) -> i32 {
    match run_solve_linear(config_path, opts, out_csv, w) {
        Ok(code) => code,
        Err(e) => fail(w, &e),
    }
}

fn run_solve_linear(
    config_path: &Path,
    opts: &CommonOpts,
    out_csv: Option<&Path>,
    w: &mut dyn Write,
) -> Result<i32> {
    let cfg = ProblemConfig::from_path(config_path)?;
    let lin = cfg
        .linear
        .as_ref()
        .ok_or_else(|| Error::Config("linear: section required by solve-linear".into()))?;
    let grid = resolve_grid(Some(&cfg), opts)?;
    let p = LinearPbvp::new(lin.m, Sigma::Field(lin.sigma.clone()), lin.mu, lin.lambda)?;
    let sol = solve(&p, grid)?;

    writeln!(w, "linear solve: n = {}, M = {}", grid.n(), lin.m)?;
    writeln!(w, "  C1 = {:+.12e}", sol.c1)?;
    writeln!(w, "  C2 = {:+.12e}", sol.c2)?;
    writeln!(
        w,
        "  boundary residuals: |u(0)-u(2pi)-mu| = {:.3e}, |u'(0)-u'(2pi)-lambda| = {:.3e}",
        (sol.jump_value() - lin.mu).abs(),
        (sol.jump_derivative() - lin.lambda).abs()
    )?;
    writeln!(w, "  sup|u| = {:.12e}", sol.u.sup_norm())?;
    if let Some(path) = out_csv {
        write_csv_tu(path, &sol.u)?;
        writeln!(w, "  wrote {}", path.display())?;
    }
    Ok(exit_code::SUCCESS)
}

/// `verify [CONFIG] --theorem 2.x --u EXPR [--omega EXPR] [--M x]`
#[allow(clippy::too_many_arguments)]
pub fn cmd_verify(
    config_path: Option<&Path>,
    criterion: &str,
    u_src: Option<&str>,
    omega_src: Option<&str>,
    m_flag: Option<f64>,
    opts: &CommonOpts,
    w: &mut dyn Write,
) -> i32 {
    match run_verify(config_path, criterion, u_src, omega_src, m_flag, opts, w) {
        Ok(code) => code,
        Err(e) => fail(w, &e),
    }
}

fn run_verify(
    config_path: Option<&Path>,
    criterion: &str,
    u_src: Option<&str>,
    omega_src: Option<&str>,
    m_flag: Option<f64>,
    opts: &CommonOpts,
    w: &mut dyn Write,
) -> Result<i32> {
    let id: CriterionId = criterion.parse().map_err(|e| match e {
        Error::Parameter(msg) => Error::Config(format!("--theorem: {msg}")),
        other => other,
    })?;
    let cfg = match config_path {
        Some(p) => Some(ProblemConfig::from_path(p)?),
        None => None,
    };
    let grid = resolve_grid(cfg.as_ref(), opts)?;
    let tol = tolerance(cfg.as_ref(), opts)?;
    let u = Candidate::parse(
        u_src.ok_or_else(|| Error::Config("--u: required (the function under test)".into()))?,
    )
    .map_err(|e| Error::Config(format!("--u: {e}")))?;
    let m = m_flag
        .or(cfg.as_ref().map(|c| c.m()))
        .ok_or_else(|| Error::Config("--M: required (flag or config problem/linear M)".into()))?;

    let omega_field = |src: Option<&str>| -> Result<Field1> {
        Field1::parse(
            src.ok_or_else(|| Error::Config("--omega: required for this criterion".into()))?,
        )
        .map_err(|e| Error::Config(format!("--omega: {e}")))
    };

    let report = match id {
        CriterionId::NonpositivityBudget => {
            let inst =
                ComparisonInstance::new(u, OmegaSpec::Expr(omega_field(omega_src)?), m)?;
            check_nonpositivity_budget(&inst, grid, tol)?
        }
        CriterionId::NonpositivityBoundary => check_nonpositivity_boundary(&u, m, grid, tol)?,
        CriterionId::NonpositivityUniform => {
            let field = omega_field(omega_src)?;
            if !field.expr().is_constant() {
                return Err(Error::Config(
                    "--omega: criterion 2.3 needs a constant omega".into(),
                ));
            }
            check_nonpositivity_uniform(&u, field.eval(0.0)?, m, grid, tol)?
        }
        CriterionId::NonnegativityBudget => {
            let inst =
                ComparisonInstance::new(u, OmegaSpec::Expr(omega_field(omega_src)?), m)?;
            check_nonnegativity_budget(&inst, grid, tol)?
        }
    };
    render_report(&id, &report, w)?;
    Ok(match report.conclusion {
        ConclusionStatus::Holds => exit_code::SUCCESS,
        ConclusionStatus::NotApplicable => exit_code::HYPOTHESES_NOT_MET,
        ConclusionStatus::Anomaly => exit_code::ANOMALY,
    })
}

fn render_report(id: &CriterionId, report: &ComparisonReport, w: &mut dyn Write) -> Result<()> {
    writeln!(w, "criterion {id}")?;
    writeln!(w, "  {:<60} {:>14}  status", "hypothesis", "margin")?;
    for h in &report.hypotheses {
        writeln!(
            w,
            "  {:<60} {:>14.6e}  {}{}",
            h.label,
            h.margin,
            if h.passed { "pass" } else { "FAIL" },
            if h.approximate { " (approximate)" } else { "" }
        )?;
    }
    let (t, v) = report.worst_node;
    match report.conclusion {
        ConclusionStatus::Holds => {
            writeln!(w, "  conclusion holds; extremal value {v:.6e} at t = {t:.6}")?
        }
        ConclusionStatus::NotApplicable => writeln!(
            w,
            "  not applicable: hypotheses not satisfied (extremal value {v:.6e} at t = {t:.6})"
        )?,
        ConclusionStatus::Anomaly => writeln!(
            w,
            "  ANOMALY: hypotheses hold but the conclusion fails ({v:.6e} at t = {t:.6})"
        )?,
    }
    Ok(())
}

/// `iterate CONFIG [--out DIR] [--plot-data] [--force]`
pub fn cmd_iterate(
    config_path: &Path,
    opts: &CommonOpts,
    out_dir: Option<&Path>,
    plot_data: bool,
    w: &mut dyn Write,
) -> i32 {
    match run_iterate(config_path, opts, out_dir, plot_data, w) {
        Ok(code) => code,
        Err(e) => fail(w, &e),
    }
}

fn run_iterate(
    config_path: &Path,
    opts: &CommonOpts,
    out_dir: Option<&Path>,
    plot_data: bool,
    w: &mut dyn Write,
) -> Result<i32> {
    let cfg = ProblemConfig::from_path(config_path)?;
    let prob_section = cfg
        .problem
        .as_ref()
        .ok_or_else(|| Error::Config("problem: section required by iterate".into()))?;
    let bracket_section = cfg
        .bracket
        .as_ref()
        .ok_or_else(|| Error::Config("bracket: section required by iterate".into()))?;
    let grid = resolve_grid(Some(&cfg), opts)?;
    let tol = tolerance(Some(&cfg), opts)?;

    let prob = NonlinearPbvp::new(prob_section.f.clone(), prob_section.m)?;
    let pair = BracketPair::new(
        bracket_section.alpha.clone(),
        bracket_section.beta.clone(),
        grid,
        tol,
    )?;
    let mut icfg = IterationConfig::new(grid);
    icfg.tol = tol;
    icfg.max_iter = opts.max_iter.unwrap_or(cfg.numerics.max_iter);
    icfg.force = opts.force;

    let hist = iterate(&pair, &prob, &icfg)?;
    render_history(&hist, w)?;

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        write_csv_tu(&dir.join("phi.csv"), hist.phi())?;
        write_csv_tu(&dir.join("psi.csv"), hist.psi())?;
        write_history_csv(&dir.join("history.csv"), &hist)?;
        if plot_data {
            write_plot_data(dir, &hist)?;
        }
        writeln!(w, "wrote phi.csv, psi.csv, history.csv to {}", dir.display())?;
    }

    Ok(if hist.converged {
        exit_code::SUCCESS
    } else {
        exit_code::NOT_CONVERGED
    })
}

fn gap_after(hist: &IterationHistory, applications: usize) -> f64 {
    let k = applications.min(hist.alphas.len() - 1);
    hist.betas[k]
        .sub(&hist.alphas[k])
        .map(|d| d.values().iter().fold(0.0f64, |m, &v| m.max(v)))
        .unwrap_or(f64::NAN)
}

fn render_history(hist: &IterationHistory, w: &mut dyn Write) -> Result<()> {
    for warning in &hist.warnings {
        writeln!(w, "warning: {warning}")?;
    }
    writeln!(
        w,
        "  {:>4}  {:>14}  {:>14}  {:>14}",
        "k", "sup|d alpha|", "sup|d beta|", "sup(beta-alpha)"
    )?;
    for (j, (da, db)) in hist.deltas.iter().enumerate() {
        writeln!(
            w,
            "  {:>4}  {:>14.6e}  {:>14.6e}  {:>14.6e}",
            j + 1,
            da,
            db,
            gap_after(hist, j + 1)
        )?;
    }
    let (ra, rb) = hist.residuals();
    writeln!(
        w,
        "{} after {} iteration(s); residuals sup|phi-Aphi| = {ra:.3e}, sup|psi-Apsi| = {rb:.3e}",
        if hist.converged { "converged" } else { "NOT converged" },
        hist.iterations()
    )?;
    writeln!(
        w,
        "max chain violation {:.3e}; sup(psi-phi) = {:.6e}",
        hist.chain_violation,
        gap_after(hist, usize::MAX)
    )?;
    Ok(())
}

fn write_history_csv(path: &Path, hist: &IterationHistory) -> Result<()> {
    let mut out = String::from("k,delta_alpha,delta_beta,gap\n");
    for (j, (da, db)) in hist.deltas.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            j + 1,
            csv_float(*da),
            csv_float(*db),
            csv_float(gap_after(hist, j + 1))
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_plot_data(dir: &Path, hist: &IterationHistory) -> Result<()> {
    for (k, (a, b)) in hist.alphas.iter().zip(&hist.betas).enumerate() {
        let mut out = String::from("t,alpha_k,beta_k\n");
        for (i, t) in a.grid().nodes().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                csv_float(t),
                csv_float(a.value(i)),
                csv_float(b.value(i))
            ));
        }
        std::fs::write(dir.join(format!("iter_{k:04}.csv")), out)?;
    }
    Ok(())
}

/// `oracle CONFIG`: cross-check the primary path against the
/// finite-difference verifier on grids n, 2n, 4n.
pub fn cmd_oracle(config_path: &Path, opts: &CommonOpts, w: &mut dyn Write) -> i32 {
    match run_oracle(config_path, opts, w) {
        Ok(code) => code,
        Err(e) => fail(w, &e),
    }
}

fn run_oracle(config_path: &Path, opts: &CommonOpts, w: &mut dyn Write) -> Result<i32> {
    let cfg = ProblemConfig::from_path(config_path)?;
    let base = resolve_grid(Some(&cfg), opts)?;
    let tol = tolerance(Some(&cfg), opts)?;
    let grids = [base, base.refine(2)?, base.refine(4)?];
    let mut diffs = Vec::new();

    if let Some(lin) = &cfg.linear {
        if lin.mu != 0.0 || lin.lambda != 0.0 {
            return Err(Error::Config(
                "oracle: the finite-difference verifier covers mu = lambda = 0 only; \
                 nonzero jumps are verified by residual substitution in the test suite"
                    .into(),
            ));
        }
        writeln!(w, "oracle comparison (linear), M = {}", lin.m)?;
        for g in grids {
            let sigma = lin.sigma.sample(g)?;
            let closed = solve(&LinearPbvp::periodic(lin.m, sigma.clone())?, g)?.u;
            let fd = fd_solve_linear(&sigma, lin.m, g)?;
            let d = closed.sup_distance(&fd)?;
            diffs.push(d);
            writeln!(w, "  n = {:>6}: sup|closed - fd| = {d:.6e}", g.n())?;
        }
    } else {
        let prob_section = cfg.problem.as_ref().expect("validated");
        let bracket_section = cfg.bracket.as_ref().ok_or_else(|| {
            Error::Config("bracket: section required by oracle on nonlinear problems".into())
        })?;
        let prob = NonlinearPbvp::new(prob_section.f.clone(), prob_section.m)?;
        writeln!(w, "oracle comparison (nonlinear), M = {}", prob.m)?;
        for g in grids {
            let pair = BracketPair::new(
                bracket_section.alpha.clone(),
                bracket_section.beta.clone(),
                g,
                tol,
            )?;
            let mut icfg = IterationConfig::new(g);
            icfg.tol = tol;
            icfg.max_iter = opts.max_iter.unwrap_or(cfg.numerics.max_iter);
            let hist = iterate(&pair, &prob, &icfg)?;
            if !hist.converged {
                return Err(Error::NoConvergence {
                    iterations: icfg.max_iter,
                    last_delta: hist.deltas.last().map(|d| d.0.max(d.1)).unwrap_or(f64::NAN),
                });
            }
            let initial = pair
                .alpha()
                .sample(g)?
                .zip_with(&pair.beta().sample(g)?, |a, b| 0.5 * (a + b))?;
            let newton = fd_solve_nonlinear(&prob, &initial, g, tol, 50)?;
            let d = hist.phi().sup_distance(&newton)?;
            diffs.push(d);
            writeln!(w, "  n = {:>6}: sup|phi - newton| = {d:.6e}", g.n())?;
        }
    }

    for pair in diffs.windows(2) {
        let order = (pair[0] / pair[1]).log2();
        writeln!(w, "  observed order: {order:.2}")?;
    }
    Ok(exit_code::SUCCESS)
}
