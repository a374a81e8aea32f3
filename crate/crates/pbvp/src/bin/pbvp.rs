use clap::{Parser, Subcommand};
use pbvp::cli::{cmd_iterate, cmd_oracle, cmd_solve_linear, cmd_verify, CommonOpts};
use std::io::Write;
use std::path::PathBuf;

/// Periodic boundary value problems -u'' = f(t, u) on [0, 2pi]:
/// closed-form linear solves, sign-comparison checks, and the monotone
/// iteration between lower and upper solutions.
#[derive(Parser)]
#[command(name = "pbvp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the linear problem in a config's `linear` section
    SolveLinear {
        config: PathBuf,
        /// Write the solution as CSV with schema t,u
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the grid's subinterval count
        #[arg(long)]
        n: Option<usize>,
        /// Absolute tolerance
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Check one of the sign-comparison criteria (2.1, 2.2, 2.3, 2.4)
    Verify {
        config: Option<PathBuf>,
        /// Criterion identifier: 2.1 | 2.2 | 2.3 | 2.4
        #[arg(long)]
        theorem: String,
        /// Candidate function u(t)
        #[arg(long, allow_hyphen_values = true)]
        u: Option<String>,
        /// Weight omega(t); a constant for criterion 2.3
        #[arg(long, allow_hyphen_values = true)]
        omega: Option<String>,
        /// Shift constant M
        #[arg(long = "M", allow_negative_numbers = true)]
        m: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the monotone iteration between alpha and beta
    Iterate {
        config: PathBuf,
        /// Directory for phi.csv, psi.csv, history.csv
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one t,alpha_k,beta_k CSV per iteration
        #[arg(long)]
        plot_data: bool,
        /// Proceed despite failing bracket validation
        #[arg(long)]
        force: bool,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Cross-check against the finite-difference verifier on n, 2n, 4n
    Oracle {
        config: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
}

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    let code = match cli.command {
        Command::SolveLinear { config, out, n, tol } => {
            let opts = CommonOpts {
                n,
                tol,
                ..Default::default()
            };
            cmd_solve_linear(&config, &opts, out.as_deref(), &mut w)
        }
        Command::Verify {
            config,
            theorem,
            u,
            omega,
            m,
            n,
            tol,
        } => {
            let opts = CommonOpts {
                n,
                tol,
                ..Default::default()
            };
            cmd_verify(
                config.as_deref(),
                &theorem,
                u.as_deref(),
                omega.as_deref(),
                m,
                &opts,
                &mut w,
            )
        }
        Command::Iterate {
            config,
            out,
            plot_data,
            force,
            n,
            tol,
            max_iter,
        } => {
            let opts = CommonOpts {
                n,
                tol,
                max_iter,
                force,
            };
            cmd_iterate(&config, &opts, out.as_deref(), plot_data, &mut w)
        }
        Command::Oracle {
            config,
            n,
            tol,
            max_iter,
        } => {
            let opts = CommonOpts {
                n,
                tol,
                max_iter,
                force: false,
            };
            cmd_oracle(&config, &opts, &mut w)
        }
    };
    let _ = w.flush();
    std::process::exit(code);
}
