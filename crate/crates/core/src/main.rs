use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use imexdg::bench::cases::{case_by_name, case_library};
use imexdg::bench::riemann::{ExactRiemann, RiemannState};
use imexdg::config::CaseConfig;
use imexdg::driver::{convergence_sweep, errors_csv, run};
use imexdg::imex::{analysis_csv, analyze_alpha_range};
use imexdg::{Error, Result};

#[derive(Parser)]
#[command(name = "imexdg", about = "IMEX discontinuous Galerkin solver for low-Mach real-gas flows")]
struct Cli {
    /// Worker threads (overrides IMEXDG_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case from a TOML file or from the built-in library.
    Run {
        #[arg(long, conflicts_with = "case", required_unless_present = "case")]
        config: Option<PathBuf>,
        /// Built-in case name (see `list-cases`).
        #[arg(long)]
        case: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence table under hyperbolic scaling (fixed Courant number).
    Convergence {
        #[arg(long, default_value = "vortex")]
        case: String,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
        nel: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Acoustic Courant number.
        #[arg(long, default_value_t = 0.01)]
        courant: f64,
        /// Explicit tableau parameter (default: the case's).
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monotonicity radius and imaginary-axis stability extent versus alpha.
    AnalyzeTableau {
        #[arg(long, default_value_t = 0.3)]
        alpha_min: f64,
        #[arg(long, default_value_t = 1.2)]
        alpha_max: f64,
        /// Spacing of the alpha samples.
        #[arg(long, default_value_t = 1e-3, conflicts_with = "steps")]
        step: f64,
        /// Number of intervals instead of a spacing.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact ideal-gas Riemann profiles.
    Riemann {
        #[arg(long, default_value = "sod")]
        case: String,
        #[arg(long, default_value_t = 0.2)]
        t: f64,
        #[arg(long, default_value_t = 1.4)]
        gamma: f64,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Names of the built-in cases.
    ListCases,
    /// Print a built-in case as TOML.
    ShowCase { name: String },
}

fn emit(text: &str, out: Option<PathBuf>) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    let n = match threads {
        Some(n) => Some(n),
        None => match std::env::var("IMEXDG_THREADS") {
            Ok(v) => Some(
                v.parse()
                    .map_err(|_| Error::Config(format!("IMEXDG_THREADS must be an integer, got '{v}'")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Run { config, case, out } => {
            let cfg = match (config, case) {
                (Some(p), _) => CaseConfig::load(&p)?,
                (None, Some(name)) => case_by_name(&name)?,
                (None, None) => unreachable!("enforced by clap"),
            };
            let dir = out.unwrap_or_else(|| cfg.output_dir());
            let res = run(&cfg, &dir)?;
            eprintln!(
                "{}: {} steps to t = {:.6}, {} cells, max C = {:.3}, max C_u = {:.3}, mean fixed-point iterations {:.2}; output in {}",
                cfg.name,
                res.steps.len(),
                res.time,
                res.disc.n_cells(),
                res.max_acoustic(),
                res.max_advective(),
                res.mean_fixed_point(),
                dir.display()
            );
        }
        Command::Convergence {
            case,
            nel,
            degree,
            courant,
            alpha,
            out,
        } => {
            let mut cfg = case_by_name(&case)?;
            cfg.mesh.degree = degree;
            cfg.time.dt = None;
            cfg.time.courant = Some(courant);
            cfg.time.alpha = alpha.or(cfg.time.alpha);
            cfg.adapt = None;
            let rows = convergence_sweep(&cfg, &nel)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir());
            std::fs::create_dir_all(&dir)?;
            let csv = errors_csv(&rows);
            std::fs::write(dir.join("errors.csv"), &csv)?;
            print!("{csv}");
        }
        Command::AnalyzeTableau {
            alpha_min,
            alpha_max,
            step,
            steps,
            out,
        } => {
            if !(step > 0.0 && alpha_max > alpha_min) || steps == Some(0) {
                return Err(Error::Config("need alpha_max > alpha_min and a positive step".into()));
            }
            let steps = steps.unwrap_or(((alpha_max - alpha_min) / step).round() as usize);
            emit(&analysis_csv(&analyze_alpha_range(alpha_min, alpha_max, steps)), out)?;
        }
        Command::Riemann {
            case,
            t,
            gamma,
            points,
            out,
        } => {
            let state = match case.as_str() {
                "sod" => RiemannState::sod(),
                other => return Err(Error::Config(format!("unknown Riemann case '{other}'"))),
            };
            let ex = ExactRiemann::solve(state, gamma)?;
            let mut s = String::from("x,rho,u,p\n");
            for (x, p) in ex.profile(-0.5, 0.5, points, t) {
                let _ = writeln!(s, "{x:.6},{:.10e},{:.10e},{:.10e}", p.rho, p.u, p.p);
            }
            emit(&s, out)?;
        }
        Command::ListCases => {
            for c in case_library() {
                println!("{}", c.name);
            }
        }
        Command::ShowCase { name } => print!("{}", case_by_name(&name)?.to_toml()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
