//! Command-line front end: `gen`, `solve`, `eval`, `export`, `card`, `bench`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 budget exhausted
//! under `--strict`.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use riskscore::datagen::{self, generate, read_dataset, write_bundle};
use riskscore::exact::{branch_and_bound, brute_force, ExactStatus};
use riskscore::heuristic::solve_heuristic;
use riskscore::model::{build_binary_model, build_final_model};
use riskscore::relax::RelaxStatus;
use riskscore::report::{
    export_lp, read_solution, run_bench, write_bench_csv, write_solution, BenchRow, Method, ScoreCard, SweepSpec,
};
use riskscore::{Dataset, Hyperparams, Result};

#[derive(Parser)]
#[command(
    name = "riskscore",
    version,
    about = "Sparse integer risk scores with learned thresholds"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic instance and write its bundle directory.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a risk score and print `OBJ AUC TT ST BOUND`.
    Solve {
        #[command(flatten)]
        data: DataSource,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Heuristic)]
        method: MethodArg,
        /// Lift the brute-force size limits.
        #[arg(long)]
        force: bool,
        /// Exit with status 3 when the budget runs out before optimality.
        #[arg(long)]
        strict: bool,
        /// Solution file (TOML).
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Score a solution file on a dataset.
    Eval {
        #[command(flatten)]
        data: DataSource,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Write the formulation as an LP file plus a JSON objective sidecar.
    Export {
        #[command(flatten)]
        data: DataSource,
        #[command(flatten)]
        hyper: HyperArgs,
        /// Use the fixed-threshold model for 0/1 features.
        #[arg(long)]
        binary: bool,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Render a solution as a printable score card.
    Card {
        #[arg(long)]
        solution: PathBuf,
        /// Risk scale: risk = σ(score / m).
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        /// Dataset whose header supplies feature names.
        #[arg(long)]
        names_from: Option<PathBuf>,
    },
    /// Run a sweep spec and print the results table.
    Bench {
        spec: PathBuf,
        /// Also write the rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct DataSource {
    /// Dataset CSV, or a bundle directory written by `gen`.
    data: Option<PathBuf>,
    /// Generate in memory instead: N,p,seed.
    #[arg(long, value_name = "N,P,SEED", value_parser = parse_triple)]
    generate: Option<(usize, usize, u64)>,
}

fn parse_triple(s: &str) -> std::result::Result<(usize, usize, u64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [n, p, seed] = parts[..] else {
        return Err(format!("expected N,P,SEED, got `{s}`"));
    };
    let bad = |what: &str, v: &str| format!("{what} must be a non-negative integer, got `{v}`");
    Ok((
        n.parse().map_err(|_| bad("N", n))?,
        p.parse().map_err(|_| bad("P", p))?,
        seed.parse().map_err(|_| bad("SEED", seed))?,
    ))
}

#[derive(Args)]
struct HyperArgs {
    /// Sparsity budget.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 5)]
    wmax: i64,
    #[arg(long, default_value_t = 10)]
    w0max: i64,
    #[arg(long, env = "RISKSCORE_TIME_BUDGET", default_value_t = Hyperparams::DEFAULT_TIME_BUDGET_S)]
    time_budget: f64,
    #[arg(long)]
    node_budget: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Heuristic,
    BruteForce,
    Bnb,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Heuristic => Method::Heuristic,
            MethodArg::BruteForce => Method::BruteForce,
            MethodArg::Bnb => Method::Bnb,
        }
    }
}

impl DataSource {
    fn load(&self) -> Result<Dataset> {
        match (&self.data, &self.generate) {
            (Some(path), _) => read_dataset(datagen::dataset_path(path)),
            (None, Some((n, p, seed))) => Ok(generate(*n, *p, *seed)?.dataset),
            (None, None) => unreachable!("clap requires a data source"),
        }
    }
}

impl HyperArgs {
    fn build(&self) -> Hyperparams {
        let mut h = Hyperparams::new(self.k).with_time_budget(self.time_budget);
        h.wmax = self.wmax;
        h.w0max = self.w0max;
        if let Some(n) = self.node_budget {
            h = h.with_node_budget(n);
        }
        h
    }
}

fn fmt_auc(d: &Dataset, s: &riskscore::RiskScoreSolution) -> String {
    s.auc(d).map_or_else(|_| "n/a".into(), |a| format!("{a:.4}"))
}

enum Outcome {
    Done,
    BudgetExhausted,
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Gen { n, p, seed, out } => {
            let inst = generate(n, p, seed)?;
            write_bundle(&inst, &out)?;
            println!(
                "wrote {} (N={n}, p={p}, seed={seed}, reference OBJ={:.4})",
                out.display(),
                inst.reference_objective
            );
        }
        Command::Solve {
            data,
            hyper,
            method,
            force,
            strict,
            out,
        } => {
            let d = data.load()?;
            let h = hyper.build();
            log::info!(
                "solving N={} p={} k={} with {}",
                d.n(),
                d.p(),
                h.k,
                Method::from(method).as_str()
            );
            let (s, tt, st, bound, exhausted) = match method {
                MethodArg::Heuristic => {
                    let o = solve_heuristic(&d, &h)?;
                    log::info!(
                        "relaxation {:?} after {} iterations",
                        o.relaxation.status,
                        o.relaxation.iterations
                    );
                    let exhausted = o.relaxation.status == RelaxStatus::BudgetExceeded;
                    (
                        o.solution,
                        o.wall_time_s,
                        o.wall_time_s,
                        o.relaxation.lower_bound,
                        exhausted,
                    )
                }
                MethodArg::BruteForce | MethodArg::Bnb => {
                    let r = match method {
                        MethodArg::Bnb => branch_and_bound(&d, &h)?,
                        _ => brute_force(&d, &h, force)?,
                    };
                    log::info!("{} nodes/candidates, gap {:.3e}", r.nodes_or_candidates, r.proven_gap);
                    let exhausted = r.status == ExactStatus::BudgetExhausted;
                    (r.best, r.wall_time_s, r.time_to_best, r.lower_bound, exhausted)
                }
            };
            if let Some(path) = &out {
                write_solution(&s, path)?;
            }
            println!(
                "OBJ={:.6} AUC={} TT={tt:.3}s ST={st:.3}s BOUND={bound:.6} status={}",
                s.objective(&d),
                fmt_auc(&d, &s),
                if exhausted { "budget_exhausted" } else { "ok" }
            );
            if exhausted && strict {
                return Ok(Outcome::BudgetExhausted);
            }
        }
        Command::Eval { data, solution } => {
            let d = data.load()?;
            let s = read_solution(&solution)?;
            if s.p() != d.p() {
                return Err(riskscore::Error::DimensionMismatch(format!(
                    "solution has {} features, dataset has {}",
                    s.p(),
                    d.p()
                )));
            }
            println!("OBJ={:.6} AUC={}", s.objective(&d), fmt_auc(&d, &s));
        }
        Command::Export {
            data,
            hyper,
            binary,
            out,
        } => {
            let d = data.load()?;
            let h = hyper.build();
            let m = if binary {
                build_binary_model(&d, &h)?
            } else {
                build_final_model(&d, &h)?
            };
            let sidecar = export_lp(&m, &out)?;
            println!(
                "wrote {} and {} ({} variables, {} constraints)",
                out.display(),
                sidecar.display(),
                m.n_vars(),
                m.n_linear_constraints()
            );
        }
        Command::Card {
            solution,
            m,
            names_from,
        } => {
            let s = read_solution(&solution)?;
            let names = match names_from {
                Some(p) => Some(read_dataset(datagen::dataset_path(&p))?.names().to_vec()),
                None => None,
            };
            print!("{}", ScoreCard::new(&s, names.as_deref(), m)?.render());
        }
        Command::Bench {
            spec,
            csv,
            workers,
            force,
        } => {
            let mut sweep = SweepSpec::read(&spec)?;
            if let Some(w) = workers {
                sweep.workers = w;
            }
            sweep.force |= force;
            let rows = run_bench(&sweep);
            print!("{}", BenchRow::format_table(&rows));
            if let Some(path) = csv {
                let file = File::create(&path).map_err(|e| io_error(&path, e))?;
                write_bench_csv(&rows, file)?;
            }
        }
    }
    Ok(Outcome::Done)
}

fn io_error(path: &Path, e: std::io::Error) -> riskscore::Error {
    riskscore::Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::BudgetExhausted) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
