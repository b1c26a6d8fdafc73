use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datagen::generate;
use crate::error::{Error, Result};
use crate::exact::{branch_and_bound, brute_force, ExactStatus};
use crate::heuristic::solve_heuristic;
use crate::model::{Hyperparams, RiskScoreSolution};

/// Exact column set of the delimited bench output.
pub const BENCH_COLUMNS: [&str; 10] = ["N", "p", "k", "seed", "method", "TT", "ST", "OBJ", "AUC", "status"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Heuristic,
    BruteForce,
    Bnb,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Heuristic => "heuristic",
            Method::BruteForce => "brute-force",
            Method::Bnb => "bnb",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "heuristic" => Ok(Method::Heuristic),
            "brute-force" => Ok(Method::BruteForce),
            "bnb" => Ok(Method::Bnb),
            _ => Err(format!("unknown method `{s}` (heuristic, brute-force, bnb)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub seed: u64,
    pub method: Method,
    /// Overrides the sweep-wide budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_budget_s: Option<f64>,
}

/// A sweep file: global budget and worker count plus `[[cells]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(default = "default_budget")]
    pub time_budget_s: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Lets brute force run above its safety limits.
    #[serde(default)]
    pub force: bool,
    pub cells: Vec<BenchCell>,
}

fn default_budget() -> f64 {
    1000.0
}

fn default_workers() -> usize {
    1
}

impl SweepSpec {
    /// Every combination of `ns × ps × seeds × methods` with `k = p`.
    pub fn grid(ns: &[usize], ps: &[usize], seeds: &[u64], methods: &[Method], time_budget_s: f64) -> Self {
        let mut cells = Vec::new();
        for &n in ns {
            for &p in ps {
                for &seed in seeds {
                    for &method in methods {
                        cells.push(BenchCell {
                            n,
                            p,
                            k: p,
                            seed,
                            method,
                            time_budget_s: None,
                        });
                    }
                }
            }
        }
        Self {
            time_budget_s,
            workers: 1,
            force: false,
            cells,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |sp| text[..sp.start].lines().count().max(1));
            Error::parse("<sweep>", line, e.message())
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::parse(path.display(), line, message),
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BenchStatus {
    Ok,
    /// The method hit its time or node budget (`*`).
    TimeLimit,
    /// No feasible point was produced (`-`).
    NoSolution,
    /// The cell could not run (size refused, invalid input, ...).
    Failed(String),
}

impl BenchStatus {
    pub fn symbol(&self) -> &str {
        match self {
            BenchStatus::Ok => "ok",
            BenchStatus::TimeLimit => "*",
            BenchStatus::NoSolution => "-",
            BenchStatus::Failed(_) => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub cell: BenchCell,
    pub tt: f64,
    pub st: f64,
    pub obj: Option<f64>,
    pub auc: Option<f64>,
    pub status: BenchStatus,
    pub solution: Option<RiskScoreSolution>,
    pub reference_objective: Option<f64>,
    pub reference_auc: Option<f64>,
}

fn run_cell(cell: &BenchCell, default_budget: f64, force: bool) -> BenchRow {
    let budget = cell.time_budget_s.unwrap_or(default_budget);
    let mut row = BenchRow {
        cell: cell.clone(),
        tt: 0.0,
        st: 0.0,
        obj: None,
        auc: None,
        status: BenchStatus::NoSolution,
        solution: None,
        reference_objective: None,
        reference_auc: None,
    };
    let inst = match generate(cell.n, cell.p, cell.seed) {
        Ok(g) => g,
        Err(e) => {
            row.status = BenchStatus::Failed(e.to_string());
            return row;
        }
    };
    row.reference_objective = Some(inst.reference_objective);
    row.reference_auc = inst.reference_auc;
    if budget <= 0.0 {
        return row;
    }
    let d = &inst.dataset;
    let h = Hyperparams::new(cell.k).with_time_budget(budget);
    let start = Instant::now();
    let outcome = match cell.method {
        Method::Heuristic => solve_heuristic(d, &h).map(|o| {
            let status = if o.relaxation.is_optimal() {
                BenchStatus::Ok
            } else {
                BenchStatus::TimeLimit
            };
            (o.solution, o.wall_time_s, status)
        }),
        Method::BruteForce | Method::Bnb => {
            let r = if cell.method == Method::Bnb {
                branch_and_bound(d, &h)
            } else {
                brute_force(d, &h, force)
            };
            r.map(|r| {
                let status = match r.status {
                    ExactStatus::Optimal => BenchStatus::Ok,
                    ExactStatus::BudgetExhausted => BenchStatus::TimeLimit,
                };
                (r.best, r.time_to_best, status)
            })
        }
    };
    row.tt = start.elapsed().as_secs_f64();
    match outcome {
        Ok((s, st, status)) => {
            row.st = st.min(row.tt);
            row.obj = Some(s.objective(d));
            row.auc = s.auc(d).ok();
            row.solution = Some(s);
            row.status = status;
        }
        Err(e) => row.status = BenchStatus::Failed(e.to_string()),
    }
    row
}

/// Runs every cell (on `spec.workers` threads); rows come back in sweep order.
pub fn run_bench(spec: &SweepSpec) -> Vec<BenchRow> {
    let workers = spec.workers.max(1).min(spec.cells.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; spec.cells.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(cell) = spec.cells.get(i) else { break };
                let row = run_cell(cell, spec.time_budget_s, spec.force);
                slots.lock().expect("bench worker panicked")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("bench worker panicked")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.digits$}"))
}

pub fn write_bench_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(BENCH_COLUMNS).map_err(ser)?;
    for r in rows {
        let c = &r.cell;
        w.write_record([
            c.n.to_string(),
            c.p.to_string(),
            c.k.to_string(),
            c.seed.to_string(),
            c.method.as_str().to_string(),
            format!("{:.6}", r.tt),
            format!("{:.6}", r.st),
            r.obj.map_or_else(String::new, |x| format!("{x}")),
            r.auc.map_or_else(String::new, |x| format!("{x}")),
            r.status.symbol().to_string(),
        ])
        .map_err(ser)?;
    }
    w.flush()?;
    Ok(())
}

impl BenchRow {
    /// Fixed-width table with the Reference columns appended.
    pub fn format_table(rows: &[BenchRow]) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>6} {:>3} {:>3} {:>6} {:<12} {:>9} {:>9} {:>9} {:>5} {:>6} | {:>9} {:>7}",
            "N", "p", "k", "seed", "method", "TT", "ST", "OBJ", "AUC", "status", "Ref OBJ", "Ref AUC"
        );
        for r in rows {
            let c = &r.cell;
            let _ = writeln!(
                s,
                "{:>6} {:>3} {:>3} {:>6} {:<12} {:>9.2} {:>9.2} {:>9} {:>5} {:>6} | {:>9} {:>7}",
                c.n,
                c.p,
                c.k,
                c.seed,
                c.method.as_str(),
                r.tt,
                r.st,
                opt(r.obj, 2),
                opt(r.auc, 2),
                r.status.symbol(),
                opt(r.reference_objective, 2),
                opt(r.reference_auc, 2),
            );
        }
        s
    }
}
