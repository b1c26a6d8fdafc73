//! Acceptance suite: twelve criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so every criterion reports even when an
//! earlier one fails; the process exits non-zero if any fails. Every
//! tolerance and time limit is a named constant below.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use riskscore::datagen::{generate, GeneratedInstance};
use riskscore::exact::{branch_and_bound, brute_force, ExactStatus};
use riskscore::heuristic::solve_heuristic;
use riskscore::loss::{auc, logistic_loss, loss_gradient, MarginVector};
use riskscore::model::{build_binary_model, build_final_model, ConstraintFamily, MinloModel, VarId};
use riskscore::report::{parse_lp, run_bench, write_bench_csv, BenchStatus, LpModel, Method, SweepSpec};
use riskscore::{Dataset, Hyperparams};

// 1
const COUNT_TIME: Duration = Duration::from_secs(1);
// 2
const FORTET_TOL: f64 = 1e-12;
const FORTET_TIME: Duration = Duration::from_secs(1);
// 3
const ZERO_MODEL_LOSS: f64 = 138.629_436_111_989_06; // 200·ln 2
const STALLED_OBJ_PRINTED: f64 = 138.62;
const ZERO_MODEL_TOL: f64 = 5e-3;
// 4, 5
const SANDWICH_SLACK: f64 = 1e-6;
const SANDWICH_TIME: Duration = Duration::from_secs(600);
// 6
const HEURISTIC_MEDIAN_AUC: f64 = 0.85;
const HEURISTIC_RUN_TIME: Duration = Duration::from_secs(10);
const HEURISTIC_TOTAL_TIME: Duration = Duration::from_secs(120);
// 7
const SCALE_N: usize = 20_000;
const SCALE_MIN_AUC: f64 = 0.80;
const SCALE_TIME: Duration = Duration::from_secs(300);
// 8
const FD_STEP: f64 = 1e-5;
const FD_MAX_REL_ERR: f64 = 1e-5;
const FD_TIME: Duration = Duration::from_secs(5);
// 9
const AUC_TIME: Duration = Duration::from_secs(5);
// 10
const BNB_TOL: f64 = 1e-6;
const BNB_TIME: Duration = Duration::from_secs(600);
// 11
const EXPORT_TIME: Duration = Duration::from_secs(5);
// 12
const BENCH_BUDGET_S: f64 = 5.0;
const BENCH_TIME: Duration = Duration::from_secs(900);
/// A `*` row must have used (almost) all of its budget.
const BENCH_BUDGET_USE: f64 = 0.99;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed <= limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

/// First `count` seeds (scanning from 0) whose instance has both classes.
fn two_class_instances(n: usize, p: usize, count: usize) -> Vec<GeneratedInstance> {
    (0u64..)
        .map(|seed| generate(n, p, seed).expect("valid size"))
        .filter(|g| g.reference_auc.is_some())
        .take(count)
        .collect()
}

fn c1_counts() -> Outcome {
    let start = Instant::now();
    for n in [1, 3, 200, 1000] {
        for p in [1, 2, 5] {
            let m = build_final_model(&generate(n, p, 0).unwrap().dataset, &Hyperparams::new(p)).unwrap();
            let want = (1 + (2 + 9 * n) * p, p * (1 + n), 1 + 2 * p * (1 + n), p);
            let got = (m.n_linear_constraints(), m.n_binary(), m.n_integer(), m.n_continuous());
            check(got == want, || format!("N={n} p={p}: got {got:?}, want {want:?}"))?;
        }
    }
    within(start.elapsed(), COUNT_TIME)?;
    Ok("12 sizes exact".into())
}

/// Feasible interval of `beta` under the Fortet rows with every other
/// variable fixed by `x`.
fn beta_interval(m: &MinloModel, x: &[f64], beta: VarId) -> (f64, f64, usize) {
    let (mut lo, mut hi, mut rows) = (f64::NEG_INFINITY, f64::INFINITY, 0);
    for row in &m.rows {
        if m.groups[row.group].family != ConstraintFamily::Fortet {
            continue;
        }
        let Some(&(_, a)) = row.terms.iter().find(|(v, _)| *v == beta) else {
            continue;
        };
        rows += 1;
        let rest: f64 = row
            .terms
            .iter()
            .filter(|(v, _)| *v != beta)
            .map(|&(v, c)| c * x[v.0])
            .sum();
        let (l, u) = ((row.lower - rest) / a, (row.upper - rest) / a);
        let (l, u) = if a > 0.0 { (l, u) } else { (u, l) };
        lo = lo.max(l);
        hi = hi.min(u);
    }
    (lo, hi, rows)
}

fn c2_fortet() -> Outcome {
    let start = Instant::now();
    let d = Dataset::new(vec![vec![0.5]], vec![1], vec!["x".into()], vec![0.0], vec![1.0]).unwrap();
    let h = Hyperparams::new(1);
    let m = build_final_model(&d, &h).unwrap();
    let l = m.layout;
    let mut cases = 0;
    for b in [0.0, 1.0] {
        for w in -h.wmax..=h.wmax {
            let w = w as f64;
            let mut x = vec![0.0; m.n_vars()];
            x[l.b(0, 0).0] = b;
            x[l.w_le(0).0] = w;
            x[l.w_ge(0).0] = w;
            for (beta, want) in [(l.beta_le(0, 0), w * b), (l.beta_ge(0, 0), w * (1.0 - b))] {
                let (lo, hi, rows) = beta_interval(&m, &x, beta);
                check(rows == 4, || format!("{rows} Fortet rows on one product"))?;
                check(
                    (lo - want).abs() <= FORTET_TOL && (hi - want).abs() <= FORTET_TOL,
                    || format!("b={b} w={w}: beta in [{lo}, {hi}], want {want}"),
                )?;
                cases += 1;
            }
        }
    }
    within(start.elapsed(), FORTET_TIME)?;
    Ok(format!("{cases} products pinned"))
}

fn c3_zero_model() -> Outcome {
    let margins = vec![0.0; 200];
    let labels: Vec<i8> = (0..200).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
    let f = logistic_loss(MarginVector::new(&margins, &labels).unwrap());
    check((f - ZERO_MODEL_LOSS).abs() <= ZERO_MODEL_TOL, || format!("loss {f}"))?;
    // the stalled-solver value is reported cut to two decimals
    let cut = (f * 100.0).floor() / 100.0;
    check(cut == STALLED_OBJ_PRINTED, || format!("{cut} vs {STALLED_OBJ_PRINTED}"))?;
    Ok(format!("{f:.6}"))
}

fn sandwich_instances() -> Vec<GeneratedInstance> {
    let mut out = Vec::new();
    for p in [1, 2] {
        for n in [50, 200] {
            out.extend(two_class_instances(n, p, 5));
        }
    }
    out
}

fn c4_c5_sandwich_and_reference() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut sandwich = Ok(());
    let mut dominance = Ok(());
    let insts = sandwich_instances();
    for g in &insts {
        let d = &g.dataset;
        let h = Hyperparams::new(d.p());
        let tag = format!("N={} p={} seed={}", d.n(), d.p(), g.seed);
        let heur = solve_heuristic(d, &h).unwrap();
        let bf = brute_force(d, &h, false).unwrap();
        let relax = heur.relaxation.objective;
        if sandwich.is_ok() {
            sandwich = check(
                relax - SANDWICH_SLACK <= bf.objective && bf.objective <= heur.objective,
                || format!("{tag}: relax {relax} bf {} heuristic {}", bf.objective, heur.objective),
            );
        }
        if dominance.is_ok() {
            let auc = bf.best.auc(d).unwrap();
            dominance = check(bf.objective <= g.reference_objective && auc == 1.0, || {
                format!("{tag}: bf {} ref {} auc {auc}", bf.objective, g.reference_objective)
            });
        }
    }
    let timing = within(start.elapsed(), SANDWICH_TIME);
    let summary = format!("{} instances in {:.1?}", insts.len(), start.elapsed());
    (
        sandwich.and(timing.clone()).map(|_| summary.clone()),
        dominance.and(timing).map(|_| summary),
    )
}

fn c6_heuristic_quality() -> Outcome {
    let start = Instant::now();
    let mut aucs = Vec::new();
    for g in two_class_instances(200, 1, 10) {
        let o = solve_heuristic(&g.dataset, &Hyperparams::new(1)).unwrap();
        within(Duration::from_secs_f64(o.wall_time_s), HEURISTIC_RUN_TIME)?;
        aucs.push(o.solution.auc(&g.dataset).unwrap());
    }
    aucs.sort_by(f64::total_cmp);
    let median = 0.5 * (aucs[4] + aucs[5]);
    check(median >= HEURISTIC_MEDIAN_AUC, || {
        format!("median AUC {median:.3}, runs {aucs:.3?}")
    })?;
    within(start.elapsed(), HEURISTIC_TOTAL_TIME)?;
    Ok(format!("median AUC {median:.3}"))
}

fn c7_scaling() -> Outcome {
    let g = two_class_instances(SCALE_N, 2, 1).remove(0);
    let start = Instant::now();
    let o = solve_heuristic(&g.dataset, &Hyperparams::new(2)).unwrap();
    let elapsed = start.elapsed();
    let a = o.solution.auc(&g.dataset).unwrap();
    within(elapsed, SCALE_TIME)?;
    check(a >= SCALE_MIN_AUC, || format!("AUC {a:.3}"))?;
    Ok(format!("seed {} AUC {a:.3} in {elapsed:.1?}", g.seed))
}

fn c8_gradient() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..40);
        let margins: Vec<f64> = (0..n).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let labels: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let g = loss_gradient(MarginVector::new(&margins, &labels).unwrap());
        for i in 0..n {
            let at = |delta: f64| {
                let mut m = margins.clone();
                m[i] += delta;
                logistic_loss(MarginVector::new(&m, &labels).unwrap())
            };
            let fd = (at(FD_STEP) - at(-FD_STEP)) / (2.0 * FD_STEP);
            // relative to the gradient scale, which keeps |g| ~ 1e-9 entries meaningful
            let err = (fd - g[i]).abs() / g[i].abs().max(1.0);
            worst = worst.max(err);
        }
    }
    check(worst <= FD_MAX_REL_ERR, || format!("max relative error {worst:.2e}"))?;
    within(start.elapsed(), FD_TIME)?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn pairwise_auc(scores: &[f64], labels: &[i8]) -> f64 {
    let mut twice = 0u64;
    let (mut pos, mut neg) = (0u64, 0u64);
    for (i, &yi) in labels.iter().enumerate() {
        if yi == 1 {
            pos += 1;
        } else {
            neg += 1;
            continue;
        }
        for (j, &yj) in labels.iter().enumerate() {
            if yj == -1 {
                twice += match scores[i].partial_cmp(&scores[j]).unwrap() {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
            }
        }
    }
    twice as f64 / (2 * pos * neg) as f64
}

fn c9_auc_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..50 {
        let n = rng.gen_range(2..300);
        // few distinct integer scores force many ties
        let levels = rng.gen_range(1..12);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..levels) as f64).collect();
        let mut labels: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.4) { 1 } else { -1 }).collect();
        labels[0] = 1;
        labels[1] = -1;
        let fast = auc(&scores, &labels).unwrap();
        let slow = pairwise_auc(&scores, &labels);
        check(fast == slow, || format!("case {case}: {fast} vs {slow}"))?;
    }
    within(start.elapsed(), AUC_TIME)?;
    Ok("50 tied instances identical".into())
}

fn c10_bnb() -> Outcome {
    let start = Instant::now();
    let mut nodes = 0;
    for g in two_class_instances(50, 1, 10) {
        let h = Hyperparams::new(1);
        let bf = brute_force(&g.dataset, &h, false).unwrap();
        let bb = branch_and_bound(&g.dataset, &h).unwrap();
        check(bb.status == ExactStatus::Optimal, || {
            format!("seed {}: {:?}", g.seed, bb.status)
        })?;
        check((bb.objective - bf.objective).abs() <= BNB_TOL, || {
            format!("seed {}: bnb {} vs brute force {}", g.seed, bb.objective, bf.objective)
        })?;
        nodes += bb.nodes_or_candidates;
    }
    within(start.elapsed(), BNB_TIME)?;
    Ok(format!("10 instances, {nodes} nodes total"))
}

fn c11_export() -> Outcome {
    let start = Instant::now();
    let mut models = Vec::new();
    for (n, p, seed) in [(1, 1, 0), (5, 2, 1), (12, 3, 2), (30, 1, 3)] {
        let g = generate(n, p, seed).unwrap();
        models.push(build_final_model(&g.dataset, &Hyperparams::new(1)).unwrap());
    }
    let binary = Dataset::new(
        vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]],
        vec![1, -1, 1],
        vec!["a".into(), "b".into(), "c".into()],
        vec![0.0; 3],
        vec![1.0; 3],
    )
    .unwrap();
    models.push(build_binary_model(&binary, &Hyperparams::new(2)).unwrap());
    for (i, m) in models.iter().enumerate() {
        let written = LpModel::from_model(m);
        let text = written.to_lp_string();
        let parsed = parse_lp(&text).map_err(|e| format!("model {i}: {e}"))?;
        check(parsed == written, || format!("model {i}: parsed model differs"))?;
        check(parsed.to_lp_string() == text, || format!("model {i}: text differs"))?;
    }
    within(start.elapsed(), EXPORT_TIME)?;
    Ok(format!("{} models byte-identical", models.len()))
}

fn c12_bench() -> Outcome {
    let start = Instant::now();
    let spec = SweepSpec::grid(
        &[200],
        &[1, 2, 3, 4, 5],
        &[0],
        &[Method::Bnb, Method::Heuristic],
        BENCH_BUDGET_S,
    );
    let rows = run_bench(&spec);
    let mut csv = Vec::new();
    write_bench_csv(&rows, &mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    let header = csv.lines().next().unwrap_or_default();
    check(header == "N,p,k,seed,method,TT,ST,OBJ,AUC,status", || {
        format!("header `{header}`")
    })?;
    check(csv.lines().count() == 1 + 10, || "expected 10 rows".into())?;
    let mut stars = 0;
    for r in &rows {
        let tag = format!("p={} {}", r.cell.p, r.cell.method.as_str());
        check(r.cell.k == r.cell.p && r.cell.n == 200, || format!("{tag}: wrong cell"))?;
        check(r.obj.is_some(), || format!("{tag}: no objective"))?;
        match r.status {
            BenchStatus::TimeLimit => {
                stars += 1;
                check(r.tt >= BENCH_BUDGET_USE * BENCH_BUDGET_S, || {
                    format!("{tag}: `*` after only {:.2}s", r.tt)
                })?;
                check(r.st <= r.tt, || format!("{tag}: ST > TT"))?;
            }
            BenchStatus::Ok => {}
            ref other => return Err(format!("{tag}: status {other:?}")),
        }
    }
    check(stars > 0, || "no cell hit the budget".into())?;
    check(csv.contains(",*\n"), || "`*` missing from CSV".into())?;
    within(start.elapsed(), BENCH_TIME)?;
    Ok(format!("{stars} of 10 rows marked *"))
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match &outcome {
        Ok(detail) => println!("PASS  {name:<34} {detail} ({secs:.2}s)"),
        Err(detail) => println!("FAIL  {name:<34} {detail} ({secs:.2}s)"),
    }
    outcome.is_ok()
}

fn main() -> ExitCode {
    let (c4, c5) = catch_unwind(c4_c5_sandwich_and_reference).unwrap_or_else(|_| {
        let e = Err("panicked".to_string());
        (e.clone(), e)
    });
    let results = [
        run("1  count identities", c1_counts),
        run("2  Fortet exactness", c2_fortet),
        run("3  trivial-model anchor", c3_zero_model),
        run("4  bound sandwich", || c4),
        run("5  reference dominance", || c5),
        run("6  heuristic quality", c6_heuristic_quality),
        run("7  scaling smoke test", c7_scaling),
        run("8  gradient check", c8_gradient),
        run("9  AUC oracle", c9_auc_oracle),
        run("10 B&B equals brute force", c10_bnb),
        run("11 export round trip", c11_export),
        run("12 bench harness shape", c12_bench),
    ];
    let failed = results.iter().filter(|&&ok| !ok).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
