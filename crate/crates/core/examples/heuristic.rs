//! Round a relaxation by hand: top-k selection by the relaxed indicators,
//! thresholds kept, weights rounded half away from zero.
//!
//!     cargo run --release --example heuristic

use riskscore::datagen::generate;
use riskscore::heuristic::{algorithm1, select_topk, solve_heuristic};
use riskscore::model::build_final_model;
use riskscore::relax::{extremal_optimum, solve_relaxation};
use riskscore::Hyperparams;

fn main() -> riskscore::Result<()> {
    let inst = generate(300, 4, 5)?;
    let d = &inst.dataset;
    let h = Hyperparams::new(2);
    let m = build_final_model(d, &h)?;

    let r = solve_relaxation(&m, &h);
    let alpha: Vec<f64> = (0..d.p()).map(|j| r.value(m.layout.alpha(j))).collect();
    println!("relaxed alpha  {alpha:.3?}");
    println!("selected (k=2) {:?}", select_topk(&alpha, h.k));

    for (tag, point) in [("central", r.clone()), ("extremal", extremal_optimum(&m, &h, &r))] {
        let s = algorithm1(&point, d, &h);
        println!(
            "{tag:<9} loss {:>8.3}  AUC {:.3}  w_le {:?} w_ge {:?}",
            s.objective(d),
            s.auc(d)?,
            s.w_le,
            s.w_ge
        );
    }

    let best = solve_heuristic(d, &h)?;
    println!("solve_heuristic keeps loss {:.3}", best.objective);
    println!("feasible: {}", best.solution.validate(d, &h).is_feasible());
    Ok(())
}
