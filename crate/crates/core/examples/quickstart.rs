//! Generate an instance, fit a risk score with the matheuristic and print it.
//!
//!     cargo run --release --example quickstart

use riskscore::datagen::generate;
use riskscore::heuristic::solve_heuristic;
use riskscore::report::render_card;
use riskscore::Hyperparams;

fn main() -> riskscore::Result<()> {
    let inst = generate(200, 2, 7)?;
    let d = &inst.dataset;
    let h = Hyperparams::new(2);

    let fit = solve_heuristic(d, &h)?;
    println!("relaxation bound  {:.4}", fit.relaxation.lower_bound);
    println!("heuristic loss    {:.4}", fit.objective);
    println!("reference loss    {:.4}", inst.reference_objective);
    println!("training AUC      {:.3}", fit.solution.auc(d)?);
    println!("time              {:.3}s\n", fit.wall_time_s);
    print!("{}", render_card(&fit.solution, 1.0)?);
    Ok(())
}
