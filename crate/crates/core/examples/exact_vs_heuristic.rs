//! Certify the matheuristic against brute force and branch-and-bound.
//!
//!     cargo run --release --example exact_vs_heuristic

use riskscore::datagen::generate;
use riskscore::exact::{branch_and_bound, brute_force};
use riskscore::heuristic::solve_heuristic;
use riskscore::Hyperparams;

fn main() -> riskscore::Result<()> {
    println!("seed  relax    heuristic  brute    bnb      nodes  ref");
    for seed in [0, 11, 14, 19] {
        let inst = generate(60, 1, seed)?;
        let d = &inst.dataset;
        let h = Hyperparams::new(1);
        let heur = solve_heuristic(d, &h)?;
        let bf = brute_force(d, &h, false)?;
        let bb = branch_and_bound(d, &h)?;
        println!(
            "{seed:>4}  {:<7.4}  {:<9.4}  {:<7.4}  {:<7.4}  {:>5}  {:.4}",
            heur.relaxation.objective,
            heur.objective,
            bf.objective,
            bb.objective,
            bb.nodes_or_candidates,
            inst.reference_objective
        );
    }
    Ok(())
}
