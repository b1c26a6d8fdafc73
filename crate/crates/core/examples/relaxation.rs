//! Solve the continuous relaxation with an iteration log, and inspect the
//! point the rounding step starts from.
//!
//!     cargo run --release --example relaxation

use riskscore::datagen::generate;
use riskscore::model::build_final_model;
use riskscore::relax::{extremal_optimum, Relaxation};
use riskscore::Hyperparams;

fn main() -> riskscore::Result<()> {
    let inst = generate(200, 1, 0)?;
    let h = Hyperparams::new(1);
    let m = build_final_model(&inst.dataset, &h)?;
    println!(
        "{} variables: {} binary, {} integer, {} continuous; {} linear constraints\n",
        m.n_vars(),
        m.n_binary(),
        m.n_integer(),
        m.n_continuous(),
        m.n_linear_constraints()
    );

    let mut log = Vec::new();
    let r = Relaxation::new(&m, &h).with_log(&mut log).solve();
    print!("{}", String::from_utf8_lossy(&log));
    println!(
        "\n{:?} after {} iterations: loss {:.6}, dual bound {:.6}, violation {:.1e}",
        r.status, r.iterations, r.objective, r.lower_bound, r.max_constraint_violation
    );

    let l = m.layout;
    let show = |tag: &str, x: &riskscore::relax::RelaxationSolution| {
        println!(
            "{tag:<9} alpha={:.3} t={:.4} w_le={:+.3} w_ge={:+.3}",
            x.value(l.alpha(0)),
            x.value(l.t(0)),
            x.value(l.w_le(0)),
            x.value(l.w_ge(0))
        );
    };
    show("central", &r);
    show("extremal", &extremal_optimum(&m, &h, &r));
    println!("reference t={:.4}", inst.reference.t[0]);
    Ok(())
}
