//! The fixed-threshold model for 0/1 features: thresholds are not learned,
//! each feature contributes a single integer weight.
//!
//!     cargo run --release --example binary_input

use riskscore::model::build_binary_model;
use riskscore::relax::solve_relaxation;
use riskscore::{Dataset, Hyperparams};

fn main() -> riskscore::Result<()> {
    // outcome is positive exactly when `smoker` is set; `age>60` is noise
    let rows = vec![
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, 0.0],
        vec![0.0, 1.0],
    ];
    let labels = vec![1, 1, 1, -1, -1, -1];
    let d = Dataset::new(
        rows,
        labels,
        vec!["smoker".into(), "age>60".into()],
        vec![0.0; 2],
        vec![1.0; 2],
    )?;
    let h = Hyperparams::new(1);
    let m = build_binary_model(&d, &h)?;
    println!(
        "{} variables, {} linear constraints, {} binaries",
        m.n_vars(),
        m.n_linear_constraints(),
        m.n_binary()
    );

    let r = solve_relaxation(&m, &h);
    println!("relaxation {:?}, loss {:.4}", r.status, r.objective);
    for j in 0..d.p() {
        println!(
            "  {:<7} alpha={:.3} w={:+.3}",
            d.names()[j],
            r.value(m.layout.alpha(j)),
            r.value(m.layout.w(j))
        );
    }

    // a non-binary value is rejected with its location
    let bad = Dataset::new(vec![vec![0.5]], vec![1], vec!["x".into()], vec![0.0], vec![1.0])?;
    println!("\n{}", build_binary_model(&bad, &h).unwrap_err());
    Ok(())
}
