//! Write a model as an LP file with its JSON loss sidecar, then read it back.
//!
//!     cargo run --release --example export_lp [out.lp]

use riskscore::datagen::generate;
use riskscore::model::build_final_model;
use riskscore::report::{export_lp, parse_lp, LpModel};
use riskscore::Hyperparams;

fn main() -> riskscore::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("riskscore_example.lp").display().to_string());
    let inst = generate(4, 2, 1)?;
    let m = build_final_model(&inst.dataset, &Hyperparams::new(1))?;
    let sidecar = export_lp(&m, &out)?;
    println!("wrote {out} and {}", sidecar.display());

    let text = std::fs::read_to_string(&out).map_err(riskscore::Error::from)?;
    let back = parse_lp(&text)?;
    assert_eq!(back.to_lp_string(), text);
    assert_eq!(back, LpModel::from_model(&m));
    println!("{} constraints, round trip is byte-identical\n", back.n_constraints());
    for line in text.lines().take(16) {
        println!("{line}");
    }
    println!("...");
    Ok(())
}
