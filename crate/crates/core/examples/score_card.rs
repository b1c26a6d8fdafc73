//! Render a score card for a fitted model with named features.
//!
//!     cargo run --release --example score_card

use riskscore::datagen::generate;
use riskscore::exact::brute_force;
use riskscore::report::ScoreCard;
use riskscore::Hyperparams;

fn main() -> riskscore::Result<()> {
    let inst = generate(200, 2, 11)?;
    let d = &inst.dataset;
    let fit = brute_force(d, &Hyperparams::new(2), false)?;
    let names = ["blood pressure".to_string(), "cholesterol".to_string()];
    for m in [1.0, 2.5] {
        let card = ScoreCard::new(&fit.best, Some(&names), m)?;
        println!("{}", card.render());
    }
    let x = d.row(0);
    println!(
        "sample 0: score {}, risk {:.1}%",
        fit.best.score(x),
        100.0 * fit.best.predict_proba(x)
    );
    Ok(())
}
