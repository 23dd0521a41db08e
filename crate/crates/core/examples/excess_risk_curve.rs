//! Excess risk of A_opt as the budget grows.

use fairsample::eval::grid_optimal_mixture;
use fairsample::experiment::{mean_std, run_trials_with, ExperimentConfig};
use fairsample::{Oracle, SchemeConfig, TrainConfig};

fn main() -> fairsample::Result<()> {
    let oracle = Oracle::preset("instance1", 1.0, 1.5)?;
    let sweep = grid_optimal_mixture(&oracle, 401, 20_000, &TrainConfig::default(), 5)?;
    println!(
        "M* = {:.4} at π(u) = {:.3}",
        sweep.optimal_value(),
        sweep.best_mixture().weights()[0]
    );
    for budget in [250, 500, 1000, 2000, 4000] {
        let cfg = ExperimentConfig {
            scheme: SchemeConfig::aopt(0.0),
            budget,
            trials: 20,
            ..ExperimentConfig::default()
        };
        let set = run_trials_with(&cfg, &oracle, Some(&sweep))?;
        let (m, s) = mean_std(&set.excess_risks());
        println!("n = {budget:>5}: excess risk {m:.4} ± {s:.4}");
    }
    Ok(())
}
