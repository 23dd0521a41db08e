//! The mirrored pair of instances used for lower bounds: the same learner
//! must move its mixture in opposite directions on the two.

use fairsample::eval::grid_optimal_mixture;
use fairsample::experiment::{mean_std, run_trials_with, ExperimentConfig};
use fairsample::{Oracle, SchemeConfig, TrainConfig};

fn main() -> fairsample::Result<()> {
    let (r, r_prime) = (1.0, 1.5);
    for name in ["lower_q_mu", "lower_q_gamma"] {
        let oracle = Oracle::preset(name, r, r_prime)?;
        let sweep = grid_optimal_mixture(&oracle, 101, 20_000, &TrainConfig::default(), 3)?;
        let cfg = ExperimentConfig {
            scheme: SchemeConfig::aopt(0.0),
            trials: 20,
            ..ExperimentConfig::default()
        };
        let set = run_trials_with(&cfg, &oracle, None)?;
        let (m, s) = mean_std(&set.final_weights(0));
        println!(
            "{name}: π*(u) ≈ {:.3}, M* = {:.4}; aopt π_n(u) = {m:.3} ± {s:.3}",
            sweep.best_mixture().weights()[0],
            sweep.optimal_value()
        );
    }
    Ok(())
}
