//! Final mixtures of A_opt, ε-greedy and the greedy baseline over repeated trials.

use fairsample::experiment::{mean_std, run_trials_with, ExperimentConfig};
use fairsample::{Oracle, SchemeConfig};

fn main() -> fairsample::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .map_or(20, |a| a.parse().expect("trials"));
    for name in ["instance1", "instance2"] {
        let oracle = Oracle::preset(name, 1.0, 1.5)?;
        println!("{name}, n = 2000, {trials} trials");
        for scheme in [
            SchemeConfig::aopt(0.0),
            SchemeConfig::epsilon_greedy(0.1),
            SchemeConfig::empirical(),
        ] {
            let cfg = ExperimentConfig {
                scheme,
                trials,
                ..ExperimentConfig::default()
            };
            let set = run_trials_with(&cfg, &oracle, None)?;
            let (mean, std) = mean_std(&set.final_weights(0));
            println!("  {:<14} π_n(u) = {mean:.3} ± {std:.3}", set.label);
        }
    }
    Ok(())
}
