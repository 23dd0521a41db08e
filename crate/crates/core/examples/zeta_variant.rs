//! A_opt without the `C` term: forced exploration below `t^ζ` instead of `√t`.

use fairsample::experiment::{mean_std, run_trials_with, ExperimentConfig};
use fairsample::{Oracle, SchemeConfig};

fn main() -> fairsample::Result<()> {
    let oracle = Oracle::preset("instance1", 1.0, 1.5)?;
    for zeta in [0.55, 0.7, 0.85, 0.95] {
        let cfg = ExperimentConfig {
            scheme: SchemeConfig::aopt_zeta(zeta),
            trials: 20,
            ..ExperimentConfig::default()
        };
        let set = run_trials_with(&cfg, &oracle, None)?;
        let (m, s) = mean_std(&set.final_weights(0));
        let floor = set
            .completed()
            .map(|r| *r.record.rows.last().unwrap().counts.iter().min().unwrap())
            .min()
            .unwrap_or(0);
        println!("ζ = {zeta:<5} π_n(u) = {m:.3} ± {s:.3}, smallest final count {floor}");
    }
    Ok(())
}
