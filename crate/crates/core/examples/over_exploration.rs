//! Too much exploration: ε-greedy with a large ε cannot settle below ε/m on
//! any attribute, while A_opt with an oversized bound constant degrades gently.

use fairsample::experiment::{mean_std, run_trials_with, ExperimentConfig};
use fairsample::{BoundSchedule, Oracle, SchemeConfig};

fn main() -> fairsample::Result<()> {
    let oracle = Oracle::preset("instance1", 1.0, 1.5)?;
    let run = |scheme: SchemeConfig| -> fairsample::Result<(String, f64, f64)> {
        let cfg = ExperimentConfig {
            scheme,
            trials: 20,
            ..ExperimentConfig::default()
        };
        let set = run_trials_with(&cfg, &oracle, None)?;
        let (m, s) = mean_std(&set.final_weights(0));
        Ok((set.label, m, s))
    };
    for eps in [0.1, 0.3, 0.5, 0.9] {
        let (label, m, s) = run(SchemeConfig::epsilon_greedy(eps))?;
        println!(
            "{label:<16} π_n(u) = {m:.3} ± {s:.3}   (exploration floor ε/2 = {:.2})",
            eps / 2.0
        );
    }
    for c0 in [0.1, 0.3, 1.0] {
        let scheme = SchemeConfig::aopt(0.0).with_bound(BoundSchedule::HeuristicInverseSqrt { c0 });
        let (_, m, s) = run(scheme)?;
        println!("aopt c0 = {c0:<6}  π_n(u) = {m:.3} ± {s:.3}");
    }
    Ok(())
}
