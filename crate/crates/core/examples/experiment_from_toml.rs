//! Runs an experiment described by a TOML file, the same way the binary does.
//!
//! `cargo run --release --example experiment_from_toml -- path/to/exp.toml`

use fairsample::experiment::{mean_std, run_experiment, ExperimentConfig};

const DEFAULT: &str = r#"
oracle = "instance1"
budget = 2000
trials = 10
seed = 42
out = "out/aopt"

[scheme]
kind = "aopt"

[bound]
kind = "heuristic"
c0 = 0.1

[eval]
enabled = true
resolution = 201
samples = 20000
"#;

fn main() -> fairsample::Result<()> {
    let map = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load_toml(path.as_ref())?,
        None => ExperimentConfig::parse_toml(DEFAULT)?,
    };
    let cfg = ExperimentConfig::from_map(&map)?;
    let set = run_experiment(&cfg)?;
    let (pi, pi_sd) = mean_std(&set.final_weights(0));
    let (risk, risk_sd) = mean_std(&set.excess_risks());
    println!("π_n(0) = {pi:.3} ± {pi_sd:.3}, excess risk {risk:.4} ± {risk_sd:.4}");
    println!(
        "wrote trajectories.csv, summary.csv and sweep.csv to {}",
        cfg.out.display()
    );
    Ok(())
}
