//! Minimum accuracy across attributes for the batched schemes against uniform
//! sampling, written as `comparison.csv` to the given directory.

use std::path::PathBuf;

use fairsample::experiment::{compare_schemes, ExperimentConfig};
use fairsample::{BatchParams, SchemeConfig};

fn main() -> fairsample::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out".into()));
    let batch = BatchParams::default();
    let base = ExperimentConfig {
        trials: 20,
        batched: Some(batch.clone()),
        ..ExperimentConfig::default()
    };
    let cfgs: Vec<ExperimentConfig> = [
        SchemeConfig::heuristic(batch),
        SchemeConfig::epsilon_greedy(0.1),
        SchemeConfig::empirical(),
        SchemeConfig::uniform(),
    ]
    .into_iter()
    .map(|scheme| ExperimentConfig {
        scheme,
        ..base.clone()
    })
    .collect();
    let table = compare_schemes(&cfgs)?;
    for r in &table.rows {
        println!(
            "{:<20} {:.4} ± {:.4}",
            r.label, r.min_acc_mean, r.min_acc_std
        );
    }
    std::fs::create_dir_all(&out)?;
    table.to_csv(std::fs::File::create(out.join("comparison.csv"))?)?;
    Ok(())
}
