//! Sampling from finite labeled pools loaded from CSV, with a held-out pool
//! for evaluation.

use std::fmt::Write as _;

use fairsample::experiment::{run_experiment, ExperimentConfig, OracleSource};
use fairsample::rng::stream_rng;
use fairsample::{AttributeId, Oracle, SchemeConfig};

/// Writes `x0,x1,y,z` rows drawn from a Gaussian preset.
fn export(oracle: &Oracle, per_attribute: usize, seed: u64) -> fairsample::Result<String> {
    let mut rng = stream_rng(seed, 0);
    let mut csv = String::from("x0,x1,y,z\n");
    for z in 0..oracle.m() {
        for s in oracle.draw_many(AttributeId(z), per_attribute, &mut rng)? {
            writeln!(csv, "{},{},{},{}", s.x[0], s.x[1], s.y, z).unwrap();
        }
    }
    Ok(csv)
}

fn main() -> fairsample::Result<()> {
    let dir = std::env::temp_dir().join("fairsample-pool");
    std::fs::create_dir_all(&dir)?;
    let gaussian = Oracle::preset("instance2", 1.0, 1.5)?;
    std::fs::write(dir.join("train.csv"), export(&gaussian, 3000, 1)?)?;
    std::fs::write(dir.join("test.csv"), export(&gaussian, 5000, 2)?)?;

    let cfg = ExperimentConfig {
        oracle: OracleSource::Csv {
            path: dir.join("train.csv"),
            test: Some(dir.join("test.csv")),
        },
        scheme: SchemeConfig::epsilon_greedy(0.1),
        trials: 5,
        eval: true,
        eval_resolution: 21,
        eval_samples: 4000,
        out: dir.join("out"),
        ..ExperimentConfig::default()
    };
    let set = run_experiment(&cfg)?;
    for r in set.completed() {
        println!(
            "π_n = {:.3?}  min accuracy {:.4}  excess risk {:+.4}",
            r.record.final_mixture.weights(),
            r.min_acc,
            r.excess_risk.unwrap_or(f64::NAN)
        );
    }
    println!("outputs in {}", cfg.out.display());
    Ok(())
}
