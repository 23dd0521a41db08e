//! Command-line runner; see the `experiment` module for the accepted keys.
//!
//! `--compare=aopt,egreedy,empirical,uniform` runs each listed scheme with the
//! remaining settings and writes `comparison.csv` instead of per-trial files.

use std::fs;
use std::io::BufWriter;
use std::process::ExitCode;

use fairsample::experiment::{compare_schemes, run_experiment, ExperimentConfig};
use fairsample::Error;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FAIRSAMPLE_LOG", "off")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run() -> fairsample::Result<()> {
    let mut map = ExperimentConfig::parse_args(std::env::args().skip(1))?;
    if let Some(list) = map.remove("compare") {
        let mut cfgs = Vec::new();
        for kind in list.split(',').map(str::trim).filter(|k| !k.is_empty()) {
            let mut m = map.clone();
            m.insert("scheme.kind".into(), kind.into());
            cfgs.push(ExperimentConfig::from_map(&m)?);
        }
        let table = compare_schemes(&cfgs)?;
        let out = &cfgs.first().map(|c| c.out.clone()).unwrap_or_default();
        fs::create_dir_all(out)?;
        table.to_csv(BufWriter::new(fs::File::create(
            out.join("comparison.csv"),
        )?))?;
        for r in &table.rows {
            println!(
                "{:<24} min_acc {:.4} ± {:.4} ({} ok, {} failed)",
                r.label, r.min_acc_mean, r.min_acc_std, r.completed, r.failed
            );
        }
        return Ok(());
    }
    let cfg = ExperimentConfig::from_map(&map)?;
    let set = run_experiment(&cfg)?;
    let m = set.oracle.m();
    for z in 0..m {
        let (mean, std) = fairsample::experiment::mean_std(&set.final_weights(z));
        println!("pi_{z}: {mean:.4} ± {std:.4}");
    }
    if let Some(sweep) = &set.sweep {
        println!(
            "sweep optimum {:?}, M* = {:.4}",
            sweep.best_mixture().weights(),
            sweep.optimal_value()
        );
    }
    println!("wrote {}", cfg.out.display());
    Ok(())
}
