//! The minibatch heuristic: an initial phase, then batches of `b0` samples and
//! `k0` SGD steps per selected attribute.

use fairsample::rng::trial_rng;
use fairsample::schemes::run_heuristic;
use fairsample::{BatchParams, Oracle, SchemeConfig, TrainConfig};

fn main() -> fairsample::Result<()> {
    let oracle = Oracle::preset("instance1", 1.0, 1.5)?;
    let batch = BatchParams {
        n0: 10,
        k0: 4,
        b0: 25,
        pi0: None,
    };
    let cfg = SchemeConfig::heuristic(batch);
    let rec = run_heuristic(
        &cfg,
        &oracle,
        6000,
        &TrainConfig::default(),
        &mut trial_rng(7, 0),
    )?;
    println!("step  z  counts        validation 0-1 loss");
    for (i, row) in rec.rows.iter().enumerate() {
        println!(
            "{i:>4}  {}  {:<12}  {:.3?}",
            row.z,
            format!("{:?}", row.counts),
            row.losses
        );
    }
    println!(
        "draws used {} of 6000, final π = {:.3?}, min accuracy {:.4}",
        rec.draws,
        rec.final_mixture.weights(),
        oracle.min_accuracy(&rec.classifier)?
    );
    Ok(())
}
