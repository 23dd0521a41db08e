//! Brute-force search for the minimax-fair mixture on both synthetic instances.
//!
//! `cargo run --release --example optimal_mixture_sweep [resolution] [samples]`

use fairsample::eval::{check_equalization, check_monotonicity, grid_optimal_mixture};
use fairsample::{Oracle, TrainConfig};

fn main() -> fairsample::Result<()> {
    let mut args = std::env::args().skip(1);
    let resolution = args
        .next()
        .map_or(Ok(201), |a| a.parse())
        .expect("resolution");
    let samples = args
        .next()
        .map_or(Ok(20_000), |a| a.parse())
        .expect("samples");

    for name in ["instance1", "instance2"] {
        let oracle = Oracle::preset(name, 1.0, 1.5)?;
        let sweep = grid_optimal_mixture(&oracle, resolution, samples, &TrainConfig::default(), 1)?;
        let eq = check_equalization(&sweep, 0.02);
        let mono = check_monotonicity(&sweep)?;
        println!(
            "{name}: π*(u) ≈ {:.3}, min accuracy {:.4}, loss gap {:.4}, monotone fractions {:.3?}",
            sweep.best_mixture().weights()[0],
            1.0 - sweep.optimal_value(),
            eq.gap,
            mono.fractions,
        );
        for p in sweep.points.iter().step_by((resolution / 10).max(1)) {
            println!(
                "  π(u) = {:.2}  L(u) = {:.4}  L(v) = {:.4}",
                p.mixture.weights()[0],
                p.losses[0],
                p.losses[1]
            );
        }
    }
    Ok(())
}
