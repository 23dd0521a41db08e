//! Ground-truth evaluation: brute-force optimal mixture, excess risk and the
//! structural diagnostics that justify a loss-equalizing optimum.
//!
//! The sweep draws one pool of `sample_size` samples per attribute up front and
//! trains grid point `π` on the first `apportion(π)[z]` samples of each pool.
//! Neighbouring grid points therefore share almost all of their training data,
//! which keeps the per-attribute loss curves smooth in `π`.

use std::io::Write;

use rayon::prelude::*;

use crate::classifier::{train_erm, LinearClassifier, TrainConfig};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::rng::sweep_rng;
use crate::types::{AttributeId, LabeledSample, Mixture};
use rand::Rng;

/// Largest lattice evaluated for `m > 2`.
pub const MAX_LATTICE_POINTS: usize = 5_000;

/// Formats a float with 9 significant digits, printed in the shortest form
/// that parses back to the rounded value.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("valid float literal");
    format!("{rounded}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub mixture: Mixture,
    /// Population loss of `f_π` per attribute.
    pub losses: Vec<f64>,
    /// `max_z L(z, f_π)`.
    pub minimax: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSweepResult {
    pub points: Vec<GridPoint>,
    /// Index of the first grid point attaining the smallest minimax value.
    pub best: usize,
    oracle: Oracle,
}

impl GridSweepResult {
    pub fn best_point(&self) -> &GridPoint {
        &self.points[self.best]
    }

    pub fn best_mixture(&self) -> &Mixture {
        &self.points[self.best].mixture
    }

    /// `M̂* = min over the grid of max_z L(z, f_π)`.
    pub fn optimal_value(&self) -> f64 {
        self.points[self.best].minimax
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn m(&self) -> usize {
        self.oracle.m()
    }

    /// Grid points whose minimax value is within `tol` of the optimum.
    pub fn near_optimal(&self, tol: f64) -> Vec<&GridPoint> {
        let best = self.optimal_value();
        self.points
            .iter()
            .filter(|p| p.minimax <= best + tol)
            .collect()
    }

    /// Sign changes of `L(0, f_π) - L(1, f_π)` along the grid; exact zeros are skipped.
    pub fn sign_changes(&self) -> Result<usize> {
        self.require_two()?;
        let signs: Vec<f64> = self
            .points
            .iter()
            .map(|p| p.losses[0] - p.losses[1])
            .filter(|d| *d != 0.0)
            .map(f64::signum)
            .collect();
        Ok(signs.windows(2).filter(|w| w[0] != w[1]).count())
    }

    /// The grid point whose `π(0)` is closest to `pi0`.
    pub fn point_at(&self, pi0: f64) -> Result<&GridPoint> {
        self.require_two()?;
        Ok(self
            .points
            .iter()
            .min_by(|a, b| {
                let da = (a.mixture.weights()[0] - pi0).abs();
                let db = (b.mixture.weights()[0] - pi0).abs();
                da.total_cmp(&db)
            })
            .expect("sweep is non-empty"))
    }

    fn require_two(&self) -> Result<()> {
        if self.m() != 2 {
            return Err(Error::invalid("this diagnostic needs exactly 2 attributes"));
        }
        Ok(())
    }

    /// Writes `pi_u,loss_u,loss_v,minimax` for two attributes, otherwise
    /// `pi_0..pi_{m-1},loss_0..loss_{m-1},minimax`.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let m = self.m();
        let mut out = csv::Writer::from_writer(writer);
        let header: Vec<String> = if m == 2 {
            vec![
                "pi_u".into(),
                "loss_u".into(),
                "loss_v".into(),
                "minimax".into(),
            ]
        } else {
            (0..m)
                .map(|z| format!("pi_{z}"))
                .chain((0..m).map(|z| format!("loss_{z}")))
                .chain(std::iter::once("minimax".to_string()))
                .collect()
        };
        out.write_record(&header)?;
        for p in &self.points {
            let mut row: Vec<String> = if m == 2 {
                vec![format_float(p.mixture.weights()[0])]
            } else {
                p.mixture
                    .weights()
                    .iter()
                    .map(|&w| format_float(w))
                    .collect()
            };
            row.extend(p.losses.iter().map(|&l| format_float(l)));
            row.push(format_float(p.minimax));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// All mixtures with weights in multiples of `1 / (resolution - 1)`.
fn lattice(m: usize, resolution: usize) -> Result<Vec<Mixture>> {
    let steps = resolution - 1;
    let mut out = Vec::new();
    let mut current = vec![0usize; m];
    fn fill(z: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let m = current.len();
        if z == m - 1 {
            current[z] = left;
            out.push(current.clone());
            return;
        }
        for k in (0..=left).rev() {
            current[z] = k;
            fill(z + 1, left - k, current, out);
        }
    }
    let mut raw = Vec::new();
    fill(0, steps, &mut current, &mut raw);
    raw.reverse();
    for ks in raw {
        let weights: Vec<f64> = ks.iter().map(|&k| k as f64 / steps as f64).collect();
        out.push(Mixture::new(weights)?);
    }
    Ok(out)
}

fn lattice_size(m: usize, resolution: usize) -> f64 {
    // C(resolution - 1 + m - 1, m - 1)
    let n = (resolution - 1 + m - 1) as f64;
    (1..m).fold(1.0, |acc, k| acc * (n - (k - 1) as f64) / k as f64)
}

/// Takes the first `counts[z]` samples of every attribute pool.
fn compose(pools: &[Vec<LabeledSample>], counts: &[usize]) -> Vec<LabeledSample> {
    pools
        .iter()
        .zip(counts)
        .flat_map(|(pool, &c)| pool[..c].iter().cloned())
        .collect()
}

fn max_loss(oracle: &Oracle, f: &LinearClassifier) -> Result<(Vec<f64>, f64)> {
    let losses = oracle.population_losses(f)?;
    let worst = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((losses, worst))
}

/// Brute-force search for `π* = argmin_π max_z L(z, f_π)` over a grid.
///
/// For two attributes the grid is `resolution` equally spaced values of
/// `π(0)`; for more it is the simplex lattice of step `1 / (resolution - 1)`,
/// capped at [`MAX_LATTICE_POINTS`]. Each grid point trains `f_π` from a cold
/// start on `sample_size` samples with proportions `π` and evaluates its
/// population losses. Points are evaluated in parallel; results are ordered by
/// grid index.
pub fn grid_optimal_mixture(
    oracle: &Oracle,
    resolution: usize,
    sample_size: usize,
    train_cfg: &TrainConfig,
    seed: u64,
) -> Result<GridSweepResult> {
    if resolution < 3 {
        return Err(Error::config("eval.resolution", "must be at least 3"));
    }
    if sample_size < 1000 {
        return Err(Error::config("eval.samples", "must be at least 1000"));
    }
    train_cfg.validate()?;
    let m = oracle.m();
    if m > 2 && lattice_size(m, resolution) > MAX_LATTICE_POINTS as f64 {
        return Err(Error::config(
            "eval.resolution",
            format!("lattice for {m} attributes exceeds {MAX_LATTICE_POINTS} points"),
        ));
    }
    let grid = lattice(m, resolution)?;
    let pools = (0..m)
        .map(|z| oracle.draw_many(AttributeId(z), sample_size, &mut sweep_rng(seed, z)))
        .collect::<Result<Vec<_>>>()?;
    let cold = TrainConfig {
        warm_start: false,
        ..train_cfg.clone()
    };
    let points = grid
        .into_par_iter()
        .map(|mixture| {
            let data = compose(&pools, &mixture.apportion(sample_size));
            let f = train_erm(&data, &cold, None)?;
            let (losses, minimax) = max_loss(oracle, &f)?;
            Ok(GridPoint {
                mixture,
                losses,
                minimax,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = points.iter().enumerate().fold(
        0,
        |b, (i, p)| if p.minimax < points[b].minimax { i } else { b },
    );
    log::info!(
        "sweep: {} points, best π = {:?}, M* = {:.4}",
        points.len(),
        points[best].mixture.weights(),
        points[best].minimax
    );
    Ok(GridSweepResult {
        points,
        best,
        oracle: oracle.clone(),
    })
}

/// `max_z L(z, f_{π_n}) - M̂*` with `f_{π_n}` refit on a fresh sample of
/// `sample_size` points at proportions `π_n`. Not clamped at zero.
pub fn excess_risk<R: Rng + ?Sized>(
    pi_n: &Mixture,
    oracle: &Oracle,
    sweep: &GridSweepResult,
    sample_size: usize,
    train_cfg: &TrainConfig,
    rng: &mut R,
) -> Result<f64> {
    if sweep.oracle() != oracle {
        return Err(Error::OracleMismatch(
            "the sweep was computed on a different oracle".into(),
        ));
    }
    if pi_n.m() != oracle.m() {
        return Err(Error::InvalidMixture(format!(
            "mixture has {} weights for {} attributes",
            pi_n.m(),
            oracle.m()
        )));
    }
    let mut data = Vec::with_capacity(sample_size);
    for (z, c) in pi_n.apportion(sample_size).into_iter().enumerate() {
        data.extend(oracle.draw_many(AttributeId(z), c, rng)?);
    }
    let cold = TrainConfig {
        warm_start: false,
        ..train_cfg.clone()
    };
    let f = train_erm(&data, &cold, None)?;
    let (_, worst) = max_loss(oracle, &f)?;
    Ok(worst - sweep.optimal_value())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizationReport {
    /// `max_z L(z, f_π̂*) - min_z L(z, f_π̂*)`.
    pub gap: f64,
    pub pass: bool,
}

/// Whether all attribute losses coincide at the sweep optimum within `tol`.
pub fn check_equalization(sweep: &GridSweepResult, tol: f64) -> EqualizationReport {
    let losses = &sweep.best_point().losses;
    let hi = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let gap = hi - lo;
    EqualizationReport {
        gap,
        pass: gap <= tol,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    /// Per attribute, the fraction of adjacent grid pairs along which its loss
    /// strictly decreases as its own weight increases.
    pub fractions: Vec<f64>,
    /// Per attribute, `max - min` of its loss curve.
    pub ranges: Vec<f64>,
    /// `None` when a curve is flat (range below [`FLAT_RANGE`]), where the
    /// fraction carries no information.
    pub pass: Option<bool>,
}

pub const MONOTONE_THRESHOLD: f64 = 0.95;
pub const FLAT_RANGE: f64 = 0.01;

/// Checks that each attribute's loss falls as its mixture weight grows.
pub fn check_monotonicity(sweep: &GridSweepResult) -> Result<MonotonicityReport> {
    sweep.require_two()?;
    let pairs = (sweep.points.len() - 1) as f64;
    let mut fractions = Vec::with_capacity(2);
    let mut ranges = Vec::with_capacity(2);
    for z in 0..2 {
        let curve: Vec<f64> = sweep.points.iter().map(|p| p.losses[z]).collect();
        // the grid runs in increasing π(0), i.e. decreasing π(1)
        let improving = curve
            .windows(2)
            .filter(|w| if z == 0 { w[1] < w[0] } else { w[0] < w[1] })
            .count();
        fractions.push(improving as f64 / pairs);
        let hi = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = curve.iter().copied().fold(f64::INFINITY, f64::min);
        ranges.push(hi - lo);
    }
    let pass = if ranges.iter().any(|&r| r < FLAT_RANGE) {
        None
    } else {
        Some(fractions.iter().all(|&f| f >= MONOTONE_THRESHOLD))
    };
    Ok(MonotonicityReport {
        fractions,
        ranges,
        pass,
    })
}

/// For each attribute `z`, whether the classifier trained only on `z` is worse
/// on every other attribute than on `z` itself.
pub fn check_corner_dominance(sweep: &GridSweepResult) -> Vec<bool> {
    let m = sweep.m();
    (0..m)
        .map(|z| {
            sweep
                .points
                .iter()
                .find(|p| p.mixture.weights()[z] == 1.0)
                .map(|p| {
                    (0..m)
                        .filter(|&o| o != z)
                        .all(|o| p.losses[o] > p.losses[z])
                })
                .unwrap_or(false)
        })
        .collect()
}
