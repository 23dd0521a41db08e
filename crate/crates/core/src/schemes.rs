//! Sampling schemes and the round drivers that execute them.
//!
//! A scheme maps the current [`RunState`] to the attribute queried next.
//! [`run_exact`] draws one training/validation pair per round and refits the
//! classifier by ERM every round. [`run_batched`] draws minibatches per step and
//! updates the classifier with SGD; [`run_heuristic`] is that driver with the
//! heuristic selection rule.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::bounds::BoundSchedule;
use crate::classifier::{sgd_steps, train_erm, LinearClassifier, LossKind, TrainConfig};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::types::{rho, AttributeId, LabeledSample, Mixture, RunState};

/// Minibatch parameters of the batched driver.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchParams {
    /// Training/validation pairs drawn in the initial phase, split by `pi0`.
    pub n0: usize,
    /// SGD steps per outer step; also the number of minibatches per set.
    pub k0: usize,
    pub b0: usize,
    /// `None` means uniform.
    pub pi0: Option<Mixture>,
}

impl Default for BatchParams {
    fn default() -> Self {
        Self {
            n0: 10,
            k0: 4,
            b0: 50,
            pi0: None,
        }
    }
}

impl BatchParams {
    /// Draws consumed by one outer step.
    pub fn step_draws(&self) -> usize {
        2 * self.k0 * self.b0
    }

    fn init_pairs(&self, m: usize) -> Result<Vec<usize>> {
        let pi0 = match &self.pi0 {
            Some(p) => p.clone(),
            None => Mixture::uniform(m)?,
        };
        Ok(pi0.apportion(self.n0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeKind {
    /// Optimistic selection with forced exploration.
    ///
    /// `c = 0` drops the `C / π_t(z)` term; a `zeta` exponent drops it as well and
    /// replaces the `√t` exploration threshold with `t^ζ`.
    AOpt {
        c: f64,
        ucb_multiplier: f64,
        zeta: Option<f64>,
    },
    /// Selection by validation loss plus deviation bound, no forced exploration.
    Heuristic {
        batch: BatchParams,
    },
    /// `None` base means uniform.
    EpsilonGreedy {
        epsilon: f64,
        base: Option<Mixture>,
    },
    Empirical,
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub bound: BoundSchedule,
    pub selection_loss: LossKind,
}

impl SchemeConfig {
    pub fn new(kind: SchemeKind) -> Self {
        Self {
            kind,
            bound: BoundSchedule::default(),
            selection_loss: LossKind::ZeroOne,
        }
    }

    pub fn aopt(c: f64) -> Self {
        Self::new(SchemeKind::AOpt {
            c,
            ucb_multiplier: 2.0,
            zeta: None,
        })
    }

    pub fn aopt_zeta(zeta: f64) -> Self {
        Self::new(SchemeKind::AOpt {
            c: 0.0,
            ucb_multiplier: 2.0,
            zeta: Some(zeta),
        })
    }

    pub fn heuristic(batch: BatchParams) -> Self {
        Self::new(SchemeKind::Heuristic { batch })
    }

    pub fn epsilon_greedy(epsilon: f64) -> Self {
        Self::new(SchemeKind::EpsilonGreedy {
            epsilon,
            base: None,
        })
    }

    pub fn empirical() -> Self {
        Self::new(SchemeKind::Empirical)
    }

    pub fn uniform() -> Self {
        Self::new(SchemeKind::Uniform)
    }

    pub fn with_bound(mut self, bound: BoundSchedule) -> Self {
        self.bound = bound;
        self
    }

    /// Checks parameter ranges against an oracle with `m` attributes.
    pub fn validate(&self, m: usize) -> Result<()> {
        self.bound.validate()?;
        let check_mixture = |p: &Mixture, key: &str| -> Result<()> {
            if p.m() != m {
                return Err(Error::config(
                    key,
                    format!("has {} weights but the oracle has {m} attributes", p.m()),
                ));
            }
            Ok(())
        };
        match &self.kind {
            SchemeKind::AOpt {
                c,
                ucb_multiplier,
                zeta,
            } => {
                if let Some(zeta) = zeta {
                    if !(*zeta > 0.5 && *zeta < 1.0) {
                        return Err(Error::config("scheme.zeta", "must lie in (0.5, 1)"));
                    }
                } else if !(*c >= 0.0 && c.is_finite()) {
                    return Err(Error::config("scheme.C", "must be a nonnegative number"));
                }
                if !(*ucb_multiplier > 0.0 && ucb_multiplier.is_finite()) {
                    return Err(Error::config("scheme.ucb_multiplier", "must be positive"));
                }
            }
            SchemeKind::Heuristic { batch } => {
                if batch.b0 == 0 {
                    return Err(Error::config("scheme.b0", "must be positive"));
                }
                if let Some(p) = &batch.pi0 {
                    check_mixture(p, "scheme.pi0")?;
                }
            }
            SchemeKind::EpsilonGreedy { epsilon, base } => {
                if !(0.0..=1.0).contains(epsilon) {
                    return Err(Error::config("scheme.epsilon", "must lie in [0, 1]"));
                }
                if let Some(base) = base {
                    check_mixture(base, "scheme.base")?;
                    if base.min_weight() <= 0.0 {
                        return Err(Error::config(
                            "scheme.base",
                            "must put positive mass on every attribute",
                        ));
                    }
                }
            }
            SchemeKind::Empirical | SchemeKind::Uniform => {}
        }
        Ok(())
    }

    /// Short name used in output tables.
    pub fn label(&self) -> String {
        match &self.kind {
            SchemeKind::AOpt { zeta: Some(z), .. } => format!("aopt(zeta={z})"),
            SchemeKind::AOpt { .. } => "aopt".into(),
            SchemeKind::Heuristic { .. } => "heuristic".into(),
            SchemeKind::EpsilonGreedy { epsilon, .. } => format!("egreedy({epsilon})"),
            SchemeKind::Empirical => "empirical".into(),
            SchemeKind::Uniform => "uniform".into(),
        }
    }
}

/// One logged round.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    /// Total training samples after the round.
    pub t: usize,
    pub z: AttributeId,
    pub pi: Vec<f64>,
    /// Validation loss of the current classifier per attribute.
    pub losses: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub rows: Vec<TrajectoryRow>,
    pub final_mixture: Mixture,
    pub classifier: LinearClassifier,
    /// Oracle draws consumed.
    pub draws: usize,
}

/// Index of the largest value; ties and NaN go to the smallest index / rank last.
fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] || (values[best].is_nan() && !v.is_nan()) {
            best = i;
        }
    }
    best
}

fn argmin_count(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c < counts[best] {
            best = i;
        }
    }
    best
}

/// Validation loss, with an empty validation set treated as maximally uncertain.
fn validation_loss(state: &RunState, z: usize) -> f64 {
    let l = state.validation_losses[z];
    if l.is_nan() {
        f64::INFINITY
    } else {
        l
    }
}

/// Upper confidence bound `L̂(z) + e_z(N_z) + (mult · C / π_t(z)) · ρ_t`.
///
/// The third term is omitted for the heuristic rule, for the ζ variant and when
/// `C = 0`. Only defined for the AOpt and Heuristic kinds.
pub fn ucb(state: &RunState, z: AttributeId, cfg: &SchemeConfig) -> Result<f64> {
    let z = AttributeId::checked(z.0, state.m())?;
    let third = match &cfg.kind {
        SchemeKind::AOpt {
            c,
            ucb_multiplier,
            zeta: None,
        } if *c > 0.0 => Some(ucb_multiplier * c),
        SchemeKind::AOpt { .. } | SchemeKind::Heuristic { .. } => None,
        _ => {
            return Err(Error::invalid(format!(
                "scheme `{}` has no confidence bound",
                cfg.label()
            )))
        }
    };
    let base = validation_loss(state, z.0) + state.bounds[z.0];
    match third {
        None => Ok(base),
        Some(scale) => {
            if state.counts()[z.0] == 0 {
                return Err(Error::UninitializedAttribute(z.0));
            }
            let pi = state.pi()?;
            Ok(base + scale / pi.weight(z) * rho(state)?)
        }
    }
}

/// Forced exploration below `t^q`, otherwise the largest UCB.
pub fn select_aopt(state: &RunState, cfg: &SchemeConfig) -> Result<AttributeId> {
    let SchemeKind::AOpt { zeta, .. } = &cfg.kind else {
        return Err(Error::invalid("select_aopt needs an AOpt scheme"));
    };
    let q = zeta.unwrap_or(0.5);
    let counts = state.counts();
    let total: usize = counts.iter().sum();
    let low = argmin_count(counts);
    if (counts[low] as f64) < (total as f64).powf(q) {
        return Ok(AttributeId(low));
    }
    let scores = (0..state.m())
        .map(|z| ucb(state, AttributeId(z), cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(AttributeId(argmax(&scores)))
}

/// With probability ε a draw from the base mixture, else the largest validation loss.
pub fn select_epsilon_greedy<R: Rng + ?Sized>(
    state: &RunState,
    cfg: &SchemeConfig,
    rng: &mut R,
) -> Result<AttributeId> {
    let (epsilon, base) = match &cfg.kind {
        SchemeKind::EpsilonGreedy { epsilon, base } => (*epsilon, base.as_ref()),
        SchemeKind::Empirical => (0.0, None),
        _ => {
            return Err(Error::invalid(
                "select_epsilon_greedy needs an ε-greedy scheme",
            ))
        }
    };
    if epsilon > 0.0 && rng.random_bool(epsilon) {
        let z = match base {
            Some(p) => WeightedIndex::new(p.weights())
                .map_err(|e| Error::InvalidMixture(e.to_string()))?
                .sample(rng),
            None => rng.random_range(0..state.m()),
        };
        return Ok(AttributeId(z));
    }
    let losses: Vec<f64> = (0..state.m()).map(|z| validation_loss(state, z)).collect();
    Ok(AttributeId(argmax(&losses)))
}

/// Dispatches to the selection rule of `cfg.kind`.
pub fn select<R: Rng + ?Sized>(
    state: &RunState,
    cfg: &SchemeConfig,
    rng: &mut R,
) -> Result<AttributeId> {
    match &cfg.kind {
        SchemeKind::AOpt { .. } => select_aopt(state, cfg),
        SchemeKind::Heuristic { .. } => {
            let scores = (0..state.m())
                .map(|z| ucb(state, AttributeId(z), cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok(AttributeId(argmax(&scores)))
        }
        SchemeKind::EpsilonGreedy { .. } | SchemeKind::Empirical => {
            select_epsilon_greedy(state, cfg, rng)
        }
        SchemeKind::Uniform => Ok(AttributeId(argmin_count(state.counts()))),
    }
}

fn refresh_bounds(state: &mut RunState, bound: &BoundSchedule) -> Result<()> {
    for z in 0..state.m() {
        let n = state.counts()[z];
        state.bounds[z] = if n == 0 {
            f64::INFINITY
        } else {
            bound.deviation(n)?
        };
    }
    Ok(())
}

fn log_row(state: &RunState, z: AttributeId) -> Result<TrajectoryRow> {
    Ok(TrajectoryRow {
        t: state.t,
        z,
        pi: state.pi()?.weights().to_vec(),
        losses: state.validation_losses.clone(),
        counts: state.counts().to_vec(),
    })
}

fn finish(state: RunState, rows: Vec<TrajectoryRow>, draws: usize) -> Result<RunRecord> {
    Ok(RunRecord {
        final_mixture: state.pi()?,
        classifier: state.classifier,
        rows,
        draws,
    })
}

/// Executes `n / 2` rounds of one training/validation pair each.
///
/// The first `m` rounds visit the attributes in index order; later rounds use
/// the scheme's selection rule. The classifier is refit by ERM after every
/// round and every round is logged.
pub fn run_exact<R: Rng + ?Sized>(
    cfg: &SchemeConfig,
    oracle: &Oracle,
    budget: usize,
    train_cfg: &TrainConfig,
    rng: &mut R,
) -> Result<RunRecord> {
    let m = oracle.m();
    cfg.validate(m)?;
    train_cfg.validate()?;
    if !budget.is_multiple_of(2) || budget < 4 * m {
        return Err(Error::config(
            "budget",
            format!("must be even and at least {}", 4 * m),
        ));
    }
    let rounds = budget / 2;
    let mut state = RunState::new(m, oracle.dim());
    let mut rows = Vec::with_capacity(rounds);
    for round in 0..rounds {
        let z = if round < m {
            AttributeId(round)
        } else {
            select(&state, cfg, rng)?
        };
        let train = oracle.draw(z, rng)?;
        let validation = oracle.draw(z, rng)?;
        state.data.push_pair(train, validation)?;
        state.t += 1;
        refresh_bounds(&mut state, &cfg.bound)?;
        state.classifier = train_erm(state.data.train(), train_cfg, Some(&state.classifier))?;
        state.refresh_validation_losses(cfg.selection_loss);
        rows.push(log_row(&state, z)?);
    }
    finish(state, rows, budget)
}

/// Batched driver for any scheme kind.
///
/// The initial phase draws `n0` pairs split by `pi0`; the classifier starts at
/// zero and is only moved by SGD. Each outer step selects an attribute, draws
/// `k0` training and `k0` validation minibatches of `b0` samples from it and
/// applies one SGD step per training minibatch at `train_cfg.learning_rate`.
/// A step that would exceed the budget is skipped, so at most
/// `2 k0 b0 - 1` draws go unused. `state.t` counts training samples.
pub fn run_batched<R: Rng + ?Sized>(
    cfg: &SchemeConfig,
    batch: &BatchParams,
    oracle: &Oracle,
    budget: usize,
    train_cfg: &TrainConfig,
    rng: &mut R,
) -> Result<RunRecord> {
    let m = oracle.m();
    cfg.validate(m)?;
    train_cfg.validate()?;
    if batch.b0 == 0 {
        return Err(Error::config("scheme.b0", "must be positive"));
    }
    if batch.n0 == 0 {
        return Err(Error::config("scheme.n0", "must be positive"));
    }
    if let Some(p) = &batch.pi0 {
        if p.m() != m {
            return Err(Error::config("scheme.pi0", "length must match the oracle"));
        }
    }
    if budget < 2 * batch.n0 {
        return Err(Error::config(
            "budget",
            format!("must cover the {} draws of the initial phase", 2 * batch.n0),
        ));
    }
    let mut state = RunState::new(m, oracle.dim());
    let mut rows = Vec::new();
    let mut draws = 0;
    for (z, pairs) in batch.init_pairs(m)?.into_iter().enumerate() {
        if pairs == 0 {
            continue;
        }
        let z = AttributeId(z);
        let train = oracle.draw_many(z, pairs, rng)?;
        let validation = oracle.draw_many(z, pairs, rng)?;
        state.data.push_batches(train, validation)?;
        draws += 2 * pairs;
        state.t = state.data.total();
        refresh_bounds(&mut state, &cfg.bound)?;
        state.refresh_validation_losses(cfg.selection_loss);
        rows.push(log_row(&state, z)?);
    }
    let step = batch.step_draws();
    while step > 0 && draws + step <= budget {
        let z = select(&state, cfg, rng)?;
        let mut minibatches: Vec<Vec<LabeledSample>> = Vec::with_capacity(batch.k0);
        for _ in 0..batch.k0 {
            minibatches.push(oracle.draw_many(z, batch.b0, rng)?);
        }
        let validation = oracle.draw_many(z, batch.k0 * batch.b0, rng)?;
        draws += step;
        state.classifier = sgd_steps(&state.classifier, &minibatches, train_cfg.learning_rate)?;
        state
            .data
            .push_batches(minibatches.into_iter().flatten().collect(), validation)?;
        state.t = state.data.total();
        refresh_bounds(&mut state, &cfg.bound)?;
        state.refresh_validation_losses(cfg.selection_loss);
        rows.push(log_row(&state, z)?);
    }
    finish(state, rows, draws)
}

/// [`run_batched`] with the heuristic scheme's own batch parameters.
pub fn run_heuristic<R: Rng + ?Sized>(
    cfg: &SchemeConfig,
    oracle: &Oracle,
    budget: usize,
    train_cfg: &TrainConfig,
    rng: &mut R,
) -> Result<RunRecord> {
    let SchemeKind::Heuristic { batch } = &cfg.kind else {
        return Err(Error::invalid("run_heuristic needs a Heuristic scheme"));
    };
    run_batched(cfg, batch, oracle, budget, train_cfg, rng)
}
