//! Linear classifiers: logistic ERM training, SGD steps and per-sample losses.
//!
//! The training objective is the mean logistic loss plus a ridge term on the
//! weights (the bias is not penalized):
//!
//! ```text
//! J(w, b) = (1/N) Σ log(1 + exp(-s_i (w·x_i + b))) + λ/2 ||w||²,   s_i = 2 y_i - 1
//! ```
//!
//! Prediction is label 1 iff `w·x + b >= 0`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::types::LabeledSample;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub w: Vec<f64>,
    pub b: f64,
}

impl LinearClassifier {
    pub fn new(w: Vec<f64>, b: f64) -> Result<Self> {
        if w.iter().any(|v| !v.is_finite()) || !b.is_finite() {
            return Err(Error::invalid("classifier parameters must be finite"));
        }
        Ok(Self { w, b })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            w: vec![0.0; dim],
            b: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn margin(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.b
    }

    pub fn predict(&self, x: &[f64]) -> u8 {
        u8::from(self.margin(x) >= 0.0)
    }

    /// Flat parameter vector `[w_0, .., w_{d-1}, b]`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.w.clone();
        p.push(self.b);
        p
    }

    pub fn from_params(params: &[f64]) -> Self {
        let (w, b) = params.split_at(params.len() - 1);
        Self {
            w: w.to_vec(),
            b: b[0],
        }
    }

    fn is_finite(&self) -> bool {
        self.b.is_finite() && self.w.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    /// Misclassification indicator; used for evaluation and attribute selection.
    #[default]
    ZeroOne,
    /// Logistic loss; the ERM training surrogate.
    Logistic,
}

impl LossKind {
    pub fn sample_loss(self, f: &LinearClassifier, s: &LabeledSample) -> f64 {
        match self {
            LossKind::ZeroOne => f64::from(f.predict(&s.x) != s.y),
            LossKind::Logistic => softplus(-sign(s.y) * f.margin(&s.x)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Damped Newton iterations with Armijo backtracking.
    #[default]
    Newton,
    /// Full-batch gradient descent at a fixed learning rate.
    GradientDescent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Iteration cap; counts gradient steps or Newton steps depending on `solver`.
    pub max_epochs: usize,
    /// Stop once the gradient norm falls to this value.
    pub tolerance: f64,
    /// Ridge coefficient λ on the weights.
    pub l2: f64,
    pub warm_start: bool,
    pub solver: Solver,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_epochs: 500,
            tolerance: 1e-6,
            l2: 1e-4,
            warm_start: true,
            solver: Solver::Newton,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("train.rate", "must be a positive number"));
        }
        if self.max_epochs == 0 {
            return Err(Error::config("train.epochs", "must be positive"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::config("train.tol", "must be positive"));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::config("train.lambda", "must be nonnegative"));
        }
        Ok(())
    }
}

/// Outcome of one ERM fit.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub classifier: LinearClassifier,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Objective value before the first step and after every step.
    pub objective_trace: Vec<f64>,
}

#[inline]
fn sign(y: u8) -> f64 {
    if y == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `log(1 + exp(t))` without overflow.
#[inline]
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Mean per-sample loss of `f` on `data`.
pub fn empirical_loss(f: &LinearClassifier, data: &[LabeledSample], kind: LossKind) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let total: f64 = data.iter().map(|s| kind.sample_loss(f, s)).sum();
    Ok(total / data.len() as f64)
}

/// Fraction of correctly classified samples.
pub fn accuracy(f: &LinearClassifier, data: &[LabeledSample]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let correct = data.iter().filter(|s| f.predict(&s.x) == s.y).count();
    Ok(correct as f64 / data.len() as f64)
}

/// Regularized training objective `J(w, b)`.
pub fn logistic_objective(f: &LinearClassifier, data: &[LabeledSample], l2: f64) -> Result<f64> {
    let mean = empirical_loss(f, data, LossKind::Logistic)?;
    let ridge: f64 = f.w.iter().map(|w| w * w).sum();
    Ok(mean + 0.5 * l2 * ridge)
}

/// Gradient of `J` with respect to `[w, b]`.
pub fn logistic_gradient(
    f: &LinearClassifier,
    data: &[LabeledSample],
    l2: f64,
) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = f.dim();
    let mut g = vec![0.0; d + 1];
    for s in data {
        let sy = sign(s.y);
        let coef = -sy * sigmoid(-sy * f.margin(&s.x));
        for (gj, xj) in g.iter_mut().zip(&s.x) {
            *gj += coef * xj;
        }
        g[d] += coef;
    }
    let n = data.len() as f64;
    for (j, gj) in g.iter_mut().enumerate() {
        *gj /= n;
        if j < d {
            *gj += l2 * f.w[j];
        }
    }
    Ok(g)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_dims(data: &[LabeledSample], dim: usize) -> Result<()> {
    match data.iter().find(|s| s.dim() != dim) {
        Some(s) => Err(Error::DimensionMismatch {
            expected: dim,
            got: s.dim(),
        }),
        None => Ok(()),
    }
}

/// Fits a logistic-regression classifier by regularized ERM.
pub fn train_erm(
    data: &[LabeledSample],
    cfg: &TrainConfig,
    init: Option<&LinearClassifier>,
) -> Result<LinearClassifier> {
    train_erm_with_report(data, cfg, init).map(|r| r.classifier)
}

/// [`train_erm`] that also reports the iteration count and objective trace.
pub fn train_erm_with_report(
    data: &[LabeledSample],
    cfg: &TrainConfig,
    init: Option<&LinearClassifier>,
) -> Result<TrainReport> {
    let first = data.first().ok_or(Error::EmptyDataset)?;
    let dim = first.dim();
    check_dims(data, dim)?;
    let start = match init {
        Some(f) if cfg.warm_start => {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: f.dim(),
                });
            }
            f.clone()
        }
        _ => LinearClassifier::zeros(dim),
    };
    match cfg.solver {
        Solver::GradientDescent => gradient_descent(data, cfg, start),
        Solver::Newton => newton(data, cfg, start),
    }
}

fn divergence(objective: f64) -> Error {
    Error::Divergence(format!(
        "objective became {objective}; the learning rate is likely too large"
    ))
}

fn gradient_descent(
    data: &[LabeledSample],
    cfg: &TrainConfig,
    mut f: LinearClassifier,
) -> Result<TrainReport> {
    let mut trace = vec![logistic_objective(&f, data, cfg.l2)?];
    let mut g = logistic_gradient(&f, data, cfg.l2)?;
    let mut iterations = 0;
    while iterations < cfg.max_epochs && norm(&g) > cfg.tolerance {
        let mut p = f.params();
        for (pj, gj) in p.iter_mut().zip(&g) {
            *pj -= cfg.learning_rate * gj;
        }
        f = LinearClassifier::from_params(&p);
        let obj = logistic_objective(&f, data, cfg.l2)?;
        if !obj.is_finite() || !f.is_finite() {
            return Err(divergence(obj));
        }
        trace.push(obj);
        g = logistic_gradient(&f, data, cfg.l2)?;
        iterations += 1;
    }
    Ok(TrainReport {
        classifier: f,
        iterations,
        grad_norm: norm(&g),
        objective_trace: trace,
    })
}

/// Gradient and Hessian of `J` in one pass.
fn gradient_and_hessian(
    f: &LinearClassifier,
    data: &[LabeledSample],
    l2: f64,
) -> (Vec<f64>, DMatrix<f64>) {
    let d = f.dim();
    let k = d + 1;
    let mut g = vec![0.0; k];
    let mut h = DMatrix::<f64>::zeros(k, k);
    let mut xt = vec![1.0; k];
    for s in data {
        xt[..d].copy_from_slice(&s.x);
        let sy = sign(s.y);
        let p = sigmoid(-sy * f.margin(&s.x));
        let coef = -sy * p;
        let curv = p * (1.0 - p);
        for i in 0..k {
            g[i] += coef * xt[i];
            for j in 0..=i {
                h[(i, j)] += curv * xt[i] * xt[j];
            }
        }
    }
    let n = data.len() as f64;
    for i in 0..k {
        g[i] /= n;
        if i < d {
            g[i] += l2 * f.w[i];
        }
        for j in 0..=i {
            let v = h[(i, j)] / n + if i == j && i < d { l2 } else { 0.0 };
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    (g, h)
}

fn newton_direction(g: &[f64], mut h: DMatrix<f64>) -> Vec<f64> {
    let rhs = DVector::from_column_slice(g);
    let mut jitter = 1e-12;
    loop {
        if let Some(chol) = h.clone().cholesky() {
            return chol.solve(&rhs).iter().copied().collect();
        }
        if jitter > 1.0 {
            // Hessian hopelessly singular; fall back to the gradient.
            return g.to_vec();
        }
        for i in 0..h.nrows() {
            h[(i, i)] += jitter;
        }
        jitter *= 100.0;
    }
}

fn newton(
    data: &[LabeledSample],
    cfg: &TrainConfig,
    mut f: LinearClassifier,
) -> Result<TrainReport> {
    const ARMIJO: f64 = 1e-4;
    const MAX_HALVINGS: usize = 60;

    let mut obj = logistic_objective(&f, data, cfg.l2)?;
    if !obj.is_finite() {
        return Err(divergence(obj));
    }
    let mut trace = vec![obj];
    let (mut g, mut h) = gradient_and_hessian(&f, data, cfg.l2);
    let mut iterations = 0;
    while iterations < cfg.max_epochs && norm(&g) > cfg.tolerance {
        let dir = newton_direction(&g, h);
        let slope: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let base = f.params();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let p: Vec<f64> = base.iter().zip(&dir).map(|(b, d)| b - step * d).collect();
            let cand = LinearClassifier::from_params(&p);
            let cand_obj = logistic_objective(&cand, data, cfg.l2)?;
            if cand_obj.is_finite() && cand_obj <= obj - ARMIJO * step * slope {
                accepted = Some((cand, cand_obj));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, cand_obj)) = accepted else {
            // No representable decrease left: we are at the optimum to machine precision.
            break;
        };
        f = cand;
        obj = cand_obj;
        trace.push(obj);
        (g, h) = gradient_and_hessian(&f, data, cfg.l2);
        iterations += 1;
    }
    Ok(TrainReport {
        classifier: f,
        iterations,
        grad_norm: norm(&g),
        objective_trace: trace,
    })
}

/// Applies one logistic-loss gradient step per minibatch, in order.
///
/// The step uses the unregularized mean logistic loss of the batch.
pub fn sgd_steps<B: AsRef<[LabeledSample]>>(
    f: &LinearClassifier,
    minibatches: &[B],
    rate: f64,
) -> Result<LinearClassifier> {
    let mut current = f.clone();
    for batch in minibatches {
        let batch = batch.as_ref();
        check_dims(batch, current.dim())?;
        let g = logistic_gradient(&current, batch, 0.0)?;
        let p: Vec<f64> = current
            .params()
            .iter()
            .zip(&g)
            .map(|(p, g)| p - rate * g)
            .collect();
        current = LinearClassifier::from_params(&p);
        if !current.is_finite() {
            return Err(Error::Divergence(
                "SGD update produced non-finite parameters".into(),
            ));
        }
    }
    Ok(current)
}
