//! Domain types shared by the oracle, the sampling schemes and the evaluation layer.

use std::fmt;

use crate::classifier::{empirical_loss, LinearClassifier, LossKind};
use crate::error::{Error, Result};

/// Absolute tolerance on the sum of mixture weights.
pub const MIXTURE_TOLERANCE: f64 = 1e-9;

/// Index of a protected attribute, `0 <= index < m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeId(pub usize);

impl AttributeId {
    pub fn index(self) -> usize {
        self.0
    }

    /// Checks the index against the number of attributes `m`.
    pub fn checked(index: usize, m: usize) -> Result<Self> {
        if index < m {
            Ok(AttributeId(index))
        } else {
            Err(Error::UnknownAttribute { index, m })
        }
    }
}

impl fmt::Display for AttributeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One feature-label pair drawn from `P_z`, tagged with its attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub x: Vec<f64>,
    /// Binary label, 0 or 1.
    pub y: u8,
    pub z: AttributeId,
}

impl LabeledSample {
    pub fn new(x: Vec<f64>, y: u8, z: AttributeId) -> Result<Self> {
        if y > 1 {
            return Err(Error::invalid(format!("label must be 0 or 1, got {y}")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
        Ok(Self { x, y, z })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// A point on the probability simplex over the protected attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    weights: Vec<f64>,
}

impl Mixture {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidMixture(format!(
                "need at least 2 attributes, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMixture(format!("weight {w} outside [0, 1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MIXTURE_TOLERANCE {
            return Err(Error::InvalidMixture(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, z: AttributeId) -> f64 {
        self.weights[z.0]
    }

    pub fn m(&self) -> usize {
        self.weights.len()
    }

    /// Smallest weight (`π_min` when applied to the optimal mixture).
    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Splits `total` items across attributes proportionally to the weights.
    ///
    /// Largest-remainder apportionment: the result sums to `total` exactly and
    /// each entry is within one of `weight * total`. Remainder ties go to the
    /// smaller index.
    pub fn apportion(&self, total: usize) -> Vec<usize> {
        let exact: Vec<f64> = self.weights.iter().map(|w| w * total as f64).collect();
        let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - exact[a].floor();
            let rb = exact[b] - exact[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().take(total.saturating_sub(assigned)) {
            counts[i] += 1;
        }
        counts
    }
}

/// Empirical mixture `counts[z] / Σ counts`.
pub fn empirical_mixture(counts: &[usize]) -> Result<Mixture> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyHistory);
    }
    let weights = counts
        .iter()
        .map(|&c| c as f64 / total as f64)
        .collect::<Vec<_>>();
    Mixture::new(weights)
}

/// Training set `D_t` plus one validation set `D_z` per attribute.
///
/// Every query routes one sample to the training set and an independent one
/// to the validation set of the same attribute, so `counts[z]` is both the
/// number of training samples from `z` and `|D_z|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPair {
    train: Vec<LabeledSample>,
    validation: Vec<Vec<LabeledSample>>,
    counts: Vec<usize>,
    dim: usize,
}

impl DatasetPair {
    pub fn new(m: usize, dim: usize) -> Self {
        Self {
            train: Vec::new(),
            validation: vec![Vec::new(); m],
            counts: vec![0; m],
            dim,
        }
    }

    pub fn m(&self) -> usize {
        self.counts.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn train(&self) -> &[LabeledSample] {
        &self.train
    }

    pub fn validation(&self, z: AttributeId) -> &[LabeledSample] {
        &self.validation[z.0]
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.train.len()
    }

    fn check(&self, s: &LabeledSample) -> Result<()> {
        if s.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: s.dim(),
            });
        }
        AttributeId::checked(s.z.0, self.m()).map(|_| ())
    }

    /// Adds one training and one validation sample of the same attribute.
    pub fn push_pair(&mut self, train: LabeledSample, validation: LabeledSample) -> Result<()> {
        self.push_batches(vec![train], vec![validation])
    }

    /// Adds equally sized training and validation batches of a single attribute.
    pub fn push_batches(
        &mut self,
        train: Vec<LabeledSample>,
        validation: Vec<LabeledSample>,
    ) -> Result<()> {
        if train.len() != validation.len() {
            return Err(Error::invalid(format!(
                "train batch has {} samples but validation batch has {}",
                train.len(),
                validation.len()
            )));
        }
        let Some(first) = train.first() else {
            return Ok(());
        };
        let z = first.z;
        for s in train.iter().chain(validation.iter()) {
            self.check(s)?;
            if s.z != z {
                return Err(Error::invalid("batch mixes attributes"));
            }
        }
        self.counts[z.0] += train.len();
        self.train.extend(train);
        self.validation[z.0].extend(validation);
        Ok(())
    }
}

/// The sampler's full mutable state during one run.
#[derive(Debug, Clone)]
pub struct RunState {
    /// Rounds completed so far.
    pub t: usize,
    pub data: DatasetPair,
    pub classifier: LinearClassifier,
    /// Current deviation values `e_z(N_{z,t})`; infinite while `N_{z,t} = 0`.
    pub bounds: Vec<f64>,
    /// Loss of `classifier` on each validation set `D_z`; NaN while `D_z` is empty.
    pub validation_losses: Vec<f64>,
}

impl RunState {
    pub fn new(m: usize, dim: usize) -> Self {
        Self {
            t: 0,
            data: DatasetPair::new(m, dim),
            classifier: LinearClassifier::zeros(dim),
            bounds: vec![f64::INFINITY; m],
            validation_losses: vec![f64::NAN; m],
        }
    }

    pub fn m(&self) -> usize {
        self.data.m()
    }

    pub fn counts(&self) -> &[usize] {
        self.data.counts()
    }

    /// Empirical mixture `π_t`, derived from the integer counts.
    pub fn pi(&self) -> Result<Mixture> {
        empirical_mixture(self.data.counts())
    }

    /// Recomputes the cached per-attribute validation losses of the current classifier.
    pub fn refresh_validation_losses(&mut self, kind: LossKind) {
        for z in 0..self.m() {
            let set = self.data.validation(AttributeId(z));
            self.validation_losses[z] =
                empirical_loss(&self.classifier, set, kind).unwrap_or(f64::NAN);
        }
    }
}

/// `ρ_t = Σ_z π_t(z) e_z(N_{z,t})`.
pub fn rho(state: &RunState) -> Result<f64> {
    if let Some(z) = state.counts().iter().position(|&c| c == 0) {
        return Err(Error::UninitializedAttribute(z));
    }
    let pi = state.pi()?;
    Ok(pi
        .weights()
        .iter()
        .zip(&state.bounds)
        .map(|(p, e)| p * e)
        .sum())
}
