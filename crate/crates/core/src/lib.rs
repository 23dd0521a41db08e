//! Adaptive construction of training sets for minimax-fair classification.
//!
//! A learner with a sampling budget queries per-attribute oracles and decides,
//! round by round, which protected attribute to sample next so that the
//! worst-group loss of the final classifier is as small as possible.

pub mod bounds;
pub mod classifier;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod oracle;
pub mod rng;
pub mod schemes;
pub mod types;

pub use bounds::BoundSchedule;
pub use classifier::{LinearClassifier, LossKind, Solver, TrainConfig};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, TrialSet};
pub use oracle::{FinitePoolSpec, GaussianModelSpec, Oracle};
pub use schemes::{BatchParams, RunRecord, SchemeConfig, SchemeKind};
pub use types::{AttributeId, DatasetPair, LabeledSample, Mixture, RunState};
