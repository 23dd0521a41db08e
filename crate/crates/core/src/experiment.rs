//! Seeded multi-trial experiments and their CSV outputs.
//!
//! Configuration is a flat set of dotted keys. A TOML file supplies them as
//! tables (`[scheme] kind = "aopt"` is `scheme.kind`), and every key can be
//! overridden on the command line as `--key=value` or `--key value`.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `oracle` | `instance1` | preset name or `csv:<path>` |
//! | `oracle.r`, `oracle.r_prime` | 1.0, 1.5 | radii of the lower-bound presets |
//! | `oracle.test_csv` | none | held-out pool for a CSV oracle |
//! | `scheme.kind` | `aopt` | `aopt`, `heuristic`, `egreedy`, `empirical`, `uniform` |
//! | `scheme.C` | 0 | AOpt constant; 0 drops the third UCB term |
//! | `scheme.ucb_multiplier` | 2 | factor in front of `C` |
//! | `scheme.zeta` | none | exploration exponent in (0.5, 1) |
//! | `scheme.epsilon` | 0.1 | ε-greedy exploration probability |
//! | `scheme.base` | uniform | ε-greedy base mixture, comma separated |
//! | `scheme.n0`, `scheme.k0`, `scheme.b0` | 10, 4, 50 | batch parameters |
//! | `scheme.pi0` | uniform | initial-phase mixture, comma separated |
//! | `scheme.batched` | false | run any scheme with the batched driver |
//! | `scheme.loss` | `zero_one` | selection loss, `zero_one` or `logistic` |
//! | `scheme.c0` | | alias of `bound.c0` |
//! | `bound.kind` | `heuristic` | `heuristic` or `vc` |
//! | `bound.c0` | 0.1 | |
//! | `bound.d_vc`, `bound.delta` | 3, 0.05 | |
//! | `train.rate`, `train.epochs`, `train.tol`, `train.lambda` | 0.1, 500, 1e-6, 1e-4 | |
//! | `train.warm_start` | true | |
//! | `train.solver` | `newton` | `newton` or `gd` |
//! | `budget` | 2000 | total oracle draws per trial |
//! | `trials`, `seed`, `jobs` | 1, 0, 0 | `jobs = 0` uses every core |
//! | `out` | `out` | output directory |
//! | `eval` | false | run the grid sweep and report excess risk |
//! | `eval.enabled` | | alias of `eval` for use inside an `[eval]` table |
//! | `eval.resolution`, `eval.samples` | 1001, 20000 | sweep grid and sample size |
//! | `stride` | 10 | log every k-th round |

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::bounds::BoundSchedule;
use crate::classifier::{LossKind, Solver, TrainConfig};
use crate::error::{Error, Result};
use crate::eval::{excess_risk, format_float, grid_optimal_mixture, GridSweepResult};
use crate::oracle::{FinitePoolSpec, Oracle};
use crate::rng::{refit_rng, trial_rng};
use crate::schemes::{
    run_batched, run_exact, run_heuristic, BatchParams, RunRecord, SchemeConfig, SchemeKind,
};
use crate::types::Mixture;

/// Raw dotted-key configuration.
pub type ConfigMap = BTreeMap<String, String>;

const KNOWN_KEYS: &[&str] = &[
    "oracle",
    "oracle.r",
    "oracle.r_prime",
    "oracle.test_csv",
    "scheme.kind",
    "scheme.C",
    "scheme.ucb_multiplier",
    "scheme.zeta",
    "scheme.epsilon",
    "scheme.base",
    "scheme.c0",
    "scheme.n0",
    "scheme.k0",
    "scheme.b0",
    "scheme.pi0",
    "scheme.batched",
    "scheme.loss",
    "bound.kind",
    "bound.c0",
    "bound.d_vc",
    "bound.delta",
    "train.rate",
    "train.epochs",
    "train.tol",
    "train.lambda",
    "train.warm_start",
    "train.solver",
    "budget",
    "trials",
    "seed",
    "jobs",
    "out",
    "eval",
    "eval.enabled",
    "eval.resolution",
    "eval.samples",
    "stride",
    "compare",
];

/// Where the per-attribute samples come from.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleSource {
    Preset {
        name: String,
        r: f64,
        r_prime: f64,
    },
    Csv {
        path: PathBuf,
        test: Option<PathBuf>,
    },
}

impl OracleSource {
    pub fn load(&self) -> Result<Oracle> {
        match self {
            OracleSource::Preset { name, r, r_prime } => Oracle::preset(name, *r, *r_prime),
            OracleSource::Csv { path, test } => {
                let mut pool = FinitePoolSpec::from_csv_path(path)?;
                if let Some(test) = test {
                    let held_out = FinitePoolSpec::from_csv_path(test)?;
                    let pools = (0..held_out.m())
                        .map(|z| held_out.pool(crate::types::AttributeId(z)).to_vec())
                        .collect();
                    pool = pool.with_test(pools)?;
                }
                Ok(Oracle::Pool(pool))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub oracle: OracleSource,
    pub scheme: SchemeConfig,
    /// Runs a non-heuristic scheme through the batched driver.
    pub batched: Option<BatchParams>,
    pub train: TrainConfig,
    pub budget: usize,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads for trials and the sweep; 0 uses every core.
    pub jobs: usize,
    pub out: PathBuf,
    pub eval: bool,
    pub eval_resolution: usize,
    pub eval_samples: usize,
    pub stride: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            oracle: OracleSource::Preset {
                name: "instance1".into(),
                r: 1.0,
                r_prime: 1.5,
            },
            scheme: SchemeConfig::aopt(0.0),
            batched: None,
            train: TrainConfig::default(),
            budget: 2000,
            trials: 1,
            seed: 0,
            jobs: 0,
            out: PathBuf::from("out"),
            eval: false,
            eval_resolution: 1001,
            eval_samples: 20_000,
            stride: 10,
        }
    }
}

fn parse<T: std::str::FromStr>(map: &ConfigMap, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::config(key, format!("cannot parse `{raw}`"))),
    }
}

fn parse_or<T: std::str::FromStr>(map: &ConfigMap, key: &str, default: T) -> Result<T> {
    Ok(parse(map, key)?.unwrap_or(default))
}

fn parse_bool(map: &ConfigMap, key: &str, default: bool) -> Result<bool> {
    match map.get(key).map(|s| s.trim()) {
        None => Ok(default),
        Some("" | "true" | "1" | "yes") => Ok(true),
        Some("false" | "0" | "no") => Ok(false),
        Some(raw) => Err(Error::config(
            key,
            format!("expected a boolean, got `{raw}`"),
        )),
    }
}

fn parse_mixture(map: &ConfigMap, key: &str) -> Result<Option<Mixture>> {
    let Some(raw) = map.get(key) else {
        return Ok(None);
    };
    let weights = raw
        .split(',')
        .map(|w| w.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| {
            Error::config(
                key,
                format!("expected comma-separated weights, got `{raw}`"),
            )
        })?;
    Mixture::new(weights)
        .map(Some)
        .map_err(|e| Error::config(key, e.to_string()))
}

impl ExperimentConfig {
    /// Builds a configuration from dotted keys; unknown keys are rejected.
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        if let Some(key) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(Error::config(key.clone(), "unknown key"));
        }
        let d = Self::default();

        let r = parse_or(map, "oracle.r", 1.0)?;
        let r_prime = parse_or(map, "oracle.r_prime", 1.5)?;
        let oracle_name = map.get("oracle").map(String::as_str).unwrap_or("instance1");
        let test = map.get("oracle.test_csv").map(PathBuf::from);
        let oracle = match oracle_name.strip_prefix("csv:") {
            Some(path) => OracleSource::Csv {
                path: PathBuf::from(path),
                test,
            },
            None => {
                if test.is_some() {
                    return Err(Error::config(
                        "oracle.test_csv",
                        "only valid with a csv oracle",
                    ));
                }
                OracleSource::Preset {
                    name: oracle_name.to_string(),
                    r,
                    r_prime,
                }
            }
        };

        let c0_bound: Option<f64> = parse(map, "bound.c0")?;
        let c0_alias: Option<f64> = parse(map, "scheme.c0")?;
        let c0 = match (c0_bound, c0_alias) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::config("scheme.c0", "conflicts with bound.c0"));
            }
            (a, b) => a.or(b).unwrap_or(0.1),
        };
        let bound = match map
            .get("bound.kind")
            .map(String::as_str)
            .unwrap_or("heuristic")
        {
            "heuristic" => BoundSchedule::HeuristicInverseSqrt { c0 },
            "vc" => BoundSchedule::Vc {
                d_vc: parse_or(map, "bound.d_vc", 3.0)?,
                delta: parse_or(map, "bound.delta", 0.05)?,
            },
            other => {
                return Err(Error::config(
                    "bound.kind",
                    format!("unknown bound `{other}`"),
                ))
            }
        };

        let batch = BatchParams {
            n0: parse_or(map, "scheme.n0", 10)?,
            k0: parse_or(map, "scheme.k0", 4)?,
            b0: parse_or(map, "scheme.b0", 50)?,
            pi0: parse_mixture(map, "scheme.pi0")?,
        };
        let kind_name = map.get("scheme.kind").map(String::as_str).unwrap_or("aopt");
        let kind = match kind_name {
            "aopt" => SchemeKind::AOpt {
                c: parse_or(map, "scheme.C", 0.0)?,
                ucb_multiplier: parse_or(map, "scheme.ucb_multiplier", 2.0)?,
                zeta: parse(map, "scheme.zeta")?,
            },
            "heuristic" => SchemeKind::Heuristic {
                batch: batch.clone(),
            },
            "egreedy" | "epsilon_greedy" => SchemeKind::EpsilonGreedy {
                epsilon: parse_or(map, "scheme.epsilon", 0.1)?,
                base: parse_mixture(map, "scheme.base")?,
            },
            "empirical" => SchemeKind::Empirical,
            "uniform" => SchemeKind::Uniform,
            other => {
                return Err(Error::config(
                    "scheme.kind",
                    format!("unknown scheme `{other}`"),
                ));
            }
        };
        let selection_loss = match map
            .get("scheme.loss")
            .map(String::as_str)
            .unwrap_or("zero_one")
        {
            "zero_one" => LossKind::ZeroOne,
            "logistic" => LossKind::Logistic,
            other => {
                return Err(Error::config(
                    "scheme.loss",
                    format!("unknown loss `{other}`"),
                ))
            }
        };
        let scheme = SchemeConfig {
            kind,
            bound,
            selection_loss,
        };
        let batched = parse_bool(map, "scheme.batched", false)?.then_some(batch);

        let train = TrainConfig {
            learning_rate: parse_or(map, "train.rate", d.train.learning_rate)?,
            max_epochs: parse_or(map, "train.epochs", d.train.max_epochs)?,
            tolerance: parse_or(map, "train.tol", d.train.tolerance)?,
            l2: parse_or(map, "train.lambda", d.train.l2)?,
            warm_start: parse_bool(map, "train.warm_start", d.train.warm_start)?,
            solver: match map
                .get("train.solver")
                .map(String::as_str)
                .unwrap_or("newton")
            {
                "newton" => Solver::Newton,
                "gd" | "gradient_descent" => Solver::GradientDescent,
                other => {
                    return Err(Error::config(
                        "train.solver",
                        format!("unknown solver `{other}`"),
                    ));
                }
            },
        };

        let cfg = Self {
            oracle,
            scheme,
            batched,
            train,
            budget: parse_or(map, "budget", d.budget)?,
            trials: parse_or(map, "trials", d.trials)?,
            seed: parse_or(map, "seed", d.seed)?,
            jobs: parse_or(map, "jobs", d.jobs)?,
            out: map.get("out").map(PathBuf::from).unwrap_or(d.out),
            eval: parse_bool(map, "eval", parse_bool(map, "eval.enabled", d.eval)?)?,
            eval_resolution: parse_or(map, "eval.resolution", d.eval_resolution)?,
            eval_samples: parse_or(map, "eval.samples", d.eval_samples)?,
            stride: parse_or(map, "stride", d.stride)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that do not need the oracle.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.budget == 0 || !self.budget.is_multiple_of(2) {
            return Err(Error::config("budget", "must be a positive even number"));
        }
        if self.stride == 0 {
            return Err(Error::config("stride", "must be at least 1"));
        }
        self.train.validate()?;
        self.scheme.bound.validate()
    }

    /// Parses a TOML file and command-line flags into a key map.
    ///
    /// `--config <path>` is read first; later flags override its keys.
    /// `--scheme` is shorthand for `--scheme.kind`, and a bare `--eval` means
    /// `--eval=true`.
    pub fn parse_args<I, S>(args: I) -> Result<ConfigMap>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let args: Vec<String> = args.into_iter().map(Into::into).collect();
        let mut flags: Vec<(String, String)> = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let Some(body) = arg.strip_prefix("--") else {
                return Err(Error::config(arg.clone(), "expected a --key=value flag"));
            };
            let (key, value) = match body.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let next = args.get(i + 1).filter(|n| !n.starts_with("--"));
                    match next {
                        Some(v) => {
                            i += 1;
                            (body.to_string(), v.clone())
                        }
                        None => (body.to_string(), String::new()),
                    }
                }
            };
            let key = if key == "scheme" {
                "scheme.kind".into()
            } else {
                key
            };
            flags.push((key, value));
            i += 1;
        }
        let mut map = ConfigMap::new();
        if let Some((_, path)) = flags.iter().find(|(k, _)| k == "config") {
            map = Self::load_toml(Path::new(path))?;
        }
        for (k, v) in flags {
            if k != "config" {
                map.insert(k, v);
            }
        }
        Ok(map)
    }

    pub fn load_toml(path: &Path) -> Result<ConfigMap> {
        let text = fs::read_to_string(path)?;
        Self::parse_toml(&text)
    }

    pub fn parse_toml(text: &str) -> Result<ConfigMap> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("config", e.message().to_string()))?;
        let mut map = ConfigMap::new();
        flatten("", &table, &mut map)?;
        Ok(map)
    }

    /// Short description used in comparison tables.
    pub fn label(&self) -> String {
        match (&self.scheme.kind, &self.batched) {
            (SchemeKind::Heuristic { .. }, _) | (_, None) => self.scheme.label(),
            (_, Some(_)) => format!("{}+batched", self.scheme.label()),
        }
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut ConfigMap) -> Result<()> {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        let value = match v {
            toml::Value::Table(t) => {
                flatten(&key, t, out)?;
                continue;
            }
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            toml::Value::Array(items) => items
                .iter()
                .map(|i| match i {
                    toml::Value::Integer(i) => Ok(i.to_string()),
                    toml::Value::Float(f) => Ok(f.to_string()),
                    _ => Err(Error::config(key.clone(), "arrays must hold numbers")),
                })
                .collect::<Result<Vec<_>>>()?
                .join(","),
            toml::Value::Datetime(_) => {
                return Err(Error::config(key, "dates are not supported"));
            }
        };
        out.insert(key, value);
    }
    Ok(())
}

/// Final quantities of one completed trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub record: RunRecord,
    /// `1 - max_z L(z, f)` of the returned classifier.
    pub min_acc: f64,
    pub excess_risk: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub index: usize,
    /// Failure message on error.
    pub result: std::result::Result<TrialResult, String>,
}

/// All trials of one configuration.
#[derive(Debug, Clone)]
pub struct TrialSet {
    pub label: String,
    pub oracle: Oracle,
    pub budget: usize,
    pub sweep: Option<GridSweepResult>,
    pub outcomes: Vec<TrialOutcome>,
}

/// Mean and sample standard deviation; the deviation is 0 for one value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl TrialSet {
    pub fn completed(&self) -> impl Iterator<Item = &TrialResult> {
        self.outcomes.iter().filter_map(|o| o.result.as_ref().ok())
    }

    pub fn failures(&self) -> usize {
        self.outcomes.iter().filter(|o| o.result.is_err()).count()
    }

    /// Final `π_n(z)` of every completed trial.
    pub fn final_weights(&self, z: usize) -> Vec<f64> {
        self.completed()
            .map(|r| r.record.final_mixture.weights()[z])
            .collect()
    }

    pub fn min_accuracies(&self) -> Vec<f64> {
        self.completed().map(|r| r.min_acc).collect()
    }

    pub fn excess_risks(&self) -> Vec<f64> {
        self.completed().filter_map(|r| r.excess_risk).collect()
    }

    /// Writes `trial,t,z,pi_*,loss_*,n_*`, keeping every `stride`-th round and the last.
    pub fn write_trajectories<W: Write>(&self, writer: W, stride: usize) -> Result<()> {
        let m = self.oracle.m();
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["trial".to_string(), "t".into(), "z".into()];
        header.extend((0..m).map(|z| format!("pi_{z}")));
        header.extend((0..m).map(|z| format!("loss_{z}")));
        header.extend((0..m).map(|z| format!("n_{z}")));
        out.write_record(&header)?;
        for o in &self.outcomes {
            let Ok(res) = &o.result else { continue };
            let rows = &res.record.rows;
            for (i, row) in rows.iter().enumerate() {
                if (i + 1) % stride != 0 && i + 1 != rows.len() {
                    continue;
                }
                let mut rec = vec![o.index.to_string(), row.t.to_string(), row.z.0.to_string()];
                rec.extend(row.pi.iter().map(|&p| format_float(p)));
                rec.extend(row.losses.iter().map(|&l| format_float(l)));
                rec.extend(row.counts.iter().map(|c| c.to_string()));
                out.write_record(&rec)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `trial,pi_*,min_acc,excess_risk,status` with `mean` and `std` rows.
    pub fn write_summary<W: Write>(&self, writer: W) -> Result<()> {
        let m = self.oracle.m();
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec!["trial".to_string()];
        header.extend((0..m).map(|z| format!("pi_{z}")));
        header.extend(["min_acc".into(), "excess_risk".into(), "status".into()]);
        out.write_record(&header)?;
        let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
        for o in &self.outcomes {
            let mut rec = vec![o.index.to_string()];
            match &o.result {
                Ok(r) => {
                    rec.extend(
                        r.record
                            .final_mixture
                            .weights()
                            .iter()
                            .map(|&w| format_float(w)),
                    );
                    rec.push(format_float(r.min_acc));
                    rec.push(opt(r.excess_risk));
                    rec.push("ok".into());
                }
                Err(msg) => {
                    rec.extend(std::iter::repeat_n(String::new(), m + 2));
                    rec.push(format!("failed: {msg}"));
                }
            }
            out.write_record(&rec)?;
        }
        let stats: Vec<(f64, f64)> = (0..m)
            .map(|z| mean_std(&self.final_weights(z)))
            .chain([mean_std(&self.min_accuracies())])
            .collect();
        let risks = self.excess_risks();
        let risk = (!risks.is_empty()).then(|| mean_std(&risks));
        for (label, pick) in [("mean", 0usize), ("std", 1)] {
            let get = |s: (f64, f64)| if pick == 0 { s.0 } else { s.1 };
            let mut rec = vec![label.to_string()];
            rec.extend(stats.iter().map(|&s| format_float(get(s))));
            rec.push(opt(risk.map(get)));
            rec.push(format!(
                "{} ok, {} failed",
                self.outcomes.len() - self.failures(),
                self.failures()
            ));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn run_one(cfg: &ExperimentConfig, oracle: &Oracle, index: usize) -> Result<RunRecord> {
    let mut rng = trial_rng(cfg.seed, index);
    match (&cfg.scheme.kind, &cfg.batched) {
        (SchemeKind::Heuristic { .. }, _) => {
            run_heuristic(&cfg.scheme, oracle, cfg.budget, &cfg.train, &mut rng)
        }
        (_, Some(batch)) => {
            run_batched(&cfg.scheme, batch, oracle, cfg.budget, &cfg.train, &mut rng)
        }
        (_, None) => run_exact(&cfg.scheme, oracle, cfg.budget, &cfg.train, &mut rng),
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    oracle: &Oracle,
    sweep: Option<&GridSweepResult>,
    index: usize,
) -> Result<TrialResult> {
    let record = run_one(cfg, oracle, index)?;
    let min_acc = oracle.min_accuracy(&record.classifier)?;
    let excess_risk = match sweep {
        Some(s) => Some(excess_risk(
            &record.final_mixture,
            oracle,
            s,
            cfg.eval_samples,
            &cfg.train,
            &mut refit_rng(cfg.seed, index),
        )?),
        None => None,
    };
    log::debug!(
        "trial {index}: π = {:?}, min acc = {min_acc:.4}",
        record.final_mixture.weights()
    );
    Ok(TrialResult {
        record,
        min_acc,
        excess_risk,
    })
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?;
    Ok(pool.install(f))
}

/// Runs all trials of `cfg` against a loaded oracle.
///
/// Excess risk is reported when `sweep` is given. Trial `i` draws from its own
/// stream of `cfg.seed`, so results do not depend on `cfg.jobs`.
pub fn run_trials_with(
    cfg: &ExperimentConfig,
    oracle: &Oracle,
    sweep: Option<&GridSweepResult>,
) -> Result<TrialSet> {
    cfg.validate()?;
    cfg.scheme.validate(oracle.m())?;
    let outcomes = with_jobs(cfg.jobs, || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|index| TrialOutcome {
                index,
                result: run_trial(cfg, oracle, sweep, index).map_err(|e| e.to_string()),
            })
            .collect::<Vec<_>>()
    })?;
    for o in &outcomes {
        if let Err(msg) = &o.result {
            log::warn!("trial {} failed: {msg}", o.index);
        }
    }
    Ok(TrialSet {
        label: cfg.label(),
        oracle: oracle.clone(),
        budget: cfg.budget,
        sweep: sweep.cloned(),
        outcomes,
    })
}

/// Loads the oracle, runs the sweep when `cfg.eval` is set, then all trials.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<TrialSet> {
    cfg.validate()?;
    let oracle = cfg.oracle.load()?;
    let sweep = if cfg.eval {
        Some(with_jobs(cfg.jobs, || {
            grid_optimal_mixture(
                &oracle,
                cfg.eval_resolution,
                cfg.eval_samples,
                &cfg.train,
                cfg.seed,
            )
        })??)
    } else {
        None
    };
    run_trials_with(cfg, &oracle, sweep.as_ref())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Runs the experiment and writes `trajectories.csv`, `summary.csv` and, with
/// evaluation enabled, `sweep.csv` into `cfg.out`.
///
/// Fails when every trial failed; the files are written first either way.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TrialSet> {
    let set = run_trials(cfg)?;
    fs::create_dir_all(&cfg.out)?;
    set.write_trajectories(create(&cfg.out, "trajectories.csv")?, cfg.stride)?;
    set.write_summary(create(&cfg.out, "summary.csv")?)?;
    if let Some(sweep) = &set.sweep {
        sweep.to_csv(create(&cfg.out, "sweep.csv")?)?;
    }
    if set.failures() == cfg.trials {
        return Err(Error::Divergence(format!(
            "all {} trials failed",
            cfg.trials
        )));
    }
    Ok(set)
}

/// One row of a scheme comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub completed: usize,
    pub failed: usize,
    pub min_acc_mean: f64,
    pub min_acc_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    /// Writes `scheme,completed,failed,min_acc_mean,min_acc_std`.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record([
            "scheme",
            "completed",
            "failed",
            "min_acc_mean",
            "min_acc_std",
        ])?;
        for r in &self.rows {
            out.write_record([
                r.label.clone(),
                r.completed.to_string(),
                r.failed.to_string(),
                format_float(r.min_acc_mean),
                format_float(r.min_acc_std),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

/// Mean and std of the final minimum accuracy, one row per configuration.
///
/// All configurations must describe the same oracle and budget. A scheme with
/// no completed trial yields a row with NaN statistics.
pub fn compare_schemes(cfgs: &[ExperimentConfig]) -> Result<Comparison> {
    let first = cfgs
        .first()
        .ok_or_else(|| Error::invalid("nothing to compare"))?;
    let oracle = first.oracle.load()?;
    for cfg in &cfgs[1..] {
        if cfg.oracle != first.oracle && cfg.oracle.load()? != oracle {
            return Err(Error::OracleMismatch(format!(
                "`{}` uses a different oracle than `{}`",
                cfg.label(),
                first.label()
            )));
        }
        if cfg.budget != first.budget {
            return Err(Error::config(
                "budget",
                "compared schemes must share the budget",
            ));
        }
    }
    let mut rows = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        let set = run_trials_with(cfg, &oracle, None)?;
        let (mean, std) = mean_std(&set.min_accuracies());
        rows.push(ComparisonRow {
            label: set.label.clone(),
            completed: set.outcomes.len() - set.failures(),
            failed: set.failures(),
            min_acc_mean: mean,
            min_acc_std: std,
        });
    }
    Ok(Comparison { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> ConfigMap {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn defaults() {
        let cfg = ExperimentConfig::from_map(&ConfigMap::new()).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn errors_name_the_key() {
        for (pairs, key) in [
            (vec![("budget", "7")], "budget"),
            (vec![("trials", "0")], "trials"),
            (vec![("stride", "0")], "stride"),
            (vec![("scheme.kind", "magic")], "scheme.kind"),
            (vec![("train.rate", "-1")], "train.rate"),
            (vec![("bound.c0", "x")], "bound.c0"),
            (vec![("nonsense", "1")], "nonsense"),
            (vec![("bound.c0", "0.1"), ("scheme.c0", "1")], "scheme.c0"),
        ] {
            match ExperimentConfig::from_map(&map(&pairs)) {
                Err(Error::Config { key: k, .. }) => assert_eq!(k, key),
                other => panic!("{pairs:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn flags_override_toml() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        fs::write(
            &path,
            "budget = 400\ntrials = 3\n[eval]\nenabled = false\nresolution = 11\n[scheme]\nkind = \"egreedy\"\nepsilon = 0.5\nbase = [0.25, 0.75]\n",
        )
        .unwrap();
        let args = [
            "--config".to_string(),
            path.display().to_string(),
            "--trials=5".into(),
            "--eval".into(),
            "--scheme.epsilon".into(),
            "0.2".into(),
        ];
        let cfg = ExperimentConfig::from_map(&ExperimentConfig::parse_args(args).unwrap()).unwrap();
        assert_eq!(cfg.budget, 400);
        assert_eq!(cfg.trials, 5);
        assert!(cfg.eval);
        assert_eq!(cfg.eval_resolution, 11);
        assert_eq!(
            cfg.scheme.kind,
            SchemeKind::EpsilonGreedy {
                epsilon: 0.2,
                base: Some(Mixture::new(vec![0.25, 0.75]).unwrap())
            }
        );
    }

    #[test]
    fn mean_std_values() {
        assert_eq!(mean_std(&[1.0]), (1.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(mean_std(&[]).0.is_nan());
    }
}
