//! Per-attribute sample sources `P_z`.
//!
//! Two kinds of oracle are supported: the two-dimensional Gaussian class-conditional
//! model (identity covariance, balanced labels), for which the 0-1 loss of a linear
//! classifier has a closed form, and a finite labeled pool per attribute that is
//! sampled uniformly with replacement.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::classifier::{empirical_loss, LinearClassifier, LossKind};
use crate::error::{Error, Result};
use crate::types::{AttributeId, LabeledSample};

/// Standard normal CDF.
///
/// Computed as `0.5 * erfc(-x / sqrt(2))` with the `libm` port of the FreeBSD
/// `erfc`, whose rational approximations are accurate to within about one ulp
/// over the whole real line; the complementary form keeps full relative
/// accuracy in the lower tail where `1 + erf` would cancel.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Two-dimensional Gaussian model: `Y ~ Bernoulli(1/2)`, `X | Y=y, Z=z ~ N(μ_yz, I_2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianModelSpec {
    /// `means[z][y]`.
    means: Vec<[[f64; 2]; 2]>,
}

impl GaussianModelSpec {
    pub fn new(means: Vec<[[f64; 2]; 2]>) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::invalid(
                "the Gaussian model needs at least 2 attributes",
            ));
        }
        if means.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("mean vectors must be finite"));
        }
        Ok(Self { means })
    }

    /// Instance I: attribute u (index 0) is the easier one.
    pub fn instance1() -> Self {
        Self {
            means: vec![[[-2.0, 2.0], [2.0, -2.0]], [[-1.0, -1.0], [1.0, 1.0]]],
        }
    }

    /// Instance II: attribute v (index 1) is the easier one.
    pub fn instance2() -> Self {
        Self {
            means: vec![[[-1.5, 1.5], [1.5, -1.5]], [[-2.0, -2.0], [2.0, 2.0]]],
        }
    }

    /// Lower-bound instance with u-means `±(r, -r)` and v-means `±(r', r')`.
    pub fn lower_q_mu(r: f64, r_prime: f64) -> Result<Self> {
        Self::check_radii(r, r_prime)?;
        Self::new(vec![
            [[-r, r], [r, -r]],
            [[-r_prime, -r_prime], [r_prime, r_prime]],
        ])
    }

    /// Mirror of [`Self::lower_q_mu`] with the radii swapped.
    pub fn lower_q_gamma(r: f64, r_prime: f64) -> Result<Self> {
        Self::check_radii(r, r_prime)?;
        Self::new(vec![
            [[-r_prime, r_prime], [r_prime, -r_prime]],
            [[-r, -r], [r, r]],
        ])
    }

    fn check_radii(r: f64, r_prime: f64) -> Result<()> {
        if !(r > 0.0 && r_prime > r && r_prime.is_finite()) {
            return Err(Error::config(
                "oracle.r_prime",
                format!("need r' > r > 0, got r = {r}, r' = {r_prime}"),
            ));
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.means.len()
    }

    pub fn mean(&self, z: AttributeId, y: u8) -> [f64; 2] {
        self.means[z.0][usize::from(y)]
    }

    pub fn draw<R: Rng + ?Sized>(&self, z: AttributeId, rng: &mut R) -> Result<LabeledSample> {
        let z = AttributeId::checked(z.0, self.m())?;
        let y = u8::from(rng.random_bool(0.5));
        let mu = self.mean(z, y);
        let x = vec![
            mu[0] + rng.sample::<f64, _>(StandardNormal),
            mu[1] + rng.sample::<f64, _>(StandardNormal),
        ];
        Ok(LabeledSample { x, y, z })
    }
}

/// Closed-form 0-1 loss `L(z, f)` of a linear classifier under the Gaussian model.
///
/// `w·X + b` given `Y = y` is `N(w·μ_yz + b, ||w||²)`, so
/// `L = ½ Φ((w·μ_0z + b)/||w||) + ½ Φ(-(w·μ_1z + b)/||w||)`.
pub fn population_loss_linear(
    spec: &GaussianModelSpec,
    f: &LinearClassifier,
    z: AttributeId,
) -> Result<f64> {
    let z = AttributeId::checked(z.0, spec.m())?;
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: f.dim(),
        });
    }
    let norm = (f.w[0] * f.w[0] + f.w[1] * f.w[1]).sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateClassifier);
    }
    let a0 = f.margin(&spec.mean(z, 0)) / norm;
    let a1 = f.margin(&spec.mean(z, 1)) / norm;
    Ok(0.5 * normal_cdf(a0) + 0.5 * normal_cdf(-a1))
}

/// A finite labeled pool per attribute, drawn from uniformly with replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePoolSpec {
    pools: Vec<Vec<LabeledSample>>,
    /// Held-out evaluation pools; evaluation falls back to `pools` when absent.
    test: Option<Vec<Vec<LabeledSample>>>,
    dim: usize,
}

impl FinitePoolSpec {
    pub fn new(pools: Vec<Vec<LabeledSample>>) -> Result<Self> {
        let dim = Self::validate(&pools)?;
        Ok(Self {
            pools,
            test: None,
            dim,
        })
    }

    fn validate(pools: &[Vec<LabeledSample>]) -> Result<usize> {
        if pools.len() < 2 {
            return Err(Error::invalid("a pool oracle needs at least 2 attributes"));
        }
        if let Some(z) = pools.iter().position(|p| p.is_empty()) {
            return Err(Error::invalid(format!("pool for attribute {z} is empty")));
        }
        let dim = pools[0][0].dim();
        for (z, pool) in pools.iter().enumerate() {
            for s in pool {
                if s.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: s.dim(),
                    });
                }
                if s.z.0 != z {
                    return Err(Error::invalid(format!(
                        "sample tagged with attribute {} stored in pool {z}",
                        s.z
                    )));
                }
            }
        }
        Ok(dim)
    }

    /// Attaches held-out pools used for loss evaluation.
    pub fn with_test(mut self, test: Vec<Vec<LabeledSample>>) -> Result<Self> {
        let dim = Self::validate(&test)?;
        if test.len() != self.pools.len() {
            return Err(Error::invalid(format!(
                "test pools cover {} attributes, training pools {}",
                test.len(),
                self.pools.len()
            )));
        }
        if dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: dim,
            });
        }
        self.test = Some(test);
        Ok(self)
    }

    /// Loads pools from CSV with header `x0,..,x{d-1},y,z`.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Self::from_csv_reader(file).map_err(|e| match e {
            Error::InvalidArgument(reason) => Error::PoolFormat {
                path: path.to_path_buf(),
                reason,
            },
            other => other,
        })
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        Self::new(read_pool_csv(reader)?)
    }

    pub fn m(&self) -> usize {
        self.pools.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pool(&self, z: AttributeId) -> &[LabeledSample] {
        &self.pools[z.0]
    }

    pub fn evaluation_pool(&self, z: AttributeId) -> &[LabeledSample] {
        match &self.test {
            Some(t) => &t[z.0],
            None => &self.pools[z.0],
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, z: AttributeId, rng: &mut R) -> Result<LabeledSample> {
        let z = AttributeId::checked(z.0, self.m())?;
        let pool = &self.pools[z.0];
        Ok(pool[rng.random_range(0..pool.len())].clone())
    }
}

fn read_pool_csv<R: Read>(reader: R) -> Result<Vec<Vec<LabeledSample>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols = headers.len();
    if cols < 3 {
        return Err(Error::invalid("expected header x0,..,x{d-1},y,z"));
    }
    let dim = cols - 2;
    for (i, h) in headers.iter().take(dim).enumerate() {
        if h.trim() != format!("x{i}") {
            return Err(Error::invalid(format!(
                "column {i} should be `x{i}`, found `{h}`"
            )));
        }
    }
    if headers[dim].trim() != "y" || headers[dim + 1].trim() != "z" {
        return Err(Error::invalid("last two columns must be `y,z`"));
    }
    let mut pools: Vec<Vec<LabeledSample>> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let row = line + 2;
        let parse_f = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("row {row}: bad number `{}`", &record[i])))
        };
        let x = (0..dim).map(parse_f).collect::<Result<Vec<_>>>()?;
        let y: u8 = record[dim]
            .trim()
            .parse()
            .ok()
            .filter(|y| *y <= 1)
            .ok_or_else(|| Error::invalid(format!("row {row}: label must be 0 or 1")))?;
        let z: usize = record[dim + 1].trim().parse().map_err(|_| {
            Error::invalid(format!("row {row}: bad attribute `{}`", &record[dim + 1]))
        })?;
        if pools.len() <= z {
            pools.resize_with(z + 1, Vec::new);
        }
        pools[z].push(LabeledSample::new(x, y, AttributeId(z))?);
    }
    Ok(pools)
}

/// A source of samples for every attribute.
#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    Gaussian(GaussianModelSpec),
    Pool(FinitePoolSpec),
}

impl Oracle {
    /// Built-in presets: `instance1`, `instance2`, `lower_q_mu`, `lower_q_gamma`.
    ///
    /// `r` and `r_prime` are only read by the two lower-bound presets.
    pub fn preset(name: &str, r: f64, r_prime: f64) -> Result<Self> {
        let spec = match name {
            "instance1" => GaussianModelSpec::instance1(),
            "instance2" => GaussianModelSpec::instance2(),
            "lower_q_mu" => GaussianModelSpec::lower_q_mu(r, r_prime)?,
            "lower_q_gamma" => GaussianModelSpec::lower_q_gamma(r, r_prime)?,
            other => {
                return Err(Error::config("oracle", format!("unknown preset `{other}`")));
            }
        };
        Ok(Oracle::Gaussian(spec))
    }

    pub fn m(&self) -> usize {
        match self {
            Oracle::Gaussian(g) => g.m(),
            Oracle::Pool(p) => p.m(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Oracle::Gaussian(_) => 2,
            Oracle::Pool(p) => p.dim(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, z: AttributeId, rng: &mut R) -> Result<LabeledSample> {
        match self {
            Oracle::Gaussian(g) => g.draw(z, rng),
            Oracle::Pool(p) => p.draw(z, rng),
        }
    }

    pub fn draw_many<R: Rng + ?Sized>(
        &self,
        z: AttributeId,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<LabeledSample>> {
        (0..count).map(|_| self.draw(z, rng)).collect()
    }

    /// 0-1 loss of `f` on attribute `z`.
    ///
    /// Exact for the Gaussian model; a classifier with zero weights predicts a
    /// constant label there and scores exactly 1/2. Pool oracles use the
    /// held-out pool (or the training pool when none is attached).
    pub fn population_loss(&self, f: &LinearClassifier, z: AttributeId) -> Result<f64> {
        match self {
            Oracle::Gaussian(g) => match population_loss_linear(g, f, z) {
                Err(Error::DegenerateClassifier) => Ok(0.5),
                other => other,
            },
            Oracle::Pool(p) => {
                let z = AttributeId::checked(z.0, p.m())?;
                empirical_loss(f, p.evaluation_pool(z), LossKind::ZeroOne)
            }
        }
    }

    pub fn population_losses(&self, f: &LinearClassifier) -> Result<Vec<f64>> {
        (0..self.m())
            .map(|z| self.population_loss(f, AttributeId(z)))
            .collect()
    }

    /// Minimum accuracy over attributes, `1 - max_z L(z, f)`.
    pub fn min_accuracy(&self, f: &LinearClassifier) -> Result<f64> {
        let worst = self
            .population_losses(f)?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(1.0 - worst)
    }
}
