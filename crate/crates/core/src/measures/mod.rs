//! Product probability measures with known or numerically certified
//! Poincaré constants, optional weights, and reproducible sampling.

mod oracle;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution as _, Exp1, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{factorial, CompensatedSum};
use crate::rng::{stream_rng, BLOCK_ROWS};

pub use oracle::{
    spectral_gap_oracle, truncation_interval, weighted_spectral_gap_oracle, OracleReport, OracleRow,
    MIN_GRIDPOINTS, REFINEMENT_TOLERANCE,
};

/// A one-dimensional density supplied by the caller, sampled by inverting a
/// tabulated CDF. Its Poincaré constant is unknown until [`certify`] runs.
///
/// [`certify`]: CustomDensity::certify
#[derive(Clone)]
pub struct CustomDensity {
    pub name: String,
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: (f64, f64),
    /// (x, cdf) pairs, cdf normalised to end at 1.
    cdf: Arc<Vec<(f64, f64)>>,
    normaliser: f64,
    sigma2: Option<f64>,
}

const CDF_POINTS: usize = 20_000;

impl CustomDensity {
    /// `density` need not be normalised; it must be positive inside the
    /// finite `support`.
    pub fn new(
        name: impl Into<String>,
        support: (f64, f64),
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let (a, b) = support;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInput(format!("custom density needs a finite support, got {support:?}")));
        }
        let h = (b - a) / CDF_POINTS as f64;
        let mut cdf = Vec::with_capacity(CDF_POINTS + 1);
        let mut acc = CompensatedSum::new();
        let mut prev = density(a).max(0.0);
        cdf.push((a, 0.0));
        for k in 1..=CDF_POINTS {
            let x = a + k as f64 * h;
            let cur = density(x).max(0.0);
            acc.add(0.5 * (prev + cur) * h);
            cdf.push((x, acc.value()));
            prev = cur;
        }
        let z = acc.value();
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::InvalidInput(format!("custom density {} has no mass", "on its support")));
        }
        for p in cdf.iter_mut() {
            p.1 /= z;
        }
        Ok(Self {
            name: name.into(),
            density: Arc::new(density),
            support,
            cdf: Arc::new(cdf),
            normaliser: z,
            sigma2: None,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x) / self.normaliser
    }

    /// Runs the spectral-gap oracle and records the resulting constant.
    pub fn certify(&mut self, gridpoints: usize) -> Result<OracleReport> {
        let f = self.density.clone();
        let report = spectral_gap_oracle(&|x| f(x), self.support, gridpoints)?;
        self.sigma2 = Some(report.sigma2);
        Ok(report)
    }

    pub fn certified_sigma2(&self) -> Option<f64> {
        self.sigma2
    }

    fn quantile(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&(_, c)| c < u).clamp(1, self.cdf.len() - 1);
        let (x0, c0) = self.cdf[k - 1];
        let (x1, c1) = self.cdf[k];
        if c1 > c0 {
            x0 + (u - c0) / (c1 - c0) * (x1 - x0)
        } else {
            x0
        }
    }

    fn moment(&self, k: u32) -> f64 {
        let (a, b) = self.support;
        let h = (b - a) / CDF_POINTS as f64;
        let g = |x: f64| x.powi(k as i32) * self.density(x);
        let mut acc = CompensatedSum::new();
        for j in 0..CDF_POINTS {
            let x = a + j as f64 * h;
            acc.add(0.5 * (g(x) + g(x + h)) * h);
        }
        acc.value()
    }
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("sigma2", &self.sigma2)
            .finish()
    }
}

impl PartialEq for CustomDensity {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.support == other.support && self.sigma2 == other.sigma2
    }
}

/// One-dimensional coordinate law.
#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    Gaussian { mean: f64, std: f64 },
    /// Density `exp(-|x - loc| / scale) / (2 scale)`.
    Laplace { loc: f64, scale: f64 },
    Exponential { rate: f64 },
    Uniform01,
    /// Student t with `nu` degrees of freedom. Polynomial tails: no
    /// Poincaré constant, but a weighted inequality with `w^2 ∝ 1 + x^2`.
    Student { nu: f64 },
    Custom(CustomDensity),
}

impl Distribution {
    pub fn standard_gaussian() -> Self {
        Self::Gaussian { mean: 0.0, std: 1.0 }
    }

    /// Laplace law with unit variance.
    pub fn unit_laplace() -> Self {
        Self::Laplace {
            loc: 0.0,
            scale: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Gaussian { .. } => "gaussian".into(),
            Self::Laplace { .. } => "laplace".into(),
            Self::Exponential { .. } => "exponential".into(),
            Self::Uniform01 => "uniform01".into(),
            Self::Student { .. } => "student".into(),
            Self::Custom(c) => format!("custom:{}", c.name),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidInput(format!("{}: {what} = {v} must be positive and finite", self.name())));
        match *self {
            Self::Gaussian { std, mean } if !(std > 0.0 && std.is_finite() && mean.is_finite()) => bad("std", std),
            Self::Laplace { scale, loc } if !(scale > 0.0 && scale.is_finite() && loc.is_finite()) => bad("scale", scale),
            Self::Exponential { rate } if !(rate > 0.0 && rate.is_finite()) => bad("rate", rate),
            Self::Student { nu } if !(nu > 0.0 && nu.is_finite()) => bad("nu", nu),
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian { mean, std } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + std * z
            }
            Self::Laplace { loc, scale } => {
                let a: f64 = Exp1.sample(rng);
                let b: f64 = Exp1.sample(rng);
                loc + scale * (a - b)
            }
            Self::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            Self::Uniform01 => rng.random::<f64>(),
            Self::Student { nu } => StudentT::new(*nu).expect("validated nu").sample(rng),
            Self::Custom(c) => c.quantile(rng.random::<f64>()),
        }
    }

    /// The Poincaré constant `σ²` (closed form for catalog laws).
    pub fn poincare_constant(&self) -> Result<f64> {
        match self {
            Self::Gaussian { std, .. } => Ok(std * std),
            Self::Laplace { scale, .. } => Ok(4.0 * scale * scale),
            Self::Exponential { rate } => Ok(4.0 / (rate * rate)),
            Self::Uniform01 => Ok(1.0 / (PI * PI)),
            Self::Student { nu } => Err(Error::Uncertified(format!(
                "student(nu = {nu}): polynomial tails admit only a weighted inequality"
            ))),
            Self::Custom(c) => c
                .sigma2
                .ok_or_else(|| Error::Uncertified(format!("custom density {} (run the oracle first)", c.name))),
        }
    }

    /// Raw moment `E X^k`; `None` when infinite.
    pub fn moment(&self, k: u32) -> Option<f64> {
        if k == 0 {
            return Some(1.0);
        }
        let central_sum = |loc: f64, scale: f64, std_moment: &dyn Fn(u32) -> f64| {
            (0..=k)
                .map(|j| {
                    crate::numeric::binomial(u64::from(k), u64::from(j)) as f64
                        * loc.powi((k - j) as i32)
                        * scale.powi(j as i32)
                        * std_moment(j)
                })
                .sum::<f64>()
        };
        match self {
            Self::Gaussian { mean, std } => Some(central_sum(*mean, *std, &|j| {
                if j % 2 == 1 {
                    0.0
                } else {
                    (1..j).step_by(2).map(f64::from).product()
                }
            })),
            Self::Laplace { loc, scale } => Some(central_sum(*loc, *scale, &|j| {
                if j % 2 == 1 {
                    0.0
                } else {
                    factorial(u64::from(j))
                }
            })),
            Self::Exponential { rate } => Some(factorial(u64::from(k)) / rate.powi(k as i32)),
            Self::Uniform01 => Some(1.0 / f64::from(k + 1)),
            Self::Student { nu } => {
                if f64::from(k) >= *nu {
                    None
                } else if k % 2 == 1 {
                    Some(0.0)
                } else {
                    Some((1..=k / 2).map(|i| nu * f64::from(2 * i - 1) / (nu - f64::from(2 * i))).product())
                }
            }
            Self::Custom(c) => Some(c.moment(k)),
        }
    }

    pub fn mean(&self) -> Option<f64> {
        self.moment(1)
    }

    pub fn variance(&self) -> Option<f64> {
        let m1 = self.moment(1)?;
        Some(self.moment(2)? - m1 * m1)
    }

    /// Unnormalised density, for the spectral-gap oracle.
    pub fn density_fn(&self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        match self.clone() {
            Self::Gaussian { mean, std } => Arc::new(move |x| (-0.5 * ((x - mean) / std).powi(2)).exp()),
            Self::Laplace { loc, scale } => Arc::new(move |x| (-(x - loc).abs() / scale).exp()),
            Self::Exponential { rate } => Arc::new(move |x| if x >= 0.0 { (-rate * x).exp() } else { 0.0 }),
            Self::Uniform01 => Arc::new(|x| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 }),
            Self::Student { nu } => Arc::new(move |x| (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0)),
            Self::Custom(c) => Arc::new(move |x| c.density(x)),
        }
    }

    /// Truncation interval and grid size used when certifying this law with
    /// the spectral-gap oracle.
    ///
    /// Exponential-tailed laws have the bottom of their essential spectrum at
    /// the gap itself, so the truncated Neumann gap approaches it like
    /// `π² / L²`; their intervals are far wider than the mass criterion
    /// alone would give.
    pub fn oracle_setup(&self) -> Option<((f64, f64), usize)> {
        match self {
            Self::Gaussian { mean, std } => Some(((mean - 8.0 * std, mean + 8.0 * std), 2_000)),
            Self::Laplace { loc, scale } => Some(((loc - 300.0 * scale, loc + 300.0 * scale), 12_000)),
            Self::Exponential { rate } => Some(((0.0, 300.0 / rate), 6_000)),
            Self::Uniform01 => Some(((0.0, 1.0), 400)),
            Self::Custom(c) => Some((c.support, 2_000)),
            Self::Student { .. } => None,
        }
    }

    /// Runs the spectral-gap oracle on this law.
    pub fn oracle(&self) -> Result<OracleReport> {
        let (interval, grid) = self
            .oracle_setup()
            .ok_or_else(|| Error::Uncertified(format!("{}: no unweighted oracle", self.name())))?;
        let density = self.density_fn();
        spectral_gap_oracle(&|x| density(x), interval, grid)
    }

    /// Weighted-inequality constant `κ²` such that
    /// `Var(f) <= κ² E[(1 + X²) f'(X)²]`, certified by the weighted oracle.
    pub fn weighted_oracle(&self) -> Result<OracleReport> {
        let density = self.density_fn();
        let interval = match self {
            Self::Custom(c) => c.support,
            _ => {
                let (center, scale) = match self {
                    Self::Gaussian { mean, std } => (*mean, *std),
                    Self::Laplace { loc, scale } => (*loc, *scale),
                    _ => (0.0, 1.0),
                };
                let (a, b) = truncation_interval(&|x| density(x), center, scale, 1e-10);
                match self {
                    Self::Exponential { .. } => (0.0, b),
                    Self::Uniform01 => (0.0, 1.0),
                    _ => (a, b),
                }
            }
        };
        weighted_spectral_gap_oracle(&|x| density(x), &|x| 1.0 + x * x, interval, 4_000)
    }

    fn to_json(&self) -> Result<CoordJson> {
        let params: BTreeMap<String, f64> = match self {
            Self::Gaussian { mean, std } => [("mean".into(), *mean), ("std".into(), *std)].into(),
            Self::Laplace { loc, scale } => [("loc".into(), *loc), ("scale".into(), *scale)].into(),
            Self::Exponential { rate } => [("rate".into(), *rate)].into(),
            Self::Uniform01 => BTreeMap::new(),
            Self::Student { nu } => [("nu".into(), *nu)].into(),
            Self::Custom(c) => {
                return Err(Error::InvalidInput(format!("custom density {} cannot be serialised", c.name)))
            }
        };
        Ok(CoordJson {
            dist: self.name(),
            params,
        })
    }

    fn from_json(json: &CoordJson) -> Result<Self> {
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            json.params
                .get(key)
                .copied()
                .or(default)
                .ok_or_else(|| Error::InvalidInput(format!("{}: missing parameter `{key}`", json.dist)))
        };
        let known: &[&str] = match json.dist.as_str() {
            "gaussian" => &["mean", "std"],
            "laplace" => &["loc", "scale"],
            "exponential" => &["rate"],
            "uniform01" => &[],
            "student" => &["nu"],
            other => return Err(Error::InvalidInput(format!("unknown distribution `{other}`"))),
        };
        if let Some(extra) = json.params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::InvalidInput(format!("{}: unknown parameter `{extra}`", json.dist)));
        }
        let dist = match json.dist.as_str() {
            "gaussian" => Self::Gaussian {
                mean: get("mean", Some(0.0))?,
                std: get("std", Some(1.0))?,
            },
            "laplace" => Self::Laplace {
                loc: get("loc", Some(0.0))?,
                scale: get("scale", Some(1.0))?,
            },
            "exponential" => Self::Exponential {
                rate: get("rate", Some(1.0))?,
            },
            "uniform01" => Self::Uniform01,
            _ => Self::Student { nu: get("nu", None)? },
        };
        dist.validate()?;
        Ok(dist)
    }
}

impl Serialize for Distribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Distribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Self::from_json(&CoordJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CoordJson {
    dist: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

/// Weight for a weighted Poincaré inequality. On R^n the coordinate weights
/// combine by the max convention: `w(x) = max_i w_1(x_i)`, which satisfies
/// the product inequality whenever each coordinate does.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum WeightSpec {
    Constant { value: f64 },
    /// `κ sqrt(1 + x²)`.
    SqrtOnePlusSquare { kappa: f64 },
}

impl WeightSpec {
    pub fn at(&self, x: &[f64]) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::SqrtOnePlusSquare { kappa } => {
                let m = x.iter().fold(0.0f64, |a, v| a.max(v * v));
                kappa * (1.0 + m).sqrt()
            }
        }
    }
}

/// Product measure on R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSpec {
    coords: Vec<Distribution>,
    weight: Option<WeightSpec>,
}

/// Row-major `rows × cols` sample matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn par_rows(&self) -> impl IndexedParallelIterator<Item = &[f64]> {
        self.data.par_chunks_exact(self.cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }

    /// Applies `f` to every row in parallel; output order follows rows.
    pub fn map_rows<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        self.par_rows().map(f).collect()
    }
}

/// Estimate of `||w||_p` with a standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub p: f64,
    pub estimate: f64,
    pub se: f64,
}

impl MeasureSpec {
    pub fn new(coords: Vec<Distribution>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one coordinate".into()));
        }
        for c in &coords {
            c.validate()?;
        }
        Ok(Self { coords, weight: None })
    }

    pub fn iid(dist: Distribution, dim: usize) -> Self {
        Self::new(vec![dist; dim.max(1)]).expect("valid catalog distribution")
    }

    pub fn with_weight(mut self, weight: WeightSpec) -> Self {
        self.weight = Some(weight);
        self
    }

    /// One-dimensional Student law with `w(x) = κ sqrt(1 + x²)` and `κ`
    /// certified by the weighted spectral-gap oracle.
    pub fn student_demo(nu: f64) -> Result<(Self, OracleReport)> {
        let dist = Distribution::Student { nu };
        dist.validate()?;
        let report = dist.weighted_oracle()?;
        let kappa = report.sigma2.sqrt();
        Ok((Self::new(vec![dist])?.with_weight(WeightSpec::SqrtOnePlusSquare { kappa }), report))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> &Distribution {
        &self.coords[i]
    }

    pub fn coords(&self) -> &[Distribution] {
        &self.coords
    }

    pub fn weight(&self) -> Option<&WeightSpec> {
        self.weight.as_ref()
    }

    /// Product constant `σ² = max_i σ_i²`.
    pub fn poincare_constant(&self) -> Result<f64> {
        self.coords
            .iter()
            .map(Distribution::poincare_constant)
            .try_fold(0.0f64, |acc, s| s.map(|s| acc.max(s)))
    }

    pub fn sigma(&self) -> Result<f64> {
        Ok(self.poincare_constant()?.sqrt())
    }

    /// Index and mean of the first coordinate whose mean is not zero.
    pub fn first_uncentered(&self) -> Option<(usize, f64)> {
        self.coords.iter().enumerate().find_map(|(i, c)| match c.mean() {
            Some(m) if m.abs() <= 1e-14 => None,
            Some(m) => Some((i, m)),
            None => Some((i, f64::NAN)),
        })
    }

    pub fn is_centered(&self) -> bool {
        self.first_uncentered().is_none()
    }

    pub fn has_unit_variances(&self) -> bool {
        self.coords
            .iter()
            .all(|c| c.variance().is_some_and(|v| (v - 1.0).abs() <= 1e-12))
    }

    /// `m` i.i.d. rows. Block `b` of [`BLOCK_ROWS`] rows always comes from
    /// stream `b` of `seed`, independent of the thread count.
    pub fn sample(&self, m: usize, seed: u64) -> SampleMatrix {
        let n = self.dim();
        let mut data = vec![0.0; m * n];
        data.par_chunks_mut(BLOCK_ROWS * n)
            .enumerate()
            .for_each(|(b, chunk)| {
                let mut rng = stream_rng(seed, b as u64);
                for row in chunk.chunks_exact_mut(n) {
                    for (x, dist) in row.iter_mut().zip(&self.coords) {
                        *x = dist.sample(&mut rng);
                    }
                }
            });
        SampleMatrix { rows: m, cols: n, data }
    }

    /// Monte Carlo `(E w^p)^{1/p}` with a delta-method standard error.
    ///
    /// The moment is declared divergent when the running estimate over
    /// nested prefixes of size `m/16, m/8, m/4, m/2, m` does not settle.
    pub fn weighted_norm(&self, p: f64, m: usize, seed: u64) -> Result<NormEstimate> {
        let weight = self
            .weight
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("measure has no weight".into()))?;
        if !(p >= 1.0) {
            return Err(Error::InvalidInput(format!("p = {p} must be >= 1")));
        }
        if let WeightSpec::Constant { value } = *weight {
            return Ok(NormEstimate { p, estimate: value, se: 0.0 });
        }
        if m < 16 {
            return Err(Error::InvalidInput(format!("need at least 16 samples, got {m}")));
        }
        let samples = self.sample(m, seed);
        let powers = samples.map_rows(|x| weight.at(x).powf(p));
        weighted_norm_from_powers(&powers, p)
    }
}

impl MeasureSpec {
    /// `||w||_q` by quadrature against the density, for one-dimensional
    /// measures. Deterministic, and usable where the Monte Carlo estimator
    /// of a high moment is too noisy to trust.
    pub fn weighted_norm_quadrature(&self, q: f64) -> Result<f64> {
        let weight = self
            .weight
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("measure has no weight".into()))?;
        if !(q >= 1.0) {
            return Err(Error::InvalidInput(format!("q = {q} must be >= 1")));
        }
        if let WeightSpec::Constant { value } = *weight {
            return Ok(value);
        }
        if self.dim() != 1 {
            return Err(Error::InvalidInput("quadrature weight norms need a one-dimensional measure".into()));
        }
        let dist = &self.coords[0];
        if let Distribution::Student { nu } = *dist {
            // w grows like |x|, so E w^q < ∞ iff q < ν
            if q >= nu {
                return Err(Error::DivergentMoment { p: q });
            }
        }
        let density = dist.density_fn();
        let center = dist.mean().unwrap_or(0.0);
        let scale = dist.variance().map_or(1.0, f64::sqrt);
        let mass = oracle::line_integral(&*density, center, scale);
        let moment = oracle::line_integral(&|x| weight.at(&[x]).powf(q) * density(x), center, scale);
        let value = (moment / mass).powf(1.0 / q);
        if !value.is_finite() {
            return Err(Error::DivergentMoment { p: q });
        }
        Ok(value)
    }
}

pub(crate) fn weighted_norm_from_powers(powers: &[f64], p: f64) -> Result<NormEstimate> {
    let m = powers.len();
    let prefix_stats: Vec<(f64, f64)> = (0..=4)
        .map(|j| crate::numeric::mean_and_se(&powers[..m >> (4 - j)]))
        .collect();
    let (mean, se) = prefix_stats[4];
    let unstable = se > 0.05 * mean
        || prefix_stats
            .iter()
            .any(|&(e, s)| (e - mean).abs() > 5.0 * s.max(se) + 1e-12 * mean);
    if unstable || !mean.is_finite() {
        return Err(Error::DivergentMoment { p });
    }
    let estimate = mean.powf(1.0 / p);
    let se = if mean > 0.0 { estimate * se / (p * mean) } else { 0.0 };
    Ok(NormEstimate { p, estimate, se })
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    dim: usize,
    coords: Vec<Distribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<WeightSpec>,
}

impl Serialize for MeasureSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureJson {
            dim: self.dim(),
            coords: self.coords.clone(),
            weight: self.weight.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasureSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = MeasureJson::deserialize(d)?;
        // a single coordinate entry is broadcast to all `dim` coordinates
        let coords = match json.coords.len() {
            1 if json.dim > 1 => vec![json.coords[0].clone(); json.dim],
            k if k == json.dim => json.coords,
            k => {
                return Err(serde::de::Error::custom(format!(
                    "measure has dim {} but {k} coordinate entries",
                    json.dim
                )))
            }
        };
        let mut spec = MeasureSpec::new(coords).map_err(serde::de::Error::custom)?;
        spec.weight = json.weight;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_norm_by_quadrature() {
        let g = MeasureSpec::iid(Distribution::standard_gaussian(), 1).with_weight(WeightSpec::SqrtOnePlusSquare { kappa: 1.0 });
        assert!((g.weighted_norm_quadrature(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-9);
        let nu = 40.0;
        let s = MeasureSpec::new(vec![Distribution::Student { nu }])
            .unwrap()
            .with_weight(WeightSpec::SqrtOnePlusSquare { kappa: 0.5 });
        let exact = 0.5 * (1.0 + nu / (nu - 2.0)).sqrt();
        assert!((s.weighted_norm_quadrature(2.0).unwrap() - exact).abs() < 1e-9);
        // E (1 + x²)² = 1 + 2 m2 + m4 with m4 = 3 ν² / ((ν - 2)(ν - 4))
        let m2 = nu / (nu - 2.0);
        let m4 = 3.0 * nu * nu / ((nu - 2.0) * (nu - 4.0));
        let exact = 0.5 * (1.0 + 2.0 * m2 + m4).powf(0.25);
        assert!((s.weighted_norm_quadrature(4.0).unwrap() - exact).abs() < 1e-9);
        let w = [2.0, 4.0, 8.0, 16.0].map(|q| s.weighted_norm_quadrature(q).unwrap());
        assert!(w.windows(2).all(|p| p[0] <= p[1]));
        assert!(matches!(s.weighted_norm_quadrature(40.0), Err(Error::DivergentMoment { .. })));
    }

    #[test]
    fn catalog_constants() {
        assert_eq!(Distribution::standard_gaussian().poincare_constant().unwrap(), 1.0);
        assert!((Distribution::Uniform01.poincare_constant().unwrap() - 0.10132).abs() < 1e-5);
        assert_eq!(Distribution::Laplace { loc: 0.0, scale: 1.0 }.poincare_constant().unwrap(), 4.0);
        assert!(matches!(
            Distribution::Student { nu: 5.0 }.poincare_constant(),
            Err(Error::Uncertified(_))
        ));
    }

    #[test]
    fn catalog_matches_oracle() {
        for dist in [
            Distribution::standard_gaussian(),
            Distribution::Gaussian { mean: 1.0, std: 0.5 },
            Distribution::Laplace { loc: 0.0, scale: 1.0 },
            Distribution::Exponential { rate: 1.0 },
            Distribution::Uniform01,
        ] {
            let report = dist.oracle().unwrap();
            let exact = dist.poincare_constant().unwrap();
            assert!((report.sigma2 - exact).abs() < 1e-3 * exact, "{}: {} vs {exact}", dist.name(), report.sigma2);
        }
    }

    #[test]
    fn student_weight_is_certified() {
        let (m, report) = MeasureSpec::student_demo(40.0).unwrap();
        let kappa = match m.weight() {
            Some(WeightSpec::SqrtOnePlusSquare { kappa }) => *kappa,
            other => panic!("{other:?}"),
        };
        assert_eq!(kappa * kappa, report.sigma2);
        // for large nu the weighted constant approaches the gaussian one from
        // below: Var f <= E f'^2 <= E (1 + x^2) f'^2
        assert!(report.sigma2 > 0.3 && report.sigma2 < 1.0, "{}", report.sigma2);
    }

    #[test]
    fn product_constant_is_max() {
        let m = MeasureSpec::new(vec![
            Distribution::standard_gaussian(),
            Distribution::Laplace { loc: 0.0, scale: 1.0 },
            Distribution::Uniform01,
        ])
        .unwrap();
        assert_eq!(m.poincare_constant().unwrap(), 4.0);
    }

    #[test]
    fn moments() {
        let g = Distribution::Gaussian { mean: 1.0, std: 2.0 };
        assert_eq!(g.moment(1), Some(1.0));
        assert_eq!(g.moment(2), Some(5.0));
        assert_eq!(Distribution::standard_gaussian().moment(4), Some(3.0));
        assert_eq!(Distribution::Laplace { loc: 0.0, scale: 1.0 }.moment(2), Some(2.0));
        assert_eq!(Distribution::Exponential { rate: 2.0 }.moment(2), Some(0.5));
        assert_eq!(Distribution::Uniform01.moment(3), Some(0.25));
        let t = Distribution::Student { nu: 5.0 };
        assert!((t.moment(2).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!((t.moment(4).unwrap() - 25.0).abs() < 1e-12);
        assert_eq!(t.moment(6), None);
        assert!((Distribution::unit_laplace().variance().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic_and_ordered() {
        let m = MeasureSpec::iid(Distribution::standard_gaussian(), 3);
        let a = m.sample(10_000, 42);
        let b = m.sample(10_000, 42);
        assert_eq!(a, b);
        // a prefix of a larger draw equals the smaller draw
        let c = m.sample(20_000, 42);
        assert_eq!(a.row(9_999), c.row(9_999));
        assert_ne!(m.sample(10, 43), m.sample(10, 42));
    }

    #[test]
    fn gaussian_mean_within_clt_band() {
        let m = 1_000_000;
        let s = MeasureSpec::iid(Distribution::standard_gaussian(), 2).sample(m, 1);
        for j in 0..2 {
            let mean = s.column(j).iter().sum::<f64>() / m as f64;
            assert!(mean.abs() < 4.0 / (m as f64).sqrt(), "coord {j}: {mean}");
        }
    }

    #[test]
    fn uniform_in_unit_interval() {
        let s = MeasureSpec::iid(Distribution::Uniform01, 3).sample(50_000, 5);
        assert!(s.iter_rows().flatten().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn laplace_variance() {
        let m = 1_000_000;
        let s = MeasureSpec::iid(Distribution::Laplace { loc: 0.0, scale: 1.0 }, 1).sample(m, 2);
        let v = s.column(0).iter().map(|x| x * x).sum::<f64>() / m as f64;
        // Var of Laplace(scale 1) is 2
        assert!((v - 2.0).abs() < 0.02, "{v}");
    }

    #[test]
    fn custom_density_sampling_and_moments() {
        // triangular density on [0, 1]: 2x, mean 2/3
        let c = CustomDensity::new("tri", (0.0, 1.0), |x| 2.0 * x).unwrap();
        let d = Distribution::Custom(c);
        assert!((d.moment(1).unwrap() - 2.0 / 3.0).abs() < 1e-6);
        assert!(matches!(d.poincare_constant(), Err(Error::Uncertified(_))));
        let s = MeasureSpec::new(vec![d]).unwrap().sample(200_000, 3);
        let mean = s.column(0).iter().sum::<f64>() / 200_000.0;
        assert!((mean - 2.0 / 3.0).abs() < 5e-3);
    }

    #[test]
    fn custom_density_certification() {
        let mut c = CustomDensity::new("flat", (0.0, 2.0), |_| 1.0).unwrap();
        let report = c.certify(400).unwrap();
        // uniform on an interval of length 2: σ² = 4 / π²
        assert!((report.sigma2 - 4.0 / (PI * PI)).abs() < 1e-3 * report.sigma2);
        let d = Distribution::Custom(c);
        assert_eq!(d.poincare_constant().unwrap(), report.sigma2);
    }

    #[test]
    fn weighted_norm_examples() {
        let constant = MeasureSpec::iid(Distribution::standard_gaussian(), 2).with_weight(WeightSpec::Constant { value: 1.7 });
        let w = constant.weighted_norm(3.0, 1000, 1).unwrap();
        assert_eq!(w.estimate, 1.7);

        let g = MeasureSpec::iid(Distribution::standard_gaussian(), 1).with_weight(WeightSpec::SqrtOnePlusSquare { kappa: 1.0 });
        // E(1 + X²) = 2
        let w = g.weighted_norm(2.0, 400_000, 9).unwrap();
        assert!((w.estimate - 2f64.sqrt()).abs() < 5.0 * w.se + 1e-3, "{w:?}");

        let w3 = g.weighted_norm(3.0, 400_000, 9).unwrap();
        assert!(w.estimate <= w3.estimate);

        let heavy = MeasureSpec::iid(Distribution::Student { nu: 3.0 }, 1).with_weight(WeightSpec::SqrtOnePlusSquare { kappa: 1.0 });
        assert!(matches!(heavy.weighted_norm(4.0, 400_000, 9), Err(Error::DivergentMoment { .. })));
        assert!(constant.clone().weighted_norm(0.5, 10, 1).is_err());
    }

    #[test]
    fn json_round_trip_and_broadcast() {
        let json = r#"{"dim":3,"coords":[{"dist":"laplace","params":{"scale":0.5}}],"weight":{"kind":"constant","params":{"value":2.0}}}"#;
        let m: MeasureSpec = serde_json::from_str(json).unwrap();
        assert_eq!(m.dim(), 3);
        assert_eq!(m.poincare_constant().unwrap(), 1.0);
        let back: MeasureSpec = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
        assert!(serde_json::from_str::<MeasureSpec>(r#"{"dim":1,"coords":[{"dist":"cauchy"}]}"#).is_err());
        assert!(serde_json::from_str::<MeasureSpec>(r#"{"dim":1,"coords":[{"dist":"gaussian","params":{"std":-1}}]}"#).is_err());
        assert!(serde_json::from_str::<MeasureSpec>(r#"{"dim":2,"coords":[{"dist":"uniform01"},{"dist":"uniform01"},{"dist":"uniform01"}]}"#).is_err());
    }
}
