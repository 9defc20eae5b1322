//! Versioned JSON experiment configs and the pipelines that run them.
//!
//! A run produces a JSON report, a set of CSV tables and an overall verdict.
//! Nothing here touches the filesystem; callers decide where artifacts go.

use std::path::PathBuf;

use serde::Deserialize;
use serde_json::{json, Value};

use crate::bounds::{
    exp_moment_certificate, korr_tail_certificate, multilinear_certificate, profile_from_function, weighted_moment,
    weighted_tail_certificate, weighted_tail_threshold, weighted_tail_window, Certificate, DerivativeProfile,
    WeightedProfile,
};
use crate::error::{Error, Result};
use crate::fixtures::{multilinear_fixture, weighted_fixture, MULTILINEAR_SHAPES, STUDENT_NU};
use crate::measures::{spectral_gap_oracle, Distribution, MeasureSpec};
use crate::poly::{MultilinearSpec, PolyFunction};
use crate::rmt::{
    calibrate, linear_stat, recentered_exp_moment, recentered_stat, rmt_certificates, sample_ensemble, Poly1,
    WignerEnsemble,
};
use crate::rng::derive_seed;
use crate::tensor::{certified_op_norm, iterative_op_norm, op_norm_auto, OpNormOptions, SymTensor, TensorJson};
use crate::verify::{check_certificate, empirical_lp, format_value, EmpiricalReport, Ledger, MOMENT_SLACK_SE};

pub const SCHEMA_VERSION: u32 = 1;
/// Standard errors added to Monte Carlo norm estimates before they enter a
/// certificate.
pub const NORM_INFLATION_SE: f64 = 5.0;
/// Tail-curve CSV header.
pub const TAIL_COLUMNS: [&str; 5] = ["t", "bound", "empirical", "ci_low", "ci_high"];

#[derive(Clone, Debug, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(flatten)]
    pub experiment: Experiment,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    TensorNorm(TensorNormConfig),
    Certify(CertifyConfig),
    VerifyTails(CertifyConfig),
    Weighted(WeightedConfig),
    Multilinear(MultilinearConfig),
    Rmt(RmtConfig),
    CatalogOracle(OracleConfig),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorNormConfig {
    pub tensor: TensorJson,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSource {
    /// Monte Carlo estimate, inflated by five standard errors.
    Estimate { samples: usize },
    /// Norms known in closed form.
    Given {
        norms2: Vec<f64>,
        top_inf: f64,
        #[serde(default)]
        hs2: Option<Vec<f64>>,
    },
}

impl Default for ProfileSource {
    fn default() -> Self {
        Self::Estimate { samples: 100_000 }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    pub measure: MeasureSpec,
    pub function: PolyFunction,
    pub order: usize,
    pub samples: usize,
    #[serde(default)]
    pub profile: ProfileSource,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    /// Multiplies `σ` before certifying; values below 1 give deliberately
    /// wrong certificates.
    #[serde(default = "one")]
    pub sigma_scale: f64,
}

fn default_profile_samples() -> usize {
    100_000
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultilinearConfig {
    pub measure: MeasureSpec,
    /// Either an explicit spec or the name of a shipped fixture.
    #[serde(default)]
    pub spec: Option<MultilinearSpec>,
    #[serde(default)]
    pub fixture: Option<String>,
    pub samples: usize,
    #[serde(default = "default_profile_samples")]
    pub profile_samples: usize,
    pub t_grid: Vec<f64>,
    /// Also check the certificate with `σ` divided by 10.
    #[serde(default)]
    pub negative_control: bool,
}

fn default_nu() -> f64 {
    STUDENT_NU
}

fn default_tail_p() -> f64 {
    2.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedConfig {
    #[serde(default = "default_nu")]
    pub nu: f64,
    pub order: usize,
    pub p_values: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub samples: usize,
    #[serde(default = "default_tail_p")]
    pub tail_p: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionConfig {
    /// Coefficients in ascending order of degree.
    Polynomial { coeffs: Vec<f64> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmtConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub entry: Distribution,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "M_cal")]
    pub m_cal: usize,
    pub f: FunctionConfig,
    pub t_grid: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub dist: Distribution,
    #[serde(default)]
    pub gridpoints: Option<usize>,
}

/// Config problem with the 1-based line it was found on, when known.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Line of the first occurrence of `"key"` in the config text.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

impl ExperimentConfig {
    /// Parses and validates a config.
    pub fn parse(text: &str) -> std::result::Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError {
            line: (e.line() > 0).then_some(e.line()),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|(key, message)| ConfigError {
            line: key_line(text, key),
            message,
        })?;
        Ok(cfg)
    }

    pub fn kind(&self) -> &'static str {
        match self.experiment {
            Experiment::TensorNorm(_) => "tensor-norm",
            Experiment::Certify(_) => "certify",
            Experiment::VerifyTails(_) => "verify-tails",
            Experiment::Weighted(_) => "weighted",
            Experiment::Multilinear(_) => "multilinear",
            Experiment::Rmt(_) => "rmt",
            Experiment::CatalogOracle(_) => "catalog-oracle",
        }
    }

    /// Replaces the main Monte Carlo sample count.
    pub fn set_samples(&mut self, m: usize) {
        match &mut self.experiment {
            Experiment::Certify(c) | Experiment::VerifyTails(c) => c.samples = m,
            Experiment::Weighted(c) => c.samples = m,
            Experiment::Multilinear(c) => c.samples = m,
            Experiment::Rmt(c) => c.m = m,
            Experiment::TensorNorm(_) | Experiment::CatalogOracle(_) => {}
        }
    }

    /// Checks that need no computation. Errors name the offending key.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if self.schema_version != SCHEMA_VERSION {
            return Err((
                "schema_version",
                format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let positive = |key: &'static str, v: usize| {
            if v == 0 {
                Err((key, format!("{key} must be positive")))
            } else {
                Ok(())
            }
        };
        match &self.experiment {
            Experiment::TensorNorm(_) | Experiment::CatalogOracle(_) => Ok(()),
            Experiment::Certify(c) | Experiment::VerifyTails(c) => {
                positive("samples", c.samples)?;
                positive("order", c.order)?;
                if c.function.dim() != c.measure.dim() {
                    return Err((
                        "function",
                        format!("function has dim {} but measure has dim {}", c.function.dim(), c.measure.dim()),
                    ));
                }
                if !(c.sigma_scale > 0.0 && c.sigma_scale.is_finite()) {
                    return Err(("sigma_scale", "sigma_scale must be positive".into()));
                }
                match &c.t_grid {
                    Some(g) => check_grid(g),
                    None if matches!(self.experiment, Experiment::VerifyTails(_)) => {
                        Err(("kind", "verify-tails needs a t_grid".into()))
                    }
                    None => Ok(()),
                }
            }
            Experiment::Weighted(c) => {
                positive("samples", c.samples)?;
                if !(1..=2).contains(&c.order) {
                    return Err(("order", format!("weighted fixtures have order 1 or 2, not {}", c.order)));
                }
                if c.p_values.is_empty() || c.p_values.iter().any(|&p| !(p >= 2.0)) {
                    return Err(("p_values", "p_values must be nonempty with every p >= 2".into()));
                }
                check_grid(&c.t_grid)
            }
            Experiment::Multilinear(c) => {
                positive("samples", c.samples)?;
                match (&c.spec, &c.fixture) {
                    (Some(_), None) | (None, Some(_)) => {}
                    _ => return Err(("spec", "give exactly one of spec and fixture".into())),
                }
                check_grid(&c.t_grid)
            }
            Experiment::Rmt(c) => {
                positive("M", c.m)?;
                if c.n < 2 {
                    return Err(("N", "N must be at least 2".into()));
                }
                check_grid(&c.t_grid)
            }
        }
    }
}

fn check_grid(grid: &[f64]) -> std::result::Result<(), (&'static str, String)> {
    if grid.is_empty() {
        return Err(("t_grid", "t_grid must not be empty".into()));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(("t_grid", "t_grid values must be finite and nonnegative".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(("t_grid", "t_grid must be strictly increasing".into()));
    }
    Ok(())
}

/// A numeric table. The first `integer_columns` columns hold integers.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub integer_columns: usize,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            integer_columns: 0,
            rows,
        }
    }

    pub fn from_ledger(name: &str, ledger: &Ledger) -> Self {
        let rows = ledger
            .entries
            .iter()
            .map(|e| vec![e.x, e.bound, e.empirical, e.ci_low, e.ci_high])
            .collect();
        Self::new(name, &TAIL_COLUMNS, rows)
    }

    pub fn is_tail_curve(&self) -> bool {
        self.columns.iter().map(String::as_str).eq(TAIL_COLUMNS)
    }

    /// The exact string written to the CSV for a cell.
    pub fn cell(&self, row: usize, col: usize) -> String {
        let v = self.rows[row][col];
        if col < self.integer_columns {
            format!("{}", v as i64)
        } else {
            format_value(v)
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in 0..self.rows.len() {
            w.write_record((0..self.columns.len()).map(|c| self.cell(r, c)))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ascii"))
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub kind: &'static str,
    pub report: Value,
    pub tables: Vec<Table>,
    pub pass: bool,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let seed = cfg.seed;
    let (body, tables, pass) = match &cfg.experiment {
        Experiment::TensorNorm(c) => run_tensor_norm(c)?,
        Experiment::Certify(c) => run_certify(c, seed, true)?,
        Experiment::VerifyTails(c) => run_certify(c, seed, false)?,
        Experiment::Weighted(c) => run_weighted(c, seed)?,
        Experiment::Multilinear(c) => run_multilinear(c, seed)?,
        Experiment::Rmt(c) => run_rmt(c, seed)?,
        Experiment::CatalogOracle(c) => run_oracle(c)?,
    };
    let mut report = json!({
        "schema_version": SCHEMA_VERSION,
        "kind": cfg.kind(),
        "seed": seed,
        "pass": pass,
    });
    report
        .as_object_mut()
        .expect("object")
        .extend(body.as_object().cloned().unwrap_or_default());
    Ok(Outcome {
        kind: cfg.kind(),
        report,
        tables,
        pass,
    })
}

type Run = (Value, Vec<Table>, bool);

fn run_tensor_norm(c: &TensorNormConfig) -> Result<Run> {
    let t = SymTensor::from_json_value(&c.tensor)?;
    let opts = OpNormOptions::default();
    let auto = op_norm_auto(&t, &opts)?;
    let iterative = iterative_op_norm(&t, &opts);
    let certified = if t.dim() <= 4 && t.order() <= 4 {
        Some(certified_op_norm(&t)?)
    } else {
        None
    };
    let mut columns = vec!["hs_norm", "op_norm", "op_norm_iterative"];
    let mut row = vec![t.hs_norm(), auto, iterative];
    if let Some(v) = certified {
        columns.push("op_norm_certified");
        row.push(v);
    }
    let body = json!({
        "dim": t.dim(),
        "order": t.order(),
        "hs_norm": t.hs_norm(),
        "op_norm": auto,
        "op_norm_iterative": iterative,
        "op_norm_certified": certified,
    });
    Ok((body, vec![Table::new("norms", &columns, vec![row])], true))
}

fn given_profile(
    f: &PolyFunction,
    measure: &MeasureSpec,
    order: usize,
    norms2: &[f64],
    top_inf: f64,
    hs2: &Option<Vec<f64>>,
) -> Result<DerivativeProfile> {
    let mut p = DerivativeProfile::new(order, measure.sigma()?, norms2.to_vec(), Some(top_inf))?;
    p.hs2 = hs2.clone();
    p.centered_derivatives = f.has_centered_derivatives(measure, order);
    p.mean_zero = f.mean(measure).is_some_and(|m| m.abs() <= 1e-12);
    p.validate()?;
    Ok(p)
}

fn tail_ledger(cert: &Certificate, values: &[f64], grid: &[f64]) -> Result<Ledger> {
    check_certificate(cert, &EmpiricalReport::tails(values, grid)?)
}

fn run_certify(c: &CertifyConfig, seed: u64, with_exp: bool) -> Result<Run> {
    let mut profile = match &c.profile {
        ProfileSource::Estimate { samples } => {
            profile_from_function(&c.function, &c.measure, c.order, *samples, derive_seed(seed, "profile"))?
                .inflated(NORM_INFLATION_SE)
        }
        ProfileSource::Given { norms2, top_inf, hs2 } => {
            given_profile(&c.function, &c.measure, c.order, norms2, *top_inf, hs2)?
        }
    };
    profile.sigma *= c.sigma_scale;
    let f = &c.function;
    let values = c
        .measure
        .sample(c.samples, derive_seed(seed, "evaluation"))
        .map_rows(|x| f.eval(x).expect("dimension checked"));
    let mut body = serde_json::Map::new();
    body.insert("samples".into(), json!(c.samples));
    body.insert("sigma".into(), json!(profile.sigma));
    body.insert("sigma_scale".into(), json!(c.sigma_scale));
    let mut tables = Vec::new();
    let mut pass = true;

    if with_exp {
        let cert = exp_moment_certificate(&profile)?;
        let (a, r) = cert.exp_moment()?;
        let report = EmpiricalReport::exp_moment(&values, a, r)?;
        let ledger = check_certificate(&cert, &report)?;
        pass &= ledger.pass;
        let e = &ledger.entries[0];
        tables.push(Table::new(
            "exp_moment",
            &["a", "r", "estimate", "se", "bound"],
            vec![vec![a, r, e.empirical, report.points[0].se, e.bound]],
        ));
        body.insert("exp_moment".into(), json!({ "certificate": cert.to_json(), "ledger": ledger }));
    }
    if let Some(grid) = &c.t_grid {
        let cert = korr_tail_certificate(&profile)?;
        let ledger = tail_ledger(&cert, &values, grid)?;
        pass &= ledger.pass;
        tables.push(Table::from_ledger("tail", &ledger));
        body.insert("tail".into(), json!({ "certificate": cert.to_json(), "ledger": ledger }));
    }
    Ok((Value::Object(body), tables, pass))
}

fn run_multilinear(c: &MultilinearConfig, seed: u64) -> Result<Run> {
    let spec = match (&c.spec, &c.fixture) {
        (Some(s), _) => s.clone(),
        (None, Some(name)) => {
            let found = MULTILINEAR_SHAPES
                .iter()
                .map(|&(d, n)| multilinear_fixture(d, n))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .find(|fx| &fx.name == name)
                .ok_or_else(|| Error::InvalidInput(format!("unknown multilinear fixture {name:?}")))?;
            found.spec
        }
        (None, None) => return Err(Error::InvalidInput("no multilinear spec given".into())),
    };
    if spec.dim() != c.measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: c.measure.dim(),
        });
    }
    let d = spec.order();
    let (f, _) = spec.to_function()?;
    let ml = multilinear_certificate(&spec, &c.measure)?;
    let n = spec.dim() as f64;
    let norm_ratio_ok = ml.hs_norm <= n.powf(d as f64 / 2.0) * ml.sup_norm;

    let estimate = profile_from_function(&f, &c.measure, d, c.profile_samples, derive_seed(seed, "profile"))?;
    let profile = estimate.inflated(NORM_INFLATION_SE);
    let korr = korr_tail_certificate(&profile)?;

    let values = c
        .measure
        .sample(c.samples, derive_seed(seed, "evaluation"))
        .map_rows(|x| f.eval(x).expect("dimension checked"));
    let report = EmpiricalReport::tails(&values, &c.t_grid)?;

    let mut pass = norm_ratio_ok;
    let mut tables = Vec::new();
    let mut body = serde_json::Map::new();
    body.insert("samples".into(), json!(c.samples));
    body.insert("hs_norm".into(), json!(ml.hs_norm));
    body.insert("sup_norm".into(), json!(ml.sup_norm));
    body.insert("hs_le_scaled_sup".into(), json!(norm_ratio_ok));

    let mut tails = serde_json::Map::new();
    let named = [("korr", Some(&korr)), ("hs", ml.tail_hs.as_ref()), ("sup", ml.tail_sup.as_ref())];
    for (name, cert) in named {
        let Some(cert) = cert else { continue };
        let ledger = check_certificate(cert, &report)?;
        pass &= ledger.pass;
        tables.push(Table::from_ledger(&format!("tail_{name}"), &ledger));
        tails.insert(name.into(), json!({ "certificate": cert.to_json(), "ledger": ledger }));
    }
    body.insert("tails".into(), Value::Object(tails));

    if c.samples >= crate::verify::MIN_EXP_SAMPLES {
        let mut exps = serde_json::Map::new();
        for (name, cert) in [("hs", &ml.exp_hs), ("sup", &ml.exp_sup)] {
            let (a, r) = cert.exp_moment()?;
            let ledger = check_certificate(cert, &EmpiricalReport::exp_moment(&values, a, r)?)?;
            pass &= ledger.pass;
            exps.insert(name.into(), json!({ "certificate": cert.to_json(), "ledger": ledger }));
        }
        body.insert("exp_moments".into(), Value::Object(exps));
    }

    if c.negative_control {
        let mut wrong = profile.clone();
        wrong.sigma /= 10.0;
        let cert = korr_tail_certificate(&wrong)?;
        let ledger = check_certificate(&cert, &report)?;
        tables.push(Table::from_ledger("tail_korr_control", &ledger));
        body.insert(
            "negative_control".into(),
            json!({
                "sigma_scale": 0.1,
                "failed_somewhere": !ledger.pass,
                "failures": ledger.failures().count(),
            }),
        );
    }
    Ok((Value::Object(body), tables, pass))
}

fn run_weighted(c: &WeightedConfig, seed: u64) -> Result<Run> {
    let (measure, oracle) = MeasureSpec::student_demo(c.nu)?;
    let fx = weighted_fixture(c.order, c.nu)?;
    let d = c.order;
    let f = &fx.f;
    let values = measure
        .sample(c.samples, derive_seed(seed, "evaluation"))
        .map_rows(|x| f.eval(x).expect("one-dimensional"));
    // the high weight moments needed here are far too noisy for Monte Carlo
    let wnorm = |q: f64| measure.weighted_norm_quadrature(q);

    let mut pass = true;
    let mut rows = Vec::new();
    let mut moments = Vec::new();
    for &p in &c.p_values {
        let wnorms = (1..=d).map(|k| wnorm(2f64.powi(k as i32) * p)).collect::<Result<Vec<_>>>()?;
        let w_mixed = wnorm(2f64.powi(d as i32 - 1) * p)?;
        let profile = WeightedProfile {
            order: d,
            p,
            wnorms: wnorms.clone(),
            norms2: fx.norms2.clone(),
            top_mixed: Some(fx.top * w_mixed),
            top2dp: Some(fx.top),
        };
        let bounds = weighted_moment(&profile)?;
        let emp = empirical_lp(&values, p)?;
        let floor = emp.estimate - MOMENT_SLACK_SE * emp.se;
        let checks = [bounds.mixed, bounds.holder, bounds.iterated];
        let ok = checks.iter().flatten().all(|&b| b >= floor);
        pass &= ok;
        rows.push(vec![
            p,
            emp.estimate,
            emp.se,
            bounds.mixed.unwrap_or(f64::NAN),
            bounds.holder.unwrap_or(f64::NAN),
            bounds.iterated.unwrap_or(f64::NAN),
        ]);
        moments.push(json!({
            "p": p,
            "empirical": emp.estimate,
            "se": emp.se,
            "weight_norms": wnorms,
            "mixed": bounds.mixed,
            "holder": bounds.holder,
            "iterated": bounds.iterated,
            "pass": ok,
        }));
    }

    let q = 2f64.powi(d as i32) * c.tail_p;
    let threshold = weighted_tail_threshold(d as u32);
    let big_c = wnorm(q)?.max(threshold);
    let cert = weighted_tail_certificate(big_c, c.tail_p, d as u32)?;
    let window = weighted_tail_window(big_c, c.tail_p, d as u32);
    let ledger = tail_ledger(&cert, &values, &c.t_grid)?;
    pass &= ledger.pass;

    let body = json!({
        "samples": c.samples,
        "nu": c.nu,
        "order": d,
        "kappa_sq": oracle.sigma2,
        "moments": moments,
        "slack": "bound >= estimate - 5 SE",
        "tail": {
            "certificate": cert.to_json(),
            "C": big_c,
            "window_end": window,
            "in_window": c.t_grid.iter().map(|&t| t <= window).collect::<Vec<_>>(),
            "ledger": ledger,
        },
    });
    let tables = vec![
        Table::new("moments", &["p", "empirical", "se", "mixed", "holder", "iterated"], rows),
        Table::from_ledger("tail", &ledger),
    ];
    Ok((body, tables, pass))
}

fn variance(v: &[f64]) -> f64 {
    let (m, _) = crate::numeric::mean_and_se(v);
    let ss: crate::numeric::CompensatedSum = v.iter().map(|x| (x - m).powi(2)).collect();
    ss.value() / (v.len() as f64 - 1.0)
}

fn run_rmt(c: &RmtConfig, seed: u64) -> Result<Run> {
    let ens = WignerEnsemble::new(c.n, c.entry.clone())?;
    let FunctionConfig::Polynomial { coeffs } = &c.f;
    let f = Poly1::new(coeffs.clone())?;
    let l = f
        .second_derivative_sup()
        .filter(|&l| l > 0.0)
        .ok_or_else(|| Error::InvalidInput("sup |f''| must be finite and positive (degree exactly 2)".into()))?;
    let cal = calibrate(&ens, &f, c.m_cal, derive_seed(seed, "calibration"))?;
    let es = sample_ensemble(&ens, c.m, derive_seed(seed, "evaluation"))?;
    let s = linear_stat(&es, &f, &cal)?;
    let st = recentered_stat(&es, &f, &cal)?;
    let (exp_cert, tail_cert) = rmt_certificates(&ens, l, &cal)?;
    let (a, _) = exp_cert.exp_moment()?;
    let est = recentered_exp_moment(&st, a, &cal)?;
    let exp_ledger = check_certificate(&exp_cert, &EmpiricalReport::from_exp_estimate(st.len(), a, est))?;
    let tail_ledger = tail_ledger(&tail_cert, &s, &c.t_grid)?;
    let (var_s, var_st) = (variance(&s), variance(&st));
    let pass = exp_ledger.pass && tail_ledger.pass;

    let body = json!({
        "N": c.n,
        "M": es.draws(),
        "M_cal": cal.draws,
        "discarded": es.discarded(),
        "sigma_n2": ens.sigma_n2(),
        "L": l,
        "var_S_N": var_s,
        "var_S_tilde_N": var_st,
        "recentering_reduces_variance": var_st < var_s,
        "exp_moment": { "certificate": exp_cert.to_json(), "ledger": exp_ledger },
        "tail": { "certificate": tail_cert.to_json(), "ledger": tail_ledger },
    });
    let mut results = Table::new(
        "results",
        &["draw", "S_N", "S_tilde_N"],
        s.iter().zip(&st).enumerate().map(|(i, (&a, &b))| vec![i as f64, a, b]).collect(),
    );
    results.integer_columns = 1;
    let e = &exp_ledger.entries[0];
    let tables = vec![
        results,
        Table::new(
            "exp_moment",
            &["a", "r", "estimate", "se", "bound"],
            vec![vec![a, 0.5, e.empirical, est.se, e.bound]],
        ),
        Table::from_ledger("tail", &tail_ledger),
    ];
    Ok((body, tables, pass))
}

fn run_oracle(c: &OracleConfig) -> Result<Run> {
    let report = match c.gridpoints {
        None => c.dist.oracle()?,
        Some(g) => {
            let (interval, _) = c
                .dist
                .oracle_setup()
                .ok_or_else(|| Error::Uncertified(c.dist.name()))?;
            let density = c.dist.density_fn();
            spectral_gap_oracle(&*density, interval, g)?
        }
    };
    let closed_form = c.dist.poincare_constant().ok();
    let body = json!({
        "dist": c.dist.name(),
        "interval": [report.interval.0, report.interval.1],
        "lambda1": report.lambda1,
        "sigma2": report.sigma2,
        "closed_form_sigma2": closed_form,
    });
    let mut table = Table::new(
        "oracle",
        &["grid", "lambda1", "sigma2"],
        report
            .rows
            .iter()
            .map(|r| vec![r.grid as f64, r.lambda1, r.sigma2])
            .collect(),
    );
    table.integer_columns = 1;
    Ok((body, vec![table], true))
}
