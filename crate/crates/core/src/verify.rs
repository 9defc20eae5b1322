//! Monte Carlo ground truth: empirical moments, tails and exponential
//! moments, and domination checks of certificates against them.
//!
//! Slack conventions: a tail bound passes when it is at least the lower
//! Wilson 95% limit of the empirical fraction; a moment bound passes when
//! it is at least `estimate - 5 SE`; an exponential-moment claim passes when
//! the estimate is at most `2 + 3 SE`.

use std::io::Write;

use serde::Serialize;

use crate::bounds::{Certificate, CertificateKind, Route};
use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
pub const MOMENT_SLACK_SE: f64 = 5.0;
pub const EXP_MOMENT_SLACK_SE: f64 = 3.0;
/// Largest relative gap between half-sample exponential-moment estimates.
pub const HALF_SAMPLE_TOLERANCE: f64 = 0.1;
pub const MIN_TAIL_SAMPLES: usize = 1_000;
pub const MIN_EXP_SAMPLES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub se: f64,
}

/// `(mean |v|^p)^{1/p}` with a delta-method standard error.
pub fn empirical_lp(values: &[f64], p: f64) -> Result<Estimate> {
    if values.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 values, got {}", values.len())));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidInput(format!("p = {p} must be positive")));
    }
    let powers: Vec<f64> = values.iter().map(|v| v.abs().powf(p)).collect();
    let (mean, se_mean) = crate::numeric::mean_and_se(&powers);
    let estimate = mean.powf(1.0 / p);
    let se = if mean > 0.0 { estimate * se_mean / (p * mean) } else { 0.0 };
    Ok(Estimate { estimate, se })
}

/// Wilson score interval for `k` successes out of `m`.
pub fn wilson(k: usize, m: usize, z: f64) -> (f64, f64) {
    if m == 0 {
        return (0.0, 1.0);
    }
    let n = m as f64;
    let phat = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    // the endpoints at k = 0 and k = m are exact
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == m { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailPoint {
    pub t: f64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Empirical `P(|f| >= t)` on a grid, with Wilson 95% intervals.
pub fn empirical_tail(values: &[f64], t_grid: &[f64]) -> Result<Vec<TailPoint>> {
    if values.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "tail estimates need at least {MIN_TAIL_SAMPLES} values, got {}",
            values.len()
        )));
    }
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    abs.sort_unstable_by(f64::total_cmp);
    let m = abs.len();
    Ok(t_grid
        .iter()
        .map(|&t| {
            let below = abs.partition_point(|&v| v < t);
            let k = m - below;
            let (ci_low, ci_high) = wilson(k, m, Z95);
            TailPoint {
                t,
                fraction: k as f64 / m as f64,
                ci_low,
                ci_high,
            }
        })
        .collect())
}

fn exp_mean(values: &[f64], a: f64, r: f64) -> (f64, f64) {
    let terms: Vec<f64> = values.iter().map(|v| (a * v.abs().powf(r)).exp()).collect();
    crate::numeric::mean_and_se(&terms)
}

/// Sample mean of `exp(a |v|^r)`. The two halves of the sample must agree
/// to within 10%, otherwise the integrand is too heavy-tailed for the
/// estimate to mean anything.
pub fn empirical_exp_moment(values: &[f64], a: f64, r: f64) -> Result<Estimate> {
    if values.len() < MIN_EXP_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "exponential moments need at least {MIN_EXP_SAMPLES} values, got {}",
            values.len()
        )));
    }
    exp_moment_estimate(values, a, r)
}

/// [`empirical_exp_moment`] without the sample-size floor, for statistics
/// that are expensive to draw (one eigendecomposition per value).
pub fn exp_moment_estimate(values: &[f64], a: f64, r: f64) -> Result<Estimate> {
    if values.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 values, got {}", values.len())));
    }
    let (estimate, se) = exp_mean(values, a, r);
    let half = values.len() / 2;
    let (first, _) = exp_mean(&values[..half], a, r);
    let (second, _) = exp_mean(&values[half..], a, r);
    if !estimate.is_finite() || (first - second).abs() > HALF_SAMPLE_TOLERANCE * estimate {
        return Err(Error::HeavyTailUnstable { first, second });
    }
    Ok(Estimate { estimate, se })
}

/// What an [`EmpiricalReport`] measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    Moments,
    Tail,
    ExpMoment,
}

impl Statistic {
    fn matches(self, kind: CertificateKind) -> bool {
        matches!(
            (self, kind),
            (Self::Moments, CertificateKind::Moment)
                | (Self::Tail, CertificateKind::Tail)
                | (Self::ExpMoment, CertificateKind::ExpMoment)
        )
    }

    fn as_str(self) -> &'static str {
        match self {
            Self::Moments => "moment",
            Self::Tail => "tail",
            Self::ExpMoment => "exp-moment",
        }
    }
}

/// One grid value: `x` is `p` for moments, `t` for tails and unused for
/// exponential moments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReportPoint {
    pub x: f64,
    pub estimate: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalReport {
    pub samples: usize,
    pub statistic: Statistic,
    pub points: Vec<ReportPoint>,
}

impl EmpiricalReport {
    pub fn tails(values: &[f64], t_grid: &[f64]) -> Result<Self> {
        let points = empirical_tail(values, t_grid)?
            .into_iter()
            .map(|tp| ReportPoint {
                x: tp.t,
                estimate: tp.fraction,
                se: (tp.fraction * (1.0 - tp.fraction) / values.len() as f64).sqrt(),
                ci_low: tp.ci_low,
                ci_high: tp.ci_high,
            })
            .collect();
        Ok(Self {
            samples: values.len(),
            statistic: Statistic::Tail,
            points,
        })
    }

    pub fn moments(values: &[f64], ps: &[f64]) -> Result<Self> {
        let points = ps
            .iter()
            .map(|&p| {
                let e = empirical_lp(values, p)?;
                Ok(ReportPoint {
                    x: p,
                    estimate: e.estimate,
                    se: e.se,
                    ci_low: e.estimate - Z95 * e.se,
                    ci_high: e.estimate + Z95 * e.se,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            samples: values.len(),
            statistic: Statistic::Moments,
            points,
        })
    }

    pub fn exp_moment(values: &[f64], a: f64, r: f64) -> Result<Self> {
        let e = empirical_exp_moment(values, a, r)?;
        Ok(Self::from_exp_estimate(values.len(), a, e))
    }

    /// Report from an estimate whose standard error was assembled elsewhere
    /// (for instance including a calibration error).
    pub fn from_exp_estimate(samples: usize, a: f64, e: Estimate) -> Self {
        Self {
            samples,
            statistic: Statistic::ExpMoment,
            points: vec![ReportPoint {
                x: a,
                estimate: e.estimate,
                se: e.se,
                ci_low: e.estimate - Z95 * e.se,
                ci_high: e.estimate + Z95 * e.se,
            }],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub x: f64,
    pub bound: f64,
    pub empirical: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Amount subtracted from the empirical value before comparing.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ledger {
    pub route: Route,
    pub kind: CertificateKind,
    pub slack_rule: &'static str,
    pub samples: usize,
    pub entries: Vec<LedgerEntry>,
    pub pass: bool,
}

impl Ledger {
    pub fn failures(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// CSV with columns `t, bound, empirical, ci_low, ci_high`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "bound", "empirical", "ci_low", "ci_high"])?;
        for e in &self.entries {
            w.write_record([
                format_value(e.x),
                format_value(e.bound),
                format_value(e.empirical),
                format_value(e.ci_low),
                format_value(e.ci_high),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_value(x: f64) -> String {
    format!("{x:?}")
}

/// Compares a certificate with an empirical report point by point.
pub fn check_certificate(cert: &Certificate, report: &EmpiricalReport) -> Result<Ledger> {
    if !report.statistic.matches(cert.kind) {
        return Err(Error::KindMismatch {
            certificate: cert.kind.as_str(),
            report: report.statistic.as_str(),
        });
    }
    let (rule, entries) = match cert.kind {
        CertificateKind::Tail => (
            "bound >= lower Wilson 95% limit",
            report
                .points
                .iter()
                .map(|pt| {
                    let bound = cert.tail(pt.x)?;
                    Ok(entry(pt, bound, pt.estimate - pt.ci_low))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        CertificateKind::Moment => (
            "bound >= estimate - 5 SE",
            report
                .points
                .iter()
                .map(|pt| {
                    let bound = cert.moment(pt.x)?;
                    Ok(entry(pt, bound, MOMENT_SLACK_SE * pt.se))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        CertificateKind::ExpMoment => (
            "estimate <= 2 + 3 SE",
            report
                .points
                .iter()
                .map(|pt| entry(pt, 2.0, EXP_MOMENT_SLACK_SE * pt.se))
                .collect(),
        ),
    };
    let pass = entries.iter().all(|e| e.pass);
    Ok(Ledger {
        route: cert.route,
        kind: cert.kind,
        slack_rule: rule,
        samples: report.samples,
        entries,
        pass,
    })
}

fn entry(pt: &ReportPoint, bound: f64, slack: f64) -> LedgerEntry {
    LedgerEntry {
        x: pt.x,
        bound,
        empirical: pt.estimate,
        ci_low: pt.ci_low,
        ci_high: pt.ci_high,
        slack,
        pass: bound >= pt.estimate - slack,
    }
}
