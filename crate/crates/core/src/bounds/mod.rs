//! Moment, tail and exponential-moment bounds evaluated from the norms of a
//! function's derivatives.
//!
//! Throughout, `||f^(k)||_{Op,p}` is the `L^p(μ)` norm of `x ↦ |f^(k)(x)|_Op`
//! and `σ²` is the Poincaré constant of `μ`.

mod certificate;
mod estimate;
mod weighted;

use std::f64::consts::{E, SQRT_2};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measures::MeasureSpec;
use crate::poly::MultilinearSpec;

pub use certificate::{Certificate, CertificateKind, Form, MomentFn, Route};
pub use estimate::{profile_from_function, ProfileEstimate, MIN_PROFILE_SAMPLES};
pub use weighted::{
    weighted_moment, weighted_tail, weighted_tail_certificate, weighted_tail_threshold, weighted_tail_window,
    WeightedMomentBounds, WeightedProfile,
};

/// The universal constant `c = 1/(12e)` of the exponential-moment bounds.
pub const EXP_MOMENT_C: f64 = 1.0 / (12.0 * E);

/// `p ↦ ||f^(d)||_{Op,p}`.
pub type TopNormFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct DerivativeProfile {
    pub order: usize,
    pub sigma: f64,
    /// `||f^(k)||_{Op,2}` for `k = 1..order-1`.
    pub norms2: Vec<f64>,
    /// `||f^(d)||_{Op,∞}`.
    pub top_inf: Option<f64>,
    pub top_p: Option<TopNormFn>,
    /// `||f^(k)||_{HS,2}` for `k = 1..order`.
    pub hs2: Option<Vec<f64>>,
    /// Every mixed partial of order `1..d-1` integrates to zero.
    pub centered_derivatives: bool,
    /// `∫ f dμ = 0`.
    pub mean_zero: bool,
    /// `top_inf` is a maximum over sample points, hence only a lower bound.
    pub top_inf_lower_bound: bool,
}

impl std::fmt::Debug for DerivativeProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DerivativeProfile")
            .field("order", &self.order)
            .field("sigma", &self.sigma)
            .field("norms2", &self.norms2)
            .field("top_inf", &self.top_inf)
            .field("top_p", &self.top_p.as_ref().map(|_| ".."))
            .field("hs2", &self.hs2)
            .field("centered_derivatives", &self.centered_derivatives)
            .field("mean_zero", &self.mean_zero)
            .field("top_inf_lower_bound", &self.top_inf_lower_bound)
            .finish()
    }
}

impl DerivativeProfile {
    /// Profile of a mean-zero function with the given operator norms.
    pub fn new(order: usize, sigma: f64, norms2: Vec<f64>, top_inf: Option<f64>) -> Result<Self> {
        let profile = Self {
            order,
            sigma,
            norms2,
            top_inf,
            top_p: None,
            hs2: None,
            centered_derivatives: false,
            mean_zero: true,
            top_inf_lower_bound: false,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidInput("profile order must be at least 1".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma = {} must be positive", self.sigma)));
        }
        if self.norms2.len() != self.order - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.order - 1,
                got: self.norms2.len(),
            });
        }
        let nonneg = |v: f64| v >= 0.0 && !v.is_nan();
        if !self.norms2.iter().copied().all(nonneg) || !self.top_inf.is_none_or(nonneg) {
            return Err(Error::InvalidInput("derivative norms must be nonnegative".into()));
        }
        if let Some(hs) = &self.hs2 {
            if hs.len() != self.order || !hs.iter().copied().all(nonneg) {
                return Err(Error::InvalidInput(format!(
                    "hs2 needs {} nonnegative entries, got {:?}",
                    self.order, hs
                )));
            }
        }
        Ok(())
    }

    /// `||f^(d)||_{Op,p}`: from `top_p` if present, else `top_inf`.
    pub fn top_at(&self, p: f64) -> Option<f64> {
        self.top_p.as_ref().map(|f| f(p)).or(self.top_inf)
    }

    /// Profile of `s · f`.
    pub fn scaled(&self, s: f64) -> Self {
        let a = s.abs();
        let mut out = self.clone();
        out.norms2.iter_mut().for_each(|x| *x *= a);
        out.top_inf = self.top_inf.map(|x| x * a);
        out.top_p = self.top_p.clone().map(|f| Arc::new(move |p| a * f(p)) as TopNormFn);
        out.hs2 = self.hs2.as_ref().map(|v| v.iter().map(|x| x * a).collect());
        out
    }
}

/// `Σ_{k<d} (σp/√2)^k ||f^(k)||_{Op,2} + (σp/√2)^d ||f^(d)||_{Op,p}`, an upper
/// bound on `||f||_p` for mean-zero `f` and `p >= 2`.
pub fn pfstep_moment(profile: &DerivativeProfile, p: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return Err(Error::InvalidInput(format!("moment bound needs p >= 2, got {p}")));
    }
    let top = profile
        .top_at(p)
        .ok_or_else(|| Error::MissingHypothesis("top derivative norm (top_p or top_inf)".into()))?;
    let q = profile.sigma * p / SQRT_2;
    let lower: f64 = profile
        .norms2
        .iter()
        .enumerate()
        .map(|(i, n)| q.powi(i as i32 + 1) * n)
        .sum();
    Ok(lower + q.powi(profile.order as i32) * top)
}

/// The moment bound above packaged as a certificate.
pub fn moment_certificate(profile: &DerivativeProfile) -> Result<Certificate> {
    require_mean_zero(profile)?;
    profile
        .top_at(2.0)
        .ok_or_else(|| Error::MissingHypothesis("top derivative norm (top_p or top_inf)".into()))?;
    let prof = profile.clone();
    let f: MomentFn = Arc::new(move |p| pfstep_moment(&prof, p));
    let mut cert = Certificate::new(Route::DerivativeMoments, Form::Moment(f))
        .with_constant("sigma", profile.sigma)
        .with_constant("d", profile.order)
        .with_constant("norms2", profile.norms2.clone());
    if let Some(top) = profile.top_inf {
        cert = cert.with_constant("top_inf", top);
    }
    cert.exact_inputs = !profile.top_inf_lower_bound || profile.top_p.is_some();
    Ok(cert)
}

fn require_mean_zero(profile: &DerivativeProfile) -> Result<()> {
    if profile.mean_zero {
        Ok(())
    } else {
        Err(Error::MissingHypothesis("f must have mean zero under the measure".into()))
    }
}

/// Certificate `E exp((c/σ) |f/λ|^{1/d}) <= 2` with `c = 1/(12e)`.
///
/// Two routes are tried: operator-norm conditions `||f^(k)||_{Op,2} <= σ^{d-k}`
/// and `||f^(d)||_{Op,∞} <= 1`; and, when every lower mixed partial is
/// centered and `hs2` is known, `||f^(d)||_{HS,2} <= 1` with the same
/// condition on the top derivative. `λ >= 1` is the smallest factor that
/// makes the route's conditions hold; the route with the smaller `λ` wins.
pub fn exp_moment_certificate(profile: &DerivativeProfile) -> Result<Certificate> {
    profile.validate()?;
    require_mean_zero(profile)?;
    let top = profile
        .top_inf
        .ok_or_else(|| Error::MissingHypothesis("||f^(d)||_{Op,inf} is required".into()))?;
    let d = profile.order;
    let sigma = profile.sigma;
    let op_lambda = profile
        .norms2
        .iter()
        .enumerate()
        .map(|(i, n)| n / sigma.powi((d - 1 - i) as i32))
        .fold(top.max(1.0), f64::max);
    let hs_lambda = match (&profile.hs2, profile.centered_derivatives) {
        (Some(hs), true) => Some(hs[d - 1].max(top).max(1.0)),
        _ => None,
    };
    let (route, lambda) = match hs_lambda {
        Some(h) if h < op_lambda => (Route::CenteredExpMoment, h),
        _ => (Route::OperatorNormExpMoment, op_lambda),
    };
    let power = 1.0 / d as f64;
    let coefficient = EXP_MOMENT_C / (sigma * lambda.powf(power));
    let mut cert = Certificate::new(route, Form::ExpMoment { coefficient, power })
        .with_constant("c", EXP_MOMENT_C)
        .with_constant("sigma", sigma)
        .with_constant("d", d)
        .with_constant("norms2", profile.norms2.clone())
        .with_constant("top_inf", top)
        .with_constant("coefficient", coefficient);
    if let Some(hs) = &profile.hs2 {
        cert = cert.with_constant("hs2", hs.clone());
    }
    cert.rescale_lambda = lambda;
    cert.exact_inputs = !profile.top_inf_lower_bound;
    Ok(cert)
}

/// `min(1, e² exp(-η_f(t) / (d e)))` with
/// `η_f(t) = min(√2 t^{1/d} / (σ ||f^(d)||_{Op,∞}^{1/d}), min_k √2 t^{1/k} / (σ ||f^(k)||_{Op,2}^{1/k}))`.
/// Vanishing norms drop out of the minimum.
pub fn korr_tail(profile: &DerivativeProfile, t: f64) -> Result<f64> {
    korr_tail_certificate(profile)?.tail(t)
}

pub fn korr_tail_certificate(profile: &DerivativeProfile) -> Result<Certificate> {
    profile.validate()?;
    require_mean_zero(profile)?;
    let top = profile
        .top_inf
        .ok_or_else(|| Error::MissingHypothesis("||f^(d)||_{Op,inf} is required".into()))?;
    let d = profile.order;
    let mut scales: Vec<(f64, u32)> = profile
        .norms2
        .iter()
        .enumerate()
        .map(|(i, &n)| (n, i as u32 + 1))
        .collect();
    scales.push((top, d as u32));
    let rate = SQRT_2 / (profile.sigma * d as f64 * E);
    let mut cert = Certificate::new(
        Route::DerivativeTail,
        Form::PowerMinTail {
            prefactor: E * E,
            rate,
            scales,
        },
    )
    .with_constant("sigma", profile.sigma)
    .with_constant("d", d)
    .with_constant("norms2", profile.norms2.clone())
    .with_constant("top_inf", top);
    cert.exact_inputs = !profile.top_inf_lower_bound;
    Ok(cert)
}

/// `c = 1/(2γe)`: if `||f||_k <= γk` for every integer `k` then
/// `E exp(c|f|) <= 2`.
pub fn subexp_constant(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidInput(format!("gamma = {gamma} must be positive")));
    }
    Ok(1.0 / (2.0 * gamma * E))
}

/// `||g||_p <= (σp/√2) ||∇g||_p` for mean-zero `g`, `p >= 2`.
pub fn centered_moment_bound(sigma: f64, p: f64, grad_norm_p: f64) -> f64 {
    sigma * p / SQRT_2 * grad_norm_p
}

/// `||g||_p <= ||g||_2 + (σp/√2) ||∇g||_p`, no centering needed.
pub fn moment_bound(sigma: f64, p: f64, norm2: f64, grad_norm_p: f64) -> f64 {
    norm2 + centered_moment_bound(sigma, p, grad_norm_p)
}

/// Exponential-moment and tail certificates for a homogeneous multilinear
/// polynomial of independent centered coordinates.
#[derive(Clone, Debug)]
pub struct MultilinearCertificates {
    pub hs_norm: f64,
    pub sup_norm: f64,
    pub exp_hs: Certificate,
    pub exp_sup: Certificate,
    /// Present when every coordinate has unit variance.
    pub tail_hs: Option<Certificate>,
    pub tail_sup: Option<Certificate>,
}

pub fn multilinear_certificate(spec: &MultilinearSpec, measure: &MeasureSpec) -> Result<MultilinearCertificates> {
    if measure.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: measure.dim(),
        });
    }
    if let Some((coord, mean)) = measure.first_uncentered() {
        return Err(Error::NotCentered { coord, mean });
    }
    let sigma = measure.sigma()?;
    let (_, a) = spec.to_function()?;
    let hs = a.hs_norm();
    let sup = a.max_abs_entry();
    let d = spec.order();
    let n = spec.dim() as f64;
    let inv_d = 1.0 / d as f64;
    let exp_cert = |route, scale: f64| {
        let coefficient = EXP_MOMENT_C / (sigma * scale);
        Certificate::new(route, Form::ExpMoment { coefficient, power: inv_d })
            .with_constant("c", EXP_MOMENT_C)
            .with_constant("sigma", sigma)
            .with_constant("d", d)
            .with_constant("n", spec.dim())
            .with_constant("hs_norm", hs)
            .with_constant("sup_norm", sup)
            .with_constant("coefficient", coefficient)
    };
    let exp_hs = exp_cert(Route::MultilinearHsExpMoment, hs.powf(inv_d));
    let exp_sup = exp_cert(Route::MultilinearSupExpMoment, n.sqrt() * sup.powf(inv_d));
    let tail_cert = |route, scale: f64| {
        // rate √2/(σde); linear and 1/d-power terms share the same scale
        Certificate::new(
            route,
            Form::PowerMinTail {
                prefactor: E * E,
                rate: SQRT_2 / (sigma * d as f64 * E),
                scales: vec![(scale, 1), (scale, d as u32)],
            },
        )
        .with_constant("sigma", sigma)
        .with_constant("d", d)
        .with_constant("n", spec.dim())
        .with_constant("scale", scale)
    };
    let (tail_hs, tail_sup) = if measure.has_unit_variances() {
        (
            Some(tail_cert(Route::MultilinearHsTail, hs)),
            Some(tail_cert(Route::MultilinearSupTail, n.powf(d as f64 / 2.0) * sup)),
        )
    } else {
        (None, None)
    };
    Ok(MultilinearCertificates {
        hs_norm: hs,
        sup_norm: sup,
        exp_hs,
        exp_sup,
        tail_hs,
        tail_sup,
    })
}

/// Tail `min(1, e² exp(-rate · min(t / linear_scale, (t / top_scale)^{1/2})))`
/// used for the linear eigenvalue statistic.
pub fn two_scale_tail(route: Route, rate: f64, linear_scale: f64, top_scale: f64) -> Certificate {
    Certificate::new(
        route,
        Form::PowerMinTail {
            prefactor: E * E,
            rate,
            scales: vec![(linear_scale, 1), (top_scale, 2)],
        },
    )
    .with_constant("rate", rate)
    .with_constant("linear_scale", linear_scale)
    .with_constant("top_scale", top_scale)
}
