//! Checkable certificates: a closed-form evaluator plus the constants that
//! went into it.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    /// Upper bound on `||f||_p` as a function of `p`.
    Moment,
    /// Upper bound on `P(|f| >= t)` as a function of `t`.
    Tail,
    /// `E exp(a |f|^r) <= 2`.
    ExpMoment,
}

impl CertificateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Moment => "moment",
            Self::Tail => "tail",
            Self::ExpMoment => "exp-moment",
        }
    }
}

/// Which inequality produced a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Iterated moment bound through all derivative orders.
    DerivativeMoments,
    /// Exponential moment under operator-norm conditions on every order.
    OperatorNormExpMoment,
    /// Exponential moment for functions with centered lower derivatives,
    /// under a Hilbert–Schmidt condition on the top derivative.
    CenteredExpMoment,
    /// Multi-scale tail from the moment growth of each derivative.
    DerivativeTail,
    /// Weighted inequality, mixed top term.
    WeightedMomentMixed,
    /// Weighted inequality, Hölder-split top term.
    WeightedMomentHolder,
    /// Weighted inequality before bounding the per-level weight norms.
    WeightedMomentIterated,
    WeightedTail,
    MultilinearHsExpMoment,
    MultilinearSupExpMoment,
    MultilinearHsTail,
    MultilinearSupTail,
    WignerRecenteredExpMoment,
    WignerLinearTail,
}

pub type MomentFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Form {
    ExpMoment { coefficient: f64, power: f64 },
    /// `min(1, prefactor · exp(-rate · min_k (t / scale_k)^{1/k}))`.
    PowerMinTail { prefactor: f64, rate: f64, scales: Vec<(f64, u32)> },
    /// Exponential-type tail inside `t <= (2^{(d+5)/2} C e p)^d`, the `q = p`
    /// moment bound beyond it.
    WeightedTail { c: f64, p: f64, d: u32 },
    Moment(MomentFn),
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ExpMoment { coefficient, power } => f
                .debug_struct("ExpMoment")
                .field("coefficient", coefficient)
                .field("power", power)
                .finish(),
            Self::PowerMinTail { prefactor, rate, scales } => f
                .debug_struct("PowerMinTail")
                .field("prefactor", prefactor)
                .field("rate", rate)
                .field("scales", scales)
                .finish(),
            Self::WeightedTail { c, p, d } => f.debug_struct("WeightedTail").field("c", c).field("p", p).field("d", d).finish(),
            Self::Moment(_) => f.write_str("Moment(..)"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    #[serde(rename = "theorem")]
    pub route: Route,
    pub constants: BTreeMap<String, Value>,
    /// The certificate is stated for `f / rescale_lambda`; 1 when the
    /// hypotheses hold as given.
    pub rescale_lambda: f64,
    /// False when some input is a sampled lower bound rather than an exact
    /// or conservatively estimated value.
    pub exact_inputs: bool,
    #[serde(skip)]
    pub form: Form,
}

pub(crate) fn capped(x: f64) -> f64 {
    if x.is_nan() {
        1.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

impl Form {
    fn kind(&self) -> CertificateKind {
        match self {
            Self::ExpMoment { .. } => CertificateKind::ExpMoment,
            Self::PowerMinTail { .. } | Self::WeightedTail { .. } => CertificateKind::Tail,
            Self::Moment(_) => CertificateKind::Moment,
        }
    }
}

impl Certificate {
    pub fn new(route: Route, form: Form) -> Self {
        Self {
            kind: form.kind(),
            route,
            constants: BTreeMap::new(),
            rescale_lambda: 1.0,
            exact_inputs: true,
            form,
        }
    }

    pub fn with_constant(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.constants.insert(key.to_string(), value.into());
        self
    }

    /// Tail bound at `t`, capped to `[0, 1]`.
    pub fn tail(&self, t: f64) -> Result<f64> {
        match &self.form {
            Form::PowerMinTail { prefactor, rate, scales } => Ok(power_min_tail(*prefactor, *rate, scales, t)),
            Form::WeightedTail { c, p, d } => Ok(super::weighted::weighted_tail_value(*c, *p, *d, t)),
            _ => Err(self.mismatch(CertificateKind::Tail)),
        }
    }

    /// Moment bound at `p`.
    pub fn moment(&self, p: f64) -> Result<f64> {
        match &self.form {
            Form::Moment(f) => f(p),
            _ => Err(self.mismatch(CertificateKind::Moment)),
        }
    }

    /// `(a, r)` with the claim `E exp(a |f|^r) <= 2`.
    pub fn exp_moment(&self) -> Result<(f64, f64)> {
        match self.form {
            Form::ExpMoment { coefficient, power } => Ok((coefficient, power)),
            _ => Err(self.mismatch(CertificateKind::ExpMoment)),
        }
    }

    /// The certified value at `x` (`t` for tails, `p` for moments; the
    /// constant 2 for exponential moments).
    pub fn bound_at(&self, x: f64) -> Result<f64> {
        match self.kind {
            CertificateKind::Tail => self.tail(x),
            CertificateKind::Moment => self.moment(x),
            CertificateKind::ExpMoment => Ok(2.0),
        }
    }

    fn mismatch(&self, wanted: CertificateKind) -> Error {
        Error::KindMismatch {
            certificate: self.kind.as_str(),
            report: wanted.as_str(),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("certificate serialises")
    }
}

pub(crate) fn power_min_tail(prefactor: f64, rate: f64, scales: &[(f64, u32)], t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let eta = scales
        .iter()
        .filter(|(s, _)| *s > 0.0)
        .map(|&(s, k)| (t / s).powf(1.0 / f64::from(k)))
        .fold(f64::INFINITY, f64::min);
    capped(prefactor * (-rate * eta).exp())
}
