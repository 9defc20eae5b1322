//! Bounds under a weighted Poincaré inequality `Var(f) <= ∫ |∇f|² w² dμ`.

use std::f64::consts::{E, SQRT_2};

use super::certificate::{capped, Certificate, Form, Route};
use crate::error::{Error, Result};

/// Norms entering the weighted moment bounds at a fixed `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedProfile {
    pub order: usize,
    pub p: f64,
    /// `||w||_{2^k p}` for `k = 1..order` (a prefix is enough for the mixed
    /// bound, which stops at `k = order - 1`).
    pub wnorms: Vec<f64>,
    /// `||f^(k)||_{Op,2}` for `k = 1..order-1`.
    pub norms2: Vec<f64>,
    /// `||w |f^(d)|_Op||_{2^{d-1} p}`.
    pub top_mixed: Option<f64>,
    /// `||f^(d)||_{Op, 2^d p}`.
    pub top2dp: Option<f64>,
}

/// Right-hand sides of the weighted moment inequality. `mixed` uses the
/// mixed top term, `holder` splits it by Hölder, `iterated` keeps the
/// per-level weight norms (never larger than `mixed`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedMomentBounds {
    pub mixed: Option<f64>,
    pub holder: Option<f64>,
    pub iterated: Option<f64>,
}

impl WeightedProfile {
    fn wnorm(&self, k: usize) -> Result<f64> {
        self.wnorms.get(k - 1).copied().ok_or(Error::MissingWeightNorm {
            q: 2f64.powi(k as i32) * self.p,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidInput("order must be at least 1".into()));
        }
        if !(self.p >= 2.0) {
            return Err(Error::InvalidInput(format!("weighted moments need p >= 2, got {}", self.p)));
        }
        if self.norms2.len() != self.order - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.order - 1,
                got: self.norms2.len(),
            });
        }
        let all = self
            .wnorms
            .iter()
            .chain(&self.norms2)
            .chain(self.top_mixed.iter())
            .chain(self.top2dp.iter());
        if all.clone().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput("weighted profile entries must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Evaluates the weighted moment bounds that the profile has inputs for.
pub fn weighted_moment(profile: &WeightedProfile) -> Result<WeightedMomentBounds> {
    profile.validate()?;
    let d = profile.order;
    let p = profile.p;
    if profile.top_mixed.is_none() && profile.top2dp.is_none() {
        return Err(Error::MissingHypothesis(
            "a top-derivative term (top_mixed or top2dp) is required".into(),
        ));
    }
    // (2^{(k-2)/2} p ||w||_{2^k p})^k
    let level = |k: usize, w: f64| (2f64.powf((k as f64 - 2.0) / 2.0) * p * w).powi(k as i32);
    let mut lower = 0.0;
    for k in 1..d {
        lower += level(k, profile.wnorm(k)?) * profile.norms2[k - 1];
    }
    let top_factor = 2f64.powf((d as f64 - 2.0) / 2.0) * p;

    let mixed = match profile.top_mixed {
        Some(top) => {
            let w = if d > 1 { profile.wnorm(d - 1)? } else { 1.0 };
            Some(lower + top_factor.powi(d as i32) * w.powi(d as i32 - 1) * top)
        }
        None => None,
    };
    let holder = match profile.top2dp {
        Some(top) => Some(lower + level(d, profile.wnorm(d)?) * top),
        None => None,
    };
    let iterated = match profile.top_mixed {
        Some(top) => {
            // Π_{j<k} (2^j p/√2) · Π_{j=1..k} ||w||_{2^j p} for level k
            let mut sum = 0.0;
            let mut prefix = 1.0;
            for k in 1..d {
                prefix *= 2f64.powi(k as i32 - 1) * p / SQRT_2 * profile.wnorm(k)?;
                sum += prefix * profile.norms2[k - 1];
            }
            prefix *= 2f64.powi(d as i32 - 1) * p / SQRT_2;
            Some(sum + prefix * top)
        }
        None => None,
    };
    Ok(WeightedMomentBounds { mixed, holder, iterated })
}

/// Smallest admissible `C` in the weighted tail bound; no restriction for
/// `d = 1`.
pub fn weighted_tail_threshold(d: u32) -> f64 {
    if d <= 1 {
        0.0
    } else {
        2f64.powf(-(f64::from(d) - 1.0) / 2.0)
    }
}

/// Upper end `(2^{(d+5)/2} C e p)^d` of the exponential-type window.
pub fn weighted_tail_window(c: f64, p: f64, d: u32) -> f64 {
    (2f64.powf((f64::from(d) + 5.0) / 2.0) * c * E * p).powi(d as i32)
}

pub(crate) fn weighted_tail_value(c: f64, p: f64, d: u32, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let df = f64::from(d);
    let scale = 2f64.powf((df + 5.0) / 2.0) * c;
    let pre = (df / E).exp();
    if t <= weighted_tail_window(c, p, d) {
        capped(pre * (-df * t.powf(1.0 / df) / (scale * E)).exp())
    } else {
        capped(pre * ((scale * p).powf(df) / t).powf(p))
    }
}

/// Tail bound for mean-zero `f` with `||f^(k)||_{Op,2} <= 1`,
/// `||f^(d)||_{Op,∞} <= 1` and `||w||_{2^d p} <= C`.
pub fn weighted_tail(c: f64, p: f64, d: u32, t: f64) -> Result<f64> {
    weighted_tail_certificate(c, p, d)?.tail(t)
}

pub fn weighted_tail_certificate(c: f64, p: f64, d: u32) -> Result<Certificate> {
    if d == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    if !(p >= 2.0) {
        return Err(Error::InvalidInput(format!("weighted tail needs p >= 2, got {p}")));
    }
    let threshold = weighted_tail_threshold(d);
    if !(c > 0.0 && c >= threshold) {
        return Err(Error::ConstantTooSmall { c, threshold, order: d as usize });
    }
    Ok(Certificate::new(Route::WeightedTail, Form::WeightedTail { c, p, d })
        .with_constant("C", c)
        .with_constant("p", p)
        .with_constant("d", d)
        .with_constant("window", weighted_tail_window(c, p, d)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wp(order: usize, p: f64, wnorms: Vec<f64>, norms2: Vec<f64>, mixed: Option<f64>, top2dp: Option<f64>) -> WeightedProfile {
        WeightedProfile {
            order,
            p,
            wnorms,
            norms2,
            top_mixed: mixed,
            top2dp,
        }
    }

    #[test]
    fn constant_weight_first_order() {
        let sigma = 1.3;
        let p = 3.0;
        let b = weighted_moment(&wp(1, p, vec![sigma], vec![], None, Some(0.7))).unwrap();
        let expected = p / SQRT_2 * sigma * 0.7;
        assert!((b.holder.unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn second_order_arithmetic() {
        let b = weighted_moment(&wp(2, 2.0, vec![1.0, 1.0], vec![1.0], None, Some(1.0))).unwrap();
        assert!((b.holder.unwrap() - (SQRT_2 + 4.0)).abs() < 1e-14);
        assert!(b.mixed.is_none());
    }

    #[test]
    fn iterated_never_exceeds_mixed() {
        // increasing weight norms, as Lyapunov's inequality forces
        let prof = wp(3, 2.5, vec![1.1, 1.4, 2.0], vec![0.8, 0.6], Some(0.9), Some(1.0));
        let b = weighted_moment(&prof).unwrap();
        assert!(b.iterated.unwrap() <= b.mixed.unwrap() + 1e-12);
        // equal weight norms: the two coincide
        let flat = wp(3, 2.5, vec![1.2, 1.2, 1.2], vec![0.8, 0.6], Some(0.9), None);
        let b = weighted_moment(&flat).unwrap();
        assert!((b.iterated.unwrap() - b.mixed.unwrap()).abs() < 1e-12 * b.mixed.unwrap());
    }

    #[test]
    fn missing_weight_norm_names_the_index() {
        let err = weighted_moment(&wp(2, 2.0, vec![1.0], vec![1.0], None, Some(1.0))).unwrap_err();
        assert!(matches!(err, Error::MissingWeightNorm { q } if q == 8.0), "{err:?}");
        assert!(matches!(
            weighted_moment(&wp(2, 2.0, vec![1.0, 1.0], vec![1.0], None, None)),
            Err(Error::MissingHypothesis(_))
        ));
        assert!(weighted_moment(&wp(1, 1.0, vec![1.0], vec![], None, Some(1.0))).is_err());
    }

    #[test]
    fn tail_window_endpoint() {
        let end = weighted_tail_window(1.0, 2.0, 1);
        assert!((end - 16.0 * E).abs() < 1e-12);
        let at_end = weighted_tail(1.0, 2.0, 1, end).unwrap();
        assert!((at_end - (1.0 / E).exp() * (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(weighted_tail(1.0, 2.0, 1, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn tail_inside_and_beyond_window() {
        let s = 2f64.powf(3.5);
        // t = 100 lies inside the window (≈ 3782) for d = 2, C = 1, p = 2
        assert!(weighted_tail_window(1.0, 2.0, 2) > 100.0);
        let inside = weighted_tail(1.0, 2.0, 2, 100.0).unwrap();
        let expected = ((2.0 / E).exp() * (-2.0 * 10.0 / (s * E)).exp()).min(1.0);
        assert!((inside - expected).abs() < 1e-15);
        // beyond it the q = p moment bound takes over
        let t = 1e4;
        let beyond = weighted_tail(1.0, 2.0, 2, t).unwrap();
        let expected = (2.0 / E).exp() * ((s * 2.0).powi(2) / t).powi(2);
        assert!((beyond - expected).abs() < 1e-15);
    }

    #[test]
    fn tail_is_continuous_at_window_end() {
        // the moment bound at q = p meets the exponential form at q_0 = p
        for (c, p, d) in [(1.0, 2.0, 1u32), (1.5, 3.0, 2), (0.8, 2.0, 3)] {
            let end = weighted_tail_window(c, p, d);
            let a = weighted_tail_value(c, p, d, end * (1.0 - 1e-12));
            let b = weighted_tail_value(c, p, d, end * (1.0 + 1e-12));
            assert!((a - b).abs() < 1e-9 * a.max(1e-300), "{a} vs {b}");
        }
    }

    #[test]
    fn threshold_on_c() {
        assert!(matches!(
            weighted_tail_certificate(0.5, 2.0, 2),
            Err(Error::ConstantTooSmall { .. })
        ));
        assert!(weighted_tail_certificate(2f64.powf(-0.5), 2.0, 2).is_ok());
        assert!(weighted_tail_certificate(0.1, 2.0, 1).is_ok());
    }
}
