//! Monte Carlo estimation of a [`DerivativeProfile`] for a polynomial.

use std::sync::Arc;

use rayon::prelude::*;

use super::{DerivativeProfile, TopNormFn};
use crate::error::{Error, Result};
use crate::measures::MeasureSpec;
use crate::numeric::{mean_and_se, CompensatedSum};
use crate::poly::PolyFunction;
use crate::tensor::{certified_op_norm, op_norm_auto, OpNormOptions, SymTensor};

pub const MIN_PROFILE_SAMPLES: usize = 10_000;

/// A profile whose `L²` norms are Monte Carlo estimates, with their
/// standard errors.
#[derive(Clone, Debug)]
pub struct ProfileEstimate {
    pub profile: DerivativeProfile,
    pub se_norms2: Vec<f64>,
    pub se_hs2: Vec<f64>,
    pub samples: usize,
}

impl ProfileEstimate {
    /// The profile with every estimated norm raised by `z` standard errors.
    pub fn inflated(&self, z: f64) -> DerivativeProfile {
        let mut p = self.profile.clone();
        for (n, se) in p.norms2.iter_mut().zip(&self.se_norms2) {
            *n += z * se;
        }
        if let Some(hs) = p.hs2.as_mut() {
            for (n, se) in hs.iter_mut().zip(&self.se_hs2) {
                *n += z * se;
            }
        }
        p
    }
}

fn exact_op_norm(t: &SymTensor) -> Result<f64> {
    let it = op_norm_auto(t, &OpNormOptions::default())?;
    if t.order() > 2 && t.dim() <= 4 && t.order() <= 4 {
        // the grid search can only raise a power-iteration result
        return Ok(it.max(certified_op_norm(t)?));
    }
    Ok(it)
}

/// `sqrt(mean v²)` with a delta-method standard error.
fn l2_norm(squares: &[f64]) -> (f64, f64) {
    let (mean, se) = mean_and_se(squares);
    let norm = mean.max(0.0).sqrt();
    let se = if norm > 0.0 { se / (2.0 * norm) } else { 0.0 };
    (norm, se)
}

/// Estimates `||f^(k)||_{Op,2}` (`k < d`) and `||f^(k)||_{HS,2}` (`k <= d`)
/// from `m` sample points. When `deg f <= d` the top derivative is
/// constant and its norm is computed exactly; otherwise `top_inf` is the
/// sample maximum, flagged as a lower bound, and `top_p` the sample `L^p`
/// norm.
pub fn profile_from_function(
    f: &PolyFunction,
    measure: &MeasureSpec,
    d: usize,
    m: usize,
    seed: u64,
) -> Result<ProfileEstimate> {
    if d == 0 {
        return Err(Error::InvalidInput("profile order must be at least 1".into()));
    }
    if m < MIN_PROFILE_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "profile estimation needs at least {MIN_PROFILE_SAMPLES} samples, got {m}"
        )));
    }
    if f.dim() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: measure.dim(),
        });
    }
    let sigma = measure.sigma()?;
    let constant_top = f.degree() as usize <= d;
    let sampled_orders = if constant_top { d - 1 } else { d };
    let samples = measure.sample(m, seed);
    let opts = OpNormOptions::default();

    // per row: (op², hs²) for k = 1..sampled_orders, flattened
    let rows: Vec<Vec<(f64, f64)>> = samples
        .par_rows()
        .map(|x| {
            (1..=sampled_orders)
                .map(|k| {
                    let t = f.derivative_tensor(k, x).expect("valid order and point");
                    let op = op_norm_auto(&t, &opts).expect("finite tensor");
                    let hs = t.hs_norm();
                    (op, hs)
                })
                .collect()
        })
        .collect();

    let column = |k: usize, pick: fn(&(f64, f64)) -> f64| -> Vec<f64> { rows.iter().map(|r| pick(&r[k])).collect() };
    let mut norms2 = Vec::with_capacity(d - 1);
    let mut se_norms2 = Vec::with_capacity(d - 1);
    let mut hs2 = Vec::with_capacity(d);
    let mut se_hs2 = Vec::with_capacity(d);
    for k in 0..d.min(sampled_orders) {
        let (hs, hs_se) = l2_norm(&column(k, |v| v.1 * v.1));
        if k + 1 < d {
            let (op, op_se) = l2_norm(&column(k, |v| v.0 * v.0));
            norms2.push(op);
            se_norms2.push(op_se);
        }
        hs2.push(hs);
        se_hs2.push(hs_se);
    }

    let (top_inf, top_p, lower_bound) = if constant_top {
        let top = f.derivative_tensor(d, &vec![0.0; f.dim()])?;
        hs2.push(top.hs_norm());
        se_hs2.push(0.0);
        (exact_op_norm(&top)?, None, false)
    } else {
        let tops = Arc::new(column(d - 1, |v| v.0));
        let max = tops.iter().fold(0.0f64, |a, &v| a.max(v));
        let values = tops.clone();
        let top_p: TopNormFn = Arc::new(move |p| {
            let s: CompensatedSum = values.iter().map(|v| v.powf(p)).collect();
            (s.value() / values.len() as f64).powf(1.0 / p)
        });
        (max, Some(top_p), true)
    };

    let mean_zero = f.mean(measure).is_some_and(|mu| mu.abs() <= 1e-12);
    let profile = DerivativeProfile {
        order: d,
        sigma,
        norms2,
        top_inf: Some(top_inf),
        top_p,
        hs2: Some(hs2),
        centered_derivatives: f.has_centered_derivatives(measure, d),
        mean_zero,
        top_inf_lower_bound: lower_bound,
    };
    profile.validate()?;
    Ok(ProfileEstimate {
        profile,
        se_norms2,
        se_hs2,
        samples: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Distribution;

    fn gauss(n: usize) -> MeasureSpec {
        MeasureSpec::iid(Distribution::standard_gaussian(), n)
    }

    #[test]
    fn product_of_two_coordinates() {
        let f = PolyFunction::from_terms(2, [(vec![1, 1], 1.0)]).unwrap();
        let est = profile_from_function(&f, &gauss(2), 2, 100_000, 7).unwrap();
        let p = &est.profile;
        assert!((p.top_inf.unwrap() - 1.0).abs() < 1e-14);
        assert!(!p.top_inf_lower_bound);
        // E |∇f|² = E (x1² + x2²) = 2
        assert!((p.norms2[0] - 2f64.sqrt()).abs() < 0.02 * 2f64.sqrt());
        assert!(p.mean_zero && p.centered_derivatives);
        let hs = p.hs2.as_ref().unwrap();
        assert!((hs[1] - 2f64.sqrt()).abs() < 1e-15);
        assert!(est.se_norms2[0] > 0.0 && est.se_norms2[0] < 0.01);
    }

    #[test]
    fn top_is_lower_bound_when_degree_exceeds_order() {
        let f = PolyFunction::from_terms(1, [(vec![4], 1.0), (vec![0], -3.0)]).unwrap();
        let est = profile_from_function(&f, &gauss(1), 2, 20_000, 1).unwrap();
        let p = &est.profile;
        assert!(p.top_inf_lower_bound);
        // f'' = 12 x²: sample L^2 norm near 12 sqrt(3)
        let l2 = p.top_at(2.0).unwrap();
        assert!((l2 - 12.0 * 3f64.sqrt()).abs() < 0.1 * l2);
        assert!(p.top_inf.unwrap() >= l2);
        assert!(p.mean_zero);
    }

    #[test]
    fn uncentered_function_is_flagged() {
        let f = PolyFunction::from_terms(1, [(vec![2], 1.0)]).unwrap();
        let est = profile_from_function(&f, &gauss(1), 2, 10_000, 1).unwrap();
        assert!(!est.profile.mean_zero);
    }

    #[test]
    fn rejects_small_samples_and_shape_errors() {
        let f = PolyFunction::from_terms(2, [(vec![1, 1], 1.0)]).unwrap();
        assert!(profile_from_function(&f, &gauss(2), 2, 100, 1).is_err());
        assert!(profile_from_function(&f, &gauss(3), 2, 10_000, 1).is_err());
        assert!(profile_from_function(&f, &gauss(2), 0, 10_000, 1).is_err());
    }

    #[test]
    fn inflation_raises_estimated_norms_only() {
        let f = PolyFunction::from_terms(2, [(vec![1, 1], 1.0)]).unwrap();
        let est = profile_from_function(&f, &gauss(2), 2, 10_000, 3).unwrap();
        let up = est.inflated(5.0);
        assert!(up.norms2[0] > est.profile.norms2[0]);
        assert_eq!(up.top_inf, est.profile.top_inf);
    }
}
