//! Linear eigenvalue statistics of Wigner matrices `Ξ = (ξ_jk / √N)`.

use std::f64::consts::{E, SQRT_2};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{two_scale_tail, Certificate, Form, Route, EXP_MOMENT_C};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::measures::Distribution;
use crate::numeric::{mean_and_se, CompensatedSum};
use crate::rng::stream_rng;
use crate::verify::{exp_moment_estimate, Estimate};

pub const MIN_CALIBRATION_DRAWS: usize = 500;
/// Largest tolerated fraction of draws lost to eigensolver failures.
pub const MAX_DISCARD_FRACTION: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct WignerEnsemble {
    n: usize,
    entry: Distribution,
    sigma2: f64,
}

impl WignerEnsemble {
    /// Entries on and above the diagonal are i.i.d. with law `entry`, which
    /// must carry a certified Poincaré constant.
    pub fn new(n: usize, entry: Distribution) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("matrix size must be at least 2, got {n}")));
        }
        entry.validate()?;
        let sigma2 = entry.poincare_constant()?;
        Ok(Self { n, entry, sigma2 })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn entry(&self) -> &Distribution {
        &self.entry
    }

    /// Poincaré constant `σ²` of the entry law.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Poincaré constant `2σ²/N` of the ordered eigenvalues.
    pub fn sigma_n2(&self) -> f64 {
        2.0 * self.sigma2 / self.n as f64
    }

    /// Row-major scaled matrix for draw `draw` of a run seeded with `seed`.
    pub fn matrix(&self, seed: u64, draw: u64) -> Vec<f64> {
        let n = self.n;
        let scale = 1.0 / (n as f64).sqrt();
        let mut rng = stream_rng(seed, draw);
        let mut a = vec![0.0; n * n];
        for j in 0..n {
            for k in j..n {
                let x = self.entry.sample(&mut rng) * scale;
                a[j * n + k] = x;
                a[k * n + j] = x;
            }
        }
        a
    }
}

/// Ascending eigenvalues of `M` draws, stored draw-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSample {
    n: usize,
    eigenvalues: Vec<f64>,
    discarded: usize,
    sigma_n2: f64,
}

impl EigenSample {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn draws(&self) -> usize {
        self.eigenvalues.len() / self.n
    }

    pub fn discarded(&self) -> usize {
        self.discarded
    }

    pub fn sigma_n2(&self) -> f64 {
        self.sigma_n2
    }

    pub fn draw(&self, i: usize) -> &[f64] {
        &self.eigenvalues[i * self.n..(i + 1) * self.n]
    }

    pub fn iter_draws(&self) -> impl Iterator<Item = &[f64]> {
        self.eigenvalues.chunks_exact(self.n)
    }

    fn par_draws(&self) -> impl IndexedParallelIterator<Item = &[f64]> {
        self.eigenvalues.par_chunks_exact(self.n)
    }
}

pub fn sample_ensemble(ens: &WignerEnsemble, m: usize, seed: u64) -> Result<EigenSample> {
    if m == 0 {
        return Err(Error::InvalidInput("need at least one draw".into()));
    }
    let draws: Vec<Option<Vec<f64>>> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let a = ens.matrix(seed, i);
            match symmetric_eigenvalues(&a, ens.n) {
                Ok(ev) => Some(ev),
                Err(e) => {
                    log::warn!("draw {i}: eigensolver failed ({e}); discarded");
                    None
                }
            }
        })
        .collect();
    let discarded = draws.iter().filter(|d| d.is_none()).count();
    if discarded > 0 && discarded as f64 >= MAX_DISCARD_FRACTION * m as f64 {
        return Err(Error::TooManyDiscarded { discarded, total: m });
    }
    Ok(EigenSample {
        n: ens.n,
        eigenvalues: draws.into_iter().flatten().flatten().collect(),
        discarded,
        sigma_n2: ens.sigma_n2(),
    })
}

/// A real polynomial `Σ c_i x^i`, coefficients in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly1 {
    pub coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("polynomial coefficients must be finite".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| i as f64 * c)
            .collect();
        Self { coeffs }
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    /// `sup |f''|`, finite only for degree at most 2.
    pub fn second_derivative_sup(&self) -> Option<f64> {
        match self.degree() {
            None | Some(0) | Some(1) => Some(0.0),
            Some(2) => Some((2.0 * self.coeffs[2]).abs()),
            Some(_) => None,
        }
    }
}

/// Per-index means (with standard errors) from an independent run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub n: usize,
    pub draws: usize,
    pub f: Poly1,
    pub mean_lambda: Vec<f64>,
    pub se_lambda: Vec<f64>,
    pub mean_f: Vec<f64>,
    pub se_f: Vec<f64>,
    pub mean_df: Vec<f64>,
    pub se_df: Vec<f64>,
    /// `E Σ_i f'(λ_i)²`.
    pub grad_sq: f64,
    /// Standard errors of the constants subtracted from `S_N` and `S̃_N`.
    pub se_offset_linear: f64,
    pub se_offset_recentered: f64,
}

fn column_stats(es: &EigenSample, g: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
    (0..es.n)
        .map(|j| {
            let col: Vec<f64> = es.iter_draws().map(|d| g(d[j])).collect();
            mean_and_se(&col)
        })
        .unzip()
}

pub fn calibrate(ens: &WignerEnsemble, f: &Poly1, m_cal: usize, seed: u64) -> Result<Calibration> {
    if m_cal < MIN_CALIBRATION_DRAWS {
        return Err(Error::InvalidInput(format!(
            "calibration needs at least {MIN_CALIBRATION_DRAWS} draws, got {m_cal}"
        )));
    }
    let es = sample_ensemble(ens, m_cal, seed)?;
    let df = f.derivative();
    let (mean_lambda, se_lambda) = column_stats(&es, |x| x);
    let (mean_f, se_f) = column_stats(&es, |x| f.eval(x));
    let (mean_df, se_df) = column_stats(&es, |x| df.eval(x));
    let grad: Vec<f64> = es.iter_draws().map(|d| sum(d.iter().map(|&x| df.eval(x).powi(2)))).collect();
    let linear: Vec<f64> = es.iter_draws().map(|d| sum(d.iter().map(|&x| f.eval(x)))).collect();
    let recentered: Vec<f64> = es
        .iter_draws()
        .map(|d| sum(d.iter().zip(&mean_df).map(|(&x, &b)| f.eval(x) - x * b)))
        .collect();
    Ok(Calibration {
        n: ens.n,
        draws: es.draws(),
        f: f.clone(),
        mean_lambda,
        se_lambda,
        mean_f,
        se_f,
        mean_df,
        se_df,
        grad_sq: mean_and_se(&grad).0,
        se_offset_linear: mean_and_se(&linear).1,
        se_offset_recentered: mean_and_se(&recentered).1,
    })
}

fn sum(values: impl Iterator<Item = f64>) -> f64 {
    values.collect::<CompensatedSum>().value()
}

fn check_calibration(es: &EigenSample, f: &Poly1, cal: &Calibration) -> Result<()> {
    if cal.n != es.n {
        return Err(Error::CalibrationMismatch(format!(
            "calibrated for N = {}, sample has N = {}",
            cal.n, es.n
        )));
    }
    if &cal.f != f {
        return Err(Error::CalibrationMismatch("calibrated for a different function".into()));
    }
    Ok(())
}

/// `S_N = Σ_j (f(λ_j) - E f(λ_j))` per draw.
pub fn linear_stat(es: &EigenSample, f: &Poly1, cal: &Calibration) -> Result<Vec<f64>> {
    check_calibration(es, f, cal)?;
    Ok(es
        .par_draws()
        .map(|d| sum(d.iter().zip(&cal.mean_f).map(|(&x, &m)| f.eval(x) - m)))
        .collect())
}

/// `S̃_N = S_N - Σ_j (λ_j - E λ_j) E f'(λ_j)` per draw.
pub fn recentered_stat(es: &EigenSample, f: &Poly1, cal: &Calibration) -> Result<Vec<f64>> {
    check_calibration(es, f, cal)?;
    Ok(es
        .par_draws()
        .map(|d| {
            let terms = (0..es.n).map(|j| {
                let x = d[j];
                (f.eval(x) - cal.mean_f[j]) - (x - cal.mean_lambda[j]) * cal.mean_df[j]
            });
            sum(terms)
        })
        .collect())
}

/// Certificate `E exp(c N^{1/4} / (√2 σ L^{1/2}) |S̃_N|^{1/2}) <= 2`.
pub fn wigner_exp_certificate(ens: &WignerEnsemble, l: f64) -> Result<Certificate> {
    check_l(l)?;
    let sigma = ens.sigma2.sqrt();
    let n = ens.n as f64;
    let coefficient = EXP_MOMENT_C * n.powf(0.25) / (SQRT_2 * sigma * l.sqrt());
    Ok(Certificate::new(
        Route::WignerRecenteredExpMoment,
        Form::ExpMoment { coefficient, power: 0.5 },
    )
    .with_constant("c", EXP_MOMENT_C)
    .with_constant("sigma", sigma)
    .with_constant("sigma_n2", ens.sigma_n2())
    .with_constant("N", ens.n)
    .with_constant("L", l)
    .with_constant("coefficient", coefficient))
}

/// Tail certificate for `S_N`, with `grad_sq = E Σ_i f'(λ_i)²`.
pub fn wigner_tail_certificate(ens: &WignerEnsemble, l: f64, grad_sq: f64) -> Result<Certificate> {
    check_l(l)?;
    if !(grad_sq >= 0.0 && grad_sq.is_finite()) {
        return Err(Error::InvalidInput(format!("gradient integral {grad_sq} must be finite and nonnegative")));
    }
    let sigma = ens.sigma2.sqrt();
    let root_n = (ens.n as f64).sqrt();
    Ok(two_scale_tail(
        Route::WignerLinearTail,
        1.0 / (sigma * 2.0 * E),
        grad_sq.sqrt() / root_n,
        l / root_n,
    )
    .with_constant("sigma", sigma)
    .with_constant("d", 2)
    .with_constant("N", ens.n)
    .with_constant("L", l)
    .with_constant("grad_sq", grad_sq))
}

fn check_l(l: f64) -> Result<()> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidInput(format!("sup |f''| = {l} must be finite and positive")));
    }
    Ok(())
}

/// Both certificates, with `L = sup |f''|` and the gradient integral taken
/// from the calibration run.
pub fn rmt_certificates(ens: &WignerEnsemble, l: f64, cal: &Calibration) -> Result<(Certificate, Certificate)> {
    Ok((wigner_exp_certificate(ens, l)?, wigner_tail_certificate(ens, l, cal.grad_sq)?))
}

/// Estimate of `E exp(a |S̃_N|^{1/2})`. The standard error combines the
/// Monte Carlo error with the effect of moving the calibrated offset by one
/// standard error either way.
pub fn recentered_exp_moment(values: &[f64], a: f64, cal: &Calibration) -> Result<Estimate> {
    let mc = exp_moment_estimate(values, a, 0.5)?;
    let shift = cal.se_offset_recentered;
    let shifted = |s: f64| {
        let v: Vec<f64> = values.iter().map(|x| x + s).collect();
        exp_moment_estimate(&v, a, 0.5).map(|e| e.estimate)
    };
    let se_cal = (shifted(shift)? - shifted(-shift)?).abs() / 2.0;
    Ok(Estimate {
        estimate: mc.estimate,
        se: mc.se.hypot(se_cal),
    })
}

/// Hoffman–Wielandt: `Σ (λ_i(A) - λ_i(B))² <= ||A - B||²_HS` for symmetric
/// `A`, `B`. Returns both sides.
pub fn hoffman_wielandt(a: &[f64], b: &[f64], n: usize) -> Result<(f64, f64)> {
    let la = symmetric_eigenvalues(a, n)?;
    let lb = symmetric_eigenvalues(b, n)?;
    let lhs = sum(la.iter().zip(&lb).map(|(x, y)| (x - y).powi(2)));
    let rhs = sum(a.iter().zip(b).map(|(x, y)| (x - y).powi(2)));
    Ok((lhs, rhs))
}

/// Random symmetric matrix with standard normal entries, for fixtures.
pub fn random_symmetric(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    for j in 0..n {
        for k in j..n {
            let x: f64 = rng.sample(rand_distr::StandardNormal);
            a[j * n + k] = x;
            a[k * n + j] = x;
        }
    }
    a
}
