//! Spectral-gap oracle for one-dimensional measures.
//!
//! The Poincaré constant of `p(x) dx` on `[a, b]` is `1 / λ₁`, where `λ₁` is
//! the first nonzero eigenvalue of the Neumann problem `-(p a u')' = λ p u`
//! (`a ≡ 1` unweighted). The problem is discretised with cell-centred finite
//! volumes: cell masses `p(x_i) h`, face conductances `p a / h` at cell
//! boundaries. After the similarity transform by `sqrt(mass)` the matrix is
//! symmetric tridiagonal and `λ₁` comes from Sturm bisection.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigenvalue;

pub const MIN_GRIDPOINTS: usize = 200;
/// Largest relative change of `λ₁` accepted when the grid is doubled.
pub const REFINEMENT_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub grid: usize,
    pub lambda1: f64,
    pub sigma2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub interval: (f64, f64),
    /// One row per grid, coarse first. The reported values come from the
    /// finest grid.
    pub rows: Vec<OracleRow>,
    pub lambda1: f64,
    pub sigma2: f64,
}

impl OracleReport {
    /// CSV with columns `grid, lambda1, sigma2`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn neumann_gap(
    density: &dyn Fn(f64) -> f64,
    conductance: &dyn Fn(f64) -> f64,
    (a, b): (f64, f64),
    cells: usize,
) -> Result<f64> {
    let h = (b - a) / cells as f64;
    let mass: Vec<f64> = (0..cells).map(|i| density(a + (i as f64 + 0.5) * h) * h).collect();
    if let Some(i) = mass.iter().position(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::InvalidInput(format!(
            "density must be positive on the interval; fails at x = {}",
            a + (i as f64 + 0.5) * h
        )));
    }
    // interior faces only: the Neumann ends carry no flux
    let flux: Vec<f64> = (1..cells)
        .map(|i| {
            let x = a + i as f64 * h;
            density(x) * conductance(x) / h
        })
        .collect();
    let diag: Vec<f64> = (0..cells)
        .map(|i| {
            let left = if i > 0 { flux[i - 1] } else { 0.0 };
            let right = if i + 1 < cells { flux[i] } else { 0.0 };
            (left + right) / mass[i]
        })
        .collect();
    let off: Vec<f64> = (0..cells - 1).map(|i| -flux[i] / (mass[i] * mass[i + 1]).sqrt()).collect();
    tridiagonal_eigenvalue(&diag, &off, 1)
}

fn run_oracle(
    density: &dyn Fn(f64) -> f64,
    conductance: &dyn Fn(f64) -> f64,
    interval: (f64, f64),
    gridpoints: usize,
) -> Result<OracleReport> {
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidInput(format!("oracle interval {interval:?} must be finite and non-empty")));
    }
    if gridpoints < MIN_GRIDPOINTS {
        return Err(Error::InvalidInput(format!(
            "oracle needs at least {MIN_GRIDPOINTS} gridpoints, got {gridpoints}"
        )));
    }
    let coarse = neumann_gap(density, conductance, interval, gridpoints)?;
    let fine = neumann_gap(density, conductance, interval, 2 * gridpoints)?;
    if !(coarse > 0.0 && fine > 0.0) || ((fine - coarse) / fine).abs() >= REFINEMENT_TOLERANCE {
        return Err(Error::OracleUnreliable { coarse, fine });
    }
    Ok(OracleReport {
        interval,
        rows: vec![
            OracleRow { grid: gridpoints, lambda1: coarse, sigma2: 1.0 / coarse },
            OracleRow { grid: 2 * gridpoints, lambda1: fine, sigma2: 1.0 / fine },
        ],
        lambda1: fine,
        sigma2: 1.0 / fine,
    })
}

/// `λ₁` and `σ² = 1/λ₁` for the (possibly unnormalised) `density` on
/// `interval`, checked against a grid twice as fine.
pub fn spectral_gap_oracle(
    density: &dyn Fn(f64) -> f64,
    interval: (f64, f64),
    gridpoints: usize,
) -> Result<OracleReport> {
    run_oracle(density, &|_| 1.0, interval, gridpoints)
}

/// Weighted variant: `Var(f) <= σ² ∫ a f'² dμ` with `σ² = 1/λ₁` of
/// `-(p a u')' = λ p u`. For the weight `w = κ sqrt(a)` one gets `κ² = σ²`.
pub fn weighted_spectral_gap_oracle(
    density: &dyn Fn(f64) -> f64,
    weight_sq: &dyn Fn(f64) -> f64,
    interval: (f64, f64),
    gridpoints: usize,
) -> Result<OracleReport> {
    run_oracle(density, weight_sq, interval, gridpoints)
}

/// Smallest interval `[a, b]` around `center` with at most `mass_tol / 2`
/// of the mass on either side, located by quadrature in `x = center +
/// scale·tan θ` so that heavy tails are resolved.
pub fn truncation_interval(density: &dyn Fn(f64) -> f64, center: f64, scale: f64, mass_tol: f64) -> (f64, f64) {
    let half = std::f64::consts::FRAC_PI_2;
    let dtheta = 2.0 * half / TAN_STEPS as f64;
    let x_of = |k: usize| center + scale * (-half + k as f64 * dtheta).tan();
    let mut cumulative = Vec::with_capacity(TAN_STEPS + 1);
    let mut acc = 0.0;
    cumulative.push(0.0);
    tan_trapezoid(density, center, scale, |area| {
        acc += area;
        cumulative.push(acc);
    });
    let total = acc;
    let cut = 0.5 * mass_tol * total;
    let lo = cumulative.partition_point(|&c| c <= cut).saturating_sub(1).max(1);
    let hi = cumulative.partition_point(|&c| c < total - cut).min(TAN_STEPS - 1);
    (x_of(lo), x_of(hi))
}

const TAN_STEPS: usize = 200_000;

/// Trapezoid rule for `∫ g` over the real line in `x = center + scale·tan θ`,
/// handing each panel's area to `panel`. Non-finite integrand values (at
/// the endpoints) count as zero.
fn tan_trapezoid(g: &dyn Fn(f64) -> f64, center: f64, scale: f64, mut panel: impl FnMut(f64)) {
    let half = std::f64::consts::FRAC_PI_2;
    let dtheta = 2.0 * half / TAN_STEPS as f64;
    let integrand = |k: usize| {
        let th = -half + k as f64 * dtheta;
        let c = th.cos();
        if c <= 0.0 {
            return 0.0;
        }
        let v = g(center + scale * th.tan()) * scale / (c * c);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut prev = integrand(0);
    for k in 1..=TAN_STEPS {
        let cur = integrand(k);
        panel(0.5 * (prev + cur) * dtheta);
        prev = cur;
    }
}

/// `∫ g` over the real line.
pub(crate) fn line_integral(g: &dyn Fn(f64) -> f64, center: f64, scale: f64) -> f64 {
    let mut acc = crate::numeric::CompensatedSum::new();
    tan_trapezoid(g, center, scale, |a| acc.add(a));
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_gap_is_pi_squared() {
        let r = spectral_gap_oracle(&|_| 1.0, (0.0, 1.0), 400).unwrap();
        assert!((r.lambda1 - PI * PI).abs() < 1e-3 * PI * PI, "{}", r.lambda1);
    }

    #[test]
    fn gaussian_gap_is_one() {
        let r = spectral_gap_oracle(&|x| (-0.5 * x * x).exp(), (-8.0, 8.0), 2000).unwrap();
        assert!((r.lambda1 - 1.0).abs() < 1e-3, "{}", r.lambda1);
    }

    #[test]
    fn exponential_on_short_interval() {
        // Neumann eigenfunctions e^{x/2}(cos kx - sin kx / 2k) give
        // λ₁ = 1/4 + π²/L² on [0, L]
        let r = spectral_gap_oracle(&|x| (-x).exp(), (0.0, 40.0), 2000).unwrap();
        let exact = 0.25 + PI * PI / 1600.0;
        assert!((r.lambda1 - exact).abs() < 1e-3 * exact, "{} vs {exact}", r.lambda1);
        // within 2.5% of the whole-line constant 4, but not 2%
        assert!((r.sigma2 - 4.0).abs() < 0.025 * 4.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(spectral_gap_oracle(&|_| 1.0, (0.0, 1.0), 100).is_err());
        assert!(spectral_gap_oracle(&|_| 1.0, (1.0, 0.0), 400).is_err());
        assert!(spectral_gap_oracle(&|x| if x < 0.5 { 1.0 } else { 0.0 }, (0.0, 1.0), 400).is_err());
    }

    #[test]
    fn unresolved_density_is_flagged() {
        // a sharp well that a coarse grid cannot resolve
        let r = spectral_gap_oracle(&|x| (-(x * 400.0).powi(2)).exp() + 1e-3, (-1.0, 1.0), 200);
        assert!(matches!(r, Err(Error::OracleUnreliable { .. })), "{r:?}");
    }

    #[test]
    fn weighted_oracle_constant_weight_scales() {
        let r = weighted_spectral_gap_oracle(&|_| 1.0, &|_| 4.0, (0.0, 1.0), 400).unwrap();
        assert!((r.lambda1 - 4.0 * PI * PI).abs() < 4e-3 * PI * PI);
    }

    #[test]
    fn truncation_of_student_density() {
        let nu = 5.0f64;
        let p = |x: f64| (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0);
        let (a, b) = truncation_interval(&p, 0.0, 1.0, 1e-10);
        assert!((a + b).abs() < 1e-6 * b);
        // tail mass of t_5 beyond 100 is about 3e-9 and beyond 300 about 1e-11
        assert!(b > 100.0 && b < 400.0, "{b}");
    }

    #[test]
    fn csv_columns() {
        let r = spectral_gap_oracle(&|_| 1.0, (0.0, 1.0), 200).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("grid,lambda1,sigma2\n200,"));
        assert_eq!(text.lines().count(), 3);
    }
}
