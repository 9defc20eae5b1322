//! Shipped measure/function fixtures.

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::bounds::Route;
use crate::error::Result;
use crate::measures::{Distribution, MeasureSpec};
use crate::poly::{MultilinearSpec, PolyFunction};
use crate::rmt::{Poly1, WignerEnsemble};

/// Entry of the fixture inventory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureInfo {
    pub name: String,
    pub routes: Vec<Route>,
    pub measure: String,
    pub function: String,
    pub ground_truth: &'static str,
}

/// `f = x1 x2 / √2` under the 2-D standard gaussian.
pub fn product_fixture() -> (PolyFunction, MeasureSpec) {
    let f = PolyFunction::monomial(vec![1, 1], 1.0 / SQRT_2);
    (f, MeasureSpec::iid(Distribution::standard_gaussian(), 2))
}

/// `(order, dim)` of the multilinear fixtures.
pub const MULTILINEAR_SHAPES: [(usize, usize); 6] = [(2, 2), (2, 5), (2, 10), (3, 3), (3, 5), (3, 10)];

#[derive(Clone, Debug)]
pub struct MultilinearFixture {
    pub name: String,
    pub spec: MultilinearSpec,
}

/// Random chaos with unit variance under any unit-variance product measure.
pub fn multilinear_fixture(order: usize, dim: usize) -> Result<MultilinearFixture> {
    let raw = MultilinearSpec::random(dim, order, 1000 + 10 * dim as u64 + order as u64)?;
    let norm = raw.coefficients().map(|(_, a)| a * a).sum::<f64>().sqrt();
    let spec = MultilinearSpec::new(dim, order, raw.coefficients().map(|(i, a)| (i.to_vec(), a / norm)))?;
    Ok(MultilinearFixture {
        name: format!("chaos-d{order}-n{dim}"),
        spec,
    })
}

pub fn multilinear_fixtures() -> Result<Vec<MultilinearFixture>> {
    MULTILINEAR_SHAPES.iter().map(|&(d, n)| multilinear_fixture(d, n)).collect()
}

/// Unit-variance gaussian and laplace products on `R^dim`.
pub fn chaos_measures(dim: usize) -> [(&'static str, MeasureSpec); 2] {
    [
        ("gaussian", MeasureSpec::iid(Distribution::standard_gaussian(), dim)),
        ("laplace", MeasureSpec::iid(Distribution::unit_laplace(), dim)),
    ]
}

/// Catalog laws used for the moment-inequality sweep.
pub fn catalog_laws() -> Vec<Distribution> {
    vec![
        Distribution::standard_gaussian(),
        Distribution::unit_laplace(),
        Distribution::Exponential { rate: 1.0 },
        Distribution::Uniform01,
    ]
}

/// Degrees of freedom of the Student-type weighted fixture.
pub const STUDENT_NU: f64 = 40.0;

/// Mean-zero function on the Student line with `||f^(k)||_{Op,2} <= 1`
/// below the top order and `|f^(d)| <= 1`.
#[derive(Clone, Debug)]
pub struct WeightedFixture {
    pub order: usize,
    pub f: PolyFunction,
    /// `||f^(k)||_{Op,2}`, `k = 1..order-1`, exact.
    pub norms2: Vec<f64>,
    /// The constant `|f^(order)|`.
    pub top: f64,
}

/// `f = x` for order 1, `f = (x² - m2) / (2 √m2)` with `m2 = E x²` for order 2.
pub fn weighted_fixture(order: usize, nu: f64) -> Result<WeightedFixture> {
    let m2 = nu / (nu - 2.0);
    match order {
        1 => Ok(WeightedFixture {
            order,
            f: PolyFunction::monomial(vec![1], 1.0),
            norms2: vec![],
            top: 1.0,
        }),
        2 => {
            let r = m2.sqrt();
            Ok(WeightedFixture {
                order,
                f: PolyFunction::from_terms(1, [(vec![2], 0.5 / r), (vec![0], -0.5 * r)])?,
                norms2: vec![1.0],
                top: 1.0 / r,
            })
        }
        _ => Err(crate::Error::InvalidInput(format!("weighted fixtures exist for order 1 and 2, not {order}"))),
    }
}

/// `N = 100` gaussian Wigner matrices with `f(x) = x²/2`.
pub fn wigner_fixture() -> Result<(WignerEnsemble, Poly1)> {
    Ok((
        WignerEnsemble::new(100, Distribution::standard_gaussian())?,
        Poly1::new(vec![0.0, 0.0, 0.5])?,
    ))
}

pub fn inventory() -> Vec<FixtureInfo> {
    let mut out = vec![FixtureInfo {
        name: "gaussian-product".into(),
        routes: vec![Route::OperatorNormExpMoment, Route::CenteredExpMoment, Route::DerivativeTail],
        measure: "standard gaussian on R^2".into(),
        function: "x1 x2 / sqrt(2)".into(),
        ground_truth: "monte-carlo",
    }];
    for &(d, n) in &MULTILINEAR_SHAPES {
        for law in ["gaussian", "laplace"] {
            out.push(FixtureInfo {
                name: format!("chaos-d{d}-n{n}-{law}"),
                routes: vec![Route::DerivativeTail, Route::MultilinearHsTail, Route::MultilinearSupTail],
                measure: format!("unit-variance {law} on R^{n}"),
                function: format!("normalised random multilinear form of order {d}"),
                ground_truth: "monte-carlo",
            });
        }
    }
    for (d, f) in [(1, "x"), (2, "(x^2 - m2) / (2 sqrt(m2))")] {
        out.push(FixtureInfo {
            name: format!("student-weighted-d{d}"),
            routes: vec![
                Route::WeightedMomentMixed,
                Route::WeightedMomentHolder,
                Route::WeightedMomentIterated,
                Route::WeightedTail,
            ],
            measure: format!("student t, nu = {STUDENT_NU}, weight kappa sqrt(1 + x^2)"),
            function: f.into(),
            ground_truth: "monte-carlo; weight constant from the weighted spectral-gap oracle",
        });
    }
    out.push(FixtureInfo {
        name: "wigner-n100-quadratic".into(),
        routes: vec![Route::WignerRecenteredExpMoment, Route::WignerLinearTail],
        measure: "gaussian wigner matrix, N = 100".into(),
        function: "x^2 / 2".into(),
        ground_truth: "monte-carlo with independent calibration run",
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_is_stable_and_complete() {
        let a = serde_json::to_string(&inventory()).unwrap();
        let b = serde_json::to_string(&inventory()).unwrap();
        assert_eq!(a, b);
        let inv = inventory();
        assert!(!inv.is_empty());
        assert!(inv.iter().all(|f| !f.routes.is_empty()));
    }

    #[test]
    fn chaos_fixtures_have_unit_variance() {
        for fx in multilinear_fixtures().unwrap() {
            let s: f64 = fx.spec.coefficients().map(|(_, a)| a * a).sum();
            assert!((s - 1.0).abs() < 1e-12, "{}", fx.name);
        }
    }

    #[test]
    fn weighted_fixtures_are_normalised() {
        let nu = STUDENT_NU;
        let m2 = nu / (nu - 2.0);
        let mu = MeasureSpec::new(vec![Distribution::Student { nu }]).unwrap();
        for d in [1, 2] {
            let fx = weighted_fixture(d, nu).unwrap();
            assert!(fx.f.mean(&mu).unwrap().abs() < 1e-12);
            assert!(fx.top <= 1.0);
        }
        // f' = x / √m2 has unit L² norm
        let fx = weighted_fixture(2, nu).unwrap();
        let g = fx.f.gradient(&[2.0]).unwrap()[0];
        assert!((g - 2.0 / m2.sqrt()).abs() < 1e-14);
        assert!(weighted_fixture(3, nu).is_err());
    }
}
