//! Multivariate polynomials with exact derivative tensors.
//!
//! Test functions are restricted to polynomials so every derivative tensor is
//! exact and certificate checks carry no numerical-differentiation error.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::MeasureSpec;
use crate::rng::stream_rng;
use crate::tensor::{canonical_count, OpNormOptions, SymTensor};

#[derive(Clone, Debug, PartialEq)]
struct Term {
    /// (variable, exponent) pairs with exponent > 0, ascending variable.
    factors: Vec<(usize, u32)>,
    coeff: f64,
}

/// A polynomial on R^n as a map from exponent vectors to coefficients.
/// Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyFunction {
    dim: usize,
    terms: BTreeMap<Vec<u32>, f64>,
    sparse: Vec<Term>,
}

impl PolyFunction {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
            sparse: Vec::new(),
        }
    }

    /// Sums the given terms; exponent vectors must have length `dim`.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut map: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (exps, coeff) in terms {
            if exps.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: exps.len(),
                });
            }
            if !coeff.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient {coeff}")));
            }
            *map.entry(exps).or_insert(0.0) += coeff;
        }
        Ok(Self::from_map(dim, map))
    }

    fn from_map(dim: usize, mut terms: BTreeMap<Vec<u32>, f64>) -> Self {
        terms.retain(|_, c| *c != 0.0);
        let sparse = terms
            .iter()
            .map(|(exps, &coeff)| Term {
                factors: exps
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e))
                    .collect(),
                coeff,
            })
            .collect();
        Self { dim, terms, sparse }
    }

    /// `coeff * prod_i x_i^{exps_i}`.
    pub fn monomial(exps: Vec<u32>, coeff: f64) -> Self {
        let dim = exps.len();
        Self::from_map(dim, BTreeMap::from([(exps, coeff)]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.sparse
            .iter()
            .map(|t| t.coeff * t.factors.iter().map(|&(i, e)| x[i].powi(e as i32)).product::<f64>())
            .sum()
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Symbolic partial derivative in variable `i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = BTreeMap::new();
        for (exps, &c) in &self.terms {
            if exps[i] == 0 {
                continue;
            }
            let mut e = exps.clone();
            let k = e[i];
            e[i] -= 1;
            *out.entry(e).or_insert(0.0) += c * f64::from(k);
        }
        Self::from_map(self.dim, out)
    }

    /// Symbolic mixed partial along a tuple of variables.
    pub fn partial_multi(&self, vars: &[usize]) -> Self {
        vars.iter().fold(self.clone(), |p, &i| p.partial(i))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.derivative_tensor(1, x)?.canonical_entries().map(|(_, v)| v).collect())
    }

    /// The tensor of all `k`-th order partial derivatives at `x`.
    pub fn derivative_tensor(&self, k: usize, x: &[f64]) -> Result<SymTensor> {
        if k == 0 {
            return Err(Error::InvalidInput("derivative order must be at least 1".into()));
        }
        self.check_point(x)?;
        let mut values = vec![0.0; canonical_count(self.dim, k)];
        let mut counts = Vec::new();
        let mut sorted = Vec::with_capacity(k);
        for term in &self.sparse {
            let total: u32 = term.factors.iter().map(|f| f.1).sum();
            if (total as usize) < k {
                continue;
            }
            counts.clear();
            counts.resize(term.factors.len(), 0u32);
            sub_multisets(&term.factors, k as u32, 0, &mut counts, &mut |m| {
                let mut v = term.coeff;
                sorted.clear();
                for (&(i, e), &mi) in term.factors.iter().zip(m) {
                    for j in 0..mi {
                        v *= f64::from(e - j);
                    }
                    v *= x[i].powi((e - mi) as i32);
                    sorted.extend(std::iter::repeat_n(i, mi as usize));
                }
                values[rank_sorted(self.dim, &sorted)] += v;
            });
        }
        let mut slot = 0;
        SymTensor::from_fn(self.dim, k, |_| {
            slot += 1;
            values[slot - 1]
        })
    }

    /// `a * self + b * other`.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut map = BTreeMap::new();
        for (e, &c) in &self.terms {
            *map.entry(e.clone()).or_insert(0.0) += a * c;
        }
        for (e, &c) in &other.terms {
            *map.entry(e.clone()).or_insert(0.0) += b * c;
        }
        Ok(Self::from_map(self.dim, map))
    }

    pub fn scaled(&self, c: f64) -> Self {
        let map = self.terms.iter().map(|(e, &v)| (e.clone(), c * v)).collect();
        Self::from_map(self.dim, map)
    }

    pub fn add_constant(&self, c: f64) -> Self {
        let mut map = self.terms.clone();
        *map.entry(vec![0; self.dim]).or_insert(0.0) += c;
        Self::from_map(self.dim, map)
    }

    /// Exact mean under a product measure, from the coordinates' raw
    /// moments. `None` if some required moment is infinite or unknown.
    pub fn mean(&self, measure: &MeasureSpec) -> Option<f64> {
        if measure.dim() != self.dim {
            return None;
        }
        let mut acc = 0.0;
        for (exps, &c) in &self.terms {
            let mut m = c;
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    m *= measure.coord(i).moment(e)?;
                }
            }
            acc += m;
        }
        Some(acc)
    }

    /// `self - E self`, exactly.
    pub fn centered(&self, measure: &MeasureSpec) -> Option<Self> {
        Some(self.add_constant(-self.mean(measure)?))
    }

    /// Whether every mixed partial of order `1..order` has mean zero under
    /// `measure`, checked symbolically.
    pub fn has_centered_derivatives(&self, measure: &MeasureSpec, order: usize) -> bool {
        for k in 1..order {
            let table = crate::tensor::IndexTable::clone_tuples(self.dim, k);
            for vars in table {
                match self.partial_multi(&vars).mean(measure) {
                    Some(m) if m.abs() <= 1e-12 * (1.0 + self.coefficient_scale()) => {}
                    _ => return false,
                }
            }
        }
        true
    }

    fn coefficient_scale(&self) -> f64 {
        self.terms.values().fold(0.0, |a: f64, c| a.max(c.abs()))
    }

    /// Random polynomial with standard normal coefficients on every monomial
    /// of total degree `1..=degree` (and a constant term).
    pub fn random_dense(dim: usize, degree: u32, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0x9017);
        let mut terms = Vec::new();
        let mut exps = vec![0u32; dim];
        all_exponents(dim, degree, 0, &mut exps, &mut |e| {
            let c: f64 = StandardNormal.sample(&mut rng);
            terms.push((e.to_vec(), c));
        });
        Self::from_terms(dim, terms).expect("well-formed random terms")
    }

    /// Random point with coordinates uniform in `[-scale, scale]`.
    pub fn random_point(dim: usize, scale: f64, rng: &mut impl Rng) -> Vec<f64> {
        (0..dim).map(|_| rng.random_range(-scale..scale)).collect()
    }
}

fn all_exponents(dim: usize, budget: u32, pos: usize, exps: &mut [u32], f: &mut impl FnMut(&[u32])) {
    if pos == dim {
        f(exps);
        return;
    }
    for e in 0..=budget {
        exps[pos] = e;
        all_exponents(dim, budget - e, pos + 1, exps, f);
    }
    exps[pos] = 0;
}

fn sub_multisets(
    factors: &[(usize, u32)],
    remaining: u32,
    pos: usize,
    counts: &mut [u32],
    f: &mut impl FnMut(&[u32]),
) {
    if pos == factors.len() {
        if remaining == 0 {
            f(counts);
        }
        return;
    }
    let rest_cap: u32 = factors[pos + 1..].iter().map(|x| x.1).sum();
    let lo = remaining.saturating_sub(rest_cap);
    let hi = factors[pos].1.min(remaining);
    for m in lo..=hi {
        counts[pos] = m;
        sub_multisets(factors, remaining - m, pos + 1, counts, f);
    }
    counts[pos] = 0;
}

fn rank_sorted(dim: usize, sorted: &[usize]) -> usize {
    let order = sorted.len();
    let mut r = 0;
    let mut lo = 0;
    for (k, &i) in sorted.iter().enumerate() {
        let rest = order - k - 1;
        for v in lo..i {
            r += canonical_count(dim - v, rest);
        }
        lo = i;
    }
    r
}

/// Homogeneous multilinear chaos `sum_{i1<...<id} a_{i1...id} X_{i1}...X_{id}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilinearSpec {
    dim: usize,
    order: usize,
    coeffs: BTreeMap<Vec<usize>, f64>,
}

impl MultilinearSpec {
    /// Indices may be listed in any order but must be pairwise distinct
    /// whenever the coefficient is nonzero.
    pub fn new(dim: usize, order: usize, coeffs: impl IntoIterator<Item = (Vec<usize>, f64)>) -> Result<Self> {
        if order == 0 || order > dim {
            return Err(Error::InvalidInput(format!(
                "multilinear order {order} needs 1 <= order <= dim = {dim}"
            )));
        }
        let mut map = BTreeMap::new();
        for (mut idx, value) in coeffs {
            if idx.len() != order {
                return Err(Error::ArityMismatch { order, got: idx.len() });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(Error::InvalidInput(format!("index {bad} out of range for dim {dim}")));
            }
            idx.sort_unstable();
            if idx.windows(2).any(|w| w[0] == w[1]) {
                if value != 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "coefficient {value} on repeated index {idx:?}"
                    )));
                }
                continue;
            }
            if map.insert(idx.clone(), value).is_some() {
                return Err(Error::InvalidInput(format!("duplicate coefficient for {idx:?}")));
            }
        }
        map.retain(|_, v| *v != 0.0);
        Ok(Self { dim, order, coeffs: map })
    }

    /// Standard normal coefficients on every strictly increasing tuple.
    pub fn random(dim: usize, order: usize, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, 0x3417);
        let tuples = crate::tensor::IndexTable::clone_tuples(dim, order)
            .into_iter()
            .filter(|t| t.windows(2).all(|w| w[0] < w[1]));
        let coeffs: Vec<_> = tuples.map(|t| (t, StandardNormal.sample(&mut rng))).collect();
        Self::new(dim, order, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.coeffs.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    /// The polynomial and its symmetrized hypermatrix (zero on repeated
    /// indices); `derivative_tensor(f, d, x) == A` at every `x`.
    pub fn to_function(&self) -> Result<(PolyFunction, SymTensor)> {
        let terms = self.coeffs.iter().map(|(idx, &a)| {
            let mut e = vec![0u32; self.dim];
            for &i in idx {
                e[i] = 1;
            }
            (e, a)
        });
        let f = PolyFunction::from_terms(self.dim, terms)?;
        let a = SymTensor::from_entries(
            self.dim,
            self.order,
            self.coeffs.iter().map(|(k, &v)| (k.as_slice(), v)),
        )?;
        Ok((f, a))
    }
}

/// Alias matching the operation name used across the crate.
pub fn from_multilinear(spec: &MultilinearSpec) -> Result<(PolyFunction, SymTensor)> {
    spec.to_function()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolyJson {
    pub dim: usize,
    pub terms: Vec<PolyTermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolyTermJson {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MultilinearJson {
    pub dim: usize,
    pub order: usize,
    pub coeffs: Vec<crate::tensor::EntryJson>,
}

impl Serialize for PolyFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            dim: self.dim,
            terms: self
                .terms()
                .map(|(e, c)| PolyTermJson {
                    exponents: e.to_vec(),
                    coeff: c,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = PolyJson::deserialize(d)?;
        PolyFunction::from_terms(json.dim, json.terms.into_iter().map(|t| (t.exponents, t.coeff)))
            .map_err(serde::de::Error::custom)
    }
}

impl Serialize for MultilinearSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MultilinearJson {
            dim: self.dim,
            order: self.order,
            coeffs: self
                .coefficients()
                .map(|(i, v)| crate::tensor::EntryJson {
                    index: i.to_vec(),
                    value: v,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultilinearSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = MultilinearJson::deserialize(d)?;
        MultilinearSpec::new(json.dim, json.order, json.coeffs.into_iter().map(|e| (e.index, e.value)))
            .map_err(serde::de::Error::custom)
    }
}

/// Outcome of a finite-difference check of
/// `|∇ |f^{(k-1)}(x)|_Op| <= |f^{(k)}(x)|_Op`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradNormCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl GradNormCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// Central-difference modulus of the gradient of `x ↦ |f^{(k-1)}(x)|_Op`
/// against `|f^{(k)}(x)|_Op`.
pub fn gradnorm_lemma_check(f: &PolyFunction, k: usize, x: &[f64], h: f64) -> Result<GradNormCheck> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("order k = {k} must be at least 2")));
    }
    if h <= 0.0 {
        return Err(Error::InvalidInput(format!("step h = {h} must be positive")));
    }
    f.check_point(x)?;
    let opts = OpNormOptions::default();
    let phi = |p: &[f64]| -> Result<f64> {
        let t = f.derivative_tensor(k - 1, p)?;
        crate::tensor::op_norm_auto(&t, &opts)
    };
    let mut grad_sq = 0.0;
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let up = phi(&xp)?;
        xp[i] = x[i] - h;
        let down = phi(&xp)?;
        xp[i] = x[i];
        grad_sq += ((up - down) / (2.0 * h)).powi(2);
    }
    let rhs = crate::tensor::op_norm_auto(&f.derivative_tensor(k, x)?, &opts)?;
    Ok(GradNormCheck {
        lhs: grad_sq.sqrt(),
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{Distribution as Dist, MeasureSpec};

    fn xy() -> PolyFunction {
        PolyFunction::monomial(vec![1, 1], 1.0)
    }

    /// Term-by-term evaluation written independently of `eval`.
    fn eval_oracle(f: &PolyFunction, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (exps, c) in f.terms() {
            let mut m = c;
            for (xi, &e) in x.iter().zip(exps) {
                for _ in 0..e {
                    m *= xi;
                }
            }
            acc += m;
        }
        acc
    }

    #[test]
    fn eval_examples() {
        assert_eq!(xy().eval(&[2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(PolyFunction::zero(3).eval(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(xy().eval(&[1.0]).is_err());
        let f = PolyFunction::random_dense(3, 3, 17);
        let x = [0.3, -1.1, 0.8];
        assert!((f.eval(&x).unwrap() - eval_oracle(&f, &x)).abs() < 1e-12);
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let f = PolyFunction::from_terms(2, [(vec![1, 0], 1.0), (vec![1, 0], -1.0), (vec![0, 2], 0.0)]).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn derivative_examples() {
        let h = xy().derivative_tensor(2, &[5.0, -7.0]).unwrap();
        assert_eq!(h.to_matrix().unwrap(), vec![0.0, 1.0, 1.0, 0.0]);
        let f = PolyFunction::monomial(vec![2, 1], 1.0);
        assert_eq!(f.gradient(&[1.0, 1.0]).unwrap(), vec![2.0, 1.0]);
        let zero = f.derivative_tensor(4, &[1.0, 2.0]).unwrap();
        assert_eq!(zero.hs_norm(), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let f = PolyFunction::random_dense(3, 4, 4);
        let x = [0.4, -0.3, 0.9];
        let h = 1e-5;
        for k in 1..=3usize {
            let t = f.derivative_tensor(k, &x).unwrap();
            if k == 1 {
                for i in 0..3 {
                    let mut p = x;
                    p[i] += h;
                    let up = f.eval(&p).unwrap();
                    p[i] -= 2.0 * h;
                    let down = f.eval(&p).unwrap();
                    let fd = (up - down) / (2.0 * h);
                    let exact = t.get(&[i]).unwrap();
                    assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1e-8).max(1.0));
                }
            } else {
                // difference the exact (k-1)-tensor along coordinate i
                for (idx, exact) in t.canonical_entries() {
                    let i = idx[k - 1];
                    let rest = &idx[..k - 1];
                    let mut p = x;
                    p[i] += h;
                    let up = f.derivative_tensor(k - 1, &p).unwrap().get(rest).unwrap();
                    p[i] -= 2.0 * h;
                    let down = f.derivative_tensor(k - 1, &p).unwrap().get(rest).unwrap();
                    let fd = (up - down) / (2.0 * h);
                    assert!(
                        (fd - exact).abs() <= 1e-5 * exact.abs().max(1.0),
                        "k={k} idx={idx:?}: {fd} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn derivative_tensor_is_linear() {
        let f = PolyFunction::random_dense(2, 3, 1);
        let g = PolyFunction::random_dense(2, 3, 2);
        let x = [0.7, -0.2];
        let combo = f.linear_combination(2.0, &g, -0.5).unwrap();
        let lhs = combo.derivative_tensor(2, &x).unwrap();
        let rhs = f
            .derivative_tensor(2, &x)
            .unwrap()
            .linear_combination(2.0, &g.derivative_tensor(2, &x).unwrap(), -0.5)
            .unwrap();
        for ((_, a), (_, b)) in lhs.canonical_entries().zip(rhs.canonical_entries()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn multilinear_examples() {
        let spec = MultilinearSpec::new(2, 2, [(vec![0, 1], 1.0)]).unwrap();
        let (f, a) = spec.to_function().unwrap();
        assert_eq!(f, xy());
        assert_eq!(a.to_matrix().unwrap(), vec![0.0, 1.0, 1.0, 0.0]);
        assert!((a.hs_norm() - 2f64.sqrt()).abs() < 1e-15);

        let spec = MultilinearSpec::new(3, 2, [(vec![0, 1], 1.0), (vec![0, 2], 1.0), (vec![1, 2], 1.0)]).unwrap();
        assert!((spec.to_function().unwrap().1.hs_norm() - 6f64.sqrt()).abs() < 1e-15);

        assert!(MultilinearSpec::new(3, 2, [(vec![1, 1], 2.0)]).is_err());
        assert!(MultilinearSpec::new(3, 2, [(vec![0, 1], 1.0), (vec![1, 0], 2.0)]).is_err());
    }

    #[test]
    fn multilinear_top_derivative_is_hypermatrix() {
        let spec = MultilinearSpec::random(4, 3, 9).unwrap();
        let (f, a) = spec.to_function().unwrap();
        for x in [[0.0; 4], [1.0, -2.0, 0.5, 3.0]] {
            assert_eq!(f.derivative_tensor(3, &x).unwrap(), a);
        }
        for (idx, v) in a.canonical_entries() {
            if idx.windows(2).any(|w| w[0] == w[1]) {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn multilinear_hs_bounded_by_entry_count() {
        for seed in 0..20 {
            for (n, d) in [(3, 2), (5, 3), (4, 4), (6, 2)] {
                let (_, a) = MultilinearSpec::random(n, d, seed).unwrap().to_function().unwrap();
                // d! * C(n, d) nonzero entries, at most n^d
                let count = crate::numeric::factorial(d as u64) * crate::numeric::binomial(n as u64, d as u64) as f64;
                assert!(count <= (n as f64).powi(d as i32));
                let bound = (n as f64).powf(d as f64 / 2.0) * a.max_abs_entry();
                assert!(a.hs_norm() <= count.sqrt() * a.max_abs_entry() + 1e-12);
                assert!(a.hs_norm() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn multilinear_is_centered_under_centered_inputs() {
        let gauss = MeasureSpec::iid(Dist::standard_gaussian(), 4);
        let (f, _) = MultilinearSpec::random(4, 3, 2).unwrap().to_function().unwrap();
        assert_eq!(f.mean(&gauss), Some(0.0));
        assert!(f.has_centered_derivatives(&gauss, 3));
        let expo = MeasureSpec::iid(Dist::Exponential { rate: 1.0 }, 4);
        assert!(!f.has_centered_derivatives(&expo, 3));
    }

    #[test]
    fn json_round_trip() {
        let f = PolyFunction::random_dense(2, 2, 3);
        let back: PolyFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(f, back);
        let spec = MultilinearSpec::random(4, 2, 3).unwrap();
        let back: MultilinearSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn gradnorm_examples() {
        // |f'(x)| = |x| for f = x1 x2: unit gradient, equality in the lemma
        let c = gradnorm_lemma_check(&xy(), 2, &[0.3, 0.4], 1e-5).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-6);
        assert!((c.rhs - 1.0).abs() < 1e-9);
        // constant Hessian norm, vanishing third derivative
        let c = gradnorm_lemma_check(&xy(), 3, &[0.3, 0.4], 1e-5).unwrap();
        assert!(c.lhs < 1e-6);
        assert_eq!(c.rhs, 0.0);
        let cube = PolyFunction::monomial(vec![3], 1.0);
        let c = gradnorm_lemma_check(&cube, 2, &[1.0], 1e-5).unwrap();
        assert!((c.lhs - 6.0).abs() < 1e-6);
        assert!((c.rhs - 6.0).abs() < 1e-12);
        assert!(gradnorm_lemma_check(&cube, 1, &[1.0], 1e-5).is_err());
    }
}
