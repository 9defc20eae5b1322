//! Operator norm `sup_{|v|=1} |T[v, ..., v]|` of a symmetric tensor.
//!
//! For symmetric forms the supremum over independent unit vectors equals
//! the diagonal supremum, so both routes below search the sphere for the
//! extremes of `T[v, ..., v]` on `+T` and `-T`.
//!
//! * [`iterative_op_norm`]: shifted symmetric higher-order power iteration
//!   with random restarts.
//! * [`certified_op_norm`]: deterministic sphere grid plus projected
//!   gradient ascent; only for `dim <= 4`, `order <= 4`.

use rand_distr::{Distribution, StandardNormal};

use super::SymTensor;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpNormMode {
    Iterative,
    Certified,
}

#[derive(Clone, Debug)]
pub struct OpNormOptions {
    pub restarts: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for OpNormOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            tolerance: 1e-10,
            max_iterations: 10_000,
            seed: 0x05ee_d0f0,
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Exact norm for order 1 (Euclidean length).
fn vector_norm(t: &SymTensor) -> f64 {
    t.canonical_entries().map(|(_, x)| x * x).sum::<f64>().sqrt()
}

/// Stopping rule for one power-iteration run.
#[derive(Clone, Copy)]
struct Stop {
    tolerance: f64,
    step: f64,
    max_iterations: usize,
}

/// One run of the shifted power iteration maximising `sign * T[x^d]`.
/// Returns the value and the final iterate.
fn shifted_power_iteration(t: &SymTensor, sign: f64, mut x: Vec<f64>, shift: f64, stop: Stop) -> (f64, Vec<f64>) {
    normalize(&mut x);
    let mut value = sign * t.form(&x);
    for _ in 0..stop.max_iterations {
        let g = t.partial_form(&x);
        let mut y: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| sign * gi + shift * xi).collect();
        if normalize(&mut y) == 0.0 {
            break;
        }
        let next = sign * t.form(&y);
        let step: f64 = y.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        x = y;
        let done = (next - value).abs() <= stop.tolerance * value.abs().max(1.0) && step < stop.step;
        value = next;
        if done {
            break;
        }
    }
    (value, x)
}

/// Runs within this relative distance of the best rough value are polished.
const POLISH_BAND: f64 = 1e-3;

/// Shifted symmetric power iteration with random restarts on `+T` and `-T`.
///
/// The shift is `(d - 1) * ||T||_HS`, which makes the lifted objective convex
/// on the ball and every iteration monotone. Every start is run to a loose
/// tolerance first; only runs that end near the best value are continued to
/// `opts.tolerance`.
pub fn iterative_op_norm(t: &SymTensor, opts: &OpNormOptions) -> f64 {
    if t.order() == 1 {
        return vector_norm(t);
    }
    let hs = t.hs_norm();
    if hs == 0.0 {
        return 0.0;
    }
    let shift = (t.order() - 1) as f64 * hs;
    let n = t.dim();
    let rough = Stop {
        tolerance: opts.tolerance.max(1e-6),
        step: 1e-3,
        max_iterations: opts.max_iterations,
    };
    let fine = Stop {
        tolerance: opts.tolerance,
        step: 1e-7,
        max_iterations: opts.max_iterations,
    };
    let mut runs = Vec::with_capacity(2 * opts.restarts.max(1));
    for restart in 0..opts.restarts.max(1) {
        let mut rng = stream_rng(opts.seed, restart as u64);
        let x0: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        for sign in [1.0, -1.0] {
            let (v, x) = shifted_power_iteration(t, sign, x0.clone(), shift, rough);
            runs.push((sign, v, x));
        }
    }
    let top = runs.iter().fold(0.0f64, |a, r| a.max(r.1));
    let mut polished: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut best = 0.0f64;
    for (sign, v, x) in runs {
        if v < top - POLISH_BAND * top {
            continue;
        }
        // runs that ended at the same point would polish to the same value
        if polished
            .iter()
            .any(|(s, y)| *s == sign && y.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>() < 1e-4)
        {
            continue;
        }
        let (value, y) = shifted_power_iteration(t, sign, x, shift, fine);
        best = best.max(value);
        polished.push((sign, y));
    }
    best
}

/// Exact norms where a closed route exists (order 1: Euclidean length,
/// order 2: largest absolute eigenvalue), the iterative method otherwise.
pub fn op_norm_auto(t: &SymTensor, opts: &OpNormOptions) -> Result<f64> {
    match t.order() {
        1 => Ok(vector_norm(t)),
        2 => {
            let m = t.to_matrix().expect("order-2 tensor");
            let ev = crate::linalg::symmetric_eigenvalues(&m, t.dim())?;
            Ok(ev.iter().fold(0.0f64, |a, x| a.max(x.abs())))
        }
        _ => Ok(iterative_op_norm(t, opts)),
    }
}

const CERTIFIED_MAX: usize = 4;
const GRID_2D: usize = 4_000;
const GRID_SPHERE: usize = 100_000;
const REFINE_STARTS: usize = 10;

/// Near-uniform deterministic points on the unit sphere of R^n.
fn sphere_grid(n: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0]],
        2 => (0..GRID_2D)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / GRID_2D as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci lattice
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..GRID_SPHERE)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / GRID_SPHERE as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            // Hopf coordinates on S^3: sin^2(eta) uniform, two angles uniform.
            let (levels, angles) = (46usize, 47usize);
            let mut pts = Vec::with_capacity(levels * angles * angles);
            let tau = std::f64::consts::TAU;
            for a in 0..levels {
                let u = (a as f64 + 0.5) / levels as f64;
                let (s, c) = (u.sqrt(), (1.0 - u).sqrt());
                for b in 0..angles {
                    let xi1 = tau * (b as f64 + 0.5) / angles as f64;
                    for k in 0..angles {
                        let xi2 = tau * (k as f64 + 0.25) / angles as f64;
                        pts.push(vec![c * xi1.cos(), c * xi1.sin(), s * xi2.cos(), s * xi2.sin()]);
                    }
                }
            }
            pts
        }
    }
}

/// Projected gradient ascent of `sign * T[v^d]` on the sphere with
/// backtracking step control.
fn refine(t: &SymTensor, sign: f64, mut v: Vec<f64>, scale: f64) -> f64 {
    let d = t.order() as f64;
    let mut value = sign * t.form(&v);
    let mut step = 1.0 / (d * scale);
    for _ in 0..2_000 {
        let g = t.partial_form(&v);
        let radial: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
        let tangent: Vec<f64> = g.iter().zip(&v).map(|(gi, vi)| sign * d * (gi - radial * vi)).collect();
        let tnorm = tangent.iter().map(|x| x * x).sum::<f64>().sqrt();
        if tnorm <= 1e-14 * scale {
            break;
        }
        let mut improved = false;
        while step * tnorm > 1e-16 {
            let mut cand: Vec<f64> = v.iter().zip(&tangent).map(|(a, b)| a + step * b).collect();
            normalize(&mut cand);
            let cv = sign * t.form(&cand);
            if cv > value {
                v = cand;
                value = cv;
                improved = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    value
}

/// Deterministic sphere search with local refinement, used as the oracle for
/// [`iterative_op_norm`]. Supported for `dim <= 4` and `order <= 4`.
pub fn certified_op_norm(t: &SymTensor) -> Result<f64> {
    if t.dim() > CERTIFIED_MAX || t.order() > CERTIFIED_MAX {
        return Err(Error::UnsupportedSize {
            dim: t.dim(),
            order: t.order(),
        });
    }
    if t.order() == 1 {
        return Ok(vector_norm(t));
    }
    let scale = t.hs_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let grid = sphere_grid(t.dim());
    let mut best = 0.0f64;
    for sign in [1.0, -1.0] {
        let mut scored: Vec<(f64, usize)> = grid
            .iter()
            .enumerate()
            .map(|(k, v)| (sign * t.form(v), k))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(value, k) in scored.iter().take(REFINE_STARTS) {
            best = best.max(value);
            best = best.max(refine(t, sign, grid[k].clone(), scale));
        }
    }
    Ok(best)
}
