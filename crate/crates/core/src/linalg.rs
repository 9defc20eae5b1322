//! Dense symmetric eigenvalue solvers.
//!
//! Two independent routes are provided so that each can serve as the other's
//! oracle: Householder tridiagonalization followed by implicit QL, and the
//! cyclic Jacobi method. A Sturm-sequence bisection for symmetric
//! tridiagonal matrices backs the spectral-gap oracle.
//!
//! Matrices are passed as row-major slices of length `n * n`.

use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;
const MAX_JACOBI_SWEEPS: usize = 100;

fn check_square(a: &[f64], n: usize) -> Result<()> {
    if a.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: a.len(),
        });
    }
    Ok(())
}

/// Reduces a symmetric matrix to tridiagonal form with Householder
/// reflections. Returns `(diagonal, off_diagonal)` where `off[i]` couples
/// rows `i` and `i + 1` (length `n - 1`).
pub fn tridiagonalize(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_square(a, n)?;
    let mut m = a.to_vec();
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let x0 = m[(k + 1) * n + k];
        let norm = (k + 1..n).map(|i| m[i * n + k].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let alpha = if x0 > 0.0 { -norm } else { norm };
        // v = x - alpha e1, normalised
        for i in 0..len {
            v[i] = m[(k + 1 + i) * n + k];
        }
        v[0] -= alpha;
        let vnorm = v[..len].iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            off[k] = x0;
            continue;
        }
        for x in v[..len].iter_mut() {
            *x /= vnorm;
        }
        // w = B v on the trailing block
        for (i, wi) in w[..len].iter_mut().enumerate() {
            let row = (k + 1 + i) * n + k + 1;
            *wi = (0..len).map(|j| m[row + j] * v[j]).sum();
        }
        let kappa: f64 = (0..len).map(|i| v[i] * w[i]).sum();
        for i in 0..len {
            w[i] -= kappa * v[i];
        }
        // B <- B - 2 v q^T - 2 q v^T
        for i in 0..len {
            let row = (k + 1 + i) * n + k + 1;
            for j in 0..len {
                m[row + j] -= 2.0 * (v[i] * w[j] + w[i] * v[j]);
            }
        }
        off[k] = alpha;
        for i in 0..len {
            m[(k + 1 + i) * n + k] = 0.0;
            m[k * n + k + 1 + i] = 0.0;
        }
    }
    if n >= 2 {
        off[n - 2] = m[(n - 1) * n + n - 2];
    }
    let diag = (0..n).map(|i| m[i * n + i]).collect();
    Ok((diag, off))
}

/// Eigenvalues of a symmetric tridiagonal matrix by the implicit QL method
/// with Wilkinson-type shifts. Returned in ascending order.
pub fn tridiagonal_ql(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            got: off.len(),
        });
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues (ascending) of a dense symmetric matrix via tridiagonalization
/// and implicit QL.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let (d, e) = tridiagonalize(a, n)?;
    tridiagonal_ql(&d, &e)
}

/// Eigenvalues (ascending) of a dense symmetric matrix by cyclic Jacobi
/// rotations. Slower than QL; kept as an independent cross-check.
pub fn jacobi_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    check_square(a, n)?;
    let mut m = a.to_vec();
    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    if total == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for _ in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total {
            let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::NoConvergence)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = diag[i] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue (0-based) of a symmetric tridiagonal
/// matrix, by bisection on the Sturm count.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> Result<f64> {
    let n = diag.len();
    if k >= n || off.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "eigenvalue index {k} for a tridiagonal matrix of size {n}"
        )));
    }
    let radius = |i: usize| {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..n).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..n).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x: f64 = StandardNormal.sample(&mut rng);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn diagonal_matrix() {
        let a = [3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0];
        assert_eq!(symmetric_eigenvalues(&a, 3).unwrap(), vec![-1.0, 2.0, 3.0]);
        assert_eq!(jacobi_eigenvalues(&a, 3).unwrap(), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let a = [0.0, 1.0, 1.0, 0.0];
        let ev = symmetric_eigenvalues(&a, 2).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ql_and_jacobi_agree() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (17, 4), (40, 5), (64, 6)] {
            let a = random_symmetric(n, seed);
            let ql = symmetric_eigenvalues(&a, n).unwrap();
            let jac = jacobi_eigenvalues(&a, n).unwrap();
            for (x, y) in ql.iter().zip(&jac) {
                assert!((x - y).abs() < 1e-10, "n={n}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn trace_is_preserved() {
        let n = 30;
        let a = random_symmetric(n, 9);
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let sum: f64 = symmetric_eigenvalues(&a, n).unwrap().iter().sum();
        assert!((trace - sum).abs() < 1e-10);
    }

    #[test]
    fn bisection_matches_ql() {
        let d = [2.0, -1.0, 4.0, 0.5, 3.0];
        let e = [1.0, 0.3, -2.0, 0.7];
        let all = tridiagonal_ql(&d, &e).unwrap();
        for (k, &ev) in all.iter().enumerate() {
            let b = tridiagonal_eigenvalue(&d, &e, k).unwrap();
            assert!((b - ev).abs() < 1e-12, "k={k}: {b} vs {ev}");
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(symmetric_eigenvalues(&[1.0, 2.0, 3.0], 2).is_err());
        assert!(tridiagonal_eigenvalue(&[1.0], &[], 1).is_err());
    }
}
