//! Krylov iteration for extreme eigenvalues of Hermitian operators given as
//! matrix-vector products.

use num_complex::Complex64;

use crate::error::{QDiskError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Extreme {
    Largest,
    Smallest,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i == 0 {
            0.0
        } else {
            beta[i - 1] * beta[i - 1]
        };
        d = alpha[i] - x - if i == 0 { 0.0 } else { b2 / d };
        if d == 0.0 {
            d = f64::MIN_POSITIVE;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiagonal_extreme(alpha: &[f64], beta: &[f64], which: Extreme) -> f64 {
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 }
            + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let target = match which {
        Extreme::Largest => k - 1,
        Extreme::Smallest => 0,
    };
    // smallest x with more than `target` eigenvalues below it
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Extreme eigenvalue of a Hermitian operator of size `n` by Lanczos
/// iteration with full reorthogonalization, started from the normalized
/// all-ones vector. Breakdown continues deterministically with the next
/// canonical basis vector, so after `n` steps the result is exact up to
/// rounding. Stops early once the Ritz value has changed by less than
/// `rel_tol` (relative) for three consecutive steps.
pub(crate) fn lanczos_extreme<F>(apply: F, n: usize, rel_tol: f64, which: Extreme) -> Result<f64>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    if n == 0 {
        return Ok(0.0);
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let s = 1.0 / (n as f64).sqrt();
    let mut v = vec![Complex64::new(s, 0.0); n];
    let mut last = f64::NAN;
    let mut stable = 0;
    let mut fallback = 0usize;
    for step in 0..n {
        let mut w = apply(&v);
        let a = dot(&v, &w).re;
        alpha.push(a);
        basis.push(v);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let theta = tridiagonal_extreme(&alpha, &beta, which);
        if !theta.is_finite() {
            return Err(QDiskError::NonConvergence {
                iterations: step + 1,
                last_estimate: theta,
            });
        }
        if (theta - last).abs() <= rel_tol * theta.abs().max(f64::MIN_POSITIVE) {
            stable += 1;
        } else {
            stable = 0;
        }
        last = theta;
        if stable >= 3 || step + 1 == n {
            break;
        }
        let mut b = norm(&w);
        let scale = alpha.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        if b <= 1e-13 * scale {
            // invariant subspace: continue with a fresh canonical direction
            b = 0.0;
            w = loop {
                if fallback >= n {
                    break Vec::new();
                }
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                e[fallback] = Complex64::new(1.0, 0.0);
                fallback += 1;
                for _ in 0..2 {
                    for bv in &basis {
                        let c = dot(bv, &e);
                        for (ei, bi) in e.iter_mut().zip(bv) {
                            *ei -= c * bi;
                        }
                    }
                }
                let ne = norm(&e);
                if ne > 1e-8 {
                    break e.into_iter().map(|x| x / ne).collect();
                }
            };
            if w.is_empty() {
                break;
            }
        } else {
            for wi in w.iter_mut() {
                *wi /= b;
            }
        }
        beta.push(b);
        v = w;
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_bisection_matches_known_spectrum() {
        // tridiag(1, 2, 1) of size k has eigenvalues 2 + 2 cos(pi j / (k + 1))
        let k = 20;
        let alpha = vec![2.0; k];
        let beta = vec![1.0; k - 1];
        let top = tridiagonal_extreme(&alpha, &beta, Extreme::Largest);
        let bottom = tridiagonal_extreme(&alpha, &beta, Extreme::Smallest);
        let pi = std::f64::consts::PI;
        assert!((top - (2.0 + 2.0 * (pi / 21.0).cos())).abs() < 1e-13);
        assert!((bottom - (2.0 - 2.0 * (pi / 21.0).cos())).abs() < 1e-13);
    }

    #[test]
    fn lanczos_on_diagonal_with_breakdown() {
        let d = [3.0, -1.0, 0.5, 7.0, 2.0];
        let apply = |x: &[Complex64]| x.iter().zip(d).map(|(v, di)| v * di).collect::<Vec<_>>();
        assert!((lanczos_extreme(apply, 5, 1e-14, Extreme::Largest).unwrap() - 7.0).abs() < 1e-12);
        assert!((lanczos_extreme(apply, 5, 1e-14, Extreme::Smallest).unwrap() + 1.0).abs() < 1e-12);
        // start vector orthogonal to the top eigenvector
        let apply2 = |x: &[Complex64]| {
            vec![
                x[0] + x[1],
                x[0] + x[1],
                5.0 * (x[2] - x[3]),
                5.0 * (x[3] - x[2]),
            ]
        };
        assert!(
            (lanczos_extreme(apply2, 4, 1e-14, Extreme::Largest).unwrap() - 10.0).abs() < 1e-12
        );
    }
}
