//! Holomorphic, antiholomorphic and harmonic elements: membership tests on
//! truncations, symbol extraction, the Dirichlet problem and the classical
//! correspondence checks (mean value, maximum principle, positivity,
//! Harnack).

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::bergman::{
    coherent_expectation, coherent_probe_points, quantize_from_samples, BergmanGrid,
};
use crate::boundary::{BoundaryFunction, COEFF_FLOOR};
use crate::error::{QDiskError, Result};
use crate::gauss::GaussRat;
use crate::opmat::{
    build_generators, integral_matrix, min_hermitian_eigenvalue, monomial_norms, op_norm, TruncOp,
};
use crate::qnum::{q_derivative_exact, q_int, q_int_f64, ratio, QContext};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Root-test radius must exceed `1` by this factor to certify scalability.
/// Drop ratio after the last coefficient that marks a finite polynomial.
pub const POLYNOMIAL_CLIFF: f64 = 1e-6;

pub const SCALABLE_RADIUS_MARGIN: f64 = 1.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    WeaklyHolo,
    WeaklyAntiholo,
    Harmonic,
    None,
}

#[derive(Clone, Debug, Serialize)]
pub struct HolomorphyReport {
    /// Interior Frobenius norm of `[z, A]`.
    pub commutator_z: f64,
    /// Interior Frobenius norm of `[zbar, A]`.
    pub commutator_zbar: f64,
    pub classification: Classification,
    pub scalability: Option<ScalabilityReport>,
    pub extracted_symbol: Option<SymbolEstimate>,
}

fn require_margin(a: &TruncOp, required: usize) -> Result<()> {
    if a.margin() < required {
        return Err(QDiskError::MarginTooSmall {
            margin: a.margin(),
            required,
        });
    }
    Ok(())
}

/// Interior norms of `[z, A]` and `[zbar, A]`.
pub fn commutator_norms(a: &TruncOp) -> (f64, f64) {
    let g = build_generators(a.ctx());
    let cz = g.z.commutator(a).expect("same ctx").interior_frobenius();
    let czb = g.zbar.commutator(a).expect("same ctx").interior_frobenius();
    (cz, czb)
}

/// Holomorphic is tested first, so constants classify as weakly holomorphic.
pub fn classify(a: &TruncOp) -> Result<HolomorphyReport> {
    require_margin(a, 4)?;
    let tol = a.ctx().tol.identity;
    let (cz, czb) = commutator_norms(a);
    let classification = if cz < tol {
        Classification::WeaklyHolo
    } else if czb < tol {
        Classification::WeaklyAntiholo
    } else if is_weakly_harmonic(a)?.harmonic {
        Classification::Harmonic
    } else {
        Classification::None
    };
    let scalability = match classification {
        Classification::WeaklyHolo | Classification::WeaklyAntiholo => {
            Some(scalability_diagnostic(a)?)
        }
        _ => None,
    };
    let extracted_symbol = if a.margin() >= 8 {
        Some(symbol_extract(a)?)
    } else {
        None
    };
    Ok(HolomorphyReport {
        commutator_z: cz,
        commutator_zbar: czb,
        classification,
        scalability,
        extracted_symbol,
    })
}

/// `a1` = lower triangle with the diagonal, `a2` = strict upper triangle.
pub fn triangular_split(a: &TruncOp) -> (TruncOp, TruncOp) {
    let n = a.dim();
    let mut lower = a.clone();
    let mut upper = a.clone();
    for i in 0..n {
        for k in 0..n {
            if k > i {
                lower.set(i, k, ZERO);
            } else {
                upper.set(i, k, ZERO);
            }
        }
    }
    (lower, upper)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarmonicCheck {
    pub harmonic: bool,
    /// Interior norm of `[z, a1]`.
    pub holo_residual: f64,
    /// Interior norm of `[zbar, a2]`.
    pub antiholo_residual: f64,
}

/// Decomposition criterion: the lower part commutes with `z` and the
/// strictly upper part with `zbar`.
pub fn is_weakly_harmonic(a: &TruncOp) -> Result<HarmonicCheck> {
    require_margin(a, 4)?;
    let (a1, a2) = triangular_split(a);
    let g = build_generators(a.ctx());
    let holo_residual = g.z.commutator(&a1)?.interior_frobenius();
    let antiholo_residual = g.zbar.commutator(&a2)?.interior_frobenius();
    let tol = a.ctx().tol.identity;
    Ok(HarmonicCheck {
        harmonic: holo_residual < tol && antiholo_residual < tol,
        holo_residual,
        antiholo_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolEstimate {
    pub symbol: BoundaryFunction,
    /// Estimator depth `k`.
    pub depth: usize,
    /// Largest `|A_{k+d,k} - A_{k-1+d,k-1}|` over the reported modes.
    pub drift: f64,
    /// Largest interior entry on a diagonal beyond the reported modes.
    pub leak: f64,
    pub reliable: bool,
}

/// Deep-diagonal estimate of the boundary symbol: mode `d >= 0` from
/// `A_{k+d,k}`, mode `-d` from `A_{k,k+d}`. The depth is
/// `k = floor(0.8 margin)`, pulled back so that every occupied diagonal of the
/// interior block fits, but never below `margin / 2`.
pub fn symbol_extract(a: &TruncOp) -> Result<SymbolEstimate> {
    require_margin(a, 8)?;
    let m = a.margin();
    let scale = a.interior_max_abs();
    let mut band = 0usize;
    for i in 0..m {
        for j in 0..m {
            if i.abs_diff(j) > band && a.get(i, j).norm() > COEFF_FLOOR * scale.max(1.0) {
                band = i.abs_diff(j);
            }
        }
    }
    let k = ((4 * m) / 5).min((m - 1).saturating_sub(band)).max(m / 2);
    let reach = m - 1 - k;
    let mut leak = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            if i.abs_diff(j) > reach {
                leak = leak.max(a.get(i, j).norm());
            }
        }
    }
    let reach = reach as i64;
    let mut coeffs = Vec::new();
    let mut drift = 0.0f64;
    for d in -reach..=reach {
        let (i, j) = if d >= 0 {
            (k + d as usize, k)
        } else {
            (k, k + d.unsigned_abs() as usize)
        };
        let v = a.get(i, j);
        drift = drift.max((v - a.get(i - 1, j - 1)).norm());
        if v.norm() > COEFF_FLOOR {
            coeffs.push((d, v));
        }
    }
    let tol = a.ctx().tol.identity;
    Ok(SymbolEstimate {
        symbol: BoundaryFunction::from_fourier(coeffs),
        depth: k,
        drift,
        leak,
        reliable: drift < tol && leak < tol,
    })
}

/// `sum_{d>=0} c_d z^d + sum_{d<0} c_d zbar^{|d|}` with exact compressed
/// entries `(z^d)_{n+d,n} = s_{n+d} / s_n`; margin `N`.
pub fn dirichlet_solve(f: &BoundaryFunction, ctx: &QContext) -> Result<TruncOp> {
    let n = ctx.dim();
    let bw = f.bandwidth();
    if 2 * bw > n {
        return Err(QDiskError::Bandwidth {
            bandwidth: bw,
            limit: n / 2,
        });
    }
    let s = monomial_norms(ctx, n);
    let mut a = TruncOp::zeros(ctx, n);
    for (&d, &c) in f.fourier() {
        let du = d.unsigned_abs() as usize;
        for k in 0..n - du {
            let v = c * (s[k + du] / s[k]);
            if d >= 0 {
                a.set(k + du, k, a.get(k + du, k) + v);
            } else {
                a.set(k, k + du, a.get(k, k + du) + v);
            }
        }
    }
    Ok(a)
}

/// Number of nodes for the Poisson quadrature at radius `r`: aliased modes
/// contribute about `2 r^{K - bw} / (1 - r)`, kept below `1e-15`.
fn poisson_nodes(r: f64, bandwidth: usize) -> usize {
    let min = 2 * bandwidth + 1;
    if r == 0.0 {
        return min.max(1);
    }
    let need = ((1e-15 * (1.0 - r) / 2.0).ln() / r.ln()).ceil() as usize + bandwidth;
    need.max(min).max(16)
}

fn poisson_kernel_value(r: f64, phi: f64) -> f64 {
    (1.0 - r * r) / (1.0 - 2.0 * r * phi.cos() + r * r)
}

/// Poisson integral `(1/2pi) int f(theta) (1 - |zeta|^2) / |e^{i theta} - zeta|^2 dtheta`
/// by the uniform rule, with the node count chosen from `|zeta|`.
pub fn poisson_eval(f: &BoundaryFunction, zeta: Complex64) -> Result<Complex64> {
    let r = zeta.norm();
    if r >= 1.0 {
        return Err(QDiskError::OutsideDisk {
            what: "Poisson evaluation point",
            value: zeta.to_string(),
            modulus: r,
        });
    }
    let kp = poisson_nodes(r, f.bandwidth());
    let arg = zeta.arg();
    let mut acc = ZERO;
    for j in 0..kp {
        let theta = 2.0 * PI * j as f64 / kp as f64;
        acc += f.eval(theta) * poisson_kernel_value(r, theta - arg);
    }
    Ok(acc / kp as f64)
}

/// `T(Pf)` with the harmonic extension computed by Poisson quadrature on
/// each circle of the grid (the boundary circle uses `f` itself).
pub fn poisson_quantize(
    f: &BoundaryFunction,
    grid: &BergmanGrid,
    ctx: &QContext,
) -> Result<TruncOp> {
    let k = grid.angular_count();
    let bw = f.bandwidth();
    let q = quantize_from_samples(grid, ctx, Some(bw), |_, r| {
        if r >= 1.0 {
            return (0..k)
                .map(|j| f.eval(2.0 * PI * j as f64 / k as f64))
                .collect();
        }
        // node count a multiple of K so the evaluation nodes are a subset
        let mult = poisson_nodes(r, bw).div_ceil(k);
        let kp = mult * k;
        let vals: Vec<Complex64> = (0..kp)
            .map(|t| f.eval(2.0 * PI * t as f64 / kp as f64))
            .collect();
        let kernel: Vec<f64> = (0..kp)
            .map(|t| poisson_kernel_value(r, 2.0 * PI * t as f64 / kp as f64))
            .collect();
        (0..k)
            .map(|j| {
                let shift = j * mult;
                let mut acc = ZERO;
                for (t, v) in vals.iter().enumerate() {
                    acc += v * kernel[(shift + kp - t) % kp];
                }
                acc / kp as f64
            })
            .collect()
    })?;
    Ok(q.op)
}

#[derive(Clone, Debug, Serialize)]
pub struct DirichletCrossCheck {
    /// Interior max distance between the Fourier and Poisson routes.
    pub route_difference: f64,
    pub symbol: SymbolEstimate,
    /// Largest coefficient error of the extracted symbol.
    pub symbol_error: f64,
    pub weakly_harmonic: HarmonicCheck,
}

pub fn dirichlet_cross_check(
    f: &BoundaryFunction,
    grid: &BergmanGrid,
    ctx: &QContext,
) -> Result<DirichletCrossCheck> {
    let a = dirichlet_solve(f, ctx)?;
    let p = poisson_quantize(f, grid, ctx)?;
    let symbol = symbol_extract(&a)?;
    Ok(DirichletCrossCheck {
        route_difference: a.interior_max_diff(&p),
        symbol_error: symbol.symbol.max_coeff_diff(f),
        symbol,
        weakly_harmonic: is_weakly_harmonic(&a)?,
    })
}

/// Exact q-antiderivative of `k = sum_d k_d zbar^d`: `zbar^d -> zbar^{d+1} / [d+1]_q`.
/// Entry `d` of the input and output is the coefficient of `zbar^d`.
pub fn q_antiderivative(k: &[GaussRat], ctx: &QContext) -> Vec<GaussRat> {
    let mut g = vec![GaussRat::zero(); k.len() + 1];
    for (d, c) in k.iter().enumerate() {
        g[d + 1] = c.scale(&q_int(d as u32 + 1, ctx).recip());
    }
    g
}

/// Partial sums of `(1-q) zbar sum_{n<terms} q^n k(q^n zbar)`, coefficientwise.
pub fn weighted_series_antiderivative(
    k: &[Complex64],
    ctx: &QContext,
    terms: usize,
) -> Vec<Complex64> {
    series_antiderivative(k, ctx, terms, true)
}

/// Partial sums of the unweighted series `(1-q) zbar sum_{n<terms} k(q^n zbar)`.
/// The constant term grows linearly with `terms`.
pub fn unweighted_series_antiderivative(
    k: &[Complex64],
    ctx: &QContext,
    terms: usize,
) -> Vec<Complex64> {
    series_antiderivative(k, ctx, terms, false)
}

fn series_antiderivative(
    k: &[Complex64],
    ctx: &QContext,
    terms: usize,
    weighted: bool,
) -> Vec<Complex64> {
    let q = ctx.q_f64();
    let mut g = vec![ZERO; k.len() + 1];
    for (d, c) in k.iter().enumerate() {
        let step = if weighted {
            q.powi(d as i32 + 1)
        } else {
            q.powi(d as i32)
        };
        let mut sum = 0.0;
        let mut t = 1.0;
        for _ in 0..terms {
            sum += t;
            t *= step;
        }
        g[d + 1] = c * ((1.0 - q) * sum);
    }
    g
}

fn eval_real_poly(coeffs: &[BigRational], y: &BigRational) -> BigRational {
    coeffs
        .iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * y + c)
}

#[derive(Clone, Debug, Serialize)]
pub struct AntiderivativeReport {
    pub input: Vec<String>,
    pub antiderivative: Vec<String>,
    /// `delta_q g = k` exactly at `y = 1/4, 1/2, 1`.
    pub exact_check: bool,
    /// Largest coefficient gap between the weighted series and the exact rule.
    pub weighted_series_gap: f64,
    /// Per input degree `d`, the factor by which `delta_q` of the unweighted
    /// series exceeds `k`: `[d+1]_q / [d]_q`, or `None` where it diverges.
    pub unweighted_factors: Vec<(usize, Option<f64>)>,
}

pub fn antiderivative_report(k: &[GaussRat], ctx: &QContext) -> Result<AntiderivativeReport> {
    let g = q_antiderivative(k, ctx);
    let mut exact_check = true;
    for y in [ratio(1, 4), ratio(1, 2), ratio(1, 1)] {
        for part in [|c: &GaussRat| c.re.clone(), |c: &GaussRat| c.im.clone()] {
            let gc: Vec<BigRational> = g.iter().map(part).collect();
            let kc: Vec<BigRational> = k.iter().map(part).collect();
            let lhs = q_derivative_exact(|t| eval_real_poly(&gc, t), &y, ctx)?;
            exact_check &= lhs == eval_real_poly(&kc, &y);
        }
    }
    let kf: Vec<Complex64> = k.iter().map(GaussRat::to_complex).collect();
    let terms = (ctx.tol.quadrature.ln() / ctx.q_f64().ln()).ceil() as usize + 8;
    let weighted = weighted_series_antiderivative(&kf, ctx, terms);
    let weighted_series_gap = weighted
        .iter()
        .zip(&g)
        .map(|(a, b)| (a - b.to_complex()).norm())
        .fold(0.0, f64::max);
    let unweighted = unweighted_series_antiderivative(&kf, ctx, terms);
    let unweighted_factors = kf
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(d, c)| {
            // delta_q maps zbar^{d+1} to [d+1]_q zbar^d
            let f = (d > 0).then(|| (unweighted[d + 1] * q_int_f64(d as u32 + 1, ctx) / c).re);
            (d, f)
        })
        .collect();
    Ok(AntiderivativeReport {
        input: k.iter().map(|c| c.to_string()).collect(),
        antiderivative: g.iter().map(|c| c.to_string()).collect(),
        exact_check,
        weighted_series_gap,
        unweighted_factors,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HarmonicReport {
    pub mean_value: Complex64,
    /// `f(0) = c_0`
    pub center_value: Complex64,
    pub mean_error: f64,
    pub mean_tail_bound: f64,
    pub op_norm: f64,
    pub boundary_sup: f64,
    /// `|op_norm - boundary_sup| / boundary_sup`
    pub max_principle_gap: f64,
    pub coherent_lower: f64,
    pub coherent_below_norm: bool,
    /// Smallest eigenvalue of `(A + A^*)/2`, when `f` is real.
    pub min_eigenvalue: Option<f64>,
    pub boundary_min: Option<f64>,
}

/// Mean value, maximum principle and positivity diagnostics for a weakly
/// harmonic `A` with boundary data `f`.
pub fn harmonic_diagnostics(a: &TruncOp, f: &BoundaryFunction) -> Result<HarmonicReport> {
    let h = is_weakly_harmonic(a)?;
    if !h.harmonic {
        return Err(QDiskError::Precondition(format!(
            "element is not weakly harmonic (residuals {:e}, {:e})",
            h.holo_residual, h.antiholo_residual
        )));
    }
    let iv = integral_matrix(a);
    let c0 = f.coefficient(0);
    let norm = op_norm(a)?;
    let sup = f.sup_abs();
    let mut lower = 0.0f64;
    for eta in coherent_probe_points() {
        lower = lower.max(coherent_expectation(a, eta)?.norm());
    }
    let real = f.is_real(1e-14);
    let min_eigenvalue = if real {
        Some(min_hermitian_eigenvalue(a)?)
    } else {
        None
    };
    Ok(HarmonicReport {
        mean_value: iv.value,
        center_value: c0,
        mean_error: (iv.value - c0).norm(),
        mean_tail_bound: iv.tail_bound + iv.edge_bound,
        op_norm: norm,
        boundary_sup: sup,
        max_principle_gap: if sup > 0.0 {
            (norm - sup).abs() / sup
        } else {
            norm
        },
        coherent_lower: lower,
        coherent_below_norm: lower <= norm * (1.0 + a.ctx().tol.norm) + 1e-12,
        min_eigenvalue,
        boundary_min: real.then(|| f.min_real()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarnackStep {
    pub k: usize,
    /// Smallest eigenvalue of the Hermitian part of `A_{k+1} - A_k`.
    pub min_eigenvalue: f64,
    pub norm: f64,
    /// `2^{-k}`
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HarnackReport {
    pub steps: Vec<HarnackStep>,
    pub monotone: bool,
    pub cauchy: bool,
}

/// Boundary data `f_k = sum_{j=1}^k 2^{-j} (1 + cos j theta)`.
pub fn harnack_data(k: usize) -> BoundaryFunction {
    let mut coeffs = Vec::new();
    for j in 1..=k {
        let w = 0.5f64.powi(j as i32);
        coeffs.push((0, Complex64::new(w, 0.0)));
        coeffs.push((j as i64, Complex64::new(w / 2.0, 0.0)));
        coeffs.push((-(j as i64), Complex64::new(w / 2.0, 0.0)));
    }
    BoundaryFunction::from_fourier(coeffs)
}

/// Increasing bounded sequence `A_k = dirichlet_solve(f_k)`, `k = 1..=kmax+1`.
pub fn harnack_demo(ctx: &QContext, kmax: usize) -> Result<HarnackReport> {
    let mut steps = Vec::with_capacity(kmax);
    let mut prev = dirichlet_solve(&harnack_data(1), ctx)?;
    for k in 1..=kmax {
        let next = dirichlet_solve(&harnack_data(k + 1), ctx)?;
        let diff = next.sub(&prev)?;
        steps.push(HarnackStep {
            k,
            min_eigenvalue: min_hermitian_eigenvalue(&diff)?,
            norm: op_norm(&diff)?,
            bound: 0.5f64.powi(k as i32),
        });
        prev = next;
    }
    Ok(HarnackReport {
        monotone: steps.iter().all(|s| s.min_eigenvalue >= -1e-10),
        cauchy: steps.iter().all(|s| s.norm <= s.bound + 1e-10),
        steps,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Holomorphic,
    Antiholomorphic,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalabilityReport {
    pub kind: SeriesKind,
    /// `|a_d| q^{-d}` for the offset coefficients `a_d`.
    pub scaled_coefficients: Vec<f64>,
    /// Root-test estimate of the radius of convergence of `sum a_d q^{-d} w^d`;
    /// infinite for finitely supported data.
    pub radius_estimate: f64,
    pub scalable: bool,
    pub certificate: String,
}

/// Numeric scalability certificate for weakly (anti)holomorphic elements.
pub fn scalability_diagnostic(a: &TruncOp) -> Result<ScalabilityReport> {
    require_margin(a, 4)?;
    let tol = a.ctx().tol.identity;
    let (cz, czb) = commutator_norms(a);
    if czb < tol && cz >= tol {
        return Ok(ScalabilityReport {
            kind: SeriesKind::Antiholomorphic,
            scaled_coefficients: Vec::new(),
            radius_estimate: f64::INFINITY,
            scalable: true,
            certificate: "weakly antiholomorphic elements are scalable".into(),
        });
    }
    if cz >= tol {
        return Err(QDiskError::Precondition(format!(
            "scalability diagnostic needs a weakly (anti)holomorphic element, commutator norms {cz:e}, {czb:e}"
        )));
    }
    let m = a.margin();
    let s = monomial_norms(a.ctx(), m);
    let q = a.ctx().q_f64();
    let coeffs: Vec<f64> = (0..m).map(|d| a.get(d, 0).norm() / s[d]).collect();
    let scaled: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(d, c)| c * q.powi(-(d as i32)))
        .collect();
    let floor = 1e-14 * coeffs.iter().cloned().fold(0.0, f64::max);
    let last = coeffs.iter().rposition(|c| *c > floor).unwrap_or(0);
    let tail = coeffs[last + 1..].iter().cloned().fold(0.0, f64::max);
    let cliff = tail <= POLYNOMIAL_CLIFF * coeffs[last];
    let (radius, certificate) = if cliff && 2 * (last + 1) < m {
        (
            f64::INFINITY,
            format!(
                "coefficients vanish beyond degree {last} over {} further offsets",
                m - 1 - last
            ),
        )
    } else {
        let lo = (last / 2).max(1);
        let root = (lo..=last)
            .filter(|d| coeffs[*d] > floor)
            .map(|d| scaled[d].powf(1.0 / d as f64))
            .fold(0.0, f64::max);
        let r = if root > 0.0 {
            1.0 / root
        } else {
            f64::INFINITY
        };
        (r, format!("root test over offsets {lo}..={last}"))
    };
    Ok(ScalabilityReport {
        kind: SeriesKind::Holomorphic,
        scaled_coefficients: scaled,
        radius_estimate: radius,
        scalable: radius > SCALABLE_RADIUS_MARGIN,
        certificate,
    })
}

/// Exact `[d+1]_q / [d]_q`, the factor reported for the unweighted series.
pub fn unweighted_factor_exact(d: u32, ctx: &QContext) -> Option<BigRational> {
    (d > 0).then(|| q_int(d + 1, ctx) / q_int(d, ctx))
}

/// Convenience: `k = zbar^d` as a coefficient list.
pub fn antiholomorphic_monomial(d: usize) -> Vec<GaussRat> {
    let mut k = vec![GaussRat::zero(); d + 1];
    k[d] = GaussRat::real(BigRational::one());
    k
}

#[cfg(test)]
mod tests;
