//! Scalar q-arithmetic: q-integers, q-Pochhammer products, the Euler series,
//! the q-difference operator and the Jackson integral.
//!
//! Everything that is rational in `q` is computed exactly with [`BigRational`];
//! the floating routines always report how many terms they summed and an
//! a-priori bound on what they dropped.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{QDiskError, Result};

pub const MIN_TRUNC_DIM: usize = 4;

/// Parses an exact rational of the form `a/b` or `a`. Decimal notation is
/// rejected so that every `q` fed to the exact engine is what the user typed.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if t.contains(['.', 'e', 'E']) {
        return Err(QDiskError::InexactRational(s.to_string()));
    }
    let r = BigRational::from_str(t).map_err(|_| QDiskError::InexactRational(s.to_string()))?;
    Ok(r)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Tolerance profile shared by every engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Residual below which an algebraic identity counts as satisfied.
    pub identity: f64,
    /// Quadrature and geometric tail target.
    pub quadrature: f64,
    /// Relative convergence target of the norm and eigenvalue iterations.
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-9,
            quadrature: 1e-14,
            norm: 1e-12,
        }
    }
}

/// Deformation parameter, truncation dimension and tolerance profile.
#[derive(Clone, Debug)]
pub struct QContext {
    q: BigRational,
    q_float: f64,
    trunc_dim: usize,
    pub tol: Tolerances,
}

impl QContext {
    pub fn new(q: BigRational, trunc_dim: usize) -> Result<Self> {
        if !(q.is_positive() && q < BigRational::one()) {
            return Err(QDiskError::QOutOfRange(q.to_string()));
        }
        if trunc_dim < MIN_TRUNC_DIM {
            return Err(QDiskError::DimensionTooSmall {
                dim: trunc_dim,
                min: MIN_TRUNC_DIM,
            });
        }
        let q_float = rational_to_f64(&q);
        Ok(Self {
            q,
            q_float,
            trunc_dim,
            tol: Tolerances::default(),
        })
    }

    pub fn parse(q: &str, trunc_dim: usize) -> Result<Self> {
        Self::new(parse_rational(q)?, trunc_dim)
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    /// Same `q` and tolerances, different truncation.
    pub fn with_dim(&self, trunc_dim: usize) -> Result<Self> {
        let mut ctx = Self::new(self.q.clone(), trunc_dim)?;
        ctx.tol = self.tol;
        Ok(ctx)
    }

    pub fn q(&self) -> &BigRational {
        &self.q
    }

    pub fn q_f64(&self) -> f64 {
        self.q_float
    }

    pub fn dim(&self) -> usize {
        self.trunc_dim
    }

    pub fn q_pow(&self, n: i64) -> BigRational {
        pow_rational(&self.q, n)
    }

    pub fn q_powf(&self, n: i64) -> f64 {
        self.q_float.powi(n as i32)
    }

    pub fn same_q(&self, other: &QContext) -> bool {
        self.q == other.q
    }
}

impl fmt::Display for QContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={} N={}", self.q, self.trunc_dim)
    }
}

pub fn pow_rational(x: &BigRational, n: i64) -> BigRational {
    let mut acc = BigRational::one();
    let base = if n < 0 { x.recip() } else { x.clone() };
    let mut e = n.unsigned_abs();
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    acc
}

/// `[n]_q = (1 - q^n) / (1 - q)`, exact.
pub fn q_int(n: u32, ctx: &QContext) -> BigRational {
    // 1 + q + ... + q^{n-1}
    let mut acc = BigRational::zero();
    let mut p = BigRational::one();
    for _ in 0..n {
        acc += &p;
        p *= ctx.q();
    }
    acc
}

pub fn q_int_f64(n: u32, ctx: &QContext) -> f64 {
    let q = ctx.q_f64();
    (1.0 - q.powi(n as i32)) / (1.0 - q)
}

/// A truncated infinite sum or product together with the number of terms
/// used and an a-priori bound on the dropped tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncated<T> {
    pub value: T,
    pub terms: usize,
    pub tail_bound: f64,
}

/// Partial product `prod_{i < terms} (1 - x q^i)`.
///
/// The tail bound uses `|prod_{i >= T}(1 + a_i) - 1| <= exp(sum |a_i|) - 1`
/// with `sum_{i >= T} |x| q^i = |x| q^T / (1 - q)`.
pub fn q_pochhammer(x: Complex64, ctx: &QContext, terms: usize) -> Truncated<Complex64> {
    let q = ctx.q_f64();
    let mut value = Complex64::new(1.0, 0.0);
    let mut qi = 1.0;
    for _ in 0..terms {
        value *= Complex64::new(1.0, 0.0) - x * qi;
        qi *= q;
    }
    let s = x.norm() * qi / (1.0 - q);
    Truncated {
        value,
        terms,
        tail_bound: value.norm() * s.exp_m1(),
    }
}

/// Smallest number of factors for which the reported Pochhammer tail bound
/// (relative) drops below `tol`.
pub fn pochhammer_terms_for(x_abs: f64, ctx: &QContext, tol: f64) -> usize {
    let q = ctx.q_f64();
    let mut t = 0usize;
    let mut qt = 1.0;
    while (x_abs * qt / (1.0 - q)).exp_m1() >= tol && t < 100_000 {
        qt *= q;
        t += 1;
    }
    t.max(1)
}

/// Partial sum `1 + sum_{m=1}^{terms-1} x^m / prod_{k=1}^m (1 - q^k)` of the
/// Euler series, `terms` summands in total.
pub fn euler_series(x: Complex64, ctx: &QContext, terms: usize) -> Result<Complex64> {
    if x.norm() >= 1.0 {
        return Err(QDiskError::OutsideDisk {
            what: "euler_series argument",
            value: x.to_string(),
            modulus: x.norm(),
        });
    }
    let q = ctx.q_f64();
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut qk = 1.0;
    for _ in 1..terms {
        qk *= q;
        term = term * x / (1.0 - qk);
        sum += term;
    }
    Ok(sum)
}

/// Number of Euler-series summands whose geometric tail bound is below
/// `tol`. The summands are bounded by `|x|^m / (q;q)_inf`.
pub fn euler_terms_for(x_abs: f64, ctx: &QContext, tol: f64) -> usize {
    let pinf = q_pochhammer(Complex64::new(ctx.q_f64(), 0.0), ctx, 4096)
        .value
        .re;
    let mut m = 1usize;
    let mut xm = x_abs;
    while xm / ((1.0 - x_abs) * pinf) >= tol && m < 100_000 {
        xm *= x_abs;
        m += 1;
    }
    m + 1
}

/// `delta_q g(y) = (g(y) - g(qy)) / ((1 - q) y)`.
pub fn q_derivative<F>(g: F, y: f64, ctx: &QContext) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if y == 0.0 {
        return Err(QDiskError::ZeroArgument);
    }
    let q = ctx.q_f64();
    Ok((g(y) - g(q * y)) / ((1.0 - q) * y))
}

/// Exact counterpart of [`q_derivative`] for rational-valued `g`.
pub fn q_derivative_exact<F>(g: F, y: &BigRational, ctx: &QContext) -> Result<BigRational>
where
    F: Fn(&BigRational) -> BigRational,
{
    if y.is_zero() {
        return Err(QDiskError::ZeroArgument);
    }
    let q = ctx.q();
    let qy = q * y;
    Ok((g(y) - g(&qy)) / ((BigRational::one() - q) * y))
}

/// Jackson integral `(1-q) sum_{k=0}^{K} q^k g(q^k)` over `[0, 1]`.
///
/// `sup_bound` bounds `|g|` on `(0, 1]`; when it is `None` it is estimated
/// from the sampled values `g(q^k)`, `k < 64`. `K` is the first index with
/// `sup * q^{K+1} < tail_tol`.
pub fn jackson_integral<F>(
    g: F,
    ctx: &QContext,
    sup_bound: Option<f64>,
    tail_tol: f64,
) -> Result<Truncated<f64>>
where
    F: Fn(f64) -> f64,
{
    let q = ctx.q_f64();
    let sup = match sup_bound {
        Some(s) => s,
        None => {
            let mut s = 0.0f64;
            let mut y = 1.0;
            for _ in 0..64 {
                s = s.max(g(y).abs());
                y *= q;
            }
            s
        }
    };
    if !sup.is_finite() || !(tail_tol > 0.0) {
        return Err(QDiskError::TailBoundUnavailable);
    }
    let mut k = 0usize;
    let mut qk1 = q;
    while sup * qk1 >= tail_tol {
        k += 1;
        qk1 *= q;
        if k > 1_000_000 {
            return Err(QDiskError::TailBoundUnavailable);
        }
    }
    let mut sum = 0.0;
    let mut qk = 1.0;
    for _ in 0..=k {
        sum += qk * g(qk);
        qk *= q;
    }
    Ok(Truncated {
        value: (1.0 - q) * sum,
        terms: k + 1,
        tail_bound: sup * qk1,
    })
}

/// Integer helper for building rationals in tests and tables.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
