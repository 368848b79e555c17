//! Numeric engine: `N x N` truncations of the quantum disk algebra in the
//! canonical orthonormal basis `e_0, ..., e_{N-1}`.
//!
//! `z` acts as the weighted shift `z e_n = sqrt(1 - q^{n+1}) e_{n+1}` and the
//! scaling operator is `j = diag(q^n)`. Every [`TruncOp`] carries a `margin`:
//! the leading `margin x margin` block on which its entries agree with the
//! matrix elements of the infinite operator. Identity checks compare only
//! that block.

mod exact;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QDiskError, Result};
use crate::linalg::{lanczos_extreme, Extreme};
use crate::polalg::{LaplaceOrder, NormalPoly};
use crate::qnum::{parse_rational, QContext};

pub use exact::ExactOp;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Shift weights `w_n = sqrt(1 - q^{n+1})`, `n < len`.
pub fn shift_weights(ctx: &QContext, len: usize) -> Vec<f64> {
    let q = ctx.q_f64();
    let mut qn = q;
    (0..len)
        .map(|_| {
            let w = (1.0 - qn).sqrt();
            qn *= q;
            w
        })
        .collect()
}

/// Norms `s_n = ||zeta^n|| = sqrt(prod_{i<n} (1 - q^{i+1}))` of the monomials.
pub fn monomial_norms(ctx: &QContext, len: usize) -> Vec<f64> {
    let w = shift_weights(ctx, len);
    let mut out = Vec::with_capacity(len);
    let mut s = 1.0;
    for wi in w.iter().take(len) {
        out.push(s);
        s *= wi;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Derivative {
    /// `partial a = (1-q)^{-1} j^{-1} [zbar, a]`
    Partial,
    /// `barpartial a = (q-1)^{-1} j^{-1} [z, a]`
    Barpartial,
}

#[derive(Clone, Debug)]
pub struct TruncOp {
    dim: usize,
    entries: Vec<Complex64>,
    ctx: QContext,
    margin: usize,
    amplification: f64,
}

impl PartialEq for TruncOp {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_q(&other.ctx)
            && self.dim == other.dim
            && self.margin == other.margin
            && self.entries == other.entries
    }
}

impl TruncOp {
    pub fn zeros(ctx: &QContext, margin: usize) -> Self {
        let n = ctx.dim();
        Self {
            dim: n,
            entries: vec![ZERO; n * n],
            ctx: ctx.clone(),
            margin: margin.min(n),
            amplification: 1.0,
        }
    }

    pub fn identity(ctx: &QContext) -> Self {
        let mut a = Self::zeros(ctx, ctx.dim());
        for i in 0..a.dim {
            a.set(i, i, ONE);
        }
        a
    }

    pub fn from_entries(ctx: &QContext, entries: Vec<Complex64>, margin: usize) -> Result<Self> {
        let n = ctx.dim();
        if entries.len() != n * n {
            return Err(QDiskError::Shape(format!(
                "expected {} entries for N = {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        Ok(Self {
            dim: n,
            entries,
            ctx: ctx.clone(),
            margin: margin.min(n),
            amplification: 1.0,
        })
    }

    pub fn from_fn<F>(ctx: &QContext, margin: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> Complex64,
    {
        let mut a = Self::zeros(ctx, margin);
        for i in 0..a.dim {
            for k in 0..a.dim {
                a.entries[i * a.dim + k] = f(i, k);
            }
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn with_margin(mut self, margin: usize) -> Self {
        self.margin = margin.min(self.dim);
        self
    }

    pub fn ctx(&self) -> &QContext {
        &self.ctx
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Largest `q^{-k}`-type factor this operator has been multiplied by.
    pub fn amplification(&self) -> f64 {
        self.amplification
    }

    /// Whether the amplification exceeds `1 / tol_norm`, i.e. roundoff may
    /// dominate the interior block.
    pub fn amplification_warning(&self) -> bool {
        self.amplification > 1.0 / self.ctx.tol.norm
    }

    pub fn get(&self, i: usize, k: usize) -> Complex64 {
        self.entries[i * self.dim + k]
    }

    pub fn set(&mut self, i: usize, k: usize, v: Complex64) {
        self.entries[i * self.dim + k] = v;
    }

    fn check_same(&self, other: &TruncOp) -> Result<()> {
        if !self.ctx.same_q(&other.ctx) {
            return Err(QDiskError::ContextMismatch {
                left: self.ctx.q().to_string(),
                right: other.ctx.q().to_string(),
            });
        }
        if self.dim != other.dim {
            return Err(QDiskError::Shape(format!(
                "N = {} vs N = {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    fn zip_with<F>(&self, other: &TruncOp, f: F) -> Result<TruncOp>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        self.check_same(other)?;
        Ok(TruncOp {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(*a, *b))
                .collect(),
            ctx: self.ctx.clone(),
            margin: self.margin.min(other.margin),
            amplification: self.amplification.max(other.amplification),
        })
    }

    pub fn add(&self, other: &TruncOp) -> Result<TruncOp> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TruncOp) -> Result<TruncOp> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> TruncOp {
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn adjoint(&self) -> TruncOp {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            for k in 0..n {
                out.entries[i * n + k] = self.entries[k * n + i].conj();
            }
        }
        out
    }

    /// `(A + A^*) / 2`
    pub fn hermitian_part(&self) -> TruncOp {
        let adj = self.adjoint();
        let mut out = self.add(&adj).expect("same shape");
        out.entries.iter_mut().for_each(|x| *x *= 0.5);
        out
    }

    /// Matrix product. Margins combine like degrees of generator words:
    /// `margin(AB) = margin(A) + margin(B) - N`.
    pub fn matmul(&self, other: &TruncOp) -> Result<TruncOp> {
        self.check_same(other)?;
        let n = self.dim;
        // nonzero column range of each row of the right factor
        let ranges: Vec<Option<(usize, usize)>> = (0..n)
            .map(|k| {
                let row = &other.entries[k * n..(k + 1) * n];
                let lo = row.iter().position(|x| *x != ZERO)?;
                let hi = row.iter().rposition(|x| *x != ZERO)?;
                Some((lo, hi))
            })
            .collect();
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == ZERO {
                    continue;
                }
                if let Some((lo, hi)) = ranges[k] {
                    let row = &other.entries[k * n..(k + 1) * n];
                    let dst = &mut out[i * n..(i + 1) * n];
                    for j in lo..=hi {
                        dst[j] += a * row[j];
                    }
                }
            }
        }
        Ok(TruncOp {
            dim: n,
            entries: out,
            ctx: self.ctx.clone(),
            margin: (self.margin + other.margin).saturating_sub(n),
            amplification: self.amplification * other.amplification,
        })
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &TruncOp) -> Result<TruncOp> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect()
    }

    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![ZERO; n];
        for i in 0..n {
            let vi = v[i];
            if vi == ZERO {
                continue;
            }
            for (o, a) in out.iter_mut().zip(&self.entries[i * n..(i + 1) * n]) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    /// Leading `size x size` block, row-major.
    pub fn block(&self, size: usize) -> Vec<Complex64> {
        let size = size.min(self.dim);
        let mut out = Vec::with_capacity(size * size);
        for i in 0..size {
            out.extend_from_slice(&self.entries[i * self.dim..i * self.dim + size]);
        }
        out
    }

    /// Largest entrywise distance on the common interior block.
    pub fn interior_max_diff(&self, other: &TruncOp) -> f64 {
        let m = self.margin.min(other.margin).min(other.dim);
        let mut worst = 0.0f64;
        for i in 0..m {
            for k in 0..m {
                worst = worst.max((self.get(i, k) - other.get(i, k)).norm());
            }
        }
        worst
    }

    pub fn interior_max_abs(&self) -> f64 {
        self.block(self.margin)
            .iter()
            .fold(0.0, |m, x| m.max(x.norm()))
    }

    /// Frobenius norm of the interior block.
    pub fn interior_frobenius(&self) -> f64 {
        self.block(self.margin)
            .iter()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Cheap upper bound `sqrt(||A||_1 ||A||_inf)` on the operator norm.
    pub fn norm_upper_bound(&self) -> f64 {
        let n = self.dim;
        let row = (0..n)
            .map(|i| {
                self.entries[i * n..(i + 1) * n]
                    .iter()
                    .map(|x| x.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let col = (0..n)
            .map(|k| (0..n).map(|i| self.entries[i * n + k].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        (row * col).sqrt()
    }

    pub fn to_json(&self) -> TruncOpJson {
        TruncOpJson {
            q: self.ctx.q().to_string(),
            dim: self.dim,
            margin: self.margin,
            entries: self.entries.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    pub fn from_json(json: &TruncOpJson) -> Result<TruncOp> {
        let ctx = QContext::new(parse_rational(&json.q)?, json.dim)?;
        let entries = json
            .entries
            .iter()
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        TruncOp::from_entries(&ctx, entries, json.margin)
    }

    /// Compact dump: 8-byte magic, `N` as little-endian `u64`, then `N^2`
    /// `(re, im)` pairs of little-endian `f64`, row-major.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 16 * self.entries.len());
        out.extend_from_slice(BINARY_MAGIC);
        out.extend_from_slice(&(self.dim as u64).to_le_bytes());
        for c in &self.entries {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    /// Reads a binary dump. The dump does not carry `q` or the margin.
    pub fn from_binary(bytes: &[u8], ctx: &QContext, margin: usize) -> Result<TruncOp> {
        if bytes.len() < 16 || &bytes[..8] != BINARY_MAGIC {
            return Err(QDiskError::Format("missing operator dump header".into()));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        if n != ctx.dim() {
            return Err(QDiskError::Shape(format!(
                "dump has N = {n}, context N = {}",
                ctx.dim()
            )));
        }
        let body = &bytes[16..];
        if body.len() != 16 * n * n {
            return Err(QDiskError::Format(format!(
                "expected {} payload bytes, found {}",
                16 * n * n,
                body.len()
            )));
        }
        let entries = body
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        TruncOp::from_entries(ctx, entries, margin)
    }
}

impl fmt::Display for TruncOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = self.dim.min(6);
        writeln!(f, "TruncOp {} margin={}", self.ctx, self.margin)?;
        for i in 0..show {
            for k in 0..show {
                let c = self.get(i, k);
                write!(f, " {:>9.5}{:+.5}i", c.re, c.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

const BINARY_MAGIC: &[u8; 8] = b"QDSKOP01";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncOpJson {
    pub q: String,
    #[serde(rename = "N")]
    pub dim: usize,
    pub margin: usize,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct Generators {
    pub z: TruncOp,
    pub zbar: TruncOp,
    pub j: TruncOp,
}

/// Truncated `z`, `zbar = z^*` and `j = diag(q^n)`.
pub fn build_generators(ctx: &QContext) -> Generators {
    let n = ctx.dim();
    let w = shift_weights(ctx, n);
    let mut z = TruncOp::zeros(ctx, n - 1);
    for k in 0..n - 1 {
        z.set(k + 1, k, Complex64::new(w[k], 0.0));
    }
    let zbar = z.adjoint();
    let mut j = TruncOp::zeros(ctx, n);
    let q = ctx.q_f64();
    let mut qk = 1.0;
    for k in 0..n {
        j.set(k, k, Complex64::new(qk, 0.0));
        qk *= q;
    }
    Generators { z, zbar, j }
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    /// Interior max-norm of `zbar z - q z zbar - (1 - q)` in floating point.
    pub relation_residual: f64,
    /// Same residual computed with exact rationals; `true` iff it vanishes.
    pub relation_exact_zero: bool,
    /// Interior residual of `z zbar - (1 - j)`.
    pub zzbar_residual: f64,
    /// Interior residual of `zbar z - (1 - q j)`.
    pub zbarz_residual: f64,
    /// Singular values of `U - V` (`V` the unweighted shift), largest first.
    pub shift_difference_singular_values: Vec<f64>,
    pub singular_values_decreasing: bool,
}

pub fn structure_checks(ctx: &QContext) -> StructureReport {
    let g = build_generators(ctx);
    let n = ctx.dim();
    let q = Complex64::new(ctx.q_f64(), 0.0);
    let id = TruncOp::identity(ctx);
    let zbz = g.zbar.matmul(&g.z).expect("same ctx");
    let zzb = g.z.matmul(&g.zbar).expect("same ctx");
    let rel = zbz
        .sub(&zzb.scale(q))
        .and_then(|r| r.sub(&id.scale(ONE - q)))
        .expect("same ctx");
    let zzbar = zzb.sub(&id.sub(&g.j).expect("same ctx")).expect("same ctx");
    let zbarz = zbz
        .sub(&id.sub(&g.j.scale(q)).expect("same ctx"))
        .expect("same ctx");

    let erel = ExactOp::relation_residual(ctx);

    let sv: Vec<f64> = shift_weights(ctx, n - 1)
        .iter()
        .map(|w| (w - 1.0).abs())
        .collect();
    let decreasing = sv.windows(2).all(|p| p[1] <= p[0]);
    StructureReport {
        relation_residual: rel.interior_max_abs(),
        relation_exact_zero: erel.interior_is_zero(),
        zzbar_residual: zzbar.interior_max_abs(),
        zbarz_residual: zbarz.interior_max_abs(),
        shift_difference_singular_values: sv,
        singular_values_decreasing: decreasing,
    }
}

/// Matrix of a normal-ordered polynomial in the canonical basis.
///
/// Entries are the exact matrix elements of `zbar^m z^n` restricted to the
/// first `N` basis vectors, so they agree with the product of truncated
/// generators on the leading `N - degree` block; the margin is reported as
/// `N - degree`.
pub fn to_matrix(p: &NormalPoly, ctx: &QContext) -> Result<TruncOp> {
    if !p.ctx().same_q(ctx) {
        return Err(QDiskError::ContextMismatch {
            left: p.ctx().q().to_string(),
            right: ctx.q().to_string(),
        });
    }
    let n = ctx.dim();
    let deg = p.degree();
    if 2 * deg as usize > n {
        return Err(QDiskError::DegreeTooLarge {
            degree: deg,
            dim: n,
        });
    }
    let w = shift_weights(ctx, n + deg as usize + 1);
    let mut a = TruncOp::zeros(ctx, n - deg as usize);
    for (&(m, nz), c) in p.terms() {
        let c = c.to_complex();
        let (m, nz) = (m as usize, nz as usize);
        for k in 0..n {
            let top = k + nz;
            if top < m || top - m >= n {
                continue;
            }
            let i = top - m;
            let up: f64 = w[k..top].iter().product();
            let down: f64 = w[i..top].iter().product();
            let cur = a.get(i, k);
            a.set(i, k, cur + c * (up * down));
        }
    }
    Ok(a)
}

/// Holomorphic function of `z` with Taylor data `coeffs[d]` (mode `z^d`), as
/// a compression: `(z^d)_{k+d,k} = s_{k+d} / s_k` exactly, margin `N`.
pub fn holomorphic_matrix(coeffs: &[Complex64], ctx: &QContext) -> TruncOp {
    let n = ctx.dim();
    let s = monomial_norms(ctx, n);
    let mut a = TruncOp::zeros(ctx, n);
    for (d, c) in coeffs.iter().enumerate() {
        if *c == ZERO {
            continue;
        }
        for k in 0..n.saturating_sub(d) {
            let cur = a.get(k + d, k);
            a.set(k + d, k, cur + c * (s[k + d] / s[k]));
        }
    }
    a
}

/// `(1 - x)^{-1} = sum_{d < terms} x^d` for `x = c z` (holomorphic) or
/// `x = c zbar` (antiholomorphic), `|c| < 1`.
pub fn neumann_inverse(
    c: Complex64,
    antiholomorphic: bool,
    terms: usize,
    ctx: &QContext,
) -> Result<TruncOp> {
    if c.norm() >= 1.0 {
        return Err(QDiskError::OutsideDisk {
            what: "Neumann series ratio",
            value: c.to_string(),
            modulus: c.norm(),
        });
    }
    // sum c^d zbar^d is the adjoint of sum conj(c)^d z^d
    let base = if antiholomorphic { c.conj() } else { c };
    let mut coeffs = Vec::with_capacity(terms);
    let mut p = ONE;
    for _ in 0..terms {
        coeffs.push(p);
        p *= base;
    }
    let h = holomorphic_matrix(&coeffs, ctx);
    Ok(if antiholomorphic { h.adjoint() } else { h })
}

/// `J(A) = j^{-1} A j`, entrywise `A_{m,n} q^{n-m}`. The largest factor
/// applied to a nonzero entry is recorded as the amplification.
pub fn scale_j_matrix(a: &TruncOp) -> TruncOp {
    let n = a.dim;
    let q = a.ctx.q_f64();
    let mut out = a.clone();
    let mut amp = 1.0f64;
    for i in 0..n {
        for k in 0..n {
            let v = a.get(i, k);
            if v == ZERO {
                continue;
            }
            let f = q.powi(k as i32 - i as i32);
            amp = amp.max(f);
            out.set(i, k, v * f);
        }
    }
    out.amplification = a.amplification * amp;
    out
}

/// `delta` and `bardelta` from their matrix elements:
/// `bardelta e_n = (q-1)^{-1} q^{-(n+1)} sqrt(1-q^{n+1}) e_{n+1}`,
/// `delta e_n = (1-q^{-n})/(1-q^{-1}) sqrt(1-q^n) e_{n-1}`.
pub fn build_deltas(ctx: &QContext) -> (TruncOp, TruncOp) {
    let n = ctx.dim();
    let q = ctx.q_f64();
    let w = shift_weights(ctx, n);
    let mut delta = TruncOp::zeros(ctx, n - 1);
    let mut bardelta = TruncOp::zeros(ctx, n - 1);
    let mut amp = 1.0f64;
    for k in 0..n - 1 {
        let qinv = q.powi(-(k as i32 + 1));
        amp = amp.max(qinv);
        bardelta.set(k + 1, k, Complex64::new(qinv * w[k] / (q - 1.0), 0.0));
        let m = k + 1;
        let qint_inv = (1.0 - q.powi(-(m as i32))) / (1.0 - 1.0 / q);
        delta.set(k, m, Complex64::new(qint_inv * w[m - 1], 0.0));
    }
    delta.amplification = amp;
    bardelta.amplification = amp;
    (delta, bardelta)
}

/// Scaled commutator form of the derivatives. The margin shrinks by one and
/// the `j^{-1}` factor actually applied is recorded.
pub fn d_op(a: &TruncOp, which: Derivative) -> TruncOp {
    let g = build_generators(&a.ctx);
    let q = a.ctx.q_f64();
    let (gen, pref) = match which {
        Derivative::Partial => (&g.zbar, 1.0 / (1.0 - q)),
        Derivative::Barpartial => (&g.z, 1.0 / (q - 1.0)),
    };
    let mut c = gen.commutator(a).expect("same ctx");
    let n = a.dim;
    let mut amp = 1.0f64;
    for i in 0..n {
        let f = pref * q.powi(-(i as i32));
        let row = &mut c.entries[i * n..(i + 1) * n];
        if row.iter().any(|x| *x != ZERO) {
            amp = amp.max(q.powi(-(i as i32)));
        }
        row.iter_mut().for_each(|x| *x *= f);
    }
    c.amplification = a.amplification * amp;
    c
}

/// Largest truncation for which the floating-point Laplacian is offered.
pub const FLOAT_LAPLACIAN_MAX_DIM: usize = 48;

/// Laplacian through two scaled commutators; margin shrinks by two. Above
/// [`FLOAT_LAPLACIAN_MAX_DIM`] the `q^{-2N}` roundoff amplification makes the
/// result meaningless and [`ExactOp::laplacian`] must be used instead.
pub fn laplacian_matrix(a: &TruncOp, order: LaplaceOrder) -> Result<TruncOp> {
    if a.dim > FLOAT_LAPLACIAN_MAX_DIM {
        return Err(QDiskError::Precondition(format!(
            "floating-point Laplacian limited to N <= {FLOAT_LAPLACIAN_MAX_DIM}, got N = {}; use the exact engine",
            a.dim
        )));
    }
    Ok(match order {
        LaplaceOrder::PartialBarpartial => {
            d_op(&d_op(a, Derivative::Barpartial), Derivative::Partial)
        }
        LaplaceOrder::BarpartialPartial => {
            d_op(&d_op(a, Derivative::Partial), Derivative::Barpartial)
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub coeffs: Vec<Complex64>,
}

impl StateVector {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn basis(dim: usize, n: usize) -> Self {
        let mut coeffs = vec![ZERO; dim];
        coeffs[n] = ONE;
        Self { coeffs }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(self, other)`, conjugate-linear in `self`.
    pub fn inner(&self, other: &[Complex64]) -> Complex64 {
        self.coeffs
            .iter()
            .zip(other)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Support size: one past the last nonzero coefficient.
    pub fn support(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != ZERO)
            .map_or(0, |i| i + 1)
    }
}

/// Quadratic form of a derivative, `(1-q)^{-1} (j^{-1} phi, [zbar, A] phi)`
/// for `Partial` and `(q-1)^{-1} (j^{-1} phi, [z, A] phi)` for `Barpartial`.
/// `phi` should be supported inside the margin of the commutator.
pub fn quadratic_form(a: &TruncOp, phi: &StateVector, which: Derivative) -> Result<Complex64> {
    if phi.norm() == 0.0 {
        return Err(QDiskError::Precondition(
            "quadratic form needs a nonzero vector".into(),
        ));
    }
    if phi.coeffs.len() != a.dim {
        return Err(QDiskError::Shape(format!(
            "vector of length {} for N = {}",
            phi.coeffs.len(),
            a.dim
        )));
    }
    let g = build_generators(&a.ctx);
    let q = a.ctx.q_f64();
    let (gen, pref) = match which {
        Derivative::Partial => (&g.zbar, 1.0 / (1.0 - q)),
        Derivative::Barpartial => (&g.z, 1.0 / (q - 1.0)),
    };
    let c = gen.commutator(a)?;
    let jinv = StateVector::new(
        phi.coeffs
            .iter()
            .enumerate()
            .map(|(n, x)| x * q.powi(-(n as i32)))
            .collect(),
    );
    Ok(jinv.inner(&c.apply(&phi.coeffs)) * pref)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegralValue {
    pub value: Complex64,
    /// `||A|| q^N`: the dropped diagonal tail.
    pub tail_bound: f64,
    /// `2 ||A|| (q^margin - q^N)`: diagonal entries outside the margin that
    /// may carry truncation artifacts.
    pub edge_bound: f64,
}

/// `(1-q) sum_{k<N} q^k A_kk`, the weighted trace `Tr(A j) / Tr(j)`.
pub fn integral_matrix(a: &TruncOp) -> IntegralValue {
    let q = a.ctx.q_f64();
    let mut sum = ZERO;
    let mut qk = 1.0;
    for k in 0..a.dim {
        sum += a.get(k, k) * qk;
        qk *= q;
    }
    let norm = a.norm_upper_bound();
    let qn = q.powi(a.dim as i32);
    let qm = q.powi(a.margin as i32);
    IntegralValue {
        value: sum * (1.0 - q),
        tail_bound: norm * qn,
        edge_bound: 2.0 * norm * (qm - qn).max(0.0),
    }
}

/// Largest singular value: Krylov-accelerated power iteration on `A^* A`
/// from the normalized all-ones vector, relative tolerance `tol_norm`.
pub fn op_norm(a: &TruncOp) -> Result<f64> {
    let lambda = lanczos_extreme(
        |v| a.apply_adjoint(&a.apply(v)),
        a.dim,
        a.ctx.tol.norm,
        Extreme::Largest,
    )?;
    Ok(lambda.max(0.0).sqrt())
}

/// Smallest eigenvalue of the Hermitian part `(A + A^*)/2`.
pub fn min_hermitian_eigenvalue(a: &TruncOp) -> Result<f64> {
    let h = a.hermitian_part();
    lanczos_extreme(|v| h.apply(v), h.dim, a.ctx.tol.norm, Extreme::Smallest)
}

#[cfg(test)]
mod tests;
