//! Exact symbolic engine for the polynomial algebra of the quantum disk.
//!
//! Elements are kept in normal order, `sum c_{m,n} zbar^m z^n` with every
//! `zbar` to the left, and coefficients are Gaussian rationals. Reordering
//! uses `z zbar = q^{-1} zbar z - q^{-1}(1 - q)`, which follows from the
//! defining relation `zbar z = q z zbar + (1 - q)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryFunction;
use crate::error::{QDiskError, Result};
use crate::gauss::GaussRat;
use crate::qnum::{parse_rational, q_int, QContext};

pub const DEFAULT_DEGREE_CAP: u32 = 64;

/// Key `(m, n)` stands for `zbar^m z^n`.
pub type Monomial = (u32, u32);

#[derive(Clone, Debug)]
pub struct NormalPoly {
    terms: BTreeMap<Monomial, GaussRat>,
    ctx: QContext,
    cap: u32,
}

impl PartialEq for NormalPoly {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_q(&other.ctx) && self.terms == other.terms
    }
}

/// Which composite of the two derivatives a Laplacian applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplaceOrder {
    /// `partial(barpartial(p))`
    PartialBarpartial,
    /// `barpartial(partial(p))`
    BarpartialPartial,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenCheck {
    pub lhs: GaussRat,
    pub rhs: GaussRat,
    pub pass: bool,
}

impl NormalPoly {
    pub fn zero(ctx: &QContext) -> Self {
        Self {
            terms: BTreeMap::new(),
            ctx: ctx.clone(),
            cap: DEFAULT_DEGREE_CAP,
        }
    }

    pub fn constant(ctx: &QContext, c: GaussRat) -> Self {
        Self::monomial(ctx, 0, 0, c)
    }

    pub fn one(ctx: &QContext) -> Self {
        Self::constant(ctx, GaussRat::one())
    }

    pub fn monomial(ctx: &QContext, m: u32, n: u32, c: GaussRat) -> Self {
        let mut p = Self::zero(ctx);
        p.add_term((m, n), &c);
        p
    }

    pub fn z(ctx: &QContext) -> Self {
        Self::monomial(ctx, 0, 1, GaussRat::one())
    }

    pub fn zbar(ctx: &QContext) -> Self {
        Self::monomial(ctx, 1, 0, GaussRat::one())
    }

    pub fn from_terms<I>(ctx: &QContext, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, GaussRat)>,
    {
        let mut p = Self::zero(ctx);
        for (k, c) in terms {
            p.add_term(k, &c);
        }
        p
    }

    pub fn with_degree_cap(mut self, cap: u32) -> Self {
        self.cap = cap;
        self
    }

    pub fn ctx(&self) -> &QContext {
        &self.ctx
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, GaussRat> {
        &self.terms
    }

    pub fn coeff(&self, m: u32, n: u32) -> GaussRat {
        self.terms
            .get(&(m, n))
            .cloned()
            .unwrap_or_else(GaussRat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total degree `m + n` over the stored monomials.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(m, n)| m + n).max().unwrap_or(0)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|(m, _)| *m == 0)
    }

    pub fn is_antiholomorphic(&self) -> bool {
        self.terms.keys().all(|(_, n)| *n == 0)
    }

    fn add_term(&mut self, key: Monomial, c: &GaussRat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key).or_insert_with(GaussRat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    fn check_ctx(&self, other: &NormalPoly) -> Result<()> {
        if self.ctx.same_q(&other.ctx) {
            Ok(())
        } else {
            Err(QDiskError::ContextMismatch {
                left: self.ctx.q().to_string(),
                right: other.ctx.q().to_string(),
            })
        }
    }

    fn check_cap(&self) -> Result<()> {
        for (m, n) in self.terms.keys() {
            let d = (*m).max(*n);
            if d > self.cap {
                return Err(QDiskError::DegreeCap {
                    degree: d,
                    cap: self.cap,
                });
            }
        }
        Ok(())
    }

    fn map_terms<F>(&self, f: F) -> NormalPoly
    where
        F: Fn(Monomial, &GaussRat) -> Option<(Monomial, GaussRat)>,
    {
        let mut out = Self {
            terms: BTreeMap::new(),
            ctx: self.ctx.clone(),
            cap: self.cap,
        };
        for (k, c) in &self.terms {
            if let Some((k2, c2)) = f(*k, c) {
                out.add_term(k2, &c2);
            }
        }
        out
    }

    pub fn add(&self, other: &NormalPoly) -> Result<NormalPoly> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &NormalPoly) -> Result<NormalPoly> {
        self.add(&other.scale(&-GaussRat::one()))
    }

    pub fn scale(&self, s: &GaussRat) -> NormalPoly {
        self.map_terms(|k, c| Some((k, c * s)))
    }

    /// `z * self`, renormalized: `z zbar^c z^d = q^{-c} zbar^c z^{d+1} - alpha_c zbar^{c-1} z^d`
    /// with `alpha_c = (1 - q) sum_{i=1}^{c} q^{-i}`.
    fn left_mul_z(&self, q_inv_pows: &[BigRational], alphas: &[BigRational]) -> NormalPoly {
        let mut out = NormalPoly {
            terms: BTreeMap::new(),
            ctx: self.ctx.clone(),
            cap: self.cap,
        };
        for (&(c, d), coeff) in &self.terms {
            out.add_term((c, d + 1), &coeff.scale(&q_inv_pows[c as usize]));
            if c > 0 {
                out.add_term((c - 1, d), &-coeff.scale(&alphas[c as usize]));
            }
        }
        out
    }

    /// Exact product in normal order.
    pub fn normal_multiply(&self, other: &NormalPoly) -> Result<NormalPoly> {
        self.check_ctx(other)?;
        let max_b = self.terms.keys().map(|(_, b)| *b).max().unwrap_or(0);
        let max_c = other.terms.keys().map(|(c, _)| *c).max().unwrap_or(0) + max_b;
        let q = self.ctx.q();
        let q_inv = q.recip();
        let one = BigRational::one();
        let mut q_inv_pows = Vec::with_capacity(max_c as usize + 1);
        let mut alphas = Vec::with_capacity(max_c as usize + 1);
        let mut p = BigRational::one();
        let mut acc = BigRational::zero();
        for _ in 0..=max_c {
            q_inv_pows.push(p.clone());
            alphas.push(&acc * (&one - q));
            p *= &q_inv;
            acc += &p;
        }
        // z^b * other for b = 0..=max_b
        let mut z_pows = Vec::with_capacity(max_b as usize + 1);
        z_pows.push(other.clone());
        for b in 1..=max_b as usize {
            let next = z_pows[b - 1].left_mul_z(&q_inv_pows, &alphas);
            z_pows.push(next);
        }
        let mut out = NormalPoly {
            terms: BTreeMap::new(),
            ctx: self.ctx.clone(),
            cap: self.cap.min(other.cap),
        };
        for (&(a, b), c) in &self.terms {
            for (&(m, n), c2) in &z_pows[b as usize].terms {
                out.add_term((m + a, n), &(c * c2));
            }
        }
        out.check_cap()?;
        Ok(out)
    }

    /// `[self, other] = self other - other self`
    pub fn commutator(&self, other: &NormalPoly) -> Result<NormalPoly> {
        self.normal_multiply(other)?
            .sub(&other.normal_multiply(self)?)
    }

    pub fn pow(&self, k: u32) -> Result<NormalPoly> {
        let mut acc = NormalPoly::one(&self.ctx);
        for _ in 0..k {
            acc = acc.normal_multiply(self)?;
        }
        Ok(acc)
    }

    /// `(zbar^m z^n)^* = zbar^n z^m`, coefficients conjugated. Already in normal order.
    pub fn adjoint(&self) -> NormalPoly {
        self.map_terms(|(m, n), c| Some(((n, m), c.conj())))
    }

    /// `J(zbar^m z^n) = q^{m-n} zbar^m z^n`
    pub fn scale_j(&self) -> NormalPoly {
        self.map_terms(|(m, n), c| Some(((m, n), c.scale(&self.ctx.q_pow(m as i64 - n as i64)))))
    }

    /// `partial(zbar^m z^n) = q^{m-n+1} [n]_q zbar^m z^{n-1}`
    pub fn partial(&self) -> NormalPoly {
        self.map_terms(|(m, n), c| {
            (n > 0).then(|| {
                let f = self.ctx.q_pow(m as i64 - n as i64 + 1) * q_int(n, &self.ctx);
                ((m, n - 1), c.scale(&f))
            })
        })
    }

    /// `barpartial(zbar^m z^n) = [m]_q zbar^{m-1} z^n`
    pub fn barpartial(&self) -> NormalPoly {
        self.map_terms(|(m, n), c| (m > 0).then(|| ((m - 1, n), c.scale(&q_int(m, &self.ctx)))))
    }

    pub fn laplacian(&self, order: LaplaceOrder) -> NormalPoly {
        match order {
            LaplaceOrder::PartialBarpartial => self.barpartial().partial(),
            LaplaceOrder::BarpartialPartial => self.partial().barpartial(),
        }
    }

    /// Value of the trace state: `sum_n c_{n,n} / [n+1]_q`.
    pub fn integrate(&self) -> GaussRat {
        let mut acc = GaussRat::zero();
        for (&(m, n), c) in &self.terms {
            if m == n {
                acc += &c.scale(&q_int(n + 1, &self.ctx).recip());
            }
        }
        acc
    }

    /// Exact boundary symbol: `zbar^m z^n` contributes to the mode `e^{i(n-m) theta}`.
    pub fn symbol_exact(&self) -> BTreeMap<i64, GaussRat> {
        let mut out: BTreeMap<i64, GaussRat> = BTreeMap::new();
        for (&(m, n), c) in &self.terms {
            *out.entry(n as i64 - m as i64)
                .or_insert_with(GaussRat::zero) += c;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn symbol(&self) -> BoundaryFunction {
        BoundaryFunction::from_fourier(
            self.symbol_exact()
                .into_iter()
                .map(|(d, c)| (d, c.to_complex())),
        )
    }

    /// Both sides of the Green identity: the integral of `barpartial(p)` and
    /// the contour integral `(1/2 pi i) \oint sigma(p) dzeta`, which for a
    /// trigonometric polynomial is its `e^{-i theta}` coefficient.
    pub fn green_check(&self) -> GreenCheck {
        let lhs = self.barpartial().integrate();
        let rhs = self
            .symbol_exact()
            .remove(&-1)
            .unwrap_or_else(GaussRat::zero);
        let pass = lhs == rhs;
        GreenCheck { lhs, rhs, pass }
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            q: self.ctx.q().to_string(),
            terms: self
                .terms
                .iter()
                .map(|(&(m, n), c)| TermJson {
                    m,
                    n,
                    re: c.re.to_string(),
                    im: c.im.to_string(),
                })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("polynomial JSON is always serializable")
    }

    /// Parses the canonical JSON form. The context supplies the truncation and
    /// tolerances; its `q` must match the serialized one.
    pub fn from_json(json: &PolyJson, ctx: &QContext) -> Result<NormalPoly> {
        let q = parse_rational(&json.q)?;
        if &q != ctx.q() {
            return Err(QDiskError::ContextMismatch {
                left: json.q.clone(),
                right: ctx.q().to_string(),
            });
        }
        let mut p = NormalPoly::zero(ctx);
        for t in &json.terms {
            let c = GaussRat::new(parse_rational(&t.re)?, parse_rational(&t.im)?);
            p.add_term((t.m, t.n), &c);
        }
        p.check_cap()?;
        Ok(p)
    }

    pub fn from_json_str(s: &str, ctx: &QContext) -> Result<NormalPoly> {
        let json: PolyJson = serde_json::from_str(s)?;
        Self::from_json(&json, ctx)
    }

    /// Reads the context's `q` from the JSON itself.
    pub fn from_json_str_with_dim(s: &str, dim: usize) -> Result<NormalPoly> {
        let json: PolyJson = serde_json::from_str(s)?;
        let ctx = QContext::new(parse_rational(&json.q)?, dim)?;
        Self::from_json(&json, &ctx)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub m: u32,
    pub n: u32,
    pub re: String,
    pub im: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub q: String,
    pub terms: Vec<TermJson>,
}

/// Random normal-ordered polynomial with total degree at most `degree` and
/// small Gaussian-integer-over-small-denominator coefficients.
pub fn random_poly<R: Rng>(ctx: &QContext, degree: u32, rng: &mut R) -> NormalPoly {
    let mut p = NormalPoly::zero(ctx);
    for m in 0..=degree {
        for n in 0..=(degree - m) {
            if rng.gen_bool(0.5) {
                let re = BigRational::new(
                    BigInt::from(rng.gen_range(-4i64..=4)),
                    BigInt::from(rng.gen_range(1i64..=3)),
                );
                let im = if rng.gen_bool(0.3) {
                    BigRational::new(
                        BigInt::from(rng.gen_range(-2i64..=2)),
                        BigInt::from(rng.gen_range(1i64..=2)),
                    )
                } else {
                    BigRational::zero()
                };
                p.add_term((m, n), &GaussRat::new(re, im));
            }
        }
    }
    p
}
