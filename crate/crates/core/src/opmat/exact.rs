//! Exact truncations over the Gaussian rationals, in the monomial basis
//! `zeta^n` (where `z zeta^n = zeta^{n+1}` and
//! `zbar zeta^n = (1 - q^n) zeta^{n-1}`). No square roots appear, so the
//! derivative operators can be applied at large `N` without the `q^{-N}`
//! roundoff amplification of the floating-point route.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{monomial_norms, Derivative, TruncOp};
use crate::error::{QDiskError, Result};
use crate::gauss::GaussRat;
use crate::polalg::{LaplaceOrder, NormalPoly};
use crate::qnum::QContext;

#[derive(Clone, Debug)]
pub struct ExactOp {
    rows: Vec<BTreeMap<usize, GaussRat>>,
    ctx: QContext,
    margin: usize,
}

impl PartialEq for ExactOp {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_q(&other.ctx) && self.margin == other.margin && self.rows == other.rows
    }
}

impl ExactOp {
    pub fn zeros(ctx: &QContext, margin: usize) -> Self {
        Self {
            rows: vec![BTreeMap::new(); ctx.dim()],
            ctx: ctx.clone(),
            margin: margin.min(ctx.dim()),
        }
    }

    pub fn identity(ctx: &QContext) -> Self {
        let mut a = Self::zeros(ctx, ctx.dim());
        for i in 0..ctx.dim() {
            a.rows[i].insert(i, GaussRat::one());
        }
        a
    }

    pub fn z(ctx: &QContext) -> Self {
        let n = ctx.dim();
        let mut a = Self::zeros(ctx, n - 1);
        for k in 0..n - 1 {
            a.rows[k + 1].insert(k, GaussRat::one());
        }
        a
    }

    pub fn zbar(ctx: &QContext) -> Self {
        let n = ctx.dim();
        let mut a = Self::zeros(ctx, n - 1);
        for k in 1..n {
            a.rows[k - 1].insert(k, GaussRat::real(BigRational::one() - ctx.q_pow(k as i64)));
        }
        a
    }

    pub fn j(ctx: &QContext) -> Self {
        let mut a = Self::zeros(ctx, ctx.dim());
        for k in 0..ctx.dim() {
            a.rows[k].insert(k, GaussRat::real(ctx.q_pow(k as i64)));
        }
        a
    }

    /// `zbar z - q z zbar - (1 - q)` on the truncation.
    pub fn relation_residual(ctx: &QContext) -> Self {
        let z = Self::z(ctx);
        let zb = Self::zbar(ctx);
        let q = GaussRat::real(ctx.q().clone());
        let one_minus_q = GaussRat::real(BigRational::one() - ctx.q());
        let zbz = zb.matmul(&z).expect("same ctx");
        let zzb = z.matmul(&zb).expect("same ctx");
        zbz.sub(&zzb.scale(&q))
            .and_then(|r| r.sub(&Self::identity(ctx).scale(&one_minus_q)))
            .expect("same ctx")
    }

    /// Exact matrix of a normal-ordered polynomial, margin `N - degree`.
    pub fn from_poly(p: &NormalPoly, ctx: &QContext) -> Result<Self> {
        if !p.ctx().same_q(ctx) {
            return Err(QDiskError::ContextMismatch {
                left: p.ctx().q().to_string(),
                right: ctx.q().to_string(),
            });
        }
        let n = ctx.dim();
        let deg = p.degree() as usize;
        if 2 * deg > n {
            return Err(QDiskError::DegreeTooLarge {
                degree: deg as u32,
                dim: n,
            });
        }
        let one = BigRational::one();
        let mut a = Self::zeros(ctx, n - deg);
        for (&(m, nz), c) in p.terms() {
            let (m, nz) = (m as usize, nz as usize);
            for k in 0..n {
                let top = k + nz;
                if top < m || top - m >= n {
                    continue;
                }
                let mut f = one.clone();
                for t in 0..m {
                    f *= &one - ctx.q_pow((top - t) as i64);
                }
                a.add_at(top - m, k, c.scale(&f));
            }
        }
        Ok(a)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn with_margin(mut self, margin: usize) -> Self {
        self.margin = margin.min(self.dim());
        self
    }

    pub fn ctx(&self) -> &QContext {
        &self.ctx
    }

    pub fn get(&self, i: usize, k: usize) -> GaussRat {
        self.rows[i].get(&k).cloned().unwrap_or_else(GaussRat::zero)
    }

    fn add_at(&mut self, i: usize, k: usize, v: GaussRat) {
        if v.is_zero() {
            return;
        }
        let slot = self.rows[i].entry(k).or_insert_with(GaussRat::zero);
        *slot += &v;
        if slot.is_zero() {
            self.rows[i].remove(&k);
        }
    }

    fn check_same(&self, other: &ExactOp) -> Result<()> {
        if !self.ctx.same_q(&other.ctx) {
            return Err(QDiskError::ContextMismatch {
                left: self.ctx.q().to_string(),
                right: other.ctx.q().to_string(),
            });
        }
        if self.dim() != other.dim() {
            return Err(QDiskError::Shape(format!(
                "N = {} vs N = {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &ExactOp) -> Result<ExactOp> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.margin = self.margin.min(other.margin);
        for (i, row) in other.rows.iter().enumerate() {
            for (k, v) in row {
                out.add_at(i, *k, v.clone());
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &ExactOp) -> Result<ExactOp> {
        self.add(&other.scale(&GaussRat::from_int(-1)))
    }

    pub fn scale(&self, s: &GaussRat) -> ExactOp {
        let mut out = Self::zeros(&self.ctx, self.margin);
        if s.is_zero() {
            return out;
        }
        for (i, row) in self.rows.iter().enumerate() {
            out.rows[i] = row.iter().map(|(k, v)| (*k, v * s)).collect();
        }
        out
    }

    pub fn matmul(&self, other: &ExactOp) -> Result<ExactOp> {
        self.check_same(other)?;
        let n = self.dim();
        let mut out = Self::zeros(&self.ctx, (self.margin + other.margin).saturating_sub(n));
        for (i, row) in self.rows.iter().enumerate() {
            for (k, a) in row {
                for (j, b) in &other.rows[*k] {
                    out.add_at(i, *j, a * b);
                }
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &ExactOp) -> Result<ExactOp> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// `j^{-1} A j`
    pub fn scale_j(&self) -> ExactOp {
        let mut out = self.clone();
        for (i, row) in out.rows.iter_mut().enumerate() {
            for (k, v) in row.iter_mut() {
                *v = v.scale(&self.ctx.q_pow(*k as i64 - i as i64));
            }
        }
        out
    }

    /// Derivative through the scaled commutator, margin shrinks by one.
    pub fn d_op(&self, which: Derivative) -> ExactOp {
        let one = BigRational::one();
        let q = self.ctx.q().clone();
        let (gen, pref) = match which {
            Derivative::Partial => (Self::zbar(&self.ctx), &one / (&one - &q)),
            Derivative::Barpartial => (Self::z(&self.ctx), &one / (&q - &one)),
        };
        let mut c = gen.commutator(self).expect("same ctx");
        for (i, row) in c.rows.iter_mut().enumerate() {
            let f = &pref * self.ctx.q_pow(-(i as i64));
            for v in row.values_mut() {
                *v = v.scale(&f);
            }
        }
        c
    }

    pub fn laplacian(&self, order: LaplaceOrder) -> ExactOp {
        match order {
            LaplaceOrder::PartialBarpartial => {
                self.d_op(Derivative::Barpartial).d_op(Derivative::Partial)
            }
            LaplaceOrder::BarpartialPartial => {
                self.d_op(Derivative::Partial).d_op(Derivative::Barpartial)
            }
        }
    }

    /// `(1-q) sum_k q^k A_kk`; the diagonal is basis independent.
    pub fn integral(&self) -> GaussRat {
        let mut sum = GaussRat::zero();
        for (k, row) in self.rows.iter().enumerate() {
            if let Some(v) = row.get(&k) {
                sum += &v.scale(&self.ctx.q_pow(k as i64));
            }
        }
        sum.scale(&(BigRational::one() - self.ctx.q()))
    }

    /// Whether every entry of the leading `margin x margin` block vanishes.
    pub fn interior_is_zero(&self) -> bool {
        self.rows
            .iter()
            .take(self.margin)
            .all(|row| row.range(..self.margin).next().is_none())
    }

    /// Largest entry modulus of the interior block, in the orthonormal basis.
    pub fn interior_max_abs(&self) -> f64 {
        let s = monomial_norms(&self.ctx, self.dim());
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate().take(self.margin) {
            for (k, v) in row.range(..self.margin) {
                worst = worst.max((v.to_complex() * (s[i] / s[*k])).norm());
            }
        }
        worst
    }

    /// Largest entrywise distance on the common interior block, in the
    /// orthonormal basis.
    pub fn interior_max_diff(&self, other: &ExactOp) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.interior_max_abs())
    }

    /// Change to the orthonormal basis `e_n = zeta^n / s_n` and round.
    pub fn to_float(&self) -> TruncOp {
        let n = self.dim();
        let s = monomial_norms(&self.ctx, n);
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, row) in self.rows.iter().enumerate() {
            for (k, v) in row {
                entries[i * n + k] = v.to_complex() * (s[i] / s[*k]);
            }
        }
        TruncOp::from_entries(&self.ctx, entries, self.margin).expect("square")
    }
}
