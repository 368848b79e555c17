//! Verification suites run per `(q, N)` cell, and their reports.

use std::fmt::Write as _;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bergman::{
    coherent_expectation, coherent_state, kernel_eval, kernel_series, kernel_terms, moment,
    toeplitz_quantize, BergmanGrid, Symbol,
};
use crate::boundary::BoundaryFunction;
use crate::error::{QDiskError, Result};
use crate::function_theory::{
    antiderivative_report, antiholomorphic_monomial, classify, dirichlet_cross_check,
    dirichlet_solve, harmonic_diagnostics, harnack_demo, is_weakly_harmonic,
    scalability_diagnostic, symbol_extract, Classification,
};
use crate::gauss::GaussRat;
use crate::opmat::{
    d_op, integral_matrix, laplacian_matrix, neumann_inverse, op_norm, structure_checks, to_matrix,
    Derivative, ExactOp, TruncOp, FLOAT_LAPLACIAN_MAX_DIM,
};
use crate::polalg::{random_poly, LaplaceOrder, NormalPoly};
use crate::qnum::{
    euler_series, euler_terms_for, jackson_integral, pochhammer_terms_for, q_derivative,
    q_derivative_exact, q_int, q_pochhammer, ratio, rational_to_f64, QContext,
};

pub const SEED_ENV: &str = "QDISK_SEED";
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Largest truncation on which the rational engine runs inside a cell.
pub const EXACT_BLOCK: usize = 64;

/// Smallest truncation accepted by the harness.
pub const MIN_VERIFY_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Qnum,
    Polalg,
    Opmat,
    Bergman,
    FunctionTheory,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Qnum,
        Suite::Polalg,
        Suite::Opmat,
        Suite::Bergman,
        Suite::FunctionTheory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Qnum => "qnum",
            Suite::Polalg => "polalg",
            Suite::Opmat => "opmat",
            Suite::Bergman => "bergman",
            Suite::FunctionTheory => "function_theory",
        }
    }

    pub fn parse(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| QDiskError::Format(format!("unknown suite {s:?}")))
    }
}

/// One measured quantity against its bound. Exact checks use `value` 0/1
/// and `bound` 0.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub q: String,
    #[serde(rename = "N")]
    pub dim: usize,
    pub seed: u64,
    /// `q^N`, the scale of every truncation error in the cell.
    pub truncation_bound: f64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

impl CellReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// `q_N.json`, with the slash in `q` replaced.
    pub fn file_name(&self) -> String {
        format!("q{}_N{}.json", self.q.replace('/', "-"), self.dim)
    }
}

/// CSV with one row per cell.
pub fn summary_csv(reports: &[CellReport]) -> String {
    let mut out = String::from("q,N,seed,truncation_bound,checks,passed,failed\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{:e},{},{},{}",
            r.q,
            r.dim,
            r.seed,
            r.truncation_bound,
            r.checks.len(),
            r.passed,
            r.failed
        );
    }
    out
}

/// Seed from `QDISK_SEED`, or the default when unset.
pub fn seed_from_env() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| {
            QDiskError::Format(format!("{SEED_ENV}={s:?} is not an unsigned integer"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

struct Recorder {
    suite: Suite,
    checks: Vec<Check>,
}

impl Recorder {
    fn bound(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.checks.push(Check {
            suite: self.suite,
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
            detail: None,
        });
    }

    fn exact(&mut self, name: impl Into<String>, ok: bool) {
        self.bound(name, if ok { 0.0 } else { 1.0 }, 0.0);
    }

    fn note(&mut self, detail: String) {
        if let Some(c) = self.checks.last_mut() {
            c.detail = Some(detail);
        }
    }

    fn failed(&mut self, name: impl Into<String>, err: QDiskError) {
        self.checks.push(Check {
            suite: self.suite,
            name: name.into(),
            value: f64::NAN,
            bound: 0.0,
            pass: false,
            detail: Some(err.to_string()),
        });
    }

    fn run<F>(&mut self, name: &str, f: F)
    where
        F: FnOnce(&mut Recorder) -> Result<()>,
    {
        if let Err(e) = f(self) {
            self.failed(name, e);
        }
    }
}

/// Runs the selected suites on one cell. Randomized samples are drawn from a
/// ChaCha8 stream seeded by `seed` and the cell, so reports are reproducible.
pub fn run_cell(ctx: &QContext, suites: &[Suite], seed: u64) -> Result<CellReport> {
    if ctx.dim() < MIN_VERIFY_DIM {
        return Err(QDiskError::DimensionTooSmall {
            dim: ctx.dim(),
            min: MIN_VERIFY_DIM,
        });
    }
    let mut checks = Vec::new();
    for &suite in Suite::ALL.iter().filter(|s| suites.contains(s)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((ctx.dim() as u64) << 32) ^ suite as u64);
        let mut rec = Recorder {
            suite,
            checks: Vec::new(),
        };
        match suite {
            Suite::Qnum => qnum_suite(ctx, &mut rng, &mut rec),
            Suite::Polalg => polalg_suite(ctx, &mut rng, &mut rec),
            Suite::Opmat => opmat_suite(ctx, &mut rng, &mut rec),
            Suite::Bergman => bergman_suite(ctx, &mut rec),
            Suite::FunctionTheory => function_theory_suite(ctx, &mut rng, &mut rec),
        }
        checks.extend(rec.checks);
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    Ok(CellReport {
        q: ctx.q().to_string(),
        dim: ctx.dim(),
        seed,
        truncation_bound: ctx.q_powf(ctx.dim() as i64),
        passed: checks.len() - failed,
        failed,
        checks,
    })
}

fn small_rational<R: Rng>(rng: &mut R) -> BigRational {
    ratio(rng.gen_range(-6..=6), rng.gen_range(1..=4))
}

fn qnum_suite(ctx: &QContext, rng: &mut ChaCha8Rng, rec: &mut Recorder) {
    let q = ctx.q().clone();
    let ok = (0..=12u32).all(|n| {
        let mut s = BigRational::zero();
        for k in 0..n {
            s += ctx.q_pow(k as i64);
        }
        q_int(n, ctx) == s
    });
    rec.exact("q_integer_geometric_sum", ok);

    let ok = (1..=8u32).all(|n| {
        [ratio(1, 3), ratio(1, 1), ratio(5, 2)].iter().all(|y| {
            let d = q_derivative_exact(|t| crate::qnum::pow_rational(t, n as i64), y, ctx).unwrap();
            d == q_int(n, ctx) * crate::qnum::pow_rational(y, n as i64 - 1)
        })
    });
    rec.exact("q_derivative_monomials", ok);

    rec.run("euler_times_pochhammer", |rec| {
        let mut worst = 0.0f64;
        for x in [0.1, -0.5, 0.9] {
            let x = Complex64::new(x, 0.0);
            let e = euler_series(x, ctx, euler_terms_for(x.norm(), ctx, 1e-16))?;
            let p = q_pochhammer(x, ctx, pochhammer_terms_for(x.norm(), ctx, 1e-16)).value;
            worst = worst.max((e * p - 1.0).norm());
        }
        rec.bound("euler_times_pochhammer", worst, 1e-12);
        Ok(())
    });

    rec.run("jackson_monomials", |rec| {
        let mut worst = 0.0f64;
        let mut tail = 0.0f64;
        for n in 0..=6 {
            let j = jackson_integral(|y| y.powi(n), ctx, Some(1.0), 1e-16)?;
            worst = worst.max((j.value - 1.0 / rational_to_f64(&q_int(n as u32 + 1, ctx))).abs());
            tail = tail.max(j.tail_bound);
        }
        rec.bound("jackson_monomials", worst, tail + 1e-14);
        Ok(())
    });

    rec.run("jackson_fundamental_theorem", |rec| {
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let g: Vec<f64> = (0..=6)
                .map(|_| rational_to_f64(&small_rational(rng)))
                .collect();
            let gf = |y: f64| g.iter().rev().fold(0.0, |acc, c| acc * y + c);
            let dg = |y: f64| q_derivative(gf, y, ctx).unwrap_or(0.0);
            let sup: f64 = g
                .iter()
                .enumerate()
                .map(|(n, c)| c.abs() * n as f64)
                .sum::<f64>()
                / (1.0 - q_f(&q));
            let j = jackson_integral(dg, ctx, Some(sup), 1e-15)?;
            worst = worst.max((j.value - (gf(1.0) - gf(0.0))).abs());
        }
        rec.bound("jackson_fundamental_theorem", worst, 1e-12);
        Ok(())
    });
}

fn q_f(q: &BigRational) -> f64 {
    rational_to_f64(q)
}

fn polalg_suite(ctx: &QContext, rng: &mut ChaCha8Rng, rec: &mut Recorder) {
    let z = NormalPoly::z(ctx);
    let zb = NormalPoly::zbar(ctx);
    let one = NormalPoly::one(ctx);
    let zero = NormalPoly::zero(ctx);
    let q = GaussRat::real(ctx.q().clone());
    let one_minus_q = GaussRat::real(BigRational::one() - ctx.q());

    rec.run("defining_relation", |rec| {
        let lhs = zb.normal_multiply(&z)?;
        let rhs = z
            .normal_multiply(&zb)?
            .scale(&q)
            .add(&one.scale(&one_minus_q))?;
        rec.exact("defining_relation", lhs == rhs);
        Ok(())
    });

    rec.exact(
        "derivative_axioms",
        z.partial() == one
            && zb.partial() == zero
            && zb.barpartial() == one
            && z.barpartial() == zero,
    );

    rec.run("twisted_leibniz", |rec| {
        let mut ok = true;
        for _ in 0..100 {
            let a = random_poly(ctx, 3, rng);
            let b = random_poly(ctx, 3, rng);
            let ab = a.normal_multiply(&b)?;
            let aj = a.scale_j();
            let bar = a
                .barpartial()
                .normal_multiply(&b)?
                .add(&aj.normal_multiply(&b.barpartial())?)?;
            let hol = a
                .partial()
                .normal_multiply(&b)?
                .add(&aj.normal_multiply(&b.partial())?)?;
            ok &= ab.barpartial() == bar && ab.partial() == hol;
        }
        rec.exact("twisted_leibniz", ok);
        Ok(())
    });

    let mut ok = true;
    for m in 0..=5 {
        for n in 0..=5 {
            let p = NormalPoly::monomial(ctx, m, n, GaussRat::one());
            let lhs = p.laplacian(LaplaceOrder::BarpartialPartial);
            let rhs = p.laplacian(LaplaceOrder::PartialBarpartial).scale(&q);
            ok &= lhs == rhs;
        }
    }
    rec.exact("laplacian_commutation", ok);

    let mut ok = true;
    for m in 0..=6u32 {
        for n in 0..=6u32 {
            let got = NormalPoly::monomial(ctx, n, m, GaussRat::one()).integrate();
            let want = if m == n {
                GaussRat::real(BigRational::one() / q_int(n + 1, ctx))
            } else {
                GaussRat::zero()
            };
            ok &= got == want;
        }
    }
    rec.exact("integral_lemma", ok);

    let mut ok = true;
    for m in 0..=5 {
        for n in 0..=5 {
            let g = NormalPoly::monomial(ctx, m, n, GaussRat::one()).green_check();
            let expect = if m == n + 1 {
                GaussRat::one()
            } else {
                GaussRat::zero()
            };
            ok &= g.pass && g.lhs == expect;
        }
    }
    rec.exact("green_theorem", ok);
}

fn opmat_suite(ctx: &QContext, rng: &mut ChaCha8Rng, rec: &mut Recorder) {
    let n = ctx.dim();
    let s = structure_checks(ctx);
    rec.exact("relation_exact", s.relation_exact_zero);
    rec.bound("relation_float", s.relation_residual, 1e-14);
    rec.exact(
        "shift_singular_values_decreasing",
        s.singular_values_decreasing,
    );

    // exact compressions agree with the leading block of any larger one, so
    // the rational checks run on at most EXACT_BLOCK rows
    let ectx = match ctx.with_dim(n.min(EXACT_BLOCK)) {
        Ok(c) => c,
        Err(e) => return rec.failed("exact_context", e),
    };
    let ez = ExactOp::z(&ectx);
    let ezb = ExactOp::zbar(&ectx);
    let id = ExactOp::identity(&ectx);
    rec.run("derivative_axioms", |rec| {
        let ok = ez.d_op(Derivative::Partial).interior_max_diff(&id)? == 0.0
            && ezb.d_op(Derivative::Partial).interior_is_zero()
            && ezb.d_op(Derivative::Barpartial).interior_max_diff(&id)? == 0.0
            && ez.d_op(Derivative::Barpartial).interior_is_zero();
        rec.exact("derivative_axioms_exact", ok);
        Ok(())
    });

    rec.run("twisted_leibniz_exact", |rec| {
        let mut worst = 0.0f64;
        let deg = 3.min(n as u32 / 4);
        for _ in 0..5 {
            let a = ExactOp::from_poly(&random_poly(ctx, deg, rng), &ectx)?;
            let b = ExactOp::from_poly(&random_poly(ctx, deg, rng), &ectx)?;
            let ab = a.matmul(&b)?;
            for which in [Derivative::Partial, Derivative::Barpartial] {
                let rhs = a
                    .d_op(which)
                    .matmul(&b)?
                    .add(&a.scale_j().matmul(&b.d_op(which))?)?;
                worst = worst.max(ab.d_op(which).interior_max_diff(&rhs)?);
            }
        }
        rec.bound("twisted_leibniz_exact", worst, 1e-10);
        Ok(())
    });

    rec.run("derivative_matches_symbolic", |rec| {
        let mut worst = 0.0f64;
        let deg = 3.min(n as u32 / 4);
        for _ in 0..5 {
            let p = random_poly(ctx, deg, rng);
            let a = ExactOp::from_poly(&p, &ectx)?;
            for (which, dp) in [
                (Derivative::Partial, p.partial()),
                (Derivative::Barpartial, p.barpartial()),
            ] {
                let want = ExactOp::from_poly(&dp, &ectx)?;
                worst = worst.max(a.d_op(which).interior_max_diff(&want)?);
            }
        }
        rec.bound("derivative_matches_symbolic", worst, 1e-10);
        Ok(())
    });

    rec.run("laplacian_commutation", |rec| {
        let q = GaussRat::real(ctx.q().clone());
        let top = 3.min(n as u32 / 8);
        let mut worst = 0.0f64;
        let mut float_worst = 0.0f64;
        for m in 0..=top {
            for k in 0..=top {
                let p = NormalPoly::monomial(ctx, m, k, GaussRat::one());
                let a = ExactOp::from_poly(&p, &ectx)?;
                let lhs = a.laplacian(LaplaceOrder::BarpartialPartial);
                let rhs = a.laplacian(LaplaceOrder::PartialBarpartial).scale(&q);
                worst = worst.max(lhs.interior_max_diff(&rhs)?);
                if n <= FLOAT_LAPLACIAN_MAX_DIM {
                    let f = to_matrix(&p, ctx)?;
                    let fl = laplacian_matrix(&f, LaplaceOrder::BarpartialPartial)?;
                    let fr = laplacian_matrix(&f, LaplaceOrder::PartialBarpartial)?;
                    let rows = stable_rows(ctx, 2, 1e-9).min(fl.margin());
                    let diff = fl.sub(&fr.scale(Complex64::new(ctx.q_f64(), 0.0)))?;
                    float_worst = float_worst.max(diff.with_margin(rows).interior_max_abs());
                }
            }
        }
        rec.bound("laplacian_commutation_exact", worst, 0.0);
        if n <= FLOAT_LAPLACIAN_MAX_DIM {
            rec.bound("laplacian_commutation_float", float_worst, 1e-8);
        }
        Ok(())
    });

    rec.run("float_matches_exact", |rec| {
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let p = random_poly(ctx, 4.min(n as u32 / 2), rng);
            let f = to_matrix(&p, ctx)?;
            worst = worst.max(f.interior_max_diff(&ExactOp::from_poly(&p, ctx)?.to_float()));
        }
        rec.bound("float_matches_exact", worst, 1e-12);
        Ok(())
    });

    rec.run("float_derivative_small_block", |rec| {
        let (z, zb) = (
            to_matrix(&NormalPoly::z(ctx), ctx)?,
            to_matrix(&NormalPoly::zbar(ctx), ctx)?,
        );
        let idf = TruncOp::identity(ctx);
        let rows = stable_rows(ctx, 1, 1e-12).min(n - 1);
        let head = |a: TruncOp| a.with_margin(rows);
        let worst = head(d_op(&z, Derivative::Partial))
            .interior_max_diff(&idf)
            .max(head(d_op(&zb, Derivative::Barpartial)).interior_max_diff(&idf))
            .max(head(d_op(&z, Derivative::Barpartial)).interior_max_abs())
            .max(head(d_op(&zb, Derivative::Partial)).interior_max_abs());
        rec.bound("float_derivative_small_block", worst, 1e-10);
        Ok(())
    });

    rec.run("integral_lemma_trace", |rec| {
        let mut worst_excess = 0.0f64;
        let top = 6.min(n as u32 / 4);
        for m in 0..=top {
            for k in 0..=top {
                let a = to_matrix(&NormalPoly::monomial(ctx, k, m, GaussRat::one()), ctx)?;
                let v = integral_matrix(&a);
                let want = if m == k {
                    1.0 / rational_to_f64(&q_int(k + 1, ctx))
                } else {
                    0.0
                };
                // monomials in the generators have norm at most 1
                let allowed = ctx.q_powf(n as i64) + 1e-12;
                worst_excess = worst_excess.max((v.value - want).norm() - allowed);
            }
        }
        rec.bound("integral_lemma_trace", worst_excess.max(0.0), 0.0);
        rec.note("value is the excess over q^N + 1e-12".into());
        Ok(())
    });
}

/// Leading rows on which `q^{-power i}` roundoff amplification stays below
/// `target`.
fn stable_rows(ctx: &QContext, power: u32, target: f64) -> usize {
    let growth = power as f64 * (1.0 / ctx.q_f64()).ln();
    ((target / f64::EPSILON).ln() / growth).floor().max(1.0) as usize
}

fn bergman_suite(ctx: &QContext, rec: &mut Recorder) {
    let grid = BergmanGrid::new(ctx);
    rec.bound("grid_mass", (grid.total_mass() - 1.0).abs(), 1e-12);

    let size = 13.min(ctx.dim());
    let g = grid.gram(size);
    let mut worst = 0.0f64;
    for (i, row) in g.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            let want = if i == k { 1.0 } else { 0.0 };
            worst = worst.max((v - want).norm());
        }
    }
    rec.bound("gram_orthonormal", worst, 1e-10);

    let mut worst = 0.0f64;
    let mut prod = 1.0;
    for n in 0..=12 {
        worst = worst.max((moment(n, &grid) - prod).abs());
        prod *= 1.0 - ctx.q_powf(n as i64 + 1);
    }
    rec.bound("moments", worst, 1e-10);

    rec.run("kernel_product_vs_series", |rec| {
        let mut worst = 0.0f64;
        for (zeta, eta) in [
            (Complex64::new(0.3, 0.2), Complex64::new(-0.1, 0.5)),
            (Complex64::new(0.7, 0.0), Complex64::new(0.6, 0.1)),
            (Complex64::new(0.0, -0.8), Complex64::new(0.2, -0.8)),
        ] {
            let etabar = eta.conj();
            let x = (zeta * etabar).norm();
            let a = kernel_eval(zeta, etabar, ctx, kernel_terms(x, ctx, 1e-16))?;
            let b = kernel_series(zeta, etabar, ctx, euler_terms_for(x, ctx, 1e-16))?;
            worst = worst.max((a - b).norm() / a.norm().max(1.0));
        }
        rec.bound("kernel_product_vs_series", worst, 1e-12);
        Ok(())
    });

    rec.run("toeplitz_zeta_is_shift", |rec| {
        let t = toeplitz_quantize(&Symbol::monomial(0, 1), &grid, ctx)?.op;
        let z = to_matrix(&NormalPoly::z(ctx), ctx)?;
        rec.bound("toeplitz_zeta_is_shift", t.interior_max_diff(&z), 1e-10);
        Ok(())
    });

    rec.run("coherent_probe", |rec| {
        let f = [
            Complex64::new(0.5, 0.0),
            Complex64::new(1.0, -0.5),
            Complex64::new(0.0, 0.3),
            Complex64::new(-0.2, 0.0),
            Complex64::new(0.1, 0.1),
            Complex64::new(0.05, 0.0),
        ];
        let deg = (f.len() - 1).min(ctx.dim() / 2);
        let symbol = Symbol::Poly((0..=deg).map(|d| ((0u32, d as u32), f[d])).collect());
        let a = toeplitz_quantize(&symbol, &grid, ctx)?.op;
        let mut worst = 0.0f64;
        let mut used = 0;
        for eta in crate::bergman::coherent_probe_points() {
            if coherent_state(eta, ctx)?.tail_bound > 1e-10 {
                continue;
            }
            used += 1;
            worst = worst.max((coherent_expectation(&a, eta)? - symbol.eval(eta)).norm());
        }
        rec.bound("coherent_probe", worst, 1e-7);
        rec.note(format!(
            "{used} probe points with coherent tail below 1e-10"
        ));
        Ok(())
    });
}

fn random_boundary(rng: &mut ChaCha8Rng, bw: i64) -> BoundaryFunction {
    BoundaryFunction::from_fourier((-bw..=bw).map(|d| {
        (
            d,
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        )
    }))
}

fn function_theory_suite(ctx: &QContext, rng: &mut ChaCha8Rng, rec: &mut Recorder) {
    let n = ctx.dim();
    let mono = |m, k| to_matrix(&NormalPoly::monomial(ctx, m, k, GaussRat::one()), ctx);

    rec.run("classification", |rec| {
        let ok = classify(&mono(0, 3)?)?.classification == Classification::WeaklyHolo
            && classify(&mono(2, 0)?)?.classification == Classification::WeaklyAntiholo
            && classify(&mono(1, 1)?)?.classification == Classification::None
            && is_weakly_harmonic(&to_matrix(
                &NormalPoly::from_terms(
                    ctx,
                    [((0, 2), GaussRat::one()), ((3, 0), GaussRat::one())],
                ),
                ctx,
            )?)?
            .harmonic
            && !is_weakly_harmonic(&mono(1, 1)?)?.harmonic;
        rec.exact("classification", ok);
        Ok(())
    });

    let grid = BergmanGrid::new(ctx);
    let bw_max = 8.min(n as i64 / 4);
    rec.run("dirichlet", |rec| {
        let (mut route, mut mean, mut mean_bound, mut sym, mut sym_bound) =
            (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let (mut norm_excess, mut coherent_excess) = (0.0f64, 0.0f64);
        for _ in 0..3 {
            let bw = rng.gen_range(0..=bw_max);
            let f = random_boundary(rng, bw);
            let cc = dirichlet_cross_check(&f, &grid, ctx)?;
            route = route.max(cc.route_difference);
            let a = dirichlet_solve(&f, ctx)?;
            let v = integral_matrix(&a);
            mean = mean.max((v.value - f.coefficient(0)).norm());
            mean_bound = mean_bound.max(v.tail_bound + v.edge_bound + 1e-10);
            let est = symbol_extract(&a)?;
            sym = sym.max(est.symbol.max_coeff_diff(&f));
            sym_bound =
                sym_bound.max(1e-6_f64.max(2.0 * est.drift / (1.0 - ctx.q_f64()) + est.leak));
            let h = harmonic_diagnostics(&a, &f)?;
            norm_excess = norm_excess.max(h.op_norm - h.boundary_sup * (1.0 + 1e-9));
            coherent_excess = coherent_excess.max(h.coherent_lower - h.op_norm * (1.0 + 1e-9));
        }
        rec.bound("dirichlet_route_agreement", route, 1e-8);
        rec.bound("dirichlet_mean_value", mean, mean_bound);
        rec.bound("dirichlet_symbol_roundtrip", sym, sym_bound);
        rec.note("bound is max(1e-6, 2 drift / (1 - q) + leak)".into());
        rec.bound("max_principle_upper", norm_excess.max(0.0), 0.0);
        rec.bound("coherent_below_norm", coherent_excess.max(0.0), 0.0);
        Ok(())
    });

    rec.run("positivity", |rec| {
        let pole = Complex64::new(0.3, 0.0);
        let tol = 1e-12f64.max(0.3f64.powi(n as i32 / 2 - 1));
        let f = BoundaryFunction::poisson_kernel(pole, tol)?;
        let h = harmonic_diagnostics(&dirichlet_solve(&f, ctx)?, &f)?;
        rec.bound(
            "poisson_kernel_positivity",
            -h.min_eigenvalue.unwrap_or(f64::NAN),
            1e-10,
        );
        Ok(())
    });

    rec.run("harnack", |rec| {
        let rep = harnack_demo(ctx, 10.min(n / 2 - 1))?;
        rec.exact("harnack_monotone_cauchy", rep.monotone && rep.cauchy);
        Ok(())
    });

    rec.run("antiderivative", |rec| {
        let mut ok = true;
        let mut gap = 0.0f64;
        for d in 0..=6 {
            let r = antiderivative_report(&antiholomorphic_monomial(d), ctx)?;
            ok &= r.exact_check;
            gap = gap.max(r.weighted_series_gap);
        }
        rec.exact("antiderivative_exact", ok);
        rec.bound("antiderivative_weighted_series", gap, 1e-12);
        Ok(())
    });

    rec.run("scalability", |rec| {
        let qc = Complex64::new(ctx.q_f64(), 0.0);
        let terms = 64 + 4 * n;
        let anti = scalability_diagnostic(&neumann_inverse(qc, true, terms, ctx)?)?;
        let holo = scalability_diagnostic(&neumann_inverse(qc, false, terms, ctx)?)?;
        rec.exact("neumann_scalability", anti.scalable && !holo.scalable);
        let r = op_norm(&neumann_inverse(qc, false, terms, ctx)?)?;
        rec.bound(
            "neumann_norm_finite",
            if r.is_finite() { 0.0 } else { 1.0 },
            0.0,
        );
        Ok(())
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_passes_and_is_deterministic() {
        let ctx = QContext::parse("1/2", 32).unwrap();
        let a = run_cell(&ctx, &Suite::ALL, 1).unwrap();
        let failures: Vec<_> = a.failures().collect();
        assert!(failures.is_empty(), "{failures:?}");
        let b = run_cell(&ctx, &Suite::ALL, 1).unwrap();
        assert_eq!(a.to_json_string().unwrap(), b.to_json_string().unwrap());
        assert!(summary_csv(&[a]).starts_with("q,N,"));
    }

    #[test]
    fn small_dimension_rejected() {
        let ctx = QContext::parse("1/2", 6).unwrap();
        assert!(run_cell(&ctx, &Suite::ALL, 1).is_err());
    }
}
