//! Command-line harness.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bergman::{moment, toeplitz_quantize, BergmanGrid, Symbol};
use crate::boundary::BoundaryFunction;
use crate::error::{QDiskError, Result};
use crate::function_theory::{dirichlet_solve, harmonic_diagnostics, symbol_extract};
use crate::gauss::GaussRat;
use crate::opmat::{integral_matrix, to_matrix, Derivative, ExactOp, TruncOp};
use crate::polalg::{LaplaceOrder, NormalPoly};
use crate::qnum::{parse_rational, q_int, rational_to_f64, QContext, Tolerances};
use crate::verify::{run_cell, seed_from_env, summary_csv, CellReport, Suite, MIN_VERIFY_DIM};

pub const DEFAULT_QS: [&str; 3] = ["3/10", "1/2", "9/10"];
pub const DEFAULT_DIMS: [usize; 3] = [32, 64, 128];

#[derive(Parser, Debug)]
#[command(
    name = "qdisk",
    version,
    about = "Calculus and function theory on the quantum unit disk"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the identity suites over a (q, N) sweep.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Restrict to these suites.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
    },
    /// Solve the Dirichlet problem for boundary Fourier data.
    Dirichlet {
        #[command(flatten)]
        common: Common,
        /// Boundary data `{"d": [re, im], ...}`, inline or `@file`.
        #[arg(long)]
        input: String,
    },
    /// Toeplitz-quantize a symbol on the Bergman grid.
    Quantize {
        #[command(flatten)]
        common: Common,
        /// `monomial:m,n` or `poisson_kernel[:pole]`.
        #[arg(long, conflicts_with = "boundary")]
        symbol: Option<String>,
        /// Boundary data, quantized through its harmonic extension.
        #[arg(long)]
        boundary: Option<String>,
    },
    /// Derivatives and Laplacians of a normal-ordered polynomial.
    Derive {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        poly: PolyInput,
    },
    /// Integral of a polynomial, exact and through the weighted trace.
    Integrate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        poly: PolyInput,
    },
    /// Boundary symbol of a polynomial, exact and estimated from its matrix.
    Symbol {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        poly: PolyInput,
    },
    /// Reference tables.
    Table {
        #[command(flatten)]
        common: Common,
        which: TableKind,
        /// Largest index in the table.
        #[arg(long, default_value_t = 5)]
        max: u32,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Exact rational deformation parameters, e.g. `1/2`.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<String>,
    /// Truncation dimensions.
    #[arg(long, value_delimiter = ',')]
    pub dim: Vec<usize>,
    /// Identity tolerance override.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output file, or directory for `verify`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct PolyInput {
    /// Polynomial JSON `{"q": .., "terms": [{"m","n","re","im"}]}`, inline or `@file`.
    #[arg(long, conflicts_with = "monomial")]
    pub poly: Option<String>,
    /// Shorthand `m,n` for the monomial `zbar^m z^n`.
    #[arg(long)]
    pub monomial: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    Moments,
    Integrals,
    Green,
}

/// Validated sweep configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub qs: Vec<BigRational>,
    pub dims: Vec<usize>,
    pub tol: Tolerances,
    pub suites: Vec<Suite>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_common(common: &Common, suites: &[String]) -> Result<Self> {
        let qs: Vec<&str> = if common.q.is_empty() {
            DEFAULT_QS.to_vec()
        } else {
            common.q.iter().map(String::as_str).collect()
        };
        let qs = qs
            .into_iter()
            .map(|s| {
                let q = parse_rational(s)?;
                if q <= BigRational::from_integer(0.into()) || q >= BigRational::one() {
                    return Err(QDiskError::QOutOfRange(q.to_string()));
                }
                Ok(q)
            })
            .collect::<Result<Vec<_>>>()?;
        let dims = if common.dim.is_empty() {
            DEFAULT_DIMS.to_vec()
        } else {
            common.dim.clone()
        };
        if let Some(&d) = dims.iter().find(|&&d| d < MIN_VERIFY_DIM) {
            return Err(QDiskError::DimensionTooSmall {
                dim: d,
                min: MIN_VERIFY_DIM,
            });
        }
        let mut tol = Tolerances::default();
        if let Some(t) = common.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(QDiskError::Format(format!(
                    "tolerance must be positive, got {t}"
                )));
            }
            tol.identity = t;
        }
        let suites = if suites.is_empty() {
            Suite::ALL.to_vec()
        } else {
            suites
                .iter()
                .map(|s| Suite::parse(s))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Self {
            qs,
            dims,
            tol,
            suites,
            out: common.out.clone(),
            format: common.format,
        })
    }

    fn contexts(&self) -> Result<Vec<QContext>> {
        let mut out = Vec::new();
        for q in &self.qs {
            for &n in &self.dims {
                out.push(QContext::new(q.clone(), n)?.with_tolerances(self.tol));
            }
        }
        Ok(out)
    }

    /// The single cell used by the non-sweep commands; defaults `q = 1/2`, `N = 64`.
    fn single(&self, common: &Common) -> Result<QContext> {
        let q = if common.q.is_empty() {
            BigRational::new(1.into(), 2.into())
        } else {
            self.qs[0].clone()
        };
        let n = common.dim.first().copied().unwrap_or(64);
        Ok(QContext::new(q, n)?.with_tolerances(self.tol))
    }
}

/// Parses arguments, runs, and returns the process exit code: 0 on success,
/// 1 when a check fails, 2 on configuration or input errors.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn execute(cmd: &Command) -> Result<i32> {
    match cmd {
        Command::Verify { common, suite } => cmd_verify(&RunConfig::from_common(common, suite)?),
        Command::Dirichlet { common, input } => {
            let cfg = RunConfig::from_common(common, &[])?;
            let ctx = cfg.single(common)?;
            let f = BoundaryFunction::from_json_str(&read_arg(input)?)?;
            let out = cmd_dirichlet(&f, &ctx, cfg.format)?;
            emit(&out, cfg.out.as_deref())?;
            Ok(0)
        }
        Command::Quantize {
            common,
            symbol,
            boundary,
        } => {
            let cfg = RunConfig::from_common(common, &[])?;
            let ctx = cfg.single(common)?;
            let sym = match (symbol, boundary) {
                (Some(s), None) => Symbol::builtin(s)?,
                (None, Some(b)) => {
                    Symbol::Boundary(BoundaryFunction::from_json_str(&read_arg(b)?)?)
                }
                _ => {
                    return Err(QDiskError::Format(
                        "give exactly one of --symbol or --boundary".into(),
                    ))
                }
            };
            let grid = BergmanGrid::new(&ctx);
            let qz = toeplitz_quantize(&sym, &grid, &ctx)?;
            if qz.aliasing_warning {
                eprintln!("warning: symbol bandwidth unknown or at the angular Nyquist limit");
            }
            let out = match cfg.format {
                Format::Json => json_string(&json!({
                    "symbol": format!("{sym:?}"),
                    "aliasing_warning": qz.aliasing_warning,
                    "operator": qz.op.to_json(),
                }))?,
                Format::Csv => entries_csv(&qz.op),
            };
            emit(&out, cfg.out.as_deref())?;
            Ok(0)
        }
        Command::Derive { common, poly } => {
            let (cfg, p) = poly_setup(common, poly)?;
            emit(&cmd_derive(&p, cfg.format)?, cfg.out.as_deref())?;
            Ok(0)
        }
        Command::Integrate { common, poly } => {
            let (cfg, p) = poly_setup(common, poly)?;
            emit(&cmd_integrate(&p, cfg.format)?, cfg.out.as_deref())?;
            Ok(0)
        }
        Command::Symbol { common, poly } => {
            let (cfg, p) = poly_setup(common, poly)?;
            emit(&cmd_symbol(&p, cfg.format)?, cfg.out.as_deref())?;
            Ok(0)
        }
        Command::Table { common, which, max } => {
            let cfg = RunConfig::from_common(common, &[])?;
            let ctx = cfg.single(common)?;
            emit(
                &cmd_table(*which, &ctx, *max, cfg.format)?,
                cfg.out.as_deref(),
            )?;
            Ok(0)
        }
    }
}

/// Runs every cell, writes one JSON per cell plus `summary.csv` when `out`
/// is set, and prints the summary. Returns 0 iff every check passed.
pub fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let seed = seed_from_env()?;
    let mut reports: Vec<CellReport> = Vec::new();
    for ctx in cfg.contexts()? {
        let r = run_cell(&ctx, &cfg.suites, seed)?;
        for c in r.failures() {
            eprintln!(
                "FAIL q={} N={} {}::{} value={:e} bound={:e}{}",
                r.q,
                r.dim,
                c.suite.name(),
                c.name,
                c.value,
                c.bound,
                c.detail
                    .as_deref()
                    .map(|d| format!(" ({d})"))
                    .unwrap_or_default()
            );
        }
        reports.push(r);
    }
    let summary = summary_csv(&reports);
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        for r in &reports {
            std::fs::write(dir.join(r.file_name()), r.to_json_string()?)?;
        }
        std::fs::write(dir.join("summary.csv"), &summary)?;
    }
    match cfg.format {
        Format::Csv => write_stdout(&summary)?,
        Format::Json => write_stdout(&format!("{}\n", json_string(&reports)?))?,
    }
    Ok(if reports.iter().all(CellReport::all_passed) {
        0
    } else {
        1
    })
}

#[derive(Serialize)]
struct DirichletOutput {
    boundary: BoundaryFunction,
    element: crate::opmat::TruncOpJson,
    symbol: crate::function_theory::SymbolEstimate,
    diagnostics: crate::function_theory::HarmonicReport,
}

pub fn cmd_dirichlet(f: &BoundaryFunction, ctx: &QContext, format: Format) -> Result<String> {
    let a = dirichlet_solve(f, ctx)?;
    let symbol = symbol_extract(&a)?;
    let diagnostics = harmonic_diagnostics(&a, f)?;
    match format {
        Format::Csv => Ok(entries_csv(&a)),
        Format::Json => json_string(&DirichletOutput {
            boundary: f.clone(),
            element: a.to_json(),
            symbol,
            diagnostics,
        }),
    }
}

pub fn cmd_derive(p: &NormalPoly, format: Format) -> Result<String> {
    let ctx = p.ctx();
    let rows = [
        ("partial", p.partial(), Some(Derivative::Partial)),
        ("barpartial", p.barpartial(), Some(Derivative::Barpartial)),
        (
            "laplacian_partial_barpartial",
            p.laplacian(LaplaceOrder::PartialBarpartial),
            None,
        ),
        (
            "laplacian_barpartial_partial",
            p.laplacian(LaplaceOrder::BarpartialPartial),
            None,
        ),
    ];
    // operator route on the exact engine, compared on the interior block
    let a = ExactOp::from_poly(p, ctx)?;
    let mut checks = Vec::new();
    for (name, dp, which) in &rows {
        let op = match which {
            Some(w) => a.d_op(*w),
            None if *name == "laplacian_partial_barpartial" => {
                a.laplacian(LaplaceOrder::PartialBarpartial)
            }
            None => a.laplacian(LaplaceOrder::BarpartialPartial),
        };
        checks.push((*name, op.interior_max_diff(&ExactOp::from_poly(dp, ctx)?)?));
    }
    match format {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("input".into(), serde_json::to_value(p.to_json())?);
            for (name, dp, _) in &rows {
                obj.insert((*name).into(), serde_json::to_value(dp.to_json())?);
            }
            obj.insert(
                "operator_route_max_diff".into(),
                Value::Object(
                    checks
                        .iter()
                        .map(|(n, d)| ((*n).to_string(), json!(d)))
                        .collect(),
                ),
            );
            json_string(&Value::Object(obj))
        }
        Format::Csv => {
            let mut out = String::from("operation,m,n,re,im\n");
            for (name, dp, _) in &rows {
                for (&(m, n), c) in dp.terms() {
                    let _ = writeln!(out, "{name},{m},{n},{},{}", c.re, c.im);
                }
            }
            Ok(out)
        }
    }
}

pub fn cmd_integrate(p: &NormalPoly, format: Format) -> Result<String> {
    let ctx = p.ctx();
    let exact = p.integrate();
    let v = integral_matrix(&to_matrix(p, ctx)?);
    let diff = (v.value - exact.to_complex()).norm();
    match format {
        Format::Json => json_string(&json!({
            "input": p.to_json(),
            "exact": exact.to_string(),
            "exact_numeric": exact.to_complex(),
            "trace": v,
            "abs_diff": diff,
        })),
        Format::Csv => Ok(format!(
            "exact,exact_re,exact_im,trace_re,trace_im,abs_diff,tail_bound,edge_bound\n{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            exact,
            exact.to_complex().re,
            exact.to_complex().im,
            v.value.re,
            v.value.im,
            diff,
            v.tail_bound,
            v.edge_bound
        )),
    }
}

pub fn cmd_symbol(p: &NormalPoly, format: Format) -> Result<String> {
    let ctx = p.ctx();
    let exact = p.symbol_exact();
    let est = symbol_extract(&to_matrix(p, ctx)?)?;
    let err = est.symbol.max_coeff_diff(&p.symbol());
    match format {
        Format::Json => json_string(&json!({
            "input": p.to_json(),
            "exact": exact.iter().map(|(d, c)| (d.to_string(), Value::String(c.to_string()))).collect::<serde_json::Map<_, _>>(),
            "estimate": est,
            "max_coeff_error": err,
        })),
        Format::Csv => {
            let mut out = String::from("d,exact,estimate_re,estimate_im,abs_diff\n");
            for (d, c) in &exact {
                let e = est.symbol.coefficient(*d);
                let _ = writeln!(
                    out,
                    "{d},{c},{:e},{:e},{:e}",
                    e.re,
                    e.im,
                    (e - c.to_complex()).norm()
                );
            }
            Ok(out)
        }
    }
}

#[derive(Serialize)]
struct TableRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    n: u32,
    exact: String,
    numeric: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rhs: Option<String>,
    abs_diff: f64,
}

/// `moments`: `prod_{i<n} (1 - q^{i+1})` against the Bergman grid;
/// `integrals`: `1 / [n+1]_q` against the weighted trace;
/// `green`: both sides for `zbar^{n+1} z^n`.
pub fn cmd_table(which: TableKind, ctx: &QContext, max: u32, format: Format) -> Result<String> {
    let mut rows = Vec::new();
    match which {
        TableKind::Moments => {
            let grid = BergmanGrid::new(ctx);
            let mut exact = BigRational::one();
            for n in 0..=max {
                let numeric = moment(n as usize, &grid);
                rows.push(TableRow {
                    m: None,
                    n,
                    exact: exact.to_string(),
                    numeric,
                    rhs: None,
                    abs_diff: (numeric - rational_to_f64(&exact)).abs(),
                });
                exact *= BigRational::one() - ctx.q_pow(n as i64 + 1);
            }
        }
        TableKind::Integrals => {
            for n in 0..=max {
                let exact = BigRational::one() / q_int(n + 1, ctx);
                let p = NormalPoly::monomial(ctx, n, n, GaussRat::one());
                let numeric = integral_matrix(&to_matrix(&p, ctx)?).value.re;
                rows.push(TableRow {
                    m: None,
                    n,
                    exact: exact.to_string(),
                    numeric,
                    rhs: None,
                    abs_diff: (numeric - rational_to_f64(&exact)).abs(),
                });
            }
        }
        TableKind::Green => {
            for n in 0..=max {
                let g = NormalPoly::monomial(ctx, n + 1, n, GaussRat::one()).green_check();
                let numeric = g.lhs.to_complex().re;
                rows.push(TableRow {
                    m: Some(n + 1),
                    n,
                    exact: g.lhs.to_string(),
                    numeric,
                    rhs: Some(g.rhs.to_string()),
                    abs_diff: (g.lhs.to_complex() - g.rhs.to_complex()).norm(),
                });
            }
        }
    }
    match format {
        Format::Json => json_string(&rows),
        Format::Csv => {
            let mut out = match which {
                TableKind::Green => String::from("m,n,lhs,rhs,lhs_numeric,abs_diff\n"),
                _ => String::from("n,exact,numeric,abs_diff\n"),
            };
            for r in &rows {
                match &r.rhs {
                    Some(rhs) => {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{:e}",
                            r.m.unwrap_or(0),
                            r.n,
                            r.exact,
                            rhs,
                            r.numeric,
                            r.abs_diff
                        );
                    }
                    None => {
                        let _ = writeln!(out, "{},{},{},{:e}", r.n, r.exact, r.numeric, r.abs_diff);
                    }
                }
            }
            Ok(out)
        }
    }
}

fn poly_setup(common: &Common, input: &PolyInput) -> Result<(RunConfig, NormalPoly)> {
    let cfg = RunConfig::from_common(common, &[])?;
    let dim = common.dim.first().copied().unwrap_or(64);
    let p = match (&input.poly, &input.monomial) {
        (Some(s), None) => {
            let p = NormalPoly::from_json_str_with_dim(&read_arg(s)?, dim)?;
            if !common.q.is_empty() && p.ctx().q() != &cfg.qs[0] {
                return Err(QDiskError::ContextMismatch {
                    left: p.ctx().q().to_string(),
                    right: cfg.qs[0].to_string(),
                });
            }
            let ctx = p.ctx().clone().with_tolerances(cfg.tol);
            NormalPoly::from_json(&p.to_json(), &ctx)?
        }
        (None, Some(mn)) => {
            let ctx = cfg.single(common)?;
            let (m, n) = mn
                .split_once(',')
                .and_then(|(m, n)| Some((m.trim().parse().ok()?, n.trim().parse().ok()?)))
                .ok_or_else(|| QDiskError::Format(format!("--monomial expects m,n, got {mn:?}")))?;
            NormalPoly::monomial(&ctx, m, n, GaussRat::one())
        }
        _ => {
            return Err(QDiskError::Format(
                "give exactly one of --poly or --monomial".into(),
            ))
        }
    };
    Ok((cfg, p))
}

/// Inline text, or the contents of a file when prefixed with `@`.
fn read_arg(s: &str) -> Result<String> {
    match s.strip_prefix('@') {
        Some(path) => Ok(std::fs::read_to_string(path)?),
        None => Ok(s.to_string()),
    }
}

fn json_string<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn entries_csv(a: &TruncOp) -> String {
    let mut out = String::from("row,col,re,im\n");
    for i in 0..a.dim() {
        for k in 0..a.dim() {
            let v: Complex64 = a.get(i, k);
            if v.norm() > 0.0 {
                let _ = writeln!(out, "{i},{k},{:e},{:e}", v.re, v.im);
            }
        }
    }
    out
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{}\n", text.trim_end()))?,
        None => write_stdout(&format!("{}\n", text.trim_end()))?,
    }
    Ok(())
}

fn write_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}
