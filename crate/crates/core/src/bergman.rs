//! The analytic model `H^2(D, dmu)`: the atomic radial measure
//! `dmu = prod_{i>=0} (1 - |zeta|^2 q^{i+1}) sum_m q^m delta_{|zeta|^2 = q^m}`,
//! its orthonormal basis and reproducing kernel, coherent states and Toeplitz
//! quantization `T(f) = P M(f) P` of symbols on the disk.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::boundary::BoundaryFunction;
use crate::error::{QDiskError, Result};
use crate::opmat::{monomial_norms, op_norm, StateVector, TruncOp};
use crate::qnum::{euler_series, pochhammer_terms_for, q_pochhammer, QContext};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default number of angular nodes.
pub const DEFAULT_ANGULAR_COUNT: usize = 256;

/// Coherent states are only built for `|eta|` up to this radius.
pub const COHERENT_RADIUS_LIMIT: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialLevel {
    pub m: usize,
    pub radius: f64,
    pub weight: f64,
}

/// Product quadrature: the atoms `r_m = q^{m/2}` of the radial measure
/// times the uniform `K`-point rule on each circle.
#[derive(Clone, Debug)]
pub struct BergmanGrid {
    levels: Vec<RadialLevel>,
    angular_count: usize,
    product_depth: usize,
    ctx: QContext,
}

impl BergmanGrid {
    /// Grid with `K = max(256, 2N)`, so that no matrix element of an
    /// `N x N` quantization aliases a low-bandwidth symbol.
    pub fn new(ctx: &QContext) -> Self {
        Self::with_angular_count(ctx, DEFAULT_ANGULAR_COUNT.max(2 * ctx.dim()))
    }

    pub fn with_angular_count(ctx: &QContext, angular_count: usize) -> Self {
        let q = ctx.q_f64();
        let tail = ctx.tol.quadrature * (1.0 - q);
        // q^{M+1} < tail, and the same depth for the infinite product
        let mut depth = 0usize;
        let mut qp = q;
        while qp >= tail {
            qp *= q;
            depth += 1;
        }
        let levels = (0..=depth)
            .map(|m| {
                let qm = q.powi(m as i32);
                let mut w = qm;
                let mut f = qm * q;
                for _ in 0..depth {
                    w *= 1.0 - f;
                    f *= q;
                }
                RadialLevel {
                    m,
                    radius: qm.sqrt(),
                    weight: w,
                }
            })
            .collect();
        Self {
            levels,
            angular_count: angular_count.max(1),
            product_depth: depth,
            ctx: ctx.clone(),
        }
    }

    pub fn levels(&self) -> &[RadialLevel] {
        &self.levels
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    pub fn product_depth(&self) -> usize {
        self.product_depth
    }

    pub fn ctx(&self) -> &QContext {
        &self.ctx
    }

    pub fn total_mass(&self) -> f64 {
        self.levels.iter().map(|l| l.weight).sum()
    }

    pub fn node(&self, level: usize, k: usize) -> Complex64 {
        let theta = 2.0 * PI * k as f64 / self.angular_count as f64;
        Complex64::from_polar(self.levels[level].radius, theta)
    }

    /// `sum_m w_m (1/K) sum_k f(r_m e^{i theta_k})`, angular sums first,
    /// then levels in ascending `m`.
    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(Complex64) -> Complex64,
    {
        let k = self.angular_count;
        let mut total = ZERO;
        for (li, level) in self.levels.iter().enumerate() {
            let mut ang = ZERO;
            for j in 0..k {
                ang += f(self.node(li, j));
            }
            total += ang * (level.weight / k as f64);
        }
        total
    }

    /// Gram matrix of `e_0 .. e_{size-1}` under the quadrature.
    pub fn gram(&self, size: usize) -> Vec<Vec<Complex64>> {
        (0..size)
            .map(|a| {
                (0..size)
                    .map(|b| {
                        self.integrate(|z| {
                            basis_eval_unchecked(a, z, &self.ctx).conj()
                                * basis_eval_unchecked(b, z, &self.ctx)
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// `m,r_m,w_m` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,r_m,w_m\n");
        for l in &self.levels {
            out.push_str(&format!("{},{},{}\n", l.m, l.radius, l.weight));
        }
        out
    }
}

fn basis_eval_unchecked(n: usize, zeta: Complex64, ctx: &QContext) -> Complex64 {
    let q = ctx.q_f64();
    let mut norm2 = 1.0;
    let mut qi = q;
    for _ in 0..n {
        norm2 *= 1.0 - qi;
        qi *= q;
    }
    zeta.powu(n as u32) / norm2.sqrt()
}

/// `e_n(zeta) = zeta^n / sqrt(prod_{i<n} (1 - q^{i+1}))`.
pub fn basis_eval(n: usize, zeta: Complex64, ctx: &QContext) -> Result<Complex64> {
    if zeta.norm() > 1.0 + 1e-15 {
        return Err(QDiskError::OutsideDisk {
            what: "basis evaluation point",
            value: zeta.to_string(),
            modulus: zeta.norm(),
        });
    }
    Ok(basis_eval_unchecked(n, zeta, ctx))
}

/// Quadrature value of `int |zeta|^{2n} dmu`.
pub fn moment(n: usize, grid: &BergmanGrid) -> f64 {
    grid.levels
        .iter()
        .map(|l| l.weight * l.radius.powi(2 * n as i32))
        .sum()
}

fn check_kernel_arg(x: Complex64) -> Result<()> {
    if x.norm() >= 1.0 {
        return Err(QDiskError::OutsideDisk {
            what: "kernel argument zeta*conj(eta)",
            value: x.to_string(),
            modulus: x.norm(),
        });
    }
    Ok(())
}

/// Number of factors giving a relative kernel error below `tol`.
pub fn kernel_terms(x_abs: f64, ctx: &QContext, tol: f64) -> usize {
    pochhammer_terms_for(x_abs, ctx, tol)
}

/// Reproducing kernel `K(zeta, conj eta) = 1 / prod_{i<terms} (1 - zeta conj(eta) q^i)`.
pub fn kernel_eval(
    zeta: Complex64,
    etabar: Complex64,
    ctx: &QContext,
    terms: usize,
) -> Result<Complex64> {
    let x = zeta * etabar;
    check_kernel_arg(x)?;
    Ok(q_pochhammer(x, ctx, terms).value.inv())
}

/// Series form `1 + sum_{n>=1} x^n / prod_{k=1}^n (1 - q^k)`, `terms` summands.
pub fn kernel_series(
    zeta: Complex64,
    etabar: Complex64,
    ctx: &QContext,
    terms: usize,
) -> Result<Complex64> {
    let x = zeta * etabar;
    check_kernel_arg(x)?;
    euler_series(x, ctx, terms)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherentState {
    pub state: StateVector,
    /// Bound on the squared norm of the dropped coefficients `n >= N`.
    pub tail_bound: f64,
}

/// Truncated normalized kernel vector, `c_n = conj(e_n(eta)) / sqrt(K(eta, conj eta))`.
/// The coefficients are not renormalized after truncation.
pub fn coherent_state(eta: Complex64, ctx: &QContext) -> Result<CoherentState> {
    let r = eta.norm();
    if r >= 1.0 || r > COHERENT_RADIUS_LIMIT {
        return Err(QDiskError::OutsideDisk {
            what: "coherent state centre (limit 0.95)",
            value: eta.to_string(),
            modulus: r,
        });
    }
    let n = ctx.dim();
    let q = ctx.q_f64();
    let r2 = r * r;
    let kinv = q_pochhammer(Complex64::new(r2, 0.0), ctx, kernel_terms(r2, ctx, 1e-17))
        .value
        .re;
    let s = monomial_norms(ctx, n);
    let scale = kinv.sqrt();
    let coeffs = (0..n)
        .map(|k| eta.conj().powu(k as u32) / s[k] * scale)
        .collect();
    // |e_k(eta)|^2 for k >= N, via t_{k+1} = t_k |eta|^2 / (1 - q^{k+1})
    let mut t = if r2 == 0.0 {
        0.0
    } else {
        (0..n).fold(1.0f64, |acc, k| acc * r2 / (1.0 - q.powi(k as i32 + 1)))
    };
    let mut tail = 0.0f64;
    let mut k = n;
    loop {
        let ratio = r2 / (1.0 - q.powi(k as i32 + 1));
        if t == 0.0 || (ratio < 1.0 && t < 1e-30 * tail.max(1e-300)) {
            if t > 0.0 {
                tail += t * ratio / (1.0 - ratio);
            }
            break;
        }
        tail += t;
        t *= ratio;
        k += 1;
        if k > n + 100_000 {
            break;
        }
    }
    Ok(CoherentState {
        state: StateVector::new(coeffs),
        tail_bound: tail * kinv,
    })
}

/// A symbol on the closed disk.
#[derive(Clone)]
pub enum Symbol {
    /// Boundary data extended harmonically:
    /// `sum_{d>=0} c_d zeta^d + sum_{d<0} c_d conj(zeta)^{|d|}`.
    Boundary(BoundaryFunction),
    /// `sum c_{m,n} conj(zeta)^m zeta^n`.
    Poly(Vec<((u32, u32), Complex64)>),
    /// Arbitrary continuous function with optional declared bandwidth.
    Disk {
        f: Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>,
        bandwidth: Option<usize>,
        holomorphic: bool,
    },
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Boundary(b) => f.debug_tuple("Boundary").field(b).finish(),
            Symbol::Poly(t) => f.debug_tuple("Poly").field(t).finish(),
            Symbol::Disk {
                bandwidth,
                holomorphic,
                ..
            } => f
                .debug_struct("Disk")
                .field("bandwidth", bandwidth)
                .field("holomorphic", holomorphic)
                .finish_non_exhaustive(),
        }
    }
}

impl Symbol {
    pub fn monomial(m: u32, n: u32) -> Self {
        Symbol::Poly(vec![((m, n), Complex64::new(1.0, 0.0))])
    }

    pub fn constant(c: Complex64) -> Self {
        Symbol::Poly(vec![((0, 0), c)])
    }

    pub fn disk<F>(f: F, bandwidth: Option<usize>, holomorphic: bool) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Symbol::Disk {
            f: Arc::new(f),
            bandwidth,
            holomorphic,
        }
    }

    /// Named builtins: `poisson_kernel` or `poisson_kernel:<pole>` (real pole,
    /// default 0.5), and `monomial:m,n` for `conj(zeta)^m zeta^n`.
    pub fn builtin(name: &str) -> Result<Self> {
        let name = name.trim();
        if let Some(rest) = name.strip_prefix("poisson_kernel") {
            let pole = match rest.strip_prefix(':') {
                Some(p) => p
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| QDiskError::Format(format!("bad Poisson pole {p:?}")))?,
                None if rest.is_empty() => 0.5,
                None => return Err(QDiskError::Format(format!("unknown builtin {name:?}"))),
            };
            return Ok(Symbol::Boundary(BoundaryFunction::poisson_kernel(
                Complex64::new(pole, 0.0),
                1e-17,
            )?));
        }
        if let Some(rest) = name.strip_prefix("monomial:") {
            let parts: Vec<_> = rest.split(',').map(|s| s.trim().parse::<u32>()).collect();
            if let [Ok(m), Ok(n)] = parts[..] {
                return Ok(Symbol::monomial(m, n));
            }
            return Err(QDiskError::Format(format!(
                "expected monomial:m,n, got {name:?}"
            )));
        }
        Err(QDiskError::Format(format!(
            "unknown builtin symbol {name:?}"
        )))
    }

    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        match self {
            Symbol::Boundary(b) => b.harmonic_eval(zeta),
            Symbol::Poly(terms) => terms
                .iter()
                .map(|((m, n), c)| c * zeta.conj().powu(*m) * zeta.powu(*n))
                .sum(),
            Symbol::Disk { f, .. } => f(zeta),
        }
    }

    /// Largest angular frequency, when known.
    pub fn bandwidth(&self) -> Option<usize> {
        match self {
            Symbol::Boundary(b) => Some(b.bandwidth()),
            Symbol::Poly(terms) => Some(
                terms
                    .iter()
                    .map(|((m, n), _)| (*m as i64 - *n as i64).unsigned_abs() as usize)
                    .max()
                    .unwrap_or(0),
            ),
            Symbol::Disk { bandwidth, .. } => *bandwidth,
        }
    }

    pub fn is_holomorphic(&self) -> bool {
        match self {
            Symbol::Boundary(b) => b.fourier().keys().all(|d| *d >= 0),
            Symbol::Poly(terms) => terms.iter().all(|((m, _), c)| *m == 0 || *c == ZERO),
            Symbol::Disk { holomorphic, .. } => *holomorphic,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Quantization {
    pub op: TruncOp,
    /// Declared bandwidth reaches `K / 2`, or is unknown.
    pub aliasing_warning: bool,
}

/// Matrix of `T(f)` in the basis `e_n`:
/// `T_{a,b} = sum_m w_m r_m^{a+b} / (s_a s_b) F_m(a - b)` with
/// `F_m(d) = (1/K) sum_k f(r_m e^{i theta_k}) e^{-i d theta_k}`.
/// These are the exact matrix elements of the compression, so the margin is `N`.
pub fn toeplitz_quantize(f: &Symbol, grid: &BergmanGrid, ctx: &QContext) -> Result<Quantization> {
    quantize_from_samples(grid, ctx, f.bandwidth(), |li, _| {
        (0..grid.angular_count)
            .map(|j| f.eval(grid.node(li, j)))
            .collect()
    })
}

/// Quantization from per-level samples: `sample(level_index, radius)` must
/// return the symbol at the `K` nodes `r_m e^{i theta_k}` of that level.
pub fn quantize_from_samples<F>(
    grid: &BergmanGrid,
    ctx: &QContext,
    bandwidth: Option<usize>,
    mut sample: F,
) -> Result<Quantization>
where
    F: FnMut(usize, f64) -> Vec<Complex64>,
{
    if !grid.ctx.same_q(ctx) {
        return Err(QDiskError::ContextMismatch {
            left: grid.ctx.q().to_string(),
            right: ctx.q().to_string(),
        });
    }
    let n = ctx.dim();
    let k = grid.angular_count;
    let aliasing_warning = bandwidth.is_none_or(|bw| 2 * bw >= k);
    let s = monomial_norms(ctx, n);
    let twiddle: Vec<Complex64> = (0..k)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / k as f64))
        .collect();
    let nd = 2 * n - 1;
    let mut entries = vec![ZERO; n * n];
    let mut modes = vec![ZERO; nd];
    let mut g = vec![0.0f64; n];
    for (li, level) in grid.levels.iter().enumerate() {
        let samples = sample(li, level.radius);
        if samples.len() != k {
            return Err(QDiskError::Shape(format!(
                "expected {k} samples on level {li}, got {}",
                samples.len()
            )));
        }
        // modes[d + n - 1] = F_m(d), |d| < n
        for (idx, slot) in modes.iter_mut().enumerate() {
            let d = idx as i64 - (n as i64 - 1);
            let mut acc = ZERO;
            for (j, v) in samples.iter().enumerate() {
                let t = (d * j as i64).rem_euclid(k as i64) as usize;
                acc += v * twiddle[t];
            }
            *slot = acc / k as f64;
        }
        let mut ra = 1.0;
        for (a, ga) in g.iter_mut().enumerate() {
            *ga = ra / s[a];
            ra *= level.radius;
        }
        for a in 0..n {
            if g[a] == 0.0 {
                break;
            }
            let wa = level.weight * g[a];
            for b in 0..n {
                let gb = g[b];
                if gb == 0.0 {
                    break;
                }
                entries[a * n + b] += modes[a + n - 1 - b] * (wa * gb);
            }
        }
    }
    Ok(Quantization {
        op: TruncOp::from_entries(ctx, entries, n)?,
        aliasing_warning,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormBoundReport {
    pub op_norm: f64,
    /// `sup |f|` over the grid nodes.
    pub grid_sup: f64,
    /// `sup |<phi_eta, T(f) phi_eta>|` over probe points, for holomorphic `f`.
    pub coherent_lower: Option<f64>,
    /// `op_norm <= grid_sup`
    pub upper_holds: bool,
    /// `coherent_lower <= op_norm`, when applicable.
    pub lower_holds: Option<bool>,
}

/// Probe points for coherent-state bounds: radii `0.1, ..., 0.9`, 16 angles.
pub fn coherent_probe_points() -> Vec<Complex64> {
    let mut pts = vec![ZERO];
    for i in 1..=9 {
        for j in 0..16 {
            pts.push(Complex64::from_polar(
                i as f64 / 10.0,
                2.0 * PI * j as f64 / 16.0,
            ));
        }
    }
    pts
}

/// `<phi_eta, A phi_eta>`
pub fn coherent_expectation(a: &TruncOp, eta: Complex64) -> Result<Complex64> {
    let phi = coherent_state(eta, a.ctx())?;
    Ok(phi.state.inner(&a.apply(&phi.state.coeffs)))
}

pub fn norm_bound_check(f: &Symbol, grid: &BergmanGrid, ctx: &QContext) -> Result<NormBoundReport> {
    let t = toeplitz_quantize(f, grid, ctx)?.op;
    let norm = op_norm(&t)?;
    let mut grid_sup = 0.0f64;
    for li in 0..grid.levels.len() {
        for j in 0..grid.angular_count {
            grid_sup = grid_sup.max(f.eval(grid.node(li, j)).norm());
        }
    }
    let slack = ctx.tol.norm * grid_sup.max(1.0) + 1e-10;
    let coherent_lower = if f.is_holomorphic() {
        let mut best = 0.0f64;
        for eta in coherent_probe_points() {
            best = best.max(coherent_expectation(&t, eta)?.norm());
        }
        Some(best)
    } else {
        None
    };
    Ok(NormBoundReport {
        op_norm: norm,
        grid_sup,
        coherent_lower,
        upper_holds: norm <= grid_sup + slack,
        lower_holds: coherent_lower.map(|c| c <= norm + slack),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::GaussRat;
    use crate::opmat::{build_generators, to_matrix};
    use crate::polalg::NormalPoly;
    use num_traits::One;

    fn ctx(q: &str, n: usize) -> QContext {
        QContext::parse(q, n).unwrap()
    }

    #[test]
    fn grid_mass_and_moments() {
        for q in ["3/10", "1/2", "9/10"] {
            let g = BergmanGrid::new(&ctx(q, 32));
            assert!((g.total_mass() - 1.0).abs() < 1e-12, "q={q}");
            let qf = g.ctx().q_f64();
            for n in 0..8 {
                let exact: f64 = (0..n).map(|i| 1.0 - qf.powi(i as i32 + 1)).product();
                assert!((moment(n, &g) - exact).abs() < 1e-10);
            }
        }
        let g = BergmanGrid::new(&ctx("1/2", 32));
        assert!((moment(2, &g) - 0.375).abs() < 1e-13);
        assert!((moment(5, &g) - 0.298_004_150_390_625).abs() < 1e-10);
        assert!(g.to_csv().starts_with("m,r_m,w_m\n0,1,"));
    }

    #[test]
    fn basis_examples() {
        let cx = ctx("1/2", 16);
        assert_eq!(
            basis_eval(0, Complex64::new(0.3, 0.2), &cx).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert!(
            (basis_eval(1, Complex64::new(1.0, 0.0), &cx).unwrap().re - 2.0f64.sqrt()).abs()
                < 1e-15
        );
        assert!(basis_eval(1, Complex64::new(1.1, 0.0), &cx).is_err());
        let g = BergmanGrid::new(&cx);
        let gram = g.gram(13);
        for (a, row) in gram.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((v - expect).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let cx = ctx("1/2", 32);
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(kernel_eval(ZERO, one, &cx, 10).unwrap(), one);
        let v = kernel_eval(Complex64::new(0.5, 0.0), one, &cx, 80).unwrap();
        assert!((v.re - 3.462_746_619_455_064).abs() < 1e-12);
        assert!(kernel_eval(one, one, &cx, 10).is_err());
        for x in [0.1f64, 0.5, 0.9] {
            let zeta = Complex64::from_polar(x.sqrt(), 0.7);
            let etab = Complex64::from_polar(x.sqrt(), -0.2);
            let t = kernel_terms(x, &cx, 1e-16);
            let p = kernel_eval(zeta, etab, &cx, t).unwrap();
            let s = kernel_series(zeta, etab, &cx, 2000).unwrap();
            assert!((p - s).norm() < 1e-12 * p.norm());
        }
    }

    #[test]
    fn reproducing_property() {
        let cx = ctx("1/2", 32);
        let g = BergmanGrid::new(&cx);
        for zeta in [
            Complex64::new(0.9, 0.0),
            Complex64::new(0.2, -0.5),
            Complex64::from_polar(0.9, 2.0),
        ] {
            let got = g.integrate(|eta| {
                let t = kernel_terms((zeta * eta.conj()).norm(), &cx, 1e-16);
                kernel_eval(zeta, eta.conj(), &cx, t).unwrap() * basis_eval_unchecked(3, eta, &cx)
            });
            assert!((got - basis_eval_unchecked(3, zeta, &cx)).norm() < 1e-8);
        }
    }

    #[test]
    fn coherent_states() {
        let cx = ctx("1/2", 64);
        let e0 = coherent_state(ZERO, &cx).unwrap();
        assert_eq!(e0.state, StateVector::basis(64, 0));
        let c = coherent_state(Complex64::new(0.5, 0.0), &cx).unwrap();
        assert!((c.state.norm() - 1.0).abs() < 1e-10);
        assert!(c.tail_bound < 1e-15);
        assert!(coherent_state(Complex64::new(0.96, 0.0), &cx).is_err());
        let t = toeplitz_quantize(&Symbol::monomial(0, 1), &BergmanGrid::new(&cx), &cx)
            .unwrap()
            .op;
        let eta = Complex64::new(0.3, 0.0);
        assert!((coherent_expectation(&t, eta).unwrap() - eta).norm() < 1e-8);
        // tail bound matches the dropped mass
        let c9 = coherent_state(Complex64::new(0.9, 0.0), &cx).unwrap();
        let dropped = 1.0 - c9.state.norm().powi(2);
        assert!(
            dropped <= c9.tail_bound * 1.001 + 1e-15 && c9.tail_bound <= dropped * 1.001 + 1e-15
        );
    }

    #[test]
    fn quantization_examples() {
        let cx = ctx("1/2", 32);
        let g = BergmanGrid::new(&cx);
        let tz = toeplitz_quantize(&Symbol::monomial(0, 1), &g, &cx).unwrap();
        assert!(!tz.aliasing_warning);
        assert!(tz.op.interior_max_diff(&build_generators(&cx).z) < 1e-10);
        let t1 = toeplitz_quantize(&Symbol::constant(Complex64::new(1.0, 0.0)), &g, &cx)
            .unwrap()
            .op;
        assert!(t1.interior_max_diff(&TruncOp::identity(&cx)) < 1e-10);
        let tabs = toeplitz_quantize(&Symbol::monomial(1, 1), &g, &cx)
            .unwrap()
            .op;
        // T(|zeta|^2) = zbar z = 1 - q j, not z zbar
        let zbz = NormalPoly::zbar(&cx)
            .normal_multiply(&NormalPoly::z(&cx))
            .unwrap();
        let zzb = NormalPoly::z(&cx)
            .normal_multiply(&NormalPoly::zbar(&cx))
            .unwrap();
        assert!(tabs.interior_max_diff(&to_matrix(&zbz, &cx).unwrap()) < 1e-10);
        assert!(tabs.interior_max_diff(&to_matrix(&zzb, &cx).unwrap()) > 0.1);
        for m in 0..=4 {
            for n in 0..=4 {
                let t = toeplitz_quantize(&Symbol::monomial(m, n), &g, &cx)
                    .unwrap()
                    .op;
                let a = to_matrix(&NormalPoly::monomial(&cx, m, n, GaussRat::one()), &cx).unwrap();
                assert!(t.interior_max_diff(&a) < 1e-9, "m={m} n={n}");
            }
        }
        let wide = Symbol::disk(|z| z, None, true);
        assert!(toeplitz_quantize(&wide, &g, &cx).unwrap().aliasing_warning);
    }

    #[test]
    fn coherent_expectation_recovers_holomorphic_symbols() {
        let cx = ctx("1/2", 128);
        let g = BergmanGrid::new(&cx);
        let coeffs = [0.5, -1.0, 0.25, 0.0, 0.3, -0.2];
        let terms: Vec<_> = coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| ((0, n as u32), Complex64::new(*c, 0.1 * n as f64)))
            .collect();
        let f = Symbol::Poly(terms);
        let t = toeplitz_quantize(&f, &g, &cx).unwrap().op;
        for eta in [
            Complex64::new(0.9, 0.0),
            Complex64::from_polar(0.9, 2.5),
            Complex64::new(-0.1, 0.4),
        ] {
            assert!((coherent_expectation(&t, eta).unwrap() - f.eval(eta)).norm() < 1e-7);
        }
    }

    #[test]
    fn norm_bounds() {
        let cx = ctx("1/2", 64);
        let g = BergmanGrid::new(&cx);
        let c = norm_bound_check(&Symbol::constant(Complex64::new(0.0, 2.0)), &g, &cx).unwrap();
        assert!((c.op_norm - 2.0).abs() < 1e-10 && (c.grid_sup - 2.0).abs() < 1e-12);
        assert!((c.coherent_lower.unwrap() - 2.0).abs() < 1e-10);
        let sq = norm_bound_check(&Symbol::monomial(0, 2), &g, &cx).unwrap();
        assert!(sq.upper_holds && sq.lower_holds == Some(true));
        // coherent states at |eta| = 0.9 lose ~1e-6 of their mass at N = 64
        assert!((sq.coherent_lower.unwrap() - 0.81).abs() < 1e-5);
        let re = Symbol::Poly(vec![
            ((0, 1), Complex64::new(0.5, 0.0)),
            ((1, 0), Complex64::new(0.5, 0.0)),
        ]);
        let rep = norm_bound_check(&re, &g, &cx).unwrap();
        assert!(rep.upper_holds && rep.coherent_lower.is_none());
    }

    #[test]
    fn builtins() {
        assert!(matches!(
            Symbol::builtin("poisson_kernel:0.3").unwrap(),
            Symbol::Boundary(_)
        ));
        assert!(matches!(
            Symbol::builtin("poisson_kernel").unwrap(),
            Symbol::Boundary(_)
        ));
        assert_eq!(
            Symbol::builtin("monomial:2,1").unwrap().bandwidth(),
            Some(1)
        );
        assert!(Symbol::builtin("monomial:2").is_err());
        assert!(Symbol::builtin("poisson_kernel:1.5").is_err());
        assert!(Symbol::builtin("nope").is_err());
    }
}
