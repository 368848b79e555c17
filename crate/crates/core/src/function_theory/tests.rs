use super::*;
use crate::bergman::{toeplitz_quantize, Symbol};
use crate::opmat::{neumann_inverse, to_matrix, Derivative, ExactOp};
use crate::polalg::{random_poly, NormalPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx(q: &str, n: usize) -> QContext {
    QContext::parse(q, n).unwrap()
}

fn mono(cx: &QContext, m: u32, n: u32) -> TruncOp {
    to_matrix(&NormalPoly::monomial(cx, m, n, GaussRat::one()), cx).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_boundary(rng: &mut ChaCha8Rng, bw: i64) -> BoundaryFunction {
    BoundaryFunction::from_fourier(
        (-bw..=bw).map(|d| (d, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
    )
}

#[test]
fn classify_examples() {
    let cx = ctx("1/2", 32);
    assert_eq!(
        classify(&mono(&cx, 0, 3)).unwrap().classification,
        Classification::WeaklyHolo
    );
    assert_eq!(
        classify(&mono(&cx, 2, 0)).unwrap().classification,
        Classification::WeaklyAntiholo
    );
    assert_eq!(
        classify(&mono(&cx, 1, 1)).unwrap().classification,
        Classification::None
    );
    assert_eq!(
        classify(&TruncOp::identity(&cx)).unwrap().classification,
        Classification::WeaklyHolo
    );
    let h = to_matrix(
        &NormalPoly::from_terms(&cx, [((0, 2), GaussRat::one()), ((3, 0), GaussRat::one())]),
        &cx,
    )
    .unwrap();
    assert_eq!(
        classify(&h).unwrap().classification,
        Classification::Harmonic
    );
    let tiny = TruncOp::identity(&cx).with_margin(3);
    assert!(matches!(
        classify(&tiny),
        Err(QDiskError::MarginTooSmall { .. })
    ));
}

#[test]
fn classify_matches_syntax() {
    let cx = ctx("1/2", 32);
    for m in 0..=5 {
        for n in 0..=5 {
            let got = classify(&mono(&cx, m, n)).unwrap().classification;
            let expect = match (m, n) {
                (_, 0) if m == 0 => Classification::WeaklyHolo,
                (0, _) => Classification::WeaklyHolo,
                (_, 0) => Classification::WeaklyAntiholo,
                _ => Classification::None,
            };
            assert_eq!(got, expect, "m={m} n={n}");
        }
    }
}

#[test]
fn split_examples() {
    let cx = ctx("1/2", 32);
    let p = NormalPoly::from_terms(&cx, [((0, 1), GaussRat::one()), ((2, 0), GaussRat::one())]);
    let (a1, a2) = triangular_split(&to_matrix(&p, &cx).unwrap());
    assert!(a1.interior_max_diff(&mono(&cx, 0, 1)) == 0.0);
    assert!(a2.interior_max_diff(&mono(&cx, 2, 0)) == 0.0);
    let (i1, i2) = triangular_split(&TruncOp::identity(&cx));
    assert_eq!(i1, TruncOp::identity(&cx));
    assert_eq!(i2.interior_max_abs(), 0.0);

    let grid = BergmanGrid::new(&cx);
    let f = BoundaryFunction::from_fourier([(1, c(1.0, 0.0)), (-2, c(1.0, 0.0))]);
    let t = toeplitz_quantize(&Symbol::Boundary(f), &grid, &cx)
        .unwrap()
        .op;
    let (b1, b2) = triangular_split(&t);
    let tz = toeplitz_quantize(&Symbol::monomial(0, 1), &grid, &cx)
        .unwrap()
        .op;
    let tzb = toeplitz_quantize(&Symbol::monomial(2, 0), &grid, &cx)
        .unwrap()
        .op;
    assert!(b1.interior_max_diff(&tz) < 1e-9);
    assert!(b2.interior_max_diff(&tzb) < 1e-9);
}

#[test]
fn harmonic_examples() {
    let cx = ctx("1/2", 32);
    let p = NormalPoly::from_terms(&cx, [((0, 2), GaussRat::one()), ((3, 0), GaussRat::one())]);
    assert!(
        is_weakly_harmonic(&to_matrix(&p, &cx).unwrap())
            .unwrap()
            .harmonic
    );
    assert!(!is_weakly_harmonic(&mono(&cx, 1, 1)).unwrap().harmonic);
    assert!(
        is_weakly_harmonic(&TruncOp::identity(&cx))
            .unwrap()
            .harmonic
    );
}

#[test]
fn symbol_examples() {
    let cx = ctx("1/2", 64);
    let s = symbol_extract(&mono(&cx, 2, 1)).unwrap();
    assert!(s.reliable);
    assert!((s.symbol.coefficient(-1) - 1.0).norm() < 1e-12);
    assert_eq!(s.symbol.fourier().len(), 1);
    let id = symbol_extract(&TruncOp::identity(&cx)).unwrap();
    assert_eq!(id.symbol, BoundaryFunction::constant(c(1.0, 0.0)));

    let cx = ctx("1/2", 128);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let p = random_poly(&cx, 4, &mut rng);
        let est = symbol_extract(&to_matrix(&p, &cx).unwrap()).unwrap();
        assert!(est.symbol.max_coeff_diff(&p.symbol()) < 1e-6);
    }
}

#[test]
fn dirichlet_examples() {
    let cx = ctx("1/2", 64);
    let z = dirichlet_solve(&BoundaryFunction::mode(1), &cx).unwrap();
    assert!(z.interior_max_diff(&mono(&cx, 0, 1)) < 1e-15);
    let one = dirichlet_solve(&BoundaryFunction::constant(c(1.0, 0.0)), &cx).unwrap();
    assert_eq!(one, TruncOp::identity(&cx));
    let f = BoundaryFunction::from_fourier([(1, c(1.0, 0.0)), (-2, c(1.0, 0.0))]);
    let a = dirichlet_solve(&f, &cx).unwrap();
    let p = NormalPoly::from_terms(&cx, [((0, 1), GaussRat::one()), ((2, 0), GaussRat::one())]);
    assert!(a.interior_max_diff(&to_matrix(&p, &cx).unwrap()) < 1e-15);
    let cc = dirichlet_cross_check(&f, &BergmanGrid::new(&cx), &cx).unwrap();
    assert!(cc.route_difference < 1e-8, "{}", cc.route_difference);
    assert!(cc.symbol_error < 1e-6);
    assert!(cc.weakly_harmonic.harmonic);
    let wide = BoundaryFunction::mode(40);
    assert!(matches!(
        dirichlet_solve(&wide, &cx),
        Err(QDiskError::Bandwidth { .. })
    ));
}

#[test]
fn dirichlet_roundtrip_and_mean_value() {
    for (q, n) in [("1/2", 64), ("9/10", 256)] {
        let cx = ctx(q, n);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let bw = rng.gen_range(0..=8);
            let f = random_boundary(&mut rng, bw);
            let a = dirichlet_solve(&f, &cx).unwrap();
            let est = symbol_extract(&a).unwrap();
            assert!(est.symbol.max_coeff_diff(&f) < 1e-6, "q={q}");
            let back = dirichlet_solve(&est.symbol, &cx).unwrap();
            assert!(back.interior_max_diff(&a) < 1e-6);
            assert!((integral_matrix(&a).value - f.coefficient(0)).norm() < 1e-10);
        }
    }
}

#[test]
fn poisson_examples() {
    let f =
        BoundaryFunction::from_fourier([(0, c(0.5, 0.0)), (2, c(1.0, -1.0)), (-1, c(0.0, 2.0))]);
    assert!((poisson_eval(&f, ZERO).unwrap() - 0.5).norm() < 1e-15);
    assert!((poisson_eval(&BoundaryFunction::mode(1), c(0.3, 0.0)).unwrap() - 0.3).norm() < 1e-15);
    for zeta in [c(0.3, 0.4), c(-0.9, 0.1), c(0.0, 0.99)] {
        assert!((poisson_eval(&f, zeta).unwrap() - f.harmonic_eval(zeta)).norm() < 1e-10);
    }
    assert!(poisson_eval(&f, c(1.0, 0.0)).is_err());
}

#[test]
fn antiderivative_examples() {
    let cx = ctx("1/2", 16);
    let g = q_antiderivative(&[GaussRat::one()], &cx);
    assert_eq!(g, vec![GaussRat::zero(), GaussRat::one()]);
    let g = q_antiderivative(&antiholomorphic_monomial(1), &cx);
    assert_eq!(g[2], GaussRat::real(ratio(2, 3)));
    for y in [0.25, 0.5, 1.0] {
        let dq = crate::qnum::q_derivative(|t| 2.0 / 3.0 * t * t, y, &cx).unwrap();
        assert!((dq - y).abs() < 1e-15);
    }
    for d in 0..=6 {
        let rep = antiderivative_report(&antiholomorphic_monomial(d), &cx).unwrap();
        assert!(rep.exact_check);
        assert!(rep.weighted_series_gap < 1e-13);
    }
    let rep = antiderivative_report(&antiholomorphic_monomial(1), &cx).unwrap();
    assert_eq!(rep.unweighted_factors.len(), 1);
    assert!((rep.unweighted_factors[0].1.unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(unweighted_factor_exact(1, &cx), Some(ratio(3, 2)));
    let rep0 = antiderivative_report(&[GaussRat::one()], &cx).unwrap();
    assert_eq!(rep0.unweighted_factors, vec![(0, None)]);
}

#[test]
fn antiderivative_operator_roundtrip() {
    let cx = ctx("1/2", 48);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..3 {
        let k: Vec<GaussRat> = (0..=4)
            .map(|_| {
                GaussRat::new(
                    ratio(rng.gen_range(-3..=3), 2),
                    ratio(rng.gen_range(-1..=1), 3),
                )
            })
            .collect();
        let g = q_antiderivative(&k, &cx);
        let poly = |coeffs: &[GaussRat]| {
            NormalPoly::from_terms(
                &cx,
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(d, c)| ((d as u32, 0), c.clone())),
            )
        };
        let tg = ExactOp::from_poly(&poly(&g), &cx).unwrap();
        let lhs = tg.d_op(Derivative::Barpartial).to_float();
        let rhs = to_matrix(&poly(&k), &cx).unwrap();
        assert!(lhs.interior_max_diff(&rhs) < 1e-9);
    }
}

#[test]
fn harmonic_diagnostic_examples() {
    let cx = ctx("1/2", 64);
    let f1 = BoundaryFunction::constant(c(1.0, 0.0));
    let r = harmonic_diagnostics(&TruncOp::identity(&cx), &f1).unwrap();
    assert!((r.mean_value - 1.0).norm() < 1e-15);
    assert!((r.op_norm - 1.0).abs() < 1e-12);
    assert!((r.min_eigenvalue.unwrap() - 1.0).abs() < 1e-12);

    let cos2 = BoundaryFunction::from_fourier([(1, c(1.0, 0.0)), (-1, c(1.0, 0.0))]);
    let cx256 = ctx("1/2", 256);
    let a = dirichlet_solve(&cos2, &cx256).unwrap();
    let r = harmonic_diagnostics(&a, &cos2).unwrap();
    assert!(r.mean_value.norm() < 1e-15);
    assert!((r.op_norm - 2.0).abs() < 1e-2);
    assert!(r.coherent_below_norm);

    let pk = BoundaryFunction::poisson_kernel(c(0.5, 0.0), 1e-12).unwrap();
    let cx128 = ctx("1/2", 128);
    let r = harmonic_diagnostics(&dirichlet_solve(&pk, &cx128).unwrap(), &pk).unwrap();
    assert!(r.min_eigenvalue.unwrap() >= -1e-10);
    assert!(r.boundary_min.unwrap() > 0.0);
    assert!(harmonic_diagnostics(&mono(&cx, 1, 1), &f1).is_err());
}

#[test]
fn harnack_sequence() {
    let rep = harnack_demo(&ctx("1/2", 64), 10).unwrap();
    assert_eq!(rep.steps.len(), 10);
    assert!(rep.monotone && rep.cauchy);
}

#[test]
fn scalability_examples() {
    let cx = ctx("1/2", 64);
    let cubic = scalability_diagnostic(&mono(&cx, 0, 3)).unwrap();
    assert!(cubic.scalable && cubic.radius_estimate.is_infinite());
    let anti = scalability_diagnostic(&mono(&cx, 2, 0)).unwrap();
    assert!(anti.scalable && anti.kind == SeriesKind::Antiholomorphic);
    let q = c(0.5, 0.0);
    let inv_bar = neumann_inverse(q, true, 400, &cx).unwrap();
    assert!(scalability_diagnostic(&inv_bar).unwrap().scalable);
    let inv = neumann_inverse(q, false, 400, &cx).unwrap();
    let rep = scalability_diagnostic(&inv).unwrap();
    assert!(!rep.scalable);
    assert!((rep.radius_estimate - 1.0).abs() < 1e-6);
    assert!(scalability_diagnostic(&mono(&cx, 1, 1)).is_err());
}
