use super::*;
use crate::gauss::GaussRat;
use crate::polalg::random_poly;
use crate::qnum::ratio;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ctx(q: &str, n: usize) -> QContext {
    QContext::parse(q, n).unwrap()
}

fn r(n: i64, d: i64) -> GaussRat {
    GaussRat::real(ratio(n, d))
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn generator_entries() {
    let cx = ctx("1/2", 16);
    let g = build_generators(&cx);
    assert!((g.z.get(1, 0).re - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(g.j.get(3, 3), c(0.125));
    assert_eq!(g.zbar.get(0, 1), g.z.get(1, 0));
    let zbz = g.zbar.matmul(&g.z).unwrap();
    for n in 0..15 {
        assert!((zbz.get(n, n).re - (1.0 - 0.5f64.powi(n as i32 + 1))).abs() < 1e-15);
    }
}

#[test]
fn structure_report() {
    let rep = structure_checks(&ctx("1/2", 64));
    assert!(rep.relation_residual < 1e-14);
    assert!(rep.relation_exact_zero);
    assert!(rep.zzbar_residual < 1e-14 && rep.zbarz_residual < 1e-14);
    assert!((rep.shift_difference_singular_values[0] - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
    assert!(rep.singular_values_decreasing);
}

#[test]
fn to_matrix_examples() {
    let cx = ctx("1/2", 32);
    let one = to_matrix(&NormalPoly::one(&cx), &cx).unwrap();
    assert_eq!(one, TruncOp::identity(&cx));
    let zbz = to_matrix(&NormalPoly::monomial(&cx, 1, 1, GaussRat::one()), &cx).unwrap();
    assert_eq!(zbz.margin(), 30);
    for n in 0..30 {
        assert!((zbz.get(n, n).re - (1.0 - 0.5f64.powi(n as i32 + 1))).abs() < 1e-15);
    }
    let zp = NormalPoly::z(&cx);
    let zbp = NormalPoly::zbar(&cx);
    let prod = to_matrix(&zp, &cx)
        .unwrap()
        .matmul(&to_matrix(&zbp, &cx).unwrap())
        .unwrap();
    let normal = to_matrix(&zp.normal_multiply(&zbp).unwrap(), &cx).unwrap();
    assert!(prod.interior_max_diff(&normal) < 1e-14);
    let big = NormalPoly::monomial(&cx, 10, 7, GaussRat::one());
    assert!(matches!(
        to_matrix(&big, &cx),
        Err(QDiskError::DegreeTooLarge { .. })
    ));
}

#[test]
fn to_matrix_agrees_with_generator_words() {
    let cx = ctx("3/10", 24);
    let g = build_generators(&cx);
    // zbar^2 z^3
    let mut w = g.z.clone();
    for _ in 0..2 {
        w = g.z.matmul(&w).unwrap();
    }
    for _ in 0..2 {
        w = g.zbar.matmul(&w).unwrap();
    }
    let p = NormalPoly::monomial(&cx, 2, 3, GaussRat::one());
    let m = to_matrix(&p, &cx).unwrap();
    assert_eq!(w.margin(), m.margin());
    assert!(w.interior_max_diff(&m) < 1e-15);
}

#[test]
fn scale_j_examples() {
    let cx = ctx("1/2", 32);
    let z = to_matrix(&NormalPoly::z(&cx), &cx).unwrap();
    assert!(scale_j_matrix(&z).interior_max_diff(&z.scale(c(2.0))) < 1e-14);
    let id = TruncOp::identity(&cx);
    assert_eq!(scale_j_matrix(&id).entries(), id.entries());
    let p = NormalPoly::monomial(&cx, 1, 2, GaussRat::one());
    let lhs = scale_j_matrix(&to_matrix(&p, &cx).unwrap());
    let rhs = to_matrix(&p.scale_j(), &cx).unwrap();
    assert!(lhs.interior_max_diff(&rhs) < 1e-12);
    let g = build_generators(&ctx("1/2", 64));
    assert_eq!(
        scale_j_matrix(&g.zbar.matmul(&g.z).unwrap()).amplification(),
        1.0
    );
    assert!(
        scale_j_matrix(&TruncOp::from_fn(&ctx("1/2", 64), 64, |_, _| c(1.0)))
            .amplification_warning()
    );
}

#[test]
fn delta_entries() {
    let cx = ctx("1/2", 16);
    let (delta, bardelta) = build_deltas(&cx);
    assert!((bardelta.get(1, 0).re + 2.0 * 2.0f64.sqrt()).abs() < 1e-14);
    assert!((delta.get(0, 1).re - 0.5f64.sqrt()).abs() < 1e-15);
    let e0 = StateVector::basis(16, 0);
    assert!(delta.apply(&e0.coeffs).iter().all(|x| *x == ZERO));
    // bardelta = (q-1)^{-1} j^{-1} z
    let g = build_generators(&cx);
    for n in 0..15 {
        let expect = g.z.get(n + 1, n) * 0.5f64.powi(-(n as i32 + 1)) / (0.5 - 1.0);
        assert!((bardelta.get(n + 1, n) - expect).norm() < 1e-12 * expect.norm());
    }
}

#[test]
fn d_op_examples() {
    let cx = ctx("1/2", 32);
    let z = to_matrix(&NormalPoly::z(&cx), &cx).unwrap();
    let zb = to_matrix(&NormalPoly::zbar(&cx), &cx).unwrap();
    let dz = d_op(&z, Derivative::Partial);
    assert_eq!(dz.margin(), 30);
    assert!(dz.interior_max_diff(&TruncOp::identity(&cx)) < 1e-6);
    assert!(d_op(&zb, Derivative::Partial).interior_max_abs() < 1e-6);
    let p = NormalPoly::monomial(&cx, 2, 1, GaussRat::one());
    let lhs = d_op(&to_matrix(&p, &cx).unwrap(), Derivative::Barpartial);
    let rhs = to_matrix(&NormalPoly::monomial(&cx, 1, 1, r(3, 2)), &cx).unwrap();
    // roundoff grows like q^{-margin} eps
    let small = ctx("1/2", 16);
    let lhs16 = d_op(
        &to_matrix(&NormalPoly::monomial(&small, 2, 1, GaussRat::one()), &small).unwrap(),
        Derivative::Barpartial,
    );
    let rhs16 = to_matrix(&NormalPoly::monomial(&small, 1, 1, r(3, 2)), &small).unwrap();
    assert!(lhs16.interior_max_diff(&rhs16) < 1e-10);
    assert!(lhs.amplification() > 1e8);
    let exact = ExactOp::from_poly(&p, &cx)
        .unwrap()
        .d_op(Derivative::Barpartial)
        .to_float();
    assert!(exact.interior_max_diff(&rhs) < 1e-13);
}

#[test]
fn quadratic_form_examples() {
    let cx = ctx("1/2", 16);
    let z = to_matrix(&NormalPoly::z(&cx), &cx).unwrap();
    let zb = to_matrix(&NormalPoly::zbar(&cx), &cx).unwrap();
    let phi = StateVector::new(
        (0..16)
            .map(|n| if n < 6 { c(1.0 / (n + 1) as f64) } else { ZERO })
            .collect(),
    );
    assert!(
        quadratic_form(&z, &phi, Derivative::Barpartial)
            .unwrap()
            .norm()
            < 1e-15
    );
    let e0 = StateVector::basis(16, 0);
    assert!((quadratic_form(&zb, &e0, Derivative::Barpartial).unwrap() - 1.0).norm() < 1e-14);
    // against (phi, (barpartial A) phi)
    let p = NormalPoly::from_terms(
        &cx,
        [
            ((2, 1), r(1, 1)),
            ((1, 0), r(-2, 3)),
            ((0, 2), GaussRat::i()),
        ],
    );
    let a = to_matrix(&p, &cx).unwrap();
    let d = d_op(&a, Derivative::Barpartial);
    let direct = StateVector::new(phi.coeffs.clone()).inner(&d.apply(&phi.coeffs));
    let form = quadratic_form(&a, &phi, Derivative::Barpartial).unwrap();
    assert!((direct - form).norm() < 1e-10);
    assert!(quadratic_form(&a, &StateVector::new(vec![ZERO; 16]), Derivative::Partial).is_err());
}

#[test]
fn integral_examples() {
    let cx = ctx("1/2", 64);
    let id = integral_matrix(&TruncOp::identity(&cx));
    assert!((id.value.re - (1.0 - 0.5f64.powi(64))).abs() < 1e-16);
    let zbz = to_matrix(&NormalPoly::monomial(&cx, 1, 1, GaussRat::one()), &cx).unwrap();
    assert!((integral_matrix(&zbz).value.re - 2.0 / 3.0).abs() < 1e-15);
    let z = to_matrix(&NormalPoly::z(&cx), &cx).unwrap();
    assert_eq!(integral_matrix(&z).value, ZERO);
    assert!(integral_matrix(&zbz).tail_bound < 1e-18);
}

#[test]
fn norms_and_eigenvalues() {
    let cx = ctx("1/2", 64);
    let g = build_generators(&cx);
    assert!((op_norm(&g.z).unwrap() - 1.0).abs() < 1e-12);
    assert!((op_norm(&TruncOp::identity(&cx)).unwrap() - 1.0).abs() < 1e-12);
    assert!((op_norm(&g.j).unwrap() - 1.0).abs() < 1e-12);
    assert!((min_hermitian_eigenvalue(&g.j).unwrap() - 0.5f64.powi(63)).abs() < 1e-12);
    let cx9 = ctx("9/10", 128);
    let z9 = build_generators(&cx9).z;
    let n = op_norm(&z9).unwrap();
    assert!((n - (1.0 - 0.9f64.powi(127)).sqrt()).abs() < 1e-10);
}

#[test]
fn exact_engine_matches_float() {
    let cx = ctx("1/2", 40);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..4 {
        let p = random_poly(&cx, 5, &mut rng);
        let e = ExactOp::from_poly(&p, &cx).unwrap();
        let f = to_matrix(&p, &cx).unwrap();
        assert_eq!(e.margin(), f.margin());
        let ef = e.to_float();
        for (a, b) in ef.entries().iter().zip(f.entries()) {
            assert!((a - b).norm() < 1e-13 * (1.0 + b.norm()));
        }
        let dropped = (e.integral().to_complex() - p.integrate().to_complex()).norm();
        assert!(dropped <= integral_matrix(&f).tail_bound + integral_matrix(&f).edge_bound + 1e-15);
    }
    assert!(ExactOp::relation_residual(&cx).interior_is_zero());
    assert!(!ExactOp::relation_residual(&cx)
        .with_margin(40)
        .interior_is_zero());
}

#[test]
fn oracle_equivalence() {
    let cx = ctx("1/2", 64);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..3 {
        let p = random_poly(&cx, 6, &mut rng);
        let a = to_matrix(&p, &cx).unwrap();
        let check = |lhs: &TruncOp, rhs: &NormalPoly| {
            let rhs = to_matrix(rhs, &cx).unwrap();
            let d = lhs.interior_max_diff(&rhs);
            assert!(d < 1e-10, "interior distance {d:e}");
        };
        check(&scale_j_matrix(&a), &p.scale_j());
        let e = ExactOp::from_poly(&p, &cx).unwrap();
        check(&e.d_op(Derivative::Partial).to_float(), &p.partial());
        check(&e.d_op(Derivative::Barpartial).to_float(), &p.barpartial());
        for order in [
            LaplaceOrder::PartialBarpartial,
            LaplaceOrder::BarpartialPartial,
        ] {
            check(&e.laplacian(order).to_float(), &p.laplacian(order));
        }
        let iv = integral_matrix(&a);
        let exact = p.integrate().to_complex();
        assert!((iv.value - exact).norm() <= iv.tail_bound + iv.edge_bound + 1e-12);
    }
}

#[test]
fn laplacian_orders_float() {
    for (q, n) in [("1/2", 16), ("9/10", 48)] {
        let cx = ctx(q, n);
        let qf = cx.q_f64();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let p = random_poly(&cx, 3, &mut rng);
            let a = to_matrix(&p, &cx).unwrap();
            let pb = laplacian_matrix(&a, LaplaceOrder::PartialBarpartial).unwrap();
            let bp = laplacian_matrix(&a, LaplaceOrder::BarpartialPartial).unwrap();
            assert_eq!(bp.margin(), a.margin() - 2);
            assert!(bp.interior_max_diff(&pb.scale(c(qf))) < 1e-8);
        }
    }
    let big = ctx("1/2", 64);
    assert!(laplacian_matrix(&TruncOp::identity(&big), LaplaceOrder::PartialBarpartial).is_err());
}

#[test]
fn trace_property() {
    let cx = ctx("1/2", 64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let a = to_matrix(&random_poly(&cx, 3, &mut rng), &cx).unwrap();
        let b = to_matrix(&random_poly(&cx, 3, &mut rng), &cx).unwrap();
        let lhs = integral_matrix(&a.matmul(&b).unwrap()).value;
        let rhs = integral_matrix(&scale_j_matrix(&b).matmul(&a).unwrap()).value;
        assert!((lhs - rhs).norm() < 1e-10);
    }
}

#[test]
fn serialization_roundtrips() {
    let cx = ctx("1/2", 8);
    let a = to_matrix(
        &NormalPoly::from_terms(&cx, [((1, 2), GaussRat::i()), ((0, 1), r(1, 3))]),
        &cx,
    )
    .unwrap();
    let json = serde_json::to_string(&a.to_json()).unwrap();
    assert!(json.starts_with(r#"{"q":"1/2","N":8,"margin":5,"entries":[[0.0,0.0]"#));
    let back = TruncOp::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(back, a);
    let bin = a.to_binary();
    assert_eq!(bin.len(), 16 + 16 * 64);
    assert_eq!(TruncOp::from_binary(&bin, &cx, 5).unwrap(), a);
    assert!(TruncOp::from_binary(&bin[..100], &cx, 5).is_err());
    assert!(TruncOp::from_binary(&bin, &ctx("1/2", 9), 5).is_err());
}

#[test]
fn neumann_series_entries() {
    let cx = ctx("1/2", 32);
    let inv = neumann_inverse(c(0.5), true, 200, &cx).unwrap();
    let zb = to_matrix(&NormalPoly::zbar(&cx), &cx).unwrap();
    // (1 - q zbar) (sum q^d zbar^d) = 1
    let lhs = TruncOp::identity(&cx)
        .sub(&zb.scale(c(0.5)))
        .unwrap()
        .matmul(&inv)
        .unwrap();
    assert!(
        lhs.with_margin(31)
            .interior_max_diff(&TruncOp::identity(&cx))
            < 1e-13
    );
    assert!(neumann_inverse(c(1.0), false, 10, &cx).is_err());
}
