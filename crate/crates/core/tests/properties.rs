//! Property tests over randomized inputs. Sampling is driven by a ChaCha
//! stream seeded from `QDISK_SEED`, so failures replay exactly.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use qdisk::bergman::{toeplitz_quantize, BergmanGrid, Symbol};
use qdisk::function_theory::{classify, dirichlet_solve, symbol_extract, Classification};
use qdisk::opmat::{op_norm, to_matrix, TruncOp};
use qdisk::polalg::random_poly;
use qdisk::qnum::{jackson_integral, q_derivative_exact, q_int, ratio};
use qdisk::verify::seed_from_env;
use qdisk::{BoundaryFunction, GaussRat, LaplaceOrder, NormalPoly, QContext};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn runner(cases: u32, salt: u64) -> TestRunner {
    let seed = seed_from_env().unwrap() ^ salt;
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::from_seed(RngAlgorithm::ChaCha, &bytes),
    )
}

fn q_strategy() -> impl Strategy<Value = (i64, i64)> {
    (2i64..=12).prop_flat_map(|d| (1..d, Just(d)))
}

fn ctx_from((n, d): (i64, i64), dim: usize) -> QContext {
    QContext::new(ratio(n, d), dim).unwrap()
}

fn boundary_strategy(max_bw: i64) -> impl Strategy<Value = BoundaryFunction> {
    (0..=max_bw).prop_flat_map(|bw| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), (2 * bw + 1) as usize).prop_map(
            move |v| {
                BoundaryFunction::from_fourier(
                    v.into_iter()
                        .enumerate()
                        .map(|(i, (re, im))| (i as i64 - bw, Complex64::new(re, im))),
                )
            },
        )
    })
}

#[test]
fn q_integers_and_jackson() {
    runner(64, 1)
        .run(&(q_strategy(), 0u32..12), |(qr, n)| {
            let cx = ctx_from(qr, 8);
            let mut geo = BigRational::from_integer(0.into());
            for k in 0..n {
                geo += cx.q_pow(k as i64);
            }
            prop_assert_eq!(q_int(n, &cx), geo);
            let y = ratio(3, 7);
            let d = q_derivative_exact(|t| qdisk::qnum::pow_rational(t, n as i64 + 1), &y, &cx)
                .unwrap();
            prop_assert_eq!(
                d,
                q_int(n + 1, &cx) * qdisk::qnum::pow_rational(&y, n as i64)
            );
            let j = jackson_integral(|t| t.powi(n as i32), &cx, Some(1.0), 1e-16).unwrap();
            let want = 1.0 / qdisk::qnum::rational_to_f64(&q_int(n + 1, &cx));
            prop_assert!((j.value - want).abs() <= j.tail_bound + 1e-14);
            Ok(())
        })
        .unwrap();
}

#[test]
fn normal_ordering_is_an_algebra() {
    runner(24, 2)
        .run(&(q_strategy(), any::<u64>()), |(qr, s)| {
            let cx = ctx_from(qr, 32);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (a, b, c) = (
                random_poly(&cx, 2, &mut rng),
                random_poly(&cx, 2, &mut rng),
                random_poly(&cx, 2, &mut rng),
            );
            let ab = a.normal_multiply(&b).unwrap();
            prop_assert_eq!(
                ab.normal_multiply(&c).unwrap(),
                a.normal_multiply(&b.normal_multiply(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(
                ab.adjoint(),
                b.adjoint().normal_multiply(&a.adjoint()).unwrap()
            );
            let q = GaussRat::real(cx.q().clone());
            prop_assert_eq!(
                ab.laplacian(LaplaceOrder::BarpartialPartial),
                ab.laplacian(LaplaceOrder::PartialBarpartial).scale(&q)
            );
            // the symbol map is multiplicative
            let (sa, sb, sab) = (a.symbol(), b.symbol(), ab.symbol());
            for k in 0..8 {
                let t = k as f64 * 0.7;
                prop_assert!((sab.eval(t) - sa.eval(t) * sb.eval(t)).norm() < 1e-12);
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn matrices_are_a_representation() {
    runner(24, 3)
        .run(&(q_strategy(), any::<u64>()), |(qr, s)| {
            let cx = ctx_from(qr, 32);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let (a, b) = (random_poly(&cx, 3, &mut rng), random_poly(&cx, 3, &mut rng));
            let (ma, mb) = (to_matrix(&a, &cx).unwrap(), to_matrix(&b, &cx).unwrap());
            let ab = a.normal_multiply(&b).unwrap();
            let prod = to_matrix(&ab, &cx).unwrap();
            // normal ordering can produce large cancelling coefficients
            let scale = ma.norm_upper_bound() * mb.norm_upper_bound()
                + ab.terms()
                    .values()
                    .map(|c| c.to_complex().norm())
                    .sum::<f64>();
            let gap = ma.matmul(&mb).unwrap().interior_max_diff(&prod);
            prop_assert!(gap <= 1e-14 * scale, "gap {gap:e} scale {scale}");
            prop_assert!(
                ma.adjoint()
                    .interior_max_diff(&to_matrix(&a.adjoint(), &cx).unwrap())
                    < 1e-15
            );
            prop_assert!(op_norm(&ma).unwrap() <= ma.norm_upper_bound() * (1.0 + 1e-12));
            Ok(())
        })
        .unwrap();
}

#[test]
fn serialization_roundtrips() {
    runner(32, 4)
        .run(
            &(q_strategy(), any::<u64>(), boundary_strategy(6)),
            |(qr, s, f)| {
                let cx = ctx_from(qr, 16);
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let p = random_poly(&cx, 3, &mut rng);
                prop_assert_eq!(
                    NormalPoly::from_json_str(&p.to_json_string(), &cx).unwrap(),
                    p.clone()
                );
                let m = to_matrix(&p, &cx).unwrap();
                let json = serde_json::to_string(&m.to_json()).unwrap();
                let back = TruncOp::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
                prop_assert_eq!(back.entries(), m.entries());
                let bin = TruncOp::from_binary(&m.to_binary(), &cx, m.margin()).unwrap();
                prop_assert_eq!(bin.entries(), m.entries());
                let fj = BoundaryFunction::from_json(&f.to_json()).unwrap();
                prop_assert_eq!(fj, f);
                Ok(())
            },
        )
        .unwrap();
}

#[test]
fn dirichlet_is_linear_and_recovers_data() {
    runner(16, 5)
        .run(
            &(boundary_strategy(8), boundary_strategy(8), -2.0f64..2.0),
            |(f, g, t)| {
                let cx = QContext::parse("1/2", 64).unwrap();
                let s = Complex64::new(t, 0.5);
                let lhs = dirichlet_solve(&f.add(&g.scale(s)), &cx).unwrap();
                let rhs = dirichlet_solve(&f, &cx)
                    .unwrap()
                    .add(&dirichlet_solve(&g, &cx).unwrap().scale(s))
                    .unwrap();
                prop_assert!(lhs.interior_max_diff(&rhs) < 1e-14);
                let est = symbol_extract(&dirichlet_solve(&f, &cx).unwrap()).unwrap();
                prop_assert!(est.reliable);
                prop_assert!(est.symbol.max_coeff_diff(&f) < 1e-6);
                Ok(())
            },
        )
        .unwrap();
}

#[test]
fn toeplitz_is_a_star_map_and_holomorphy_is_detected() {
    runner(12, 6)
        .run(&(q_strategy(), 0u32..5, 0u32..5), |(qr, m, n)| {
            let cx = ctx_from(qr, 32);
            let grid = BergmanGrid::new(&cx);
            let t = toeplitz_quantize(&Symbol::monomial(m, n), &grid, &cx)
                .unwrap()
                .op;
            let tc = toeplitz_quantize(&Symbol::monomial(n, m), &grid, &cx)
                .unwrap()
                .op;
            prop_assert!(t.adjoint().interior_max_diff(&tc) < 1e-10);
            let h = to_matrix(&NormalPoly::monomial(&cx, 0, n, GaussRat::one()), &cx).unwrap();
            prop_assert_eq!(
                classify(&h).unwrap().classification,
                Classification::WeaklyHolo
            );
            if m > 0 && n > 0 {
                let mixed =
                    to_matrix(&NormalPoly::monomial(&cx, m, n, GaussRat::one()), &cx).unwrap();
                prop_assert_eq!(
                    classify(&mixed).unwrap().classification,
                    Classification::None
                );
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn identity_integrates_to_one_minus_tail() {
    runner(16, 7)
        .run(&(q_strategy(), 8usize..64), |(qr, n)| {
            let cx = ctx_from(qr, n);
            let v = qdisk::opmat::integral_matrix(&TruncOp::identity(&cx));
            prop_assert!((v.value.re - (1.0 - cx.q_powf(n as i64))).abs() < 1e-14);
            prop_assert!(v.tail_bound >= cx.q_powf(n as i64) * (1.0 - 1e-12));
            let _ = BigRational::one();
            Ok(())
        })
        .unwrap();
}
