use std::path::PathBuf;

use cusp_transfer::cusps::{Cusp, CuspTable};
use cusp_transfer::exactnum::{complete_to_sl2, gcd, GL2QPlus};
use cusp_transfer::numeric::{
    default_height, eta_qexp, eta_qexp_pentagonal, evaluate_form, extract_coefficients, hecke_eigenvalue_numeric,
    parse_fixture, slash_unitary, whittaker, EtaProductForm, NumericError,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

const LEVELS: [i64; 5] = [11, 20, 24, 27, 36];

fn fixture(n: i64) -> EtaProductForm {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("fixtures/level{n}.eta"));
    parse_fixture(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fixture_expansions_agree_across_routes() {
    for n in LEVELS {
        let f = fixture(n);
        assert_eq!(eta_qexp(&f.factors, 500).unwrap(), eta_qexp_pentagonal(&f.factors, 500).unwrap());
        assert_eq!(f.coefficient(1), Some(1));
    }
}

#[test]
fn q_series_matches_eta_route() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for n in LEVELS {
        let f = fixture(n);
        for _ in 0..20 {
            let z = Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.15..1.5));
            let series = evaluate_form(&f, z, 1e-13).unwrap();
            let direct = f.value(z).unwrap();
            assert!((series.value - direct).norm() < 1e-12, "N={n} z={z}");
        }
    }
}

#[test]
fn level_eleven_at_i_has_a_tiny_tail() {
    let mut f = fixture(11);
    f.qexp.truncate(20);
    let ev = evaluate_form(&f, Complex64::i(), 1e-12).unwrap();
    let partial: f64 = (1..=20).map(|n| f.qexp[n - 1] as f64 * (-std::f64::consts::TAU * n as f64).exp()).sum();
    assert!(ev.error_bound < 1e-12);
    assert!((ev.value.re - partial).abs() < 1e-15);
    assert!(matches!(evaluate_form(&f, Complex64::new(0.3, 0.01), 1e-12), Err(NumericError::InsufficientTerms { .. })));
}

#[test]
fn automorphy_holds_for_random_gamma0_elements() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    for n in LEVELS {
        let f = fixture(n);
        let mut checked = 0;
        while checked < 100 {
            let c = n * rng.gen_range(-6..=6);
            let d = rng.gen_range(-40i64..=40);
            if gcd(c, d) != 1 {
                continue;
            }
            let g = complete_to_sl2(c, d).unwrap();
            let gamma = GL2QPlus::from_ints(g.a, g.b, g.c, g.d);
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.05..1.2));
            let lhs = slash_unitary(|w| f.value(w), &gamma, f.weight, z).unwrap();
            let rhs = f.chi.eval(d).to_complex() * f.value(z).unwrap();
            assert!((lhs - rhs).norm() < 1e-9, "N={n} gamma={g:?} z={z}");
            checked += 1;
        }
    }
}

#[test]
fn slash_by_identity_and_inverse_round_trip() {
    let f = fixture(20);
    let z = Complex64::new(0.21, 0.37);
    let id = GL2QPlus::from_ints(1, 0, 0, 1);
    assert_eq!(slash_unitary(|w| f.value(w), &id, 2, z).unwrap(), f.value(z).unwrap());
    let table = CuspTable::build(20, &f.chi).unwrap();
    for cls in &table.classes {
        let g = cls.gamma;
        let m = cls.m;
        let sigma = GL2QPlus::from_ints(g.a * m, g.b, g.c * m, g.d);
        let sigma_inv = sigma.inverse();
        let there = |w: Complex64| slash_unitary(|u| f.value(u), &sigma, 2, w);
        let back = slash_unitary(there, &sigma_inv, 2, z).unwrap();
        assert!((back - f.value(z).unwrap()).norm() < 1e-9);
    }
}

#[test]
fn hecke_eigenvalues() {
    let f11 = fixture(11);
    assert!((hecke_eigenvalue_numeric(&f11, 2).unwrap().lambda + 2f64.sqrt()).abs() < 1e-15);
    assert!((hecke_eigenvalue_numeric(&f11, 11).unwrap().lambda - 1.0 / 11f64.sqrt()).abs() < 1e-15);
    assert_eq!(hecke_eigenvalue_numeric(&fixture(27), 3).unwrap().lambda, 0.0);
    for n in LEVELS {
        let f = fixture(n);
        for p in [2, 3, 5, 7, 13] {
            let h = hecke_eigenvalue_numeric(&f, p).unwrap();
            assert!(h.residual < 1e-8, "N={n} p={p}: {}", h.residual);
        }
    }
}

#[test]
fn perturbed_coefficients_are_not_an_eigenform() {
    let mut f = fixture(11);
    f.factors.clear();
    f.qexp[4] += 1;
    assert!(matches!(hecke_eigenvalue_numeric(&f, 2), Err(NumericError::NotEigenform { .. })));
}

#[test]
fn extraction_at_infinity_recovers_the_q_expansion() {
    let f = fixture(11);
    let table = CuspTable::build(11, &f.chi).unwrap();
    let inf = table.class_of_cusp(Cusp::Infinity);
    let slice = extract_coefficients(&f, &table, inf, default_height(20), 20, None).unwrap();
    for n in 1..=20 {
        let expected = f.coefficient(n).unwrap() as f64 / n as f64;
        assert!((slice.get(n).unwrap() - expected).norm() < 1e-10, "n={n}");
    }
    assert!((slice.get(2).unwrap().re + 1.0).abs() < 1e-10);
    assert!(slice.get(-1).unwrap().norm() < 1e-10);
}

#[test]
fn extraction_is_stable_across_heights() {
    let f = fixture(20);
    let table = CuspTable::build(20, &f.chi).unwrap();
    for cls in &table.classes {
        let a = extract_coefficients(&f, &table, cls.id, 0.1, 16, None).unwrap();
        let b = extract_coefficients(&f, &table, cls.id, 0.05, 16, None).unwrap();
        let scale = a.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
            assert!((x - y).norm() < 1e-7 * scale, "{}", cls.cusp());
        }
    }
}

#[test]
fn extraction_reports_underflow() {
    let f = fixture(11);
    let table = CuspTable::build(11, &f.chi).unwrap();
    let err = extract_coefficients(&f, &table, 0, 5.0, 30, None).unwrap_err();
    assert!(err.to_string().contains("choose smaller y or n"));
    assert!(matches!(extract_coefficients(&f, &table, 0, 0.1, 30, Some(48)), Err(NumericError::BadSamples { .. })));
}

#[test]
fn whittaker_closed_forms_on_the_grid() {
    let mut worst = 0.0f64;
    for i in 0..=299 {
        let y = 0.1 + i as f64 * 0.1;
        let w = whittaker(0.0, Complex64::new(0.5, 0.0), y).unwrap();
        worst = worst.max((w.re - (-y / 2.0).exp()).abs() + w.im.abs());
        for k in [1, 2, 3, 4, 6, 12] {
            let kf = k as f64;
            let w = whittaker(kf / 2.0, Complex64::new((kf - 1.0) / 2.0, 0.0), y).unwrap();
            let exact = y.powf(kf / 2.0) * (-y / 2.0).exp();
            worst = worst.max((w.re - exact).abs() / exact.max(1.0));
        }
    }
    assert!(worst < 1e-10, "{worst}");
}
