use cusp_transfer::cusps::{CuspTable, PerPrimeTag};
use cusp_transfer::dirichlet::DirichletCharacter;
use cusp_transfer::exactnum::valuation;
use cusp_transfer::transfer::{decompose_index, membership_candidates, transfer_general, transfer_prime_power};

const PRIME_POWERS: [(i64, u32); 6] = [(2, 3), (3, 2), (2, 4), (5, 2), (3, 3), (2, 5)];

fn tables(q: i64, e: u32) -> impl Iterator<Item = CuspTable> {
    let n = q.pow(e);
    DirichletCharacter::all(n).into_iter().map(move |chi| CuspTable::build(n, &chi).unwrap())
}

#[test]
fn prime_power_targets_are_unique_and_agree_with_the_general_scan() {
    for (q, e) in PRIME_POWERS {
        for table in tables(q, e) {
            for cls in &table.classes {
                for eps in [1, -1] {
                    for m in 0..=200 {
                        let Ok(cert) = transfer_prime_power(&table, cls.id, eps, m) else {
                            assert!(m == 0 && cls.mu.is_zero());
                            continue;
                        };
                        let d = decompose_index(&table, cls.id, eps, m).unwrap();
                        let target = &cert.per_prime[0];
                        assert_eq!(membership_candidates(&table, cls.id, &d, q), vec![(target.class_id, target.j)]);
                        assert_eq!(transfer_general(&table, cls.id, eps, m).unwrap(), cert, "{}^{} {} {}{}", q, e, cls.cusp(), eps, m);
                    }
                }
            }
        }
    }
}

#[test]
fn exponent_of_q_follows_the_four_cases() {
    for (q, e) in PRIME_POWERS {
        for table in tables(q, e) {
            let e0 = table.chi.component(q).unwrap().conductor_exponent() as i32;
            for cls in &table.classes {
                for m in 1..=60 {
                    let alpha = valuation(m, q) as i32;
                    let d = decompose_index(&table, cls.id, 1, m).unwrap();
                    let expected = match cls.tag(q).unwrap() {
                        PerPrimeTag::Inf => alpha,
                        PerPrimeTag::Zero => alpha - e as i32,
                        PerPrimeTag::C { l, .. } if !cls.mu.is_zero() => -e0 + l as i32,
                        PerPrimeTag::C { l, .. } => alpha - (e as i32 - 2 * l as i32).max(0),
                    };
                    assert_eq!(d.exponent(q), expected);
                    assert_eq!(d.scaled_index() * cusp_transfer::exactnum::Rational::from(cls.m), cusp_transfer::exactnum::Rational::from(m) + cls.mu);
                }
            }
        }
    }
}

#[test]
fn primitive_character_targets_do_not_depend_on_the_source() {
    for (q, e) in [(3, 2), (3, 3), (5, 2)] {
        for table in tables(q, e).filter(|t| t.chi.is_primitive()) {
            for l in 1..e {
                let mut targets = Vec::new();
                for cls in table.classes.iter().filter(|c| !c.mu.is_zero()) {
                    let PerPrimeTag::C { l: lc, .. } = cls.tag(q).unwrap() else { continue };
                    if lc != l {
                        continue;
                    }
                    for eps in [1, -1] {
                        for m in 0..=40 {
                            let cert = transfer_prime_power(&table, cls.id, eps, m).unwrap();
                            let target = &cert.per_prime[0];
                            assert_eq!(target.index, Some(0));
                            targets.push(target.class_id);
                        }
                    }
                }
                targets.dedup();
                assert!(targets.len() <= 1, "{q}^{e} l={l}: {targets:?}");
            }
        }
    }
}

#[test]
fn eight_case_phase_breaks_the_cross_ratio_once_quarters_appear() {
    use cusp_transfer::exactnum::Rational;
    use cusp_transfer::transfer::{eight_case_phase, factorizability_test, factorizability_test_with, CoefficientView};

    // Cusp 0 at level 16 has width 16, so alpha = n/16 reaches 2-adic
    // valuation -2, where the phase is not multiplicative.
    let table = CuspTable::build(16, &DirichletCharacter::trivial(16)).unwrap();
    let zero = table.class_of_cusp(cusp_transfer::cusps::Cusp::Fraction(0, 1));
    let m = table.class(zero).m;
    let weight = |a: Rational| eight_case_phase(a).unwrap().to_complex();
    let mut view = CoefficientView::new(&table);
    for n in 1..=m * 64 {
        let alpha = Rational::new(n as i128, m as i128);
        view.set(zero, n, weight(alpha) / alpha.to_f64().sqrt());
    }
    let support: Vec<Rational> = [(1, 4), (1, 2), (1, 1), (2, 1), (3, 1), (5, 1), (7, 1)]
        .iter()
        .map(|&(a, b)| Rational::new(a, b))
        .collect();
    let with = factorizability_test_with(&view, zero, &support, 1e-8, weight).unwrap();
    let without = factorizability_test(&view, zero, &support, 1e-8).unwrap();
    assert!(with.pass, "{}", with.max_residual);
    assert!(!without.pass);
    assert_eq!(with.skipped, 0);
}
