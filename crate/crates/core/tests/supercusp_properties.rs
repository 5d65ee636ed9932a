use cusp_transfer::cusps::CuspTable;
use cusp_transfer::dirichlet::DirichletCharacter;
use cusp_transfer::supercusp::{conductor_precheck, primitive_precheck, vanishing_test, CuspOutcome, Verdict};
use cusp_transfer::transfer::CoefficientView;
use num_complex::Complex64;
use proptest::prelude::*;

const PRIMES: [i64; 6] = [2, 3, 5, 7, 11, 13];

/// Exact data vanishing from exponent `from(class)` on, at every mu = 0 class.
fn vanishing_view(table: &CuspTable, p: i64, bound: u32, from: impl Fn(usize) -> u32) -> CoefficientView {
    let mut view = CoefficientView::exact(table);
    for cls in table.classes.iter().filter(|c| c.mu.is_zero()) {
        for m in 0..=bound {
            let v = if m < from(cls.id) { 2.0 } else { 0.0 };
            view.set(cls.id, cls.m * p.pow(m), Complex64::new(v, 0.0));
        }
    }
    view
}

#[test]
fn excluded_cases_are_never_reported_consistent() {
    for n in 1..=100 {
        for chi in DirichletCharacter::all(n) {
            let table = CuspTable::build(n, &chi).unwrap();
            for p in PRIMES {
                let view = vanishing_view(&table, p, 3, |_| 1);
                let report = vanishing_test(&view, &table, p, 3, 0.0).unwrap();
                let excluded = primitive_precheck(&chi, p).is_excluded() || conductor_precheck(n, p).is_excluded();
                if excluded {
                    assert_ne!(report.verdict, Verdict::ConsistentWithSupercuspidal, "N={n} {chi} p={p}");
                    assert!(report.results.iter().all(|r| r.verdict != Verdict::ConsistentWithSupercuspidal));
                } else {
                    assert_eq!(report.verdict, Verdict::ConsistentWithSupercuspidal, "N={n} {chi} p={p}");
                }
            }
        }
    }
}

#[test]
fn report_does_not_depend_on_insertion_order() {
    let table = CuspTable::build(72, &DirichletCharacter::trivial(72)).unwrap();
    let forward = vanishing_view(&table, 3, 4, |id| id as u32 % 5);
    let mut reversed = CoefficientView::exact(&table);
    let mut entries: Vec<_> = forward.iter().map(|(&k, &v)| (k, v)).collect();
    entries.sort_by_key(|&(k, _)| std::cmp::Reverse(k));
    for ((c, n), v) in entries {
        reversed.set(c, n, v);
    }
    let a = vanishing_test(&forward, &table, 3, 4, 0.0).unwrap();
    let b = vanishing_test(&reversed, &table, 3, 4, 0.0).unwrap();
    assert_eq!(a.to_string(), b.to_string());
}

proptest! {
    #[test]
    fn reported_exponent_is_minimal(n_idx in 0usize..6, from in proptest::collection::vec(0u32..6, 64), bound in 5u32..7) {
        let (n, p) = [(27i64, 3i64), (36, 2), (36, 3), (50, 5), (72, 2), (98, 7)][n_idx];
        let table = CuspTable::build(n, &DirichletCharacter::trivial(n)).unwrap();
        let view = vanishing_view(&table, p, bound, |id| from[id % from.len()]);
        let report = vanishing_test(&view, &table, p, bound, 0.0).unwrap();
        for r in &report.results {
            prop_assert_eq!(&r.outcome, &CuspOutcome::VanishesFrom(from[r.class_id % from.len()]));
            let cls = table.class(r.class_id);
            if let CuspOutcome::VanishesFrom(m) = r.outcome {
                if m > 0 {
                    prop_assert!(view.get(cls.id, cls.m * p.pow(m - 1)).unwrap().norm() > 0.0);
                }
            }
        }
    }
}
