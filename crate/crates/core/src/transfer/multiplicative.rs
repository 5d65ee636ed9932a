use std::collections::BTreeSet;

use num_complex::Complex64;

use crate::cusps::Cusp;
use crate::exactnum::{factorize, gcd, valuation, PhaseQZ, Rational};

use super::view::CoefficientView;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultiplicativityDecision {
    MultiplicativeByTheorem,
    EightCase,
    Unknown,
}

impl std::fmt::Display for MultiplicativityDecision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MultiplicativityDecision::MultiplicativeByTheorem => "multiplicative-by-theorem",
            MultiplicativityDecision::EightCase => "eight-case",
            MultiplicativityDecision::Unknown => "unknown",
        })
    }
}

fn is_squarefree(n: i64) -> bool {
    factorize(n).iter().all(|&(_, e)| e == 1)
}

/// Decides whether B(a, .) is multiplicative at a/b from the shape of
/// M = gcd(N, b) alone.
pub fn multiplicativity_condition(n: i64, cusp: Cusp) -> MultiplicativityDecision {
    let b = match cusp {
        Cusp::Infinity => 0,
        Cusp::Fraction(_, b) => b,
    };
    let m = gcd(n, b);
    let g = gcd(m, n / m);
    if g == 1 || (g == 2 && valuation(n / m, 2) == 1) {
        return MultiplicativityDecision::MultiplicativeByTheorem;
    }
    let odd = n / 8;
    if n % 8 == 0 && odd % 2 == 1 && is_squarefree(odd) && b != 0 && valuation(b, 2) == 1 {
        return MultiplicativityDecision::EightCase;
    }
    MultiplicativityDecision::Unknown
}

/// For alpha = 2^e (1 + 2j + 4k) with odd 1 + 2j + 4k (a 2-adic unit), the
/// phase e(2^e j).
pub fn eight_case_phase(alpha: Rational) -> Option<PhaseQZ> {
    if alpha.is_zero() {
        return None;
    }
    let e = alpha.valuation(2);
    let odd = alpha / Rational::prime_power(2, e);
    let residue = (odd.numer() * odd.denom()).rem_euclid(4);
    let j = if residue == 3 { 1 } else { 0 };
    Some(PhaseQZ::new(Rational::prime_power(2, e) * Rational::from(j)))
}

/// A default support for the cross-ratio test at a cusp of width m: +-1 and
/// the prime powers p^e with p <= 7, p^e <= 8, and m p^e integral.
pub fn prime_power_support(width: i64) -> Vec<Rational> {
    let mut out = vec![Rational::from(1), Rational::from(-1)];
    for p in [2i64, 3, 5, 7] {
        let low = -(valuation(width, p) as i32);
        out.extend(
            (low..=3)
                .filter(|&e| e != 0)
                .map(|e| Rational::prime_power(p as i128, e))
                .filter(|&x| x <= Rational::from(8)),
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorizabilityReport {
    pub max_residual: f64,
    pub quadruples: usize,
    pub skipped: usize,
    pub pass: bool,
    /// (alpha, alpha', beta, beta') attaining the maximum residual.
    pub worst: Option<[Rational; 4]>,
}

/// Places of a nonzero rational: its primes, plus -1 for a negative sign.
fn places(x: Rational) -> BTreeSet<i64> {
    let mut s: BTreeSet<i64> = factorize(x.numer().unsigned_abs() as i64)
        .into_iter()
        .chain(factorize(x.denom() as i64))
        .map(|(p, _)| p)
        .collect();
    if x.signum() < 0 {
        s.insert(-1);
    }
    s
}

/// Cross-ratio test B(ab) B(a'b') = B(ab') B(a'b) over quadruples from the
/// support where a, a' and b, b' live on disjoint sets of places.
pub fn factorizability_test(view: &CoefficientView, class_id: usize, support: &[Rational], tol: f64) -> Option<FactorizabilityReport> {
    factorizability_test_with(view, class_id, support, tol, |_| Complex64::new(1.0, 0.0))
}

/// As `factorizability_test`, testing B(alpha) / weight(alpha) instead.
pub fn factorizability_test_with(
    view: &CoefficientView,
    class_id: usize,
    support: &[Rational],
    tol: f64,
    weight: impl Fn(Rational) -> Complex64,
) -> Option<FactorizabilityReport> {
    if support.is_empty() {
        return None;
    }
    let b = |x: Rational| view.b(class_id, x).map(|v| v / weight(x));
    let supp: Vec<BTreeSet<i64>> = support.iter().map(|&x| places(x)).collect();
    let mut terms = Vec::new();
    let mut skipped = 0;
    for (i, &a) in support.iter().enumerate() {
        for (i2, &a2) in support.iter().enumerate().skip(i) {
            let left: BTreeSet<i64> = supp[i].union(&supp[i2]).copied().collect();
            for (k, &c) in support.iter().enumerate() {
                for (k2, &c2) in support.iter().enumerate().skip(k) {
                    if !left.is_disjoint(&supp[k]) || !left.is_disjoint(&supp[k2]) {
                        continue;
                    }
                    match (b(a * c), b(a2 * c2), b(a * c2), b(a2 * c)) {
                        (Some(x1), Some(x2), Some(y1), Some(y2)) => {
                            terms.push(([a, a2, c, c2], x1 * x2 - y1 * y2, (x1 * x2).norm().max((y1 * y2).norm())))
                        }
                        _ => skipped += 1,
                    }
                }
            }
        }
    }
    let scale = terms.iter().map(|t| t.2).fold(0.0, f64::max);
    let mut max_residual = 0.0;
    let mut worst = None;
    for (quad, diff, _) in &terms {
        let r = if scale > 0.0 { diff.norm() / scale } else { 0.0 };
        if r > max_residual {
            max_residual = r;
            worst = Some(*quad);
        }
    }
    Some(FactorizabilityReport { max_residual, quadruples: terms.len(), skipped, pass: max_residual <= tol, worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusps::CuspTable;
    use crate::dirichlet::DirichletCharacter;

    #[test]
    fn condition_examples() {
        use MultiplicativityDecision::*;
        assert_eq!(multiplicativity_condition(20, Cusp::fraction(1, 2)), MultiplicativeByTheorem);
        assert_eq!(multiplicativity_condition(11, Cusp::fraction(0, 1)), MultiplicativeByTheorem);
        assert_eq!(multiplicativity_condition(24, Cusp::fraction(1, 2)), EightCase);
        assert_eq!(multiplicativity_condition(24, Cusp::fraction(1, 4)), MultiplicativeByTheorem);
        assert_eq!(multiplicativity_condition(16, Cusp::fraction(1, 4)), Unknown);
        assert_eq!(multiplicativity_condition(24, Cusp::Infinity), MultiplicativeByTheorem);
    }

    #[test]
    fn eight_case_examples() {
        assert_eq!(eight_case_phase(Rational::from(1)).unwrap(), PhaseQZ::zero());
        assert_eq!(eight_case_phase(Rational::from(3)).unwrap(), PhaseQZ::zero());
        assert_eq!(eight_case_phase(Rational::from(2)).unwrap(), PhaseQZ::zero());
        assert_eq!(eight_case_phase(Rational::new(3, 4)).unwrap(), PhaseQZ::from_fraction(1, 4));
        assert_eq!(eight_case_phase(Rational::new(7, 2)).unwrap(), PhaseQZ::from_fraction(1, 2));
        assert_eq!(eight_case_phase(Rational::zero()), None);
    }

    fn synthetic(table: &CuspTable, f: impl Fn(i64) -> f64) -> CoefficientView {
        let mut view = CoefficientView::exact(table);
        for n in -400..=400 {
            view.set(0, n, Complex64::new(f(n), 0.0));
        }
        view
    }

    fn support() -> Vec<Rational> {
        [1, 2, 3, 4, 5, 7, 8, 9, 11, 13].iter().map(|&n| Rational::from(n)).collect()
    }

    #[test]
    fn synthetic_factorizable_data() {
        let table = CuspTable::build(1, &DirichletCharacter::trivial(1)).unwrap();
        let zero = synthetic(&table, |_| 0.0);
        assert!(factorizability_test(&zero, 0, &support(), 1e-12).unwrap().pass);
        let g = |n: i64| factorize(n.abs()).iter().map(|&(p, e)| (p + 2 * e as i64 - 4) as f64).product::<f64>();
        let mut view = synthetic(&table, |n| if n == 0 { 0.0 } else { 3.0 * g(n) });
        let r = factorizability_test(&view, 0, &support(), 0.0).unwrap();
        assert_eq!(r.max_residual, 0.0);
        assert!(r.quadruples > 100);
        let old = view.get(0, 6).unwrap();
        view.set(0, 6, old + 1.0);
        assert!(!factorizability_test(&view, 0, &support(), 1e-9).unwrap().pass);
    }

    #[test]
    fn empty_support_is_an_error() {
        let table = CuspTable::build(1, &DirichletCharacter::trivial(1)).unwrap();
        assert!(factorizability_test(&CoefficientView::exact(&table), 0, &[], 1e-8).is_none());
    }
}
