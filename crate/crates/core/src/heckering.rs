//! Hecke operators in the group ring of GL2(Q)+ modulo the right ideal
//! generated by gamma - chi(gamma), and the three-term relation between
//! Fourier coefficients at the cusps a, p.a and p^{-1}.a.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::cusps::{CuspTable, PerPrimeTag};
use crate::dirichlet::DirichletCharacter;
use crate::exactnum::{complete_to_sl2, crt_solve, factorize, gcd, ipow, is_prime, lift_row, mod_inv, PhaseQZ, Rational, UnitValue, SL2Z};
use crate::transfer::CoefficientView;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeckeError {
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("p = {0} divides the level {1}")]
    PrimeDividesLevel(i64, i64),
    #[error("insufficient data: A({class}, {index}) is missing")]
    InsufficientData { class: usize, index: i64 },
}

/// An upper-triangular integer matrix (a, t; 0, d) with ad = p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Upper {
    pub a: i64,
    pub t: i64,
    pub d: i64,
}

impl Upper {
    pub fn diag(p: i64) -> Self {
        Upper { a: p, t: 0, d: 1 }
    }

    pub fn column(b: i64, p: i64) -> Self {
        Upper { a: 1, t: b, d: p }
    }

    /// T^j * self.
    pub fn translate(self, j: i64) -> Self {
        Upper { t: self.t + j * self.d, ..self }
    }
}

/// phase * gamma * xi, with gamma in SL2(Z).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupRingTerm {
    pub phase: PhaseQZ,
    pub gamma: SL2Z,
    pub xi: Upper,
}

/// A formal sum of terms; equal matrices are not merged.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupRingElement {
    pub terms: Vec<GroupRingTerm>,
}

/// The shape of xi in S_p: (p, 0; 0, 1) or (1, b; 0, p) with 0 <= b < p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Xi {
    Diag,
    Column(i64),
}

/// phase * gamma_b * T^j * xi.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalTerm {
    pub class_id: usize,
    pub j: i64,
    pub xi: Xi,
    pub phase: PhaseQZ,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub terms: Vec<NormalTerm>,
}

fn check_prime(p: i64, n: i64) -> Result<(), HeckeError> {
    if !is_prime(p) {
        return Err(HeckeError::NotPrime(p));
    }
    if gcd(p, n) != 1 {
        return Err(HeckeError::PrimeDividesLevel(p, n));
    }
    Ok(())
}

fn lift(x0: i64, x1: i64, n: i64) -> SL2Z {
    let (c, d) = lift_row(x0, x1, n);
    complete_to_sl2(c, d).expect("lifted row is coprime")
}

/// T_p gamma as s(c, pd)(p,0;0,1) + sum_i s(pc, d - ic)(1,i;0,p), where
/// s(x) is an SL2(Z) matrix with bottom row x mod N.
pub fn hecke_expand(p: i64, gamma: &SL2Z, table: &CuspTable) -> Result<GroupRingElement, HeckeError> {
    let n = table.n;
    check_prime(p, n)?;
    let (c, d) = gamma.bottom_row();
    let mut terms = vec![GroupRingTerm { phase: PhaseQZ::zero(), gamma: lift(c, p * d, n), xi: Upper::diag(p) }];
    terms.extend((0..p).map(|i| GroupRingTerm { phase: PhaseQZ::zero(), gamma: lift(p * c, d - i * c, n), xi: Upper::column(i, p) }));
    Ok(GroupRingElement { terms })
}

/// Rewrites each term as phase * gamma_b * T^j * xi with 0 <= j < m_b and
/// xi in S_p, using gamma = gamma0 gamma_b T^j and gamma_b T^m = g_b gamma_b.
pub fn normalize(el: &GroupRingElement, table: &CuspTable) -> NormalForm {
    let mut terms: Vec<NormalTerm> = el
        .terms
        .iter()
        .map(|term| {
            let (x0, x1) = term.gamma.bottom_row();
            let loc = table.locate_row(x0, x1);
            let cls = table.class(loc.class_id);
            let gamma0 = term.gamma * (cls.gamma * SL2Z::translation(loc.j)).inverse();
            assert_eq!(gamma0.c.rem_euclid(table.n), 0, "gamma0 left Gamma0(N)");
            let chi0 = table.chi.phase(gamma0.d);
            assert_eq!(chi0, table.chi.phase(loc.lambda), "scalar and lower-right entry disagree");
            let u = term.xi.translate(loc.j);
            let period = cls.m * u.d;
            let k = u.t.div_euclid(period);
            let t = u.t.rem_euclid(period);
            let phase = term.phase + chi0 + PhaseQZ::new(cls.mu * Rational::from(k));
            let (j, xi) = if u.d != 1 { (t.div_euclid(u.d), Xi::Column(t.rem_euclid(u.d))) } else { (t, Xi::Diag) };
            NormalTerm { class_id: loc.class_id, j, xi, phase }
        })
        .collect();
    terms.sort();
    NormalForm { terms }
}

/// The data (a', a'', j', j'', lambda', lambda'', N') of the three-term relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeTermDatum {
    pub class_id: usize,
    pub p: i64,
    pub aprime: usize,
    pub adoubleprime: usize,
    pub jprime: i64,
    pub jdoubleprime: i64,
    pub lambdaprime: i64,
    pub lambdadoubleprime: i64,
    pub nprime: i64,
    cusp_names: [String; 2],
}

impl fmt::Display for ThreeTermDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "a'={} a''={} j'={} j''={} l'={} l''={} N'={}",
            self.cusp_names[0], self.cusp_names[1], self.jprime, self.jdoubleprime, self.lambdaprime, self.lambdadoubleprime, self.nprime
        )
    }
}

/// Per-prime pieces: (tag', tag'', lambda', lambda'', j', j'', e').
struct LocalThreeTerm {
    tags: (PerPrimeTag, PerPrimeTag),
    lambdas: (i64, i64),
    js: (i64, i64),
    eprime: u32,
}

fn local_three_term(q: i64, e: u32, tag: PerPrimeTag, p: i64) -> LocalThreeTerm {
    let qe = ipow(q, e);
    let p_mod = p.rem_euclid(qe);
    match tag {
        PerPrimeTag::Inf => LocalThreeTerm { tags: (tag, tag), lambdas: (1, p_mod), js: (0, 0), eprime: 0 },
        PerPrimeTag::Zero => LocalThreeTerm { tags: (tag, tag), lambdas: (p_mod, 1), js: (0, 0), eprime: e },
        PerPrimeTag::C { c1, l } if 2 * l >= e => {
            let w = ipow(q, e - l);
            let inv_p = mod_inv(p, w).expect("p is prime to q");
            let c1pp = (c1 * inv_p).rem_euclid(w);
            let c1p = (c1 * p).rem_euclid(w);
            LocalThreeTerm {
                tags: (PerPrimeTag::C { c1: c1p, l }, PerPrimeTag::C { c1: c1pp, l }),
                lambdas: (1, p_mod),
                js: (0, 0),
                eprime: e - l,
            }
        }
        PerPrimeTag::C { c1, l } => {
            let ql = ipow(q, l);
            let w = ipow(q, e - l);
            let c1pp = (c1 * mod_inv(p, ql).expect("p is prime to q")).rem_euclid(ql);
            let c1p = (c1 * p).rem_euclid(ql);
            let jpp = (0..w)
                .find(|&j| (c1pp * (p - j * ql * c1) - c1).rem_euclid(qe) == 0)
                .expect("j'' exists");
            let jp = (0..w)
                .find(|&j| ((1 - ql * c1 * j * p) * c1p - c1 * p).rem_euclid(qe) == 0)
                .expect("j' exists");
            let inv = |x: i64| mod_inv(x, qe).expect("unit");
            LocalThreeTerm {
                tags: (PerPrimeTag::C { c1: c1p, l }, PerPrimeTag::C { c1: c1pp, l }),
                lambdas: ((p * inv(c1p) % qe * c1).rem_euclid(qe), (inv(c1pp) * c1).rem_euclid(qe)),
                js: (jp, jpp),
                eprime: e - l,
            }
        }
    }
}

/// Assembles the three-term data prime by prime and by CRT.
pub fn three_term_data(table: &CuspTable, class_id: usize, p: i64) -> Result<ThreeTermDatum, HeckeError> {
    let n = table.n;
    check_prime(p, n)?;
    let cls = table.class(class_id);
    let locals: Vec<(i64, u32, LocalThreeTerm)> = factorize(n)
        .into_iter()
        .map(|(q, e)| (q, e, local_three_term(q, e, cls.tag(q).expect("tag"), p)))
        .collect();
    let positive = |x: i64| if x == 0 { n } else { x };
    let nprime: i64 = locals.iter().map(|(q, _, l)| ipow(*q, l.eprime)).product();
    let lam = |sel: fn(&LocalThreeTerm) -> i64| -> i64 {
        let pairs: Vec<(i64, i64)> = locals.iter().map(|(q, e, l)| (sel(l), ipow(*q, *e))).collect();
        positive(crt_solve(&pairs).expect("coprime moduli"))
    };
    let jsel = |sel: fn(&LocalThreeTerm) -> i64| -> i64 {
        let pairs: Vec<(i64, i64)> = locals.iter().map(|(q, _, l)| (sel(l), ipow(*q, l.eprime))).collect();
        crt_solve(&pairs).expect("coprime moduli")
    };
    let tags = |sel: fn(&LocalThreeTerm) -> PerPrimeTag| -> usize {
        let t: Vec<(i64, PerPrimeTag)> = locals.iter().map(|(q, _, l)| (*q, sel(l))).collect();
        table.class_with_tags(&t).expect("target class exists")
    };
    let aprime = tags(|l| l.tags.0);
    let adoubleprime = tags(|l| l.tags.1);
    Ok(ThreeTermDatum {
        class_id,
        p,
        aprime,
        adoubleprime,
        jprime: jsel(|l| l.js.0),
        jdoubleprime: jsel(|l| l.js.1),
        lambdaprime: lam(|l| l.lambdas.0),
        lambdadoubleprime: lam(|l| l.lambdas.1),
        nprime,
        cusp_names: [table.class(aprime).cusp().to_string(), table.class(adoubleprime).cusp().to_string()],
    })
}

/// The right-hand side chi(l'') gamma_a'' (p, j''; 0, 1)
/// + chi(l') gamma_a' sum_{b = p j' mod N', 0 <= b < N'p} (1, b; 0, p).
pub fn three_term_element(datum: &ThreeTermDatum, table: &CuspTable) -> GroupRingElement {
    let p = datum.p;
    let mut terms = vec![GroupRingTerm {
        phase: table.chi.phase(datum.lambdadoubleprime),
        gamma: table.class(datum.adoubleprime).gamma,
        xi: Upper { a: p, t: datum.jdoubleprime, d: 1 },
    }];
    let start = (datum.p * datum.jprime).rem_euclid(datum.nprime);
    terms.extend((0..p).map(|s| GroupRingTerm {
        phase: table.chi.phase(datum.lambdaprime),
        gamma: table.class(datum.aprime).gamma,
        xi: Upper::column(start + s * datum.nprime, p),
    }));
    GroupRingElement { terms }
}

/// Checks T_p gamma_a against the three-term element modulo the ideal by
/// comparing normal forms.
pub fn verify_prop75(datum: &ThreeTermDatum, table: &CuspTable) -> bool {
    let Ok(lhs) = hecke_expand(datum.p, &table.class(datum.class_id).gamma, table) else {
        return false;
    };
    normalize(&lhs, table) == normalize(&three_term_element(datum, table), table)
}

/// b_0..b_kmax with sqrt(p) b_k - lambda b_{k-1} + chi(p)/sqrt(p) b_{k-2} = 0,
/// b_{-1} = 0, b_0 = 1.
pub fn recursion_coefficients(lambda: Complex64, chi_p: UnitValue, p: i64, kmax: usize) -> Vec<Complex64> {
    let sp = (p as f64).sqrt();
    let cp = chi_p.to_complex();
    let mut b = vec![Complex64::new(1.0, 0.0)];
    let mut prev = Complex64::new(0.0, 0.0);
    for _ in 0..kmax {
        let cur = *b.last().unwrap();
        let next = (lambda * cur - cp / sp * prev) / sp;
        prev = cur;
        b.push(next);
    }
    b
}

/// The left side of the three-term relation at index n:
/// chi(l'')/sqrt(p) e((n+mu) j''/(p m)) A(a'', (n+mu)/p - mu'')
/// - lambda A(a, n) + sqrt(p) chi(l') e((n+mu) p j'/m) A(a', p(n+mu) - mu').
pub fn three_term_residual(
    view: &CoefficientView,
    datum: &ThreeTermDatum,
    lambda: Complex64,
    n: i64,
    chi: &DirichletCharacter,
) -> Result<Complex64, HeckeError> {
    three_term_terms(view, datum, lambda, n, chi).map(|t| t.iter().sum())
}

/// max_n |residual(n)| over the largest single term seen for any n in the
/// range, so indices where every coefficient vanishes do not divide noise by
/// noise.
pub fn three_term_relative_residual(
    view: &CoefficientView,
    datum: &ThreeTermDatum,
    lambda: Complex64,
    range: std::ops::RangeInclusive<i64>,
    chi: &DirichletCharacter,
) -> Result<f64, HeckeError> {
    let terms = range.map(|n| three_term_terms(view, datum, lambda, n, chi)).collect::<Result<Vec<_>, _>>()?;
    let scale = terms.iter().flatten().map(|t| t.norm()).fold(0.0, f64::max);
    let worst = terms.iter().map(|t| t.iter().sum::<Complex64>().norm()).fold(0.0, f64::max);
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// The three summands of the residual: the a'' term, -lambda A(a, n), and
/// the a' term.
pub fn three_term_terms(
    view: &CoefficientView,
    datum: &ThreeTermDatum,
    lambda: Complex64,
    n: i64,
    chi: &DirichletCharacter,
) -> Result<[Complex64; 3], HeckeError> {
    let p = datum.p;
    let sp = (p as f64).sqrt();
    let a = datum.class_id;
    let shifted = Rational::from(n) + view.mu(a);
    let m = Rational::from(view.width(a));
    let fetch = |class: usize, idx: i64| view.get(class, idx).ok_or(HeckeError::InsufficientData { class, index: idx });
    let lower_idx = shifted / Rational::from(p) - view.mu(datum.adoubleprime);
    let lower = match lower_idx.as_integer() {
        Some(i) => {
            let e = PhaseQZ::new(shifted * Rational::from(datum.jdoubleprime) / (Rational::from(p) * m));
            chi.phase(datum.lambdadoubleprime).to_complex() * e.to_complex() * fetch(datum.adoubleprime, i as i64)? / sp
        }
        None => Complex64::new(0.0, 0.0),
    };
    let upper_idx = (shifted * Rational::from(p) - view.mu(datum.aprime))
        .as_integer()
        .expect("p(n + mu) - mu' is an integer") as i64;
    let e = PhaseQZ::new(shifted * Rational::from(p * datum.jprime) / m);
    let upper = chi.phase(datum.lambdaprime).to_complex() * e.to_complex() * fetch(datum.aprime, upper_idx)? * sp;
    Ok([lower, -lambda * fetch(a, n)?, upper])
}

#[cfg(test)]
mod tests {
    use super::*;
        use crate::exactnum::Mat2Q;

    fn trivial(n: i64) -> CuspTable {
        CuspTable::build(n, &DirichletCharacter::trivial(n)).unwrap()
    }

    fn upper_mat(u: Upper) -> Mat2Q {
        Mat2Q::from_ints(u.a, u.t, 0, u.d)
    }

    /// Each term s * xi of the coset expansion has bottom row congruent mod N to the
    /// bottom row of xi' gamma for the matching coset rep xi'.
    fn expansion_matches_cosets(p: i64, gamma: SL2Z, table: &CuspTable) {
        let el = hecke_expand(p, &gamma, table).unwrap();
        assert_eq!(el.terms.len() as i64, p + 1);
        let n = table.n as i128;
        let reps: Vec<Upper> = std::iter::once(Upper::diag(p)).chain((0..p).map(|b| Upper::column(b, p))).collect();
        for term in &el.terms {
            let target = Mat2Q::from(term.gamma) * upper_mat(term.xi);
            let integral: Vec<Upper> = reps
                .iter()
                .copied()
                .filter(|&x| (upper_mat(x) * Mat2Q::from(gamma) * Mat2Q::from_ints(term.xi.d, -term.xi.t, 0, term.xi.a).scale(Rational::new(1, p as i128))).is_integral())
                .collect();
            assert_eq!(integral.len(), 1);
            let hits = integral
                .iter()
                .filter(|&&x| {
                    let mut m = upper_mat(x) * Mat2Q::from(gamma) * Mat2Q::from_ints(term.xi.d, -term.xi.t, 0, term.xi.a).scale(Rational::new(1, p as i128));
                    if x == Upper::diag(p) {
                        m = m.scale(Rational::from(p));
                    }
                    m.is_integral()
                        && (m.c.as_integer().unwrap() - term.gamma.c as i128).rem_euclid(n) == 0
                        && (m.d.as_integer().unwrap() - term.gamma.d as i128).rem_euclid(n) == 0
                })
                .count();
            assert_eq!(hits, 1, "term {target:?}");
        }
    }

    #[test]
    fn expansion_examples() {
        let t11 = trivial(11);
        expansion_matches_cosets(2, SL2Z::identity(), &t11);
        expansion_matches_cosets(3, SL2Z::new(0, -1, 1, 0).unwrap(), &t11);
        let t8 = trivial(8);
        expansion_matches_cosets(3, SL2Z::new(1, 0, 2, 1).unwrap(), &t8);
        assert_eq!(hecke_expand(11, &SL2Z::identity(), &t11), Err(HeckeError::PrimeDividesLevel(11, 11)));
    }

    #[test]
    fn normal_form_of_representatives() {
        let t11 = trivial(11);
        let zero = t11.class_of_cusp("0".parse().unwrap());
        let el = GroupRingElement { terms: vec![GroupRingTerm { phase: PhaseQZ::zero(), gamma: SL2Z::new(0, -1, 1, 0).unwrap(), xi: Upper::diag(1) }] };
        let nf = normalize(&el, &t11);
        assert_eq!(nf.terms, vec![NormalTerm { class_id: zero, j: 0, xi: Xi::Diag, phase: PhaseQZ::zero() }]);
    }

    #[test]
    fn datum_examples() {
        let t11 = trivial(11);
        let d = three_term_data(&t11, t11.class_of_cusp("inf".parse().unwrap()), 2).unwrap();
        assert_eq!((d.lambdaprime, d.lambdadoubleprime, d.jprime, d.jdoubleprime), (1, 2, 0, 0));
        let zero = t11.class_of_cusp("0".parse().unwrap());
        let d = three_term_data(&t11, zero, 2).unwrap();
        assert_eq!((d.aprime, d.adoubleprime), (zero, zero));
        assert_eq!((d.lambdaprime, d.lambdadoubleprime), (2, 1));
        assert_eq!(d.to_string(), "a'=0 a''=0 j'=0 j''=0 l'=2 l''=1 N'=11");
        assert!(verify_prop75(&d, &t11));
    }

    #[test]
    fn level_sixteen_half() {
        let t = trivial(16);
        let half = t.class_of_cusp("1/2".parse().unwrap());
        let d = three_term_data(&t, half, 3).unwrap();
        assert_eq!(d.aprime, half);
        let lhs = normalize(&hecke_expand(3, &t.class(half).gamma, &t).unwrap(), &t);
        let rhs = normalize(&three_term_element(&d, &t), &t);
        assert_eq!(lhs, rhs, "{d}");
        let mut bad = d.clone();
        bad.jprime += 1;
        assert!(!verify_prop75(&bad, &t));
    }

    #[test]
    fn group_ring_identity_with_characters() {
        for n in [8, 9, 12, 16, 27] {
            for chi in DirichletCharacter::all(n) {
                let t = CuspTable::build(n, &chi).unwrap();
                for c in 0..t.len() {
                    for p in [2, 3, 5, 7, 11, 13].into_iter().filter(|&p| gcd(p, n) == 1) {
                        let d = three_term_data(&t, c, p).unwrap();
                        assert!(verify_prop75(&d, &t), "N={n} {chi} class {} p={p}: {d}", t.class(c).cusp());
                    }
                }
            }
        }
    }

    #[test]
    fn recursion_examples() {
        let lam = Complex64::new(0.7, 0.1);
        assert_eq!(recursion_coefficients(lam, UnitValue::one(), 2, 0), vec![Complex64::new(1.0, 0.0)]);
        let b = recursion_coefficients(lam, UnitValue::one(), 2, 1);
        assert!((b[1] - lam / 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn residual_vanishes_on_recursive_data_at_infinity() {
        let t = trivial(11);
        let chi = t.chi.clone();
        let p = 3;
        let lam = Complex64::new(-1.0 / 3f64.sqrt(), 0.0);
        let b = recursion_coefficients(lam, chi.eval(p), p, 6);
        let mut view = CoefficientView::exact(&t);
        for n in 1..=3i64.pow(6) {
            let k = crate::exactnum::valuation(n, p) as usize;
            let unit = n / ipow(p, k as u32);
            let base = Complex64::new(unit as f64, 0.0);
            view.set(0, n, base * b[k]);
        }
        let d = three_term_data(&t, 0, p).unwrap();
        for n in [1, 2, 3, 6, 9, 27] {
            assert!(three_term_residual(&view, &d, lam, n, &chi).unwrap().norm() < 1e-12);
        }
        assert!(matches!(three_term_residual(&view, &d, lam, 500, &chi), Err(HeckeError::InsufficientData { .. })));
    }
}
