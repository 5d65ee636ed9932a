//! Exact transfer certificates: a coefficient A(a, eM) written as a phase
//! times coefficients at infinity and at one target cusp per prime q | N.

mod multiplicative;
mod view;

use std::fmt;

use thiserror::Error;

use crate::cusps::{Cusp, CuspTable, PerPrimeTag};
use crate::exactnum::{factorize, ipow, mod_inv, Mat2Q, PhaseQZ, Rational, SL2Z};

pub use multiplicative::{
    eight_case_phase, factorizability_test, factorizability_test_with, multiplicativity_condition,
    prime_power_support, FactorizabilityReport, MultiplicativityDecision,
};
pub use view::CoefficientView;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransferError {
    #[error("index eM + mu is zero")]
    ZeroIndex,
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i64),
    #[error("level {0} is not a prime power")]
    NotPrimePower(i64),
    #[error("membership scan at q={q} found {found} solutions")]
    NotUnique { q: i64, found: usize },
}

/// The factorization eM + mu = e m_a M0 prod_q q^{m'_q}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexDecomposition {
    pub epsilon: i64,
    pub m_index: i64,
    pub m0: i64,
    /// Primes p not dividing N with their exponents in M0.
    pub m0_factors: Vec<(i64, u32)>,
    /// Exponents of primes outside N that appear in a denominator. Empty for
    /// every index produced by a genuine cusp parameter.
    pub negative_factors: Vec<(i64, i32)>,
    pub m_by_prime: Vec<(i64, i32)>,
    pub mu: Rational,
}

impl IndexDecomposition {
    pub fn exponent(&self, q: i64) -> i32 {
        self.m_by_prime.iter().find(|t| t.0 == q).map_or(0, |t| t.1)
    }

    /// (eM + mu) / (e m_a), always positive.
    pub fn scaled_index(&self) -> Rational {
        let qpart = self
            .m_by_prime
            .iter()
            .fold(Rational::from(1), |acc, &(q, k)| acc * Rational::prime_power(q as i128, k));
        Rational::from(self.m0) * qpart
    }
}

fn signed_factors(x: i128) -> Vec<(i64, u32)> {
    factorize(i64::try_from(x.abs()).expect("index fits in i64"))
}

/// Writes eM + mu as e m_a M0 prod q^{m'_q}. M = 0 is read with e = +1.
pub fn decompose_index(table: &CuspTable, class_id: usize, epsilon: i64, m_index: i64) -> Result<IndexDecomposition, TransferError> {
    if epsilon.abs() != 1 {
        return Err(TransferError::BadSign(epsilon));
    }
    let epsilon = if m_index == 0 { 1 } else { epsilon };
    let cls = table.class(class_id);
    let shifted = Rational::from(epsilon * m_index) + cls.mu;
    if shifted.is_zero() {
        return Err(TransferError::ZeroIndex);
    }
    let t = shifted / Rational::from(epsilon * cls.m);
    assert!(t.signum() > 0, "sign of eM + mu differs from e");
    let level_primes: Vec<i64> = factorize(table.n).into_iter().map(|(q, _)| q).collect();
    let m_by_prime = level_primes.iter().map(|&q| (q, t.valuation(q as i128))).collect();
    let mut m0_factors = Vec::new();
    let mut negative_factors = Vec::new();
    for (p, k) in signed_factors(t.numer()) {
        if !level_primes.contains(&p) {
            m0_factors.push((p, k));
        }
    }
    for (p, k) in signed_factors(t.denom()) {
        if !level_primes.contains(&p) {
            negative_factors.push((p, -(k as i32)));
        }
    }
    let m0 = m0_factors.iter().map(|&(p, k)| ipow(p, k)).product();
    Ok(IndexDecomposition { epsilon, m_index, m0, m0_factors, negative_factors, m_by_prime, mu: cls.mu })
}

/// The target of the certificate at one prime q | N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerPrimeTarget {
    pub q: i64,
    pub class_id: usize,
    pub cusp: Cusp,
    pub j: i64,
    /// m_b q^{m'} - mu_b, or `None` when it is not an integer.
    pub index: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferCertificate {
    pub source_class: usize,
    pub source_cusp: Cusp,
    pub infinity_class: usize,
    pub decomposition: IndexDecomposition,
    pub per_prime: Vec<PerPrimeTarget>,
    pub phase: PhaseQZ,
}

impl TransferCertificate {
    /// True when the certificate asserts A(a, eM) = 0.
    pub fn vanishes(&self) -> bool {
        !self.decomposition.negative_factors.is_empty() || self.per_prime.iter().any(|t| t.index.is_none())
    }

    /// The coefficient factors (class, index) in display order, without phase.
    pub fn factors(&self) -> Vec<(usize, i64)> {
        let d = &self.decomposition;
        let mut out = vec![(self.infinity_class, d.epsilon)];
        out.extend(d.m0_factors.iter().map(|&(p, k)| (self.infinity_class, ipow(p, k))));
        out.extend(self.per_prime.iter().map(|t| (t.class_id, t.index.unwrap_or(0))));
        out
    }

    /// Evaluates the right-hand side against a coefficient view. `None` when a
    /// needed coefficient is missing.
    pub fn evaluate(&self, view: &CoefficientView) -> Option<num_complex::Complex64> {
        if self.vanishes() {
            return Some(num_complex::Complex64::new(0.0, 0.0));
        }
        self.factors()
            .into_iter()
            .try_fold(self.phase.to_complex(), |acc, (c, n)| view.get(c, n).map(|v| acc * v))
    }
}

impl fmt::Display for TransferCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.decomposition;
        let sign = if d.epsilon < 0 { '-' } else { '+' };
        write!(f, "A({}, {}{}) = ", self.source_cusp, sign, d.m_index)?;
        if self.vanishes() {
            return write!(f, "0");
        }
        write!(f, "phase({}) * A(inf,{}1)", self.phase, sign)?;
        for &(p, k) in &d.m0_factors {
            write!(f, " * A(inf,{})", ipow(p, k))?;
        }
        for t in &self.per_prime {
            write!(f, " * A({}, {})", t.cusp, t.index.expect("nonvanishing"))?;
        }
        Ok(())
    }
}

fn target_index(table: &CuspTable, class_id: usize, q: i64, k: i32) -> Option<i64> {
    let cls = table.class(class_id);
    let idx = Rational::from(cls.m) * Rational::prime_power(q as i128, k) - cls.mu;
    idx.as_integer().map(|n| n as i64)
}

fn infinity_class(table: &CuspTable) -> usize {
    table
        .classes
        .iter()
        .position(|c| c.per_prime_tags.iter().all(|t| t.1 == PerPrimeTag::Inf))
        .expect("the infinity class exists")
}

/// delta_i X for X = gamma_b T^j diag(e M_i, 1) gamma_a^{-1}, where delta_i
/// clears the denominators of M_i at the other primes.
fn membership_matrix(gamma_b: SL2Z, j: i64, scaled: Rational, delta: i64, gamma_a: SL2Z) -> Mat2Q {
    let x = Mat2Q::from(gamma_b * SL2Z::translation(j))
        * Mat2Q::diag(scaled, Rational::from(1))
        * Mat2Q::from(gamma_a.inverse());
    x.scale(Rational::from(delta))
}

fn in_iwahori(y: &Mat2Q, qe: i64) -> bool {
    y.is_integral() && y.c.as_integer().is_some_and(|c| c.rem_euclid(qe as i128) == 0)
}

struct PrimeData {
    q: i64,
    qe: i64,
    k: i32,
    delta: i64,
    scaled: Rational,
}

fn prime_data(d: &IndexDecomposition, q: i64, e: u32) -> PrimeData {
    let k = d.exponent(q);
    let delta = d
        .m_by_prime
        .iter()
        .filter(|t| t.0 != q)
        .map(|&(u, ku)| ipow(u, (-ku).max(0) as u32))
        .product();
    let scaled = Rational::from(d.epsilon) * d.scaled_index() / Rational::prime_power(q as i128, k);
    PrimeData { q, qe: ipow(q, e), k, delta, scaled }
}

/// All (class, j) with 0 <= j < m_b, Inf tags away from q, and delta times
/// gamma_b T^j diag(e M_q, 1) gamma_a^{-1} in the Iwahori pattern at q.
pub fn membership_candidates(table: &CuspTable, class_id: usize, d: &IndexDecomposition, q: i64) -> Vec<(usize, i64)> {
    let e = factorize(table.n).into_iter().find(|t| t.0 == q).expect("q divides N").1;
    let pd = prime_data(d, q, e);
    let gamma_a = table.class(class_id).gamma;
    let mut found = Vec::new();
    for cls in &table.classes {
        if cls.per_prime_tags.iter().any(|&(u, tag)| u != q && tag != PerPrimeTag::Inf) {
            continue;
        }
        for j in 0..cls.m {
            let y = membership_matrix(cls.gamma, j, pd.scaled, pd.delta, gamma_a);
            if in_iwahori(&y, pd.qe) {
                found.push((cls.id, j));
            }
        }
    }
    found
}

fn component_phase(table: &CuspTable, q: i64, x: i64) -> PhaseQZ {
    table
        .chi
        .component(q)
        .expect("component for every prime")
        .value(x)
        .unwrap_or_else(|| panic!("{x} is not a unit at {q}"))
}

fn per_prime_phase(table: &CuspTable, pd: &PrimeData, gamma_b: SL2Z, j: i64, y: &Mat2Q) -> PhaseQZ {
    let d_i = (gamma_b * SL2Z::translation(j)).d;
    let away = table
        .chi
        .components()
        .iter()
        .filter(|c| c.q != pd.q)
        .fold(PhaseQZ::zero(), |acc, c| acc - component_phase(table, c.q, d_i));
    let delta_inv = mod_inv(pd.delta, pd.qe).expect("delta is prime to q");
    let dq = y.d.as_integer().expect("integral") as i64;
    let local = component_phase(table, pd.q, (delta_inv as i128 * dq.rem_euclid(pd.qe) as i128 % pd.qe as i128) as i64);
    let shift = PhaseQZ::new(Rational::prime_power(pd.q as i128, pd.k) * Rational::from(j));
    away - local + shift
}

/// The certificate for A(a, eM) at arbitrary level, with each target found by
/// scanning the membership condition.
pub fn transfer_general(table: &CuspTable, class_id: usize, epsilon: i64, m_index: i64) -> Result<TransferCertificate, TransferError> {
    let d = decompose_index(table, class_id, epsilon, m_index)?;
    let gamma_a = table.class(class_id).gamma;
    let mut per_prime = Vec::new();
    let mut phase = PhaseQZ::zero();
    for (q, e) in factorize(table.n) {
        let pd = prime_data(&d, q, e);
        let found = membership_candidates(table, class_id, &d, q);
        let [(b, j)] = found[..] else {
            return Err(TransferError::NotUnique { q, found: found.len() });
        };
        let cls_b = table.class(b);
        let y = membership_matrix(cls_b.gamma, j, pd.scaled, pd.delta, gamma_a);
        phase = phase + per_prime_phase(table, &pd, cls_b.gamma, j, &y);
        per_prime.push(PerPrimeTarget { q, class_id: b, cusp: cls_b.cusp(), j, index: target_index(table, b, q, pd.k) });
    }
    Ok(TransferCertificate {
        source_class: class_id,
        source_cusp: table.class(class_id).cusp(),
        infinity_class: infinity_class(table),
        decomposition: d,
        per_prime,
        phase,
    })
}

/// The target cusp parameter c' and shift j for the class 1/(c q^l) at level
/// q^e, from the closed-form congruences. `signed_m0` is e M0.
pub fn prime_power_target(q: i64, e: u32, l: u32, c: i64, signed_m0: i64) -> (i64, i64) {
    let ql = ipow(q, l);
    let modulus = ipow(q, l.min(e - l));
    let c_prime = (c * mod_inv(signed_m0.rem_euclid(modulus), modulus).expect("M0 is prime to q")).rem_euclid(modulus);
    if 2 * l > e {
        return (c_prime, 0);
    }
    let w = ipow(q, e - 2 * l);
    let num = c_prime as i128 * signed_m0 as i128 - c as i128;
    assert_eq!(num.rem_euclid(ql as i128), 0, "c' e M0 = c mod q^l");
    let rhs = (num / ql as i128).rem_euclid(w as i128) as i64;
    let j = if w == 1 { 0 } else { (rhs * mod_inv((c * c_prime).rem_euclid(w), w).unwrap()).rem_euclid(w) };
    (c_prime, j)
}

/// The exact membership oracle for prime-power level:
/// (1,0;c'q^l,1)(1,j;0,1)(eM0,0;0,1)(1,0;-cq^l,1) is integral with lower
/// left divisible by q^e.
pub fn prime_power_oracle(q: i64, e: u32, l: u32, c: i64, c_prime: i64, j: i64, signed_m0: i64) -> bool {
    let ql = ipow(q, l);
    let y = Mat2Q::from_ints(1, 0, c_prime * ql, 1)
        * Mat2Q::from_ints(1, j, 0, 1)
        * Mat2Q::from_ints(signed_m0, 0, 0, 1)
        * Mat2Q::from_ints(1, 0, -c * ql, 1);
    in_iwahori(&y, ipow(q, e))
}

/// The certificate at level q^e from the closed-form case analysis.
pub fn transfer_prime_power(table: &CuspTable, class_id: usize, epsilon: i64, m_index: i64) -> Result<TransferCertificate, TransferError> {
    let primes = factorize(table.n);
    let [(q, e)] = primes[..] else {
        return Err(TransferError::NotPrimePower(table.n));
    };
    let d = decompose_index(table, class_id, epsilon, m_index)?;
    let k = d.exponent(q);
    let signed_m0 = d.epsilon * d.m0;
    let tag = table.class(class_id).tag(q).expect("tag at q");
    let (target_tag, j, phase) = match tag {
        PerPrimeTag::Inf => (PerPrimeTag::Inf, 0, PhaseQZ::zero()),
        PerPrimeTag::Zero => (PerPrimeTag::Zero, 0, table.chi.phase(signed_m0).inv()),
        PerPrimeTag::C { c1, l } => {
            let (c_prime, j) = prime_power_target(q, e, l, c1, signed_m0);
            assert!(
                prime_power_oracle(q, e, l, c1, c_prime, j, signed_m0),
                "membership oracle failed for 1/({c1}*{q}^{l}) at {q}^{e}"
            );
            let d_q = j * c_prime * ipow(q, l) + 1;
            let shift = PhaseQZ::new(Rational::prime_power(q as i128, k) * Rational::from(j));
            (PerPrimeTag::C { c1: c_prime, l }, j, shift - table.chi.phase(d_q))
        }
    };
    let b = table.class_with_tags(&[(q, target_tag)]).expect("target class exists");
    Ok(TransferCertificate {
        source_class: class_id,
        source_cusp: table.class(class_id).cusp(),
        infinity_class: infinity_class(table),
        per_prime: vec![PerPrimeTarget { q, class_id: b, cusp: table.class(b).cusp(), j, index: target_index(table, b, q, k) }],
        decomposition: d,
        phase,
    })
}
