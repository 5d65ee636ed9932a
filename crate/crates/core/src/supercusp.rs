//! Finite-data test of the supercuspidality criterion: at every cusp with
//! mu = 0 the coefficients A(a, m_a p^m) must vanish for all large m.

use std::fmt;

use rayon::prelude::*;

use crate::cusps::{Cusp, CuspTable};
use crate::dirichlet::DirichletCharacter;
use crate::exactnum::is_prime;
use crate::transfer::CoefficientView;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    ConsistentWithSupercuspidal,
    NotSupercuspidal,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ConsistentWithSupercuspidal => "consistent-with-supercuspidal",
            Verdict::NotSupercuspidal => "not-supercuspidal",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exclusion {
    ChiPrimitive,
    PDoesNotDivideN,
    PSquaredDoesNotDivideN,
}

impl fmt::Display for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exclusion::ChiPrimitive => "chi primitive",
            Exclusion::PDoesNotDivideN => "p does not divide N",
            Exclusion::PSquaredDoesNotDivideN => "p^2 does not divide N",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precheck {
    Excluded(Exclusion),
    NoObstruction,
}

impl Precheck {
    pub fn is_excluded(&self) -> bool {
        matches!(self, Precheck::Excluded(_))
    }
}

/// A character primitive mod N with p | N, or any p not dividing N, rules
/// out a supercuspidal component at p.
pub fn primitive_precheck(chi: &DirichletCharacter, p: i64) -> Precheck {
    let n = chi.modulus();
    if n % p != 0 {
        Precheck::Excluded(Exclusion::PDoesNotDivideN)
    } else if chi.is_primitive() {
        Precheck::Excluded(Exclusion::ChiPrimitive)
    } else {
        Precheck::NoObstruction
    }
}

/// A supercuspidal component at p forces p^2 | N.
pub fn conductor_precheck(n: i64, p: i64) -> Precheck {
    if n % (p * p) != 0 {
        Precheck::Excluded(Exclusion::PSquaredDoesNotDivideN)
    } else {
        Precheck::NoObstruction
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CuspOutcome {
    /// A(a, m_a p^m) vanishes for every tested m >= M, and M is minimal.
    VanishesFrom(u32),
    /// Exponents m with a nonzero coefficient; the largest is the bound.
    NonzeroAt(Vec<u32>),
    /// Some A(a, m_a p^m) with m <= bound is missing from the view.
    MissingData(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CuspResult {
    pub class_id: usize,
    pub cusp: Cusp,
    pub outcome: CuspOutcome,
    pub verdict: Verdict,
}

impl CuspResult {
    pub fn vanishing_exponent(&self) -> Option<u32> {
        match self.outcome {
            CuspOutcome::VanishesFrom(m) => Some(m),
            _ => None,
        }
    }
}

impl fmt::Display for CuspResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cusp={} mu=0 verdict={} M=", self.cusp, self.verdict)?;
        match self.vanishing_exponent() {
            Some(m) => write!(f, "{m}"),
            None => f.write_str("n/a"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VanishingReport {
    pub p: i64,
    pub bound: u32,
    pub threshold: f64,
    pub exact: bool,
    pub results: Vec<CuspResult>,
    pub prechecks: Vec<Precheck>,
    pub verdict: Verdict,
}

impl VanishingReport {
    pub fn exclusions(&self) -> impl Iterator<Item = Exclusion> + '_ {
        self.prechecks.iter().filter_map(|c| match c {
            Precheck::Excluded(e) => Some(*e),
            Precheck::NoObstruction => None,
        })
    }
}

impl fmt::Display for VanishingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{r}")?;
        }
        for e in self.exclusions() {
            writeln!(f, "precheck=excluded reason={e}")?;
        }
        write!(f, "p={} bound={} verdict={}", self.p, self.bound, self.verdict)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SupercuspError {
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("threshold must be a nonnegative real, got {0}")]
    BadThreshold(String),
    #[error("index m_a p^{0} overflows")]
    Overflow(u32),
}

pub const DEFAULT_THRESHOLD: f64 = 1e-6;

fn classify(values: &[Option<f64>], zero_below: f64) -> CuspOutcome {
    let missing: Vec<u32> = values.iter().enumerate().filter(|(_, v)| v.is_none()).map(|(m, _)| m as u32).collect();
    if !missing.is_empty() {
        return CuspOutcome::MissingData(missing);
    }
    let nonzero: Vec<u32> =
        values.iter().enumerate().filter(|(_, v)| v.unwrap() > zero_below).map(|(m, _)| m as u32).collect();
    match nonzero.last() {
        Some(&top) if top as usize == values.len() - 1 => CuspOutcome::NonzeroAt(nonzero),
        Some(&top) => CuspOutcome::VanishesFrom(top + 1),
        None => CuspOutcome::VanishesFrom(0),
    }
}

/// Tests A(a, m_a p^m) = 0 for 0 <= m <= bound at each class with mu = 0.
///
/// Exact views compare against zero; numeric views treat |A| at most
/// `threshold` times the largest |A| stored at that cusp as zero. A class
/// stands for its whole Gamma0(N)-orbit of cusps.
pub fn vanishing_test(
    view: &CoefficientView,
    table: &CuspTable,
    p: i64,
    bound: u32,
    threshold: f64,
) -> Result<VanishingReport, SupercuspError> {
    if !is_prime(p) {
        return Err(SupercuspError::NotPrime(p));
    }
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(SupercuspError::BadThreshold(threshold.to_string()));
    }
    let prechecks = vec![primitive_precheck(&table.chi, p), conductor_precheck(table.n, p)];
    let excluded = prechecks.iter().any(Precheck::is_excluded);
    let classes: Vec<_> = table.classes.iter().filter(|c| c.mu.is_zero()).collect();
    let mut results = classes
        .par_iter()
        .map(|cls| {
            let values = (0..=bound)
                .map(|m| {
                    let idx = p.checked_pow(m).and_then(|pm| pm.checked_mul(cls.m)).ok_or(SupercuspError::Overflow(m))?;
                    Ok(view.get(cls.id, idx).map(|v| v.norm()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let zero_below = if view.exact {
                0.0
            } else {
                let scale = view.iter().filter(|((c, _), _)| *c == cls.id).map(|(_, v)| v.norm()).fold(0.0, f64::max);
                threshold * scale
            };
            let outcome = classify(&values, zero_below);
            let verdict = match outcome {
                CuspOutcome::NonzeroAt(_) => Verdict::NotSupercuspidal,
                CuspOutcome::MissingData(_) => Verdict::Inconclusive,
                CuspOutcome::VanishesFrom(_) if excluded => Verdict::Inconclusive,
                CuspOutcome::VanishesFrom(_) => Verdict::ConsistentWithSupercuspidal,
            };
            Ok(CuspResult { class_id: cls.id, cusp: cls.cusp(), outcome, verdict })
        })
        .collect::<Result<Vec<_>, SupercuspError>>()?;
    results.sort_by_key(|r| r.class_id);
    let verdict = if results.iter().any(|r| r.verdict == Verdict::NotSupercuspidal) {
        Verdict::NotSupercuspidal
    } else if results.iter().all(|r| r.verdict == Verdict::ConsistentWithSupercuspidal) && !excluded {
        Verdict::ConsistentWithSupercuspidal
    } else {
        Verdict::Inconclusive
    };
    Ok(VanishingReport { p, bound, threshold, exact: view.exact, results, prechecks, verdict })
}
