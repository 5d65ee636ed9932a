//! Cusp classes of Gamma0(N): canonical representatives, widths, cusp
//! parameters, reduction of arbitrary cusps and the action of units.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dirichlet::{CharComponent, DirichletCharacter};
use crate::exactnum::{
    complete_to_sl2, crt_solve, factorize, gcd, ipow, is_prime, lcm, mod_inv, PhaseQZ, Rational, UnitValue, SL2Z,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CuspError {
    #[error("{0} is not prime")]
    NotPrime(i64),
    #[error("character modulus {0} does not match level {1}")]
    ModulusMismatch(i64, i64),
    #[error("cusp parameters out of range: l={l}, c1={c1} for {q}^{e}")]
    OutOfRange { q: i64, e: u32, l: u32, c1: i64 },
    #[error("{0} is not a unit mod {1}")]
    NotUnit(i64, i64),
    #[error("cannot parse cusp '{0}'")]
    Parse(String),
}

/// A cusp of Q u {oo}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cusp {
    Infinity,
    /// a/b in lowest terms with b > 0.
    Fraction(i64, i64),
}

impl Cusp {
    pub fn fraction(a: i64, b: i64) -> Cusp {
        if b == 0 {
            return Cusp::Infinity;
        }
        let g = gcd(a, b) * b.signum();
        Cusp::Fraction(a / g, b / g)
    }

    /// The canonical matrix with first column (a, b): for b > 0 the lower
    /// right entry is the least nonnegative inverse of a mod b.
    pub fn matrix(&self) -> SL2Z {
        match *self {
            Cusp::Infinity => SL2Z::identity(),
            Cusp::Fraction(a, b) => {
                let t = mod_inv(a, b).expect("lowest terms");
                let s = (a as i128 * t as i128 - 1) / b as i128;
                SL2Z::new(a, s as i64, b, t).expect("determinant one")
            }
        }
    }
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cusp::Infinity => write!(f, "inf"),
            Cusp::Fraction(a, 1) => write!(f, "{a}"),
            Cusp::Fraction(a, b) => write!(f, "{a}/{b}"),
        }
    }
}

impl FromStr for Cusp {
    type Err = CuspError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || CuspError::Parse(s.to_string());
        if s == "inf" || s == "oo" || s == "infinity" {
            return Ok(Cusp::Infinity);
        }
        let (a, b) = match s.split_once('/') {
            Some((a, b)) => (a.parse::<i64>().map_err(|_| err())?, b.parse::<i64>().map_err(|_| err())?),
            None => (s.parse::<i64>().map_err(|_| err())?, 1),
        };
        if b == 0 || gcd(a, b) != 1 {
            return Err(err());
        }
        Ok(Cusp::fraction(a, b))
    }
}

/// Which prime-power representative a class matches at one prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerPrimeTag {
    Inf,
    Zero,
    /// The cusp 1/(c1 q^l).
    C { c1: i64, l: u32 },
}

/// A representative of Gamma0(q^e)\P^1(Q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimePowerRep {
    pub q: i64,
    pub e: u32,
    pub tag: PerPrimeTag,
    pub gamma: SL2Z,
    pub width: i64,
}

impl PrimePowerRep {
    /// Width of 1/(c1 q^l) at level q^e.
    pub fn c_width(q: i64, e: u32, l: u32) -> i64 {
        if 2 * l <= e {
            ipow(q, e - 2 * l)
        } else {
            1
        }
    }

    /// g = gamma T^width gamma^{-1}, the generator of the stabilizer.
    pub fn stabilizer(&self) -> SL2Z {
        self.gamma * SL2Z::translation(self.width) * self.gamma.inverse()
    }
}

/// The representatives of the cusps of Gamma0(q^e): oo, 0, then 1/(c1 q^l)
/// ordered by l and then c1.
pub fn enumerate_prime_power(q: i64, e: u32) -> Result<Vec<PrimePowerRep>, CuspError> {
    if !is_prime(q) {
        return Err(CuspError::NotPrime(q));
    }
    let n = ipow(q, e);
    let mut reps = vec![
        PrimePowerRep { q, e, tag: PerPrimeTag::Inf, gamma: SL2Z::identity(), width: 1 },
        PrimePowerRep { q, e, tag: PerPrimeTag::Zero, gamma: complete_to_sl2(1, 0).unwrap(), width: n },
    ];
    for l in 1..e {
        let bound = ipow(q, l).min(ipow(q, e - l));
        for c1 in (1..bound).filter(|c| c % q != 0) {
            reps.push(PrimePowerRep {
                q,
                e,
                tag: PerPrimeTag::C { c1, l },
                gamma: SL2Z::new(1, 0, c1 * ipow(q, l), 1).unwrap(),
                width: PrimePowerRep::c_width(q, e, l),
            });
        }
    }
    Ok(reps)
}

/// Cusp parameter of 1/(c1 q^l) at level q^e by the conductor rule: zero
/// when max(q^l, q^(e-l)) >= q^e0, otherwise r/D where c1 = r c0 mod D.
pub fn cusp_parameter_prime_power(q: i64, e: u32, l: u32, c1: i64, chi: &CharComponent) -> Result<Rational, CuspError> {
    let out_of_range = || CuspError::OutOfRange { q, e, l, c1 };
    if l == 0 || l >= e || c1 < 1 || c1 % q == 0 || c1 >= ipow(q, l).min(ipow(q, e - l)) {
        return Err(out_of_range());
    }
    let e0 = chi.conductor_exponent();
    let top = l.max(e - l);
    if top >= e0 {
        return Ok(Rational::zero());
    }
    let d = ipow(q, e0 - top);
    let stab = |c: i64| chi.value(1 + c * ipow(q, top)).expect("unit");
    let target = PhaseQZ::from_fraction(1, d as i128);
    let c0 = (1..).find(|&c| stab(c) == target).expect("primitive part is faithful on U_top");
    let r = (c1 * mod_inv(c0, d).expect("c0 is a unit mod D")).rem_euclid(d);
    Ok(Rational::new(r as i128, d as i128))
}

/// Cusp parameter read off from the stabilizer: chi~(g) = e(mu).
pub fn direct_cusp_parameter(gamma: &SL2Z, width: i64, chi: &DirichletCharacter) -> Rational {
    let g = *gamma * SL2Z::translation(width) * gamma.inverse();
    assert_eq!(g.c.rem_euclid(chi.modulus()), 0, "stabilizer outside Gamma0(N)");
    chi.phase(g.d).value()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspClass {
    pub id: usize,
    /// Bottom row mod N, entries in [0, N).
    pub bottom_row: (i64, i64),
    pub gamma: SL2Z,
    pub m: i64,
    pub mu: Rational,
    pub per_prime_tags: Vec<(i64, PerPrimeTag)>,
}

impl CuspClass {
    pub fn cusp(&self) -> Cusp {
        let (a, c) = self.gamma.cusp_image();
        Cusp::fraction(a, c)
    }

    pub fn tag(&self, q: i64) -> Option<PerPrimeTag> {
        self.per_prime_tags.iter().find(|t| t.0 == q).map(|t| t.1)
    }

    /// g = gamma T^m gamma^{-1}.
    pub fn stabilizer(&self) -> SL2Z {
        self.gamma * SL2Z::translation(self.m) * self.gamma.inverse()
    }
}

/// A row (x0, x1) = lambda (c, d + j c) mod N for the class bottom row (c, d).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowLocation {
    pub class_id: usize,
    pub lambda: i64,
    pub j: i64,
}

/// gamma_x = gamma0 gamma_a T^j with gamma0 in Gamma0(N).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspReduction {
    pub class_id: usize,
    pub gamma_x: SL2Z,
    pub gamma0: SL2Z,
    pub j: i64,
    pub chi_gamma0: UnitValue,
    pub m: i64,
    pub mu: Rational,
}

impl CuspReduction {
    /// The factor in A(gamma_x, n) = factor * A(gamma_a, n).
    pub fn coefficient_factor(&self, n: i64) -> UnitValue {
        let shift = (Rational::from(n) + self.mu) * Rational::new(self.j as i128, self.m as i128);
        self.chi_gamma0 * UnitValue::Phase(PhaseQZ::new(shift))
    }
}

#[derive(Clone, Debug)]
pub struct CuspTable {
    pub n: i64,
    pub chi: DirichletCharacter,
    pub classes: Vec<CuspClass>,
    units: Vec<i64>,
    lookup: HashMap<(i64, i64), usize>,
}

/// Lexicographically least element of the orbit of (c, d) under scalars and
/// right translation.
pub fn orbit_key(c: i64, d: i64, n: i64, units: &[i64]) -> (i64, i64) {
    units
        .iter()
        .map(|&u| {
            let c2 = (u * c).rem_euclid(n);
            let g = gcd(c2, n);
            (c2, (u * d).rem_euclid(g))
        })
        .min()
        .expect("units are nonempty")
}

fn unit_residues(n: i64) -> Vec<i64> {
    (0..n.max(1)).filter(|&u| gcd(u, n) == 1).collect()
}

fn tag_row(q: i64, tag: PerPrimeTag) -> (i64, i64) {
    match tag {
        PerPrimeTag::Inf => (0, 1),
        PerPrimeTag::Zero => (1, 0),
        PerPrimeTag::C { c1, l } => (c1 * ipow(q, l), 1),
    }
}

impl CuspTable {
    pub fn build(n: i64, chi: &DirichletCharacter) -> Result<CuspTable, CuspError> {
        build_cusp_table(n, chi)
    }

    pub fn class(&self, id: usize) -> &CuspClass {
        &self.classes[id]
    }

    pub fn units(&self) -> &[i64] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of_row(&self, x0: i64, x1: i64) -> usize {
        let key = orbit_key(x0, x1, self.n, &self.units);
        *self.lookup.get(&key).unwrap_or_else(|| panic!("row ({x0},{x1}) is not unimodular mod {}", self.n))
    }

    /// Writes a row unimodular mod N as lambda (c, d + j c) for its class.
    pub fn locate_row(&self, x0: i64, x1: i64) -> RowLocation {
        let n = self.n;
        let id = self.class_of_row(x0, x1);
        let cls = &self.classes[id];
        let (c, d) = cls.bottom_row;
        let g = gcd(c, n);
        let ng = n / g;
        for &lambda in &self.units {
            if (lambda * c - x0).rem_euclid(n) != 0 {
                continue;
            }
            let inv = mod_inv(lambda, n).unwrap();
            let rhs = (inv * x1.rem_euclid(n) % n - d).rem_euclid(n);
            if rhs % g != 0 {
                continue;
            }
            let j = if ng == 1 {
                0
            } else {
                (rhs / g * mod_inv(c / g, ng).expect("c/g is a unit mod N/g")).rem_euclid(ng)
            };
            if j < cls.m {
                return RowLocation { class_id: id, lambda, j };
            }
        }
        unreachable!("orbit lookup and location disagree for ({x0},{x1}) mod {n}")
    }

    /// Reduces a cusp to its class: gamma_x = gamma0 gamma_a T^j.
    pub fn reduce_cusp(&self, x: Cusp) -> CuspReduction {
        let gamma_x = x.matrix();
        let loc = self.locate_row(gamma_x.c, gamma_x.d);
        let cls = &self.classes[loc.class_id];
        let gamma0 = gamma_x * (cls.gamma * SL2Z::translation(loc.j)).inverse();
        assert_eq!(gamma0.c.rem_euclid(self.n), 0, "reduction left Gamma0(N)");
        let chi_gamma0 = self.chi.eval(gamma0.d);
        assert_eq!(chi_gamma0, self.chi.eval(loc.lambda), "lower-right entry differs from the scalar");
        CuspReduction { class_id: loc.class_id, gamma_x, gamma0, j: loc.j, chi_gamma0, m: cls.m, mu: cls.mu }
    }

    /// The class of [a c : d].
    pub fn unit_action(&self, a: i64, class_id: usize) -> Result<usize, CuspError> {
        if gcd(a, self.n) != 1 {
            return Err(CuspError::NotUnit(a, self.n));
        }
        let (c, d) = self.classes[class_id].bottom_row;
        Ok(self.class_of_row((a.rem_euclid(self.n) * c) % self.n.max(1), d))
    }

    /// Finds the class with the given per-prime tags.
    pub fn class_with_tags(&self, tags: &[(i64, PerPrimeTag)]) -> Option<usize> {
        self.classes.iter().position(|c| c.per_prime_tags == tags)
    }

    pub fn class_of_cusp(&self, x: Cusp) -> usize {
        self.reduce_cusp(x).class_id
    }
}

/// One class per double coset, composed prime by prime.
pub fn build_cusp_table(n: i64, chi: &DirichletCharacter) -> Result<CuspTable, CuspError> {
    if chi.modulus() != n {
        return Err(CuspError::ModulusMismatch(chi.modulus(), n));
    }
    let primes = factorize(n);
    let per_prime: Vec<Vec<PrimePowerRep>> = primes
        .iter()
        .map(|&(q, e)| enumerate_prime_power(q, e))
        .collect::<Result<_, _>>()?;
    let mut combos: Vec<Vec<&PrimePowerRep>> = vec![vec![]];
    for reps in &per_prime {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                reps.iter().map(move |r| {
                    let mut v = prefix.clone();
                    v.push(r);
                    v
                })
            })
            .collect();
    }
    let units = unit_residues(n);
    let mut classes = Vec::with_capacity(combos.len());
    let mut lookup = HashMap::new();
    for (id, combo) in combos.into_iter().enumerate() {
        let rows: Vec<((i64, i64), i64)> = combo.iter().map(|r| (tag_row(r.q, r.tag), ipow(r.q, r.e))).collect();
        let c = crt_solve(&rows.iter().map(|&((c, _), m)| (c, m)).collect::<Vec<_>>()).unwrap();
        let d0 = crt_solve(&rows.iter().map(|&((_, d), m)| (d, m)).collect::<Vec<_>>()).unwrap();
        let d = (0..).map(|k| d0 + k * n).find(|&d| gcd(c, d) == 1).unwrap();
        let gamma = complete_to_sl2(c, d).expect("coprime by construction");
        let m = combo.iter().fold(1, |acc, r| lcm(acc, r.width));
        let mu = combo
            .iter()
            .map(|r| {
                let comp = chi.component(r.q).expect("component for every prime");
                let mu_q = match r.tag {
                    PerPrimeTag::C { c1, l } => cusp_parameter_prime_power(r.q, r.e, l, c1, comp)?,
                    _ => Rational::zero(),
                };
                Ok(Rational::from(m / r.width) * mu_q)
            })
            .try_fold(Rational::zero(), |acc: Rational, x: Result<Rational, CuspError>| x.map(|x| acc + x))?
            .frac();
        let tags = combo.iter().map(|r| (r.q, r.tag)).collect();
        lookup.insert(orbit_key(c, d, n, &units), id);
        classes.push(CuspClass { id, bottom_row: (c.rem_euclid(n.max(1)), d.rem_euclid(n.max(1))), gamma, m, mu, per_prime_tags: tags });
    }
    Ok(CuspTable { n, chi: chi.clone(), classes, units, lookup })
}
