//! Dirichlet characters stored as full value tables on prime-power
//! components.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::exactnum::{factorize, gcd, ipow, PhaseQZ, Rational, UnitValue, SL2Z};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharError {
    #[error("malformed character spec: {0}")]
    Malformed(String),
    #[error("generator {0} is not a unit mod {1}")]
    NotUnit(i64, i64),
    #[error("value order of {0} does not divide the order of generator {1}")]
    OrderMismatch(String, i64),
    #[error("generators do not generate the units mod {0}")]
    NotGenerating(i64),
    #[error("generator values are not consistent with a homomorphism mod {0}")]
    Inconsistent(i64),
    #[error("character modulus {0} does not match level {1}")]
    ModulusMismatch(i64, i64),
    #[error("for modulus {0} the generators must be exactly {1} and 5")]
    TwoAdicGenerators(i64, i64),
    #[error("{0} is not a unit at the place")]
    NotUnitAtPlace(i64),
    #[error("not in Gamma0(N)")]
    NotInGamma0,
}

/// The restriction of a character to (Z/q^e)^x.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharComponent {
    pub q: i64,
    pub e: u32,
    /// Indexed by residue mod q^e; `None` on non-units.
    values: Vec<Option<PhaseQZ>>,
}

impl CharComponent {
    pub fn modulus(&self) -> i64 {
        ipow(self.q, self.e)
    }

    pub fn trivial(q: i64, e: u32) -> Self {
        let m = ipow(q, e);
        let values = (0..m).map(|u| (u % q != 0).then(PhaseQZ::zero)).collect();
        CharComponent { q, e, values }
    }

    /// Builds the table generated by `gens` (residue, value) mod q^e.
    pub fn from_generators(q: i64, e: u32, gens: &[(i64, Rational)]) -> Result<Self, CharError> {
        let m = ipow(q, e);
        let mut values: Vec<Option<PhaseQZ>> = vec![None; m as usize];
        for &(g, r) in gens {
            let g = g.rem_euclid(m);
            if g % q == 0 {
                return Err(CharError::NotUnit(g, m));
            }
            let ord = multiplicative_order(g, m);
            if !(r * Rational::from(ord)).is_integer() {
                return Err(CharError::OrderMismatch(r.to_string(), g));
            }
        }
        values[1 % m as usize] = Some(PhaseQZ::zero());
        let mut frontier = vec![1 % m];
        while let Some(x) = frontier.pop() {
            let vx = values[x as usize].unwrap();
            for &(g, r) in gens {
                let y = (x * g.rem_euclid(m)) % m;
                let vy = vx + PhaseQZ::new(r);
                match values[y as usize] {
                    Some(old) if old != vy => return Err(CharError::Inconsistent(m)),
                    Some(_) => {}
                    None => {
                        values[y as usize] = Some(vy);
                        frontier.push(y);
                    }
                }
            }
        }
        let units = (0..m).filter(|u| u % q != 0).count();
        if values.iter().filter(|v| v.is_some()).count() != units {
            return Err(CharError::NotGenerating(m));
        }
        Ok(CharComponent { q, e, values })
    }

    /// Value at an integer, `None` off the units.
    pub fn value(&self, u: i64) -> Option<PhaseQZ> {
        self.values[u.rem_euclid(self.modulus()) as usize]
    }

    pub fn eval(&self, u: i64) -> UnitValue {
        self.value(u).map_or(UnitValue::Zero, UnitValue::Phase)
    }

    /// Least e0 such that the component is trivial on units = 1 mod q^e0.
    pub fn conductor_exponent(&self) -> u32 {
        let m = self.modulus();
        (0..=self.e)
            .find(|&e0| {
                let step = ipow(self.q, e0);
                (0..m / step).all(|t| {
                    let u = 1 + t * step;
                    u % self.q == 0 || self.value(u).is_some_and(|v| v.is_zero())
                })
            })
            .unwrap_or(self.e)
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().flatten().all(PhaseQZ::is_zero)
    }

    /// Standard generators of (Z/q^e)^x with their orders.
    pub fn standard_generators(q: i64, e: u32) -> Vec<(i64, i64)> {
        let m = ipow(q, e);
        if q == 2 {
            match e {
                1 => vec![],
                2 => vec![(3, 2)],
                _ => vec![(m - 1, 2), (5, m / 4)],
            }
        } else {
            let g = (2..m).find(|&g| g % q != 0 && multiplicative_order(g, m) == m / q * (q - 1));
            vec![(g.expect("odd prime powers have primitive roots"), m / q * (q - 1))]
        }
    }

    /// Every character mod q^e.
    pub fn all(q: i64, e: u32) -> Vec<CharComponent> {
        let gens = Self::standard_generators(q, e);
        let mut out = vec![Vec::<(i64, Rational)>::new()];
        for &(g, ord) in &gens {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..ord).map(move |k| {
                        let mut v = prefix.clone();
                        v.push((g, Rational::new(k as i128, ord as i128)));
                        v
                    })
                })
                .collect();
        }
        out.into_iter()
            .map(|g| Self::from_generators(q, e, &g).expect("standard generators"))
            .collect()
    }

    /// Restriction to q^e0 for e0 at least the conductor exponent.
    pub fn reduce_to(&self, e0: u32) -> CharComponent {
        assert!(e0 >= self.conductor_exponent() && e0 <= self.e);
        let m0 = ipow(self.q, e0);
        let values = (0..m0)
            .map(|u| {
                if u % self.q == 0 && m0 > 1 {
                    return None;
                }
                // Any unit lift works because the values factor through q^e0.
                let lift = (0..)
                    .map(|t| u + t * m0)
                    .find(|x| x % self.q != 0)
                    .unwrap();
                self.value(lift)
            })
            .collect();
        CharComponent { q: self.q, e: e0, values }
    }
}

/// Order of g in (Z/m)^x.
pub fn multiplicative_order(g: i64, m: i64) -> i64 {
    if m == 1 {
        return 1;
    }
    let mut x = g.rem_euclid(m);
    let mut k = 1;
    while x != 1 {
        x = x * g.rem_euclid(m) % m;
        k += 1;
        assert!(k <= m, "{g} is not a unit mod {m}");
    }
    k
}

/// A Dirichlet character mod N.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletCharacter {
    modulus: i64,
    components: Vec<CharComponent>,
    conductor: i64,
}

/// chi = chi0 * (trivial mod N) with chi0 primitive mod its conductor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimitiveDecomposition {
    pub primitive_part: DirichletCharacter,
    pub trivial_part_modulus: i64,
}

impl DirichletCharacter {
    pub fn from_components(modulus: i64, mut components: Vec<CharComponent>) -> Self {
        components.sort_by_key(|c| c.q);
        let conductor = components
            .iter()
            .map(|c| ipow(c.q, c.conductor_exponent()))
            .product();
        debug_assert_eq!(components.iter().map(CharComponent::modulus).product::<i64>(), modulus);
        DirichletCharacter { modulus, components, conductor }
    }

    pub fn trivial(n: i64) -> Self {
        let comps = factorize(n).into_iter().map(|(q, e)| CharComponent::trivial(q, e)).collect();
        Self::from_components(n, comps)
    }

    /// Every character mod N, in a fixed order.
    pub fn all(n: i64) -> Vec<DirichletCharacter> {
        let mut out = vec![Vec::<CharComponent>::new()];
        for (q, e) in factorize(n) {
            let comps = CharComponent::all(q, e);
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    comps.iter().map(move |c| {
                        let mut v = prefix.clone();
                        v.push(c.clone());
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(|c| Self::from_components(n, c)).collect()
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn components(&self) -> &[CharComponent] {
        &self.components
    }

    pub fn component(&self, q: i64) -> Option<&CharComponent> {
        self.components.iter().find(|c| c.q == q)
    }

    pub fn conductor(&self) -> i64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    pub fn is_trivial(&self) -> bool {
        self.components.iter().all(CharComponent::is_trivial)
    }

    pub fn eval(&self, d: i64) -> UnitValue {
        if gcd(d, self.modulus) != 1 {
            return UnitValue::Zero;
        }
        self.components
            .iter()
            .fold(UnitValue::one(), |acc, c| acc * c.eval(d))
    }

    /// The phase at a unit; panics off the units.
    pub fn phase(&self, d: i64) -> PhaseQZ {
        self.eval(d).phase().unwrap_or_else(|| panic!("{d} is not a unit mod {}", self.modulus))
    }

    pub fn primitive_decomposition(&self) -> PrimitiveDecomposition {
        let comps = self
            .components
            .iter()
            .filter_map(|c| {
                let e0 = c.conductor_exponent();
                (e0 > 0).then(|| c.reduce_to(e0))
            })
            .collect();
        PrimitiveDecomposition {
            primitive_part: Self::from_components(self.conductor, comps),
            trivial_part_modulus: self.modulus,
        }
    }

    /// Serializes in the character grammar.
    pub fn to_spec(&self) -> String {
        if self.is_trivial() {
            return "trivial".to_string();
        }
        let lists: Vec<String> = self
            .components
            .iter()
            .map(|c| {
                let gens = CharComponent::standard_generators(c.q, c.e);
                let items: Vec<String> = if gens.is_empty() {
                    vec!["1:0".to_string()]
                } else {
                    gens.iter().map(|&(g, _)| format!("{g}:{}", c.value(g).unwrap())).collect()
                };
                items.join(",")
            })
            .collect();
        format!("mod={};gen={}", self.modulus, lists.join(";comp=gen="))
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_spec())
    }
}

fn parse_fraction(s: &str) -> Result<Rational, CharError> {
    let bad = || CharError::Malformed(format!("bad value '{s}'"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<i128>().map_err(|_| bad())?, d.trim().parse::<i128>().map_err(|_| bad())?),
        None => (s.trim().parse::<i128>().map_err(|_| bad())?, 1),
    };
    if d <= 0 {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

fn parse_gen_list(s: &str) -> Result<Vec<(i64, Rational)>, CharError> {
    s.split(',')
        .map(|item| {
            let (u, r) = item
                .split_once(':')
                .ok_or_else(|| CharError::Malformed(format!("generator '{item}' lacks ':'")))?;
            let u = u
                .trim()
                .parse::<i64>()
                .map_err(|_| CharError::Malformed(format!("bad generator '{u}'")))?;
            Ok((u, parse_fraction(r)?))
        })
        .collect()
}

/// Parses `trivial` or `mod=<N>;gen=<u>:<r>,...[;comp=gen=<u>:<r>,...]`,
/// one generator list per prime power of N in increasing prime order.
pub fn char_parse(spec: &str, n: i64) -> Result<DirichletCharacter, CharError> {
    let spec = spec.trim();
    if spec == "trivial" {
        return Ok(DirichletCharacter::trivial(n));
    }
    let rest = spec
        .strip_prefix("mod=")
        .ok_or_else(|| CharError::Malformed("expected 'trivial' or 'mod='".into()))?;
    let (modulus, rest) = rest
        .split_once(';')
        .ok_or_else(|| CharError::Malformed("missing ';gen='".into()))?;
    let modulus: i64 = modulus
        .trim()
        .parse()
        .map_err(|_| CharError::Malformed(format!("bad modulus '{modulus}'")))?;
    if modulus != n {
        return Err(CharError::ModulusMismatch(modulus, n));
    }
    let lists: Vec<&str> = rest.split(";comp=").collect();
    let primes = factorize(n);
    if lists.len() != primes.len() {
        return Err(CharError::Malformed(format!(
            "expected {} generator lists, found {}",
            primes.len(),
            lists.len()
        )));
    }
    let comps = primes
        .iter()
        .zip(&lists)
        .map(|(&(q, e), list)| {
            let list = list
                .strip_prefix("gen=")
                .ok_or_else(|| CharError::Malformed(format!("expected 'gen=' in '{list}'")))?;
            let gens = parse_gen_list(list)?;
            let m = ipow(q, e);
            if q == 2 && e >= 3 {
                let mut us: Vec<i64> = gens.iter().map(|g| g.0.rem_euclid(m)).collect();
                us.sort();
                if us != vec![5, m - 1] {
                    return Err(CharError::TwoAdicGenerators(m, m - 1));
                }
            }
            CharComponent::from_generators(q, e, &gens)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DirichletCharacter::from_components(n, comps))
}

/// Local component of the idelic lift at the place v, applied to an element
/// v^k * (unit with residue j): chi(v)^k away from q, chi(j)^{-1} at q.
pub fn idelic_component(comp: &CharComponent, place: i64, valuation: i64, unit_residue: i64) -> Result<UnitValue, CharError> {
    if place != comp.q {
        let base = comp.value(place).ok_or(CharError::NotUnit(place, comp.modulus()))?;
        Ok(UnitValue::Phase(base.pow(valuation)))
    } else {
        let v = comp.value(unit_residue).ok_or(CharError::NotUnitAtPlace(unit_residue))?;
        Ok(UnitValue::Phase(v.inv()))
    }
}

/// The character of Gamma0(N) given by the lower-right entry.
pub fn chi_tilde(chi: &DirichletCharacter, g: &SL2Z) -> Result<UnitValue, CharError> {
    if g.c.rem_euclid(chi.modulus()) != 0 {
        return Err(CharError::NotInGamma0);
    }
    Ok(chi.eval(g.d))
}

/// Orders characters by their full value tables (for deterministic maps).
pub fn value_signature(chi: &DirichletCharacter) -> BTreeMap<i64, PhaseQZ> {
    (0..chi.modulus())
        .filter_map(|u| chi.eval(u).phase().map(|p| (u, p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi9() -> DirichletCharacter {
        char_parse("mod=9;gen=2:1/6", 9).unwrap()
    }

    #[test]
    fn parse_examples() {
        let chi = chi9();
        assert_eq!(chi.phase(4), PhaseQZ::from_fraction(1, 3));
        assert_eq!(chi.phase(7), PhaseQZ::from_fraction(2, 3));
        assert_eq!(chi.conductor(), 9);
        let chi8 = char_parse("mod=8;gen=7:1/2,5:0", 8).unwrap();
        assert_eq!(chi8.conductor(), 4);
        assert_eq!(DirichletCharacter::trivial(27).conductor(), 1);
        assert_eq!(DirichletCharacter::trivial(11).eval(5), UnitValue::one());
        assert!(chi.eval(9).is_zero());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(char_parse("mod=9;gen=3:1/6", 9), Err(CharError::NotUnit(..))));
        assert!(matches!(char_parse("mod=9;gen=2:1/4", 9), Err(CharError::OrderMismatch(..))));
        assert!(matches!(char_parse("mod=9;gen=4:1/3", 9), Err(CharError::NotGenerating(_))));
        assert!(matches!(char_parse("mod=8;gen=3:1/2,5:0", 8), Err(CharError::TwoAdicGenerators(..))));
        assert!(matches!(char_parse("nonsense", 9), Err(CharError::Malformed(_))));
        assert!(matches!(char_parse("mod=10;gen=2:1/6", 9), Err(CharError::ModulusMismatch(..))));
        let c = char_parse("mod=20;gen=3:1/2;comp=gen=2:1/4", 20).unwrap();
        assert_eq!(c.phase(3), PhaseQZ::from_fraction(1, 2) + c.components()[1].value(3).unwrap());
        assert_eq!(char_parse(&c.to_spec(), 20).unwrap(), c);
    }

    #[test]
    fn idelic_examples() {
        let comp = chi9().components()[0].clone();
        assert_eq!(idelic_component(&comp, 3, 0, 1).unwrap(), UnitValue::one());
        assert_eq!(idelic_component(&comp, 3, 2, 2).unwrap(), UnitValue::Phase(PhaseQZ::from_fraction(5, 6)));
        assert_eq!(idelic_component(&comp, 2, 3, 1).unwrap(), UnitValue::Phase(PhaseQZ::from_fraction(1, 2)));
        assert!(idelic_component(&comp, 3, 1, 3).is_err());
    }

    #[test]
    fn chi_tilde_examples() {
        let g = SL2Z::new(-2, -1, 9, 4).unwrap();
        assert_eq!(chi_tilde(&chi9(), &g).unwrap(), UnitValue::Phase(PhaseQZ::from_fraction(1, 3)));
        assert_eq!(chi_tilde(&chi9(), &SL2Z::new(1, 0, 9, 1).unwrap()).unwrap(), UnitValue::one());
        assert_eq!(chi_tilde(&chi9(), &SL2Z::new(1, 0, 3, 1).unwrap()), Err(CharError::NotInGamma0));
    }

    #[test]
    fn counts_and_decomposition() {
        assert_eq!(DirichletCharacter::all(36).len(), 12);
        assert_eq!(DirichletCharacter::all(16).len(), 8);
        let chi8 = char_parse("mod=8;gen=7:1/2,5:0", 8).unwrap();
        let dec = chi8.primitive_decomposition();
        assert_eq!(dec.primitive_part.modulus(), 4);
        assert!(dec.primitive_part.is_primitive());
        for u in (1..8).step_by(2) {
            assert_eq!(dec.primitive_part.eval(u), chi8.eval(u));
        }
    }
}
