//! Exact arithmetic: rationals, phases in Q/Z, SL2(Z) and GL2(Q)+ matrices,
//! CRT and small integer helpers.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("inconsistent congruences")]
    InconsistentCongruences,
    #[error("not unimodular row")]
    NotUnimodularRow,
    #[error("determinant must be {0}")]
    BadDeterminant(&'static str),
    #[error("modulus must be positive")]
    NonPositiveModulus,
}

/// A rational number in lowest terms with positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i128>);

impl Rational {
    pub fn new(num: i128, den: i128) -> Self {
        Rational(Ratio::new(num, den))
    }

    pub fn int(n: i128) -> Self {
        Rational(Ratio::from_integer(n))
    }

    pub fn zero() -> Self {
        Rational::int(0)
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn floor(&self) -> i128 {
        Integer::div_floor(&self.numer(), &self.denom())
    }

    /// Fractional part in [0, 1).
    pub fn frac(&self) -> Rational {
        *self - Rational::int(self.floor())
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    pub fn signum(&self) -> i128 {
        self.numer().signum()
    }

    pub fn recip(&self) -> Rational {
        Rational(self.0.recip())
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// The integer value, if this is an integer.
    pub fn as_integer(&self) -> Option<i128> {
        self.is_integer().then(|| self.numer())
    }

    /// p-adic valuation; panics on zero.
    pub fn valuation(&self, p: i128) -> i32 {
        assert!(!self.is_zero(), "valuation of zero");
        let (mut n, mut d) = (self.numer(), self.denom());
        let mut v = 0;
        while n % p == 0 {
            n /= p;
            v += 1;
        }
        while d % p == 0 {
            d /= p;
            v -= 1;
        }
        v
    }

    /// p^k as a rational, k of either sign.
    pub fn prime_power(p: i128, k: i32) -> Rational {
        let mag = p.pow(k.unsigned_abs());
        if k >= 0 {
            Rational::int(mag)
        } else {
            Rational::new(1, mag)
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::int(n as i128)
    }
}

macro_rules! rational_binop {
    ($tr:ident, $f:ident) => {
        impl $tr for Rational {
            type Output = Rational;
            fn $f(self, rhs: Rational) -> Rational {
                Rational(self.0.$f(rhs.0))
            }
        }
    };
}
rational_binop!(Add, add);
rational_binop!(Sub, sub);
rational_binop!(Mul, mul);
rational_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

/// A root of unity e^{2 pi i r}, stored as r mod 1 in [0, 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhaseQZ(Rational);

impl PhaseQZ {
    pub fn zero() -> Self {
        PhaseQZ(Rational::zero())
    }

    pub fn new(r: Rational) -> Self {
        phase_of_rational(r)
    }

    pub fn from_fraction(num: i128, den: i128) -> Self {
        phase_of_rational(Rational::new(num, den))
    }

    pub fn value(&self) -> Rational {
        self.0
    }

    pub fn inv(&self) -> PhaseQZ {
        PhaseQZ::new(-self.0)
    }

    pub fn pow(&self, k: i64) -> PhaseQZ {
        PhaseQZ::new(self.0 * Rational::from(k))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Order of the root of unity.
    pub fn order(&self) -> i128 {
        self.0.denom()
    }

    pub fn to_complex(&self) -> num_complex::Complex64 {
        num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU * self.0.to_f64())
    }
}

impl Add for PhaseQZ {
    type Output = PhaseQZ;
    fn add(self, rhs: PhaseQZ) -> PhaseQZ {
        PhaseQZ::new(self.0 + rhs.0)
    }
}

impl Sub for PhaseQZ {
    type Output = PhaseQZ;
    fn sub(self, rhs: PhaseQZ) -> PhaseQZ {
        PhaseQZ::new(self.0 - rhs.0)
    }
}

impl Neg for PhaseQZ {
    type Output = PhaseQZ;
    fn neg(self) -> PhaseQZ {
        self.inv()
    }
}

impl fmt::Display for PhaseQZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Reduce x modulo 1 into [0, 1).
pub fn phase_of_rational(x: Rational) -> PhaseQZ {
    PhaseQZ(x.frac())
}

/// A character value: zero off the units, otherwise a root of unity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitValue {
    Zero,
    Phase(PhaseQZ),
}

impl UnitValue {
    pub fn one() -> Self {
        UnitValue::Phase(PhaseQZ::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, UnitValue::Zero)
    }

    pub fn phase(&self) -> Option<PhaseQZ> {
        match self {
            UnitValue::Zero => None,
            UnitValue::Phase(p) => Some(*p),
        }
    }

    pub fn inv(&self) -> Option<UnitValue> {
        self.phase().map(|p| UnitValue::Phase(p.inv()))
    }

    pub fn to_complex(&self) -> num_complex::Complex64 {
        match self {
            UnitValue::Zero => num_complex::Complex64::new(0.0, 0.0),
            UnitValue::Phase(p) => p.to_complex(),
        }
    }
}

impl Mul for UnitValue {
    type Output = UnitValue;
    fn mul(self, rhs: UnitValue) -> UnitValue {
        match (self, rhs) {
            (UnitValue::Phase(a), UnitValue::Phase(b)) => UnitValue::Phase(a + b),
            _ => UnitValue::Zero,
        }
    }
}

impl fmt::Display for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitValue::Zero => write!(f, "0"),
            UnitValue::Phase(p) => write!(f, "phase({p})"),
        }
    }
}

/// An integer 2x2 matrix of determinant 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SL2Z {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl SL2Z {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self, ExactError> {
        if a as i128 * d as i128 - b as i128 * c as i128 != 1 {
            return Err(ExactError::BadDeterminant("1"));
        }
        Ok(SL2Z { a, b, c, d })
    }

    pub fn identity() -> Self {
        SL2Z { a: 1, b: 0, c: 0, d: 1 }
    }

    /// The translation (1, j; 0, 1).
    pub fn translation(j: i64) -> Self {
        SL2Z { a: 1, b: j, c: 0, d: 1 }
    }

    pub fn inverse(&self) -> Self {
        SL2Z { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn bottom_row(&self) -> (i64, i64) {
        (self.c, self.d)
    }

    pub fn to_gl2(&self) -> GL2QPlus {
        GL2QPlus::from_ints(self.a, self.b, self.c, self.d)
    }

    /// Image of the cusp infinity, as (numerator, denominator) with the
    /// denominator nonnegative; (1, 0) stands for infinity.
    pub fn cusp_image(&self) -> (i64, i64) {
        let (mut x, mut y) = (self.a, self.c);
        if y < 0 || (y == 0 && x < 0) {
            x = -x;
            y = -y;
        }
        (x, y)
    }
}

impl Mul for SL2Z {
    type Output = SL2Z;
    fn mul(self, r: SL2Z) -> SL2Z {
        let m = |x: i64, y: i64, z: i64, w: i64| -> i64 {
            i64::try_from(x as i128 * y as i128 + z as i128 * w as i128)
                .expect("SL2Z product overflow")
        };
        SL2Z {
            a: m(self.a, r.a, self.b, r.c),
            b: m(self.a, r.b, self.b, r.d),
            c: m(self.c, r.a, self.d, r.c),
            d: m(self.c, r.b, self.d, r.d),
        }
    }
}

impl fmt::Display for SL2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.a, self.b, self.c, self.d)
    }
}

/// A rational 2x2 matrix of positive determinant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GL2QPlus {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl GL2QPlus {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Result<Self, ExactError> {
        let m = GL2QPlus { a, b, c, d };
        if m.det().signum() <= 0 {
            return Err(ExactError::BadDeterminant("positive"));
        }
        Ok(m)
    }

    /// Integer entries; panics if the determinant is not positive.
    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        GL2QPlus::new(a.into(), b.into(), c.into(), d.into()).expect("non-positive determinant")
    }

    pub fn det(&self) -> Rational {
        self.a * self.d - self.b * self.c
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        GL2QPlus {
            a: self.d / det,
            b: -self.b / det,
            c: -self.c / det,
            d: self.a / det,
        }
    }

    pub fn is_integral(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(Rational::is_integer)
    }

    /// Converts to SL2(Z) when integral of determinant 1.
    pub fn to_sl2(&self) -> Option<SL2Z> {
        if !self.is_integral() || self.det() != Rational::int(1) {
            return None;
        }
        let e = |r: Rational| i64::try_from(r.numer()).ok();
        Some(SL2Z { a: e(self.a)?, b: e(self.b)?, c: e(self.c)?, d: e(self.d)? })
    }
}

impl Mul for GL2QPlus {
    type Output = GL2QPlus;
    fn mul(self, r: GL2QPlus) -> GL2QPlus {
        GL2QPlus {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }
}

impl fmt::Display for GL2QPlus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.a, self.b, self.c, self.d)
    }
}

/// A rational 2x2 matrix with no determinant condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mat2Q {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl Mat2Q {
    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2Q { a: a.into(), b: b.into(), c: c.into(), d: d.into() }
    }

    pub fn diag(x: Rational, y: Rational) -> Self {
        Mat2Q { a: x, b: Rational::zero(), c: Rational::zero(), d: y }
    }

    pub fn scale(&self, s: Rational) -> Self {
        Mat2Q { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
    }

    pub fn det(&self) -> Rational {
        self.a * self.d - self.b * self.c
    }

    pub fn is_integral(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(Rational::is_integer)
    }
}

impl From<SL2Z> for Mat2Q {
    fn from(g: SL2Z) -> Self {
        Mat2Q::from_ints(g.a, g.b, g.c, g.d)
    }
}

impl Mul for Mat2Q {
    type Output = Mat2Q;
    fn mul(self, r: Mat2Q) -> Mat2Q {
        Mat2Q {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }
}

/// Least nonnegative x with x = r_i mod m_i for all i. Moduli need not be
/// coprime as long as the residues agree on overlaps.
pub fn crt_solve(congruences: &[(i64, i64)]) -> Result<i64, ExactError> {
    let (mut x, mut m): (i128, i128) = (0, 1);
    for &(r, modulus) in congruences {
        if modulus <= 0 {
            return Err(ExactError::NonPositiveModulus);
        }
        let (r, modulus) = (r as i128, modulus as i128);
        let eg = m.extended_gcd(&modulus);
        let g = eg.gcd;
        let diff = r - x;
        if diff.rem_euclid(g) != 0 {
            return Err(ExactError::InconsistentCongruences);
        }
        let step = modulus / g;
        let t = ((diff / g) % step * (eg.x % step)).rem_euclid(step);
        x += m * t;
        m *= step;
        x = x.rem_euclid(m);
    }
    Ok(i64::try_from(x).expect("CRT solution exceeds i64"))
}

/// The canonical SL2(Z) matrix with bottom row (c, d): 0 <= b < |d| when
/// d != 0, otherwise (0, -sign c; c, 0).
pub fn complete_to_sl2(c: i64, d: i64) -> Result<SL2Z, ExactError> {
    if c.gcd(&d) != 1 {
        return Err(ExactError::NotUnimodularRow);
    }
    if d == 0 {
        return Ok(SL2Z { a: 0, b: -c.signum(), c, d });
    }
    // ad - bc = 1 forces b c = -1 mod d.
    let dd = d.abs();
    let b = if dd == 1 { 0 } else { (-(mod_inv(c, dd).expect("unit"))).rem_euclid(dd) };
    let num = 1 + b as i128 * c as i128;
    debug_assert_eq!(num % d as i128, 0);
    let a = i64::try_from(num / d as i128).expect("overflow completing row");
    Ok(SL2Z { a, b, c, d })
}

/// Inverse of a modulo m, in [0, m).
pub fn mod_inv(a: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let eg = (a as i128).rem_euclid(m as i128).extended_gcd(&(m as i128));
    (eg.gcd == 1).then(|| eg.x.rem_euclid(m as i128) as i64)
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Prime factorization in increasing prime order.
pub fn factorize(mut n: i64) -> Vec<(i64, u32)> {
    assert!(n >= 1, "factorize needs a positive integer");
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Largest k with p^k | n (n != 0).
pub fn valuation(mut n: i64, p: i64) -> u32 {
    assert!(n != 0);
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

pub fn ipow(b: i64, e: u32) -> i64 {
    b.checked_pow(e).expect("integer power overflow")
}

/// Index of Gamma0(N) in SL2(Z).
pub fn psi(n: i64) -> i64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p + 1))
}

pub fn euler_phi(n: i64) -> i64 {
    factorize(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Lift a row that is unimodular mod n to a coprime integer pair congruent
/// to it mod n, keeping the first entry in [1, n] and moving the second.
pub fn lift_row(x0: i64, x1: i64, n: i64) -> (i64, i64) {
    let mut c = x0.rem_euclid(n);
    if c == 0 {
        c = n;
    }
    let d0 = x1.rem_euclid(n);
    (0..)
        .map(|k| d0 + k * n)
        .find(|&d| c.gcd(&d) == 1)
        .map(|d| (c, d))
        .expect("row is not unimodular mod n")
}
