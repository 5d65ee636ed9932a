use std::str::FromStr;

use crate::dirichlet::{char_parse, DirichletCharacter};

use super::NumericError;

/// Number of q-expansion coefficients kept for eta-product fixtures.
pub const DEFAULT_QEXP_BOUND: usize = 2000;

/// A weight-k newform given as an eta product or by explicit coefficients.
///
/// `factors` holds (d, r) for each eta(d z)^r and is empty for
/// coefficient-only fixtures. `qexp[n - 1]` is a(n).
#[derive(Clone, Debug, PartialEq)]
pub struct EtaProductForm {
    pub level: i64,
    pub weight: i32,
    pub chi: DirichletCharacter,
    pub factors: Vec<(i64, i64)>,
    pub qexp: Vec<i64>,
}

impl EtaProductForm {
    pub fn from_eta(level: i64, chi: DirichletCharacter, factors: Vec<(i64, i64)>, bound: usize) -> Result<Self, NumericError> {
        let total: i64 = factors.iter().map(|&(_, r)| r).sum();
        if total <= 0 || total % 2 != 0 {
            return Err(NumericError::Fixture { line: 0, msg: format!("sum of exponents {total} is not a positive even integer") });
        }
        if let Some(&(d, _)) = factors.iter().find(|&&(d, _)| d <= 0 || level % d != 0) {
            return Err(NumericError::Fixture { line: 0, msg: format!("eta factor {d} does not divide the level {level}") });
        }
        let qexp = eta_qexp(&factors, bound)?;
        Ok(EtaProductForm { level, weight: (total / 2) as i32, chi, factors, qexp })
    }

    /// a(n) for n >= 1, zero for n <= 0.
    pub fn coefficient(&self, n: i64) -> Option<i64> {
        match n {
            n if n <= 0 => Some(0),
            n => self.qexp.get(n as usize - 1).copied(),
        }
    }

    pub fn is_eta_product(&self) -> bool {
        !self.factors.is_empty()
    }
}

fn offset_check(factors: &[(i64, i64)]) -> Result<(), NumericError> {
    let s: i64 = factors.iter().map(|&(d, r)| d * r).sum();
    if s != 24 {
        return Err(NumericError::Offset(crate::exactnum::Rational::new(s as i128, 24).to_string()));
    }
    Ok(())
}

fn overflow(n: usize) -> NumericError {
    NumericError::CoefficientOverflow(n)
}

/// Coefficients a(1..=B) of q * prod_n prod_(d,r) (1 - q^(dn))^r, one
/// binomial factor at a time.
pub fn eta_qexp(factors: &[(i64, i64)], bound: usize) -> Result<Vec<i64>, NumericError> {
    offset_check(factors)?;
    // series[i] is the coefficient of q^i in the product, i < bound.
    let mut series = vec![0i128; bound];
    if bound == 0 {
        return Ok(Vec::new());
    }
    series[0] = 1;
    for &(d, r) in factors {
        let mut step = d as usize;
        while step < bound {
            for _ in 0..r.unsigned_abs() {
                if r > 0 {
                    for i in (step..bound).rev() {
                        series[i] = series[i].checked_sub(series[i - step]).ok_or_else(|| overflow(i))?;
                    }
                } else {
                    for i in step..bound {
                        series[i] = series[i].checked_add(series[i - step]).ok_or_else(|| overflow(i))?;
                    }
                }
            }
            step += d as usize;
        }
    }
    series.into_iter().enumerate().map(|(i, c)| i64::try_from(c).map_err(|_| overflow(i))).collect()
}

fn mul_trunc(a: &[i128], b: &[i128], bound: usize) -> Result<Vec<i128>, NumericError> {
    let mut out = vec![0i128; bound];
    for (i, &x) in a.iter().enumerate().filter(|(_, x)| **x != 0) {
        for (j, &y) in b.iter().enumerate().take(bound - i) {
            let t = x.checked_mul(y).ok_or_else(|| overflow(i + j))?;
            out[i + j] = out[i + j].checked_add(t).ok_or_else(|| overflow(i + j))?;
        }
    }
    Ok(out)
}

/// Inverse of a power series with constant term 1.
fn inverse_trunc(a: &[i128], bound: usize) -> Result<Vec<i128>, NumericError> {
    let mut out = vec![0i128; bound];
    out[0] = 1;
    for n in 1..bound {
        let mut acc = 0i128;
        for k in 1..=n.min(a.len() - 1) {
            let t = a[k].checked_mul(out[n - k]).ok_or_else(|| overflow(n))?;
            acc = acc.checked_sub(t).ok_or_else(|| overflow(n))?;
        }
        out[n] = acc;
    }
    Ok(out)
}

/// The same coefficients through Euler's pentagonal series for
/// prod (1 - q^n), raised to each power and dilated by d.
pub fn eta_qexp_pentagonal(factors: &[(i64, i64)], bound: usize) -> Result<Vec<i64>, NumericError> {
    offset_check(factors)?;
    if bound == 0 {
        return Ok(Vec::new());
    }
    let mut total = vec![0i128; bound];
    total[0] = 1;
    for &(d, r) in factors {
        let d = d as usize;
        let len = (bound - 1) / d + 1;
        let mut euler = vec![0i128; len];
        for k in 0i64.. {
            let mut any = false;
            for g in [k * (3 * k - 1) / 2, k * (3 * k + 1) / 2] {
                if (g as usize) < len {
                    euler[g as usize] = if k % 2 == 0 { 1 } else { -1 };
                    any = true;
                }
            }
            if !any {
                break;
            }
        }
        let base = if r < 0 { inverse_trunc(&euler, len)? } else { euler };
        let mut power = vec![0i128; len];
        power[0] = 1;
        for _ in 0..r.unsigned_abs() {
            power = mul_trunc(&power, &base, len)?;
        }
        let mut dilated = vec![0i128; bound];
        for (i, c) in power.into_iter().enumerate() {
            dilated[i * d] = c;
        }
        total = mul_trunc(&total, &dilated, bound)?;
    }
    total.into_iter().enumerate().map(|(i, c)| i64::try_from(c).map_err(|_| overflow(i))).collect()
}

fn parse_eta(spec: &str, line: usize) -> Result<Vec<(i64, i64)>, NumericError> {
    let bad = |msg: String| NumericError::Fixture { line, msg };
    spec.split(',')
        .map(|part| {
            let (d, r) = part.trim().split_once('^').unwrap_or((part.trim(), "1"));
            let d = d.trim().parse::<i64>().map_err(|_| bad(format!("bad eta divisor {d:?}")))?;
            let r = r.trim().parse::<i64>().map_err(|_| bad(format!("bad eta exponent {r:?}")))?;
            Ok((d, r))
        })
        .collect()
}

/// Parses the fixture text format: `level=`, `weight=`, `character=`
/// headers, then `eta=d^r,...` or `coeff n a(n)` lines; `#` comments.
pub fn parse_fixture(text: &str) -> Result<EtaProductForm, NumericError> {
    let mut level = None;
    let mut weight = None;
    let mut character = None;
    let mut eta = None;
    let mut coeffs: Vec<(i64, i64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| NumericError::Fixture { line: line_no, msg };
        if let Some(rest) = line.strip_prefix("coeff") {
            let mut it = rest.split_whitespace().map(i64::from_str);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(n)), Some(Ok(a)), None) if n >= 1 => coeffs.push((n, a)),
                _ => return Err(bad(format!("expected `coeff <n> <a(n)>`, got {line:?}"))),
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key=value, got {line:?}")))?;
        let value = value.trim();
        match key.trim() {
            "level" => level = Some(value.parse::<i64>().ok().filter(|&n| n >= 1).ok_or_else(|| bad(format!("bad level {value:?}")))?),
            "weight" => weight = Some(value.parse::<i32>().map_err(|_| bad(format!("bad weight {value:?}")))?),
            "character" => character = Some((value.to_string(), line_no)),
            "eta" => eta = Some(parse_eta(value, line_no)?),
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    let missing = |what: &str| NumericError::Fixture { line: 0, msg: format!("missing {what} header") };
    let level = level.ok_or_else(|| missing("level"))?;
    let chi = match character {
        Some((spec, line)) => char_parse(&spec, level).map_err(|e| NumericError::Fixture { line, msg: e.to_string() })?,
        None => DirichletCharacter::trivial(level),
    };
    let form = match (eta, coeffs.is_empty()) {
        (Some(factors), true) => EtaProductForm::from_eta(level, chi, factors, DEFAULT_QEXP_BOUND)?,
        (None, false) => {
            coeffs.sort_unstable();
            let bound = coeffs.last().map_or(0, |&(n, _)| n) as usize;
            let mut qexp = vec![0; bound];
            for (n, a) in coeffs {
                qexp[n as usize - 1] = a;
            }
            let weight = weight.ok_or_else(|| missing("weight"))?;
            EtaProductForm { level, weight, chi, factors: Vec::new(), qexp }
        }
        (Some(_), false) => return Err(NumericError::Fixture { line: 0, msg: "both eta and coeff lines given".into() }),
        (None, true) => return Err(NumericError::Fixture { line: 0, msg: "no eta or coeff lines".into() }),
    };
    if let Some(w) = weight.filter(|&w| w != form.weight) {
        return Err(NumericError::Fixture { line: 0, msg: format!("weight {w} disagrees with the eta product weight {}", form.weight) });
    }
    if form.coefficient(1) != Some(1) {
        return Err(NumericError::Fixture { line: 0, msg: "a(1) must be 1".into() });
    }
    Ok(form)
}
