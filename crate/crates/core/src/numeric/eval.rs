use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::exactnum::{complete_to_sl2, gcd, GL2QPlus, SL2Z};

use super::{EtaProductForm, NumericError};

fn e(x: Complex64) -> Complex64 {
    (Complex64::i() * TAU * x).exp()
}

fn check_upper(z: Complex64) -> Result<(), NumericError> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(NumericError::NotInUpperHalfPlane(z.to_string()))
    }
}

/// Dedekind eta, after moving tau into the standard fundamental domain with
/// eta(tau + 1) = e(1/24) eta(tau) and eta(-1/tau) = sqrt(tau / i) eta(tau).
pub fn eta(tau: Complex64) -> Complex64 {
    let mut tau = tau;
    let mut factor = Complex64::new(1.0, 0.0);
    for _ in 0..10_000 {
        let n = tau.re.round();
        tau.re -= n;
        factor *= e(Complex64::new(n / 24.0, 0.0));
        if tau.norm_sqr() >= 1.0 - 1e-15 {
            break;
        }
        factor /= (tau / Complex64::i()).sqrt();
        tau = -1.0 / tau;
    }
    let q = e(tau);
    let mut sum = Complex64::new(1.0, 0.0);
    for k in 1i32.. {
        let g1 = k * (3 * k - 1) / 2;
        let term = q.powi(g1) * (1.0 + q.powi(k));
        sum += if k % 2 == 0 { term } else { -term };
        if term.norm() < 1e-18 {
            break;
        }
    }
    factor * e(tau / 24.0) * sum
}

/// A value together with a bound on its truncation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Complex64,
    pub error_bound: f64,
}

/// gamma in Gamma0(N) maximizing Im(gamma z), with gamma z. The bottom row
/// alone fixes Im(gamma z) = Im z / |cz + d|^2.
pub fn reduce_to_gamma0_top(n: i64, z: Complex64) -> (SL2Z, Complex64) {
    let (x, y) = (z.re, z.im);
    let mut best = (1.0f64, 0i64, 1i64);
    let mut t = 1i64;
    while ((n * t) as f64) * y < best.0.sqrt() {
        let c = n * t;
        let cf = c as f64;
        let slack = best.0 - cf * cf * y * y;
        if slack > 0.0 {
            let r = slack.sqrt();
            let lo = (-cf * x - r).ceil() as i64;
            let hi = (-cf * x + r).floor() as i64;
            for d in lo..=hi {
                let norm = (cf * x + d as f64).powi(2) + cf * cf * y * y;
                if norm < best.0 && gcd(c, d) == 1 {
                    best = (norm, c, d);
                }
            }
        }
        t += 1;
    }
    let gamma = complete_to_sl2(best.1, best.2).expect("coprime bottom row");
    (gamma, mobius(gamma.a as f64, gamma.b as f64, gamma.c as f64, gamma.d as f64, z))
}

fn mobius(a: f64, b: f64, c: f64, d: f64, z: Complex64) -> Complex64 {
    (a * z + b) / (c * z + d)
}

/// Bound on sum_{n > B} n^k r^n, using |a(n)| <= n^k.
fn tail_bound(bound: usize, k: i32, r: f64) -> f64 {
    let b = bound as f64;
    let rho = ((b + 2.0) / (b + 1.0)).powi(k) * r;
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    (b + 1.0).powi(k) * r.powf(b + 1.0) / (1.0 - rho)
}

/// F(z) = y^(k/2) sum a(n) e(nz) from the stored q-expansion, after moving
/// z up by Gamma0(N). Fails when the truncation tail may exceed `tol`.
pub fn evaluate_form(form: &EtaProductForm, z: Complex64, tol: f64) -> Result<Evaluation, NumericError> {
    check_upper(z)?;
    let k = form.weight;
    let (gamma, w) = reduce_to_gamma0_top(form.level, z);
    let v = w.im;
    let scale = v.powf(k as f64 / 2.0);
    let r = (-TAU * v).exp();
    let tail = scale * tail_bound(form.qexp.len(), k, r);
    if !(tail <= tol) {
        return Err(NumericError::InsufficientTerms { bound: form.qexp.len(), tail, tol, im: v });
    }
    let q = e(w);
    let mut qn = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for &a in &form.qexp {
        qn *= q;
        sum += a as f64 * qn;
        if qn.norm() < 1e-300 {
            break;
        }
    }
    // F(z) = chi(d)^-1 j(gamma, z)^-k F(gamma z)
    let j = gamma.c as f64 * z + gamma.d as f64;
    let j = (j / j.norm()).conj().powi(k);
    let chi = form.chi.eval(gamma.d).to_complex().conj();
    Ok(Evaluation { value: chi * j * scale * sum, error_bound: tail })
}

impl EtaProductForm {
    /// F(z) = y^(k/2) f(z). Eta products are evaluated through the eta
    /// transformation law and work at any height; coefficient fixtures use
    /// the q-expansion.
    pub fn value(&self, z: Complex64) -> Result<Complex64, NumericError> {
        check_upper(z)?;
        if !self.is_eta_product() {
            return evaluate_form(self, z, 1e-13).map(|ev| ev.value);
        }
        let prod = self.factors.iter().fold(Complex64::new(1.0, 0.0), |acc, &(d, r)| acc * eta(d as f64 * z).powi(r as i32));
        Ok(z.im.powf(self.weight as f64 / 2.0) * prod)
    }

    /// (F|gamma)(m z), the expansion variable at a cusp of width m.
    pub fn at_cusp(&self, gamma: &SL2Z, width: i64, z: Complex64) -> Result<Complex64, NumericError> {
        let g = GL2QPlus::from_ints(gamma.a, gamma.b, gamma.c, gamma.d);
        slash_unitary(|w| self.value(w), &g, self.weight, width as f64 * z)
    }
}

/// ((cz+d)/|cz+d|)^-k f(gamma z) with gamma scaled to determinant one.
pub fn slash_unitary<E: From<NumericError>>(
    f: impl Fn(Complex64) -> Result<Complex64, E>,
    gamma: &GL2QPlus,
    k: i32,
    z: Complex64,
) -> Result<Complex64, E> {
    check_upper(z)?;
    let s = gamma.det().to_f64().sqrt();
    let [a, b, c, d] = [gamma.a, gamma.b, gamma.c, gamma.d].map(|x| x.to_f64() / s);
    let j = c * z + d;
    if j.norm() == 0.0 {
        return Err(NumericError::NotInUpperHalfPlane(z.to_string()).into());
    }
    let w = mobius(a, b, c, d, z);
    Ok((j / j.norm()).conj().powi(k) * f(w)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeckeEigenvalue {
    pub p: i64,
    pub lambda: f64,
    pub residual: f64,
}

const HECKE_POINTS: [(f64, f64); 5] = [(0.13, 0.71), (-0.37, 0.52), (0.29, 1.1), (0.05, 0.43), (-0.46, 0.88)];

/// lambda_p = a(p) / p^((k-1)/2), checked against
/// T_p F = p^(-1/2) (chi(p) F(pz) + sum_b F((z+b)/p)) at sample points.
pub fn hecke_eigenvalue_numeric(form: &EtaProductForm, p: i64) -> Result<HeckeEigenvalue, NumericError> {
    const TOL: f64 = 1e-8;
    let ap = form.coefficient(p).ok_or(NumericError::MissingCoefficient(p))?;
    let k = form.weight as f64;
    let lambda = ap as f64 / (p as f64).powf((k - 1.0) / 2.0);
    let chi_p = form.chi.eval(p).to_complex();
    let pf = p as f64;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (x, y) in HECKE_POINTS {
        let z = Complex64::new(x, y);
        let fz = form.value(z)?;
        let mut tp = chi_p * form.value(pf * z)?;
        for b in 0..p {
            tp += form.value((z + b as f64) / pf)?;
        }
        tp /= pf.sqrt();
        worst = worst.max((tp - lambda * fz).norm());
        scale = scale.max(fz.norm());
    }
    let residual = if scale > 0.0 { worst / scale } else { worst };
    if residual > TOL {
        return Err(NumericError::NotEigenform { p, residual, tol: TOL });
    }
    Ok(HeckeEigenvalue { p, lambda, residual })
}
