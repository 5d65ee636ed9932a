use std::f64::consts::PI;

use num_complex::Complex64;

use super::NumericError;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn gamma_right(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let x = LANCZOS[1..].iter().enumerate().fold(Complex64::new(LANCZOS[0], 0.0), |acc, (i, &c)| acc + c / (z + (i + 1) as f64));
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

/// 1 / Gamma(z), an entire function.
pub fn rgamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // 1/Gamma(z) = Gamma(1 - z) sin(pi z) / pi
        gamma_right(1.0 - z) * (PI * z).sin() / PI
    } else {
        1.0 / gamma_right(z)
    }
}

/// e^w - 1 without cancellation for small w.
fn expm1(w: Complex64) -> Complex64 {
    let (a, b) = (w.re, w.im);
    let s = (b / 2.0).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * s * s, a.exp() * b.sin())
}

/// y^alpha e^(-y/2) and its Laguerre generalization, for
/// nu - alpha + 1/2 = -n.
fn degenerate(n: u32, nu: Complex64, y: f64) -> Complex64 {
    let a = 2.0 * nu;
    let (mut prev, mut cur) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    for k in 0..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - y) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    let sign_fact = (1..=n).fold(1.0, |acc, k| -acc * k as f64);
    sign_fact * (nu + 0.5).expf(y) * (-y / 2.0).exp() * cur
}

/// Int_R e^(us) (g(e^u) - e^(-e^u)) du with g(t) = e^(-yt) (1 + t)^b, by
/// the trapezoid rule; converges for Re s > -1.
fn subtracted_integral(s: Complex64, b: Complex64, y: f64) -> Complex64 {
    const H: f64 = 1.0 / 32.0;
    let integrand = |u: f64| {
        let t = u.exp();
        let w = Complex64::new((1.0 - y) * t, 0.0) + b * t.ln_1p();
        let diff = if w.norm() < 0.5 { (-t).exp() * expm1(w) } else { (w - t).exp() - (-t).exp() };
        (s * u).exp() * diff
    };
    let lo = -45.0 / (s.re + 1.0);
    let decay = y.min(1.0);
    let mut hi = (1.0 / decay).ln().max(0.0) + 2.0;
    while decay * hi.exp() < 60.0 + (s.re + b.re).max(0.0) * hi.max(1.0) {
        hi += 0.25;
    }
    let steps = ((hi - lo) / H).ceil() as usize;
    let total: Complex64 = (0..=steps).map(|i| integrand(lo + i as f64 * H)).sum();
    total * H
}

/// W_{alpha,nu}(y) = y^(nu+1/2) e^(-y/2) / Gamma(nu-alpha+1/2) times
/// Int_0^inf e^(-yt) t^(nu-alpha-1/2) (1+t)^(nu+alpha-1/2) dt,
/// continued through the symmetry nu -> -nu when the integral diverges.
pub fn whittaker(alpha: f64, nu: Complex64, y: f64) -> Result<Complex64, NumericError> {
    if !(y > 0.0) {
        return Err(NumericError::NonPositiveArgument(y));
    }
    for nu in [nu, -nu] {
        let s = nu - alpha + 0.5;
        let n = (-s.re).round();
        if s.im.abs() < 1e-14 && n >= 0.0 && (s.re + n).abs() < 1e-12 {
            return Ok(degenerate(n as u32, nu, y));
        }
    }
    integral_route(alpha, if nu.re >= 0.0 { nu } else { -nu }, y)
}

/// W_{alpha,nu}(y) by quadrature alone, on whichever of nu, -nu has
/// Re(nu - alpha + 1/2) > -1. No closed-form shortcut is taken.
pub fn whittaker_quadrature(alpha: f64, nu: Complex64, y: f64) -> Result<Complex64, NumericError> {
    if !(y > 0.0) {
        return Err(NumericError::NonPositiveArgument(y));
    }
    integral_route(alpha, if nu.re >= 0.0 { nu } else { -nu }, y)
}

fn integral_route(alpha: f64, nu: Complex64, y: f64) -> Result<Complex64, NumericError> {
    let s = nu - alpha + 0.5;
    if s.re <= -0.999 {
        return Err(NumericError::WhittakerDomain { alpha, nu: nu.to_string() });
    }
    let b = nu + alpha - 0.5;
    // Int t^(s-1) e^(-t) dt = Gamma(s) is split off before dividing.
    let bracket = 1.0 + rgamma(s) * subtracted_integral(s, b, y);
    Ok((nu + 0.5).expf(y) * (-y / 2.0).exp() * bracket)
}

/// The holomorphic degeneration W_{k/2,(k-1)/2}(y) = y^(k/2) e^(-y/2).
pub fn holomorphic_whittaker(k: i32, y: f64) -> f64 {
    y.powf(k as f64 / 2.0) * (-y / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn gamma_values() {
        assert!((rgamma(c(5.0)) - 1.0 / 24.0).norm() < 1e-15);
        assert!((rgamma(c(0.5)) - 1.0 / PI.sqrt()).norm() < 1e-15);
        assert!(rgamma(c(-2.0)).norm() < 1e-14);
        assert!((rgamma(c(1e-6)) - 1e-6).norm() < 1e-11);
    }

    #[test]
    fn exponential_family() {
        let w = whittaker(0.0, c(0.5), 2.0).unwrap();
        assert!((w - (-1.0f64).exp()).norm() < 1e-12);
    }

    #[test]
    fn holomorphic_degeneration() {
        let y = 4.0 * PI;
        let w = whittaker(1.0, c(0.5), y).unwrap();
        assert!((w.re - y * (-2.0 * PI).exp()).abs() < 1e-15);
        let near = whittaker(1.0, c(0.5 + 1e-6), y).unwrap();
        assert!((near - w).norm() < 1e-5 * w.norm());
    }

    #[test]
    fn decays() {
        assert!(whittaker(1.0, c(0.7), 50.0).unwrap().norm() < 1e-8);
    }

    #[test]
    fn symmetric_in_nu() {
        let nu = Complex64::new(0.3, 1.7);
        let a = integral_route(-0.4, nu, 3.0).unwrap();
        let b = integral_route(-0.4, -nu, 3.0).unwrap();
        assert!((a - b).norm() < 1e-10 * a.norm());
    }

    #[test]
    fn laguerre_case_matches_quadrature_nearby() {
        // nu - alpha + 1/2 = -1; the nearby value goes through -nu.
        let exact = whittaker(1.25, c(-0.25), 1.5).unwrap();
        let near = whittaker(1.25, c(-0.25 + 1e-8), 1.5).unwrap();
        assert!((exact - near).norm() < 1e-5 * exact.norm(), "{exact} {near}");
    }

    #[test]
    fn power_family_by_quadrature() {
        // b = 0 leaves Int t^(s-1) e^(-yt) dt = Gamma(s) y^(-s), so
        // W_{alpha,1/2-alpha}(y) = y^alpha e^(-y/2).
        for alpha in [-1.0, -0.5, 0.0, 0.25, 0.75] {
            for y in [0.1, 1.0, 7.5, 30.0] {
                let w = whittaker_quadrature(alpha, c(0.5 - alpha), y).unwrap();
                let exact = y.powf(alpha) * (-y / 2.0).exp();
                assert!((w - exact).norm() < 1e-10 * exact.max(1.0), "alpha={alpha} y={y}: {w} vs {exact}");
            }
        }
    }

    #[test]
    fn rejects_non_positive_y() {
        assert_eq!(whittaker(0.0, c(0.5), 0.0), Err(NumericError::NonPositiveArgument(0.0)));
    }
}
