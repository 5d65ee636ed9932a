use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::cusps::CuspTable;
use crate::exactnum::Rational;
use crate::transfer::CoefficientView;

use super::{EtaProductForm, NumericError};

/// Fourier coefficients at one cusp from a single horocycle.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericFourierSlice {
    pub class_id: usize,
    pub y: f64,
    pub mu: Rational,
    pub samples: usize,
    /// Integer indices n; the frequency is n + mu.
    pub indices: Vec<i64>,
    pub frequencies: Vec<f64>,
    /// A(a, n), scaled so that A(inf, 1) = a(1).
    pub coefficients: Vec<Complex64>,
    /// Roundoff and aliasing bound on the absolute error of each coefficient.
    pub error_estimate: f64,
}

impl NumericFourierSlice {
    pub fn get(&self, n: i64) -> Option<Complex64> {
        self.indices.iter().position(|&m| m == n).map(|i| self.coefficients[i])
    }
}

/// A height at which the largest frequency keeps about e^(-2 pi) of its
/// magnitude.
pub fn default_height(nmax: i64) -> f64 {
    (1.0 / nmax.max(1) as f64).min(1.0)
}

/// 2^ceil(log2(8 nmax)).
pub fn default_samples(nmax: i64) -> usize {
    (8 * nmax.max(2) as usize).next_power_of_two()
}

/// (|n + mu| y)^(k/2) e^(-2 pi |n + mu| y): the holomorphic Whittaker factor
/// W(4 pi |n + mu| y) divided by (4 pi)^(k/2).
fn whittaker_factor(k: i32, freq: f64, y: f64) -> f64 {
    let t = freq.abs() * y;
    t.powf(k as f64 / 2.0) * (-TAU * t).exp()
}

/// A(a, n) for |n| <= nmax from the DFT of e(-mu x) (F|sigma_a)(x + iy),
/// divided by the Whittaker factor.
pub fn extract_coefficients(
    form: &EtaProductForm,
    table: &CuspTable,
    class_id: usize,
    y: f64,
    nmax: i64,
    samples: Option<usize>,
) -> Result<NumericFourierSlice, NumericError> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(NumericError::BadHeight(y));
    }
    let samples = samples.unwrap_or_else(|| default_samples(nmax));
    let min = 2 * (nmax as usize + 1);
    if !samples.is_power_of_two() || samples < min {
        return Err(NumericError::BadSamples { samples, min });
    }
    let cls = table.class(class_id);
    let mu = cls.mu.to_f64();
    let k = form.weight;
    let indices: Vec<i64> = (-nmax..=nmax).filter(|&n| n as f64 + mu != 0.0).collect();
    let frequencies: Vec<f64> = indices.iter().map(|&n| n as f64 + mu).collect();
    let factors: Vec<f64> = frequencies.iter().map(|&f| whittaker_factor(k, f, y)).collect();
    if let Some(i) = factors.iter().position(|&w| w < 1e-280) {
        return Err(NumericError::Underflow { freq: frequencies[i], y });
    }
    let mut buf = (0..samples)
        .into_par_iter()
        .map(|j| {
            let x = j as f64 / samples as f64;
            let v = form.at_cusp(&cls.gamma, cls.m, Complex64::new(x, y))?;
            Ok(v * Complex64::from_polar(1.0, -TAU * mu * x))
        })
        .collect::<Result<Vec<_>, NumericError>>()?;
    let sample_scale = buf.iter().map(|v| v.norm()).fold(0.0, f64::max);
    FftPlanner::new().plan_fft_forward(samples).process(&mut buf);
    let coefficients: Vec<Complex64> = indices
        .iter()
        .zip(&factors)
        .map(|(&n, &w)| buf[n.rem_euclid(samples as i64) as usize] / samples as f64 / w)
        .collect();
    let floor = factors.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let alias = (-TAU * (samples as f64 - 2.0 * nmax as f64) * y).exp();
    let error_estimate = (1e-15 * (samples as f64).log2() + alias) * sample_scale / floor;
    Ok(NumericFourierSlice { class_id, y, mu: cls.mu, samples, indices, frequencies, coefficients, error_estimate })
}

/// Extracts every class up to `nmax(class)` at the default height and
/// collects the coefficients in one numeric view.
pub fn coefficient_view(
    form: &EtaProductForm,
    table: &CuspTable,
    nmax: impl Fn(usize) -> i64,
) -> Result<CoefficientView, NumericError> {
    let mut view = CoefficientView::new(table);
    for cls in &table.classes {
        let n = nmax(cls.id);
        if n <= 0 {
            continue;
        }
        let slice = extract_coefficients(form, table, cls.id, default_height(n), n, None)?;
        for (&idx, &c) in slice.indices.iter().zip(&slice.coefficients) {
            view.set(cls.id, idx, c);
        }
    }
    Ok(view)
}
