//! Numeric ground truth from eta-product newforms: evaluation in the upper
//! half plane, the unitary slash action, DFT extraction of Fourier
//! coefficients at cusps, and Whittaker functions.

mod eval;
mod extract;
mod fixture;
mod whittaker;

pub use eval::{
    eta, evaluate_form, hecke_eigenvalue_numeric, reduce_to_gamma0_top, slash_unitary, Evaluation, HeckeEigenvalue,
};
pub use extract::{
    coefficient_view, default_height, default_samples, extract_coefficients, NumericFourierSlice,
};
pub use fixture::{eta_qexp, eta_qexp_pentagonal, parse_fixture, EtaProductForm};
pub use whittaker::{holomorphic_whittaker, rgamma, whittaker, whittaker_quadrature};

use crate::cusps::CuspError;
use crate::dirichlet::CharError;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NumericError {
    #[error("fixture line {line}: {msg}")]
    Fixture { line: usize, msg: String },
    #[error("q-power offset sum(d*r)/24 is {0}, expected 1")]
    Offset(String),
    #[error("coefficient overflow while expanding the eta product at q^{0}")]
    CoefficientOverflow(usize),
    #[error("point {0} is not in the upper half plane")]
    NotInUpperHalfPlane(String),
    #[error("q-expansion with {bound} terms leaves a tail bound {tail:e} above {tol:e} at Im z = {im}")]
    InsufficientTerms { bound: usize, tail: f64, tol: f64, im: f64 },
    #[error("Whittaker factor underflows at n + mu = {freq}, y = {y}: choose smaller y or n")]
    Underflow { freq: f64, y: f64 },
    #[error("sample count {samples} must be a power of two at least {min}")]
    BadSamples { samples: usize, min: usize },
    #[error("Whittaker function needs y > 0, got {0}")]
    NonPositiveArgument(f64),
    #[error("Whittaker integral does not converge for alpha = {alpha}, nu = {nu}")]
    WhittakerDomain { alpha: f64, nu: String },
    #[error("Hecke residual {residual:e} at p = {p} exceeds {tol:e}: the fixture is not an eigenform")]
    NotEigenform { p: i64, residual: f64, tol: f64 },
    #[error("coefficient a({0}) is not in the fixture")]
    MissingCoefficient(i64),
    #[error("height y must be positive, got {0}")]
    BadHeight(f64),
    #[error(transparent)]
    Character(#[from] CharError),
    #[error(transparent)]
    Cusp(#[from] CuspError),
}
