//! Logarithmic nonlinearity, its two regularizations, and the matching
//! potential-energy densities.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which form of the logarithmic term to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegVariant {
    /// `z ln|z|^2`, the unregularized term.
    Unregularized,
    /// `z ln(eps + |z|)^2`
    LinearEps,
    /// `z ln(eps + |z|^2)`
    SquaredEps,
}

impl RegVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            RegVariant::Unregularized => "log",
            RegVariant::LinearEps => "linear-eps",
            RegVariant::SquaredEps => "squared-eps",
        }
    }
}

impl fmt::Display for RegVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "log" => Ok(RegVariant::Unregularized),
            "linear-eps" => Ok(RegVariant::LinearEps),
            "squared-eps" => Ok(RegVariant::SquaredEps),
            other => Err(Error::InvalidInput(format!(
                "unknown variant `{other}` (expected log, linear-eps or squared-eps)"
            ))),
        }
    }
}

/// Real potential multiplying `z` in the log term, evaluated at modulus `r = |z|`.
///
/// For the unregularized variant this is `-inf` at `r = 0`; callers that multiply
/// by `z` should go through [`log_term`], which returns the limit value there.
#[inline]
pub fn log_potential(r: f64, eps: f64, variant: RegVariant) -> f64 {
    match variant {
        RegVariant::LinearEps => 2.0 * (eps + r).ln(),
        RegVariant::SquaredEps => (eps + r * r).ln(),
        RegVariant::Unregularized => 2.0 * r.ln(),
    }
}

/// The (possibly regularized) log term without the coupling constant.
///
/// The unregularized term returns 0 at `z = 0`, the continuous limit of `z ln|z|^2`.
#[inline]
pub fn log_term(z: Complex64, eps: f64, variant: RegVariant) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    z * log_potential(r, eps, variant)
}

/// `F(rho) = rho ln rho - rho`, with `F(0) = 0`.
#[allow(non_snake_case)]
pub fn F(rho: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("F needs rho >= 0, got {rho}")));
    }
    Ok(f_unchecked(rho))
}

/// `F_eps(rho) = int_0^rho ln(eps + sqrt s)^2 ds`, closed form.
#[allow(non_snake_case)]
pub fn F_eps(rho: f64, eps: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("F_eps needs rho >= 0, got {rho}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!(
            "F_eps needs eps > 0, got {eps} (use F)"
        )));
    }
    Ok(f_eps_unchecked(rho, eps))
}

/// `G_eps(rho) = int_0^rho ln(eps + s) ds = (eps + rho) ln(eps + rho) - eps ln eps - rho`,
/// the density belonging to the squared-eps regularization.
#[allow(non_snake_case)]
pub fn F_sq_eps(rho: f64, eps: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("F_sq_eps needs rho >= 0, got {rho}")));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!(
            "F_sq_eps needs eps > 0, got {eps} (use F)"
        )));
    }
    Ok(f_sq_eps_unchecked(rho, eps))
}

/// Energy density for `variant`; `eps` is ignored for the unregularized form.
pub fn energy_density(rho: f64, eps: f64, variant: RegVariant) -> Result<f64> {
    match variant {
        RegVariant::Unregularized => F(rho),
        RegVariant::LinearEps => F_eps(rho, eps),
        RegVariant::SquaredEps => F_sq_eps(rho, eps),
    }
}

#[inline]
fn f_unchecked(rho: f64) -> f64 {
    if rho == 0.0 {
        0.0
    } else {
        rho * rho.ln() - rho
    }
}

#[inline]
fn f_eps_unchecked(rho: f64, eps: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    let s = rho.sqrt();
    rho * 2.0 * (eps + s).ln() - rho + 2.0 * eps * s - eps * eps * 2.0 * (s / eps).ln_1p()
}

#[inline]
fn f_sq_eps_unchecked(rho: f64, eps: f64) -> f64 {
    // (eps + rho) ln(eps + rho) - eps ln eps = rho ln(eps + rho) + eps ln(1 + rho/eps)
    rho * (eps + rho).ln() + eps * (rho / eps).ln_1p() - rho
}
