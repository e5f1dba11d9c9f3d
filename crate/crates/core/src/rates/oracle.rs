//! Quadrature of the defining rate integrals `∫ log(1 + tρP) f(t) dt`,
//! independent of the closed forms.

use crate::error::{Error, Result};
use crate::gain::GainDistribution;
use crate::quadrature::{geometric_breaks, integrate_pieces, Estimate, Tolerance};

const ORACLE_TOL: Tolerance = Tolerance { abs: 1e-12, rel: 1e-13 };

/// `E[g(t)]` under `law` by adaptive Gauss–Legendre on the (truncated) support.
///
/// `scale` sets the width of the first panel; panels then double in width,
/// which resolves integrands that vary on a scale much smaller than the
/// support.
pub fn quadrature_expectation<G: Fn(f64) -> f64>(
    law: &GainDistribution,
    g: G,
    scale: f64,
) -> Result<Estimate> {
    law.validate()?;
    if let Some(t0) = law.is_point_mass() {
        return Ok(Estimate { value: g(t0), error: 0.0 });
    }
    let upper = law.truncation_point();
    let first = scale.min(upper / 4.0).max(upper * 1e-12);
    let breaks = geometric_breaks(first, upper);
    let est = integrate_pieces(
        |t| g(t) * law.pdf(t).expect("continuous law"),
        &breaks,
        ORACLE_TOL,
    )?;
    if est.error > 1e-10 {
        return Err(Error::Accuracy { achieved: est.error });
    }
    Ok(est)
}

/// `∫ log(1 + tρP) f(t) dt` for the effective-gain law `f`.
pub fn quadrature_rate_oracle(law: &GainDistribution, rho: f64, power: f64) -> Result<Estimate> {
    if !(rho > 0.0) || !(power >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "rho must be positive and power nonnegative, got rho={rho}, P={power}"
        )));
    }
    let a = rho * power;
    let scale = if a > 0.0 { (1.0 / a).min(1.0) } else { 1.0 };
    quadrature_expectation(law, |t| (t * a).ln_1p(), scale)
}
