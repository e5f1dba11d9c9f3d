//! Effective-gain laws `t = |hᴴw|²/ρ` induced by the stochastic beamforming
//! schemes. Shared by the quadrature oracle and the samplers.

use crate::error::{Error, Result};
use crate::rates::mixture::ExponentialMixture;

#[derive(Debug, Clone, PartialEq)]
pub enum GainDistribution {
    /// Unit-mean exponential (Gaussian SBF).
    Exponential,
    /// `r·Beta(1, r−1)` on `[0, r]` (elliptic SBF); a point mass at 1 for `r = 1`.
    EllipticBeta { rank: usize },
    /// Unit-mean chi-square with 4 degrees of freedom, density `4t e^{−2t}`
    /// (Gaussian SBF-Alamouti).
    ChiSquare4,
    /// `r·Beta(2, 2r−2)` on `[0, r]` (elliptic SBF-Alamouti), `r ≥ 2`.
    EllipticAlamoutiBeta { rank: usize },
    /// `Σ d_k ζ_k` with i.i.d. unit-mean exponentials ζ_k.
    ExponentialMixture(ExponentialMixture),
    PointMass(f64),
}

impl GainDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            GainDistribution::EllipticBeta { rank } if *rank == 0 => {
                Err(Error::InvalidParams("elliptic gain law needs rank >= 1".into()))
            }
            GainDistribution::EllipticAlamoutiBeta { rank } if *rank < 2 => Err(
                Error::InvalidParams(format!("elliptic Alamouti gain law needs rank >= 2, got {rank}")),
            ),
            GainDistribution::PointMass(t) if !(t.is_finite() && *t >= 0.0) => {
                Err(Error::InvalidParams(format!("point mass location must be >= 0, got {t}")))
            }
            _ => Ok(()),
        }
    }

    /// Upper end of the support; `None` when unbounded.
    pub fn support_upper(&self) -> Option<f64> {
        match self {
            GainDistribution::EllipticBeta { rank } | GainDistribution::EllipticAlamoutiBeta { rank } => {
                Some(*rank as f64)
            }
            GainDistribution::PointMass(t) => Some(*t),
            _ => None,
        }
    }

    /// A point beyond which the remaining probability mass (times the slowly
    /// growing log-rate integrand) is below 1e−16.
    pub fn truncation_point(&self) -> f64 {
        match self {
            GainDistribution::Exponential => 48.0,
            GainDistribution::ChiSquare4 => 28.0,
            GainDistribution::ExponentialMixture(mix) => {
                let dmax = mix.distinct_means()[0];
                let rmax = *mix.multiplicities().iter().max().unwrap_or(&1) as f64;
                dmax * (48.0 + 12.0 * rmax)
            }
            other => other.support_upper().unwrap_or(0.0),
        }
    }

    pub fn is_point_mass(&self) -> Option<f64> {
        match self {
            GainDistribution::PointMass(t) => Some(*t),
            GainDistribution::EllipticBeta { rank: 1 } => Some(1.0),
            _ => None,
        }
    }

    /// Density at `t`; `None` for point masses.
    pub fn pdf(&self, t: f64) -> Option<f64> {
        if self.is_point_mass().is_some() {
            return None;
        }
        if t < 0.0 {
            return Some(0.0);
        }
        Some(match self {
            GainDistribution::Exponential => (-t).exp(),
            GainDistribution::ChiSquare4 => 4.0 * t * (-2.0 * t).exp(),
            GainDistribution::EllipticBeta { rank } => {
                let r = *rank as f64;
                if t > r {
                    0.0
                } else {
                    (1.0 - 1.0 / r) * (1.0 - t / r).powi(*rank as i32 - 2)
                }
            }
            GainDistribution::EllipticAlamoutiBeta { rank } => {
                let r = *rank as f64;
                if t > r {
                    0.0
                } else {
                    (2.0 * r - 1.0) * (2.0 * r - 2.0) / r * (t / r) * (1.0 - t / r).powi(2 * *rank as i32 - 3)
                }
            }
            GainDistribution::ExponentialMixture(mix) => mix.pdf(t),
            GainDistribution::PointMass(_) => unreachable!(),
        })
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if let Some(t0) = self.is_point_mass() {
            return if t >= t0 { 1.0 } else { 0.0 };
        }
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            GainDistribution::Exponential => -(-t).exp_m1(),
            GainDistribution::ChiSquare4 => 1.0 - (-2.0 * t).exp() * (1.0 + 2.0 * t),
            GainDistribution::EllipticBeta { rank } => {
                let v = (t / *rank as f64).min(1.0);
                1.0 - (1.0 - v).powi(*rank as i32 - 1)
            }
            GainDistribution::EllipticAlamoutiBeta { rank } => {
                // Beta(2, m): 1 − (1−v)^m (1 + m v)
                let v = (t / *rank as f64).min(1.0);
                let m = 2 * *rank as i32 - 2;
                1.0 - (1.0 - v).powi(m) * (1.0 + m as f64 * v)
            }
            GainDistribution::ExponentialMixture(mix) => mix.cdf(t),
            GainDistribution::PointMass(_) => unreachable!(),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            GainDistribution::ExponentialMixture(mix) => mix.mean(),
            GainDistribution::PointMass(t) => *t,
            _ => 1.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            GainDistribution::Exponential => 1.0,
            GainDistribution::ChiSquare4 => 0.5,
            GainDistribution::EllipticBeta { rank } => {
                // r² · (r−1) / (r² (r+1))
                let r = *rank as f64;
                (r - 1.0) / (r + 1.0)
            }
            GainDistribution::EllipticAlamoutiBeta { rank } => {
                // r² · 2m / ((m+2)² (m+3)) with m = 2r − 2
                let r = *rank as f64;
                let m = 2.0 * r - 2.0;
                r * r * 2.0 * m / ((m + 2.0).powi(2) * (m + 3.0))
            }
            GainDistribution::ExponentialMixture(mix) => {
                mix.expanded_weights().iter().map(|d| d * d).sum()
            }
            GainDistribution::PointMass(_) => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_rank_two_is_uniform() {
        let law = GainDistribution::EllipticBeta { rank: 2 };
        for &t in &[0.1, 1.0, 1.9] {
            assert_eq!(law.pdf(t), Some(0.5));
            assert!((law.cdf(t) - t / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn elliptic_rank_one_is_point_mass() {
        let law = GainDistribution::EllipticBeta { rank: 1 };
        assert_eq!(law.is_point_mass(), Some(1.0));
        assert_eq!(law.pdf(0.5), None);
        assert_eq!(law.cdf(0.999), 0.0);
        assert_eq!(law.cdf(1.0), 1.0);
    }

    #[test]
    fn alamouti_rank_two_density() {
        let law = GainDistribution::EllipticAlamoutiBeta { rank: 2 };
        for &t in &[0.2, 1.0, 1.7] {
            let want = 3.0 * (t / 2.0) * (1.0 - t / 2.0);
            assert!((law.pdf(t).unwrap() - want).abs() < 1e-15);
        }
        assert!((law.cdf(2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_laws() {
        assert!(GainDistribution::EllipticAlamoutiBeta { rank: 1 }.validate().is_err());
        assert!(GainDistribution::EllipticBeta { rank: 0 }.validate().is_err());
        assert!(GainDistribution::PointMass(-1.0).validate().is_err());
        assert!(GainDistribution::ChiSquare4.validate().is_ok());
    }
}
