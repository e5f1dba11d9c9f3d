//! Achievable rates of the multicast schemes, their gaps to the multicast
//! capacity `log(1 + ρ_min P)`, and the high-power limits of those gaps.
//!
//! All rates are in nats.

pub mod mixture;
pub mod montecarlo;
pub mod oracle;

pub use mixture::{partial_fraction_coeffs, ExponentialMixture};
pub use montecarlo::{rate_monte_carlo, sample_gains_via_weights};
pub use oracle::{quadrature_expectation, quadrature_rate_oracle};

use crate::error::{Error, Result};
use crate::specfun::{harmonic_f64, scaled_exp_integral_e1, EULER_GAMMA};

/// Worst-user gain, rank of the transmit covariance and transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    rho_min: f64,
    rank: usize,
    power: f64,
}

impl SchemeParams {
    pub fn new(rho_min: f64, rank: usize, power: f64) -> Result<Self> {
        if !(rho_min > 0.0 && rho_min.is_finite()) {
            return Err(Error::InvalidParams(format!("rho_min must be positive, got {rho_min}")));
        }
        if rank == 0 {
            return Err(Error::InvalidParams("rank must be at least 1".into()));
        }
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::InvalidParams(format!("power must be nonnegative, got {power}")));
        }
        Ok(SchemeParams { rho_min, rank, power })
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    /// Worst-user SNR `ρ_min P`.
    pub fn snr(&self) -> f64 {
        self.rho_min * self.power
    }
}

/// The four stochastic schemes with closed-form rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SbfScheme {
    GaussSbf,
    EllipSbf,
    GaussAlamouti,
    EllipAlamouti,
}

impl SbfScheme {
    pub const ALL: [SbfScheme; 4] = [
        SbfScheme::GaussSbf,
        SbfScheme::EllipSbf,
        SbfScheme::GaussAlamouti,
        SbfScheme::EllipAlamouti,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SbfScheme::GaussSbf => "GaussSBF",
            SbfScheme::EllipSbf => "EllipSBF",
            SbfScheme::GaussAlamouti => "GaussAlam",
            SbfScheme::EllipAlamouti => "EllipAlam",
        }
    }

    pub fn min_rank(&self) -> usize {
        match self {
            SbfScheme::EllipAlamouti => 2,
            _ => 1,
        }
    }

    /// The normalized effective-gain law the scheme induces at rank `r`.
    pub fn gain_law(&self, rank: usize) -> crate::gain::GainDistribution {
        use crate::gain::GainDistribution as G;
        match self {
            SbfScheme::GaussSbf => G::Exponential,
            SbfScheme::EllipSbf => G::EllipticBeta { rank },
            SbfScheme::GaussAlamouti => G::ChiSquare4,
            SbfScheme::EllipAlamouti => G::EllipticAlamoutiBeta { rank },
        }
    }

    pub fn rate(&self, p: &SchemeParams) -> Result<f64> {
        match self {
            SbfScheme::GaussSbf => Ok(rate_sbf_gauss(p)),
            SbfScheme::EllipSbf => Ok(rate_sbf_ellip(p)),
            SbfScheme::GaussAlamouti => Ok(rate_sbf_alam_gauss(p)),
            SbfScheme::EllipAlamouti => rate_sbf_alam_ellip(p),
        }
    }

    /// `rate_mc(p) − rate(p)`.
    pub fn gap(&self, p: &SchemeParams) -> Result<f64> {
        Ok(rate_mc(p) - self.rate(p)?)
    }
}

impl std::str::FromStr for SbfScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SbfScheme::ALL
            .into_iter()
            .find(|sch| sch.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown scheme '{s}'")))
    }
}

/// Multicast capacity `log(1 + ρ_min P)`.
pub fn rate_mc(p: &SchemeParams) -> f64 {
    p.snr().ln_1p()
}

// Below this SNR the Gaussian closed forms switch to their small-SNR series.
const SMALL_SNR: f64 = 1e-3;

/// Σ_{i≥1} (−1)^{i+1} a^i E[X^i] / i, with `moment(i) = E[X^i]`, summed until
/// the terms stop shrinking. Asymptotic for unbounded X, so only used at
/// small `a`.
fn log1p_moment_series(a: f64, moment: impl Fn(u32) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for i in 1..200u32 {
        let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * a.powi(i as i32) * moment(i) / i as f64;
        if term.abs() >= prev {
            break;
        }
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        prev = term.abs();
    }
    sum
}

/// Gaussian SBF rate `e^{1/(ρP)} E₁(1/(ρP))`.
///
/// For `ρP < 1e−3` the asymptotic series `Σ (−1)^{i+1} (ρP)^i (i−1)!` is
/// used instead; at `ρP = 0` the rate is 0.
pub fn rate_sbf_gauss(p: &SchemeParams) -> f64 {
    let a = p.snr();
    if a == 0.0 {
        return 0.0;
    }
    if a < SMALL_SNR {
        // E[ξ^i] = i! for a unit-mean exponential
        return log1p_moment_series(a, |i| crate::specfun::factorial_f64(i as u64));
    }
    scaled_exp_integral_e1(1.0 / a).expect("positive argument")
}

/// `E[log(1 + aU)]` for `U ~ Beta(1, n)`, in the closed form
/// `(1 + 1/a)^n [log(1+a) − H_n − Σ_{k=1}^n C(n,k)(−1)^k / (k (1+a)^k)]`.
pub fn beta1_log_moment_closed(a: f64, n: usize) -> f64 {
    let one_a = 1.0 + a;
    let mut sum = 0.0;
    let mut binom = 1.0;
    for k in 1..=n {
        binom = binom * (n - k + 1) as f64 / k as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += binom * sign / (k as f64 * one_a.powi(k as i32));
    }
    (1.0 + 1.0 / a).powi(n as i32) * (a.ln_1p() - harmonic_f64(n as u64) - sum)
}

/// Power series of `E[log(1 + aU)]`, `U ~ Beta(1, n)`, convergent for `a < 1`:
/// `Σ_{i≥1} (−1)^{i+1} a^i (i−1)! n! / (i+n)!`.
fn beta1_log_moment_series(a: f64, n: usize) -> f64 {
    let mut sum = 0.0;
    // c_i = a^i (i−1)! n!/(i+n)!, c_1 = a/(n+1)
    let mut c = a / (n as f64 + 1.0);
    for i in 1..2000usize {
        let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * c;
        if c < 1e-18 * sum.abs() {
            break;
        }
        c *= a * i as f64 / (i + n + 1) as f64;
    }
    sum
}

/// `E[log(1 + aU)]`, `U ~ Beta(1, n)`, choosing the series where the closed
/// form's leading factor `(1 + 1/a)^n` would amplify cancellation error.
pub fn beta1_log_moment(a: f64, n: usize) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if n == 0 {
        return a.ln_1p();
    }
    let amplification = n as f64 * (1.0 / a).ln_1p();
    if a < 0.5 && amplification > 1e4f64.ln() {
        beta1_log_moment_series(a, n)
    } else {
        beta1_log_moment_closed(a, n)
    }
}

/// Elliptic SBF rate: the effective gain is `r·Beta(1, r−1)`, so the rate is
/// `E[log(1 + rρP U)]` with `U ~ Beta(1, r−1)`. Equals `rate_mc` for `r = 1`.
pub fn rate_sbf_ellip(p: &SchemeParams) -> f64 {
    let r = p.rank();
    beta1_log_moment(r as f64 * p.snr(), r - 1)
}

/// Gaussian SBF-Alamouti rate `(1 − 2/(ρP)) e^{2/(ρP)} E₁(2/(ρP)) + 1`.
pub fn rate_sbf_alam_gauss(p: &SchemeParams) -> f64 {
    let a = p.snr();
    if a == 0.0 {
        return 0.0;
    }
    if a < SMALL_SNR {
        // ξ ~ Gamma(2, rate 2): E[ξ^i] = (i+1)!/2^i
        return log1p_moment_series(a, |i| {
            crate::specfun::factorial_f64(i as u64 + 1) / 2f64.powi(i as i32)
        });
    }
    let x = 2.0 / a;
    (1.0 - x) * scaled_exp_integral_e1(x).expect("positive argument") + 1.0
}

/// Elliptic SBF-Alamouti rate, `C₁ − C₂` with
/// `C₁ = (2r−1)·E[log(1+aU₁)]`, `U₁ ~ Beta(1, 2r−2)` and
/// `C₂ = (2r−2)·E[log(1+aU₂)]`, `U₂ ~ Beta(1, 2r−1)`, `a = rρP`.
pub fn rate_sbf_alam_ellip(p: &SchemeParams) -> Result<f64> {
    let r = p.rank();
    if r < 2 {
        return Err(Error::InvalidParams(format!(
            "elliptic SBF-Alamouti needs rank >= 2, got {r}"
        )));
    }
    let a = r as f64 * p.snr();
    let n = 2 * r - 2;
    Ok((2 * r - 1) as f64 * beta1_log_moment(a, n) - n as f64 * beta1_log_moment(a, n + 1))
}

/// The raw two-bracket closed form for elliptic SBF-Alamouti, without the
/// small-SNR series switch.
pub fn rate_sbf_alam_ellip_closed(p: &SchemeParams) -> Result<f64> {
    let r = p.rank();
    if r < 2 {
        return Err(Error::InvalidParams(format!(
            "elliptic SBF-Alamouti needs rank >= 2, got {r}"
        )));
    }
    let a = r as f64 * p.snr();
    let n = 2 * r - 2;
    Ok((2 * r - 1) as f64 * beta1_log_moment_closed(a, n)
        - n as f64 * beta1_log_moment_closed(a, n + 1))
}

/// Limit of the rate gap as `P → ∞`.
pub fn gap_limit(scheme: SbfScheme, rank: usize) -> Result<f64> {
    if rank < scheme.min_rank() {
        return Err(Error::InvalidParams(format!(
            "{} needs rank >= {}, got {rank}",
            scheme.name(),
            scheme.min_rank()
        )));
    }
    let r = rank as u64;
    Ok(match scheme {
        SbfScheme::GaussSbf => EULER_GAMMA,
        SbfScheme::EllipSbf => harmonic_f64(r - 1) - (rank as f64).ln(),
        SbfScheme::GaussAlamouti => std::f64::consts::LN_2 + EULER_GAMMA - 1.0,
        SbfScheme::EllipAlamouti => harmonic_f64(2 * r - 1) - (rank as f64).ln() - 1.0,
    })
}

/// Per-user parameters of the Bingham SBF rate.
#[derive(Debug, Clone, PartialEq)]
pub struct BinghamUserParams {
    rho_i: f64,
    mu: Vec<f64>,
    lambda: Vec<f64>,
}

impl BinghamUserParams {
    pub fn new(rho_i: f64, mu: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
        if !(rho_i > 0.0 && rho_i.is_finite()) {
            return Err(Error::InvalidParams(format!("rho_i must be positive, got {rho_i}")));
        }
        if mu.len() != lambda.len() {
            return Err(Error::DimensionMismatch { expected: lambda.len(), got: mu.len() });
        }
        if mu.iter().chain(&lambda).any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParams("mu and lambda must be nonnegative".into()));
        }
        if !mu.iter().any(|&v| v > 0.0) {
            return Err(Error::InvalidParams("mu needs at least one positive entry".into()));
        }
        let total: f64 = lambda.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("lambda must sum to 1, sums to {total}")));
        }
        Ok(BinghamUserParams { rho_i, mu, lambda })
    }

    pub fn rho_i(&self) -> f64 {
        self.rho_i
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn normalized_mu(&self) -> Vec<f64> {
        let s: f64 = self.mu.iter().sum();
        self.mu.iter().map(|m| m / s).collect()
    }
}

/// φ(d) = E[log Σ d_k ζ_k] over i.i.d. unit-mean exponentials.
pub fn phi_exp_mixture(mix: &ExponentialMixture) -> Result<f64> {
    mix.phi()
}

/// φ for a raw weight vector; zero weights are dropped and equal weights merged.
pub fn phi_weights(d: &[f64]) -> Result<f64> {
    ExponentialMixture::from_weights(d)?.phi()
}

/// Bingham SBF rate of user i: `log(1 + ρ_i P) + φ(μ_i/1ᵀμ_i) − φ(λ)`.
pub fn rate_bingham_user(bp: &BinghamUserParams, power: f64) -> Result<f64> {
    if !(power >= 0.0 && power.is_finite()) {
        return Err(Error::InvalidParams(format!("power must be nonnegative, got {power}")));
    }
    let mu_mix = ExponentialMixture::from_weights(&bp.normalized_mu())?;
    let lambda_mix = ExponentialMixture::from_weights(&bp.lambda)?;
    Ok((bp.rho_i * power).ln_1p() + mu_mix.phi()? - lambda_mix.phi()?)
}
