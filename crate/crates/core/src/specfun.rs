//! Special functions and exact combinatorial sums behind the rate formulas.
//!
//! Floating-point routines work in natural logarithms throughout. The
//! binomial/harmonic sums are evaluated in arbitrary-precision rationals so
//! the identities they satisfy can be checked exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number with arbitrary-precision numerator and denominator.
///
/// `BigRational` keeps the denominator positive and the fraction reduced.
pub type Rational = BigRational;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn euler_gamma() -> f64 {
    EULER_GAMMA
}

// Below this argument E1 uses its power series, above it the continued fraction.
const E1_SWITCH: f64 = 1.0;

fn e1_series(x: f64) -> f64 {
    // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    let mut sum = 0.0;
    let mut term = 1.0; // (-x)^k / k!
    for k in 1..200 {
        term *= -x / k as f64;
        let contrib = term / k as f64;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Continued fraction for e^x E1(x), modified Lentz, valid for x >= 1.
fn scaled_e1_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} requires a positive argument, got {x}")))
    }
}

/// Exponential integral E1(x) = ∫₁^∞ t⁻¹ e^{-xt} dt for x > 0.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_positive(x, "E1")?;
    if x <= E1_SWITCH {
        Ok(e1_series(x))
    } else {
        Ok(scaled_e1_cf(x) * (-x).exp())
    }
}

/// e^x E1(x), evaluated without forming e^x so that large arguments neither
/// overflow nor underflow. Behaves like 1/x as x grows.
pub fn scaled_exp_integral_e1(x: f64) -> Result<f64> {
    check_positive(x, "scaled E1")?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= E1_SWITCH {
        Ok(x.exp() * e1_series(x))
    } else {
        Ok(scaled_e1_cf(x))
    }
}

/// Upper incomplete gamma Γ(α, x) for α ∈ {0, −1}.
///
/// Γ(0, x) is E1(x) on the same code path; Γ(−1, x) = e^{−x}/x − Γ(0, x).
pub fn upper_incomplete_gamma_nonpos(alpha: i32, x: f64) -> Result<f64> {
    check_positive(x, "upper incomplete gamma")?;
    match alpha {
        0 => exp_integral_e1(x),
        -1 => Ok((-x).exp() / x - exp_integral_e1(x)?),
        _ => Err(Error::Domain(format!(
            "upper incomplete gamma only supports alpha in {{0, -1}}, got {alpha}"
        ))),
    }
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn frac(num: BigInt, den: BigInt) -> Rational {
    Rational::new(num, den)
}

fn sign(k: u64) -> BigInt {
    if k % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Harmonic number H_n = Σ_{k=1}^n 1/k, with H₀ = 0.
pub fn harmonic(n: u64) -> Rational {
    (1..=n).fold(Rational::zero(), |acc, k| acc + frac(BigInt::one(), BigInt::from(k)))
}

pub fn harmonic_f64(n: u64) -> f64 {
    // Exact up to the final rounding; n stays small in every caller.
    if n <= 60 {
        rational_to_f64(&harmonic(n))
    } else {
        (1..=n).rev().map(|k| 1.0 / k as f64).sum()
    }
}

/// Σ_{k=1}^n C(n,k)(−1)^k / k. Equals −H_n.
pub fn alt_binom_over_k(n: u64) -> Rational {
    (1..=n).fold(Rational::zero(), |acc, k| {
        acc + frac(sign(k) * binomial(n, k), BigInt::from(k))
    })
}

/// Σ_{k=0}^n C(n,k)(−1)^k / (k+2). Equals 1/((n+2)(n+1)).
pub fn binom_id_shift2(n: u64) -> Rational {
    (0..=n).fold(Rational::zero(), |acc, k| {
        acc + frac(sign(k) * binomial(n, k), BigInt::from(k + 2))
    })
}

/// Σ_{k=0}^n C(n,k)(−1)^k / (k+2)². Equals (H_{n+2} − 1)/((n+2)(n+1)).
pub fn binom_id_shift2_sq(n: u64) -> Rational {
    (0..=n).fold(Rational::zero(), |acc, k| {
        let d = BigInt::from(k + 2);
        acc + frac(sign(k) * binomial(n, k), &d * &d)
    })
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    // BigRational::to_f64 rounds correctly for the magnitudes used here.
    q.to_f64().unwrap_or_else(|| {
        q.numer().to_f64().unwrap_or(f64::NAN) / q.denom().to_f64().unwrap_or(f64::NAN)
    })
}

pub fn factorial_f64(n: u64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// θ(d, n) = ∫₀^∞ zⁿ e^{−z/d} log z dz = n!·d^{n+1}·(H_n − γ + log d).
pub fn theta(d: f64, n: u64) -> Result<f64> {
    check_positive(d, "theta")?;
    Ok(factorial_f64(n) * d.powi(n as i32 + 1) * (harmonic_f64(n) - EULER_GAMMA + d.ln()))
}
