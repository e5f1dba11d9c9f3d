//! Weighted sums of i.i.d. unit-mean exponentials.
//!
//! `ζ = Σ d_k ζ_k` has Laplace transform `Π_n (1 + s d̃_n)^{−r_n}` once equal
//! weights are grouped into distinct means `d̃_n` with multiplicities `r_n`.
//! The density follows from a partial-fraction expansion of that transform,
//! and the log-moment `E[log ζ]` from integrating each Erlang-type term
//! against `log z`.

use crate::error::{Error, Result};
use crate::specfun::{factorial_f64, theta};

/// Relative tolerance under which two weights are treated as the same mean.
pub const MERGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialMixture {
    distinct_means: Vec<f64>,
    multiplicities: Vec<usize>,
    /// `psi[k][m-1]` for `m = 1..=r_k`.
    psi: Vec<Vec<f64>>,
    dropped_zeros: usize,
}

impl ExponentialMixture {
    /// Builds the mixture from distinct means and their multiplicities.
    pub fn new(distinct_means: Vec<f64>, multiplicities: Vec<usize>) -> Result<Self> {
        if distinct_means.is_empty() {
            return Err(Error::DegenerateMixture);
        }
        if distinct_means.len() != multiplicities.len() {
            return Err(Error::DimensionMismatch {
                expected: distinct_means.len(),
                got: multiplicities.len(),
            });
        }
        if let Some(&d) = distinct_means.iter().find(|&&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidParams(format!("mixture means must be positive, got {d}")));
        }
        if multiplicities.iter().any(|&r| r == 0) {
            return Err(Error::InvalidParams("multiplicities must be at least 1".into()));
        }
        // Sort decreasing, carrying multiplicities along.
        let mut pairs: Vec<(f64, usize)> =
            distinct_means.into_iter().zip(multiplicities).collect();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let max = pairs[0].0;
        for w in pairs.windows(2) {
            if (w[0].0 - w[1].0).abs() < MERGE_TOL * max {
                return Err(Error::CoincidentMeans(w[0].0, w[1].0));
            }
        }
        let (means, mults): (Vec<f64>, Vec<usize>) = pairs.into_iter().unzip();
        let psi = partial_fraction_coeffs(&means, &mults)?;
        Ok(ExponentialMixture {
            distinct_means: means,
            multiplicities: mults,
            psi,
            dropped_zeros: 0,
        })
    }

    /// Groups a raw nonnegative weight vector into distinct means.
    ///
    /// Zero weights contribute nothing to `Σ d_k ζ_k` and are dropped; the
    /// number removed is available from [`dropped_zeros`](Self::dropped_zeros).
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|&&w| !(w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParams(format!("weights must be nonnegative, got {w}")));
        }
        let mut positive: Vec<f64> = weights.iter().copied().filter(|&w| w > 0.0).collect();
        let dropped = weights.len() - positive.len();
        if positive.is_empty() {
            return Err(Error::DegenerateMixture);
        }
        positive.sort_by(|a, b| b.total_cmp(a));
        let max = positive[0];
        let mut means: Vec<f64> = Vec::new();
        let mut mults: Vec<usize> = Vec::new();
        let mut sums: Vec<f64> = Vec::new();
        for w in positive {
            match means.last() {
                Some(&last) if (last - w).abs() < MERGE_TOL * max => {
                    *mults.last_mut().unwrap() += 1;
                    *sums.last_mut().unwrap() += w;
                }
                _ => {
                    means.push(w);
                    mults.push(1);
                    sums.push(w);
                }
            }
        }
        let means = sums.iter().zip(&mults).map(|(s, &r)| s / r as f64).collect();
        let mut mix = Self::new(means, mults)?;
        mix.dropped_zeros = dropped;
        Ok(mix)
    }

    pub fn distinct_means(&self) -> &[f64] {
        &self.distinct_means
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn psi(&self) -> &[Vec<f64>] {
        &self.psi
    }

    pub fn dropped_zeros(&self) -> usize {
        self.dropped_zeros
    }

    /// Total number of exponential components, `Σ r_n`.
    pub fn total_rank(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.distinct_means
            .iter()
            .zip(&self.multiplicities)
            .map(|(d, &r)| d * r as f64)
            .sum()
    }

    /// The full weight vector, each distinct mean repeated by its multiplicity.
    pub fn expanded_weights(&self) -> Vec<f64> {
        self.distinct_means
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&d, &r)| std::iter::repeat(d).take(r))
            .collect()
    }

    fn prefactor(&self) -> f64 {
        self.distinct_means
            .iter()
            .zip(&self.multiplicities)
            .map(|(d, &r)| d.powi(-(r as i32)))
            .product()
    }

    /// Coefficients `c` of the terms `z^j e^{−z/d̃_k} / j!` in the density,
    /// as `(d̃_k, j, c)`.
    fn terms(&self) -> impl Iterator<Item = (f64, usize, f64)> + '_ {
        let pre = self.prefactor();
        self.distinct_means
            .iter()
            .zip(&self.multiplicities)
            .zip(&self.psi)
            .flat_map(move |((&d, &r), psi_k)| {
                (1..=r).map(move |m| {
                    let j = r - m;
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    (d, j, pre * psi_k[m - 1] * sign)
                })
            })
    }

    /// Density of `Σ d_k ζ_k` at `z`.
    pub fn pdf(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        self.terms()
            .map(|(d, j, c)| c * z.powi(j as i32) * (-z / d).exp() / factorial_f64(j as u64))
            .sum()
    }

    pub fn cdf(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let v: f64 = self
            .terms()
            .map(|(d, j, c)| {
                // ∫_0^z x^j e^{-x/d} / j! dx = d^{j+1} (1 - e^{-z/d} Σ_{i<=j} (z/d)^i / i!)
                let u = z / d;
                let mut partial = 0.0;
                let mut t = 1.0;
                for i in 0..=j {
                    if i > 0 {
                        t *= u / i as f64;
                    }
                    partial += t;
                }
                c * d.powi(j as i32 + 1) * (1.0 - (-u).exp() * partial)
            })
            .sum();
        v.clamp(0.0, 1.0)
    }

    /// `E[log Σ d_k ζ_k]` from the partial-fraction density and θ.
    pub fn phi(&self) -> Result<f64> {
        let mut acc = 0.0;
        for (d, j, c) in self.terms() {
            acc += c / factorial_f64(j as u64) * theta(d, j as u64)?;
        }
        Ok(acc)
    }
}

/// Partial-fraction coefficients `Ψ_{k,m}` of the mixture density.
///
/// With `β_n = 1/d̃_n` and `G_k(s) = Π_{n≠k} (s + β_n)^{−r_n}`, the
/// coefficient of `1/(s+β_k)^{r_k−m+1}` is `G_k^{(m−1)}(−β_k)/(m−1)!`;
/// `Ψ_{k,m}` carries the extra sign `(−1)^{r_k−m}` so that the density reads
/// `Π d̃_n^{−r_n} Σ_k Σ_m Ψ_{k,m}/(r_k−m)! (−1)^{r_k−m} z^{r_k−m} e^{−z/d̃_k}`.
pub fn partial_fraction_coeffs(distinct_means: &[f64], multiplicities: &[usize]) -> Result<Vec<Vec<f64>>> {
    if distinct_means.len() != multiplicities.len() {
        return Err(Error::DimensionMismatch {
            expected: distinct_means.len(),
            got: multiplicities.len(),
        });
    }
    let max = distinct_means.iter().cloned().fold(0.0, f64::max);
    for (i, &a) in distinct_means.iter().enumerate() {
        if !(a > 0.0) {
            return Err(Error::InvalidParams(format!("mixture means must be positive, got {a}")));
        }
        for &b in &distinct_means[i + 1..] {
            if (a - b).abs() < MERGE_TOL * max {
                return Err(Error::CoincidentMeans(a, b));
            }
        }
    }
    let betas: Vec<f64> = distinct_means.iter().map(|d| 1.0 / d).collect();
    let mut psi = Vec::with_capacity(betas.len());
    for (k, &beta_k) in betas.iter().enumerate() {
        let r_k = multiplicities[k];
        // Offsets s + β_n evaluated at s = −β_k.
        let others: Vec<(f64, f64)> = betas
            .iter()
            .zip(multiplicities)
            .enumerate()
            .filter(|&(n, _)| n != k)
            .map(|(_, (&b, &r))| (b - beta_k, r as f64))
            .collect();
        // Derivatives of L = (log G)' = −Σ r_n/(s+β_n):
        // L^{(q)} = −Σ r_n (−1)^q q! (s+β_n)^{−(q+1)}.
        let l_deriv: Vec<f64> = (0..r_k)
            .map(|q| {
                let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                -others
                    .iter()
                    .map(|&(off, r)| r * sign * factorial_f64(q as u64) * off.powi(-(q as i32 + 1)))
                    .sum::<f64>()
            })
            .collect();
        let g0: f64 = others.iter().map(|&(off, r)| off.powi(-(r as i32))).product();
        // G^{(p)} = Σ_{q<p} C(p−1, q) L^{(q)} G^{(p−1−q)}.
        let mut g = vec![g0];
        for p in 1..r_k {
            let mut v = 0.0;
            let mut binom = 1.0;
            for q in 0..p {
                if q > 0 {
                    binom = binom * (p - q) as f64 / q as f64;
                }
                v += binom * l_deriv[q] * g[p - 1 - q];
            }
            g.push(v);
        }
        let row = (1..=r_k)
            .map(|m| {
                let sign = if (r_k - m) % 2 == 0 { 1.0 } else { -1.0 };
                sign * g[m - 1] / factorial_f64(m as u64 - 1)
            })
            .collect();
        psi.push(row);
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::EULER_GAMMA;

    #[test]
    fn single_component_is_exponential() {
        let mix = ExponentialMixture::new(vec![2.0], vec![1]).unwrap();
        assert_eq!(mix.psi(), &[vec![1.0]]);
        for &z in &[0.0, 0.5, 3.0] {
            assert!((mix.pdf(z) - 0.5 * (-z / 2.0).exp()).abs() < 1e-15);
        }
        assert!((mix.phi().unwrap() - (2.0f64.ln() - EULER_GAMMA)).abs() < 1e-15);
    }

    #[test]
    fn two_distinct_means_convolution() {
        let mix = ExponentialMixture::new(vec![2.0, 1.0], vec![1, 1]).unwrap();
        for &z in &[0.0f64, 0.3, 1.0, 4.0, 10.0] {
            let want = (-z / 2.0).exp() - (-z).exp();
            assert!((mix.pdf(z) - want).abs() < 1e-14, "z = {z}");
        }
    }

    #[test]
    fn erlang_through_multiplicity() {
        let mix = ExponentialMixture::from_weights(&[1.0, 1.0]).unwrap();
        assert_eq!(mix.multiplicities(), &[2]);
        for &z in &[0.1, 1.0, 2.5] {
            assert!((mix.pdf(z) - z * (-z).exp()).abs() < 1e-14);
            assert!((mix.cdf(z) - (1.0 - (-z).exp() * (1.0 + z))).abs() < 1e-14);
        }
    }

    #[test]
    fn distinct_case_matches_classical_mixture() {
        let d = [3.0, 1.5, 0.7, 0.2];
        let mix = ExponentialMixture::from_weights(&d).unwrap();
        for &z in &[0.05, 0.7, 2.0, 9.0] {
            let classical: f64 = d
                .iter()
                .enumerate()
                .map(|(k, &dk)| {
                    let w: f64 = d
                        .iter()
                        .enumerate()
                        .filter(|&(n, _)| n != k)
                        .map(|(_, &dn)| dk / (dk - dn))
                        .product();
                    w * (-z / dk).exp() / dk
                })
                .sum();
            assert!((mix.pdf(z) - classical).abs() < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn zeros_dropped_and_counted() {
        let mix = ExponentialMixture::from_weights(&[0.0, 0.5, 0.0, 0.5]).unwrap();
        assert_eq!(mix.dropped_zeros(), 2);
        assert_eq!(mix.total_rank(), 2);
        assert!(matches!(
            ExponentialMixture::from_weights(&[0.0, 0.0]),
            Err(Error::DegenerateMixture)
        ));
    }

    #[test]
    fn coincident_means_rejected() {
        let r = ExponentialMixture::new(vec![1.0, 1.0 + 1e-13], vec![1, 1]);
        assert!(matches!(r, Err(Error::CoincidentMeans(..))));
    }

    #[test]
    fn negative_weight_rejected() {
        assert!(ExponentialMixture::from_weights(&[1.0, -0.1]).is_err());
    }
}
