//! Monte Carlo rate estimates from sampled beamforming weights.

use super::SbfScheme;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::sampling::{SeededStream, WeightLaw, WeightSampler};
use crate::stats::{MeanAccumulator, RateEstimate};
use crate::Complex64;
use rayon::prelude::*;

const CHUNK: usize = 8192;

/// Weight sampler and probe channel realizing gain `ρ` at rank `r`:
/// `W = I_r / r` and `h = √(rρ) e₁`, so `hᴴWh = ρ`.
fn probe(scheme: SbfScheme, rank: usize, rho: f64) -> (WeightSampler, CVector) {
    let law = match scheme {
        SbfScheme::GaussSbf | SbfScheme::GaussAlamouti => WeightLaw::Gaussian,
        SbfScheme::EllipSbf | SbfScheme::EllipAlamouti => WeightLaw::Elliptic,
    };
    let root = CMatrix::identity(rank, rank).scale(1.0 / (rank as f64).sqrt());
    let mut h = CVector::zeros(rank);
    h[0] = Complex64::new((rank as f64 * rho).sqrt(), 0.0);
    (WeightSampler::from_root(law, root), h)
}

/// Empirical `E[log(1 + ρPξ)]` for each power in `powers`, where `ξ` is the
/// normalized gain produced by the scheme's weight sampler. All powers share
/// the same weight draws.
pub fn rate_monte_carlo(
    scheme: SbfScheme,
    rank: usize,
    rho: f64,
    powers: &[f64],
    n_samples: usize,
    stream: SeededStream,
) -> Result<Vec<RateEstimate>> {
    if n_samples == 0 || rank == 0 || !(rho > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need n_samples >= 1, rank >= 1, rho > 0; got {n_samples}, {rank}, {rho}"
        )));
    }
    let (sampler, h) = probe(scheme, rank, rho);
    let alamouti = matches!(scheme, SbfScheme::GaussAlamouti | SbfScheme::EllipAlamouti);
    let n_chunks = n_samples.div_ceil(CHUNK);
    let chunks: Vec<Vec<MeanAccumulator>> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.fork(k as u64).rng();
            let count = CHUNK.min(n_samples - k * CHUNK);
            let mut acc = vec![MeanAccumulator::new(); powers.len()];
            for _ in 0..count {
                // |hᴴw|² equals ρ times the normalized gain
                let g = if alamouti {
                    let (w1, w2) = sampler.sample_pair(&mut rng);
                    (h.dotc(&w1).norm_sqr() + h.dotc(&w2).norm_sqr()) / 2.0
                } else {
                    h.dotc(&sampler.sample(&mut rng)).norm_sqr()
                };
                for (a, &p) in acc.iter_mut().zip(powers) {
                    a.push((p * g).ln_1p());
                }
            }
            acc
        })
        .collect();
    let mut total = vec![MeanAccumulator::new(); powers.len()];
    for chunk in &chunks {
        for (t, c) in total.iter_mut().zip(chunk) {
            t.merge(c);
        }
    }
    Ok(total.iter().map(RateEstimate::from).collect())
}

/// Normalized gains `|hᴴw|²/ρ` drawn through the weight sampler.
pub fn sample_gains_via_weights(
    scheme: SbfScheme,
    rank: usize,
    n_samples: usize,
    stream: SeededStream,
) -> Vec<f64> {
    let (sampler, h) = probe(scheme, rank, 1.0);
    let mut rng = stream.rng();
    (0..n_samples)
        .map(|_| match scheme {
            SbfScheme::GaussAlamouti | SbfScheme::EllipAlamouti => {
                let (w1, w2) = sampler.sample_pair(&mut rng);
                (h.dotc(&w1).norm_sqr() + h.dotc(&w2).norm_sqr()) / 2.0
            }
            _ => h.dotc(&sampler.sample(&mut rng)).norm_sqr(),
        })
        .collect()
}
