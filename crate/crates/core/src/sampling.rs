//! Seed-reproducible generators for channels, beamforming weights and the
//! effective-gain laws.
//!
//! Every random draw comes from a ChaCha8 keystream addressed by
//! `(seed, stream_id)`. Work that is split across threads forks one child
//! stream per work unit, so results never depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::gain::GainDistribution;
use crate::linalg::{hermitian_eigen, hermitian_residual, CMatrix, CVector};
use crate::Complex64;

pub type StreamRng = ChaCha8Rng;

/// Relative eigenvalue threshold for the numerical rank of a PSD matrix.
pub const RANK_TOL: f64 = 1e-9;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Address of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        SeededStream { seed, stream_id }
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Child stream number `index`; distinct indices give independent streams.
    pub fn fork(&self, index: u64) -> SeededStream {
        SeededStream {
            seed: splitmix64(self.seed ^ splitmix64(self.stream_id)),
            stream_id: index,
        }
    }
}

/// Standard circular complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    CVector::from_fn(n, |_, _| complex_gaussian(rng))
}

/// The multicast user population: `M` channel vectors of dimension `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    channels: Vec<CVector>,
}

impl ChannelSet {
    pub fn new(channels: Vec<CVector>) -> Result<Self> {
        let n = channels
            .first()
            .map(|h| h.len())
            .ok_or_else(|| Error::InvalidParams("a channel set needs at least one user".into()))?;
        if n == 0 {
            return Err(Error::InvalidParams("channel dimension must be at least 1".into()));
        }
        for h in &channels {
            if h.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: h.len() });
            }
            if h.iter().all(|z| z.norm_sqr() == 0.0) {
                return Err(Error::InvalidParams("channel set contains an all-zero channel".into()));
            }
        }
        Ok(ChannelSet { channels })
    }

    pub fn n(&self) -> usize {
        self.channels[0].len()
    }

    pub fn m(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[CVector] {
        &self.channels
    }

    pub fn get(&self, i: usize) -> &CVector {
        &self.channels[i]
    }
}

/// `M` channels with i.i.d. `CN(0, 1)` entries.
pub fn sample_channel_set(n: usize, m: usize, stream: SeededStream) -> Result<ChannelSet> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParams(format!("need n, m >= 1, got n={n}, m={m}")));
    }
    let mut rng = stream.rng();
    ChannelSet::new((0..m).map(|_| complex_gaussian_vector(n, &mut rng)).collect())
}

/// Square-root factor `B` (N×r) with `BBᴴ = W`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdRoot {
    pub root: CMatrix,
    pub rank: usize,
}

/// Eigendecomposition-based square root of a Hermitian PSD matrix, keeping
/// the eigenvalues above `RANK_TOL · λ_max`.
pub fn psd_sqrt(w: &CMatrix) -> Result<PsdRoot> {
    if w.nrows() != w.ncols() {
        return Err(Error::DimensionMismatch { expected: w.nrows(), got: w.ncols() });
    }
    let residual = hermitian_residual(w);
    if residual > 1e-10 {
        return Err(Error::NotHermitian { residual });
    }
    let (values, vectors) = hermitian_eigen(w);
    let lmax = values.first().copied().unwrap_or(0.0);
    if !(lmax > 0.0) {
        return Err(Error::InvalidParams("matrix has no positive eigenvalue".into()));
    }
    let rank = values.iter().filter(|&&v| v > RANK_TOL * lmax).count();
    let n = w.nrows();
    let root = CMatrix::from_fn(n, rank, |i, k| vectors[(i, k)] * values[k].sqrt());
    Ok(PsdRoot { root, rank })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightLaw {
    Gaussian,
    Elliptic,
}

/// Draws beamforming weights with covariance `W = BBᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSampler {
    pub scheme: WeightLaw,
    pub root: CMatrix,
    pub rank: usize,
}

impl WeightSampler {
    pub fn new(scheme: WeightLaw, covariance: &CMatrix) -> Result<Self> {
        let PsdRoot { root, rank } = psd_sqrt(covariance)?;
        Ok(WeightSampler { scheme, root, rank })
    }

    pub fn from_root(scheme: WeightLaw, root: CMatrix) -> Self {
        let rank = root.ncols();
        WeightSampler { scheme, root, rank }
    }

    pub fn dim(&self) -> usize {
        self.root.nrows()
    }

    /// One weight vector for per-symbol SBF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        match self.scheme {
            WeightLaw::Gaussian => &self.root * complex_gaussian_vector(self.rank, rng),
            WeightLaw::Elliptic => {
                let g = complex_gaussian_vector(self.rank, rng);
                let scale = (self.rank as f64).sqrt() / g.norm();
                (&self.root * g).scale(scale)
            }
        }
    }

    /// A weight pair for SBF-Alamouti.
    ///
    /// Gaussian: two independent draws. Elliptic: the stacked pair is uniform
    /// on a sphere of dimension `2r`, scaled by `√(2r)`, so each weight has
    /// covariance `W` and the normalized Alamouti gain is `r·Beta(2, 2r−2)`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (CVector, CVector) {
        match self.scheme {
            WeightLaw::Gaussian => (self.sample(rng), self.sample(rng)),
            WeightLaw::Elliptic => {
                let r = self.rank;
                let g = complex_gaussian_vector(2 * r, rng);
                let scale = ((2 * r) as f64).sqrt() / g.norm();
                let u1 = g.rows(0, r).into_owned();
                let u2 = g.rows(r, r).into_owned();
                ((&self.root * u1).scale(scale), (&self.root * u2).scale(scale))
            }
        }
    }
}

pub fn sample_gauss_sbf_weight<R: Rng + ?Sized>(ws: &WeightSampler, rng: &mut R) -> Result<CVector> {
    if ws.scheme != WeightLaw::Gaussian {
        return Err(Error::InvalidParams("sampler is not Gaussian".into()));
    }
    Ok(ws.sample(rng))
}

pub fn sample_ellip_sbf_weight<R: Rng + ?Sized>(ws: &WeightSampler, rng: &mut R) -> Result<CVector> {
    if ws.scheme != WeightLaw::Elliptic {
        return Err(Error::InvalidParams("sampler is not elliptic".into()));
    }
    Ok(ws.sample(rng))
}

/// Gamma variate with integer shape `k` and unit scale, as a sum of `k`
/// unit exponentials.
fn gamma_integer<R: Rng + ?Sized>(k: usize, rng: &mut R) -> f64 {
    (0..k).map(|_| rng.sample::<f64, _>(Exp1)).sum()
}

/// `Beta(a, b)` for integer shapes via the gamma ratio.
pub fn beta_integer<R: Rng + ?Sized>(a: usize, b: usize, rng: &mut R) -> f64 {
    let x = gamma_integer(a, rng);
    let y = gamma_integer(b, rng);
    x / (x + y)
}

pub fn sample_exponential_vector<R: Rng + ?Sized>(r: usize, rng: &mut R) -> Vec<f64> {
    (0..r).map(|_| rng.sample(Exp1)).collect()
}

/// One draw of the effective gain `t` from `law`.
pub fn sample_effective_gain<R: Rng + ?Sized>(law: &GainDistribution, rng: &mut R) -> Result<f64> {
    law.validate()?;
    Ok(match law {
        GainDistribution::Exponential => rng.sample(Exp1),
        GainDistribution::EllipticBeta { rank } => *rank as f64 * beta_integer(1, rank - 1, rng),
        GainDistribution::ChiSquare4 => 0.5 * gamma_integer(2, rng),
        GainDistribution::EllipticAlamoutiBeta { rank } => {
            *rank as f64 * beta_integer(2, 2 * rank - 2, rng)
        }
        GainDistribution::ExponentialMixture(mix) => mix
            .distinct_means()
            .iter()
            .zip(mix.multiplicities())
            .map(|(&d, &r)| d * gamma_integer(r, rng))
            .sum(),
        GainDistribution::PointMass(t) => *t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::outer;

    #[test]
    fn stream_replay_is_identical() {
        let s = SeededStream::new(42, 7);
        let a: Vec<u64> = (0..8).map({
            let mut r = s.rng();
            move |_| r.gen()
        }).collect();
        let b: Vec<u64> = (0..8).map({
            let mut r = s.rng();
            move |_| r.gen()
        }).collect();
        assert_eq!(a, b);
        let mut other = SeededStream::new(42, 8).rng();
        assert_ne!(a[0], other.gen::<u64>());
        assert_ne!(s.fork(0), s.fork(1));
    }

    #[test]
    fn channel_set_validation() {
        assert!(sample_channel_set(0, 3, SeededStream::new(1, 0)).is_err());
        let z = CVector::zeros(3);
        assert!(ChannelSet::new(vec![z]).is_err());
        let a = CVector::from_element(2, Complex64::new(1.0, 0.0));
        let b = CVector::from_element(3, Complex64::new(1.0, 0.0));
        assert!(ChannelSet::new(vec![a, b]).is_err());
    }

    #[test]
    fn sqrt_of_scaled_identity() {
        let n = 4;
        let w = CMatrix::identity(n, n).scale(1.0 / n as f64);
        let PsdRoot { root, rank } = psd_sqrt(&w).unwrap();
        assert_eq!(rank, n);
        assert!((&root * root.adjoint() - &w).norm() < 1e-14);
    }

    #[test]
    fn sqrt_of_rank_one() {
        let mut rng = SeededStream::new(3, 0).rng();
        let h = complex_gaussian_vector(4, &mut rng);
        let w = outer(&h).unscale(h.norm_squared());
        let PsdRoot { root, rank } = psd_sqrt(&w).unwrap();
        assert_eq!(rank, 1);
        // B ∝ h/‖h‖ up to a phase
        let b = root.column(0).into_owned();
        let overlap = h.dotc(&b).norm() / h.norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_rejects_non_hermitian() {
        let mut w = CMatrix::identity(2, 2);
        w[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(matches!(psd_sqrt(&w), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn elliptic_rank_one_gain_is_constant() {
        let mut w = CMatrix::zeros(3, 3);
        w[(0, 0)] = Complex64::new(1.0, 0.0);
        let ws = WeightSampler::new(WeightLaw::Elliptic, &w).unwrap();
        let h = CVector::from_element(3, Complex64::new(0.5, -1.0));
        let rho = h[0].norm_sqr();
        let mut rng = SeededStream::new(9, 0).rng();
        for _ in 0..100 {
            let wv = ws.sample(&mut rng);
            let t = h.dotc(&wv).norm_sqr() / rho;
            assert!((t - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_sampler_kind_rejected() {
        let w = CMatrix::identity(2, 2).scale(0.5);
        let ws = WeightSampler::new(WeightLaw::Gaussian, &w).unwrap();
        let mut rng = SeededStream::new(1, 1).rng();
        assert!(sample_ellip_sbf_weight(&ws, &mut rng).is_err());
        assert!(sample_gauss_sbf_weight(&ws, &mut rng).is_ok());
    }

    #[test]
    fn elliptic_rank_one_law_is_point_mass() {
        let mut rng = SeededStream::new(5, 0).rng();
        let t = sample_effective_gain(&GainDistribution::EllipticBeta { rank: 1 }, &mut rng).unwrap();
        assert_eq!(t, 1.0);
    }
}
