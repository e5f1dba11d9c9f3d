//! Symbol-level multicast link simulator (uncoded).
//!
//! Noise is `CN(0, 1)` at every user; the transmit power `P` carries the
//! SNR. Receivers know their effective channel exactly.

pub mod constellation;
pub mod detect;
pub mod stbc;

pub use constellation::{bit_errors, Constellation, ConstellationKind};
pub use detect::{ml_detect_exhaustive, qostbc_detect_full, qostbc_detect_pairwise, SEARCH_LIMIT};
pub use stbc::{
    alamouti_combine, alamouti_encode, qostbc_encode, qostbc_equivalent_channel, qostbc_observation,
    qostbc_unknowns,
};

use crate::capacity::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::sampling::{complex_gaussian, ChannelSet, SeededStream, StreamRng, WeightLaw, WeightSampler};
use crate::stats::{MeanAccumulator, RateEstimate};
use crate::Complex64;
use rand::Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkScheme {
    Beamforming,
    GaussSbf,
    EllipSbf,
    BfAlamouti,
    GaussSbfAlamouti,
    EllipSbfAlamouti,
    PrecodedSm,
    PrecodedQostbc,
}

impl LinkScheme {
    pub const ALL: [LinkScheme; 8] = [
        LinkScheme::Beamforming,
        LinkScheme::GaussSbf,
        LinkScheme::EllipSbf,
        LinkScheme::BfAlamouti,
        LinkScheme::GaussSbfAlamouti,
        LinkScheme::EllipSbfAlamouti,
        LinkScheme::PrecodedSm,
        LinkScheme::PrecodedQostbc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            LinkScheme::Beamforming => "Beamforming",
            LinkScheme::GaussSbf => "GaussSBF",
            LinkScheme::EllipSbf => "EllipSBF",
            LinkScheme::BfAlamouti => "BfAlamouti",
            LinkScheme::GaussSbfAlamouti => "GaussSbfAlamouti",
            LinkScheme::EllipSbfAlamouti => "EllipSbfAlamouti",
            LinkScheme::PrecodedSm => "PrecodedSM",
            LinkScheme::PrecodedQostbc => "PrecodedQOSTBC",
        }
    }

    /// Channel uses per code block.
    pub fn block_length(&self) -> usize {
        match self {
            LinkScheme::BfAlamouti | LinkScheme::GaussSbfAlamouti | LinkScheme::EllipSbfAlamouti => 2,
            LinkScheme::PrecodedQostbc => 4,
            _ => 1,
        }
    }
}

impl std::str::FromStr for LinkScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LinkScheme::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown link scheme `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: LinkScheme,
    pub covariance: CovarianceMatrix,
    pub constellation: Constellation,
    pub power: f64,
    pub frame_length: usize,
}

/// Default frame length for a constellation.
pub fn default_frame_length(kind: ConstellationKind) -> usize {
    match kind {
        ConstellationKind::Qam16 => 720,
        _ => 1440,
    }
}

enum Precoding {
    Fixed(CVector),
    FixedPair(CVector, CVector),
    Sbf(WeightSampler),
    SbfPair(WeightSampler),
    Spatial { root: CMatrix },
    Qostbc { root: CMatrix },
}

/// A validated configuration with its precoder material precomputed.
pub struct Link {
    cfg: SchemeConfig,
    precoding: Precoding,
    symbols_per_block: usize,
}

enum BlockWeights {
    Single(CVector),
    Pair(CVector, CVector),
    Fixed,
}

struct Block {
    x: CMatrix,
    weights: BlockWeights,
}

impl Link {
    pub fn new(cfg: SchemeConfig) -> Result<Link> {
        if !(cfg.power >= 0.0) || !cfg.power.is_finite() {
            return Err(Error::InvalidParams(format!("power must be finite and >= 0, got {}", cfg.power)));
        }
        let bl = cfg.scheme.block_length();
        if cfg.frame_length == 0 || cfg.frame_length % bl != 0 {
            return Err(Error::InvalidParams(format!(
                "frame length {} is not a positive multiple of the block length {bl}",
                cfg.frame_length
            )));
        }
        let w = cfg.covariance.entries();
        let (values, vectors) = cfg.covariance.eigen();
        let root = cfg.covariance.sqrt()?.root;
        let rank = root.ncols();
        let (precoding, symbols_per_block) = match cfg.scheme {
            LinkScheme::Beamforming => (Precoding::Fixed(vectors.column(0).into_owned()), 1),
            LinkScheme::GaussSbf => (Precoding::Sbf(WeightSampler::new(WeightLaw::Gaussian, w)?), 1),
            LinkScheme::EllipSbf => (Precoding::Sbf(WeightSampler::new(WeightLaw::Elliptic, w)?), 1),
            LinkScheme::BfAlamouti => {
                let l1 = values[0].max(0.0);
                let l2 = values.get(1).copied().unwrap_or(0.0).max(0.0);
                let s = l1 + l2;
                let v2 = if vectors.ncols() > 1 {
                    vectors.column(1).into_owned()
                } else {
                    CVector::zeros(vectors.nrows())
                };
                let w1 = vectors.column(0).scale((2.0 * l1 / s).sqrt());
                let w2 = v2.scale((2.0 * l2 / s).sqrt());
                (Precoding::FixedPair(w1, w2), 2)
            }
            LinkScheme::GaussSbfAlamouti => {
                (Precoding::SbfPair(WeightSampler::new(WeightLaw::Gaussian, w)?), 2)
            }
            LinkScheme::EllipSbfAlamouti => {
                (Precoding::SbfPair(WeightSampler::new(WeightLaw::Elliptic, w)?), 2)
            }
            LinkScheme::PrecodedSm => {
                let size = (cfg.constellation.size() as u128).checked_pow(rank as u32).unwrap_or(u128::MAX);
                if size > SEARCH_LIMIT {
                    return Err(Error::SearchSpace { size, limit: SEARCH_LIMIT });
                }
                (Precoding::Spatial { root }, rank)
            }
            LinkScheme::PrecodedQostbc => {
                if rank > 4 {
                    return Err(Error::InvalidParams(format!(
                        "QOSTBC precoding supports rank <= 4, covariance has rank {rank}"
                    )));
                }
                let mut padded = CMatrix::zeros(root.nrows(), 4);
                padded.columns_mut(0, rank).copy_from(&root);
                (Precoding::Qostbc { root: padded }, 4)
            }
        };
        Ok(Link { cfg, precoding, symbols_per_block })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn blocks_per_frame(&self) -> usize {
        self.cfg.frame_length / self.cfg.scheme.block_length()
    }

    pub fn symbols_per_block(&self) -> usize {
        self.symbols_per_block
    }

    pub fn bits_per_frame(&self) -> usize {
        self.blocks_per_frame() * self.symbols_per_block * self.cfg.constellation.bits_per_symbol()
    }

    fn encode_block(&self, labels: &[usize], rng: &mut StreamRng) -> Block {
        let p = self.cfg.power;
        let c = &self.cfg.constellation;
        let s: Vec<Complex64> = labels.iter().map(|&l| c.point(l)).collect();
        let half = (p / 2.0).sqrt();
        let alamouti = |w1: &CVector, w2: &CVector| {
            let code = alamouti_encode(s[0], s[1]);
            let mut x = CMatrix::zeros(w1.len(), 2);
            for t in 0..2 {
                x.set_column(t, &(w1 * code[(t, 0)] + w2 * code[(t, 1)]).scale(half));
            }
            x
        };
        match &self.precoding {
            Precoding::Fixed(w) => Block { x: CMatrix::from_column_slice(w.len(), 1, (w * s[0]).scale(p.sqrt()).as_slice()), weights: BlockWeights::Fixed },
            Precoding::Sbf(ws) => {
                let w = ws.sample(rng);
                let x = CMatrix::from_column_slice(w.len(), 1, (&w * s[0]).scale(p.sqrt()).as_slice());
                Block { x, weights: BlockWeights::Single(w) }
            }
            Precoding::FixedPair(w1, w2) => Block { x: alamouti(w1, w2), weights: BlockWeights::Fixed },
            Precoding::SbfPair(ws) => {
                let (w1, w2) = ws.sample_pair(rng);
                Block { x: alamouti(&w1, &w2), weights: BlockWeights::Pair(w1, w2) }
            }
            Precoding::Spatial { root } => {
                let sv = CVector::from_column_slice(&s);
                let x = (root * sv).scale(p.sqrt());
                Block { x: CMatrix::from_column_slice(x.len(), 1, x.as_slice()), weights: BlockWeights::Fixed }
            }
            Precoding::Qostbc { root } => {
                let code = qostbc_encode([s[0], s[1], s[2], s[3]]);
                Block { x: (root * code).scale(p.sqrt()), weights: BlockWeights::Fixed }
            }
        }
    }

    fn draw_labels(&self, rng: &mut StreamRng) -> Vec<usize> {
        let m = self.cfg.constellation.size();
        (0..self.symbols_per_block).map(|_| rng.gen_range(0..m)).collect()
    }

    /// Detects one block at a user with channel `h` from received slots `y`.
    fn detect_block(&self, h: &CVector, block: &Block, y: &[Complex64]) -> Result<Vec<usize>> {
        let p = self.cfg.power;
        let c = &self.cfg.constellation;
        let half = (p / 2.0).sqrt();
        let gain = |w: &CVector| h.dotc(w);
        Ok(match (&self.precoding, &block.weights) {
            (Precoding::Fixed(w), _) | (Precoding::Sbf(_), BlockWeights::Single(w)) => {
                let g = gain(w) * p.sqrt();
                vec![nearest_scaled(c, y[0], g)]
            }
            (Precoding::FixedPair(w1, w2), _) | (Precoding::SbfPair(_), BlockWeights::Pair(w1, w2)) => {
                let g = [gain(w1) * half, gain(w2) * half];
                let z = alamouti_combine([y[0], y[1]], g);
                let e = g[0].norm_sqr() + g[1].norm_sqr();
                vec![nearest_scaled(c, z[0], Complex64::new(e, 0.0)), nearest_scaled(c, z[1], Complex64::new(e, 0.0))]
            }
            (Precoding::Spatial { root }, _) => {
                let av = root.adjoint() * h;
                let a = CMatrix::from_fn(1, av.len(), |_, k| av[k].conj() * p.sqrt());
                ml_detect_exhaustive(&CVector::from_element(1, y[0]), &a, c, self.symbols_per_block)?
            }
            (Precoding::Qostbc { root }, _) => {
                let a = qostbc_gains(root, h, p);
                let yt = CVector::from_column_slice(&qostbc_observation([y[0], y[1], y[2], y[3]]));
                qostbc_detect_pairwise(&yt, a, c)
            }
            _ => unreachable!("block weights always match the precoding"),
        })
    }
}

fn qostbc_gains(root: &CMatrix, h: &CVector, p: f64) -> [Complex64; 4] {
    let a = root.adjoint() * h;
    let s = p.sqrt();
    [a[0].conj() * s, a[1].conj() * s, a[2].conj() * s, a[3].conj() * s]
}

/// ML for `y = g s + n`: nearest point to `y/g`.
fn nearest_scaled(c: &Constellation, y: Complex64, g: Complex64) -> usize {
    if g.norm_sqr() == 0.0 {
        // No information: every hypothesis is equally likely.
        return 0;
    }
    c.nearest(y / g)
}

fn labels_from_bits(c: &Constellation, bits: &[u8]) -> Vec<usize> {
    bits.chunks(c.bits_per_symbol()).map(|b| c.label_from_bits(b)).collect()
}

/// Transmit signal (N × T) carrying `bits`; SBF weights are drawn from
/// `stream` per symbol (per block for the Alamouti variants).
pub fn transmit_frame(cfg: &SchemeConfig, bits: &[u8], stream: SeededStream) -> Result<CMatrix> {
    let link = Link::new(cfg.clone())?;
    let expected = link.bits_per_frame();
    if bits.len() != expected {
        return Err(Error::BitLength { expected, got: bits.len() });
    }
    let labels = labels_from_bits(&cfg.constellation, bits);
    let mut rng = stream.rng();
    let n = cfg.covariance.dim();
    let bl = cfg.scheme.block_length();
    let mut out = CMatrix::zeros(n, cfg.frame_length);
    for (b, chunk) in labels.chunks(link.symbols_per_block).enumerate() {
        let block = link.encode_block(chunk, &mut rng);
        out.columns_mut(b * bl, bl).copy_from(&block.x);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub per_user_ber: Vec<f64>,
    pub worst_user_ber: f64,
    /// Bits simulated per user.
    pub bits_simulated: u64,
    pub seed: SeededStream,
}

impl SimResult {
    /// `√(p(1−p)/bits)` for user `i`.
    pub fn half_width(&self, i: usize) -> f64 {
        let p = self.per_user_ber[i];
        (p * (1.0 - p) / self.bits_simulated as f64).sqrt()
    }

    pub fn worst_user(&self) -> usize {
        self.per_user_ber
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &b)| if b > acc.1 { (i, b) } else { acc })
            .0
    }

    pub fn worst_half_width(&self) -> f64 {
        self.half_width(self.worst_user())
    }
}

fn simulate_frame(link: &Link, ch: &ChannelSet, stream: SeededStream) -> Result<Vec<u64>> {
    let mut rng = stream.rng();
    let bl = link.cfg.scheme.block_length();
    let mut errors = vec![0u64; ch.m()];
    let mut y = vec![Complex64::new(0.0, 0.0); bl];
    for _ in 0..link.blocks_per_frame() {
        let labels = link.draw_labels(&mut rng);
        let block = link.encode_block(&labels, &mut rng);
        for (i, h) in ch.channels().iter().enumerate() {
            for (t, yt) in y.iter_mut().enumerate() {
                *yt = h.dotc(&block.x.column(t)) + complex_gaussian(&mut rng);
            }
            let detected = link.detect_block(h, &block, &y)?;
            errors[i] += labels.iter().zip(&detected).map(|(&a, &b)| bit_errors(a, b)).sum::<u64>();
        }
    }
    Ok(errors)
}

/// Per-user and worst-user uncoded BER over `n_frames` frames.
///
/// Frame `f` uses the stream `stream.fork(f)`, so the result does not depend
/// on the number of worker threads.
pub fn simulate_worst_user_ber(
    cfg: &SchemeConfig,
    ch: &ChannelSet,
    n_frames: usize,
    stream: SeededStream,
) -> Result<SimResult> {
    if n_frames == 0 {
        return Err(Error::InvalidParams("n_frames must be >= 1".into()));
    }
    if ch.n() != cfg.covariance.dim() {
        return Err(Error::DimensionMismatch { expected: cfg.covariance.dim(), got: ch.n() });
    }
    let link = Link::new(cfg.clone())?;
    let per_frame: Vec<Vec<u64>> = (0..n_frames as u64)
        .into_par_iter()
        .map(|f| simulate_frame(&link, ch, stream.fork(f)))
        .collect::<Result<_>>()?;
    let mut errors = vec![0u64; ch.m()];
    for fe in &per_frame {
        for (e, x) in errors.iter_mut().zip(fe) {
            *e += x;
        }
    }
    let bits = (n_frames * link.bits_per_frame()) as u64;
    let per_user_ber: Vec<f64> = errors.iter().map(|&e| e as f64 / bits as f64).collect();
    let worst_user_ber = per_user_ber.iter().cloned().fold(0.0, f64::max);
    Ok(SimResult { per_user_ber, worst_user_ber, bits_simulated: bits, seed: stream })
}

const RATE_CHUNK: usize = 4096;

fn qostbc_rate(a: [Complex64; 4]) -> f64 {
    let h = qostbc_equivalent_channel(a);
    let m = CMatrix::identity(4, 4) + h.adjoint() * h;
    // determinant of a Hermitian positive definite matrix is real
    0.25 * m.determinant().re.ln()
}

/// Per-user Monte Carlo estimates of the ergodic rate (nats per channel
/// use) with Gaussian inputs. All users share the same weight draws.
pub fn estimate_user_rates_mc(
    cfg: &SchemeConfig,
    ch: &ChannelSet,
    n_samples: usize,
    stream: SeededStream,
) -> Result<Vec<RateEstimate>> {
    if n_samples == 0 {
        return Err(Error::InvalidParams("n_samples must be >= 1".into()));
    }
    if ch.n() != cfg.covariance.dim() {
        return Err(Error::DimensionMismatch { expected: cfg.covariance.dim(), got: ch.n() });
    }
    let link = Link::new(cfg.clone())?;
    let p = cfg.power;
    let m = ch.m();
    let single = |w: &CVector, h: &CVector| (p * h.dotc(w).norm_sqr()).ln_1p();
    let pair = |w1: &CVector, w2: &CVector, h: &CVector| {
        (p * (h.dotc(w1).norm_sqr() + h.dotc(w2).norm_sqr()) / 2.0).ln_1p()
    };
    let deterministic: Option<Vec<f64>> = match &link.precoding {
        Precoding::Fixed(w) => Some(ch.channels().iter().map(|h| single(w, h)).collect()),
        Precoding::FixedPair(w1, w2) => Some(ch.channels().iter().map(|h| pair(w1, w2, h)).collect()),
        Precoding::Spatial { root } => Some(
            ch.channels().iter().map(|h| (p * (root.adjoint() * h).norm_squared()).ln_1p()).collect(),
        ),
        Precoding::Qostbc { root } => {
            Some(ch.channels().iter().map(|h| qostbc_rate(qostbc_gains(root, h, p))).collect())
        }
        _ => None,
    };
    if let Some(vals) = deterministic {
        return Ok(vals.into_iter().map(|mean| RateEstimate { mean, std_error: 0.0 }).collect());
    }
    let n_chunks = n_samples.div_ceil(RATE_CHUNK);
    let chunks: Vec<Vec<MeanAccumulator>> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.fork(k as u64).rng();
            let count = RATE_CHUNK.min(n_samples - k * RATE_CHUNK);
            let mut acc = vec![MeanAccumulator::new(); m];
            for _ in 0..count {
                match &link.precoding {
                    Precoding::Sbf(ws) => {
                        let w = ws.sample(&mut rng);
                        for (a, h) in acc.iter_mut().zip(ch.channels()) {
                            a.push(single(&w, h));
                        }
                    }
                    Precoding::SbfPair(ws) => {
                        let (w1, w2) = ws.sample_pair(&mut rng);
                        for (a, h) in acc.iter_mut().zip(ch.channels()) {
                            a.push(pair(&w1, &w2, h));
                        }
                    }
                    _ => unreachable!(),
                }
            }
            acc
        })
        .collect();
    let mut total = vec![MeanAccumulator::new(); m];
    for chunk in &chunks {
        for (t, c) in total.iter_mut().zip(chunk) {
            t.merge(c);
        }
    }
    Ok(total.iter().map(|a| RateEstimate { mean: a.mean(), std_error: a.std_error() }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::solve_mc_covariance;
    use crate::rates::{rate_sbf_gauss, SchemeParams};
    use crate::sampling::sample_channel_set;
    use crate::stats::q_function;

    fn cfg(scheme: LinkScheme, w: CovarianceMatrix, kind: ConstellationKind, power: f64, t: usize) -> SchemeConfig {
        SchemeConfig { scheme, covariance: w, constellation: Constellation::new(kind), power, frame_length: t }
    }

    fn e1_cov(n: usize) -> CovarianceMatrix {
        let mut m = CMatrix::zeros(n, n);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        CovarianceMatrix::new(m).unwrap()
    }

    #[test]
    fn beamforming_bpsk_on_first_antenna() {
        let c = cfg(LinkScheme::Beamforming, e1_cov(3), ConstellationKind::Bpsk, 4.0, 4);
        let x = transmit_frame(&c, &[0, 1, 1, 0], SeededStream::new(0, 0)).unwrap();
        let want = [2.0, -2.0, -2.0, 2.0];
        for t in 0..4 {
            assert!((x[(0, t)].re.abs() - 2.0).abs() < 1e-12 && (x[(0, t)].re - want[t]).abs() < 1e-12);
            assert!(x[(1, t)].norm() < 1e-12 && x[(2, t)].norm() < 1e-12);
        }
    }

    #[test]
    fn spatial_multiplexing_identity_precoder() {
        let w = CovarianceMatrix::isotropic(2);
        let c = cfg(LinkScheme::PrecodedSm, w, ConstellationKind::Bpsk, 2.0, 1);
        let x = transmit_frame(&c, &[0, 1], SeededStream::new(0, 0)).unwrap();
        // B = I/√2, so x = √P·B·s = s
        assert!((x[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((x[(1, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn bit_length_checked() {
        let c = cfg(LinkScheme::Beamforming, e1_cov(2), ConstellationKind::Qpsk, 1.0, 4);
        assert!(matches!(
            transmit_frame(&c, &[0; 7], SeededStream::new(0, 0)),
            Err(Error::BitLength { expected: 8, got: 7 })
        ));
    }

    #[test]
    fn frame_length_must_match_block() {
        let c = cfg(LinkScheme::PrecodedQostbc, CovarianceMatrix::isotropic(4), ConstellationKind::Qpsk, 1.0, 6);
        assert!(Link::new(c).is_err());
    }

    #[test]
    fn transmit_power_is_p() {
        let ch = sample_channel_set(4, 6, SeededStream::new(21, 0)).unwrap();
        let w = solve_mc_covariance(&ch, 1e-6, 100_000).unwrap().covariance;
        let p = 3.0;
        for scheme in LinkScheme::ALL {
            let c = cfg(scheme, w.clone(), ConstellationKind::Qpsk, p, 10_000);
            let link = Link::new(c.clone()).unwrap();
            let mut rng = SeededStream::new(1, 1).rng();
            let bits: Vec<u8> = (0..link.bits_per_frame()).map(|_| rng.gen_range(0..2)).collect();
            let x = transmit_frame(&c, &bits, SeededStream::new(2, 0)).unwrap();
            let power = x.norm_squared() / 10_000.0;
            assert!((power / p - 1.0).abs() < 0.02, "{}: {power}", scheme.name());
        }
    }

    #[test]
    fn single_user_beamforming_qpsk_ber() {
        let ch = sample_channel_set(3, 1, SeededStream::new(4, 0)).unwrap();
        let w = solve_mc_covariance(&ch, 1e-9, 10_000).unwrap().covariance;
        let rho = ch.get(0).norm_squared();
        let p = 10f64.powf(0.4);
        let c = cfg(LinkScheme::Beamforming, w, ConstellationKind::Qpsk, p, 1440);
        let r = simulate_worst_user_ber(&c, &ch, 40, SeededStream::new(9, 0)).unwrap();
        let want = q_function((p * rho).sqrt());
        let se = (want * (1.0 - want) / r.bits_simulated as f64).sqrt();
        assert!((r.worst_user_ber - want).abs() < 3.0 * se, "{} vs {want}", r.worst_user_ber);
    }

    #[test]
    fn zero_power_gives_coin_flips() {
        let ch = sample_channel_set(4, 3, SeededStream::new(5, 0)).unwrap();
        let w = solve_mc_covariance(&ch, 1e-6, 100_000).unwrap().covariance;
        for scheme in LinkScheme::ALL {
            let c = cfg(scheme, w.clone(), ConstellationKind::Qpsk, 0.0, 720);
            let r = simulate_worst_user_ber(&c, &ch, 4, SeededStream::new(6, 0)).unwrap();
            for i in 0..3 {
                let hw = (0.25 / r.bits_simulated as f64).sqrt();
                assert!((r.per_user_ber[i] - 0.5).abs() < 4.0 * hw, "{} {}", scheme.name(), r.per_user_ber[i]);
            }
            assert_eq!(r.worst_user_ber, r.per_user_ber.iter().cloned().fold(0.0, f64::max));
        }
    }

    #[test]
    fn gauss_sbf_rates_match_closed_form() {
        let ch = sample_channel_set(4, 3, SeededStream::new(8, 0)).unwrap();
        let w = solve_mc_covariance(&ch, 1e-6, 100_000).unwrap().covariance;
        let c = cfg(LinkScheme::GaussSbf, w.clone(), ConstellationKind::Qpsk, 5.0, 1440);
        let est = estimate_user_rates_mc(&c, &ch, 100_000, SeededStream::new(3, 0)).unwrap();
        let rho = crate::capacity::rho_values(&w, &ch).unwrap().rho;
        for (e, r) in est.iter().zip(rho) {
            let want = rate_sbf_gauss(&SchemeParams::new(r, 1, 5.0).unwrap());
            assert!((e.mean - want).abs() < 3.0 * e.std_error, "{} vs {want}", e.mean);
        }
    }

    #[test]
    fn beamforming_rates_are_exact() {
        let ch = sample_channel_set(2, 1, SeededStream::new(8, 0)).unwrap();
        let w = solve_mc_covariance(&ch, 1e-9, 1000).unwrap().covariance;
        let c = cfg(LinkScheme::Beamforming, w, ConstellationKind::Qpsk, 2.0, 1440);
        let est = estimate_user_rates_mc(&c, &ch, 10, SeededStream::new(0, 0)).unwrap();
        assert_eq!(est[0].std_error, 0.0);
        assert!((est[0].mean - (2.0 * ch.get(0).norm_squared()).ln_1p()).abs() < 1e-9);
    }
}
