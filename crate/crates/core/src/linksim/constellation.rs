//! Gray-labelled unit-energy constellations.

use crate::error::{Error, Result};
use crate::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstellationKind {
    Bpsk,
    Qpsk,
    Qam16,
}

impl ConstellationKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConstellationKind::Bpsk => "BPSK",
            ConstellationKind::Qpsk => "QPSK",
            ConstellationKind::Qam16 => "QAM16",
        }
    }
}

impl std::str::FromStr for ConstellationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BPSK" => Ok(ConstellationKind::Bpsk),
            "QPSK" => Ok(ConstellationKind::Qpsk),
            "QAM16" | "16QAM" | "16-QAM" => Ok(ConstellationKind::Qam16),
            _ => Err(Error::InvalidParams(format!("unknown constellation `{s}`"))),
        }
    }
}

/// Points are indexed by their bit label: `points[label]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
    bits_per_symbol: usize,
}

/// Per-axis Gray level for two bits: 00→−3, 01→−1, 11→+1, 10→+3.
fn pam4_level(b1: usize, b0: usize) -> f64 {
    match (b1, b0) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        _ => 3.0,
    }
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        let (points, bits_per_symbol) = match kind {
            ConstellationKind::Bpsk => (vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)], 1),
            ConstellationKind::Qpsk => {
                let pts = (0..4)
                    .map(|l| {
                        let re = 1.0 - 2.0 * ((l >> 1) & 1) as f64;
                        let im = 1.0 - 2.0 * (l & 1) as f64;
                        Complex64::new(re, im) * FRAC_1_SQRT_2
                    })
                    .collect();
                (pts, 2)
            }
            ConstellationKind::Qam16 => {
                let s = 10f64.sqrt();
                let pts = (0..16)
                    .map(|l| {
                        let re = pam4_level((l >> 3) & 1, (l >> 2) & 1);
                        let im = pam4_level((l >> 1) & 1, l & 1);
                        Complex64::new(re, im) / s
                    })
                    .collect();
                (pts, 4)
            }
        };
        Constellation { kind, points, bits_per_symbol }
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Bit labels in point order (identity, since points are label-indexed).
    pub fn labels(&self) -> Vec<usize> {
        (0..self.points.len()).collect()
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Label from `bits_per_symbol` bits, most significant first.
    pub fn label_from_bits(&self, bits: &[u8]) -> usize {
        bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)
    }

    pub fn bits_of(&self, label: usize) -> impl Iterator<Item = u8> + '_ {
        (0..self.bits_per_symbol).rev().map(move |k| ((label >> k) & 1) as u8)
    }

    /// Nearest-point demapping.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (l, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = l;
            }
        }
        best
    }
}

pub fn bit_errors(a: usize, b: usize) -> u64 {
    (a ^ b).count_ones() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    const KINDS: [ConstellationKind; 3] =
        [ConstellationKind::Bpsk, ConstellationKind::Qpsk, ConstellationKind::Qam16];

    #[test]
    fn unit_energy() {
        for k in KINDS {
            assert!((Constellation::new(k).average_energy() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        for k in KINDS {
            let c = Constellation::new(k);
            let pts = c.points();
            let dmin = pts
                .iter()
                .enumerate()
                .flat_map(|(i, p)| pts[i + 1..].iter().map(move |q| (p - q).norm()))
                .fold(f64::INFINITY, f64::min);
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    if ((pts[i] - pts[j]).norm() - dmin).abs() < 1e-9 {
                        assert_eq!(bit_errors(i, j), 1, "{:?} {i} {j}", k);
                    }
                }
            }
        }
    }

    #[test]
    fn bits_round_trip() {
        let c = Constellation::new(ConstellationKind::Qam16);
        for l in 0..16 {
            let bits: Vec<u8> = c.bits_of(l).collect();
            assert_eq!(c.label_from_bits(&bits), l);
            assert_eq!(c.nearest(c.point(l)), l);
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("qpsk".parse::<ConstellationKind>().unwrap(), ConstellationKind::Qpsk);
        assert_eq!("16QAM".parse::<ConstellationKind>().unwrap(), ConstellationKind::Qam16);
        assert!("8PSK".parse::<ConstellationKind>().is_err());
    }
}
