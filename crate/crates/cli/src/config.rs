//! Experiment configuration files (TOML).
//!
//! ```toml
//! n = 4
//! m = [8, 16]
//! power_grid_db = [0.0, 10.0, 20.0]
//! schemes = ["MC", "GaussSBF", "EllipSBF"]
//! seed = 7
//! ```

use crate::CliError;
use sbfcast_core::linksim::{ConstellationKind, LinkScheme};
use sbfcast_core::rates::SbfScheme;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Rates,
    Gaps,
    Verify,
    Ber,
    SolveCov,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Rates => "rates",
            Command::Gaps => "gaps",
            Command::Verify => "verify",
            Command::Ber => "ber",
            Command::SolveCov => "solve-cov",
        }
    }
}

impl std::str::FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        [Command::Rates, Command::Gaps, Command::Verify, Command::Ber, Command::SolveCov]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Input(format!("unknown command `{s}`")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<String>,
    n: Option<usize>,
    m: Option<OneOrMany<usize>>,
    power_grid_db: Option<OneOrMany<f64>>,
    schemes: Option<Vec<String>>,
    ranks: Option<OneOrMany<usize>>,
    rho: Option<f64>,
    constellation: Option<String>,
    sm_constellation: Option<String>,
    seed: Option<u64>,
    n_samples: Option<usize>,
    n_frames: Option<usize>,
    realizations: Option<usize>,
    frame_length: Option<usize>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    output_path: Option<String>,
}

/// Scheme selector for the rate commands: the multicast capacity bound or
/// one of the stochastic beamforming schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateScheme {
    Mc,
    Sbf(SbfScheme),
}

impl RateScheme {
    pub fn name(&self) -> &'static str {
        match self {
            RateScheme::Mc => "MC",
            RateScheme::Sbf(s) => s.name(),
        }
    }
}

fn parse_rate_scheme(s: &str) -> Result<RateScheme, CliError> {
    if s.eq_ignore_ascii_case("MC") || s.eq_ignore_ascii_case("MC-bound") {
        return Ok(RateScheme::Mc);
    }
    s.parse::<SbfScheme>().map(RateScheme::Sbf).map_err(|e| CliError::Input(e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: usize,
    pub m: Vec<usize>,
    pub power_grid_db: Vec<f64>,
    /// Scheme names as written in the file; interpreted per command.
    pub schemes: Vec<String>,
    pub ranks: Vec<usize>,
    pub rho: f64,
    pub constellation: ConstellationKind,
    pub sm_constellation: ConstellationKind,
    pub seed: u64,
    pub n_samples: usize,
    pub n_frames: usize,
    pub realizations: usize,
    pub frame_length: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    pub output_path: Option<String>,
}

fn default_schemes(command: Command) -> Vec<String> {
    let names: &[&str] = match command {
        Command::Rates => &["MC", "GaussSBF", "EllipSBF", "GaussAlam", "EllipAlam"],
        Command::Gaps | Command::Verify => &["GaussSBF", "EllipSBF", "GaussAlam", "EllipAlam"],
        Command::Ber => &["GaussSBF", "EllipSBF", "GaussSbfAlamouti", "EllipSbfAlamouti"],
        Command::SolveCov => &[],
    };
    names.iter().map(|s| s.to_string()).collect()
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

impl ExperimentConfig {
    /// Parses a config for `command`. A `command` key in the file, if
    /// present, must agree.
    pub fn parse(text: &str, command: Command) -> Result<ExperimentConfig, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(input)?;
        if let Some(c) = &raw.command {
            let c: Command = c.parse()?;
            if c != command {
                return Err(CliError::Input(format!(
                    "config is for `{}` but `{}` was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        let default_grid = match command {
            Command::Verify => vec![-10.0, 0.0, 10.0, 20.0],
            Command::Ber => vec![0.0, 4.0, 8.0, 12.0],
            _ => vec![0.0, 10.0, 20.0],
        };
        let cfg = ExperimentConfig {
            command,
            n: raw.n.unwrap_or(4),
            m: raw.m.map(OneOrMany::into_vec).unwrap_or_else(|| vec![8]),
            power_grid_db: raw.power_grid_db.map(OneOrMany::into_vec).unwrap_or(default_grid),
            schemes: raw.schemes.unwrap_or_else(|| default_schemes(command)),
            ranks: raw.ranks.map(OneOrMany::into_vec).unwrap_or_else(|| vec![2, 3, 4]),
            rho: raw.rho.unwrap_or(1.0),
            constellation: raw.constellation.as_deref().unwrap_or("QPSK").parse().map_err(input)?,
            sm_constellation: raw.sm_constellation.as_deref().unwrap_or("BPSK").parse().map_err(input)?,
            seed: raw.seed.unwrap_or(1),
            n_samples: raw.n_samples.unwrap_or(100_000),
            n_frames: raw.n_frames.unwrap_or(10),
            realizations: raw.realizations.unwrap_or(match command {
                Command::Ber => 20,
                _ => 100,
            }),
            frame_length: raw.frame_length,
            tol: raw.tol.unwrap_or(1e-6),
            max_iter: raw.max_iter.unwrap_or(100_000),
            output_path: raw.output_path,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, command: Command) -> Result<ExperimentConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, command)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Input(msg));
        if self.n == 0 {
            return bad("n must be >= 1".into());
        }
        if self.m.is_empty() || self.m.contains(&0) {
            return bad("m must be a non-empty list of positive user counts".into());
        }
        if self.power_grid_db.is_empty() {
            return bad("power_grid_db must not be empty".into());
        }
        if self.power_grid_db.iter().any(|p| !p.is_finite()) {
            return bad("power_grid_db entries must be finite".into());
        }
        if self.power_grid_db.windows(2).any(|w| w[0] > w[1]) {
            return bad("power_grid_db must be sorted ascending".into());
        }
        if self.ranks.is_empty() || self.ranks.contains(&0) {
            return bad("ranks must be a non-empty list of positive ranks".into());
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return bad(format!("rho must be positive, got {}", self.rho));
        }
        if self.command == Command::Verify && self.n_samples < 1000 {
            return bad(format!("verify needs n_samples >= 1000, got {}", self.n_samples));
        }
        if self.n_samples == 0 || self.n_frames == 0 || self.realizations == 0 {
            return bad("n_samples, n_frames and realizations must be >= 1".into());
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.command == Command::SolveCov && self.m.len() != 1 {
            return bad("solve-cov takes a single user count m".into());
        }
        match self.command {
            Command::Rates => {
                self.rate_schemes()?;
            }
            Command::Gaps | Command::Verify => {
                if self.sbf_schemes()?.is_empty() {
                    return bad("no schemes selected".into());
                }
            }
            Command::Ber => {
                if self.link_schemes()?.is_empty() {
                    return bad("no schemes selected".into());
                }
            }
            Command::SolveCov => {}
        }
        Ok(())
    }

    pub fn rate_schemes(&self) -> Result<Vec<RateScheme>, CliError> {
        self.schemes.iter().map(|s| parse_rate_scheme(s)).collect()
    }

    pub fn sbf_schemes(&self) -> Result<Vec<SbfScheme>, CliError> {
        self.schemes.iter().map(|s| s.parse::<SbfScheme>().map_err(input)).collect()
    }

    pub fn link_schemes(&self) -> Result<Vec<LinkScheme>, CliError> {
        self.schemes.iter().map(|s| s.parse::<LinkScheme>().map_err(input)).collect()
    }
}

/// `10^{dB/10}`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_scalars() {
        let cfg = ExperimentConfig::parse("m = 16\npower_grid_db = 10.0\n", Command::Rates).unwrap();
        assert_eq!(cfg.m, vec![16]);
        assert_eq!(cfg.power_grid_db, vec![10.0]);
        assert_eq!(cfg.rate_schemes().unwrap()[0], RateScheme::Mc);
        assert_eq!(cfg.realizations, 100);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "power_grid_db = [10.0, 0.0]",
            "power_grid_db = []",
            "bogus = 1",
            "n_samples = 10",
            "schemes = [\"Nope\"]",
            "command = \"ber\"",
            "constellation = \"8PSK\"",
        ] {
            let err = ExperimentConfig::parse(text, Command::Verify).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn db_convention() {
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert_eq!(db_to_linear(0.0), 1.0);
    }
}
