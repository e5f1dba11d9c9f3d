//! The five experiment commands. Each is a pure function of its config.

use crate::config::{db_to_linear, Command, ExperimentConfig, RateScheme};
use crate::output::{num, Table};
use crate::CliError;
use rayon::prelude::*;
use sbfcast_core::capacity::{rho_values, solve_mc_covariance, McSolution};
use sbfcast_core::linalg::hermitian_residual;
use sbfcast_core::linksim::{
    default_frame_length, simulate_worst_user_ber, Constellation, LinkScheme, SchemeConfig,
};
use sbfcast_core::rates::{
    gap_limit, quadrature_rate_oracle, rate_mc, rate_monte_carlo, SbfScheme, SchemeParams,
};
use sbfcast_core::sampling::{sample_channel_set, ChannelSet, SeededStream};
use sbfcast_core::stats::MeanAccumulator;
use std::f64::consts::LN_2;

/// CSV text plus the number of failed checks it contains.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub csv: String,
    pub failures: usize,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::Rates => cmd_rates(cfg),
        Command::Gaps => cmd_gaps(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Ber => cmd_ber(cfg),
        Command::SolveCov => cmd_solve_cov(cfg),
    }
}

/// Channel draw `k` for `m` users.
fn channel_stream(cfg: &ExperimentConfig, m: usize, k: usize) -> SeededStream {
    SeededStream::new(cfg.seed, m as u64).fork(k as u64)
}

struct Realization {
    channels: ChannelSet,
    rho_min: f64,
    rank: usize,
    solution: McSolution,
}

fn solve_realizations(cfg: &ExperimentConfig, m: usize) -> Result<Vec<Realization>, CliError> {
    (0..cfg.realizations)
        .into_par_iter()
        .map(|k| {
            let ch = sample_channel_set(cfg.n, m, channel_stream(cfg, m, k))?;
            let solution = solve_mc_covariance(&ch, cfg.tol, cfg.max_iter)?;
            let rho_min = rho_values(&solution.covariance, &ch)?.rho_min;
            let rank = solution.covariance.rank()?;
            Ok(Realization { channels: ch, rho_min, rank, solution })
        })
        .collect()
}

fn status(nonconverged: usize) -> String {
    if nonconverged == 0 {
        "ok".into()
    } else {
        format!("nonconverged_{nonconverged}")
    }
}

/// Rate of `scheme` at one realization. Elliptic SBF-Alamouti at rank one
/// has a deterministic gain, so its rate is the capacity bound.
fn scheme_rate(scheme: RateScheme, rho: f64, rank: usize, power: f64) -> Result<f64, CliError> {
    let p = SchemeParams::new(rho, rank, power)?;
    Ok(match scheme {
        RateScheme::Mc => rate_mc(&p),
        RateScheme::Sbf(SbfScheme::EllipAlamouti) if rank < 2 => rate_mc(&p),
        RateScheme::Sbf(s) => s.rate(&p)?,
    })
}

pub fn cmd_rates(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let schemes = cfg.rate_schemes()?;
    let mut table = Table::new(&["scheme", "N", "M", "P_dB", "rate_nats", "rate_bits", "stderr", "status"]);
    for &m in &cfg.m {
        let reals = solve_realizations(cfg, m)?;
        let nonconverged = reals.iter().filter(|r| !r.solution.converged).count();
        for &scheme in &schemes {
            for &db in &cfg.power_grid_db {
                let power = db_to_linear(db);
                let mut acc = MeanAccumulator::new();
                for r in &reals {
                    acc.push(scheme_rate(scheme, r.rho_min, r.rank, power)?);
                }
                table.row(&[
                    scheme.name().into(),
                    cfg.n.to_string(),
                    m.to_string(),
                    num(db),
                    num(acc.mean()),
                    num(acc.mean() / LN_2),
                    num(acc.std_error()),
                    status(nonconverged),
                ]);
            }
        }
    }
    Ok(Report { csv: table.into_string(), failures: 0 })
}

/// Ranks at which a scheme is tabulated; the Gaussian laws do not depend
/// on the rank.
fn scheme_ranks(scheme: SbfScheme, ranks: &[usize]) -> Vec<Option<usize>> {
    match scheme {
        SbfScheme::GaussSbf | SbfScheme::GaussAlamouti => vec![None],
        _ => ranks.iter().map(|&r| Some(r)).collect(),
    }
}

fn rank_field(rank: Option<usize>) -> String {
    rank.map_or_else(|| "any".into(), |r| r.to_string())
}

pub fn cmd_gaps(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut table = Table::new(&[
        "scheme", "rank", "rho", "P_dB", "gap_nats", "gap_bits", "limit", "delta_to_limit", "status",
    ]);
    for scheme in cfg.sbf_schemes()? {
        for rank in scheme_ranks(scheme, &cfg.ranks) {
            let r = rank.unwrap_or(1);
            let collapsed = r < scheme.min_rank();
            let limit = if collapsed { 0.0 } else { gap_limit(scheme, r)? };
            for &db in &cfg.power_grid_db {
                let power = db_to_linear(db);
                let p = SchemeParams::new(cfg.rho, r, power)?;
                let gap = rate_mc(&p) - scheme_rate(RateScheme::Sbf(scheme), cfg.rho, r, power)?;
                table.row(&[
                    scheme.name().into(),
                    rank_field(rank),
                    num(cfg.rho),
                    num(db),
                    num(gap),
                    num(gap / LN_2),
                    num(limit),
                    num((gap - limit).abs()),
                    if collapsed { "rank_one_collapse".into() } else { "ok".into() },
                ]);
            }
        }
    }
    Ok(Report { csv: table.into_string(), failures: 0 })
}

const QUADRATURE_TOL: f64 = 1e-8;

pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut table = Table::new(&[
        "scheme", "rank", "rho", "P_dB", "method", "rate_nats", "abs_diff", "tolerance", "pass",
    ]);
    let mut failures = 0;
    let powers: Vec<f64> = cfg.power_grid_db.iter().map(|&db| db_to_linear(db)).collect();
    for (si, scheme) in cfg.sbf_schemes()?.into_iter().enumerate() {
        for rank in scheme_ranks(scheme, &cfg.ranks) {
            let r = rank.unwrap_or(1);
            if r < scheme.min_rank() {
                continue;
            }
            // one stream per (scheme, rank): all powers share the draws
            let stream = SeededStream::new(cfg.seed, (si as u64) << 32 | r as u64);
            let mc = rate_monte_carlo(scheme, r, cfg.rho, &powers, cfg.n_samples, stream)?;
            for ((&db, &power), est) in cfg.power_grid_db.iter().zip(&powers).zip(&mc) {
                let closed = scheme.rate(&SchemeParams::new(cfg.rho, r, power)?)?;
                let quad = quadrature_rate_oracle(&scheme.gain_law(r), cfg.rho, power)?.value;
                let mc_tol = (3.0 * est.std_error).max(1e-12);
                let checks = [
                    ("closed_form", closed, 0.0, 0.0),
                    ("quadrature", quad, (quad - closed).abs(), QUADRATURE_TOL),
                    ("monte_carlo", est.mean, (est.mean - closed).abs(), mc_tol),
                ];
                for (method, value, diff, tol) in checks {
                    let pass = diff <= tol;
                    failures += usize::from(!pass);
                    table.row(&[
                        scheme.name().into(),
                        rank_field(rank),
                        num(cfg.rho),
                        num(db),
                        method.into(),
                        num(value),
                        num(diff),
                        num(tol),
                        pass.to_string(),
                    ]);
                }
            }
        }
    }
    Ok(Report { csv: table.into_string(), failures })
}

pub fn cmd_ber(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let schemes = cfg.link_schemes()?;
    let mut table = Table::new(&[
        "scheme", "N", "M", "P_dB", "constellation", "worst_user_ber", "stderr", "bits_per_user",
        "realizations", "status",
    ]);
    let np = cfg.power_grid_db.len();
    let ns = schemes.len();
    for &m in &cfg.m {
        let reals = solve_realizations(cfg, m)?;
        let nonconverged = reals.iter().filter(|r| !r.solution.converged).count();
        // per realization: worst-user BER and bits for every (scheme, power)
        let results: Vec<Vec<(f64, u64)>> = reals
            .par_iter()
            .enumerate()
            .map(|(k, real)| {
                let mut out = Vec::with_capacity(ns * np);
                for (si, &scheme) in schemes.iter().enumerate() {
                    let kind = if scheme == LinkScheme::PrecodedSm { cfg.sm_constellation } else { cfg.constellation };
                    for (pi, &db) in cfg.power_grid_db.iter().enumerate() {
                        let sc = SchemeConfig {
                            scheme,
                            covariance: real.solution.covariance.clone(),
                            constellation: Constellation::new(kind),
                            power: db_to_linear(db),
                            frame_length: cfg.frame_length.unwrap_or_else(|| default_frame_length(kind)),
                        };
                        let index = ((k * ns + si) * np + pi) as u64;
                        let stream = SeededStream::new(cfg.seed, 1 << 40 | m as u64).fork(index);
                        let res = simulate_worst_user_ber(&sc, &real.channels, cfg.n_frames, stream)?;
                        out.push((res.worst_user_ber, res.bits_simulated));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_, CliError>>()?;
        for (si, &scheme) in schemes.iter().enumerate() {
            let kind = if scheme == LinkScheme::PrecodedSm { cfg.sm_constellation } else { cfg.constellation };
            for (pi, &db) in cfg.power_grid_db.iter().enumerate() {
                let acc: MeanAccumulator = results.iter().map(|r| r[si * np + pi].0).collect();
                let bits = results[0][si * np + pi].1;
                table.row(&[
                    scheme.name().into(),
                    cfg.n.to_string(),
                    m.to_string(),
                    num(db),
                    kind.name().into(),
                    num(acc.mean()),
                    num(acc.std_error()),
                    bits.to_string(),
                    cfg.realizations.to_string(),
                    status(nonconverged),
                ]);
            }
        }
    }
    Ok(Report { csv: table.into_string(), failures: 0 })
}

pub fn cmd_solve_cov(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let m = cfg.m[0];
    let ch = sample_channel_set(cfg.n, m, SeededStream::new(cfg.seed, 0))?;
    let sol = solve_mc_covariance(&ch, cfg.tol, cfg.max_iter)?;
    let w = sol.covariance.entries();
    let rho = rho_values(&sol.covariance, &ch)?;
    let mut table = Table::new(&["kind", "i", "j", "re", "im"]);
    for i in 0..cfg.n {
        for j in 0..cfg.n {
            table.row(&["W".into(), i.to_string(), j.to_string(), num(w[(i, j)].re), num(w[(i, j)].im)]);
        }
    }
    for (i, r) in rho.rho.iter().enumerate() {
        table.row(&["rho".into(), i.to_string(), String::new(), num(*r), num(0.0)]);
    }
    let scalar = |t: &mut Table, kind: &str, v: f64| t.row(&[kind.into(), String::new(), String::new(), num(v), num(0.0)]);
    scalar(&mut table, "rho_min", rho.rho_min);
    scalar(&mut table, "dual_bound", sol.dual_bound);
    scalar(&mut table, "gap", sol.gap());
    scalar(&mut table, "rank", sol.covariance.rank()? as f64);
    let checks = [
        sol.converged,
        hermitian_residual(w) <= 1e-12,
        (sol.covariance.trace() - 1.0).abs() <= 1e-10,
    ];
    let failures = checks.iter().filter(|&&ok| !ok).count();
    Ok(Report { csv: table.into_string(), failures })
}
