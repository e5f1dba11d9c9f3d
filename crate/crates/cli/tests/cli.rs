use std::path::Path;
use std::process::{Command as Process, Stdio};

use sbfcast::{run, Command, ExperimentConfig};
use sbfcast_core::rates::{rate_sbf_gauss, SchemeParams};
use sbfcast_core::sampling::{sample_channel_set, SeededStream};
use sbfcast_core::stats::MeanAccumulator;

fn cfg(text: &str, command: Command) -> ExperimentConfig {
    ExperimentConfig::parse(text, command).unwrap()
}

fn small(command: Command) -> ExperimentConfig {
    let text = match command {
        Command::Rates => "m = [1, 3]\nrealizations = 5\npower_grid_db = [0.0, 10.0]",
        Command::Gaps => "ranks = [1, 2, 3]\npower_grid_db = [20.0, 60.0]",
        Command::Verify => "n_samples = 20000\nranks = [2, 3]\npower_grid_db = [0.0, 10.0]",
        Command::Ber => "m = [4]\nrealizations = 2\nn_frames = 2\npower_grid_db = [0.0, 8.0]",
        Command::SolveCov => "seed = 2024\nn = 4\nm = 8",
    };
    cfg(text, command)
}

const ALL: [Command; 5] = [Command::Rates, Command::Gaps, Command::Verify, Command::Ber, Command::SolveCov];

fn header(csv: &str) -> &str {
    csv.lines().next().unwrap()
}

#[test]
fn headers_are_stable() {
    let want = [
        "scheme,N,M,P_dB,rate_nats,rate_bits,stderr,status",
        "scheme,rank,rho,P_dB,gap_nats,gap_bits,limit,delta_to_limit,status",
        "scheme,rank,rho,P_dB,method,rate_nats,abs_diff,tolerance,pass",
        "scheme,N,M,P_dB,constellation,worst_user_ber,stderr,bits_per_user,realizations,status",
        "kind,i,j,re,im",
    ];
    for (command, h) in ALL.into_iter().zip(want) {
        let report = run(&small(command)).unwrap();
        assert_eq!(header(&report.csv), h, "{}", command.name());
        assert_eq!(report.failures, 0, "{}", command.name());
    }
}

#[test]
fn every_command_is_deterministic() {
    for command in ALL {
        let c = small(command);
        assert_eq!(run(&c).unwrap(), run(&c).unwrap(), "{}", command.name());
    }
}

#[test]
fn seed_changes_random_outputs() {
    let mut c = small(Command::Ber);
    let a = run(&c).unwrap();
    c.seed += 1;
    assert_ne!(a.csv, run(&c).unwrap().csv);
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].to_string()).collect()
}

#[test]
fn single_user_rates_use_the_channel_norm() {
    let c = cfg(
        "m = [1]\nrealizations = 6\npower_grid_db = [10.0]\nschemes = [\"MC-bound\", \"GaussSBF\", \"EllipSBF\"]",
        Command::Rates,
    );
    let csv = run(&c).unwrap().csv;
    let rates: Vec<f64> = column(&csv, "rate_nats").iter().map(|s| s.parse().unwrap()).collect();
    let p = 10.0;
    let mut mc = MeanAccumulator::new();
    let mut gauss = MeanAccumulator::new();
    for k in 0..6 {
        let ch = sample_channel_set(4, 1, SeededStream::new(c.seed, 1).fork(k)).unwrap();
        let rho = ch.get(0).norm_squared();
        let sp = SchemeParams::new(rho, 1, p).unwrap();
        mc.push((rho * p).ln_1p());
        gauss.push(rate_sbf_gauss(&sp));
    }
    assert!((rates[0] - mc.mean()).abs() < 1e-12);
    assert!((rates[1] - gauss.mean()).abs() < 1e-12);
    // rank-one covariance: the elliptic law is a point mass
    assert!((rates[2] - rates[0]).abs() < 1e-12);
}

#[test]
fn capacity_dominates_sbf_rows() {
    let csv = run(&small(Command::Rates)).unwrap().csv;
    let schemes = column(&csv, "scheme");
    let rates: Vec<f64> = column(&csv, "rate_nats").iter().map(|s| s.parse().unwrap()).collect();
    let ms = column(&csv, "M");
    let pdb = column(&csv, "P_dB");
    for i in 0..rates.len() {
        if schemes[i] == "MC" {
            continue;
        }
        let j = (0..rates.len()).find(|&j| schemes[j] == "MC" && ms[j] == ms[i] && pdb[j] == pdb[i]).unwrap();
        assert!(rates[j] >= rates[i], "row {i}");
    }
}

#[test]
fn gaps_table_examples() {
    let csv = run(&cfg("ranks = [1, 3]\npower_grid_db = [60.0]", Command::Gaps)).unwrap().csv;
    let schemes = column(&csv, "scheme");
    let ranks = column(&csv, "rank");
    let limit: Vec<f64> = column(&csv, "limit").iter().map(|s| s.parse().unwrap()).collect();
    let gap: Vec<f64> = column(&csv, "gap_nats").iter().map(|s| s.parse().unwrap()).collect();
    let delta: Vec<f64> = column(&csv, "delta_to_limit").iter().map(|s| s.parse().unwrap()).collect();
    for i in 0..schemes.len() {
        match (schemes[i].as_str(), ranks[i].as_str()) {
            ("GaussSBF", _) => assert!(delta[i] <= 1e-4),
            ("EllipSBF", "1") => assert_eq!(gap[i], 0.0),
            ("EllipAlam", "3") => assert!((limit[i] - (137.0 / 60.0 - 3f64.ln() - 1.0)).abs() < 1e-15),
            _ => {}
        }
    }
}

fn sbfcast() -> Process {
    let mut p = Process::new(env!("CARGO_BIN_EXE_sbfcast"));
    p.stderr(Stdio::null());
    p
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", "seed = 3\nn = 3\nm = 4");
    let out = dir.path().join("out.csv");
    let status = sbfcast()
        .args(["solve-cov", "--config"])
        .arg(&good)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("kind,i,j,re,im"));

    let missing = dir.path().join("missing.toml");
    let status = sbfcast().args(["rates", "--config"]).arg(&missing).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let unsorted = write(dir.path(), "unsorted.toml", "power_grid_db = [10.0, 0.0]");
    let status = sbfcast().args(["gaps", "--config"]).arg(&unsorted).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let unknown = write(dir.path(), "unknown.toml", "colour = 3");
    let status = sbfcast().args(["gaps", "--config"]).arg(&unknown).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let few = write(dir.path(), "few.toml", "n_samples = 10");
    let status = sbfcast().args(["verify", "--config"]).arg(&few).status().unwrap();
    assert_eq!(status.code(), Some(2));

    // a solver budget too small to certify the optimum is a check failure
    let starved = write(dir.path(), "starved.toml", "seed = 3\nn = 4\nm = 12\nmax_iter = 3\ntol = 1e-12");
    let status = sbfcast()
        .args(["solve-cov", "--config"])
        .arg(&starved)
        .arg("--out")
        .arg(dir.path().join("starved.csv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "ber.toml", "m = [4]\nrealizations = 2\nn_frames = 3\npower_grid_db = [4.0]");
    let outputs: Vec<Vec<u8>> = ["1", "8"]
        .iter()
        .map(|t| {
            let o = sbfcast()
                .env("SBF_THREADS", t)
                .args(["ber", "--config"])
                .arg(&config)
                .output()
                .unwrap();
            assert!(o.status.success());
            o.stdout
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);

    let status = sbfcast().env("SBF_THREADS", "zero").args(["ber", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(2));
}
