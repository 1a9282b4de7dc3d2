//! CLI contract tests: exit codes and the thin-adapter property (CLI
//! outputs equal direct library calls on the same seed).

use auctionsim::equilibria;
use auctionsim::matrix::Matrix;
use auctionsim::mechanisms::{self, AuctionInstance};
use auctionsim::valuation::{self, ValuationParams};
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_auctionsim"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("auctionsim-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn unknown_subcommand_exits_one_with_usage() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty(), "usage text expected on stderr");
}

#[test]
fn unknown_flag_exits_one() {
    let out = bin().args(["bne", "--no-such-flag", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_params_exit_one() {
    // b <= a fails valuation validation.
    let dir = temp_dir("badparams");
    let out = bin()
        .args(["sample", "--a", "2.0", "--b", "1.0", "--output-dir"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_config_exits_one() {
    let dir = temp_dir("badconfig");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("broken.toml");
    std::fs::write(&config, "grid = [unclosed").unwrap();
    let out = bin().args(["sweep", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn missing_config_file_exits_two() {
    let out = bin().args(["sweep", "--config", "/nonexistent/nowhere.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_dir_exits_two() {
    let dir = temp_dir("unwritable");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("blocker");
    std::fs::write(&file, "x").unwrap();
    // Using a regular file as a directory component must fail at I/O time.
    let out = bin()
        .args(["auction", "--mechanism", "vcg", "--values", "1;2", "--output-dir"])
        .arg(file.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn auction_output_matches_library_call() {
    let dir = temp_dir("adapter-auction");
    let out = bin()
        .args(["auction", "--mechanism", "vcg", "--values", "4,1;3,2", "--output-dir"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.join("outcome.txt")).unwrap();
    let values: Matrix = "4,1;3,2".parse().unwrap();
    let expected = mechanisms::run_vcg(&AuctionInstance::new(values, 0.0).unwrap())
        .unwrap()
        .to_text();
    assert_eq!(text, expected);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn sample_output_matches_library_call() {
    let dir = temp_dir("adapter-sample");
    let out = bin()
        .args(["sample", "--K", "2", "--I", "4", "--seed", "13", "--output-dir"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.join("sample.csv")).unwrap();
    let params = ValuationParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
    let matrix = valuation::sample(&params, 2, 4, 13).unwrap();
    for node in 0..2 {
        for rep in 0..4 {
            let s = matrix.get(node, rep);
            let line = format!("{node},{rep},{},{},{}", s.v_h, s.v_g, s.v);
            assert!(text.contains(&line), "missing {line}");
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn thread_count_does_not_change_sweep_outputs() {
    let dir = temp_dir("threads");
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("cfg.toml");
    std::fs::write(
        &config,
        r#"
master_seed = 3
replications = 12

[grid]
k_values = [5]
n_values = [2]
zeta_values = [0.0]
mechanisms = ["fpsb", "spsb", "vcg", "msaa"]

[valuation]
alpha = 1.0
beta = 1.0
a = 0.0
b = 1.0
sigma = 1.0
"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.join(format!("t{threads}"));
        let status = bin()
            .args(["sweep", "--config"])
            .arg(&config)
            .args(["--threads", threads, "--output-dir"])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(status.status.success());
        outputs.push(std::fs::read(out_dir.join("sweep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "thread count must not change results");
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn msaa_trace_matches_library_call() {
    let dir = temp_dir("adapter-msaa");
    let out = bin()
        .args([
            "msaa-trace",
            "--values",
            "1.0,0.4;0.8,0.7",
            "--reservation",
            "0.2",
            "--epsilon",
            "0.05",
            "--I-th",
            "200",
            "--seed",
            "5",
            "--output-dir",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let trace_text = std::fs::read_to_string(dir.join("trace.txt")).unwrap();
    let outcome_text = std::fs::read_to_string(dir.join("outcome.txt")).unwrap();
    let values: Matrix = "1.0,0.4;0.8,0.7".parse().unwrap();
    let instance = AuctionInstance::new(values, 0.0).unwrap();
    let config = mechanisms::MsaaConfig {
        reservation: vec![0.2, 0.2],
        epsilon: 0.05,
        max_iterations: 200,
    };
    let (outcome, trace) = mechanisms::run_msaa(&instance, &config, 5).unwrap();
    assert_eq!(trace_text, trace.to_text());
    assert_eq!(outcome_text, outcome.to_text());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn bne_analytic_column_matches_library_call() {
    let dir = temp_dir("adapter-bne");
    let out = bin()
        .args([
            "bne",
            "--K",
            "5",
            "--grid",
            "1.0:3.0:5",
            "--auctions",
            "300",
            "--seed",
            "2",
            "--output-dir",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.join("bne.csv")).unwrap();
    let params = ValuationParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
    let grid: Vec<f64> = (0..5).map(|i| 1.0 + 2.0 * i as f64 / 4.0).collect();
    let curve = equilibria::fpsb_curve_analytic(&params, 5, &grid).unwrap();
    for (v, b) in grid.iter().zip(&curve.bids) {
        let prefix = format!("{v},{b},");
        assert!(
            text.lines().any(|l| l.starts_with(&prefix)),
            "missing row starting with {prefix}"
        );
    }
    let _ = std::fs::remove_dir_all(&dir);
}
