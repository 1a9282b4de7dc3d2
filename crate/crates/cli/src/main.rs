//! Command-line front end: sampling, equilibrium curves, single auctions,
//! ascending-auction traces, sweeps, and dispersion optimization. Every
//! subcommand is a thin adapter over the library; all randomness flows from
//! `--seed`, and identical invocations write identical files.
//!
//! Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.

use auctionsim::equilibria::{self, BneCurve};
use auctionsim::harness;
use auctionsim::matrix::Matrix;
use auctionsim::mechanisms::{self, AuctionInstance, Mechanism, MsaaConfig};
use auctionsim::stfs::{self, DispersionState, DispersionTolerances, SlotGrid, StfsInstance};
use auctionsim::valuation::{self, ValuationParams};
use auctionsim::Error;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "auctionsim", about = "Sealed-bid auction simulation for STFS slot allocation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ValuationArgs {
    /// Weight on the uniform hypothesis term.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Weight on the Rayleigh channel term.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Lower bound of the hypothesis support.
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// Upper bound of the hypothesis support.
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Rayleigh scale.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

impl ValuationArgs {
    fn params(&self) -> Result<ValuationParams, Error> {
        ValuationParams::new(self.alpha, self.beta, self.a, self.b, self.sigma)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw a seeded valuation matrix and write it as CSV.
    Sample {
        #[command(flatten)]
        valuation: ValuationArgs,
        /// Node count.
        #[arg(long = "K", default_value_t = 5)]
        k: usize,
        /// Auction replications.
        #[arg(long = "I", default_value_t = 2000)]
        i: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Analytic and numeric first-price equilibrium curves on a grid.
    Bne {
        #[command(flatten)]
        valuation: ValuationArgs,
        /// Bidder count.
        #[arg(long = "K", default_value_t = 5)]
        k: usize,
        /// Valuation grid as lo:hi:points.
        #[arg(long, default_value = "0.1:4.0:200")]
        grid: String,
        /// Auction draws behind the numeric estimator.
        #[arg(long, default_value_t = 2000)]
        auctions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Monte Carlo revenue-equivalence comparison of FPSB and SPSB.
    Ret {
        #[command(flatten)]
        valuation: ValuationArgs,
        /// Comma-separated bidder counts.
        #[arg(long = "K", default_value = "2,5,10")]
        k: String,
        #[arg(long, default_value_t = 100_000)]
        replications: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Run one sealed-bid auction on an inline value matrix.
    Auction {
        /// fpsb, spsb or vcg.
        #[arg(long)]
        mechanism: String,
        /// Inline K x N matrix: rows split by ';', entries by ','.
        #[arg(long)]
        values: String,
        /// Bids for fpsb/spsb (defaults to truthful values on the slot).
        #[arg(long)]
        bids: Option<String>,
        /// Slot auctioned by fpsb/spsb.
        #[arg(long, default_value_t = 0)]
        slot: usize,
        /// Risk percentage shading the reported values.
        #[arg(long, default_value_t = 0.0)]
        zeta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Run the modified simultaneous ascending auction and dump its trace.
    MsaaTrace {
        /// Inline K x N matrix: rows split by ';', entries by ','.
        #[arg(long)]
        values: String,
        /// Reservation price: one value for all slots or a comma list.
        #[arg(long, default_value = "0")]
        reservation: String,
        /// Price increment (default: 1% of the largest valuation).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Iteration cap (default: derived from the price range).
        #[arg(long = "I-th")]
        max_iterations: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Run a sweep described by a TOML config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for replication parallelism (0 = default).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Optimize dispersion vectors on a seeded instance and dump the
    /// before/after constellations.
    Disperse {
        #[arg(long, default_value_t = 12)]
        nodes: usize,
        #[arg(long, default_value_t = 4)]
        time_slots: usize,
        #[arg(long, default_value_t = 3)]
        freq_slots: usize,
        /// Receiver noise standard deviation.
        #[arg(long, default_value_t = 0.1)]
        noise_sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Io { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io { path: dir.display().to_string(), source: e })?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParams(format!("grid must be lo:hi:points, got {spec:?}")));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|e| Error::InvalidParams(format!("bad grid lower bound: {e}")))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|e| Error::InvalidParams(format!("bad grid upper bound: {e}")))?;
    let points: usize = parts[2]
        .parse()
        .map_err(|e| Error::InvalidParams(format!("bad grid point count: {e}")))?;
    if hi.is_nan() || lo.is_nan() || hi <= lo || points < 2 {
        return Err(Error::InvalidParams(format!("grid needs hi > lo and >= 2 points, got {spec:?}")));
    }
    Ok((0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect())
}

fn parse_list<T: std::str::FromStr>(spec: &str, what: &str) -> Result<Vec<T>, Error>
where
    T::Err: std::fmt::Display,
{
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| Error::InvalidParams(format!("bad {what} entry {s:?}: {e}")))
        })
        .collect()
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Sample { valuation, k, i, seed, output_dir } => {
            let params = valuation.params()?;
            let matrix = valuation::sample(&params, k, i, seed)?;
            let mut out = String::from("node,replication,v_h,v_g,v\n");
            for node in 0..k {
                for rep in 0..i {
                    let s = matrix.get(node, rep);
                    let _ = writeln!(out, "{node},{rep},{},{},{}", s.v_h, s.v_g, s.v);
                }
            }
            write_file(&output_dir, "sample.csv", &out)?;
            Ok(())
        }
        Command::Bne { valuation, k, grid, auctions, seed, output_dir } => {
            let params = valuation.params()?;
            let gridpts = parse_grid(&grid)?;
            let analytic = equilibria::fpsb_curve_analytic(&params, k, &gridpts)?;
            let matrix = valuation::sample(&params, k, auctions, seed)?;
            let mut out = String::from("v,analytic_bid,numeric_bid\n");
            let mut valid_grid = Vec::new();
            let mut valid_ref = Vec::new();
            let mut valid_num = Vec::new();
            for (idx, &v) in gridpts.iter().enumerate() {
                match equilibria::fpsb_bne_numeric(&matrix, 0, v) {
                    Ok(est) => {
                        let _ = writeln!(out, "{v},{},{est}", analytic.bids[idx]);
                        valid_grid.push(v);
                        valid_ref.push(analytic.bids[idx]);
                        valid_num.push(est);
                    }
                    Err(Error::InsufficientSamples { .. }) => {
                        let _ = writeln!(out, "{v},{},nan", analytic.bids[idx]);
                    }
                    Err(e) => return Err(e),
                }
            }
            if valid_grid.len() >= 2 {
                let reference = BneCurve::new(valid_grid.clone(), valid_ref, k)?;
                let candidate = BneCurve::new(valid_grid, valid_num, k)?;
                let db = equilibria::mae_db(&reference, &candidate)?;
                let _ = writeln!(out, "# mae_db={db}");
            } else {
                let _ = writeln!(out, "# mae_db=nan");
            }
            write_file(&output_dir, "bne.csv", &out)?;
            Ok(())
        }
        Command::Ret { valuation, k, replications, seed, output_dir } => {
            let params = valuation.params()?;
            let k_values: Vec<usize> = parse_list(&k, "K")?;
            let mut out = String::from("K,fpsb_mean,fpsb_se,spsb_mean,spsb_se,relative_gap\n");
            for k in k_values {
                let f = equilibria::expected_revenue(&params, k, Mechanism::Fpsb, replications, seed)?;
                let s = equilibria::expected_revenue(&params, k, Mechanism::Spsb, replications, seed)?;
                let gap = (f.mean - s.mean).abs() / s.mean.max(f64::MIN_POSITIVE);
                let _ = writeln!(
                    out,
                    "{k},{},{},{},{},{gap}",
                    f.mean, f.std_error, s.mean, s.std_error
                );
            }
            write_file(&output_dir, "ret.csv", &out)?;
            Ok(())
        }
        Command::Auction { mechanism, values, bids, slot, zeta, seed, output_dir } => {
            let mechanism: Mechanism = mechanism.parse()?;
            let true_values: Matrix = values.parse()?;
            let reported = mechanisms::apply_risk(&true_values, zeta)?;
            let instance = AuctionInstance::new(reported, zeta)?;
            let outcome = match mechanism {
                Mechanism::Vcg => mechanisms::run_vcg(&instance)?,
                Mechanism::Fpsb | Mechanism::Spsb => {
                    let bid_vec: Vec<f64> = match &bids {
                        Some(spec) => parse_list(spec, "bid")?,
                        None => {
                            (0..instance.nodes()).map(|k| instance.values.get(k, slot)).collect()
                        }
                    };
                    match mechanism {
                        Mechanism::Fpsb => mechanisms::run_fpsb(&instance, &bid_vec, slot, seed)?,
                        _ => mechanisms::run_spsb(&instance, &bid_vec, slot, seed)?,
                    }
                }
                Mechanism::Msaa => {
                    return Err(Error::InvalidParams(
                        "use the msaa-trace subcommand for the ascending auction".into(),
                    ))
                }
            };
            let mut text = outcome.to_text();
            if zeta > 0.0 {
                let (true_surplus, true_revenue) = mechanisms::utilities(&outcome, &true_values)?;
                let joined =
                    true_surplus.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                let _ = writeln!(text, "true_surplus={joined}");
                let _ = writeln!(text, "true_revenue={true_revenue}");
            }
            write_file(&output_dir, "outcome.txt", &text)?;
            Ok(())
        }
        Command::MsaaTrace { values, reservation, epsilon, max_iterations, seed, output_dir } => {
            let values: Matrix = values.parse()?;
            let slots = values.cols();
            let mut reservation: Vec<f64> = parse_list(&reservation, "reservation")?;
            if reservation.len() == 1 {
                reservation = vec![reservation[0]; slots];
            }
            let instance = AuctionInstance::new(values, 0.0)?;
            let defaults = MsaaConfig::defaults_for(&instance);
            let config = MsaaConfig {
                reservation,
                epsilon: epsilon.unwrap_or(defaults.epsilon),
                max_iterations: max_iterations.unwrap_or(defaults.max_iterations),
            };
            let (outcome, trace) = mechanisms::run_msaa(&instance, &config, seed)?;
            write_file(&output_dir, "trace.txt", &trace.to_text())?;
            write_file(&output_dir, "outcome.txt", &outcome.to_text())?;
            Ok(())
        }
        Command::Sweep { config, seed, threads, output_dir } => {
            if threads > 0 {
                // Ignore failures from setting the pool twice in one process.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
            let config = harness::load_sweep_config(&config, seed)?;
            let result = harness::run_sweep(&config.spec)?;
            let written = harness::export(&result, &output_dir, &config.figures)?;
            for path in &written[1..] {
                println!("wrote {}", path.display());
            }
            println!("wrote {}", written[0].display());
            Ok(())
        }
        Command::Disperse { nodes, time_slots, freq_slots, noise_sigma, seed, output_dir } => {
            if nodes == 0 || time_slots == 0 || freq_slots == 0 {
                return Err(Error::InvalidParams("nodes and grid dimensions must be >= 1".into()));
            }
            let mut instance = StfsInstance::random(nodes, SlotGrid::new(time_slots, freq_slots), seed);
            instance.noise_sigma = noise_sigma;
            let initial = DispersionState::uncompensated(&instance);
            let run = stfs::optimize_dispersion(&instance, &initial, &DispersionTolerances::default())?;
            let mut out = String::from("# dispersion optimization\n");
            let _ = writeln!(out, "nodes={nodes}");
            let _ = writeln!(out, "grid={time_slots}x{freq_slots}");
            let _ = writeln!(out, "initial_objective={}", stfs::objective(&instance, &initial));
            let _ = writeln!(out, "final_objective={}", run.objective);
            let _ = writeln!(out, "iterations={}", run.iterations);
            let _ = writeln!(out, "converged={}", run.converged);
            let _ = writeln!(
                out,
                "initial_aggregate_residual={}",
                stfs::aggregate_residual(&instance, &initial)
            );
            let _ = writeln!(
                out,
                "final_aggregate_residual={}",
                stfs::aggregate_residual(&instance, &run.state)
            );
            out.push_str("stage,node,r,theta,objective_contribution\n");
            for (label, state) in [("before", &initial), ("after", &run.state)] {
                for k in 0..nodes {
                    let single = stfs::node_deviation(&instance, state, k);
                    let _ = writeln!(
                        out,
                        "{label},{k},{},{},{single}",
                        state.a[k].norm(),
                        state.a[k].arg()
                    );
                }
            }
            write_file(&output_dir, "constellation.txt", &out)?;
            write_file(
                &output_dir,
                "instance.txt",
                &stfs::constellation_text(&instance, &run.state),
            )?;
            Ok(())
        }
    }
}
