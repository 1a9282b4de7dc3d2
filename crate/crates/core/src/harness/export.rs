//! Comma-separated exports of sweep results, plus long-format tables
//! for the standard figure set (surplus/revenue vs K, power gain and
//! fairness vs N).

use super::{SweepResult, SweepRow};
use crate::error::{Error, Result};
use std::path::{Path, PathBuf};

/// Fixed column order of the main sweep table.
pub const SWEEP_CSV_HEADER: &str = "mechanism,K,N,zeta,surplus_mean,surplus_se,revenue_mean,revenue_se,power_gain_mean,power_gain_se,fairness_mean,fairness_se,replications,failed";

/// Figure tables the exporter knows how to emit.
pub const FIGURES: [&str; 6] = ["fig6a", "fig6b", "fig7a", "fig7b", "fig8", "fig9"];

/// Render the main sweep table.
pub fn sweep_csv_string(result: &SweepResult) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.mechanism,
            r.k,
            r.n,
            r.zeta,
            r.surplus_mean,
            r.surplus_se,
            r.revenue_mean,
            r.revenue_se,
            r.power_gain_mean,
            r.power_gain_se,
            r.fairness_mean,
            r.fairness_se,
            r.replications,
            r.failed
        ));
    }
    out
}

/// Parse a document produced by [`sweep_csv_string`].
pub fn parse_sweep_csv(text: &str) -> Result<SweepResult> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == SWEEP_CSV_HEADER => {}
        other => {
            return Err(Error::Config(format!("unexpected sweep csv header: {other:?}")));
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 14 {
            return Err(Error::Config(format!("row {idx} has {} fields", fields.len())));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse().map_err(|e| Error::Config(format!("row {idx}: bad float {s:?}: {e}")))
        };
        let parse_u = |s: &str| -> Result<usize> {
            s.parse().map_err(|e| Error::Config(format!("row {idx}: bad integer {s:?}: {e}")))
        };
        rows.push(SweepRow {
            mechanism: fields[0].parse()?,
            k: parse_u(fields[1])?,
            n: parse_u(fields[2])?,
            zeta: parse_f(fields[3])?,
            surplus_mean: parse_f(fields[4])?,
            surplus_se: parse_f(fields[5])?,
            revenue_mean: parse_f(fields[6])?,
            revenue_se: parse_f(fields[7])?,
            power_gain_mean: parse_f(fields[8])?,
            power_gain_se: parse_f(fields[9])?,
            fairness_mean: parse_f(fields[10])?,
            fairness_se: parse_f(fields[11])?,
            replications: parse_u(fields[12])?,
            failed: fields[13]
                .parse()
                .map_err(|e| Error::Config(format!("row {idx}: bad bool: {e}")))?,
        });
    }
    Ok(SweepResult { rows })
}

/// Long-format table for one paper figure.
///
/// fig6a/fig6b: surplus vs K at zeta = 0 / zeta > 0.
/// fig7a/fig7b: revenue and surplus vs K at zeta = 0 / zeta > 0.
/// fig8: power gain vs N. fig9: fairness vs N (all zeta rows).
pub fn figure_table(result: &SweepResult, figure: &str) -> Result<String> {
    let risk_free = |r: &&SweepRow| r.zeta == 0.0;
    let risky = |r: &&SweepRow| r.zeta > 0.0;
    let mut out = String::new();
    match figure {
        "fig6a" | "fig6b" => {
            out.push_str("mechanism,zeta,K,S_mean,S_se\n");
            let keep: &dyn Fn(&&SweepRow) -> bool =
                if figure == "fig6a" { &risk_free } else { &risky };
            for r in result.rows.iter().filter(keep) {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.mechanism, r.zeta, r.k, r.surplus_mean, r.surplus_se
                ));
            }
        }
        "fig7a" | "fig7b" => {
            out.push_str("mechanism,zeta,K,R_mean,R_se,S_mean,S_se\n");
            let keep: &dyn Fn(&&SweepRow) -> bool =
                if figure == "fig7a" { &risk_free } else { &risky };
            for r in result.rows.iter().filter(keep) {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.mechanism, r.zeta, r.k, r.revenue_mean, r.revenue_se, r.surplus_mean, r.surplus_se
                ));
            }
        }
        "fig8" => {
            out.push_str("mechanism,zeta,N,P_G_mean,P_G_se\n");
            for r in &result.rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.mechanism, r.zeta, r.n, r.power_gain_mean, r.power_gain_se
                ));
            }
        }
        "fig9" => {
            out.push_str("mechanism,zeta,N,eta_H_mean,eta_H_se\n");
            for r in &result.rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.mechanism, r.zeta, r.n, r.fairness_mean, r.fairness_se
                ));
            }
        }
        other => {
            return Err(Error::Config(format!("unknown figure {other:?}; expected one of {FIGURES:?}")));
        }
    }
    Ok(out)
}

/// Write sweep.csv plus any requested figure tables into `dir`. Returns the
/// written paths in a fixed order.
pub fn export(result: &SweepResult, dir: &Path, figures: &[String]) -> Result<Vec<PathBuf>> {
    let io_err = |path: &Path, e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source: e,
    };
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    let main = dir.join("sweep.csv");
    std::fs::write(&main, sweep_csv_string(result)).map_err(|e| io_err(&main, e))?;
    written.push(main);
    for figure in figures {
        let table = figure_table(result, figure)?;
        let path = dir.join(format!("{figure}.csv"));
        std::fs::write(&path, table).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
