//! Equilibrium bidding strategies for the sealed-bid auctions.
//!
//! Second-price bidding is truthful. First-price equilibrium bids solve
//!
//!   b(v) = v - integral(F^(K-1), lower..v) / F(v)^(K-1)
//!
//! for the composite valuation CDF F, evaluated by adaptive quadrature.
//! The same quantity can be estimated purely from samples as the mean of
//! truncated opponent maxima (the revenue-equivalence route), which this
//! module implements as `fpsb_bne_numeric`.

use crate::error::{Error, Result};
use crate::mechanisms::Mechanism;
use crate::numeric;
use crate::valuation::{self, ValuationMatrix, ValuationParams};

/// Floor reported by `mae_db` when two curves coincide.
pub const MAE_DB_FLOOR: f64 = -120.0;

/// Minimum retained columns for the numeric estimator to return a value.
pub const MIN_NUMERIC_COLUMNS: usize = 30;

/// A bidding curve b(v) sampled on an ascending valuation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BneCurve {
    pub grid: Vec<f64>,
    pub bids: Vec<f64>,
    /// Bidder count the curve was computed for.
    pub bidders: usize,
}

impl BneCurve {
    pub fn new(grid: Vec<f64>, bids: Vec<f64>, bidders: usize) -> Result<Self> {
        if grid.len() != bids.len() {
            return Err(Error::ShapeMismatch(format!(
                "grid has {} points, bids {}",
                grid.len(),
                bids.len()
            )));
        }
        Ok(BneCurve { grid, bids, bidders })
    }

    /// Check the equilibrium-curve invariants: bids nondecreasing along the
    /// grid and never above the valuation. Numeric (Monte Carlo) curves can
    /// violate these by estimator noise, so this is a check, not a guard.
    pub fn validate(&self) -> Result<()> {
        for w in self.bids.windows(2) {
            if w[1] < w[0] - 1e-9 {
                return Err(Error::Domain(format!("bids decrease: {} -> {}", w[0], w[1])));
            }
        }
        for (v, b) in self.grid.iter().zip(&self.bids) {
            if *b > *v + 1e-9 {
                return Err(Error::Domain(format!("bid {b} exceeds valuation {v}")));
            }
        }
        Ok(())
    }
}

/// Monte Carlo revenue estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenueEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: usize,
}

/// Second-price sealed-bid equilibrium: truthful bidding weakly dominates.
#[inline]
pub fn spsb_bid(v: f64) -> f64 {
    v
}

/// First-price equilibrium bid for the composite valuation distribution.
///
/// At the support lower bound the shading ratio is 0/0; by convention the
/// bid equals the bound itself.
pub fn fpsb_bne_analytic(params: &ValuationParams, bidders: usize, v: f64) -> Result<f64> {
    params.validate()?;
    check_bidders(bidders)?;
    if !v.is_finite() {
        return Err(Error::Domain(format!("valuation must be finite, got {v}")));
    }
    let lower = params.support_min();
    if v <= lower {
        return Ok(lower);
    }
    let cdf = |t: f64| valuation::cdf_unchecked(params, t);
    Ok(bne_quadrature(&cdf, lower, Some(params.support_max()), bidders, v))
}

/// First-price equilibrium bid for an arbitrary scalar valuation CDF.
pub fn fpsb_bne_general(
    cdf_fn: &impl Fn(f64) -> f64,
    lower: f64,
    bidders: usize,
    v: f64,
) -> Result<f64> {
    check_bidders(bidders)?;
    if !v.is_finite() || !lower.is_finite() {
        return Err(Error::Domain(format!("bounds must be finite, got lower={lower}, v={v}")));
    }
    if v <= lower {
        return Ok(lower);
    }
    if cdf_fn(v) <= 0.0 {
        return Err(Error::DegenerateDistribution(format!(
            "cdf carries no mass at v = {v} above lower = {lower}"
        )));
    }
    Ok(bne_quadrature(cdf_fn, lower, None, bidders, v))
}

/// Evaluate the analytic FPSB equilibrium on an ascending grid, reusing
/// quadrature segments cumulatively.
pub fn fpsb_curve_analytic(params: &ValuationParams, bidders: usize, grid: &[f64]) -> Result<BneCurve> {
    params.validate()?;
    check_bidders(bidders)?;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("grid must be strictly ascending".into()));
    }
    let lower = params.support_min();
    let trunc = params.support_max();
    let cdf = |t: f64| valuation::cdf_unchecked(params, t);
    let mut bids = Vec::with_capacity(grid.len());
    let mut prev = lower;
    let mut acc = 0.0;
    for &v in grid {
        if v <= lower {
            bids.push(lower);
            continue;
        }
        let hi = v.min(trunc);
        if hi > prev {
            acc += numeric::adaptive_simpson(&|t| cdf(t).powi(bidders as i32 - 1), prev, hi, 1e-8);
            prev = hi;
        }
        let integral = acc + (v - trunc).max(0.0);
        bids.push(shaded_bid(v, integral, cdf(v), bidders, lower));
    }
    BneCurve::new(grid.to_vec(), bids, bidders)
}

fn check_bidders(bidders: usize) -> Result<()> {
    if bidders < 2 {
        return Err(Error::Domain(format!(
            "equilibrium shading needs at least 2 bidders, got {bidders}"
        )));
    }
    Ok(())
}

/// Shading gap integral(F^(K-1), lower..v) / F(v)^(K-1), integrated in the
/// normalized form (F(t)/F(v))^(K-1) so the integrand stays in [0, 1] and
/// never underflows near the support boundary.
fn bne_quadrature(
    cdf: &impl Fn(f64) -> f64,
    lower: f64,
    trunc: Option<f64>,
    bidders: usize,
    v: f64,
) -> f64 {
    let k1 = bidders as i32 - 1;
    let fv = cdf(v);
    if fv <= 0.0 {
        // So little mass below v that the win probability vanishes; the
        // boundary convention applies.
        return lower;
    }
    let hi = trunc.map_or(v, |t| v.min(t));
    let mut gap = numeric::adaptive_simpson(&|t| (cdf(t) / fv).powi(k1), lower, hi, 1e-8);
    if let Some(t) = trunc {
        // Beyond the truncation point the CDF differs from 1 by < 1e-30.
        gap += (v - t).max(0.0) / fv.powi(k1);
    }
    (v - gap).clamp(lower, v)
}

fn shaded_bid(v: f64, integral: f64, cdf_v: f64, bidders: usize, lower: f64) -> f64 {
    let denom = cdf_v.powi(bidders as i32 - 1);
    if denom <= 0.0 {
        return lower;
    }
    (v - integral / denom).clamp(lower, v)
}

/// Numeric FPSB equilibrium estimate from a sampled valuation matrix.
///
/// Drops node `node`, truncates the remaining draws to those <= `v`,
/// regroups the retained sequence (scanned by replication, then by node)
/// into complete columns of K-1 opponents dropping the remainder from the
/// end, and averages the per-column maxima. That is the sample estimate of
/// E[max opponent value | all opponents below v], the equilibrium bid.
pub fn fpsb_bne_numeric(values: &ValuationMatrix, node: usize, v: f64) -> Result<f64> {
    if values.nodes < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 nodes for an opponent pool, got {}",
            values.nodes
        )));
    }
    if node >= values.nodes {
        return Err(Error::IndexOutOfRange(format!(
            "node {node} out of range for K = {}",
            values.nodes
        )));
    }
    if !v.is_finite() {
        return Err(Error::Domain(format!("valuation must be finite, got {v}")));
    }
    let opponents = values.nodes - 1;
    let mut column_max = f64::NEG_INFINITY;
    let mut filled = 0usize;
    let mut count = 0usize;
    let mut sum = 0.0;
    for rep in 0..values.replications {
        for k in 0..values.nodes {
            if k == node {
                continue;
            }
            let draw = values.get(k, rep).v;
            if draw <= v {
                column_max = column_max.max(draw);
                filled += 1;
                if filled == opponents {
                    sum += column_max;
                    count += 1;
                    filled = 0;
                    column_max = f64::NEG_INFINITY;
                }
            }
        }
    }
    if count < MIN_NUMERIC_COLUMNS {
        return Err(Error::InsufficientSamples { retained: count, required: MIN_NUMERIC_COLUMNS });
    }
    Ok(sum / count as f64)
}

/// p-th largest element of the sample (p = 1 is the maximum).
pub fn order_statistic(samples: &[f64], p: usize) -> Result<f64> {
    if p == 0 || p > samples.len() {
        return Err(Error::IndexOutOfRange(format!(
            "rank {p} out of range for {} samples",
            samples.len()
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sorted[p - 1])
}

/// Monte Carlo gateway revenue for a single-slot auction under equilibrium
/// bidding: SPSB revenue is the second order statistic of the values, FPSB
/// revenue is the equilibrium bid of the highest value.
pub fn expected_revenue(
    params: &ValuationParams,
    bidders: usize,
    mechanism: Mechanism,
    replications: usize,
    seed: u64,
) -> Result<RevenueEstimate> {
    check_bidders(bidders)?;
    if replications < 100 {
        return Err(Error::InvalidParams(format!(
            "need at least 100 replications, got {replications}"
        )));
    }
    let matrix = valuation::sample(params, bidders, replications, seed)?;
    let revenues: Vec<f64> = match mechanism {
        Mechanism::Spsb => (0..replications)
            .map(|i| order_statistic(&matrix.replication_values(i), 2).unwrap())
            .collect(),
        Mechanism::Fpsb => {
            // Evaluate the equilibrium bid at each replication's maximum,
            // sharing quadrature segments across sorted evaluation points.
            let maxima: Vec<f64> = (0..replications)
                .map(|i| {
                    matrix
                        .replication_values(i)
                        .into_iter()
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            let mut order: Vec<usize> = (0..replications).collect();
            order.sort_unstable_by(|&a, &b| maxima[a].partial_cmp(&maxima[b]).unwrap());
            let sorted: Vec<f64> = order.iter().map(|&i| maxima[i]).collect();
            let grid = dedup_ascending(&sorted);
            let curve = fpsb_curve_analytic(params, bidders, &grid)?;
            let mut out = vec![0.0; replications];
            let mut j = 0usize;
            for (pos, &i) in order.iter().enumerate() {
                while grid[j] < sorted[pos] {
                    j += 1;
                }
                out[i] = curve.bids[j];
            }
            out
        }
        other => {
            return Err(Error::InvalidParams(format!(
                "expected_revenue covers FPSB and SPSB, got {other}"
            )))
        }
    };
    let n = revenues.len() as f64;
    let mean = revenues.iter().sum::<f64>() / n;
    let var = revenues.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
    Ok(RevenueEstimate { mean, std_error: (var / n).sqrt(), replications })
}

fn dedup_ascending(sorted: &[f64]) -> Vec<f64> {
    let mut grid: Vec<f64> = Vec::with_capacity(sorted.len());
    for &v in sorted {
        if grid.last().is_none_or(|&g| v > g) {
            grid.push(v);
        }
    }
    grid
}

/// Scale-free log error between two bid curves on a shared grid:
/// 10*log10(mean |reference - candidate|) after normalizing both curves by
/// the reference maximum. Identical curves report the -120 dB floor.
pub fn mae_db(reference: &BneCurve, candidate: &BneCurve) -> Result<f64> {
    if reference.grid.len() != candidate.grid.len()
        || reference
            .grid
            .iter()
            .zip(&candidate.grid)
            .any(|(a, b)| a != b)
    {
        return Err(Error::ShapeMismatch("curves must share the same grid".into()));
    }
    if reference.grid.is_empty() {
        return Err(Error::ShapeMismatch("curves are empty".into()));
    }
    let scale = reference.bids.iter().cloned().fold(0.0f64, |m, b| m.max(b.abs()));
    if scale == 0.0 {
        return Ok(MAE_DB_FLOOR);
    }
    let mae = reference
        .bids
        .iter()
        .zip(&candidate.bids)
        .map(|(r, c)| ((r - c) / scale).abs())
        .sum::<f64>()
        / reference.bids.len() as f64;
    if mae <= 0.0 {
        return Ok(MAE_DB_FLOOR);
    }
    Ok((10.0 * mae.log10()).max(MAE_DB_FLOOR))
}
