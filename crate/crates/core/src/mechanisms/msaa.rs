//! Modified simultaneous ascending auction.
//!
//! The gateway posts reservation prices, nodes whose valuation clears some
//! slot enter, and prices ascend by a fixed increment on contested slots.
//! Standing winners keep their slot until outbid at the incremented price;
//! losers that can no longer reach nonnegative surplus anywhere at the next
//! price level are dropped permanently. The auction ends when no active
//! loser remains or the iteration cap is hit.

use super::{AuctionInstance, AuctionOutcome, Mechanism, TieDraw};
use crate::error::{Error, Result};
use crate::rng::{self, tag};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;

/// Diagnostic emitted when no node clears any reservation price.
pub const NO_AUCTION_MESSAGE: &str =
    "cannot be performed due to higher reservation prices";

#[derive(Debug, Clone)]
pub struct MsaaConfig {
    /// Initial reservation price per slot (length N).
    pub reservation: Vec<f64>,
    /// Constant price increment.
    pub epsilon: f64,
    /// Iteration cap on the ascending loop.
    pub max_iterations: usize,
}

impl MsaaConfig {
    /// Defaults derived from the reported valuation matrix: zero reservation,
    /// epsilon = 1% of the largest initial valuation, and a cap that the
    /// ascending dynamics cannot reach before prices exhaust every valuation.
    pub fn defaults_for(instance: &AuctionInstance) -> Self {
        let slots = instance.values.cols();
        let max_v = instance.values.max_value().max(0.0);
        let epsilon = if max_v > 0.0 { 0.01 * max_v } else { 0.01 };
        MsaaConfig {
            reservation: vec![0.0; slots],
            epsilon,
            max_iterations: Self::iteration_bound(max_v, 0.0, epsilon, slots),
        }
    }

    /// Cap covering the worst case of every slot ascending through the whole
    /// price range one increment at a time.
    pub fn iteration_bound(max_value: f64, min_reservation: f64, epsilon: f64, slots: usize) -> usize {
        let range = (max_value - min_reservation).max(0.0);
        let per_slot = (range / epsilon).ceil() as usize + 2;
        (slots.max(10) * per_slot).max(1)
    }

    pub fn validate(&self, slots: usize) -> Result<()> {
        if self.reservation.len() != slots {
            return Err(Error::ShapeMismatch(format!(
                "reservation vector has {} entries for {slots} slots",
                self.reservation.len()
            )));
        }
        if self.reservation.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidParams("reservation prices must be finite and >= 0".into()));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParams(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParams("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsaaStatus {
    /// The active-loser set emptied.
    Completed,
    /// The iteration cap fired first.
    IterationCapped,
    /// No node cleared any reservation price.
    NoAuction,
}

/// Snapshot of one auction round.
#[derive(Debug, Clone, PartialEq)]
pub struct MsaaIteration {
    pub index: usize,
    /// Standing prices after this round's increments.
    pub prices: Vec<f64>,
    /// (node, slot) tentative winners.
    pub winners: Vec<(usize, usize)>,
    /// Participating nodes without a slot this round.
    pub losers: Vec<usize>,
    /// Losers still able to reach nonnegative surplus at the next price level.
    pub active_losers: Vec<usize>,
    /// Cumulative set of permanently dropped nodes after this round.
    pub dropped: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct MsaaTrace {
    pub status: MsaaStatus,
    pub message: Option<String>,
    pub iterations: Vec<MsaaIteration>,
}

impl MsaaTrace {
    /// Terminal iteration count (number of recorded rounds).
    pub fn terminal_iteration(&self) -> usize {
        self.iterations.len()
    }

    /// Per-node (loser-to-winner, winner-to-loser) swap counts observed
    /// between consecutive rounds: the empirical transition frequencies of
    /// the winner/loser state graph.
    pub fn swap_counts(&self, nodes: usize) -> Vec<(usize, usize)> {
        let mut counts = vec![(0usize, 0usize); nodes];
        for pair in self.iterations.windows(2) {
            let before: Vec<usize> = pair[0].winners.iter().map(|&(k, _)| k).collect();
            let after: Vec<usize> = pair[1].winners.iter().map(|&(k, _)| k).collect();
            for &k in &after {
                if !before.contains(&k) {
                    counts[k].0 += 1;
                }
            }
            for &k in &before {
                if !after.contains(&k) {
                    counts[k].1 += 1;
                }
            }
        }
        counts
    }

    /// Line-oriented form: one record per iteration.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# msaa trace\n");
        let status = match self.status {
            MsaaStatus::Completed => "completed",
            MsaaStatus::IterationCapped => "iteration-capped",
            MsaaStatus::NoAuction => "no-auction",
        };
        let _ = writeln!(out, "status={status}");
        if let Some(msg) = &self.message {
            let _ = writeln!(out, "message={msg}");
        }
        let _ = writeln!(out, "iterations={}", self.iterations.len());
        for it in &self.iterations {
            let prices = join(it.prices.iter());
            let winners = it
                .winners
                .iter()
                .map(|(k, n)| format!("{k}:{n}"))
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(
                out,
                "iter={} prices={} winners={} losers={} active={} dropped={}",
                it.index,
                prices,
                winners,
                join(it.losers.iter()),
                join(it.active_losers.iter()),
                join(it.dropped.iter()),
            );
        }
        out
    }
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

/// Run the ascending auction, returning the outcome and full trace.
pub fn run_msaa(
    instance: &AuctionInstance,
    config: &MsaaConfig,
    seed: u64,
) -> Result<(AuctionOutcome, MsaaTrace)> {
    engine(instance, config, seed, true)
}

/// Trace-free variant for sweeps.
pub fn run_msaa_outcome(instance: &AuctionInstance, config: &MsaaConfig, seed: u64) -> Result<AuctionOutcome> {
    Ok(engine(instance, config, seed, false)?.0)
}

fn engine(
    instance: &AuctionInstance,
    config: &MsaaConfig,
    seed: u64,
    record: bool,
) -> Result<(AuctionOutcome, MsaaTrace)> {
    instance.validate()?;
    let nodes = instance.values.rows();
    let slots = instance.values.cols();
    config.validate(slots)?;
    let values = &instance.values;

    // Kick-off: a node enters only if some slot's valuation clears its
    // reservation price.
    let cleared: Vec<bool> = (0..nodes)
        .map(|k| (0..slots).any(|n| values.get(k, n) >= config.reservation[n]))
        .collect();
    if cleared.iter().all(|&c| !c) {
        let outcome = AuctionOutcome::empty(Mechanism::Msaa, nodes, slots);
        let trace = MsaaTrace {
            status: MsaaStatus::NoAuction,
            message: Some(NO_AUCTION_MESSAGE.to_string()),
            iterations: Vec::new(),
        };
        return Ok((outcome, trace));
    }

    let eps = config.epsilon;
    let mut prices: Vec<f64> = config.reservation.iter().map(|r| r + eps).collect();
    let mut standing: Vec<Option<usize>> = vec![None; slots];
    let mut dropped: Vec<bool> = (0..nodes).map(|k| !cleared[k]).collect();
    let mut ties: Vec<TieDraw> = Vec::new();
    let mut iterations: Vec<MsaaIteration> = Vec::new();
    let mut lottery = rng::stream(seed, &[tag::TIE]);

    // Round 0: every cleared node signals demand at the opening prices.
    let opening: Vec<usize> = (0..nodes).filter(|&k| cleared[k]).collect();
    let demands = collect_demands(values, &opening, &prices, 0.0);
    assign_contested(&demands, &mut standing, &mut prices, 0.0, &mut lottery, &mut ties, slots);
    let mut active = refresh_losers(
        values, &cleared, &mut dropped, &standing, &prices, eps, record, 0, &mut iterations,
    );

    let mut index = 1usize;
    let status = loop {
        if active.is_empty() {
            break MsaaStatus::Completed;
        }
        if index > config.max_iterations {
            break MsaaStatus::IterationCapped;
        }
        // Active losers bid at the incremented price; contested slots rise
        // by epsilon and the lottery picks the new standing winner.
        let demands = collect_demands(values, &active, &prices, eps);
        assign_contested(&demands, &mut standing, &mut prices, eps, &mut lottery, &mut ties, slots);
        active = refresh_losers(
            values, &cleared, &mut dropped, &standing, &prices, eps, record, index, &mut iterations,
        );
        index += 1;
    };

    let mut outcome = AuctionOutcome::empty(Mechanism::Msaa, nodes, slots);
    for (n, holder) in standing.iter().enumerate() {
        if let Some(k) = *holder {
            outcome.assignment[k] = Some(n);
            outcome.payments[k] = prices[n];
            outcome.surplus[k] = values.get(k, n) - prices[n];
        }
    }
    outcome.revenue = outcome.payments.iter().sum();
    outcome.tie_lottery_draws = ties;
    let trace = MsaaTrace { status, message: None, iterations };
    Ok((outcome, trace))
}

/// Each bidder signals binary demand for its surplus-maximizing slot at
/// price + markup, ties to the lowest slot index; no demand when the best
/// surplus is negative.
fn collect_demands(
    values: &crate::matrix::Matrix,
    bidders: &[usize],
    prices: &[f64],
    markup: f64,
) -> Vec<(usize, usize)> {
    let mut demands = Vec::with_capacity(bidders.len());
    for &k in bidders {
        let mut best_slot = 0usize;
        let mut best_surplus = f64::NEG_INFINITY;
        for (n, price) in prices.iter().enumerate() {
            let s = values.get(k, n) - (price + markup);
            if s > best_surplus {
                best_surplus = s;
                best_slot = n;
            }
        }
        if best_surplus >= 0.0 {
            demands.push((k, best_slot));
        }
    }
    demands
}

#[allow(clippy::too_many_arguments)]
fn assign_contested(
    demands: &[(usize, usize)],
    standing: &mut [Option<usize>],
    prices: &mut [f64],
    markup: f64,
    lottery: &mut ChaCha8Rng,
    ties: &mut Vec<TieDraw>,
    slots: usize,
) {
    for n in 0..slots {
        let candidates: Vec<usize> =
            demands.iter().filter(|&&(_, slot)| slot == n).map(|&(k, _)| k).collect();
        if candidates.is_empty() {
            continue;
        }
        prices[n] += markup;
        let winner = if candidates.len() == 1 {
            candidates[0]
        } else {
            let chosen = rng::choose_index(lottery, candidates.len());
            ties.push(TieDraw { slot: n, candidates: candidates.clone(), chosen: candidates[chosen] });
            candidates[chosen]
        };
        // Any previous holder is outbid and returns to the loser pool.
        standing[n] = Some(winner);
    }
}

/// Split the participating non-winners into active losers (nonnegative
/// surplus somewhere at the next price level) and permanently dropped
/// nodes, and record the round.
#[allow(clippy::too_many_arguments)]
fn refresh_losers(
    values: &crate::matrix::Matrix,
    cleared: &[bool],
    dropped: &mut [bool],
    standing: &[Option<usize>],
    prices: &[f64],
    eps: f64,
    record: bool,
    index: usize,
    iterations: &mut Vec<MsaaIteration>,
) -> Vec<usize> {
    let nodes = values.rows();
    let is_standing: Vec<bool> = {
        let mut v = vec![false; nodes];
        for holder in standing.iter().flatten() {
            v[*holder] = true;
        }
        v
    };
    let losers: Vec<usize> = (0..nodes)
        .filter(|&k| cleared[k] && !dropped[k] && !is_standing[k])
        .collect();
    let mut active = Vec::new();
    for &k in &losers {
        let best = (0..prices.len())
            .map(|n| values.get(k, n) - (prices[n] + eps))
            .fold(f64::NEG_INFINITY, f64::max);
        if best >= 0.0 {
            active.push(k);
        } else {
            dropped[k] = true;
        }
    }
    if record {
        let winners: Vec<(usize, usize)> = standing
            .iter()
            .enumerate()
            .filter_map(|(n, holder)| holder.map(|k| (k, n)))
            .collect();
        iterations.push(MsaaIteration {
            index,
            prices: prices.to_vec(),
            winners,
            losers: losers.clone(),
            active_losers: active.clone(),
            dropped: (0..nodes).filter(|&k| dropped[k]).collect(),
        });
    }
    active
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn instance(values: &str) -> AuctionInstance {
        AuctionInstance::new(values.parse::<Matrix>().unwrap(), 0.0).unwrap()
    }

    #[test]
    fn single_node_single_slot_hand_trace() {
        // r = 0.2, eps = 0.1: the node wins at the opening price 0.3 and the
        // loop never runs.
        let inst = instance("1.0");
        let cfg = MsaaConfig { reservation: vec![0.2], epsilon: 0.1, max_iterations: 100 };
        let (outcome, trace) = run_msaa(&inst, &cfg, 1).unwrap();
        assert_eq!(outcome.assignment[0], Some(0));
        assert!((outcome.payments[0] - 0.3).abs() < 1e-12);
        assert_eq!(trace.status, MsaaStatus::Completed);
        assert_eq!(trace.terminal_iteration(), 1);
        assert!(trace.iterations[0].active_losers.is_empty());
    }

    #[test]
    fn no_auction_branch() {
        let inst = instance("0.1,0.2;0.15,0.1");
        let cfg = MsaaConfig { reservation: vec![0.5, 0.5], epsilon: 0.05, max_iterations: 50 };
        let (outcome, trace) = run_msaa(&inst, &cfg, 1).unwrap();
        assert_eq!(trace.status, MsaaStatus::NoAuction);
        assert_eq!(trace.message.as_deref(), Some(NO_AUCTION_MESSAGE));
        assert!(outcome.assignment.iter().all(Option::is_none));
        assert_eq!(outcome.revenue, 0.0);
    }

    #[test]
    fn contested_slot_prices_ascend() {
        // Two nodes, one slot: prices must rise until one drops out, and the
        // winner's surplus at reported values stays nonnegative.
        let inst = instance("1.0;0.6");
        let cfg = MsaaConfig { reservation: vec![0.0], epsilon: 0.05, max_iterations: 1000 };
        let (outcome, trace) = run_msaa(&inst, &cfg, 3).unwrap();
        assert_eq!(trace.status, MsaaStatus::Completed);
        assert_eq!(outcome.assignment[0], Some(0), "higher value wins");
        assert!(outcome.payments[0] >= 0.6 - 0.05 - 1e-12, "price near the loser's value");
        assert!(outcome.surplus[0] >= 0.0);
        for pair in trace.iterations.windows(2) {
            assert!(pair[1].prices[0] >= pair[0].prices[0], "prices never decrease");
        }
    }

    #[test]
    fn five_nodes_three_slots_terminates_feasibly() {
        let values = crate::valuation::sample(
            &crate::valuation::ValuationParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap(),
            5,
            3,
            77,
        )
        .unwrap();
        let m = Matrix::from_vec(
            5,
            3,
            (0..5).flat_map(|k| (0..3).map(move |n| (k, n))).map(|(k, n)| values.get(k, n).v).collect(),
        )
        .unwrap();
        let inst = AuctionInstance::new(m, 0.0).unwrap();
        let cfg = MsaaConfig::defaults_for(&inst);
        let (outcome, trace) = run_msaa(&inst, &cfg, 9).unwrap();
        assert_eq!(trace.status, MsaaStatus::Completed);
        assert!(trace.terminal_iteration() < cfg.max_iterations);
        outcome.validate_feasibility().unwrap();
        for k in 0..5 {
            if outcome.assignment[k].is_some() {
                assert!(outcome.surplus[k] >= 0.0);
            }
        }
    }

    #[test]
    fn trace_text_is_line_oriented() {
        let inst = instance("1.0;0.6");
        let cfg = MsaaConfig { reservation: vec![0.0], epsilon: 0.1, max_iterations: 100 };
        let (_, trace) = run_msaa(&inst, &cfg, 3).unwrap();
        let text = trace.to_text();
        assert!(text.starts_with("# msaa trace\nstatus=completed\n"));
        assert!(text.lines().any(|l| l.starts_with("iter=0 prices=")));
    }
}
