//! The four sealed-bid auction mechanisms over a K-node, N-slot instance.
//!
//! FPSB and SPSB are single-object auctions; multi-slot runs chain them in
//! slot order with winners excluded from later slots. VCG allocates by
//! maximum-value assignment and charges Clarke pivot payments. The modified
//! simultaneous ascending auction lives in [`msaa`].

mod hungarian;
pub mod msaa;

pub use hungarian::{max_assignment, max_assignment_value};
pub use msaa::{run_msaa, run_msaa_outcome, MsaaConfig, MsaaIteration, MsaaStatus, MsaaTrace, NO_AUCTION_MESSAGE};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{self, tag};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

/// Auction mechanism selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Fpsb,
    Spsb,
    Vcg,
    Msaa,
}

impl Mechanism {
    pub const ALL: [Mechanism; 4] = [Mechanism::Fpsb, Mechanism::Spsb, Mechanism::Vcg, Mechanism::Msaa];

    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Fpsb => "fpsb",
            Mechanism::Spsb => "spsb",
            Mechanism::Vcg => "vcg",
            Mechanism::Msaa => "msaa",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fpsb" => Ok(Mechanism::Fpsb),
            "spsb" => Ok(Mechanism::Spsb),
            "vcg" => Ok(Mechanism::Vcg),
            "msaa" => Ok(Mechanism::Msaa),
            other => Err(Error::InvalidParams(format!("unknown mechanism {other:?}"))),
        }
    }
}

/// A K-node, N-slot auction instance holding the reported valuation matrix.
#[derive(Debug, Clone)]
pub struct AuctionInstance {
    /// Node k's valuation of slot n (K x N, nonnegative).
    pub values: Matrix,
    /// Risk percentage the reported values were shaded with (bookkeeping).
    pub zeta: f64,
}

impl AuctionInstance {
    pub fn new(values: Matrix, zeta: f64) -> Result<Self> {
        let inst = AuctionInstance { values, zeta };
        inst.validate()?;
        Ok(inst)
    }

    pub fn nodes(&self) -> usize {
        self.values.rows()
    }

    pub fn slots(&self) -> usize {
        self.values.cols()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.values.is_finite() || !self.values.is_nonnegative() {
            return Err(Error::InvalidParams("valuations must be finite and >= 0".into()));
        }
        if self.zeta.is_nan() || self.zeta < 0.0 {
            return Err(Error::InvalidParams(format!("zeta must be >= 0, got {}", self.zeta)));
        }
        Ok(())
    }
}

/// Record of a fair-lottery tie resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieDraw {
    pub slot: usize,
    pub candidates: Vec<usize>,
    pub chosen: usize,
}

/// Result of one auction run: allocation, payments, per-node surplus at the
/// reported values, and gateway revenue.
#[derive(Debug, Clone)]
pub struct AuctionOutcome {
    pub mechanism: Mechanism,
    pub nodes: usize,
    pub slots: usize,
    /// node -> allocated slot. One slot per node, one node per slot.
    pub assignment: Vec<Option<usize>>,
    pub payments: Vec<f64>,
    pub surplus: Vec<f64>,
    pub revenue: f64,
    pub tie_lottery_draws: Vec<TieDraw>,
}

impl AuctionOutcome {
    pub(crate) fn empty(mechanism: Mechanism, nodes: usize, slots: usize) -> Self {
        AuctionOutcome {
            mechanism,
            nodes,
            slots,
            assignment: vec![None; nodes],
            payments: vec![0.0; nodes],
            surplus: vec![0.0; nodes],
            revenue: 0.0,
            tie_lottery_draws: Vec::new(),
        }
    }

    pub fn winners(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignment.iter().enumerate().filter_map(|(k, s)| s.map(|n| (k, n)))
    }

    /// Binary indicator matrix C (K x N).
    pub fn indicator(&self) -> Matrix {
        let mut c = Matrix::zeros(self.nodes, self.slots);
        for (k, n) in self.winners() {
            c.set(k, n, 1.0);
        }
        c
    }

    /// Row and column sums of the indicator must not exceed one, losers pay
    /// nothing, and revenue equals the sum of winner payments.
    pub fn validate_feasibility(&self) -> Result<()> {
        let mut slot_used = vec![false; self.slots];
        for slot in self.assignment.iter().flatten() {
            if *slot >= self.slots {
                return Err(Error::IndexOutOfRange(format!("slot {slot} out of range")));
            }
            if slot_used[*slot] {
                return Err(Error::Domain(format!("slot {slot} assigned twice")));
            }
            slot_used[*slot] = true;
        }
        for k in 0..self.nodes {
            if self.assignment[k].is_none() && (self.payments[k] != 0.0 || self.surplus[k] != 0.0) {
                return Err(Error::Domain(format!("loser {k} has nonzero payment or surplus")));
            }
        }
        let paid: f64 = self.payments.iter().sum();
        if (paid - self.revenue).abs() > 1e-9 * (1.0 + paid.abs()) {
            return Err(Error::Domain(format!(
                "revenue {} differs from summed payments {paid}",
                self.revenue
            )));
        }
        Ok(())
    }

    /// Line-oriented serialization consumed by the CLI.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# auction outcome\n");
        let _ = writeln!(out, "mechanism={}", self.mechanism);
        let _ = writeln!(out, "nodes={}", self.nodes);
        let _ = writeln!(out, "slots={}", self.slots);
        let assignment = self
            .winners()
            .map(|(k, n)| format!("{k}:{n}"))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "assignment={assignment}");
        let _ = writeln!(out, "payments={}", join_floats(&self.payments));
        let _ = writeln!(out, "surplus={}", join_floats(&self.surplus));
        let _ = writeln!(out, "revenue={}", self.revenue);
        let ties = self
            .tie_lottery_draws
            .iter()
            .map(|t| {
                let cands = t.candidates.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("|");
                format!("{}:{}:{}", t.slot, t.chosen, cands)
            })
            .collect::<Vec<_>>()
            .join(";");
        let _ = writeln!(out, "ties={ties}");
        out
    }
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Shade a reported-valuation matrix for the underbidding risk scenario:
/// every entry loses zeta% of the matrix maximum, floored at zero.
pub fn apply_risk(values: &Matrix, zeta: f64) -> Result<Matrix> {
    if zeta.is_nan() || zeta < 0.0 {
        return Err(Error::InvalidParams(format!("zeta must be >= 0, got {zeta}")));
    }
    if zeta == 0.0 {
        return Ok(values.clone());
    }
    let shade = values.max_value() * zeta / 100.0;
    Ok(values.map(|v| (v - shade).max(0.0)))
}

fn winner_by_highest_bid(
    bids: &[f64],
    slot: usize,
    seed: u64,
    ties: &mut Vec<TieDraw>,
) -> Result<usize> {
    if bids.is_empty() {
        return Err(Error::Domain("bid vector is empty".into()));
    }
    if bids.iter().any(|b| !b.is_finite() || *b < 0.0) {
        return Err(Error::Domain("bids must be finite and >= 0".into()));
    }
    let top = bids.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let candidates: Vec<usize> =
        bids.iter().enumerate().filter(|(_, b)| **b == top).map(|(k, _)| k).collect();
    if candidates.len() == 1 {
        return Ok(candidates[0]);
    }
    let mut rng = rng::stream(seed, &[tag::TIE, slot as u64]);
    let chosen = candidates[rng::choose_index(&mut rng, candidates.len())];
    ties.push(TieDraw { slot, candidates, chosen });
    Ok(chosen)
}

/// First-price sealed-bid auction for one slot: the highest bid wins (fair
/// lottery on ties) and pays its own bid.
pub fn run_fpsb(
    instance: &AuctionInstance,
    bids: &[f64],
    slot: usize,
    seed: u64,
) -> Result<AuctionOutcome> {
    instance.validate()?;
    check_single_slot(instance, bids, slot)?;
    let mut outcome = AuctionOutcome::empty(Mechanism::Fpsb, instance.nodes(), instance.slots());
    let winner = winner_by_highest_bid(bids, slot, seed, &mut outcome.tie_lottery_draws)?;
    outcome.assignment[winner] = Some(slot);
    outcome.payments[winner] = bids[winner];
    outcome.surplus[winner] = instance.values.get(winner, slot) - bids[winner];
    outcome.revenue = bids[winner];
    Ok(outcome)
}

/// Second-price sealed-bid auction for one slot: the highest bid wins and
/// pays the second-highest bid (zero when it has no opponent).
pub fn run_spsb(
    instance: &AuctionInstance,
    bids: &[f64],
    slot: usize,
    seed: u64,
) -> Result<AuctionOutcome> {
    instance.validate()?;
    check_single_slot(instance, bids, slot)?;
    let mut outcome = AuctionOutcome::empty(Mechanism::Spsb, instance.nodes(), instance.slots());
    let winner = winner_by_highest_bid(bids, slot, seed, &mut outcome.tie_lottery_draws)?;
    let price = if bids.len() == 1 {
        0.0
    } else {
        let mut rest: Vec<f64> = bids.to_vec();
        rest.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        rest[1]
    };
    outcome.assignment[winner] = Some(slot);
    outcome.payments[winner] = price;
    outcome.surplus[winner] = instance.values.get(winner, slot) - price;
    outcome.revenue = price;
    Ok(outcome)
}

fn check_single_slot(instance: &AuctionInstance, bids: &[f64], slot: usize) -> Result<()> {
    if bids.is_empty() {
        return Err(Error::Domain("bid vector is empty".into()));
    }
    if bids.len() != instance.nodes() {
        return Err(Error::ShapeMismatch(format!(
            "{} bids for {} nodes",
            bids.len(),
            instance.nodes()
        )));
    }
    if slot >= instance.slots() {
        return Err(Error::IndexOutOfRange(format!(
            "slot {slot} out of range for N = {}",
            instance.slots()
        )));
    }
    Ok(())
}

/// VCG mechanism: maximum-value assignment of the reported matrix, Clarke
/// pivot payments from re-running the assignment with each winner removed.
pub fn run_vcg(instance: &AuctionInstance) -> Result<AuctionOutcome> {
    instance.validate()?;
    let values = &instance.values;
    let chosen = max_assignment(values)?;
    let mut outcome = AuctionOutcome::empty(Mechanism::Vcg, instance.nodes(), instance.slots());
    for &(k, n) in &chosen {
        outcome.assignment[k] = Some(n);
    }
    for &(k, n) in &chosen {
        // d_k: the others' best total without node k in the market.
        let without_k = max_assignment_value(&values.without_row(k))?;
        // The others' total under the chosen allocation, summed directly.
        let others_chosen: f64 =
            chosen.iter().filter(|&&(j, _)| j != k).map(|&(j, m)| values.get(j, m)).sum();
        let payment = without_k - others_chosen;
        outcome.payments[k] = payment;
        outcome.surplus[k] = values.get(k, n) - payment;
    }
    outcome.revenue = outcome.payments.iter().sum();
    Ok(outcome)
}

/// Re-evaluate an outcome against true valuations: per-node surplus
/// S_k = sum_n C[k,n] * true[k,n] - q_k and gateway revenue R = sum q_k.
/// This is how zeta-shaded runs are scored at the true values.
pub fn utilities(outcome: &AuctionOutcome, true_values: &Matrix) -> Result<(Vec<f64>, f64)> {
    if true_values.rows() != outcome.nodes || true_values.cols() != outcome.slots {
        return Err(Error::ShapeMismatch(format!(
            "outcome is {}x{}, true values {}x{}",
            outcome.nodes,
            outcome.slots,
            true_values.rows(),
            true_values.cols()
        )));
    }
    let mut surplus = vec![0.0; outcome.nodes];
    for (k, n) in outcome.winners() {
        surplus[k] = true_values.get(k, n) - outcome.payments[k];
    }
    let revenue = outcome.payments.iter().sum();
    Ok((surplus, revenue))
}
