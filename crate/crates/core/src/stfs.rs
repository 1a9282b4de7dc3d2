//! Uplink signal model over the space-time-frequency slot grid and the
//! post-auction dispersion-vector optimization.
//!
//! Each node k pre-compensates its uplink with a complex dispersion element
//! a_k. With channel g_k and BPSK symbol s_k, the compensated emission is
//! z_k = a_k * g_k * s_k (+ optional hardware noise) and the reference point
//! fixed by the auction's indicator is z*_k = c_k * s_k. The optimizer
//! drives sum_k ||z_k - z*_k||^2 to zero in two stages per node: a phase
//! update at fixed gain (the cosine term has a closed-form optimum), then a
//! projected gain descent inside the power box.

use crate::error::{Error, Result};
use crate::rng::{self, tag};
use num_complex::Complex64;

/// Time/frequency slot grid; N = time_slots * freq_slots. A time-only grid
/// (freq_slots = 1) or frequency-only grid (time_slots = 1) are degenerate
/// cases of the same layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotGrid {
    pub time_slots: usize,
    pub freq_slots: usize,
}

impl SlotGrid {
    pub fn new(time_slots: usize, freq_slots: usize) -> Self {
        SlotGrid { time_slots, freq_slots }
    }

    pub fn total(&self) -> usize {
        self.time_slots * self.freq_slots
    }
}

/// Per-node power box and the average cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBounds {
    pub min: f64,
    pub max: f64,
    /// Cap on the mean per-node transmit power.
    pub average_cap: f64,
}

impl Default for PowerBounds {
    fn default() -> Self {
        PowerBounds { min: 0.0, max: 1e4, average_cap: 1e4 }
    }
}

/// Signal environment: channels, symbols, noise, the indicator from an
/// auction outcome, and the throughput/power constraints.
#[derive(Debug, Clone)]
pub struct StfsInstance {
    pub grid: SlotGrid,
    /// Complex channel gains g_k (Rayleigh envelope).
    pub channels: Vec<Complex64>,
    /// BPSK data symbols s_k in {+1, -1}.
    pub symbols: Vec<f64>,
    /// Receiver noise standard deviation (sigma_w; noise power sigma_w^2).
    pub noise_sigma: f64,
    /// node -> assigned slot, from the auction indicator matrix.
    pub assignment: Vec<Option<usize>>,
    /// Normalized bandwidth B.
    pub bandwidth: f64,
    /// Per-node throughput thresholds.
    pub thresholds: Vec<f64>,
    pub power: PowerBounds,
    /// Residual misalignment |z_j - z*_j| above which node j leaks into
    /// other slots; perfectly compensated nodes contribute no interference.
    pub leakage_threshold: f64,
    /// Hardware noise on the forward model z_k (zero for the deterministic
    /// oracle path).
    pub forward_noise_sigma: f64,
    pub seed: u64,
}

impl StfsInstance {
    pub fn nodes(&self) -> usize {
        self.channels.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.channels.len();
        if k == 0 {
            return Err(Error::InvalidParams("instance needs at least one node".into()));
        }
        if self.symbols.len() != k || self.thresholds.len() != k || self.assignment.len() != k {
            return Err(Error::ShapeMismatch(
                "channels, symbols, thresholds and assignment must agree in length".into(),
            ));
        }
        if self.symbols.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(Error::InvalidParams("symbols must be +1 or -1".into()));
        }
        if self.noise_sigma.is_nan()
            || self.noise_sigma < 0.0
            || self.bandwidth.is_nan()
            || self.bandwidth <= 0.0
        {
            return Err(Error::InvalidParams("need noise_sigma >= 0 and bandwidth > 0".into()));
        }
        if !(0.0 <= self.power.min && self.power.min <= self.power.max) {
            return Err(Error::InvalidParams(format!(
                "power box must satisfy 0 <= min <= max, got [{}, {}]",
                self.power.min, self.power.max
            )));
        }
        let n = self.grid.total();
        let mut used = vec![false; n];
        for slot in self.assignment.iter().flatten() {
            if *slot >= n {
                return Err(Error::IndexOutOfRange(format!("slot {slot} out of range for N = {n}")));
            }
            if used[*slot] {
                return Err(Error::Domain(format!("slot {slot} assigned twice")));
            }
            used[*slot] = true;
        }
        Ok(())
    }

    /// Seeded instance: unit-variance-per-component complex Gaussian
    /// channels, random BPSK symbols, node k assigned to slot k while slots
    /// remain.
    pub fn random(nodes: usize, grid: SlotGrid, seed: u64) -> Self {
        let mut channels = Vec::with_capacity(nodes);
        let mut symbols = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let mut rng = rng::stream(seed, &[tag::CHANNEL, k as u64]);
            let (re, im) = rng::std_normal_pair(&mut rng);
            channels.push(Complex64::new(re, im));
            let mut srng = rng::stream(seed, &[tag::INSTANCE, k as u64]);
            symbols.push(if srng.next_u64() & 1 == 0 { 1.0 } else { -1.0 });
        }
        let total = grid.total();
        let assignment = (0..nodes).map(|k| if k < total { Some(k) } else { None }).collect();
        StfsInstance {
            grid,
            channels,
            symbols,
            noise_sigma: 0.1,
            assignment,
            bandwidth: 1.0,
            thresholds: vec![1.0; nodes],
            power: PowerBounds::default(),
            leakage_threshold: 1e-3,
            forward_noise_sigma: 0.0,
            seed,
        }
    }

    /// Node assigned to a slot, if any.
    pub fn node_on_slot(&self, slot: usize) -> Option<usize> {
        self.assignment.iter().position(|a| *a == Some(slot))
    }

    /// Reference points z*_k = c_k * s_k fixed by the indicator.
    pub fn targets(&self) -> Vec<Complex64> {
        (0..self.nodes())
            .map(|k| {
                if self.assignment[k].is_some() {
                    Complex64::new(self.symbols[k], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    /// Frozen hardware-noise draws for the forward model.
    fn forward_noise(&self) -> Vec<Complex64> {
        (0..self.nodes())
            .map(|k| {
                if self.forward_noise_sigma == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    let mut rng = rng::stream(self.seed, &[tag::NOISE, 0xf0, k as u64]);
                    let (re, im) = rng::std_normal_pair(&mut rng);
                    Complex64::new(re, im) * (self.forward_noise_sigma / std::f64::consts::SQRT_2)
                }
            })
            .collect()
    }
}

use rand_core::RngCore;

/// Per-node dispersion elements and their reference points.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionState {
    /// Dispersion elements a_k (gain |a_k|, phase arg a_k).
    pub a: Vec<Complex64>,
    /// Reference points z*_k.
    pub targets: Vec<Complex64>,
    /// Symbols per dispersion block (scalar model: 1).
    pub stream_length: usize,
}

impl DispersionState {
    /// Unit dispersion (no pre-compensation) against the instance targets.
    pub fn uncompensated(instance: &StfsInstance) -> Self {
        DispersionState {
            a: vec![Complex64::new(1.0, 0.0); instance.nodes()],
            targets: instance.targets(),
            stream_length: 1,
        }
    }

    pub fn power(&self, node: usize) -> f64 {
        self.a[node].norm_sqr()
    }
}

/// Compensated emission of node k under dispersion vector `a`.
fn emission(instance: &StfsInstance, a: &[Complex64], k: usize) -> Complex64 {
    a[k] * instance.channels[k] * instance.symbols[k]
}

/// Received sample on one slot: the assigned node's compensated signal,
/// plus every misaligned node's leakage, plus receiver noise drawn under
/// the instance seed. An unassigned slot carries noise and interference
/// only.
pub fn received_signal(instance: &StfsInstance, a: &[Complex64], slot: usize) -> Result<Complex64> {
    instance.validate()?;
    if a.len() != instance.nodes() {
        return Err(Error::ShapeMismatch(format!(
            "dispersion vector has {} entries for {} nodes",
            a.len(),
            instance.nodes()
        )));
    }
    if slot >= instance.grid.total() {
        return Err(Error::IndexOutOfRange(format!("slot {slot} out of range")));
    }
    let assigned = instance.node_on_slot(slot);
    let mut y = Complex64::new(0.0, 0.0);
    if let Some(k) = assigned {
        y += emission(instance, a, k);
    }
    y += interference_sum(instance, a, assigned);
    if instance.noise_sigma > 0.0 {
        let mut rng = rng::stream(instance.seed, &[tag::NOISE, slot as u64]);
        let (re, im) = rng::std_normal_pair(&mut rng);
        y += Complex64::new(re, im) * (instance.noise_sigma / std::f64::consts::SQRT_2);
    }
    Ok(y)
}

/// Coherent sum of leaking emissions from every node except `skip`.
fn interference_sum(instance: &StfsInstance, a: &[Complex64], skip: Option<usize>) -> Complex64 {
    let targets = instance.targets();
    let noise = instance.forward_noise();
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..instance.nodes() {
        if Some(j) == skip {
            continue;
        }
        let residual = emission(instance, a, j) + noise[j] - targets[j];
        if residual.norm() > instance.leakage_threshold {
            sum += emission(instance, a, j);
        }
    }
    sum
}

/// Channel throughput of node k on its assigned slot:
/// B * log2(1 + ||a_k g_k s_k||^2 / (||sum of leaking interferers||^2 + sigma_w^2)),
/// with the interference summed coherently before taking the magnitude.
pub fn throughput(instance: &StfsInstance, a: &[Complex64], node: usize, slot: usize) -> Result<f64> {
    instance.validate()?;
    if node >= instance.nodes() {
        return Err(Error::IndexOutOfRange(format!("node {node} out of range")));
    }
    if instance.assignment[node] != Some(slot) {
        return Err(Error::Domain(format!("node {node} is not assigned to slot {slot}")));
    }
    let signal = emission(instance, a, node).norm_sqr();
    let interference = interference_sum(instance, a, Some(node)).norm_sqr();
    let denom = interference + instance.noise_sigma * instance.noise_sigma;
    Ok(instance.bandwidth * (1.0 + signal / denom).log2())
}

/// Optimizer knobs: projected gradient descent with Armijo backtracking.
#[derive(Debug, Clone, Copy)]
pub struct DispersionTolerances {
    pub objective_tol: f64,
    pub max_iterations: usize,
    pub backtrack_factor: f64,
    pub initial_step: f64,
    /// Use the closed-form phase optimum per stage; otherwise take
    /// projected gradient steps on the phase as well.
    pub closed_form_phase: bool,
}

impl Default for DispersionTolerances {
    fn default() -> Self {
        DispersionTolerances {
            objective_tol: 1e-10,
            max_iterations: 10_000,
            backtrack_factor: 0.5,
            initial_step: 1.0,
            closed_form_phase: true,
        }
    }
}

/// Result of a dispersion optimization run.
#[derive(Debug, Clone)]
pub struct DispersionRun {
    pub state: DispersionState,
    pub objective: f64,
    /// Total objective after each sweep, nonincreasing.
    pub objective_trace: Vec<f64>,
    /// False when the tolerance was not reached within the iteration cap or
    /// a throughput threshold is violated at the returned state.
    pub converged: bool,
    pub iterations: usize,
}

/// Total deviation objective sum_k ||a_k m_k - t_k||^2 against the
/// effective targets (reference points minus frozen hardware noise).
pub fn objective(instance: &StfsInstance, state: &DispersionState) -> f64 {
    (0..instance.nodes()).map(|k| node_deviation(instance, state, k)).sum()
}

/// Node k's contribution ||a_k m_k - t_k||^2 to the separable objective.
pub fn node_deviation(instance: &StfsInstance, state: &DispersionState, node: usize) -> f64 {
    let noise = instance.forward_noise();
    let t = state.targets[node] - noise[node];
    (emission(instance, &state.a, node) - t).norm_sqr()
}

/// Objective and its gradient in polar coordinates, interleaved as
/// (d/d gain_0, d/d phase_0, d/d gain_1, ...). For node k with
/// m_k = g_k s_k, z = rho e^(i phi) m, and target (r*, theta*):
///   f = r^2 + r*^2 - 2 r r* cos(theta - theta*),  r = rho |m|, theta = phi + arg m
///   df/d rho = |m| (2 r - 2 r* cos(theta - theta*))
///   df/d phi = 2 r r* sin(theta - theta*)
pub fn objective_gradient(instance: &StfsInstance, state: &DispersionState) -> (f64, Vec<f64>) {
    let noise = instance.forward_noise();
    let mut grad = vec![0.0; 2 * instance.nodes()];
    let mut total = 0.0;
    for k in 0..instance.nodes() {
        let m = instance.channels[k] * instance.symbols[k];
        let t = state.targets[k] - noise[k];
        let (r_star, theta_star) = (t.norm(), t.arg());
        let rho = state.a[k].norm();
        let phi = state.a[k].arg();
        let r = rho * m.norm();
        let theta = phi + m.arg();
        let d = theta - theta_star;
        total += r * r + r_star * r_star - 2.0 * r * r_star * d.cos();
        grad[2 * k] = m.norm() * (2.0 * r - 2.0 * r_star * d.cos());
        grad[2 * k + 1] = 2.0 * r * r_star * d.sin();
    }
    (total, grad)
}

fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi;
    while p > std::f64::consts::PI {
        p -= std::f64::consts::TAU;
    }
    while p < -std::f64::consts::PI {
        p += std::f64::consts::TAU;
    }
    p
}

/// Two-stage descent on the dispersion vector: per node, phase first at
/// fixed gain, then a projected gain step, repeated until the joint
/// objective reaches tolerance or the iteration cap. The returned state
/// always satisfies the phase box [-pi, pi] and the per-node power box
/// exactly; the objective trace is nonincreasing.
pub fn optimize_dispersion(
    instance: &StfsInstance,
    initial: &DispersionState,
    tol: &DispersionTolerances,
) -> Result<DispersionRun> {
    instance.validate()?;
    if initial.a.len() != instance.nodes() || initial.targets.len() != instance.nodes() {
        return Err(Error::ShapeMismatch("dispersion state size must match the instance".into()));
    }
    let nodes = instance.nodes();
    let noise = instance.forward_noise();
    let rho_min = instance.power.min.sqrt();
    let rho_max = instance.power.max.sqrt();

    // Per-node polar coordinates and fixed data.
    let mut rho: Vec<f64> = initial.a.iter().map(|a| a.norm().clamp(rho_min, rho_max)).collect();
    let mut phi: Vec<f64> = initial.a.iter().map(|a| wrap_phase(a.arg())).collect();
    let m: Vec<Complex64> = (0..nodes).map(|k| instance.channels[k] * instance.symbols[k]).collect();
    let t: Vec<Complex64> = (0..nodes).map(|k| initial.targets[k] - noise[k]).collect();

    let node_obj = |k: usize, rho_k: f64, phi_k: f64| -> f64 {
        let r = rho_k * m[k].norm();
        let theta = phi_k + m[k].arg();
        let (r_star, theta_star) = (t[k].norm(), t[k].arg());
        r * r + r_star * r_star - 2.0 * r * r_star * (theta - theta_star).cos()
    };
    let total_obj =
        |rho: &[f64], phi: &[f64]| -> f64 { (0..nodes).map(|k| node_obj(k, rho[k], phi[k])).sum() };

    let mut current = total_obj(&rho, &phi);
    let mut trace = vec![current];
    let mut iterations = 0;

    while current > tol.objective_tol && iterations < tol.max_iterations {
        iterations += 1;
        let mut moved = false;
        for k in 0..nodes {
            if m[k].norm() == 0.0 {
                continue; // a dead channel cannot move z_k
            }
            let r_star = t[k].norm();
            // Stage 1: phase at fixed gain. The cosine term is maximized at
            // theta = theta*, which the phase box always admits after
            // wrapping.
            if r_star > 0.0 && rho[k] > 0.0 {
                if tol.closed_form_phase {
                    let target_phi = wrap_phase(t[k].arg() - m[k].arg());
                    if node_obj(k, rho[k], target_phi) <= node_obj(k, rho[k], phi[k]) {
                        if target_phi != phi[k] {
                            moved = true;
                        }
                        phi[k] = target_phi;
                    }
                } else {
                    let before = node_obj(k, rho[k], phi[k]);
                    let r = rho[k] * m[k].norm();
                    let g = 2.0 * r * r_star * (phi[k] + m[k].arg() - t[k].arg()).sin();
                    if let Some((next, _)) = backtrack(
                        |p| node_obj(k, rho[k], wrap_phase(p)),
                        phi[k],
                        g,
                        before,
                        tol.initial_step,
                        tol.backtrack_factor,
                    ) {
                        phi[k] = wrap_phase(next);
                        moved = true;
                    }
                }
            }
            // Stage 2: projected gain descent at the updated phase.
            let before = node_obj(k, rho[k], phi[k]);
            let r = rho[k] * m[k].norm();
            let d = phi[k] + m[k].arg() - t[k].arg();
            let g = m[k].norm() * (2.0 * r - 2.0 * r_star * d.cos());
            if let Some((next, _)) = backtrack(
                |x| node_obj(k, x.clamp(rho_min, rho_max), phi[k]),
                rho[k],
                g,
                before,
                tol.initial_step,
                tol.backtrack_factor,
            ) {
                rho[k] = next.clamp(rho_min, rho_max);
                moved = true;
            }
        }
        current = total_obj(&rho, &phi);
        trace.push(current);
        if !moved {
            break; // stationary under the boxes
        }
    }

    let a: Vec<Complex64> =
        (0..nodes).map(|k| Complex64::from_polar(rho[k], phi[k])).collect();
    let state = DispersionState { a, targets: initial.targets.clone(), stream_length: initial.stream_length };
    let mut converged = current <= tol.objective_tol;
    // The throughput constraint is part of feasibility: flag the run when an
    // assigned node cannot meet its threshold at the returned state.
    for k in 0..nodes {
        if let Some(slot) = instance.assignment[k] {
            if throughput(instance, &state.a, k, slot)? < instance.thresholds[k] {
                converged = false;
            }
        }
    }
    Ok(DispersionRun { state, objective: current, objective_trace: trace, converged, iterations })
}

/// One Armijo backtracking step on a scalar coordinate. Returns the
/// accepted point and its objective value, or None when no decrease is
/// found before the step underflows.
fn backtrack(
    f: impl Fn(f64) -> f64,
    x: f64,
    grad: f64,
    fx: f64,
    initial_step: f64,
    factor: f64,
) -> Option<(f64, f64)> {
    if grad == 0.0 {
        return None;
    }
    let mut step = initial_step;
    while step > 1e-18 {
        let candidate = x - step * grad;
        let fc = f(candidate);
        if fc <= fx - 1e-4 * step * grad * grad {
            return Some((candidate, fc));
        }
        step *= factor;
    }
    None
}

/// Norm of the summed residuals ||sum_k (z_k - z*_k)||: the aggregate
/// misalignment seen at the gateway.
pub fn aggregate_residual(instance: &StfsInstance, state: &DispersionState) -> f64 {
    let noise = instance.forward_noise();
    (0..instance.nodes())
        .map(|k| emission(instance, &state.a, k) + noise[k] - state.targets[k])
        .sum::<Complex64>()
        .norm()
}

/// Line-oriented serialization of an instance and a dispersion state, in
/// the same record style as the auction traces: one `node=` record per
/// node carrying channel, symbol, slot, dispersion element and its
/// objective contribution.
pub fn constellation_text(instance: &StfsInstance, state: &DispersionState) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("# stfs constellation\n");
    let _ = writeln!(out, "nodes={}", instance.nodes());
    let _ = writeln!(out, "grid={}x{}", instance.grid.time_slots, instance.grid.freq_slots);
    let _ = writeln!(out, "noise_sigma={}", instance.noise_sigma);
    let _ = writeln!(out, "bandwidth={}", instance.bandwidth);
    let _ = writeln!(
        out,
        "power_bounds={},{},{}",
        instance.power.min, instance.power.max, instance.power.average_cap
    );
    for k in 0..instance.nodes() {
        let slot = instance.assignment[k].map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "node={k} g={},{} s={} slot={slot} r={} theta={} deviation={}",
            instance.channels[k].re,
            instance.channels[k].im,
            instance.symbols[k],
            state.a[k].norm(),
            state.a[k].arg(),
            node_deviation(instance, state, k),
        );
    }
    out
}

/// Per-node power report against the box and the average cap.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerReport {
    pub per_node: Vec<f64>,
    pub below_min: Vec<usize>,
    pub above_max: Vec<usize>,
    pub average: f64,
    pub average_cap_exceeded: bool,
}

impl PowerReport {
    pub fn violation_count(&self) -> usize {
        self.below_min.len() + self.above_max.len() + usize::from(self.average_cap_exceeded)
    }
}

/// Report p_k = |a_k|^2 for every node and flag box/cap violations.
pub fn power_check(state: &DispersionState, instance: &StfsInstance) -> PowerReport {
    let per_node: Vec<f64> = state.a.iter().map(|a| a.norm_sqr()).collect();
    let below_min: Vec<usize> = per_node
        .iter()
        .enumerate()
        .filter(|(_, p)| **p < instance.power.min - 1e-12)
        .map(|(k, _)| k)
        .collect();
    let above_max: Vec<usize> = per_node
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > instance.power.max + 1e-12)
        .map(|(k, _)| k)
        .collect();
    let average = per_node.iter().sum::<f64>() / per_node.len().max(1) as f64;
    PowerReport {
        below_min,
        above_max,
        average_cap_exceeded: average > instance.power.average_cap + 1e-12,
        average,
        per_node,
    }
}
