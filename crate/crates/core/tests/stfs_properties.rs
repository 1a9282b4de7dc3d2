//! Dispersion optimizer properties: descent, gradient correctness,
//! feasibility and the pre/post compensation comparison.

use auctionsim::rng;
use auctionsim::stfs::{
    aggregate_residual, objective, objective_gradient, optimize_dispersion, power_check,
    received_signal, throughput, DispersionState, DispersionTolerances, SlotGrid, StfsInstance,
};
use num_complex::Complex64;

#[test]
fn gradient_matches_central_differences_on_random_points() {
    // 50 random (instance, state) points, relative error under 1e-6.
    let mut checked = 0;
    for seed in 0..10u64 {
        let inst = StfsInstance::random(5, SlotGrid::new(5, 1), seed);
        for point in 0..5u64 {
            let mut state = DispersionState::uncompensated(&inst);
            let mut r = rng::stream(seed * 100 + point, &[0x5f]);
            for a in state.a.iter_mut() {
                *a = Complex64::from_polar(
                    0.2 + 2.0 * rng::uniform_01(&mut r),
                    rng::uniform_in(&mut r, -3.0, 3.0),
                );
            }
            let (_, grad) = objective_gradient(&inst, &state);
            let h = 1e-6;
            for (idx, g) in grad.iter().enumerate() {
                let perturb = |delta: f64| {
                    let mut s = state.clone();
                    let k = idx / 2;
                    let (mut rho, mut phi) = (s.a[k].norm(), s.a[k].arg());
                    if idx % 2 == 0 {
                        rho += delta;
                    } else {
                        phi += delta;
                    }
                    s.a[k] = Complex64::from_polar(rho, phi);
                    objective(&inst, &s)
                };
                let fd = (perturb(h) - perturb(-h)) / (2.0 * h);
                let denom = g.abs().max(1.0);
                assert!(
                    (fd - g).abs() / denom < 1e-6,
                    "seed {seed} point {point} coord {idx}: fd {fd} vs {g}"
                );
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 50);
}

#[test]
fn optimizer_descends_and_compensates_across_seeds() {
    for seed in [3u64, 21, 98, 650] {
        let inst = StfsInstance::random(12, SlotGrid::new(4, 3), seed);
        let initial = DispersionState::uncompensated(&inst);
        let before = objective(&inst, &initial);
        let before_residual = aggregate_residual(&inst, &initial);
        let run = optimize_dispersion(&inst, &initial, &DispersionTolerances::default()).unwrap();
        for w in run.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "seed {seed}: objective rose {w:?}");
        }
        assert!(run.objective < 1e-4 * before, "seed {seed}");
        assert!(aggregate_residual(&inst, &run.state) < before_residual, "seed {seed}");
        let report = power_check(&run.state, &inst);
        assert_eq!(report.violation_count(), 0, "seed {seed}");
    }
}

#[test]
fn compensated_uplinks_quiet_the_gateway() {
    // Sum of received samples across slots shrinks once dispersion is
    // optimized (noise-free comparison).
    let mut inst = StfsInstance::random(12, SlotGrid::new(4, 3), 7);
    inst.noise_sigma = 0.0;
    let initial = DispersionState::uncompensated(&inst);
    let run = optimize_dispersion(&inst, &initial, &DispersionTolerances::default()).unwrap();
    let residual_sum = |state: &DispersionState| -> f64 {
        (0..inst.grid.total())
            .map(|slot| {
                let y = received_signal(&inst, &state.a, slot).unwrap();
                let target = inst
                    .node_on_slot(slot)
                    .map(|k| Complex64::new(inst.symbols[k], 0.0))
                    .unwrap_or_default();
                (y - target).norm()
            })
            .sum()
    };
    let before = residual_sum(&initial);
    let after = residual_sum(&run.state);
    assert!(after < before, "{after} vs {before}");
}

#[test]
fn thresholds_hold_after_optimization_on_defaults() {
    let inst = StfsInstance::random(12, SlotGrid::new(4, 3), 13);
    let run = optimize_dispersion(&inst, &DispersionState::uncompensated(&inst), &DispersionTolerances::default())
        .unwrap();
    assert!(run.converged);
    for k in 0..inst.nodes() {
        if let Some(slot) = inst.assignment[k] {
            let rate = throughput(&inst, &run.state.a, k, slot).unwrap();
            assert!(rate >= inst.thresholds[k], "node {k}: {rate}");
        }
    }
}

#[test]
fn returned_states_satisfy_boxes_exactly() {
    for seed in 0..10u64 {
        let mut inst = StfsInstance::random(6, SlotGrid::new(3, 2), seed);
        inst.power = auctionsim::stfs::PowerBounds { min: 0.04, max: 2.25, average_cap: 10.0 };
        inst.thresholds = vec![0.0; 6];
        let run = optimize_dispersion(
            &inst,
            &DispersionState::uncompensated(&inst),
            &DispersionTolerances::default(),
        )
        .unwrap();
        for a in &run.state.a {
            let p = a.norm_sqr();
            assert!(p >= inst.power.min - 1e-12 && p <= inst.power.max + 1e-12);
            assert!(a.arg().abs() <= std::f64::consts::PI + 1e-12);
        }
    }
}
