//! Equilibrium properties: shading, revenue equivalence, and the
//! numeric/analytic cross-checks behind the bidding-curve figures.

use auctionsim::equilibria::{
    expected_revenue, fpsb_bne_analytic, fpsb_bne_general, fpsb_bne_numeric, fpsb_curve_analytic,
    mae_db, order_statistic, BneCurve,
};
use auctionsim::mechanisms::Mechanism;
use auctionsim::valuation::{self, ValuationParams};

fn reference_params() -> ValuationParams {
    ValuationParams::new(1.0, 1.0, 0.0, 1.0, 1.0).unwrap()
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

#[test]
fn shading_gap_shrinks_with_competition() {
    let p = reference_params();
    for &v in &[0.5, 1.0, 2.0, 3.5] {
        let mut last_gap = f64::INFINITY;
        for k in [2usize, 5, 10, 20] {
            let b = fpsb_bne_analytic(&p, k, v).unwrap();
            assert!(b < v, "interior bid must shade");
            let gap = v - b;
            assert!(gap < last_gap, "gap must shrink with K at v={v}");
            last_gap = gap;
        }
    }
}

#[test]
fn analytic_curve_is_monotone_everywhere() {
    let p = reference_params();
    for k in [2usize, 5, 20] {
        let curve = fpsb_curve_analytic(&p, k, &grid(0.05, 4.0, 160)).unwrap();
        curve.validate().unwrap();
    }
}

#[test]
fn general_form_reproduces_analytic_on_grid() {
    let p = reference_params();
    let cdf = move |t: f64| valuation::cdf(&p, t).unwrap();
    let gridpts = grid(0.1, 4.0, 60);
    for &v in &gridpts {
        let a = fpsb_bne_analytic(&p, 5, v).unwrap();
        let g = fpsb_bne_general(&cdf, p.support_min(), 5, v).unwrap();
        assert!((g - a).abs() < 1e-8, "v={v}: general {g} vs analytic {a}");
    }
    // The cumulative curve evaluation agrees with the pointwise solver away
    // from the thin-mass boundary region.
    let curve = fpsb_curve_analytic(&p, 5, &gridpts).unwrap();
    for (v, b) in gridpts.iter().zip(&curve.bids).filter(|(v, _)| **v >= 0.5) {
        let a = fpsb_bne_analytic(&p, 5, *v).unwrap();
        assert!((a - b).abs() < 1e-6, "v={v}: curve {b} vs pointwise {a}");
    }
}

#[test]
fn revenue_equivalence_across_parameter_cells() {
    // FPSB and SPSB expected revenue within 3 combined standard errors on
    // every cell of the weight/scale/support grid.
    let weights = [0.5, 1.0, 2.0];
    let mut cell = 0u64;
    for (i, &alpha) in weights.iter().enumerate() {
        for &beta in &weights[i..] {
            for &sigma in &[0.5, 1.0, 2.0] {
                for &(a, b) in &[(0.0, 1.0), (1.0, 3.0)] {
                    cell += 1;
                    let p = ValuationParams::new(alpha, beta, a, b, sigma).unwrap();
                    let f = expected_revenue(&p, 5, Mechanism::Fpsb, 20_000, 500 + cell).unwrap();
                    let s = expected_revenue(&p, 5, Mechanism::Spsb, 20_000, 500 + cell).unwrap();
                    let combined = (f.std_error.powi(2) + s.std_error.powi(2)).sqrt();
                    assert!(
                        (f.mean - s.mean).abs() < 3.0 * combined,
                        "cell {cell}: fpsb {} vs spsb {} (combined se {combined})",
                        f.mean,
                        s.mean
                    );
                }
            }
        }
    }
    assert_eq!(cell, 36);
}

#[test]
fn numeric_estimator_tracks_analytic_curve() {
    // Numeric-vs-analytic agreement at desk scale: I = 1000 draws, K = 5.
    let p = reference_params();
    let matrix = valuation::sample(&p, 5, 1000, 31).unwrap();
    let gridpts = grid(0.4, 3.6, 80);
    let mut ref_bids = Vec::new();
    let mut num_bids = Vec::new();
    let mut kept_grid = Vec::new();
    for &v in &gridpts {
        if let Ok(est) = fpsb_bne_numeric(&matrix, 0, v) {
            kept_grid.push(v);
            num_bids.push(est);
            ref_bids.push(fpsb_bne_analytic(&p, 5, v).unwrap());
        }
    }
    assert!(kept_grid.len() > 40, "kept only {} grid points", kept_grid.len());
    let reference = BneCurve::new(kept_grid.clone(), ref_bids, 5).unwrap();
    let candidate = BneCurve::new(kept_grid, num_bids, 5).unwrap();
    let db = mae_db(&reference, &candidate).unwrap();
    assert!(db <= -10.0, "normalized MAE {db} dB");
}

#[test]
fn spsb_order_statistic_bridge() {
    // Binned means of SPSB second-order-statistic payments track the FPSB
    // analytic curve: I = 2000 auctions, K = 5, 40 equal-width bins.
    let p = reference_params();
    let matrix = valuation::sample(&p, 5, 2000, 812).unwrap();
    let mut winners = Vec::with_capacity(2000);
    for rep in 0..2000 {
        let values = matrix.replication_values(rep);
        let v1 = order_statistic(&values, 1).unwrap();
        let v2 = order_statistic(&values, 2).unwrap();
        winners.push((v1, v2));
    }
    let lo = winners.iter().map(|w| w.0).fold(f64::INFINITY, f64::min);
    let hi = winners.iter().map(|w| w.0).fold(f64::NEG_INFINITY, f64::max);
    let bins = 40usize;
    let width = (hi - lo) / bins as f64;
    let mut sums = vec![(0.0f64, 0.0f64, 0usize); bins];
    for (v1, v2) in winners {
        let idx = (((v1 - lo) / width) as usize).min(bins - 1);
        sums[idx].0 += v1;
        sums[idx].1 += v2;
        sums[idx].2 += 1;
    }
    let mut grid_pts = Vec::new();
    let mut payments = Vec::new();
    for (sv, sp, count) in sums {
        if count >= 5 {
            grid_pts.push(sv / count as f64);
            payments.push(sp / count as f64);
        }
    }
    let analytic: Vec<f64> =
        grid_pts.iter().map(|&v| fpsb_bne_analytic(&p, 5, v).unwrap()).collect();
    let reference = BneCurve::new(grid_pts.clone(), analytic, 5).unwrap();
    let bridge = BneCurve::new(grid_pts, payments, 5).unwrap();
    let scale = reference.bids.iter().cloned().fold(0.0f64, f64::max);
    let mae = reference
        .bids
        .iter()
        .zip(&bridge.bids)
        .map(|(r, c)| (r - c).abs() / scale)
        .sum::<f64>()
        / reference.bids.len() as f64;
    assert!(mae <= 0.15, "bridge MAE {mae}");
}

#[test]
fn fpsb_uniform_closed_form_revenue() {
    // Degenerate Uniform(0,1), K = 2: E[R] = 1/3 for both mechanisms.
    let p = ValuationParams::new(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
    for mech in [Mechanism::Fpsb, Mechanism::Spsb] {
        let est = expected_revenue(&p, 2, mech, 60_000, 77).unwrap();
        assert!(
            (est.mean - 1.0 / 3.0).abs() < 3.0 * est.std_error,
            "{mech}: {} +- {}",
            est.mean,
            est.std_error
        );
    }
}
