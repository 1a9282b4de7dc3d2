//! Value-maximizing assignment of nodes to slots.
//!
//! Shortest-augmenting-path Hungarian algorithm with row/column potentials,
//! O(n^3) in the padded square dimension. Rectangular inputs are padded with
//! zero-value dummy rows/columns; dummy assignments confer no allocation.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Maximum-total-value assignment. Returns (node, slot) pairs sorted by
/// node, with exactly min(K, N) pairs.
pub fn max_assignment(values: &Matrix) -> Result<Vec<(usize, usize)>> {
    if !values.is_finite() {
        return Err(Error::Domain("assignment values must be finite".into()));
    }
    let rows = values.rows();
    let cols = values.cols();
    let dim = rows.max(cols);
    // Maximization via negated costs; dummy cells cost 0.
    let mut cost = vec![0.0f64; dim * dim];
    for r in 0..rows {
        for c in 0..cols {
            cost[r * dim + c] = -values.get(r, c);
        }
    }
    let col_to_row = solve_square_min(&cost, dim);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(rows.min(cols));
    let mut row_matched = vec![false; rows];
    let mut col_matched = vec![false; cols];
    for (c, &r) in col_to_row.iter().enumerate() {
        if r < rows && c < cols {
            pairs.push((r, c));
            row_matched[r] = true;
            col_matched[c] = true;
        }
    }
    // Ties at zero value can strand a real row and column on dummies; pair
    // them up so the assignment always has min(K, N) entries. Their mutual
    // value is necessarily zero at an optimum over nonnegative inputs.
    let mut free_cols: Vec<usize> = (0..cols).filter(|&c| !col_matched[c]).collect();
    for r in (0..rows).filter(|&r| !row_matched[r]) {
        if let Some(c) = free_cols.pop() {
            pairs.push((r, c));
        }
    }
    pairs.sort_unstable();
    Ok(pairs)
}

/// Total value of the maximum assignment.
pub fn max_assignment_value(values: &Matrix) -> Result<f64> {
    Ok(max_assignment(values)?
        .iter()
        .map(|&(r, c)| values.get(r, c))
        .sum())
}

/// Minimum-cost perfect matching on an n x n cost matrix.
/// Returns column -> row (sentinel n for unmatched, which cannot remain
/// after all phases).
fn solve_square_min(cost: &[f64], n: usize) -> Vec<usize> {
    let none = n;
    let vcol = n;
    let mut u = vec![0.0f64; n + 1];
    let mut pot = vec![0.0f64; n + 1];
    let mut assigned = vec![none; n + 1]; // column -> row
    let mut way = vec![0usize; n + 1];
    for i in 0..n {
        assigned[vcol] = i;
        let mut j0 = vcol;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = assigned[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = usize::MAX;
            for j in 0..n {
                if !used[j] {
                    let cur = cost[i0 * n + j] - u[i0] - pot[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[assigned[j]] += delta;
                    pot[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if assigned[j0] == none {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            assigned[j0] = assigned[j1];
            j0 = j1;
            if j0 == vcol {
                break;
            }
        }
    }
    assigned.truncate(n);
    assigned
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    /// Exhaustive oracle: maximize over every partial assignment.
    pub(crate) fn brute_force_max(values: &Matrix) -> f64 {
        fn recurse(values: &Matrix, row: usize, used: &mut Vec<bool>) -> f64 {
            if row == values.rows() {
                return 0.0;
            }
            let mut best = recurse(values, row + 1, used); // leave this row out
            for c in 0..values.cols() {
                if !used[c] {
                    used[c] = true;
                    best = best.max(values.get(row, c) + recurse(values, row + 1, used));
                    used[c] = false;
                }
            }
            best
        }
        recurse(values, 0, &mut vec![false; values.cols()])
    }

    #[test]
    fn two_by_two_example() {
        let m: Matrix = "1,2;3,5".parse().unwrap();
        let pairs = max_assignment(&m).unwrap();
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(max_assignment_value(&m).unwrap(), 6.0);
        assert_eq!(brute_force_max(&m), 6.0);
    }

    #[test]
    fn diagonal_dominant() {
        let m: Matrix = "9,0,0;0,9,0;0,0,9".parse().unwrap();
        let pairs = max_assignment(&m).unwrap();
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(max_assignment_value(&m).unwrap(), 27.0);
    }

    #[test]
    fn random_matrices_match_brute_force() {
        // 720-permutation oracle over 100 seeded 6x6 instances.
        for seed in 0..100u64 {
            let mut r = rng::stream(seed, &[0xbf]);
            let data: Vec<f64> = (0..36).map(|_| rng::uniform_01(&mut r) * 10.0).collect();
            let m = Matrix::from_vec(6, 6, data).unwrap();
            let got = max_assignment_value(&m).unwrap();
            let want = brute_force_max(&m);
            assert!((got - want).abs() < 1e-9, "seed {seed}: {got} vs {want}");
        }
    }

    #[test]
    fn rectangular_shapes() {
        // More nodes than slots.
        let tall: Matrix = "5;1;3".parse().unwrap();
        let pairs = max_assignment(&tall).unwrap();
        assert_eq!(pairs, vec![(0, 0)]);
        // More slots than nodes.
        let wide: Matrix = "1,7,2".parse().unwrap();
        assert_eq!(max_assignment(&wide).unwrap(), vec![(0, 1)]);
        for seed in 0..40u64 {
            let mut r = rng::stream(seed, &[0xc0]);
            let data: Vec<f64> = (0..12).map(|_| rng::uniform_01(&mut r) * 4.0).collect();
            let m = Matrix::from_vec(3, 4, data).unwrap();
            let got = max_assignment_value(&m).unwrap();
            assert!((got - brute_force_max(&m)).abs() < 1e-9);
            assert_eq!(max_assignment(&m).unwrap().len(), 3);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let m = Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).unwrap();
        assert!(max_assignment(&m).is_err());
    }

    #[test]
    fn cardinality_holds_on_zero_matrices() {
        let m = Matrix::zeros(3, 2);
        assert_eq!(max_assignment(&m).unwrap().len(), 2);
    }
}
