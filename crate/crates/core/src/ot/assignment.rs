//! Minimum-cost perfect matching on a square cost matrix.
//!
//! Shortest-augmenting-path Hungarian method with dual potentials, O(n^3).
//! Costs must be finite; they do not need to be nonnegative.

/// Returns the minimum total cost of assigning each row to a distinct column.
///
/// `cost` is row-major `n x n`.
pub(crate) fn min_cost_assignment(cost: &[f64], n: usize) -> f64 {
    assert_eq!(cost.len(), n * n, "cost matrix must be square");
    if n == 0 {
        return 0.0;
    }

    // 1-based arrays; column 0 is the virtual root of each augmenting search.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // matched_row[j] = row assigned to column j
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        matched_row[0] = row;
        let mut j0 = 0usize;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];

        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }

        // Unwind the alternating path found above.
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    (1..=n)
        .map(|j| cost[(matched_row[j] - 1) * n + (j - 1)])
        .sum()
}
