//! Maximum-weight perfect matching on a square weight matrix.

use super::SimilarityMatrix;
use crate::error::{Error, Result};

/// Hungarian algorithm (shortest augmenting paths with potentials) on a
/// square cost matrix; returns `row -> col` minimizing total cost.
fn hungarian_min(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays; column 0 is the virtual source
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[row_of_col[j] - 1] = j - 1;
    }
    assignment
}

/// Best total weight over the given rows and columns.
fn best_total(w: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| -w[r][c]).collect())
        .collect();
    hungarian_min(&cost)
        .iter()
        .enumerate()
        .map(|(i, &j)| w[rows[i]][cols[j]])
        .sum()
}

/// Permutation `perm[row] = col` maximizing `Σ w[row][perm[row]]`. Among all
/// maximizers the lexicographically smallest permutation is returned.
pub fn max_weight_assignment(w: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = w.len();
    if let Some(row) = w.iter().find(|r| r.len() != n) {
        return Err(Error::invalid(format!(
            "weight matrix must be square: {n} rows but a row of length {}",
            row.len()
        )));
    }
    if w.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("weight matrix contains non-finite entries"));
    }
    let all: Vec<usize> = (0..n).collect();
    let optimum = best_total(w, &all, &all);
    let eps = 1e-9 * optimum.abs().max(1.0);

    // Fix rows in order to the smallest column that still admits an optimum.
    let mut perm = Vec::with_capacity(n);
    let mut free_cols: Vec<usize> = all.clone();
    let mut fixed_sum = 0.0;
    for row in 0..n {
        let rest_rows: Vec<usize> = (row + 1..n).collect();
        let chosen = free_cols
            .iter()
            .copied()
            .find(|&col| {
                let rest_cols: Vec<usize> = free_cols.iter().copied().filter(|&c| c != col).collect();
                let total = fixed_sum + w[row][col] + best_total(w, &rest_rows, &rest_cols);
                total >= optimum - eps
            })
            .expect("some column extends the optimum");
        fixed_sum += w[row][chosen];
        free_cols.retain(|&c| c != chosen);
        perm.push(chosen);
    }
    Ok(perm)
}

/// Label permutation `φ`: raw K-means cluster `k` becomes label `φ[k]`.
pub fn match_labels(w: &SimilarityMatrix) -> Result<Vec<usize>> {
    max_weight_assignment(&w.rows())
}
