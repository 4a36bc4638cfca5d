//! Exact assignment solvers on square matrices.
//!
//! * [`max_weight_assignment`]: Hungarian algorithm on integer weights, with
//!   the lexicographically smallest permutation among all optimal ones.
//! * [`bottleneck_assignment`]: min-max assignment by threshold search over
//!   the distinct entries plus bipartite matching.
//!
//! Both have brute-force counterparts used as test oracles for small `k`.

use crate::combinatorics::next_permutation;

/// Result of an assignment: `perm[row] = column`.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<T> {
    pub perm: Vec<usize>,
    pub value: T,
}

/// Hungarian algorithm (potentials form) minimizing `sum cost[i][perm[i]]`
/// over rows `rows` and columns `cols` of the full matrix.
fn hungarian_min(cost: &[Vec<i64>], rows: &[usize], cols: &[usize]) -> (i64, Vec<usize>) {
    let n = rows.len();
    debug_assert_eq!(n, cols.len());
    if n == 0 {
        return (0, Vec::new());
    }
    const INF: i64 = i64::MAX / 4;
    let c = |i: usize, j: usize| cost[rows[i - 1]][cols[j - 1]];
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    // p[j] = row matched to column j (1-based, 0 = none)
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = c(i0, j) - u[i0] - v[j];
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
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| cost[rows[i]][cols[assign[i]]]).sum();
    (total, assign)
}

/// Maximum-weight perfect assignment on a square integer matrix. Among all
/// optimal permutations the lexicographically smallest is returned.
pub fn max_weight_assignment(weight: &[Vec<i64>]) -> Assignment<i64> {
    let k = weight.len();
    let cost: Vec<Vec<i64>> = weight
        .iter()
        .map(|row| row.iter().map(|w| -w).collect())
        .collect();
    let all: Vec<usize> = (0..k).collect();
    let (best, _) = hungarian_min(&cost, &all, &all);

    // Fix rows in order to the smallest column that keeps the optimum.
    let mut perm = vec![usize::MAX; k];
    let mut free_cols: Vec<usize> = all.clone();
    let mut fixed_cost = 0i64;
    for row in 0..k {
        let rest_rows: Vec<usize> = (row + 1..k).collect();
        let mut chosen = None;
        for (pos, &col) in free_cols.iter().enumerate() {
            let mut rest_cols = free_cols.clone();
            rest_cols.remove(pos);
            let (rest, _) = hungarian_min(&cost, &rest_rows, &rest_cols);
            if fixed_cost + cost[row][col] + rest == best {
                chosen = Some(pos);
                break;
            }
        }
        let pos = chosen.expect("some column must preserve the optimum");
        let col = free_cols.remove(pos);
        perm[row] = col;
        fixed_cost += cost[row][col];
    }
    Assignment { perm, value: -best }
}

/// Exhaustive counterpart of [`max_weight_assignment`].
pub fn max_weight_assignment_brute(weight: &[Vec<i64>]) -> Assignment<i64> {
    let k = weight.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let score = |p: &[usize]| (0..k).map(|i| weight[i][p[i]]).sum::<i64>();
    let mut best = Assignment {
        perm: perm.clone(),
        value: score(&perm),
    };
    while next_permutation(&mut perm) {
        let s = score(&perm);
        if s > best.value {
            best = Assignment {
                perm: perm.clone(),
                value: s,
            };
        }
    }
    best
}

/// Kuhn's augmenting-path matching on the graph `cost[i][j] <= threshold`,
/// restricted to the given rows/cols. Returns whether a perfect matching exists.
fn perfect_matching_exists(
    cost: &[Vec<f64>],
    rows: &[usize],
    cols: &[usize],
    threshold: f64,
) -> bool {
    let n = rows.len();
    let mut match_col: Vec<Option<usize>> = vec![None; n];
    fn augment(
        i: usize,
        cost: &[Vec<f64>],
        rows: &[usize],
        cols: &[usize],
        threshold: f64,
        seen: &mut [bool],
        match_col: &mut [Option<usize>],
    ) -> bool {
        for j in 0..cols.len() {
            if seen[j] || cost[rows[i]][cols[j]] > threshold {
                continue;
            }
            seen[j] = true;
            let free = match match_col[j] {
                None => true,
                Some(other) => augment(other, cost, rows, cols, threshold, seen, match_col),
            };
            if free {
                match_col[j] = Some(i);
                return true;
            }
        }
        false
    }
    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, cost, rows, cols, threshold, &mut seen, &mut match_col) {
            return false;
        }
    }
    true
}

/// Min-max perfect assignment on a square matrix of finite reals. Among all
/// permutations attaining the bottleneck value the lexicographically smallest
/// is returned.
pub fn bottleneck_assignment(cost: &[Vec<f64>]) -> Assignment<f64> {
    let k = cost.len();
    if k == 0 {
        return Assignment {
            perm: Vec::new(),
            value: 0.0,
        };
    }
    let mut candidates: Vec<f64> = cost.iter().flatten().copied().collect();
    candidates.sort_by(|a, b| a.total_cmp(b));
    candidates.dedup();
    let all: Vec<usize> = (0..k).collect();
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching_exists(cost, &all, &all, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let value = candidates[lo];

    let mut perm = vec![usize::MAX; k];
    let mut free_cols = all.clone();
    for row in 0..k {
        let rest_rows: Vec<usize> = (row + 1..k).collect();
        let mut chosen = None;
        for (pos, &col) in free_cols.iter().enumerate() {
            if cost[row][col] > value {
                continue;
            }
            let mut rest_cols = free_cols.clone();
            rest_cols.remove(pos);
            if perfect_matching_exists(cost, &rest_rows, &rest_cols, value) {
                chosen = Some(pos);
                break;
            }
        }
        let pos = chosen.expect("some column must preserve the bottleneck value");
        perm[row] = free_cols.remove(pos);
    }
    Assignment { perm, value }
}

/// Exhaustive counterpart of [`bottleneck_assignment`].
pub fn bottleneck_assignment_brute(cost: &[Vec<f64>]) -> Assignment<f64> {
    let k = cost.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let score = |p: &[usize]| (0..k).map(|i| cost[i][p[i]]).fold(0.0, f64::max);
    let mut best = Assignment {
        perm: perm.clone(),
        value: score(&perm),
    };
    while next_permutation(&mut perm) {
        let s = score(&perm);
        if s < best.value {
            best = Assignment {
                perm: perm.clone(),
                value: s,
            };
        }
    }
    best
}
