//! Enumeration helpers used by the exact oracles.

/// Advances `perm` to the next permutation in lexicographic order.
/// Returns `false` (leaving `perm` sorted ascending) after the last one.
pub fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        perm.reverse();
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut out = vec![perm.clone()];
    while next_permutation(&mut perm) {
        out.push(perm.clone());
    }
    out
}

/// Calls `visit` with the label vector of every partition of `0..n` into
/// exactly `k` nonempty blocks. Labels are restricted growth strings: block
/// ids appear in order of first occurrence, so each set partition is visited
/// once.
pub fn for_each_set_partition<F: FnMut(&[usize])>(n: usize, k: usize, mut visit: F) {
    if k == 0 || k > n {
        return;
    }
    let mut labels = vec![0usize; n];
    // prefix_max[i] = max(labels[..=i])
    let mut prefix_max = vec![0usize; n];
    fn rec<F: FnMut(&[usize])>(
        i: usize,
        n: usize,
        k: usize,
        labels: &mut [usize],
        prefix_max: &mut [usize],
        visit: &mut F,
    ) {
        if i == n {
            if prefix_max[n - 1] + 1 == k {
                visit(labels);
            }
            return;
        }
        let used = prefix_max[i - 1] + 1;
        // not enough positions left to open the remaining blocks
        if k - used.min(k) > n - i {
            return;
        }
        let top = used.min(k - 1);
        for label in 0..=top {
            labels[i] = label;
            prefix_max[i] = prefix_max[i - 1].max(label);
            rec(i + 1, n, k, labels, prefix_max, visit);
        }
    }
    labels[0] = 0;
    prefix_max[0] = 0;
    if n == 1 {
        if k == 1 {
            visit(&labels);
        }
        return;
    }
    rec(1, n, k, &mut labels, &mut prefix_max, &mut visit);
}

/// Stirling number of the second kind, saturating on overflow.
pub fn stirling2(n: usize, k: usize) -> u128 {
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = (j as u128)
                .saturating_mul(row[j])
                .saturating_add(row[j - 1]);
        }
        row[0] = 0;
    }
    row[k]
}

/// Calls `visit` with every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset<F: FnMut(&[usize])>(n: usize, k: usize, mut visit: F) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
