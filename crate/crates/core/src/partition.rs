//! Partitions, optimal label matching and the label-invariant Hamming
//! distance.
//!
//! Labels are stored 0-based (`0..k`); reports convert to 1-based labels at
//! the serialization boundary.

use crate::assignment::{max_weight_assignment, max_weight_assignment_brute};
use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};

/// A label vector in `0..k`. Empty clusters are representable; operations
/// that need nonempty clusters check for them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return domain("a partition needs k >= 1");
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return domain(format!("label {l} at index {i} is outside 0..{k}"));
        }
        Ok(Self { labels, k })
    }

    /// Builds from 1-based labels, inferring `k` as the largest label.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        if let Some(i) = labels.iter().position(|&l| l == 0) {
            return domain(format!("label 0 at index {i}; labels are 1-based"));
        }
        let k = labels.iter().copied().max().unwrap_or(0);
        Self::new(labels.iter().map(|l| l - 1).collect(), k.max(1))
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l + 1).collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// Member indices of every cluster.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            c[l].push(i);
        }
        c
    }

    pub fn all_nonempty(&self) -> bool {
        self.sizes().iter().all(|&s| s > 0)
    }

    pub fn require_nonempty(&self) -> Result<()> {
        match self.sizes().iter().position(|&s| s == 0) {
            Some(j) => Err(Error::Precondition(format!("cluster {} is empty", j + 1))),
            None => Ok(()),
        }
    }

    /// Applies `new_label = perm[old_label]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        Self {
            labels: self.labels.iter().map(|&l| perm[l]).collect(),
            k: self.k,
        }
    }

    /// Canonical form with labels in order of first appearance; equal for
    /// partitions that agree up to relabeling.
    pub fn canonical(&self) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        self.labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect()
    }
}

/// Optimal matching of `hat` clusters onto `star` clusters:
/// hat cluster `j` corresponds to star cluster `permutation[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub permutation: Vec<usize>,
    pub agreement_count: usize,
}

fn check_compatible(a: &Partition, b: &Partition) -> Result<()> {
    if a.n() != b.n() {
        return domain(format!(
            "partitions have different sizes {} and {}",
            a.n(),
            b.n()
        ));
    }
    if a.k() != b.k() {
        return domain(format!(
            "partitions have different numbers of clusters {} and {}",
            a.k(),
            b.k()
        ));
    }
    if a.n() == 0 {
        return domain("partitions are empty");
    }
    Ok(())
}

/// `overlap[j][l] = |hat_j ∩ star_l|`.
pub fn overlap_matrix(hat: &Partition, star: &Partition) -> Result<Vec<Vec<i64>>> {
    check_compatible(hat, star)?;
    let k = hat.k();
    let mut m = vec![vec![0i64; k]; k];
    for (&a, &b) in hat.labels().iter().zip(star.labels()) {
        m[a][b] += 1;
    }
    Ok(m)
}

/// Misclassification rate `1 - max_pi agreement / n` and the optimal
/// matching (lexicographically smallest on ties).
pub fn misclassification_rate(hat: &Partition, star: &Partition) -> Result<(f64, Matching)> {
    let overlap = overlap_matrix(hat, star)?;
    let best = max_weight_assignment(&overlap);
    let agreement = best.value as usize;
    let n = hat.n();
    let rate = (n - agreement) as f64 / n as f64;
    Ok((
        rate,
        Matching {
            permutation: best.perm,
            agreement_count: agreement,
        },
    ))
}

/// Same as [`misclassification_rate`] by enumerating all `k!` permutations.
pub fn misclassification_rate_brute(hat: &Partition, star: &Partition) -> Result<(f64, Matching)> {
    let overlap = overlap_matrix(hat, star)?;
    let best = max_weight_assignment_brute(&overlap);
    let agreement = best.value as usize;
    let n = hat.n();
    Ok((
        (n - agreement) as f64 / n as f64,
        Matching {
            permutation: best.perm,
            agreement_count: agreement,
        },
    ))
}

/// Number of points disagreeing after optimal matching.
pub fn mismatch_count(a: &Partition, b: &Partition) -> Result<usize> {
    let (_, m) = misclassification_rate(a, b)?;
    Ok(a.n() - m.agreement_count)
}

/// Label-invariant Hamming distance; equal to the misclassification rate and
/// symmetric in its arguments.
pub fn hamming_distance(a: &Partition, b: &Partition) -> Result<f64> {
    misclassification_rate(a, b).map(|(rate, _)| rate)
}

/// `hat` relabeled by its optimal matching onto `star`.
pub fn align(hat: &Partition, star: &Partition) -> Result<Partition> {
    let (_, m) = misclassification_rate(hat, star)?;
    Ok(hat.relabel(&m.permutation))
}
