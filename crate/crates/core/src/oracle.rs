//! The k-point ensemble by exhaustive enumeration of k-subsets, with
//! P(S) ∝ Π_{i<j∈S}(x_i − x_j)² Π_{i∈S} w_i. Only for small N.

use crate::error::{Error, Result};
use crate::weights::LogWeights;

/// Largest node count accepted by [`BruteForceEnsemble::new`].
pub const MAX_NODES: usize = 16;

#[derive(Clone, Debug)]
pub struct BruteForceEnsemble {
    n: usize,
    /// (sorted subset, probability).
    law: Vec<(Vec<usize>, f64)>,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

impl BruteForceEnsemble {
    pub fn new(w: &LogWeights, k: usize) -> Result<Self> {
        let n = w.len();
        if n > MAX_NODES || k == 0 || k > n {
            return Err(Error::precondition(format!(
                "enumeration needs 1 ≤ k ≤ N ≤ {MAX_NODES} (got N = {n}, k = {k})"
            )));
        }
        let x = w.nodes();
        let lw = w.logw();
        let logs: Vec<(Vec<usize>, f64)> = subsets(n, k)
            .into_iter()
            .map(|s| {
                let mut l: f64 = s.iter().map(|&i| lw[i]).sum();
                for a in 0..s.len() {
                    for b in a + 1..s.len() {
                        l += 2.0 * (x[s[a]] - x[s[b]]).abs().ln();
                    }
                }
                (s, l)
            })
            .collect();
        let top = logs.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = logs.iter().map(|s| (s.1 - top).exp()).sum();
        let law = logs
            .into_iter()
            .map(|(s, l)| (s, (l - top).exp() / total))
            .collect();
        Ok(BruteForceEnsemble { n, law })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn law(&self) -> &[(Vec<usize>, f64)] {
        &self.law
    }

    /// P(all of `points` are occupied).
    pub fn correlation(&self, points: &[usize]) -> f64 {
        self.law
            .iter()
            .filter(|(s, _)| points.iter().all(|p| s.contains(p)))
            .map(|(_, p)| p)
            .sum()
    }

    /// P(exactly m particles in `set`).
    pub fn occupancy(&self, set: &[usize], m: usize) -> f64 {
        self.law
            .iter()
            .filter(|(s, _)| s.iter().filter(|i| set.contains(i)).count() == m)
            .map(|(_, p)| p)
            .sum()
    }
}

/// All subsets of {0, …, n−1} with at most `max_len` elements, empty set
/// excluded.
pub fn small_subsets(n: usize, max_len: usize) -> Vec<Vec<usize>> {
    (1..=max_len.min(n)).flat_map(|k| subsets(n, k)).collect()
}
