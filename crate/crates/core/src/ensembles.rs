//! Exact sampling of the k-point ensemble whose correlation kernel is K_{N,k}.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;

const NEGATIVE_TOL: f64 = 1e-10;

/// Sorted node indices of the k particles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Configuration {
    pub indices: Vec<usize>,
}

impl Configuration {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn count_in(&self, set: &[usize]) -> usize {
        self.indices.iter().filter(|i| set.contains(i)).count()
    }
}

/// The generator used for sample `index` of a run with `seed`; independent
/// of how the run is split across threads.
pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn probability(p: f64, what: &str) -> Result<f64> {
    if !(-NEGATIVE_TOL..=1.0 + NEGATIVE_TOL).contains(&p) {
        return Err(Error::Invariant(format!("conditional {what} probability {p:e}")));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Picks points one at a time with probability proportional to the
/// conditional diagonal, updating the kernel by a Schur complement.
pub fn sample<R: Rng>(kernel: &KernelMatrix, rng: &mut R) -> Result<Configuration> {
    let n = kernel.n();
    let mut k: Vec<f64> = (0..n * n).map(|e| kernel.get(e / n, e % n)).collect();
    let mut chosen = Vec::with_capacity(kernel.k());
    for step in 0..kernel.k() {
        let remaining = (kernel.k() - step) as f64;
        let mut u = rng.gen::<f64>() * remaining;
        let mut pick = None;
        for i in 0..n {
            let d = probability(k[i * n + i], "one-point")?;
            if d == 0.0 {
                continue;
            }
            pick = Some(i);
            if u < d {
                break;
            }
            u -= d;
        }
        let i = pick.ok_or_else(|| Error::Invariant("kernel has no remaining mass".into()))?;
        let piv = k[i * n + i];
        let col: Vec<f64> = (0..n).map(|r| k[r * n + i]).collect();
        for r in 0..n {
            let f = col[r] / piv;
            for c in 0..n {
                k[r * n + c] -= f * col[c];
            }
        }
        for r in 0..n {
            k[r * n + i] = 0.0;
            k[i * n + r] = 0.0;
        }
        chosen.push(i);
    }
    chosen.sort_unstable();
    Ok(Configuration { indices: chosen })
}

/// Visits the nodes in `order`, deciding each one by its conditional
/// probability given the decisions so far.
pub fn sample_ordered<R: Rng>(
    kernel: &KernelMatrix,
    order: &[usize],
    rng: &mut R,
) -> Result<Configuration> {
    let n = kernel.n();
    if order.len() != n {
        return Err(Error::precondition("order must be a permutation of the nodes"));
    }
    let mut k: Vec<f64> = (0..n * n).map(|e| kernel.get(e / n, e % n)).collect();
    let mut chosen = Vec::new();
    for &i in order {
        let d = probability(k[i * n + i], "inclusion")?;
        let take = rng.gen::<f64>() < d;
        let piv = if take { k[i * n + i] } else { k[i * n + i] - 1.0 };
        if piv != 0.0 {
            let col: Vec<f64> = (0..n).map(|r| k[r * n + i]).collect();
            for r in 0..n {
                let f = col[r] / piv;
                for c in 0..n {
                    k[r * n + c] -= f * col[c];
                }
            }
        }
        if take {
            chosen.push(i);
        }
    }
    if chosen.len() != kernel.k() {
        return Err(Error::Invariant(format!(
            "sampled {} points from a rank-{} kernel",
            chosen.len(),
            kernel.k()
        )));
    }
    chosen.sort_unstable();
    Ok(Configuration { indices: chosen })
}

/// `count` independent samples; sample i uses `rng_for(seed, i)`.
pub fn batch(kernel: &KernelMatrix, count: usize, seed: u64) -> Result<Vec<Configuration>> {
    (0..count)
        .into_par_iter()
        .map(|i| sample(kernel, &mut rng_for(seed, i as u64)))
        .collect()
}

/// Empirical frequency of each node over the samples.
pub fn one_point_frequencies(samples: &[Configuration], n: usize) -> Vec<f64> {
    let mut f = vec![0.0; n];
    for s in samples {
        for &i in &s.indices {
            f[i] += 1.0;
        }
    }
    let m = samples.len().max(1) as f64;
    f.iter_mut().for_each(|v| *v /= m);
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::cd_kernel;
    use crate::nodes::NodeSet;
    use crate::orthopoly::build_basis;
    use crate::weights::{log_weight, WeightSpec};

    fn kernel(n: usize, k: usize) -> KernelMatrix {
        let lw = log_weight(&WeightSpec::krawtchouk(0.35), &NodeSet::unit(n)).unwrap();
        cd_kernel(&build_basis(&lw, n - 1, 128).unwrap(), k).unwrap()
    }

    #[test]
    fn exactly_k_distinct_points() {
        let kk = kernel(15, 6);
        let mut rng = rng_for(3, 0);
        for _ in 0..200 {
            let c = sample(&kk, &mut rng).unwrap();
            assert_eq!(c.len(), 6);
            assert!(c.indices.windows(2).all(|w| w[0] < w[1]));
            let order: Vec<usize> = (0..15).rev().collect();
            assert_eq!(sample_ordered(&kk, &order, &mut rng).unwrap().len(), 6);
        }
    }

    #[test]
    fn batches_are_reproducible() {
        let kk = kernel(10, 4);
        assert_eq!(batch(&kk, 50, 9).unwrap(), batch(&kk, 50, 9).unwrap());
        assert_ne!(batch(&kk, 50, 9).unwrap(), batch(&kk, 50, 10).unwrap());
    }
}
