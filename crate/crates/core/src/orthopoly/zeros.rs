//! Zeros of π_k from Sturm counts of the Jacobi matrix, polished by
//! safeguarded Newton iteration in working precision.

use rug::Float;

use super::OrthoBasis;
use crate::error::{Error, Result};

/// The zeros of π_{N,k}, with their position relative to the nodes.
#[derive(Clone, Debug)]
pub struct ZeroSet {
    pub k: usize,
    zeros: Vec<Float>,
    /// Index of the nearest node for each zero.
    pub nearest: Vec<usize>,
    /// Signed offset zero − nearest node, accurate even when tiny.
    pub offsets: Vec<f64>,
    /// Internode intervals (x_n, x_{n+1}), identified by n, holding more than one zero.
    pub crowded_intervals: Vec<usize>,
    /// Number of zeros at or outside [x_0, x_{N-1}].
    pub outside: usize,
}

impl ZeroSet {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn zeros_mp(&self) -> &[Float] {
        &self.zeros
    }

    pub fn zeros(&self) -> Vec<f64> {
        self.zeros.iter().map(Float::to_f64).collect()
    }

    /// Number of violations of the confinement property.
    pub fn violations(&self) -> usize {
        self.crowded_intervals.len() + self.outside
    }
}

/// Number of eigenvalues of the k×k Jacobi matrix below `t`, i.e. zeros
/// of π_k below `t`.
pub fn sturm_count(basis: &OrthoBasis, k: usize, t: &Float) -> usize {
    let bits = basis.bits();
    let tiny = Float::with_val(bits, Float::with_val(bits, 1) >> (2 * bits as i32));
    let mut count = 0;
    let mut d = Float::with_val(bits, 0);
    for i in 0..k {
        let mut next = Float::with_val(bits, &basis.alpha()[i] - t);
        if i > 0 {
            next -= Float::with_val(bits, &basis.beta()[i] / &d);
        }
        if next.is_zero() {
            next = tiny.clone();
        }
        if next.is_sign_negative() {
            count += 1;
        }
        d = next;
    }
    count
}

fn gershgorin(basis: &OrthoBasis, k: usize) -> (Float, Float) {
    let bits = basis.bits();
    let mut lo = Float::with_val(bits, f64::INFINITY);
    let mut hi = Float::with_val(bits, f64::NEG_INFINITY);
    for i in 0..k {
        let mut r = Float::with_val(bits, 0);
        if i > 0 {
            r += &basis.b()[i];
        }
        if i + 1 < k {
            r += &basis.b()[i + 1];
        }
        let a = &basis.alpha()[i];
        let l = Float::with_val(bits, a - &r);
        let h = Float::with_val(bits, a + &r);
        if l < lo {
            lo = l;
        }
        if h > hi {
            hi = h;
        }
    }
    (lo - 1u32, hi + 1u32)
}

/// Splits (lo, hi) containing `count` zeros until each piece holds one,
/// then polishes each.
#[allow(clippy::too_many_arguments)]
fn isolate(
    basis: &OrthoBasis,
    k: usize,
    lo: Float,
    hi: Float,
    below_lo: usize,
    count: usize,
    out: &mut Vec<Float>,
    depth: usize,
) {
    if count == 0 {
        return;
    }
    if count == 1 || depth > basis.bits() as usize {
        for _ in 0..count {
            out.push(polish(basis, k, &lo, &hi));
        }
        return;
    }
    let mid = Float::with_val(basis.bits(), &lo + &hi) / 2u32;
    let c_mid = sturm_count(basis, k, &mid);
    let left = c_mid - below_lo;
    isolate(basis, k, lo, mid.clone(), below_lo, left, out, depth + 1);
    isolate(basis, k, mid, hi, c_mid, count - left, out, depth + 1);
}

/// Safeguarded Newton for the single zero in (lo, hi), started from the
/// endpoint where |π_k| is smaller.
fn polish(basis: &OrthoBasis, k: usize, lo: &Float, hi: &Float) -> Float {
    let bits = basis.bits();
    let (mut a, mut b) = (lo.clone(), hi.clone());
    let fa = basis.monic_real(k, &a);
    let fb = basis.monic_real(k, &b);
    let sa = fa.is_sign_negative();
    if fa.is_zero() {
        return a;
    }
    if fb.is_zero() {
        return b;
    }
    let mut x = if Float::with_val(bits, fa.abs_ref()) < Float::with_val(bits, fb.abs_ref()) {
        a.clone()
    } else {
        b.clone()
    };
    let scale = Float::with_val(bits, &b - &a);
    let eps = Float::with_val(bits, Float::with_val(bits, 1) >> (bits as i32 - 8));
    for _ in 0..(4 * bits) {
        let (f, d) = basis.monic_with_derivative(k, &x);
        if f.is_zero() {
            return x;
        }
        if f.is_sign_negative() == sa {
            a = x.clone();
        } else {
            b = x.clone();
        }
        let width = Float::with_val(bits, &b - &a);
        let tol = Float::with_val(bits, &eps * Float::with_val(bits, x.abs_ref()).max(&scale));
        if width <= tol {
            return x;
        }
        let step = Float::with_val(bits, &f / &d);
        let cand = Float::with_val(bits, &x - &step);
        let newton_ok = d.is_finite() && !d.is_zero() && cand > a && cand < b;
        x = if newton_ok {
            if Float::with_val(bits, step.abs_ref()) <= tol {
                return cand;
            }
            cand
        } else {
            Float::with_val(bits, &a + &b) / 2u32
        };
    }
    x
}

/// All zeros of π_k, with confinement violations recorded rather than
/// raised.
pub fn locate_zeros(basis: &OrthoBasis, k: usize) -> Result<ZeroSet> {
    if k == 0 || k > basis.kmax() {
        return Err(Error::precondition(format!(
            "zeros need 1 ≤ k ≤ kmax = {} (got {k})",
            basis.kmax()
        )));
    }
    let x = basis.nodes_mp();
    let n = x.len();
    let counts: Vec<usize> = x.iter().map(|t| sturm_count(basis, k, t)).collect();
    let (g_lo, g_hi) = gershgorin(basis, k);
    let mut zeros = Vec::with_capacity(k);
    let mut crowded = Vec::new();
    let mut outside = counts[0] + (k - counts[n - 1]);
    isolate(basis, k, g_lo.min(&x[0]).clone(), x[0].clone(), 0, counts[0], &mut zeros, 0);
    for j in 0..n - 1 {
        let m = counts[j + 1] - counts[j];
        if m > 1 {
            crowded.push(j);
        }
        isolate(basis, k, x[j].clone(), x[j + 1].clone(), counts[j], m, &mut zeros, 0);
    }
    isolate(
        basis,
        k,
        x[n - 1].clone(),
        g_hi.max(&x[n - 1]).clone(),
        counts[n - 1],
        k - counts[n - 1],
        &mut zeros,
        0,
    );
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut nearest = Vec::with_capacity(k);
    let mut offsets = Vec::with_capacity(k);
    for z in &zeros {
        let idx = x.partition_point(|v| v < z);
        let cand = [idx.saturating_sub(1), idx.min(n - 1)];
        let best = cand
            .into_iter()
            .min_by(|&i, &j| {
                let di = Float::with_val(basis.bits(), z - &x[i]).abs();
                let dj = Float::with_val(basis.bits(), z - &x[j]).abs();
                di.partial_cmp(&dj).unwrap()
            })
            .unwrap();
        nearest.push(best);
        offsets.push(Float::with_val(basis.bits(), z - &x[best]).to_f64());
    }
    if let (Some(first), Some(last)) = (zeros.first(), zeros.last()) {
        if first <= &x[0] || last >= &x[n - 1] {
            outside = outside.max(1);
        }
    }
    Ok(ZeroSet {
        k,
        zeros,
        nearest,
        offsets,
        crowded_intervals: crowded,
        outside,
    })
}

/// Zeros of π_k; a confinement violation is reported as an error since
/// it signals insufficient precision.
pub fn zeros(basis: &OrthoBasis, k: usize) -> Result<ZeroSet> {
    let zs = locate_zeros(basis, k)?;
    if zs.violations() > 0 {
        return Err(Error::Invariant(format!(
            "zeros of degree {k}: {} crowded internode intervals, {} outside the node range",
            zs.crowded_intervals.len(),
            zs.outside
        )));
    }
    Ok(zs)
}

/// Strict interlacing of the zeros of degree k (`hi`) and k−1 (`lo`).
pub fn interlaces(hi: &ZeroSet, lo: &ZeroSet) -> bool {
    let (a, b) = (hi.zeros_mp(), lo.zeros_mp());
    if a.len() != b.len() + 1 {
        return false;
    }
    (0..b.len()).all(|i| a[i] < b[i] && b[i] < a[i + 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::build_basis;
    use crate::nodes::NodeSet;
    use crate::weights::{log_weight, WeightSpec};

    fn krawtchouk(n: usize, p: f64, bits: u32) -> OrthoBasis {
        let lw = log_weight(&WeightSpec::krawtchouk(p), &NodeSet::unit(n)).unwrap();
        build_basis(&lw, n - 1, bits).unwrap()
    }

    #[test]
    fn degree_one_zero_is_weighted_mean() {
        let b = krawtchouk(9, 0.3, 128);
        let zs = zeros(&b, 1).unwrap();
        let w: Vec<f64> = b.logw().logw().iter().map(|l| l.exp()).collect();
        let mean = b.nodes().iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / w.iter().sum::<f64>();
        assert!((zs.zeros()[0] - mean).abs() < 1e-15);
    }

    #[test]
    fn symmetric_weight_gives_symmetric_zeros() {
        let b = krawtchouk(16, 0.5, 160);
        for k in [3, 8, 15] {
            let z = zeros(&b, k).unwrap().zeros();
            for i in 0..k {
                assert!((z[i] + z[k - 1 - i] - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zeros_are_roots_and_confined() {
        let b = krawtchouk(20, 0.5, 192);
        let zs = zeros(&b, 19).unwrap();
        assert_eq!(zs.len(), 19);
        assert_eq!(zs.violations(), 0);
        for z in zs.zeros_mp() {
            let (f, d) = b.monic_with_derivative(19, z);
            let r = Float::with_val(192, &f / &d).abs().to_f64();
            assert!(r < 1e-40, "residual {r}");
        }
        let lower = zeros(&b, 18).unwrap();
        assert!(interlaces(&zs, &lower));
        assert!(!interlaces(&lower, &zs));
    }

    #[test]
    fn sturm_count_is_monotone() {
        let b = krawtchouk(12, 0.7, 128);
        let mut prev = 0;
        for i in 0..=40 {
            let t = Float::with_val(128, -0.2 + 1.4 * i as f64 / 40.0);
            let c = sturm_count(&b, 11, &t);
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(prev, 11);
    }
}
