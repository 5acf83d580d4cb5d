//! The reproducing kernel K_{N,k} on the nodes and the determinantal
//! statistics built from it.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rug::Float;
use serde::Serialize;

use crate::equilibrium::{classify_intervals, EquilibriumMeasure, SegmentKind, DEFAULT_EPS_REL};
use crate::error::{Error, Result};
use crate::orthopoly::OrthoBasis;

/// Largest set for which occupancy polynomials are formed.
pub const MAX_OCCUPANCY_SET: usize = 30;
/// Fraction of a segment left out at each end in the gap diagnostics.
pub const INTERIOR_TRIM: f64 = 0.2;
const CD_TOL: f64 = 1e-10;

/// K_{N,k}(x_i, x_j) for all pairs of nodes.
///
/// Entries are summed over whichever of {p_0..p_{k−1}} or {p_k..p_{N−1}}
/// avoids cancellation, so values exponentially close to 0 or 1 keep
/// their relative accuracy.
#[derive(Clone, Debug)]
pub struct KernelMatrix {
    k: usize,
    nodes: Vec<f64>,
    entries: Vec<f64>,
    one_minus_diag: Vec<f64>,
    /// Largest scaled disagreement with the two-term form over the
    /// sampled pairs.
    pub cd_deviation: f64,
}

impl KernelMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n() + j]
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    /// 1 − K(x_i, x_i), accurate when K(x_i, x_i) is close to one.
    pub fn one_minus_diag(&self, i: usize) -> f64 {
        self.one_minus_diag[i]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.diag(i)).sum()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n(), self.n(), &self.entries)
    }

    pub fn restrict(&self, set: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(set.len(), set.len(), |a, b| self.get(set[a], set[b]))
    }

    /// max |K² − K|.
    pub fn projection_defect(&self) -> f64 {
        let k = self.matrix();
        (&k * &k - &k).abs().max()
    }
}

/// Builds K_{N,k}. The basis must reach degree k for the two-term check;
/// with degree N−1 the complementary sums are used where K is near one.
pub fn cd_kernel(basis: &OrthoBasis, k: usize) -> Result<KernelMatrix> {
    let n = basis.n();
    if k == 0 || k >= n {
        return Err(Error::precondition(format!("kernel rank {k} must lie in 1..{n}")));
    }
    if basis.kmax() < k {
        return Err(Error::precondition(format!(
            "basis reaches degree {} but the kernel check needs degree {k}",
            basis.kmax()
        )));
    }
    let full = basis.kmax() == n - 1;
    let sum = |range: std::ops::Range<usize>, i: usize, j: usize| -> f64 {
        range.map(|m| basis.q(m)[i] * basis.q(m)[j]).sum()
    };
    let low: Vec<f64> = (0..n).map(|i| sum(0..k, i, i)).collect();
    let high: Vec<f64> = (0..n)
        .map(|i| if full { sum(k..n, i, i) } else { 1.0 - low[i] })
        .collect();
    let saturated = |i: usize| full && low[i] > 0.5;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = if i == j {
                if saturated(i) {
                    1.0 - high[i]
                } else {
                    low[i]
                }
            } else if saturated(i) && saturated(j) {
                -sum(k..n, i, j)
            } else {
                sum(0..k, i, j)
            };
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    let mut kernel = KernelMatrix {
        k,
        nodes: basis.nodes().to_vec(),
        entries,
        one_minus_diag: high,
        cd_deviation: 0.0,
    };
    kernel.cd_deviation = cd_check(basis, &kernel, &low)?;
    Ok(kernel)
}

fn cd_sample(n: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (0..8).map(|i| i * (n - 1) / 7).collect();
    s.dedup();
    s
}

/// Two-term form b_k (q_k(x)q_{k−1}(y) − q_{k−1}(x)q_k(y))/(x − y) in
/// working precision, compared on a spread of node pairs. Disagreement is
/// measured against the Cauchy–Schwarz scale of the summed form.
fn cd_check(basis: &OrthoBasis, kernel: &KernelMatrix, low: &[f64]) -> Result<f64> {
    let (k, n, bits) = (kernel.k, kernel.n(), basis.bits());
    let (qk, qk1) = (basis.q_mp(k), basis.q_mp(k - 1));
    let x = basis.nodes_mp();
    let sample = cd_sample(n);
    let mut worst: f64 = 0.0;
    for (a, &i) in sample.iter().enumerate() {
        for &j in &sample[a + 1..] {
            let num = Float::with_val(bits, &qk[i] * &qk1[j]) - Float::with_val(bits, &qk1[i] * &qk[j]);
            let cd = (num * &basis.b()[k] / Float::with_val(bits, &x[i] - &x[j])).to_f64();
            let scale = if low[i] > 0.5 && low[j] > 0.5 && kernel.n() - 1 == basis.kmax() {
                (kernel.one_minus_diag[i] * kernel.one_minus_diag[j]).sqrt()
            } else {
                (low[i] * low[j]).sqrt()
            };
            let dev = (kernel.get(i, j) - cd).abs() / scale.max(f64::MIN_POSITIVE);
            worst = worst.max(dev);
        }
    }
    if worst > CD_TOL {
        return Err(Error::Precision {
            k,
            bits,
            detail: format!("kernel forms disagree by {worst:e}"),
        });
    }
    Ok(worst)
}

/// R_m(x_{points}) = det(K restricted to the points).
pub fn correlation(kernel: &KernelMatrix, points: &[usize]) -> f64 {
    let mut sorted = points.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return 0.0;
    }
    if points.is_empty() {
        return 1.0;
    }
    kernel.restrict(points).determinant()
}

/// Coefficients d_0..d_{|B|} of det(1 − tK|_B) = Π(1 − tλ_i).
pub fn det_polynomial(kernel: &KernelMatrix, set: &[usize]) -> Result<Vec<f64>> {
    check_set(kernel, set)?;
    Ok(poly_from_roots(&eigenvalues(kernel.restrict(set))))
}

fn check_set(kernel: &KernelMatrix, set: &[usize]) -> Result<()> {
    if set.len() > MAX_OCCUPANCY_SET {
        return Err(Error::precondition(format!(
            "occupancy sets are limited to {MAX_OCCUPANCY_SET} nodes"
        )));
    }
    let mut s = set.to_vec();
    s.sort_unstable();
    if s.windows(2).any(|w| w[0] == w[1]) || s.last().is_some_and(|&i| i >= kernel.n()) {
        return Err(Error::precondition("set must hold distinct node indices"));
    }
    Ok(())
}

fn eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.symmetric_eigen().eigenvalues.iter().copied().collect()
}

fn poly_from_roots(lambda: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &l in lambda {
        let mut next = vec![0.0; c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            next[i] += v;
            next[i + 1] -= l * v;
        }
        c = next;
    }
    c
}

pub fn eval_poly(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

/// A_m for m = 0..|B|: (−d/dt)^m/m! det(1 − tK|_B) at t = 1, which is the
/// coefficient of s^m in det(1 − (1 − s)K|_B) = Π(1 − λ_i + λ_i s).
pub fn occupancy_distribution(kernel: &KernelMatrix, set: &[usize]) -> Result<Vec<f64>> {
    check_set(kernel, set)?;
    Ok(occupancy_from_eigenvalues(&eigenvalues(kernel.restrict(set))))
}

fn occupancy_from_eigenvalues(lambda: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &l in lambda {
        let l = l.clamp(0.0, 1.0);
        let mut next = vec![0.0; c.len() + 1];
        for (i, v) in c.iter().enumerate() {
            next[i] += (1.0 - l) * v;
            next[i + 1] += l * v;
        }
        c = next;
    }
    c
}

pub fn occupancy(kernel: &KernelMatrix, set: &[usize], m: usize) -> Result<f64> {
    if m > set.len().min(kernel.k) {
        return Err(Error::precondition(format!(
            "m = {m} exceeds min(|B|, k) = {}",
            set.len().min(kernel.k)
        )));
    }
    Ok(occupancy_distribution(kernel, set)?[m])
}

/// Σ_{i∈B} K_ii.
pub fn expected_count(kernel: &KernelMatrix, set: &[usize]) -> f64 {
    set.iter().map(|&i| kernel.diag(i)).sum()
}

/// cψ/ρ⁰ at x, the limiting one-point function in a band.
pub fn density_ratio(eqm: &EquilibriumMeasure, x: f64) -> f64 {
    eqm.c_f64() * eqm.psi_at(x) / eqm.density().rho(x)
}

fn require_band(eqm: &EquilibriumMeasure, x: f64) -> Result<()> {
    let cls = classify_intervals(eqm, DEFAULT_EPS_REL);
    match cls.kind_at(x) {
        Some(SegmentKind::Band) => Ok(()),
        other => Err(Error::precondition(format!(
            "x = {x} is not in a band ({other:?})"
        ))),
    }
}

/// The discrete sine kernel sin(πd(i−j))/(π(i−j)) on offsets.
pub fn sine_kernel(ratio: f64, offsets: &[i64]) -> DMatrix<f64> {
    DMatrix::from_fn(offsets.len(), offsets.len(), |a, b| {
        let d = (offsets[a] - offsets[b]) as f64;
        if d == 0.0 {
            ratio
        } else {
            (PI * ratio * d).sin() / (PI * d)
        }
    })
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        (PI * u).sin() / (PI * u)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SineComparison {
    pub center: usize,
    pub window: usize,
    pub kernel_diagonal: f64,
    pub density_ratio: f64,
    /// |K(x,x)/(cψ/ρ⁰) − 1|.
    pub diagonal_error: f64,
    /// max |K(x_i,x_j)/K(x,x) − sinc(ξ_i − ξ_j)| over the window.
    pub max_deviation: f64,
}

/// Compares K near the node `center` with the sine kernel, using the
/// rescaled positions ξ_i = (x_i − x)·Nρ⁰(x)K(x,x).
pub fn sine_compare(
    kernel: &KernelMatrix,
    eqm: &EquilibriumMeasure,
    center: usize,
    window: usize,
) -> Result<SineComparison> {
    let n = kernel.n();
    if center >= n || center < window || center + window >= n {
        return Err(Error::precondition("window does not fit around the center node"));
    }
    let x = kernel.nodes[center];
    require_band(eqm, x)?;
    let kxx = kernel.diag(center);
    let ratio = density_ratio(eqm, x);
    let scale = n as f64 * eqm.density().rho(x) * kxx;
    let idx: Vec<usize> = (center - window..=center + window).collect();
    let xi: Vec<f64> = idx.iter().map(|&i| (kernel.nodes[i] - x) * scale).collect();
    let mut dev: f64 = 0.0;
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            dev = dev.max((kernel.get(i, j) / kxx - sinc(xi[a] - xi[b])).abs());
        }
    }
    Ok(SineComparison {
        center,
        window,
        kernel_diagonal: kxx,
        density_ratio: ratio,
        diagonal_error: (kxx / ratio - 1.0).abs(),
        max_deviation: dev,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SineOccupancy {
    pub nodes: Vec<usize>,
    pub density_ratio: f64,
    pub kernel_det: Vec<f64>,
    pub sine_det: Vec<f64>,
    pub kernel_occupancy: Vec<f64>,
    pub sine_occupancy: Vec<f64>,
}

impl SineOccupancy {
    pub fn det_difference(&self, t: f64) -> f64 {
        (eval_poly(&self.kernel_det, t) - eval_poly(&self.sine_det, t)).abs()
    }
}

/// det(1 − tK|_B) and det(1 − tS|_𝔹) for B = {x_j, x_{j+k_1}, …}, with
/// offsets 0 < k_1 < … given without the leading 0.
pub fn occupancy_sine_limit(
    kernel: &KernelMatrix,
    eqm: &EquilibriumMeasure,
    j: usize,
    offsets: &[usize],
) -> Result<SineOccupancy> {
    if offsets.windows(2).any(|w| w[0] >= w[1]) || offsets.first() == Some(&0) {
        return Err(Error::precondition("offsets must be positive and increasing"));
    }
    let mut nodes = vec![j];
    nodes.extend(offsets.iter().map(|&o| j + o));
    if *nodes.last().unwrap() >= kernel.n() {
        return Err(Error::precondition("pattern runs past the last node"));
    }
    let x = kernel.nodes[j];
    require_band(eqm, x)?;
    let ratio = density_ratio(eqm, x);
    let ints: Vec<i64> = nodes.iter().map(|&i| (i - j) as i64).collect();
    let s = sine_kernel(ratio, &ints);
    let ls = eigenvalues(s);
    check_set(kernel, &nodes)?;
    let lk = eigenvalues(kernel.restrict(&nodes));
    Ok(SineOccupancy {
        density_ratio: ratio,
        kernel_det: poly_from_roots(&lk),
        sine_det: poly_from_roots(&ls),
        kernel_occupancy: occupancy_from_eigenvalues(&lk),
        sine_occupancy: occupancy_from_eigenvalues(&ls),
        nodes,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub kind: SegmentKind,
    pub window: (f64, f64),
    pub node_count: usize,
    /// max K_ii on a void, max (1 − K_ii) on a saturated region.
    pub max_diagonal: f64,
    /// max |(x − y)K(x, y)| over distinct nodes in the window.
    pub max_scaled_offdiag: f64,
}

pub fn gap_diagnostics(kernel: &KernelMatrix, eqm: &EquilibriumMeasure) -> Vec<GapReport> {
    let cls = classify_intervals(eqm, DEFAULT_EPS_REL);
    let x = &kernel.nodes;
    let mut out = Vec::new();
    for seg in &cls.segments {
        if seg.kind == SegmentKind::Band {
            continue;
        }
        let (lo, hi) = seg.interior(INTERIOR_TRIM);
        let idx: Vec<usize> = (0..x.len()).filter(|&i| x[i] >= lo && x[i] <= hi).collect();
        let max_diagonal = idx
            .iter()
            .map(|&i| match seg.kind {
                SegmentKind::Void => kernel.diag(i),
                _ => kernel.one_minus_diag(i),
            })
            .fold(0.0, f64::max);
        let mut off: f64 = 0.0;
        for &i in &idx {
            for &j in &idx {
                if i != j {
                    off = off.max(((x[i] - x[j]) * kernel.get(i, j)).abs());
                }
            }
        }
        out.push(GapReport {
            kind: seg.kind,
            window: (lo, hi),
            node_count: idx.len(),
            max_diagonal,
            max_scaled_offdiag: off,
        });
    }
    out
}
