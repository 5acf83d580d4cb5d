//! Rhombus tilings of the abc-hexagon through their vertical-line
//! ensembles.
//!
//! A tiling is encoded by c non-intersecting lattice paths. Path i starts
//! at (0, i), ends at (a+b, i+b), and takes a flat step (x+1, y) or a
//! rising step (x+1, y+1); exactly b steps rise. On the vertical line
//! x = m the paths occupy c of the heights
//! max(0, m−a) ≤ y ≤ c−1+min(m, b), so positions n = y − max(0, m−a)
//! run over {0, …, γ_m} with γ_m = c−1+min(m,b)−max(0,m−a). The c
//! occupied positions are the particles (horizontal rhombi) and the
//! L_m = γ_m+1−c free ones are the holes (vertical rhombi).

use rug::{Integer, Rational};
use serde::Serialize;

use crate::equilibrium::{classify_intervals, field, solve, SegmentKind, DEFAULT_EPS_REL};
use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::kernels::{cd_kernel, KernelMatrix};
use crate::nodes::{NodeDensity, NodeSet};
use crate::orthopoly::{build_basis_ladder, DEFAULT_BITS};
use crate::weights::{log_weight, LogWeights, WeightSpec};

/// Largest a·b·c accepted by `enumerate_tilings`.
pub const ENUMERATION_CAP: u64 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Hexagon {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl Hexagon {
    pub fn new(a: u64, b: u64, c: u64) -> Result<Self> {
        if a == 0 || b == 0 || c == 0 {
            return Err(Error::config("hexagon sides must be positive"));
        }
        Ok(Hexagon { a, b, c })
    }

    /// Number of interior vertical lines, m = 1..a+b−1.
    pub fn columns(&self) -> u64 {
        self.a + self.b - 1
    }

    /// Lowest occupied height on line m.
    pub fn floor(&self, m: u64) -> u64 {
        m.saturating_sub(self.a)
    }

    pub fn gamma(&self, m: u64) -> u64 {
        self.c - 1 + m.min(self.b) - self.floor(m)
    }

    pub fn holes(&self, m: u64) -> u64 {
        self.gamma(m) + 1 - self.c
    }
}

/// MacMahon's product Π_{i≤a,j≤b,k≤c} (i+j+k−1)/(i+j+k−2), evaluated by
/// collecting the exponent of every factor value before multiplying.
pub fn macmahon(hex: Hexagon) -> Integer {
    let top = (hex.a + hex.b + hex.c) as usize;
    let mut exp = vec![0i64; top + 1];
    for i in 1..=hex.a {
        for j in 1..=hex.b {
            for k in 1..=hex.c {
                let s = (i + j + k) as usize;
                exp[s - 1] += 1;
                exp[s - 2] -= 1;
            }
        }
    }
    let mut num = Integer::from(1);
    let mut den = Integer::from(1);
    for (t, &e) in exp.iter().enumerate().skip(2) {
        let p = Integer::from(Integer::u_pow_u(t as u32, e.unsigned_abs() as u32));
        if e > 0 {
            num *= p;
        } else if e < 0 {
            den *= p;
        }
    }
    let q = Rational::from((num, den));
    debug_assert_eq!(*q.denom(), 1);
    q.numer().clone()
}

/// A tiling as the heights of its c paths on every line x = 0..a+b.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tiling {
    pub heights: Vec<Vec<u64>>,
}

impl Tiling {
    /// Hole positions on line m.
    pub fn holes(&self, hex: Hexagon, m: u64) -> Vec<u64> {
        let f = hex.floor(m);
        let occ = &self.heights[m as usize];
        (0..=hex.gamma(m)).filter(|n| !occ.contains(&(n + f))).collect()
    }

    pub fn particles(&self, hex: Hexagon, m: u64) -> Vec<u64> {
        let f = hex.floor(m);
        self.heights[m as usize].iter().map(|y| y - f).collect()
    }
}

/// Every tiling of a small hexagon.
pub fn enumerate_tilings(hex: Hexagon) -> Result<Vec<Tiling>> {
    if hex.a * hex.b * hex.c > ENUMERATION_CAP {
        return Err(Error::config(format!(
            "enumeration is limited to a·b·c ≤ {ENUMERATION_CAP}"
        )));
    }
    let start: Vec<u64> = (0..hex.c).collect();
    let mut out = Vec::new();
    let mut stack = vec![start];
    extend(hex, &mut stack, &mut out);
    Ok(out)
}

fn extend(hex: Hexagon, stack: &mut Vec<Vec<u64>>, out: &mut Vec<Tiling>) {
    let x = stack.len() as u64 - 1;
    let width = hex.a + hex.b;
    if x == width {
        out.push(Tiling {
            heights: stack.clone(),
        });
        return;
    }
    let cur = stack.last().unwrap().clone();
    let c = cur.len();
    for mask in 0u32..(1 << c) {
        let next: Vec<u64> = (0..c)
            .map(|i| cur[i] + u64::from(mask >> i & 1))
            .collect();
        let ok = (0..c).all(|i| {
            let rises = next[i] - i as u64;
            let left = width - x - 1;
            rises <= hex.b && hex.b - rises <= left && (i == 0 || next[i] > next[i - 1])
        });
        if ok {
            stack.push(next);
            extend(hex, stack, out);
            stack.pop();
        }
    }
}

/// Exact probability of each hole configuration on line m under the
/// uniform measure on tilings.
pub fn enumerated_hole_law(hex: Hexagon, m: u64) -> Result<Vec<(Vec<u64>, Rational)>> {
    let tilings = enumerate_tilings(hex)?;
    let total = tilings.len();
    let mut counts: std::collections::BTreeMap<Vec<u64>, usize> = Default::default();
    for t in &tilings {
        *counts.entry(t.holes(hex, m)).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(k, v)| (k, Rational::from((v, total))))
        .collect())
}

/// The Hahn weight of the holes as an exact integer:
/// (n+a_m)!(γ−n+b_m)!/(n!(γ−n)!) divided by a_m! b_m!.
pub fn hole_weight_exact(a_m: u64, b_m: u64, gamma: u64, n: u64) -> Integer {
    let binom = |top: u64, k: u64| Integer::from(Integer::binomial_u(top as u32, k as u32));
    binom(n + a_m, n) * binom(gamma - n + b_m, gamma - n)
}

/// The hole law of the Hahn ensemble on {0..γ}, as exact rationals, for
/// every L-subset.
pub fn hahn_hole_law(a_m: u64, b_m: u64, gamma: u64, l: u64) -> Vec<(Vec<u64>, Rational)> {
    let mut configs = Vec::new();
    subsets(gamma + 1, l, &mut Vec::new(), 0, &mut configs);
    let weights: Vec<Integer> = configs
        .iter()
        .map(|s| {
            let mut w = Integer::from(1);
            for (i, &x) in s.iter().enumerate() {
                w *= hole_weight_exact(a_m, b_m, gamma, x);
                for &y in &s[..i] {
                    w *= Integer::from(x - y).square();
                }
            }
            w
        })
        .collect();
    let z: Integer = weights.iter().sum();
    configs
        .into_iter()
        .zip(weights)
        .map(|(s, w)| (s, Rational::from((w, z.clone()))))
        .collect()
}

fn subsets(n: u64, k: u64, cur: &mut Vec<u64>, from: u64, out: &mut Vec<Vec<u64>>) {
    if cur.len() as u64 == k {
        out.push(cur.clone());
        return;
    }
    for x in from..n {
        cur.push(x);
        subsets(n, k, cur, x + 1, out);
        cur.pop();
    }
}

/// The particle and hole ensembles on one vertical line.
#[derive(Clone, Debug)]
pub struct ColumnEnsemble {
    pub hex: Hexagon,
    pub m: u64,
    pub a_m: u64,
    pub b_m: u64,
    pub gamma: u64,
    pub holes: u64,
    /// Associated Hahn weights (a_m+1, b_m+1) on γ+1 nodes.
    pub particle_weights: LogWeights,
    /// Hahn weights (a_m+1, b_m+1) on γ+1 nodes.
    pub hole_weights: LogWeights,
}

impl ColumnEnsemble {
    pub fn nodes(&self) -> usize {
        self.gamma as usize + 1
    }

    pub fn hole_spec(&self) -> WeightSpec {
        WeightSpec::Hahn {
            alpha: self.a_m as f64 + 1.0,
            beta: self.b_m as f64 + 1.0,
        }
    }

    pub fn particle_spec(&self) -> WeightSpec {
        WeightSpec::AssociatedHahn {
            alpha: self.a_m as f64 + 1.0,
            beta: self.b_m as f64 + 1.0,
        }
    }

    /// Fraction of the line occupied by holes.
    pub fn hole_ratio(&self) -> Result<Fraction> {
        Fraction::new(self.holes, self.gamma + 1)
    }
}

pub fn column_ensemble(hex: Hexagon, m: u64) -> Result<ColumnEnsemble> {
    if m == 0 || m > hex.columns() {
        return Err(Error::config(format!(
            "column {m} outside 1..={}",
            hex.columns()
        )));
    }
    let (a_m, b_m) = (hex.a.abs_diff(m), hex.b.abs_diff(m));
    let gamma = hex.gamma(m);
    let grid = NodeSet::unit(gamma as usize + 1);
    let mut col = ColumnEnsemble {
        hex,
        m,
        a_m,
        b_m,
        gamma,
        holes: hex.holes(m),
        particle_weights: LogWeights::new(grid.clone(), vec![0.0; gamma as usize + 1])?,
        hole_weights: LogWeights::new(grid.clone(), vec![0.0; gamma as usize + 1])?,
    };
    col.particle_weights = log_weight(&col.particle_spec(), &grid)?;
    col.hole_weights = log_weight(&col.hole_spec(), &grid)?;
    Ok(col)
}

fn kernel_for(w: &LogWeights, k: usize) -> Result<KernelMatrix> {
    let n = w.len();
    let basis = build_basis_ladder(w, n - 1, DEFAULT_BITS)?;
    cd_kernel(&basis, k)
}

/// Kernel of the hole ensemble (rank L_m).
pub fn hole_kernel(col: &ColumnEnsemble) -> Result<KernelMatrix> {
    kernel_for(&col.hole_weights, col.holes as usize)
}

/// Kernel of the particle ensemble (rank c).
pub fn particle_kernel(col: &ColumnEnsemble) -> Result<KernelMatrix> {
    kernel_for(&col.particle_weights, col.hex.c as usize)
}

/// Probability that a hole sits at each position 0..γ_m.
pub fn one_point_profile(col: &ColumnEnsemble) -> Result<Vec<f64>> {
    let k = hole_kernel(col)?;
    Ok((0..col.nodes()).map(|i| k.diag(i)).collect())
}

pub fn particle_profile(col: &ColumnEnsemble) -> Result<Vec<f64>> {
    let k = particle_kernel(col)?;
    Ok((0..col.nodes()).map(|i| k.diag(i)).collect())
}

/// The ellipse tangent to all six sides of the hexagon with sides
/// (α, β, γ), in the path coordinates above scaled by 1/n.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InscribedEllipse {
    pub center: (f64, f64),
    /// Inverse of the quadratic form: the ellipse is {p : pᵀ S⁻¹ p ≤ 1}.
    pub s: [[f64; 2]; 2],
}

impl InscribedEllipse {
    /// The support function of the ellipse along a normal n is
    /// (nᵀ S n)^{1/2}, which must equal the distance to each side pair.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        let s11 = (0.5 * (alpha + beta)).powi(2);
        let s22 = (0.5 * (beta + gamma)).powi(2);
        let s12 = 0.5 * (s11 + s22 - (0.5 * (alpha + gamma)).powi(2));
        InscribedEllipse {
            center: (0.5 * (alpha + beta), 0.5 * (beta + gamma)),
            s: [[s11, s12], [s12, s22]],
        }
    }

    /// Lower and upper intersection with the vertical line x = tau.
    pub fn at(&self, tau: f64) -> Option<(f64, f64)> {
        let [[a, b], [_, d]] = self.s;
        let det = a * d - b * b;
        // M = S⁻¹ = [[d, −b], [−b, a]]/det
        let (m11, m12, m22) = (d / det, -b / det, a / det);
        let dx = tau - self.center.0;
        // m22 dy² + 2 m12 dx dy + m11 dx² − 1 = 0
        let disc = (m12 * dx).powi(2) - m22 * (m11 * dx * dx - 1.0);
        if disc < -1e-12 {
            return None;
        }
        let r = disc.max(0.0).sqrt();
        let y0 = self.center.1;
        Some((y0 + (-m12 * dx - r) / m22, y0 + (-m12 * dx + r) / m22))
    }
}

/// Largest distance between vertices of the hexagon in the plane.
pub fn hexagon_diameter(alpha: f64, beta: f64, gamma: f64) -> f64 {
    let v = [
        (0.0, 0.0),
        (alpha, 0.0),
        (alpha + beta, beta),
        (alpha + beta, beta + gamma),
        (beta, beta + gamma),
        (0.0, gamma),
    ];
    // shear the path coordinates back to a hexagon with 120° angles
    let p: Vec<(f64, f64)> = v
        .iter()
        .map(|&(x, y)| (x * 3f64.sqrt() / 2.0, y - x / 2.0))
        .collect();
    let mut d: f64 = 0.0;
    for a in &p {
        for b in &p {
            d = d.max(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt());
        }
    }
    d
}

#[derive(Clone, Debug, Serialize)]
pub struct FrozenBoundary {
    pub tau: f64,
    pub m: u64,
    pub n_scale: u64,
    /// Band edges in hexagon coordinates y/n.
    pub band: (f64, f64),
    /// The same edges as fractions of the line, in (0, 1).
    pub band_unit: (f64, f64),
    pub ellipse: Option<(f64, f64)>,
    /// max deviation from the ellipse over the two edges, divided by the
    /// hexagon diameter.
    pub relative_deviation: f64,
    pub kinds: Vec<SegmentKind>,
}

/// Band of the hole equilibrium measure on line m = τn of the hexagon
/// (αn, βn, γn).
pub fn frozen_boundary(
    alpha: f64,
    beta: f64,
    gamma: f64,
    tau: f64,
    n_scale: u64,
    grid: usize,
) -> Result<FrozenBoundary> {
    let scale = |v: f64| -> Result<u64> {
        let s = v * n_scale as f64;
        if (s - s.round()).abs() > 1e-9 || s.round() < 1.0 {
            return Err(Error::config(format!("{v}·{n_scale} is not a positive integer")));
        }
        Ok(s.round() as u64)
    };
    let hex = Hexagon::new(scale(alpha)?, scale(beta)?, scale(gamma)?)?;
    let m = scale(tau)?;
    let col = column_ensemble(hex, m)?;
    let n = col.nodes();
    let phi = field(col.hole_spec().potential(n), &NodeDensity::unit());
    let eqm = solve(&phi, col.hole_ratio()?, grid)?;
    let cls = classify_intervals(&eqm, DEFAULT_EPS_REL);
    let band = cls
        .of_kind(SegmentKind::Band)
        .next()
        .ok_or_else(|| Error::numeric("no band on this line"))?;
    let ns = n_scale as f64;
    // lattice height y stands for the unit segment [y, y+1] of the line
    let to_hex = |u: f64| (u * n as f64 + hex.floor(m) as f64) / ns;
    let edges = (to_hex(band.left), to_hex(band.right));
    let ellipse = InscribedEllipse::new(alpha, beta, gamma).at(m as f64 / ns);
    let diam = hexagon_diameter(alpha, beta, gamma);
    let relative_deviation = match ellipse {
        Some((lo, hi)) => (edges.0 - lo).abs().max((edges.1 - hi).abs()) / diam,
        None => f64::INFINITY,
    };
    Ok(FrozenBoundary {
        tau,
        m,
        n_scale,
        band: edges,
        band_unit: (band.left, band.right),
        ellipse,
        relative_deviation,
        kinds: cls.segments.iter().map(|s| s.kind).collect(),
    })
}
