//! Structural checks of the local asymptotics of π_{N,k} in bands,
//! saturated regions and at hard edges. Unknown amplitude functions are
//! never evaluated; they enter as fitted constants or bounded profiles.

use std::f64::consts::PI;

use serde::Serialize;

use crate::equilibrium::{classify_intervals, EquilibriumMeasure, Segment, SegmentKind, DEFAULT_EPS_REL};
use crate::error::{Error, Result};
use crate::mp::ln_gamma;
use crate::orthopoly::{build_basis, classify_zeros, locate_zeros, OrthoBasis, ZeroSet, BAND_TRIM, MAX_BITS};
use rug::Float;

/// Width of the hard-edge window in units of N^{−2/3}.
pub const HARD_EDGE_C: f64 = 1.0;
/// Allowed mismatch between oscillation counts and their prediction.
pub const COUNT_SLACK: f64 = 2.0;

/// log|r(x)| and sign of r(x) = π_k(x)·exp(−k∫log|x−y|dμ(y)).
pub fn log_envelope_ratio(
    basis: &OrthoBasis,
    k: usize,
    eqm: &EquilibriumMeasure,
    x: f64,
) -> Result<(f64, i8)> {
    let (lp, s) = basis.evaluate_log(k, x, true)?;
    let env = eqm.log_transform(k, num_complex::Complex64::new(x, 0.0));
    Ok((lp - env, s))
}

fn ratio(basis: &OrthoBasis, k: usize, eqm: &EquilibriumMeasure, x: f64) -> Result<f64> {
    let (l, s) = log_envelope_ratio(basis, k, eqm, x)?;
    Ok(s as f64 * l.exp())
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeReport {
    pub window: (f64, f64),
    /// (x, r(x)).
    pub samples: Vec<(f64, f64)>,
    pub max_abs: f64,
    pub sign_changes: usize,
    /// k·μ(window), the number of half-periods of the cosine factor.
    pub predicted_oscillations: f64,
    pub zero_count: usize,
    pub findings: Vec<String>,
}

/// Samples the envelope ratio over `window` inside a band.
pub fn band_check_window(
    basis: &OrthoBasis,
    k: usize,
    eqm: &EquilibriumMeasure,
    window: (f64, f64),
    n_samples: usize,
) -> Result<EnvelopeReport> {
    let (lo, hi) = window;
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let x = lo + (hi - lo) * (i as f64 + 0.5) / n_samples as f64;
        samples.push((x, ratio(basis, k, eqm, x)?));
    }
    let max_abs = samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max);
    let sign_changes = samples
        .windows(2)
        .filter(|w| (w[0].1 < 0.0) != (w[1].1 < 0.0))
        .count();
    let predicted = k as f64 * (eqm.cdf(hi) - eqm.cdf(lo));
    let zs = locate_zeros(basis, k)?;
    let zero_count = zs.zeros().iter().filter(|&&z| z >= lo && z <= hi).count();
    let mut findings = Vec::new();
    if !max_abs.is_finite() {
        findings.push("envelope ratio is not finite".into());
    }
    if (sign_changes as f64 - predicted).abs() > COUNT_SLACK {
        findings.push(format!(
            "{sign_changes} sign changes against {predicted:.2} predicted"
        ));
    }
    if sign_changes.abs_diff(zero_count) > COUNT_SLACK as usize {
        findings.push(format!("{sign_changes} sign changes but {zero_count} zeros"));
    }
    Ok(EnvelopeReport {
        window,
        samples,
        max_abs,
        sign_changes,
        predicted_oscillations: predicted,
        zero_count,
        findings,
    })
}

/// The middle 60% of a band.
pub fn band_check(
    basis: &OrthoBasis,
    k: usize,
    eqm: &EquilibriumMeasure,
    band: &Segment,
    n_samples: usize,
) -> Result<EnvelopeReport> {
    if band.kind != SegmentKind::Band {
        return Err(Error::precondition("band_check needs a band"));
    }
    band_check_window(basis, k, eqm, band.interior(0.2), n_samples)
}

#[derive(Clone, Debug, Serialize)]
pub struct SaturatedReport {
    pub window: (f64, f64),
    /// max_j |cos(πN∫_{x_j}^b ρ⁰)| over all nodes.
    pub cosine_at_nodes: f64,
    pub nodes_in_window: usize,
    /// Nodes in the window with no zero within half the node spacing.
    pub nodes_without_zero: Vec<usize>,
    /// Largest |zero − node| over zeros attracted to window nodes.
    pub max_zero_offset: f64,
    pub dislocations: usize,
    pub spurious: usize,
    /// (x, log|r(x)|) at internode midpoints.
    pub midpoint_envelope: Vec<(f64, f64)>,
    /// Largest change of log|r| between neighbouring midpoints.
    pub midpoint_log_step: f64,
    pub findings: Vec<String>,
}

/// max_j |cos(πN∫_{x_j}^b ρ⁰)|; the quantization rule puts every node at
/// an odd multiple of π/2.
pub fn cosine_at_nodes(eqm: &EquilibriumMeasure, nodes: &[f64]) -> f64 {
    let n = nodes.len() as f64;
    let d = eqm.density();
    nodes
        .iter()
        .map(|&x| (PI * n * (1.0 - d.cdf(x))).cos().abs())
        .fold(0.0, f64::max)
}

pub fn saturated_check(
    basis: &OrthoBasis,
    k: usize,
    eqm: &EquilibriumMeasure,
    segment: usize,
) -> Result<SaturatedReport> {
    let cls = classify_intervals(eqm, DEFAULT_EPS_REL);
    let seg = cls
        .segments
        .get(segment)
        .ok_or_else(|| Error::precondition(format!("no segment {segment}")))?;
    if seg.kind != SegmentKind::Saturated {
        return Err(Error::precondition("saturated_check needs a saturated region"));
    }
    let (lo, hi) = cls.compact_window(segment, BAND_TRIM);
    let nodes = basis.nodes();
    let zs: ZeroSet = locate_zeros(basis, k)?;
    let zeros = zs.zeros();
    let idx: Vec<usize> = (0..nodes.len())
        .filter(|&j| nodes[j] >= lo && nodes[j] <= hi)
        .collect();
    let spacing = |j: usize| {
        let l = if j > 0 { nodes[j] - nodes[j - 1] } else { f64::INFINITY };
        let r = if j + 1 < nodes.len() { nodes[j + 1] - nodes[j] } else { f64::INFINITY };
        l.min(r)
    };
    let mut without = Vec::new();
    let mut max_off: f64 = 0.0;
    for &j in &idx {
        let d = zeros
            .iter()
            .map(|z| (z - nodes[j]).abs())
            .fold(f64::INFINITY, f64::min);
        if d > 0.5 * spacing(j) {
            without.push(j);
        }
    }
    for (z, &j) in zs.nearest.iter().enumerate() {
        if idx.contains(&j) && zs.offsets[z].abs() <= 0.5 * spacing(j) {
            max_off = max_off.max(zs.offsets[z].abs());
        }
    }
    let zc = classify_zeros(&zs, nodes, &cls);
    let region = &zc.regions[segment];
    let mut midpoint_envelope = Vec::new();
    for w in idx.windows(2) {
        let x = 0.5 * (nodes[w[0]] + nodes[w[1]]);
        midpoint_envelope.push((x, log_envelope_ratio(basis, k, eqm, x)?.0));
    }
    let step = midpoint_envelope
        .windows(2)
        .map(|w| (w[1].1 - w[0].1).abs())
        .fold(0.0, f64::max);
    let cos = cosine_at_nodes(eqm, nodes);
    let mut findings = zc.findings.clone();
    if without.len() > 1 {
        findings.push(format!("{} nodes without a nearby zero", without.len()));
    }
    if cos > 1e-12 {
        findings.push(format!("cosine at nodes {cos:e}"));
    }
    Ok(SaturatedReport {
        window: (lo, hi),
        cosine_at_nodes: cos,
        nodes_in_window: idx.len(),
        nodes_without_zero: without,
        max_zero_offset: max_off,
        dislocations: region.dislocations.len(),
        spurious: region.spurious.len(),
        midpoint_envelope,
        midpoint_log_step: step,
        findings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Endpoint {
    Left,
    Right,
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeSample {
    pub zeta: f64,
    /// Envelope-normalized polynomial, divided by 2cos(·) inside.
    pub value: f64,
    pub gamma_factor: f64,
    /// |value/(C·gamma_factor) − 1| with the fitted C of its side.
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HardEdgeReport {
    pub endpoint: Endpoint,
    pub n: usize,
    /// Half-width of the ζ window, Cρ⁰N^{1/3}.
    pub zeta_window: f64,
    pub inside: Vec<EdgeSample>,
    pub outside: Vec<EdgeSample>,
    pub fit_inside: f64,
    pub fit_outside: f64,
    /// |C_in/C_out − 1|: continuity of the fitted curve across ζ = 0.
    pub edge_mismatch: f64,
    pub max_deviation: f64,
    /// Extreme zero minus extreme node (negative at b, positive at a).
    pub extreme_zero_offset: f64,
    pub findings: Vec<String>,
}

/// Γ(1/2−ζ)/(√(2π)e^ζ(−ζ)^{−ζ}) for ζ < 0.
pub fn gamma_factor_inside(zeta: f64) -> f64 {
    let lg = ln_gamma(0.5 - zeta) - 0.5 * (2.0 * PI).ln() - zeta + zeta * (-zeta).ln();
    lg.exp()
}

/// √(2π)e^{−ζ}ζ^ζ/Γ(1/2+ζ) for ζ > 0.
pub fn gamma_factor_outside(zeta: f64) -> f64 {
    let lg = 0.5 * (2.0 * PI).ln() - zeta + zeta * zeta.ln() - ln_gamma(0.5 + zeta);
    lg.exp()
}

fn fit(values: &[(f64, f64)]) -> f64 {
    let num: f64 = values.iter().map(|(v, g)| v * g).sum();
    let den: f64 = values.iter().map(|(_, g)| g * g).sum();
    num / den
}

/// Compares π_k near a saturated endpoint with the Gamma-function factors
/// on ζ ∈ [−1, 1], sampled at `per_side` points on each side.
pub fn hard_edge_check(
    basis: &OrthoBasis,
    k: usize,
    eqm: &EquilibriumMeasure,
    endpoint: Endpoint,
    per_side: usize,
) -> Result<HardEdgeReport> {
    let cls = classify_intervals(eqm, DEFAULT_EPS_REL);
    let seg = match endpoint {
        Endpoint::Left => cls.segments.first(),
        Endpoint::Right => cls.segments.last(),
    };
    if seg.map(|s| s.kind) != Some(SegmentKind::Saturated) {
        return Err(Error::precondition("the endpoint is not saturated"));
    }
    let d = eqm.density();
    let nodes = basis.nodes();
    let n = nodes.len();
    let (e, orient) = match endpoint {
        Endpoint::Left => (d.a(), -1.0),
        Endpoint::Right => (d.b(), 1.0),
    };
    let rho = d.rho(e);
    let scale = n as f64 * rho;
    let zeta_window = HARD_EDGE_C * rho * (n as f64).powf(1.0 / 3.0);
    let node_zetas: Vec<f64> = nodes.iter().map(|&x| orient * scale * (x - e)).collect();
    let near_node = |z: f64| node_zetas.iter().any(|&t| (t - z).abs() < 0.05);
    let zmax = zeta_window.min(1.0);
    let mut inside_raw = Vec::new();
    let mut outside_raw = Vec::new();
    for i in 0..per_side {
        let t = zmax * (i as f64 + 0.5) / per_side as f64;
        for zeta in [-t, t] {
            if near_node(zeta) || zeta.abs() < 0.02 {
                continue;
            }
            let x = e + orient * zeta / scale;
            let r = ratio(basis, k, eqm, x)?;
            if zeta < 0.0 {
                let mass = match endpoint {
                    Endpoint::Right => 1.0 - d.cdf(x),
                    Endpoint::Left => d.cdf(x),
                };
                let cos = 2.0 * (PI * n as f64 * mass).cos();
                inside_raw.push((zeta, r / cos, gamma_factor_inside(zeta)));
            } else {
                outside_raw.push((zeta, r, gamma_factor_outside(zeta)));
            }
        }
    }
    inside_raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    outside_raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let summarize = |raw: &[(f64, f64, f64)]| -> (f64, Vec<EdgeSample>) {
        let c = fit(&raw.iter().map(|s| (s.1, s.2)).collect::<Vec<_>>());
        let out = raw
            .iter()
            .map(|&(zeta, value, g)| EdgeSample {
                zeta,
                value,
                gamma_factor: g,
                deviation: (value / (c * g) - 1.0).abs(),
            })
            .collect();
        (c, out)
    };
    let (c_in, inside) = summarize(&inside_raw);
    let (c_out, outside) = summarize(&outside_raw);
    let max_deviation = inside
        .iter()
        .chain(&outside)
        .map(|s| s.deviation)
        .fold(0.0, f64::max);
    let (extreme_zero_offset, _) = extreme_zero_offset(basis, k, endpoint)?;
    let mut findings = Vec::new();
    let strictly_inside = orient * extreme_zero_offset < 0.0;
    if !strictly_inside {
        findings.push("extreme zero is not strictly inside the last node".into());
    }
    if zeta_window < 1.0 {
        findings.push(format!("ζ window {zeta_window:.3} is narrower than 1"));
    }
    Ok(HardEdgeReport {
        endpoint,
        n,
        zeta_window,
        inside,
        outside,
        fit_inside: c_in,
        fit_outside: c_out,
        edge_mismatch: (c_in / c_out - 1.0).abs(),
        max_deviation,
        extreme_zero_offset,
        findings,
    })
}

/// Extreme zero minus extreme node, with the working precision doubled
/// (up to `MAX_BITS`) until the sign is resolved; returns the bits used.
pub fn extreme_zero_offset(basis: &OrthoBasis, k: usize, endpoint: Endpoint) -> Result<(f64, u32)> {
    let mut owned: Option<OrthoBasis> = None;
    loop {
        let b = owned.as_ref().unwrap_or(basis);
        let n = b.n();
        let zs = locate_zeros(b, k)?;
        let (z, x, orient) = match endpoint {
            Endpoint::Right => (zs.zeros_mp().last(), &b.nodes_mp()[n - 1], 1.0),
            Endpoint::Left => (zs.zeros_mp().first(), &b.nodes_mp()[0], -1.0),
        };
        let z = z.ok_or_else(|| Error::precondition("degree 0 has no zeros"))?;
        let off = Float::with_val(b.bits(), z - x).to_f64();
        if orient * off < 0.0 || b.bits() >= MAX_BITS {
            return Ok((off, b.bits()));
        }
        owned = Some(build_basis(b.logw(), b.kmax(), 2 * b.bits())?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{field, solve};
    use crate::nodes::{NodeDensity, NodeSet};
    use crate::orthopoly::build_basis_ladder;
    use crate::weights::{log_weight, LogWeights, WeightSpec};

    #[test]
    fn gamma_factors_meet_at_zero() {
        let inner = gamma_factor_inside(-1e-12);
        let outer = gamma_factor_outside(1e-12);
        assert!((inner - 0.5f64.sqrt()).abs() < 1e-9);
        assert!((outer - 2f64.sqrt()).abs() < 1e-9);
    }

    fn setup(n: usize, shift: f64) -> (OrthoBasis, EquilibriumMeasure) {
        let spec = WeightSpec::krawtchouk(0.9);
        let lw = log_weight(&spec, &NodeSet::unit(n)).unwrap();
        let shifted: Vec<f64> = lw.logw().iter().map(|w| w + shift).collect();
        let lw = LogWeights::new(lw.nodeset().clone(), shifted).unwrap();
        let basis = build_basis_ladder(&lw, n / 2, 128).unwrap();
        let phi = field(spec.potential(n), &NodeDensity::unit());
        let eqm = solve(&phi, crate::Fraction::new(1, 2).unwrap(), 400).unwrap();
        (basis, eqm)
    }

    #[test]
    fn envelope_ratio_ignores_weight_scale() {
        let n = 40;
        let (a, eqm) = setup(n, 0.0);
        let (b, _) = setup(n, n as f64);
        for x in [0.1, 0.37, 0.52, 0.8, 1.2] {
            let (la, sa) = log_envelope_ratio(&a, n / 2, &eqm, x).unwrap();
            let (lb, sb) = log_envelope_ratio(&b, n / 2, &eqm, x).unwrap();
            assert_eq!(sa, sb);
            assert!((la - lb).abs() < 1e-10, "{la} {lb}");
        }
    }

    #[test]
    fn checks_reject_wrong_regions() {
        let (basis, eqm) = setup(40, 0.0);
        let cls = classify_intervals(&eqm, DEFAULT_EPS_REL);
        let void = cls.segments.iter().position(|s| s.kind == SegmentKind::Void).unwrap();
        assert!(saturated_check(&basis, 20, &eqm, void).is_err());
        assert!(band_check(&basis, 20, &eqm, &cls.segments[void], 100).is_err());
        assert!(hard_edge_check(&basis, 20, &eqm, Endpoint::Left, 10).is_err());
    }

    #[test]
    fn sign_changes_track_zeros() {
        let (basis, eqm) = setup(60, 0.0);
        let cls = classify_intervals(&eqm, DEFAULT_EPS_REL);
        let band = cls.of_kind(SegmentKind::Band).next().unwrap();
        let r = band_check(&basis, 30, &eqm, band, 1500).unwrap();
        assert!(r.findings.is_empty(), "{:?}", r.findings);
        assert!(r.sign_changes.abs_diff(r.zero_count) <= 2);
    }
}
