//! Zeros of π_k against the void/band/saturated structure of the
//! equilibrium measure at c = k/N.

use serde::Serialize;

use super::ZeroSet;
use crate::equilibrium::{IntervalClassification, SegmentKind};

/// A zero counts as attracted to a node when it is within this fraction
/// of the local node spacing.
pub const HURWITZ_RADIUS: f64 = 0.25;
/// Fraction of a region cut off at each end that borders a band.
pub const BAND_TRIM: f64 = 0.2;

#[derive(Clone, Debug, Serialize)]
pub struct RegionZeros {
    pub kind: SegmentKind,
    /// The compact part of the region that was inspected.
    pub window: (f64, f64),
    /// First and last node index inside the window.
    pub node_range: Option<(usize, usize)>,
    /// (node index, zero − node) for each node with an attracted zero.
    pub hurwitz: Vec<(usize, f64)>,
    /// Zeros in the window not attracted to any node.
    pub spurious: Vec<f64>,
    /// Internode intervals [x_n, x_{n+1}] in the window, by n, with no
    /// attracted zero.
    pub dislocations: Vec<usize>,
    pub zero_count: usize,
}

impl RegionZeros {
    pub fn max_offset(&self) -> f64 {
        self.hurwitz.iter().map(|h| h.1.abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroClassification {
    pub k: usize,
    pub regions: Vec<RegionZeros>,
    /// Saturated regions with more than one dislocation or spurious zero.
    pub findings: Vec<String>,
}

impl ZeroClassification {
    pub fn saturated(&self) -> impl Iterator<Item = &RegionZeros> {
        self.regions.iter().filter(|r| r.kind == SegmentKind::Saturated)
    }

    pub fn voids(&self) -> impl Iterator<Item = &RegionZeros> {
        self.regions.iter().filter(|r| r.kind == SegmentKind::Void)
    }
}

pub fn classify_zeros(
    zs: &ZeroSet,
    nodes: &[f64],
    cls: &IntervalClassification,
) -> ZeroClassification {
    let zeros = zs.zeros();
    let n = nodes.len();
    let spacing = |j: usize| {
        let l = if j > 0 { nodes[j] - nodes[j - 1] } else { f64::INFINITY };
        let r = if j + 1 < n { nodes[j + 1] - nodes[j] } else { f64::INFINITY };
        l.min(r)
    };
    let mut regions = Vec::new();
    let mut findings = Vec::new();
    for (i, seg) in cls.segments.iter().enumerate() {
        let (lo, hi) = cls.compact_window(i, BAND_TRIM);
        let inside: Vec<usize> = (0..zeros.len())
            .filter(|&z| zeros[z] >= lo && zeros[z] <= hi)
            .collect();
        let first = nodes.partition_point(|&x| x < lo);
        let last = nodes.partition_point(|&x| x <= hi);
        let node_range = (first < last).then(|| (first, last - 1));

        let mut hurwitz = Vec::new();
        let mut spurious = Vec::new();
        if seg.kind == SegmentKind::Saturated {
            // one attracted zero per node: the closest one
            let mut best: Vec<Option<usize>> = vec![None; n];
            for &z in &inside {
                let j = zs.nearest[z];
                if zs.offsets[z].abs() <= HURWITZ_RADIUS * spacing(j) {
                    match best[j] {
                        Some(o) if zs.offsets[o].abs() <= zs.offsets[z].abs() => {}
                        _ => best[j] = Some(z),
                    }
                }
            }
            for &z in &inside {
                let j = zs.nearest[z];
                if best[j] == Some(z) && j >= first && j < last {
                    hurwitz.push((j, zs.offsets[z]));
                } else {
                    spurious.push(zeros[z]);
                }
            }
        }
        let mut dislocations = Vec::new();
        if let (SegmentKind::Saturated, Some((a, b))) = (seg.kind, node_range) {
            for m in a..b {
                let covered = hurwitz.iter().any(|&(j, off)| {
                    let z = nodes[j] + off;
                    z >= nodes[m] && z <= nodes[m + 1]
                });
                if !covered {
                    dislocations.push(m);
                }
            }
            if dislocations.len() > 1 {
                findings.push(format!(
                    "{} dislocations in the saturated region [{:.4}, {:.4}]",
                    dislocations.len(),
                    lo,
                    hi
                ));
            }
            if spurious.len() > 1 {
                findings.push(format!(
                    "{} spurious zeros in the saturated region [{:.4}, {:.4}]",
                    spurious.len(),
                    lo,
                    hi
                ));
            }
        }
        regions.push(RegionZeros {
            kind: seg.kind,
            window: (lo, hi),
            node_range,
            hurwitz,
            spurious,
            dislocations,
            zero_count: inside.len(),
        });
    }
    ZeroClassification {
        k: zs.k,
        regions,
        findings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{classify_intervals, field, solve};
    use crate::nodes::{NodeDensity, NodeSet};
    use crate::orthopoly::{build_basis_ladder, zeros};
    use crate::weights::{log_weight, WeightSpec};

    fn report(n: usize, k: usize, p: f64) -> (ZeroClassification, Vec<f64>, ZeroSet) {
        let spec = WeightSpec::krawtchouk(p);
        let lw = log_weight(&spec, &NodeSet::unit(n)).unwrap();
        let basis = build_basis_ladder(&lw, k, 128).unwrap();
        let zs = zeros(&basis, k).unwrap();
        let phi = field(spec.potential(n), &NodeDensity::unit());
        let eqm = solve(&phi, crate::Fraction::new(k as u64, n as u64).unwrap(), 600).unwrap();
        let cls = classify_intervals(&eqm, 1e-6);
        (classify_zeros(&zs, basis.nodes(), &cls), basis.nodes().to_vec(), zs)
    }

    #[test]
    fn saturated_zeros_hug_nodes_and_voids_are_empty() {
        let (r, nodes, zs) = report(60, 30, 0.9);
        assert!(r.findings.is_empty(), "{:?}", r.findings);
        let sat: Vec<_> = r.saturated().collect();
        assert_eq!(sat.len(), 1);
        assert!(sat[0].hurwitz.len() >= 5);
        assert!(sat[0].dislocations.len() <= 1 && sat[0].spurious.len() <= 1);
        for v in r.voids() {
            assert_eq!(v.zero_count, 0);
        }
        // saturated region at b: the last zero sits just left of the last node
        let z = zs.zeros();
        let last = *z.last().unwrap();
        assert!(last < nodes[59] && last > nodes[58]);
    }

    #[test]
    fn attraction_strengthens_with_n() {
        let (a, _, _) = report(60, 30, 0.9);
        let (b, _, _) = report(120, 60, 0.9);
        let ma = a.saturated().next().unwrap().max_offset();
        let mb = b.saturated().next().unwrap().max_offset();
        assert!(mb < ma, "{mb} vs {ma}");
    }
}
