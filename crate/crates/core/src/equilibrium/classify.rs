use serde::Serialize;

use super::EquilibriumMeasure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SegmentKind {
    Void,
    Band,
    Saturated,
}

#[derive(Clone, Debug, Serialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub left: f64,
    pub right: f64,
    /// First and last grid cell of the segment.
    pub cells: (usize, usize),
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.right - self.left
    }

    pub fn is_empty(&self) -> bool {
        self.right <= self.left
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.left && x < self.right
    }

    /// The middle part of the segment, leaving `fraction` of its length
    /// out at each end.
    pub fn interior(&self, fraction: f64) -> (f64, f64) {
        let d = fraction * self.len();
        (self.left + d, self.right - d)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IntervalClassification {
    pub segments: Vec<Segment>,
    /// Findings that contradict the genericity assumptions: a band
    /// reaching an endpoint, or two bands touching.
    pub assumption_violations: Vec<String>,
}

impl IntervalClassification {
    /// At least one void and at least one saturated region.
    pub fn is_case_one(&self) -> bool {
        let has = |k| self.segments.iter().any(|s| s.kind == k);
        has(SegmentKind::Void) && has(SegmentKind::Saturated)
    }

    pub fn of_kind(&self, kind: SegmentKind) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| s.kind == kind)
    }

    /// Segment i with `trim` of its length removed at each end that
    /// borders a band; ends at a or b are kept.
    pub fn compact_window(&self, i: usize, trim: f64) -> (f64, f64) {
        let s = &self.segments[i];
        let d = trim * s.len();
        let band = |j: Option<usize>| {
            j.and_then(|j| self.segments.get(j))
                .is_some_and(|t| t.kind == SegmentKind::Band)
        };
        let lo = if band(i.checked_sub(1)) { s.left + d } else { s.left };
        let hi = if band(Some(i + 1)) { s.right - d } else { s.right };
        (lo, hi)
    }

    pub fn kind_at(&self, x: f64) -> Option<SegmentKind> {
        self.segments
            .iter()
            .find(|s| x >= s.left && x <= s.right)
            .map(|s| s.kind)
    }
}

const MIN_RUN: usize = 3;

pub fn classify_intervals(eqm: &EquilibriumMeasure, eps_rel: f64) -> IntervalClassification {
    let m = eqm.m();
    let labels: Vec<SegmentKind> = (0..m)
        .map(|i| {
            let (v, u) = (eqm.mass[i], eqm.cap[i]);
            if v < eps_rel * u {
                SegmentKind::Void
            } else if u - v < eps_rel * u {
                SegmentKind::Saturated
            } else {
                SegmentKind::Band
            }
        })
        .collect();
    let mut runs: Vec<(SegmentKind, usize, usize)> = Vec::new();
    for (i, &k) in labels.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if r.0 == k => r.2 = i,
            _ => runs.push((k, i, i)),
        }
    }
    let mut violations = Vec::new();
    loop {
        let short = runs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.2 + 1 - r.1 < MIN_RUN)
            .min_by_key(|(_, r)| r.2 + 1 - r.1)
            .map(|(i, _)| i);
        let Some(i) = short else { break };
        if runs.len() == 1 {
            break;
        }
        if i > 0
            && i + 1 < runs.len()
            && runs[i - 1].0 == SegmentKind::Band
            && runs[i + 1].0 == SegmentKind::Band
            && runs[i].0 != SegmentKind::Band
        {
            violations.push(format!(
                "two bands touch near x = {:.6}",
                eqm.grid[(runs[i].1 + runs[i].2) / 2]
            ));
        }
        let (_, s, e) = runs.remove(i);
        if i > 0 {
            runs[i - 1].2 = e;
        } else {
            runs[0].1 = s;
        }
        let mut merged: Vec<(SegmentKind, usize, usize)> = Vec::new();
        for r in runs.drain(..) {
            match merged.last_mut() {
                Some(last) if last.0 == r.0 => last.2 = r.2,
                _ => merged.push(r),
            }
        }
        runs = merged;
    }

    let edge_between = |left: &(SegmentKind, usize, usize), right: &(SegmentKind, usize, usize)| {
        let raw = eqm.edges[left.2 + 1];
        let (band_cells, target): (Option<(usize, usize)>, SegmentKind) = match (left.0, right.0) {
            (SegmentKind::Band, other) if left.2 > left.1 => {
                (Some((left.2, left.2 - 1)), other)
            }
            (other, SegmentKind::Band) if right.2 > right.1 => {
                (Some((right.1, right.1 + 1)), other)
            }
            _ => (None, SegmentKind::Band),
        };
        let Some((c1, c2)) = band_cells else { return raw };
        let f = |i: usize| {
            let h = eqm.edges[i + 1] - eqm.edges[i];
            let psi = eqm.mass[i] / h;
            let cap = eqm.cap[i] / h;
            match target {
                SegmentKind::Void => psi * psi,
                _ => (cap - psi) * (cap - psi),
            }
        };
        let (x1, x2) = (eqm.grid[c1], eqm.grid[c2]);
        let (f1, f2) = (f(c1), f(c2));
        if f2 == f1 {
            return raw;
        }
        let x0 = x1 - f1 * (x2 - x1) / (f2 - f1);
        let lo = eqm.edges[left.2];
        let hi = eqm.edges[(left.2 + 2).min(m)];
        if x0.is_finite() {
            x0.clamp(lo, hi)
        } else {
            raw
        }
    };

    let mut segments = Vec::with_capacity(runs.len());
    for (i, r) in runs.iter().enumerate() {
        let left = if i == 0 {
            eqm.edges[0]
        } else {
            edge_between(&runs[i - 1], r)
        };
        let right = if i + 1 == runs.len() {
            eqm.edges[m]
        } else {
            edge_between(r, &runs[i + 1])
        };
        segments.push(Segment {
            kind: r.0,
            left,
            right,
            cells: (r.1, r.2),
        });
    }
    if let Some(first) = segments.first() {
        if first.kind == SegmentKind::Band {
            violations.push("band reaches the left endpoint".into());
        }
    }
    if let Some(last) = segments.last() {
        if last.kind == SegmentKind::Band {
            violations.push("band reaches the right endpoint".into());
        }
    }
    IntervalClassification {
        segments,
        assumption_violations: violations,
    }
}

/// Slope of log(distance to the constraint) against log(distance to the
/// edge) over cells 5–60 away from the edge inside `band`; about 1/2 at a
/// square-root edge. `at_left` selects which end of the band is fitted.
pub fn edge_exponent(
    eqm: &EquilibriumMeasure,
    band: &Segment,
    neighbour: SegmentKind,
    at_left: bool,
) -> Option<f64> {
    let (first, last) = band.cells;
    let edge = if at_left { band.left } else { band.right };
    let mut pts = Vec::new();
    for off in 5..=60usize {
        let i = if at_left {
            first + off
        } else {
            last.checked_sub(off)?
        };
        if i < first || i > last {
            break;
        }
        let h = eqm.edges[i + 1] - eqm.edges[i];
        let psi = eqm.mass[i] / h;
        let cap = eqm.cap[i] / h;
        let y = match neighbour {
            SegmentKind::Void => psi,
            _ => cap - psi,
        };
        let d = (eqm.grid[i] - edge).abs();
        if y > 0.0 && d > 0.0 {
            pts.push((d.ln(), y.ln()));
        }
    }
    if pts.len() < 5 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
