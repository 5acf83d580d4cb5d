use dopkit::equilibrium::{classify_intervals, field, solve, SegmentKind, DEFAULT_EPS_REL};
use dopkit::nodes::NodeDensity;
use dopkit::weights::WeightSpec;
use dopkit::Fraction;

fn edges(spec: &WeightSpec, n: usize, c: Fraction, m: usize) -> (f64, Vec<(SegmentKind, f64)>) {
    let phi = field(spec.potential(n), &NodeDensity::unit());
    let eqm = solve(&phi, c, m).unwrap();
    assert!(eqm.feasibility_error() < 1e-10);
    let cls = classify_intervals(&eqm, DEFAULT_EPS_REL);
    (eqm.ell, cls.segments.iter().map(|s| (s.kind, s.right)).collect())
}

#[test]
fn doubling_the_grid_moves_nothing_by_more_than_two_cells() {
    let cases = [
        (WeightSpec::krawtchouk(0.9), 200, Fraction::new(1, 2).unwrap()),
        (WeightSpec::krawtchouk(0.5), 100, Fraction::new(1, 10).unwrap()),
        (WeightSpec::Hahn { alpha: 2.0, beta: 5.0 }, 120, Fraction::new(1, 3).unwrap()),
    ];
    for (spec, n, c) in cases {
        let (l1, s1) = edges(&spec, n, c, 1000);
        let (l2, s2) = edges(&spec, n, c, 2000);
        assert!((l1 - l2).abs() < 1e-4, "{spec:?}: ell {l1} vs {l2}");
        let k1: Vec<_> = s1.iter().map(|s| s.0).collect();
        let k2: Vec<_> = s2.iter().map(|s| s.0).collect();
        assert_eq!(k1, k2, "{spec:?}");
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a.1 - b.1).abs() <= 2.0 / 1000.0, "{spec:?}: edge {} vs {}", a.1, b.1);
        }
    }
}

#[test]
fn band_moves_with_the_filling_fraction() {
    let spec = WeightSpec::krawtchouk(0.5);
    let mut prev = 0.0;
    for j in 1..5u64 {
        let (_, segs) = edges(&spec, 120, Fraction::new(j, 10).unwrap(), 1000);
        let kinds: Vec<_> = segs.iter().map(|s| s.0).collect();
        assert_eq!(kinds, [SegmentKind::Void, SegmentKind::Band, SegmentKind::Void]);
        // the band widens symmetrically about 1/2 as c grows
        let half = segs[1].1 - 0.5;
        let closed = (j as f64 / 10.0 * (1.0 - j as f64 / 10.0)).sqrt();
        assert!((half - closed).abs() < 0.01, "c={j}/10: {half} vs {closed}");
        assert!(half > prev);
        prev = half;
    }
}
