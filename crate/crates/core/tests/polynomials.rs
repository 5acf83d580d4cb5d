use num_complex::Complex64;
use rug::ops::Pow;
use rug::Float;

use dopkit::equilibrium::{field, solve};
use dopkit::nodes::{NodeDensity, NodeSet};
use dopkit::orthopoly::{build_basis, build_basis_ladder, interlaces, zeros};
use dopkit::weights::{log_weight, WeightSpec};
use dopkit::Fraction;

/// Modified Gram–Schmidt on the monomials (x − 1/2)^k in the weighted inner
/// product, carried out at `bits`. Returns p_k(x_j) for k < n.
fn gram_schmidt(nodes: &[f64], w: &[Float], bits: u32) -> Vec<Vec<Float>> {
    let n = nodes.len();
    let dot = |u: &[Float], v: &[Float]| -> Float {
        let mut s = Float::with_val(bits, 0);
        for j in 0..n {
            s += Float::with_val(bits, &u[j] * &v[j]) * &w[j];
        }
        s
    };
    let mut out: Vec<Vec<Float>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v: Vec<Float> = nodes
            .iter()
            .map(|&x| Float::with_val(bits, Float::with_val(bits, x) - 0.5).pow(k as u32))
            .collect();
        // twice for stability
        for _ in 0..2 {
            for q in &out {
                let c = dot(&v, q);
                for j in 0..n {
                    v[j] -= Float::with_val(bits, &c * &q[j]);
                }
            }
        }
        let norm = dot(&v, &v).sqrt();
        for x in v.iter_mut() {
            *x /= &norm;
        }
        out.push(v);
    }
    out
}

#[test]
fn stieltjes_basis_matches_dense_gram_schmidt() {
    let n = 30;
    for spec in [WeightSpec::krawtchouk(0.5), WeightSpec::Hahn { alpha: 2.0, beta: 2.0 }] {
        let lw = log_weight(&spec, &NodeSet::unit(n)).unwrap();
        let basis = build_basis(&lw, n - 1, 256).unwrap();
        let reference = gram_schmidt(lw.nodes(), &lw.mp_weights(1024), 1024);
        for (k, row) in reference.iter().enumerate() {
            let scale = row.iter().map(|v| v.to_f64().abs()).fold(0.0, f64::max);
            for (j, r) in row.iter().enumerate() {
                let d = Float::with_val(1024, &basis.p_at_node(k, j) - r).to_f64().abs();
                assert!(d / scale < 1e-20, "{spec:?} k={k} j={j}: {d:e}");
            }
        }
    }
}

#[test]
fn monic_growth_off_the_lattice_follows_the_log_transform() {
    let (n, k) = (200, 100);
    let spec = WeightSpec::krawtchouk(0.5);
    let lw = log_weight(&spec, &NodeSet::unit(n)).unwrap();
    let basis = build_basis_ladder(&lw, k, 128).unwrap();
    let phi = field(spec.potential(n), &NodeDensity::unit());
    let eqm = solve(&phi, Fraction::new(1, 2).unwrap(), 1000).unwrap();
    for z in [2.0, -1.0, 3.5] {
        let (log_pi, sign) = basis.evaluate_log(k, z, true).unwrap();
        assert_ne!(sign, 0);
        let predicted = eqm.log_transform(k, Complex64::new(z, 0.0));
        assert!(((log_pi - predicted) / predicted).abs() < 0.01, "z={z}: {log_pi} vs {predicted}");
    }
}

#[test]
fn zeros_interlace_across_consecutive_degrees() {
    let n = 40;
    let lw = log_weight(&WeightSpec::Hahn { alpha: 3.0, beta: 1.5 }, &NodeSet::unit(n)).unwrap();
    let basis = build_basis(&lw, n - 1, 192).unwrap();
    let mut prev = zeros(&basis, 1).unwrap();
    for k in 2..n {
        let z = zeros(&basis, k).unwrap();
        assert_eq!(z.len(), k);
        assert_eq!(z.violations(), 0, "k={k}");
        assert!(interlaces(&z, &prev), "k={k}");
        prev = z;
    }
}
