//! The explicit solution of the discrete Riemann–Hilbert problem and the
//! node identity relating a family to its dual.

use rug::Float;

use super::{build_basis, OrthoBasis};
use crate::error::{Error, Result};
use crate::mp::MpComplex;
use crate::weights::dual_weights;

/// P(z; N, k) evaluated at one point.
#[derive(Clone, Debug)]
pub struct RhpMatrix {
    pub z: MpComplex,
    pub entries: [[MpComplex; 2]; 2],
}

impl RhpMatrix {
    pub fn det(&self) -> MpComplex {
        let e = &self.entries;
        e[0][0].mul(&e[1][1]).sub(&e[0][1].mul(&e[1][0]))
    }

    pub fn entries_f64(&self) -> [[(f64, f64); 2]; 2] {
        let e = &self.entries;
        [
            [e[0][0].to_f64(), e[0][1].to_f64()],
            [e[1][0].to_f64(), e[1][1].to_f64()],
        ]
    }
}

fn cauchy_sum(basis: &OrthoBasis, z: &MpComplex, values: &[Float]) -> MpComplex {
    let bits = basis.bits();
    let mut acc = MpComplex::new(bits, 0.0, 0.0);
    for ((x, w), v) in basis.nodes_mp().iter().zip(basis.weights_mp()).zip(values) {
        let d = z.shift_real(&Float::with_val(bits, -x));
        let num = Float::with_val(bits, w * v);
        acc = acc.add(&d.recip().scale(&num));
    }
    acc
}

pub fn rhp_matrix(basis: &OrthoBasis, k: usize, z: &MpComplex) -> Result<RhpMatrix> {
    let n = basis.n();
    if k >= n || k > basis.kmax() {
        return Err(Error::precondition(format!(
            "degree {k} outside 0..={}",
            basis.kmax().min(n - 1)
        )));
    }
    if z.im.is_zero() {
        if let Some(j) = basis.nodes_mp().iter().position(|x| *x == z.re) {
            return Err(Error::Pole { index: j });
        }
    }
    let bits = basis.bits();
    let at_nodes: Vec<Vec<Float>> = basis
        .nodes_mp()
        .iter()
        .map(|x| basis.monic_all(k, x))
        .collect();
    let col = |deg: usize| -> Vec<Float> { at_nodes.iter().map(|v| v[deg].clone()).collect() };
    let pz = basis.monic_all_complex(k, z);
    let p11 = pz[k].clone();
    let p12 = cauchy_sum(basis, z, &col(k));
    let (p21, p22) = if k == 0 {
        (MpComplex::new(bits, 0.0, 0.0), MpComplex::new(bits, 1.0, 0.0))
    } else {
        let c = basis.lead(k - 1);
        let c2 = Float::with_val(bits, c.square_ref());
        (
            pz[k - 1].scale(&c2),
            cauchy_sum(basis, z, &col(k - 1)).scale(&c2),
        )
    };
    Ok(RhpMatrix {
        z: z.clone(),
        entries: [[p11, p12], [p21, p22]],
    })
}

fn borodin_rhs(basis: &OrthoBasis, k: usize, l: usize) -> Float {
    let bits = basis.bits();
    let x = basis.nodes_mp();
    let c = basis.lead(k - 1);
    let mut v = Float::with_val(bits, c.square_ref()) * &basis.weights_mp()[l];
    for (n, xn) in x.iter().enumerate() {
        if n != l {
            v *= Float::with_val(bits, &x[l] - xn);
        }
    }
    v * basis.monic_real(k - 1, &x[l])
}

fn relative(lhs: &Float, rhs: &Float) -> f64 {
    let diff = Float::with_val(lhs.prec(), lhs - rhs).abs();
    let scale = Float::with_val(lhs.prec(), rhs.abs_ref())
        .max(&Float::with_val(lhs.prec(), lhs.abs_ref()));
    if scale.is_zero() {
        0.0
    } else {
        (diff / scale).to_f64()
    }
}

/// Relative residual of π̄_{N−k}(x_l) = c_{k−1}² w_l Π_{n≠l}(x_l−x_n) π_{k−1}(x_l),
/// with the left side taken from a basis built on the dual weights.
pub fn borodin_identity_check(basis: &OrthoBasis, k: usize, l: usize) -> Result<f64> {
    let n = basis.n();
    if k == 0 || k >= n || k > basis.kmax() + 1 || l >= n {
        return Err(Error::precondition(format!(
            "identity needs 1 ≤ k ≤ N−1 and a node index (k={k}, l={l})"
        )));
    }
    let dual = build_basis(&dual_weights(basis.logw()), n - k, basis.bits())?;
    let lhs = dual.monic_real(n - k, &dual.nodes_mp()[l]);
    Ok(relative(&lhs, &borodin_rhs(basis, k, l)))
}

/// Residuals for every k = 1..=N−1 (rows) and node l (columns); the basis
/// must have kmax = N−1.
pub fn borodin_residuals(basis: &OrthoBasis) -> Result<Vec<Vec<f64>>> {
    let n = basis.n();
    if basis.kmax() + 1 < n {
        return Err(Error::precondition("identity sweep needs kmax = N−1"));
    }
    let dual = build_basis(&dual_weights(basis.logw()), n - 1, basis.bits())?;
    Ok((1..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    let lhs = dual.monic_real(n - k, &dual.nodes_mp()[l]);
                    relative(&lhs, &borodin_rhs(basis, k, l))
                })
                .collect()
        })
        .collect())
}

/// Degree and leading coefficient of Σ_j w_j c_{k−1}² π_{k−1}(x_j) Π_{n≠j}(z−x_n),
/// which should be the monic dual polynomial of degree N−k.
pub fn dual_polynomial_degree(basis: &OrthoBasis, k: usize) -> Result<(usize, f64)> {
    let n = basis.n();
    if k == 0 || k >= n || k > basis.kmax() + 1 {
        return Err(Error::precondition(format!("need 1 ≤ k ≤ N−1 (got {k})")));
    }
    let bits = basis.bits();
    let x = basis.nodes_mp();
    // full product Π(z − x_n), coefficients in increasing degree
    let mut full = vec![Float::with_val(bits, 1)];
    for xn in x {
        let mut next = vec![Float::with_val(bits, 0); full.len() + 1];
        for (i, c) in full.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= Float::with_val(bits, c * xn);
        }
        full = next;
    }
    let c = basis.lead(k - 1);
    let c2 = Float::with_val(bits, c.square_ref());
    let mut total = vec![Float::with_val(bits, 0); n];
    for (j, xj) in x.iter().enumerate() {
        // synthetic division of the full product by (z − x_j)
        let mut quot = vec![Float::with_val(bits, 0); n];
        let mut carry = Float::with_val(bits, 0);
        for d in (0..n).rev() {
            carry = Float::with_val(bits, &full[d + 1] + Float::with_val(bits, &carry * xj));
            quot[d] = carry.clone();
        }
        let coef =
            Float::with_val(bits, &c2 * &basis.weights_mp()[j]) * basis.monic_real(k - 1, xj);
        for d in 0..n {
            total[d] += Float::with_val(bits, &quot[d] * &coef);
        }
    }
    let scale = total
        .iter()
        .map(|v| Float::with_val(bits, v.abs_ref()))
        .fold(Float::with_val(bits, 0), |a, b| a.max(&b));
    let cutoff = scale * Float::with_val(bits, Float::with_val(bits, 1) >> (bits as i32 / 2));
    let degree = (0..n)
        .rev()
        .find(|&d| Float::with_val(bits, total[d].abs_ref()) > cutoff)
        .unwrap_or(0);
    Ok((degree, total[degree].to_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodes::NodeSet;
    use crate::weights::{log_weight, WeightSpec};

    fn basis(spec: WeightSpec, n: usize, bits: u32) -> OrthoBasis {
        let lw = log_weight(&spec, &NodeSet::unit(n)).unwrap();
        build_basis(&lw, n - 1, bits).unwrap()
    }

    fn dist(a: &MpComplex, re: f64, im: f64) -> f64 {
        let (x, y) = a.to_f64();
        ((x - re).powi(2) + (y - im).powi(2)).sqrt()
    }

    #[test]
    fn degree_zero_matrix() {
        let b = basis(WeightSpec::krawtchouk(0.5), 6, 128);
        let m = rhp_matrix(&b, 0, &MpComplex::new(128, 0.3, 0.2)).unwrap();
        assert!(dist(&m.entries[0][0], 1.0, 0.0) < 1e-30);
        assert!(dist(&m.entries[1][0], 0.0, 0.0) == 0.0);
        assert!(dist(&m.entries[1][1], 1.0, 0.0) < 1e-30);
        assert!(dist(&m.det(), 1.0, 0.0) < 1e-30);
    }

    #[test]
    fn residues_at_the_nodes() {
        let bits = 256;
        let b = basis(WeightSpec::Hahn { alpha: 2.0, beta: 1.5 }, 8, bits);
        let k = 3;
        for j in 0..8 {
            let eps = 1e-30;
            let z = MpComplex::new(bits, b.nodes()[j], 0.0).add(&MpComplex::new(bits, 0.0, eps));
            let m = rhp_matrix(&b, k, &z).unwrap();
            let factor = MpComplex::new(bits, 0.0, eps);
            let w = &b.weights_mp()[j];
            for row in 0..2 {
                let res = m.entries[row][1].mul(&factor);
                let expect = m.entries[row][0].scale(w);
                let err = res.sub(&expect).abs().to_f64();
                let scale = expect.abs().to_f64().max(1e-300);
                assert!(err / scale < 1e-10, "node {j}, row {row}: {err}");
            }
        }
        assert!(matches!(
            rhp_matrix(&b, k, &MpComplex::new(bits, b.nodes()[2], 0.0)),
            Err(Error::Pole { index: 2 })
        ));
    }

    #[test]
    fn normalization_at_infinity() {
        let bits = 256;
        let b = basis(WeightSpec::krawtchouk(0.3), 10, bits);
        let k = 4;
        let mut pts = Vec::new();
        for r in [1e2, 1e3, 1e4] {
            let z = MpComplex::new(bits, r * 0.6, r * 0.8);
            let m = rhp_matrix(&b, k, &z).unwrap();
            let zk = z.powi(k as u32);
            let zmk = zk.recip();
            let d = [
                m.entries[0][0].mul(&zmk).sub(&MpComplex::new(bits, 1.0, 0.0)).abs().to_f64(),
                m.entries[0][1].mul(&zk).abs().to_f64(),
                m.entries[1][0].mul(&zmk).abs().to_f64(),
                m.entries[1][1].mul(&zk).sub(&MpComplex::new(bits, 1.0, 0.0)).abs().to_f64(),
            ];
            let norm = d.iter().cloned().fold(0.0, f64::max);
            pts.push((r.ln(), norm.ln()));
            assert!(dist(&m.det(), 1.0, 0.0) < 1e-40);
        }
        let slope = (pts[2].1 - pts[0].1) / (pts[2].0 - pts[0].0);
        assert!((slope + 1.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn borodin_identity_for_krawtchouk() {
        let b = basis(WeightSpec::krawtchouk(0.5), 12, 256);
        let res = borodin_residuals(&b).unwrap();
        let worst = res.iter().flatten().cloned().fold(0.0, f64::max);
        assert!(worst < 1e-15, "worst {worst}");
        let single = borodin_identity_check(&b, 5, 3).unwrap();
        assert!(single < 1e-15);
    }

    #[test]
    fn borodin_identity_for_hahn() {
        let b = basis(WeightSpec::Hahn { alpha: 3.0, beta: 3.0 }, 10, 256);
        assert!(borodin_identity_check(&b, 4, 0).unwrap() < 1e-15);
    }

    #[test]
    fn dual_polynomial_has_complementary_degree() {
        let b = basis(WeightSpec::krawtchouk(0.4), 9, 256);
        for k in 1..9 {
            let (deg, lead) = dual_polynomial_degree(&b, k).unwrap();
            assert_eq!(deg, 9 - k);
            assert!((lead - 1.0).abs() < 1e-30);
        }
    }
}
