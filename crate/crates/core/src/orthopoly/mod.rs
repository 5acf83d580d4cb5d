//! Orthonormal and monic polynomials for a discrete weight, built by the
//! Stieltjes (discrete Lanczos) procedure in MPFR arithmetic.

mod classify;
mod rhp;
mod zeros;

pub use classify::{classify_zeros, RegionZeros, ZeroClassification, BAND_TRIM, HURWITZ_RADIUS};
pub use rhp::{
    borodin_identity_check, borodin_residuals, dual_polynomial_degree, rhp_matrix, RhpMatrix,
};
pub use zeros::{interlaces, locate_zeros, zeros, ZeroSet};

use rug::Float;

use crate::error::{Error, Result};
use crate::mp::MpComplex;
use crate::weights::LogWeights;

pub const DEFAULT_BITS: u32 = 128;
pub const MAX_BITS: u32 = 1024;

/// Recurrence data of p_{N,0..kmax}, together with the orthonormal
/// vectors q_k(j) = p_k(x_j)·√w_j on the nodes.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    logw: LogWeights,
    kmax: usize,
    bits: u32,
    x: Vec<Float>,
    w: Vec<Float>,
    alpha: Vec<Float>,
    // b[0] = (Σw)^{1/2}; b[k] = β_k^{1/2} for k ≥ 1
    b: Vec<Float>,
    beta: Vec<Float>,
    q: Vec<Vec<Float>>,
    q64: Vec<Vec<f64>>,
}

/// Loss-of-orthogonality threshold for a given working precision.
pub fn precision_tolerance(bits: u32) -> f64 {
    10f64.powf(-(bits as f64) / 8.0)
}

fn dot(a: &[Float], b: &[Float], bits: u32) -> Float {
    let mut s = Float::with_val(bits, 0);
    let mut t = Float::new(bits);
    for (x, y) in a.iter().zip(b) {
        t.assign_mul(x, y);
        s += &t;
    }
    s
}

trait AssignMul {
    fn assign_mul(&mut self, a: &Float, b: &Float);
}

impl AssignMul for Float {
    fn assign_mul(&mut self, a: &Float, b: &Float) {
        use rug::Assign;
        self.assign(a * b);
    }
}

pub fn build_basis(logw: &LogWeights, kmax: usize, bits: u32) -> Result<OrthoBasis> {
    let n = logw.len();
    if kmax >= n {
        return Err(Error::config(format!("kmax = {kmax} must be below N = {n}")));
    }
    if bits < 64 {
        return Err(Error::config("precision must be at least 64 bits"));
    }
    let tol = precision_tolerance(bits);
    let x: Vec<Float> = logw.nodes().iter().map(|&v| Float::with_val(bits, v)).collect();
    let w = logw.mp_weights(bits);
    let mass = w.iter().fold(Float::with_val(bits, 0), |acc, v| acc + v);
    let b0 = Float::with_val(bits, mass.sqrt_ref());
    let sqrt_w: Vec<Float> = w.iter().map(|v| Float::with_val(bits, v.sqrt_ref())).collect();

    let mut q: Vec<Vec<Float>> = Vec::with_capacity(kmax + 1);
    q.push(sqrt_w.iter().map(|s| Float::with_val(bits, s / &b0)).collect());
    let mut alpha = Vec::with_capacity(kmax + 1);
    let mut b = vec![b0];
    let mut xq = vec![Float::new(bits); n];

    for k in 0..=kmax {
        for j in 0..n {
            xq[j].assign_mul(&x[j], &q[k][j]);
        }
        let mut a = dot(&xq, &q[k], bits);
        if k == kmax {
            alpha.push(a);
            break;
        }
        let mut r: Vec<Float> = (0..n)
            .map(|j| {
                let mut v = Float::with_val(bits, &xq[j] - Float::with_val(bits, &a * &q[k][j]));
                if k > 0 {
                    v -= Float::with_val(bits, &b[k] * &q[k - 1][j]);
                }
                v
            })
            .collect();
        // second Stieltjes pass against q_k and q_{k-1}
        let d = dot(&r, &q[k], bits);
        for j in 0..n {
            r[j] -= Float::with_val(bits, &d * &q[k][j]);
        }
        a += &d;
        if k > 0 {
            let e = dot(&r, &q[k - 1], bits);
            for j in 0..n {
                r[j] -= Float::with_val(bits, &e * &q[k - 1][j]);
            }
        }
        alpha.push(a);
        let norm = dot(&r, &r, bits).sqrt();
        if !norm.is_finite() || norm.is_zero() || !norm.is_sign_positive() {
            return Err(Error::Precision {
                k: k + 1,
                bits,
                detail: format!("recurrence coefficient beta_{} is not positive", k + 1),
            });
        }
        let next: Vec<Float> = r.iter().map(|v| Float::with_val(bits, v / &norm)).collect();
        let to_first = dot(&next, &q[0], bits).to_f64().abs();
        let to_prev = dot(&next, &q[k], bits).to_f64().abs();
        if to_first > tol || to_prev > tol {
            return Err(Error::Precision {
                k: k + 1,
                bits,
                detail: format!("orthogonality lost ({:.2e})", to_first.max(to_prev)),
            });
        }
        q.push(next);
        b.push(norm);
    }
    let last = &q[kmax];
    for (i, qi) in q.iter().enumerate().take(kmax) {
        let v = dot(last, qi, bits).to_f64().abs();
        if v > tol {
            return Err(Error::Precision {
                k: kmax,
                bits,
                detail: format!("degree {kmax} not orthogonal to degree {i} ({v:.2e})"),
            });
        }
    }
    let beta = b
        .iter()
        .map(|v| Float::with_val(bits, v.square_ref()))
        .collect();
    let q64 = q.iter().map(|row| row.iter().map(|v| v.to_f64()).collect()).collect();
    Ok(OrthoBasis {
        logw: logw.clone(),
        kmax,
        bits,
        x,
        w,
        alpha,
        b,
        beta,
        q,
        q64,
    })
}

/// Builds the basis starting at `start_bits`, doubling the precision on
/// failure up to [`MAX_BITS`].
pub fn build_basis_ladder(logw: &LogWeights, kmax: usize, start_bits: u32) -> Result<OrthoBasis> {
    let mut bits = start_bits.max(64);
    loop {
        match build_basis(logw, kmax, bits) {
            Err(Error::Precision { .. }) if bits < MAX_BITS => bits = (bits * 2).min(MAX_BITS),
            other => return other,
        }
    }
}

impl OrthoBasis {
    pub fn logw(&self) -> &LogWeights {
        &self.logw
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn nodes(&self) -> &[f64] {
        self.logw.nodes()
    }

    pub fn nodes_mp(&self) -> &[Float] {
        &self.x
    }

    pub fn weights_mp(&self) -> &[Float] {
        &self.w
    }

    /// α_k, the diagonal of the Jacobi matrix, k = 0..=kmax.
    pub fn alpha(&self) -> &[Float] {
        &self.alpha
    }

    /// β_k = b_k² for k = 1..=kmax; index 0 holds Σ w.
    pub fn beta(&self) -> &[Float] {
        &self.beta
    }

    /// √β_k (index 0 holds (Σ w)^{1/2}).
    pub fn b(&self) -> &[Float] {
        &self.b
    }

    pub fn alpha_f64(&self) -> Vec<f64> {
        self.alpha.iter().map(Float::to_f64).collect()
    }

    pub fn beta_f64(&self) -> Vec<f64> {
        self.beta.iter().map(Float::to_f64).collect()
    }

    /// Leading coefficient c_k of p_k, i.e. p_k = c_k π_k.
    pub fn lead(&self, k: usize) -> Float {
        let mut c = Float::with_val(self.bits, 1);
        for bi in &self.b[..=k] {
            c /= bi;
        }
        c
    }

    pub fn log_lead(&self, k: usize) -> f64 {
        self.lead(k).ln().to_f64()
    }

    /// q_k(j) = p_k(x_j)√w_j in working precision.
    pub fn q_mp(&self, k: usize) -> &[Float] {
        &self.q[k]
    }

    /// q_k(j) rounded to f64.
    pub fn q(&self, k: usize) -> &[f64] {
        &self.q64[k]
    }

    /// p_k(x_j) at a node.
    pub fn p_at_node(&self, k: usize, j: usize) -> Float {
        Float::with_val(self.bits, &self.q[k][j] / self.w[j].clone().sqrt())
    }

    /// π_0..π_k at a real point.
    pub fn monic_all(&self, k: usize, x: &Float) -> Vec<Float> {
        let bits = self.bits;
        let mut out = Vec::with_capacity(k + 1);
        out.push(Float::with_val(bits, 1));
        if k == 0 {
            return out;
        }
        out.push(Float::with_val(bits, x - &self.alpha[0]));
        for i in 1..k {
            let t = Float::with_val(bits, x - &self.alpha[i]) * &out[i]
                - Float::with_val(bits, &self.beta[i] * &out[i - 1]);
            out.push(t);
        }
        out
    }

    /// π_k(x) and π_k'(x) at a real point.
    pub fn monic_with_derivative(&self, k: usize, x: &Float) -> (Float, Float) {
        let bits = self.bits;
        let (mut p0, mut p1) = (Float::with_val(bits, 0), Float::with_val(bits, 1));
        let (mut d0, mut d1) = (Float::with_val(bits, 0), Float::with_val(bits, 0));
        for i in 0..k {
            let s = Float::with_val(bits, x - &self.alpha[i]);
            let mut p2 = Float::with_val(bits, &s * &p1);
            let mut d2 = Float::with_val(bits, &s * &d1) + &p1;
            if i > 0 {
                p2 -= Float::with_val(bits, &self.beta[i] * &p0);
                d2 -= Float::with_val(bits, &self.beta[i] * &d0);
            }
            p0 = std::mem::replace(&mut p1, p2);
            d0 = std::mem::replace(&mut d1, d2);
        }
        (p1, d1)
    }

    pub fn monic_real(&self, k: usize, x: &Float) -> Float {
        self.monic_all(k, x).pop().unwrap()
    }

    /// π_0..π_k at a complex point.
    pub fn monic_all_complex(&self, k: usize, z: &MpComplex) -> Vec<MpComplex> {
        let bits = self.bits;
        let mut out = Vec::with_capacity(k + 1);
        out.push(MpComplex::new(bits, 1.0, 0.0));
        if k == 0 {
            return out;
        }
        out.push(z.shift_real(&Float::with_val(bits, -&self.alpha[0])));
        for i in 1..k {
            let s = z.shift_real(&Float::with_val(bits, -&self.alpha[i]));
            let t = s.mul(&out[i]).sub(&out[i - 1].scale(&self.beta[i]));
            out.push(t);
        }
        out
    }

    /// p_k(z) (orthonormal) or π_k(z) (monic).
    pub fn evaluate(&self, k: usize, z: &MpComplex, monic: bool) -> Result<MpComplex> {
        self.check_degree(k)?;
        let v = self.monic_all_complex(k, z).pop().unwrap();
        Ok(if monic { v } else { v.scale(&self.lead(k)) })
    }

    /// (log|·|, sign) of p_k(x) or π_k(x) at a real point; exact for any N
    /// because MPFR exponents do not overflow.
    pub fn evaluate_log(&self, k: usize, x: f64, monic: bool) -> Result<(f64, i8)> {
        self.check_degree(k)?;
        let xf = Float::with_val(self.bits, x);
        let mut v = self.monic_real(k, &xf);
        if !monic {
            v *= self.lead(k);
        }
        let sign = if v.is_zero() {
            0
        } else if v.is_sign_negative() {
            -1
        } else {
            1
        };
        Ok((v.abs().ln().to_f64(), sign))
    }

    fn check_degree(&self, k: usize) -> Result<()> {
        if k > self.kmax {
            return Err(Error::precondition(format!(
                "degree {k} exceeds kmax = {}",
                self.kmax
            )));
        }
        Ok(())
    }

    /// max_{k,l ≤ kmax} |Σ_j p_k p_l w_j − δ_kl|.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for k in 0..=self.kmax {
            for l in 0..=k {
                let mut s = dot(&self.q[k], &self.q[l], self.bits);
                if k == l {
                    s -= 1u32;
                }
                worst = worst.max(s.to_f64().abs());
            }
        }
        worst
    }
}
