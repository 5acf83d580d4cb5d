//! Small helpers around MPFR floats: log-Gamma, a complex pair type and
//! conversions.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

/// Working precision used when f64 results are wanted from MPFR.
pub const AUX_BITS: u32 = 128;

pub fn ln_gamma(x: f64) -> f64 {
    Float::with_val(AUX_BITS, x).ln_gamma().to_f64()
}

pub fn ln_factorial(n: usize) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// log C(n, k) for real arguments, via log-Gamma.
pub fn ln_binomial(n: f64, k: f64) -> f64 {
    let f = |t: f64| Float::with_val(AUX_BITS, t).ln_gamma();
    let v = f(n + 1.0) - f(k + 1.0) - f(n - k + 1.0);
    v.to_f64()
}

pub fn pi(bits: u32) -> Float {
    Float::with_val(bits, Constant::Pi)
}

pub fn mpf(bits: u32, x: f64) -> Float {
    Float::with_val(bits, x)
}

/// A complex number with MPFR components.
#[derive(Clone, Debug)]
pub struct MpComplex {
    pub re: Float,
    pub im: Float,
}

impl MpComplex {
    pub fn new(bits: u32, re: f64, im: f64) -> Self {
        MpComplex {
            re: Float::with_val(bits, re),
            im: Float::with_val(bits, im),
        }
    }

    pub fn from_real(x: Float) -> Self {
        let im = Float::with_val(x.prec(), 0);
        MpComplex { re: x, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn add(&self, o: &MpComplex) -> MpComplex {
        MpComplex {
            re: Float::with_val(self.prec(), &self.re + &o.re),
            im: Float::with_val(self.prec(), &self.im + &o.im),
        }
    }

    pub fn sub(&self, o: &MpComplex) -> MpComplex {
        MpComplex {
            re: Float::with_val(self.prec(), &self.re - &o.re),
            im: Float::with_val(self.prec(), &self.im - &o.im),
        }
    }

    pub fn mul(&self, o: &MpComplex) -> MpComplex {
        let p = self.prec();
        let re = Float::with_val(p, &self.re * &o.re) - Float::with_val(p, &self.im * &o.im);
        let im = Float::with_val(p, &self.re * &o.im) + Float::with_val(p, &self.im * &o.re);
        MpComplex { re, im }
    }

    pub fn scale(&self, s: &Float) -> MpComplex {
        MpComplex {
            re: Float::with_val(self.prec(), &self.re * s),
            im: Float::with_val(self.prec(), &self.im * s),
        }
    }

    pub fn shift_real(&self, s: &Float) -> MpComplex {
        MpComplex {
            re: Float::with_val(self.prec(), &self.re + s),
            im: self.im.clone(),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        Float::with_val(self.prec(), self.re.square_ref()) + Float::with_val(self.prec(), self.im.square_ref())
    }

    pub fn recip(&self) -> MpComplex {
        let d = self.norm_sqr();
        MpComplex {
            re: Float::with_val(self.prec(), &self.re / &d),
            im: -Float::with_val(self.prec(), &self.im / &d),
        }
    }

    pub fn div(&self, o: &MpComplex) -> MpComplex {
        self.mul(&o.recip())
    }

    pub fn abs(&self) -> Float {
        self.norm_sqr().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn powi(&self, n: u32) -> MpComplex {
        let mut acc = MpComplex::new(self.prec(), 1.0, 0.0);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }
}

/// `x^n` for an MPFR float and an integer power.
pub fn powi(x: &Float, n: i32) -> Float {
    Float::with_val(x.prec(), x.pow(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_gamma_matches_factorials() {
        assert!((ln_factorial(10) - 3628800f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-15);
        assert!((ln_binomial(6.0, 2.0) - 15f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn complex_arithmetic() {
        let a = MpComplex::new(128, 1.0, 2.0);
        let b = MpComplex::new(128, -3.0, 0.5);
        let q = a.mul(&b).div(&b);
        let (re, im) = q.to_f64();
        assert!((re - 1.0).abs() < 1e-30 && (im - 2.0).abs() < 1e-30);
        let (re, im) = a.powi(2).to_f64();
        assert_eq!((re, im), (-3.0, 4.0));
    }
}
