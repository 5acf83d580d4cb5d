use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact ratio `k/N` in lowest terms, used for the degree-to-node ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::config("fraction with zero denominator"));
        }
        let g = gcd(num, den).max(1);
        Ok(Fraction {
            num: num / g,
            den: den / g,
        })
    }

    /// A ratio strictly inside (0, 1), as required for `c = k/N`.
    pub fn proper(num: u64, den: u64) -> Result<Self> {
        let f = Self::new(num, den)?;
        if f.num == 0 || f.num >= f.den {
            return Err(Error::config(format!("ratio {f} must lie strictly in (0,1)")));
        }
        Ok(f)
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// The integer `k = c·n`, or an error when `c·n` is not integral.
    pub fn degree_for(&self, n: usize) -> Result<usize> {
        let n = n as u64;
        if !(n * self.num).is_multiple_of(self.den) {
            return Err(Error::config(format!(
                "c = {self} does not give an integer degree for N = {n}"
            )));
        }
        Ok((n * self.num / self.den) as usize)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Fraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let parse = |t: &str| {
            t.parse::<u64>()
                .map_err(|_| Error::config(format!("cannot parse ratio '{s}' (expected p/q)")))
        };
        Fraction::new(parse(n)?, parse(d)?)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_reduces() {
        let f: Fraction = "50/100".parse().unwrap();
        assert_eq!((f.num(), f.den()), (1, 2));
        assert_eq!(f.to_string(), "1/2");
        assert!("0.5".parse::<Fraction>().is_err());
        assert!("1/0".parse::<Fraction>().is_err());
    }

    #[test]
    fn degree_must_be_integral() {
        let f = Fraction::proper(1, 3).unwrap();
        assert_eq!(f.degree_for(30).unwrap(), 10);
        assert!(f.degree_for(31).is_err());
        assert!(Fraction::proper(3, 3).is_err());
    }
}
