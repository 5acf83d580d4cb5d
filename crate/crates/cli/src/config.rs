//! The JSON run configuration and its resolution against flags and the
//! environment.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize};

use dopkit::nodes::{DensityShape, NodeDensity};
use dopkit::orthopoly::DEFAULT_BITS;
use dopkit::weights::{GenericField, WeightSpec};
use dopkit::Fraction;

use crate::CliError;

pub const PRECISION_ENV: &str = "DOPKIT_PRECISION_BITS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightConfig {
    Krawtchouk {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<f64>,
    },
    Hahn {
        alpha: f64,
        beta: f64,
    },
    AssociatedHahn {
        alpha: f64,
        beta: f64,
    },
    /// V given by power-series coefficients in x; V_N = V + γ/N.
    Generic {
        v: Vec<f64>,
        #[serde(default)]
        gamma: f64,
    },
}

impl WeightConfig {
    pub fn spec(&self) -> WeightSpec {
        match self {
            WeightConfig::Krawtchouk { p, q } => WeightSpec::Krawtchouk {
                p: *p,
                q: q.unwrap_or(1.0 - p),
            },
            WeightConfig::Hahn { alpha, beta } => WeightSpec::Hahn {
                alpha: *alpha,
                beta: *beta,
            },
            WeightConfig::AssociatedHahn { alpha, beta } => WeightSpec::AssociatedHahn {
                alpha: *alpha,
                beta: *beta,
            },
            WeightConfig::Generic { v, gamma } => {
                let c = v.clone();
                WeightSpec::GenericField(GenericField {
                    v: Arc::new(move |x| c.iter().rev().fold(0.0, |acc, ci| acc * x + ci)),
                    gamma: *gamma,
                    eta: None,
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensityConfig {
    /// "uniform"
    Named(String),
    /// Power-series coefficients of ρ⁰.
    Polynomial(Vec<f64>),
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig::Named("uniform".into())
    }
}

fn default_a() -> f64 {
    0.0
}

fn default_b() -> f64 {
    1.0
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(usize),
        Many(Vec<usize>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(n) => vec![n],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub weight: WeightConfig,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(rename = "N", default, deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Fraction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn density(&self) -> Result<NodeDensity, CliError> {
        let shape = match &self.density {
            DensityConfig::Named(s) if s == "uniform" => DensityShape::Uniform,
            DensityConfig::Named(s) => {
                return Err(CliError::Config(format!("unknown density {s:?}")))
            }
            DensityConfig::Polynomial(c) => DensityShape::Polynomial(c.clone()),
        };
        Ok(NodeDensity::new(self.a, self.b, shape)?)
    }

    pub fn spec(&self) -> Result<WeightSpec, CliError> {
        let s = self.weight.spec();
        s.validate()?;
        Ok(s)
    }

    /// The degree k = cN for every N in the list; fails unless each is an
    /// integer.
    pub fn degrees(&self) -> Result<Vec<usize>, CliError> {
        let c = self
            .c
            .ok_or_else(|| CliError::Config("the ratio c is required".into()))?;
        self.n
            .iter()
            .map(|&n| Ok(c.degree_for(n)?))
            .collect()
    }

    pub fn single_n(&self) -> Result<usize, CliError> {
        match self.n.as_slice() {
            [n] => Ok(*n),
            [] => Err(CliError::Config("N is required".into())),
            _ => Err(CliError::Config("this command takes a single N".into())),
        }
    }
}

/// Precision in bits: explicit value, else the environment, else the
/// library default.
pub fn resolve_bits(explicit: Option<u32>) -> Result<u32, CliError> {
    let bits = match explicit {
        Some(b) => b,
        None => match std::env::var(PRECISION_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{PRECISION_ENV}={v:?} is not an integer")))?,
            Err(_) => DEFAULT_BITS,
        },
    };
    if !(64..=65536).contains(&bits) {
        return Err(CliError::Config(format!("precision {bits} bits outside 64..=65536")));
    }
    Ok(bits)
}

/// Parses "100,200" or "100".
pub fn parse_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{t:?} is not a positive integer")))
        })
        .collect()
}
