//! Node densities and the quantized node sets they induce.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

const NORMALIZATION_TOL: f64 = 1e-12;
const CDF_TOL: f64 = 1e-15;
const MAX_ROOT_ITERATIONS: usize = 200;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Shape of a node density on [a, b].
#[derive(Clone)]
pub enum DensityShape {
    /// Constant density 1/(b-a).
    Uniform,
    /// Power-series coefficients `c0 + c1 x + c2 x^2 + ...` in the absolute coordinate.
    Polynomial(Vec<f64>),
    /// Any other density; its cdf is obtained by adaptive quadrature.
    Custom(RealFn),
}

impl fmt::Debug for DensityShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityShape::Uniform => write!(f, "Uniform"),
            DensityShape::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            DensityShape::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A probability density ρ⁰ on [a, b] from which nodes are quantized.
#[derive(Clone, Debug)]
pub struct NodeDensity {
    a: f64,
    b: f64,
    shape: DensityShape,
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn poly_antiderivative(c: &[f64], x: f64) -> f64 {
    c.iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (i, &ci)| acc * x + ci / (i as f64 + 1.0))
        * x
}

impl NodeDensity {
    /// Validates the interval, normalization and sign of the density.
    ///
    /// The density must be positive inside (a, b); a zero exactly at an
    /// endpoint is tolerated so that e.g. ρ⁰(x) = 2x on (0,1) can be used.
    pub fn new(a: f64, b: f64, shape: DensityShape) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::config(format!("invalid interval ({a}, {b})")));
        }
        let d = NodeDensity { a, b, shape };
        let total = d.cdf(b);
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::config(format!(
                "density is not normalized: integral over [a,b] is {total}"
            )));
        }
        let samples = 257;
        for i in 0..=samples {
            let x = a + (b - a) * i as f64 / samples as f64;
            let r = d.rho(x);
            let interior = i > 0 && i < samples;
            if !r.is_finite() || r < 0.0 || (interior && r <= 0.0) {
                return Err(Error::config(format!("density not positive at x = {x}: {r}")));
            }
        }
        Ok(d)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, DensityShape::Uniform)
    }

    /// Uniform density on (0, 1), the setting of the classical weights.
    pub fn unit() -> Self {
        NodeDensity {
            a: 0.0,
            b: 1.0,
            shape: DensityShape::Uniform,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn shape(&self) -> &DensityShape {
        &self.shape
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.shape, DensityShape::Uniform)
    }

    pub fn rho(&self, x: f64) -> f64 {
        match &self.shape {
            DensityShape::Uniform => 1.0 / (self.b - self.a),
            DensityShape::Polynomial(c) => poly_eval(c, x),
            DensityShape::Custom(f) => f(x),
        }
    }

    /// ∫_a^x ρ⁰.
    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(self.a, self.b);
        match &self.shape {
            DensityShape::Uniform => (x - self.a) / (self.b - self.a),
            DensityShape::Polynomial(c) => {
                poly_antiderivative(c, x) - poly_antiderivative(c, self.a)
            }
            DensityShape::Custom(f) => {
                if x == self.a {
                    0.0
                } else {
                    quad::adaptive(&|t| f(t), self.a, x, CDF_TOL)
                }
            }
        }
    }

    /// Solves cdf(x) = t by bisection refined with Newton steps.
    pub fn inverse_cdf(&self, t: f64) -> Result<f64> {
        if let DensityShape::Uniform = self.shape {
            return Ok(self.a + t * (self.b - self.a));
        }
        let (mut lo, mut hi) = (self.a, self.b);
        let mut x = self.a + t * (self.b - self.a);
        for _ in 0..MAX_ROOT_ITERATIONS {
            let f = self.cdf(x) - t;
            if f == 0.0 {
                return Ok(x);
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let r = self.rho(x);
            let newton = x - f / r;
            x = if r > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (hi - lo) <= 4.0 * f64::EPSILON * x.abs().max(1.0)
                || (f.abs() <= 1e-16 * t.max(1e-300))
            {
                return Ok(x);
            }
        }
        Err(Error::numeric(format!("cdf inversion did not converge for level {t}")))
    }
}

/// The N nodes of the quantization rule cdf(x_j) = (2j+1)/(2N).
#[derive(Clone, Debug)]
pub struct NodeSet {
    density: NodeDensity,
    nodes: Vec<f64>,
}

pub fn build_nodes(density: &NodeDensity, n: usize) -> Result<NodeSet> {
    if n == 0 {
        return Err(Error::config("number of nodes must be positive"));
    }
    let mut nodes = Vec::with_capacity(n);
    for j in 0..n {
        let t = (2 * j + 1) as f64 / (2 * n) as f64;
        let x = density
            .inverse_cdf(t)
            .map_err(|_| Error::numeric(format!("node {j} root finder did not converge")))?;
        nodes.push(x);
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::numeric("generated nodes are not strictly increasing"));
    }
    Ok(NodeSet {
        density: density.clone(),
        nodes,
    })
}

impl NodeSet {
    /// Equally spaced nodes (j + 1/2)/N on (0, 1).
    pub fn unit(n: usize) -> Self {
        NodeSet {
            density: NodeDensity::unit(),
            nodes: (0..n).map(|j| (j as f64 + 0.5) / n as f64).collect(),
        }
    }

    /// A node set given explicitly; the density is only used for the
    /// interval and should describe where the nodes accumulate.
    pub fn from_nodes(density: NodeDensity, nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("nodes must be non-empty and strictly increasing"));
        }
        Ok(NodeSet { density, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn density(&self) -> &NodeDensity {
        &self.density
    }

    /// max_j |cdf(x_j) - (2j+1)/(2N)|.
    pub fn quantization_residual(&self) -> f64 {
        let n = self.len();
        self.nodes
            .iter()
            .enumerate()
            .map(|(j, &x)| (self.density.cdf(x) - (2 * j + 1) as f64 / (2 * n) as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Σ_{n≠j} log|x_j − x_n| for every j.
    pub fn log_vandermonde_rows(&self) -> Vec<f64> {
        let x = &self.nodes;
        (0..x.len())
            .map(|j| {
                x.iter()
                    .enumerate()
                    .filter(|&(n, _)| n != j)
                    .map(|(_, &xn)| (x[j] - xn).abs().ln())
                    .sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_nodes_are_cell_midpoints() {
        let d = NodeDensity::uniform(0.0, 1.0).unwrap();
        let s = build_nodes(&d, 4).unwrap();
        assert_eq!(s.nodes(), &[0.125, 0.375, 0.625, 0.875]);
        let one = build_nodes(&d, 1).unwrap();
        assert_eq!(one.nodes(), &[0.5]);
        assert!(build_nodes(&d, 0).is_err());
    }

    #[test]
    fn linear_density_has_square_root_nodes() {
        let d = NodeDensity::new(0.0, 1.0, DensityShape::Polynomial(vec![0.0, 2.0])).unwrap();
        let s = build_nodes(&d, 2).unwrap();
        assert!((s.nodes()[0] - 0.5).abs() < 1e-15);
        assert!((s.nodes()[1] - 0.75f64.sqrt()).abs() < 1e-15);
        assert!(s.quantization_residual() < 1e-13);
    }

    #[test]
    fn custom_density_uses_quadrature() {
        // ρ(x) = (π/2) sin(πx) on (0,1)
        let f: RealFn = Arc::new(|x: f64| 0.5 * std::f64::consts::PI * (std::f64::consts::PI * x).sin());
        let d = NodeDensity::new(0.0, 1.0, DensityShape::Custom(f));
        // zero at the endpoints is tolerated
        let d = d.unwrap();
        let s = build_nodes(&d, 25).unwrap();
        assert!(s.quantization_residual() < 1e-13);
        for (j, &x) in s.nodes().iter().enumerate() {
            let exact = ((1.0 - 2.0 * (2 * j + 1) as f64 / 50.0).acos()) / std::f64::consts::PI;
            assert!((x - exact).abs() < 1e-12, "node {j}: {x} vs {exact}");
        }
    }

    #[test]
    fn rejects_unnormalized_density() {
        let err = NodeDensity::new(0.0, 1.0, DensityShape::Polynomial(vec![2.0])).unwrap_err();
        assert!(err.is_config());
        let err = NodeDensity::new(0.0, 1.0, DensityShape::Polynomial(vec![3.0, -4.0])).unwrap_err();
        assert!(err.is_config());
    }

    #[test]
    fn equally_spaced_product_identity() {
        // Σ_{n≠j} log|x_j − x_n| = log(j!(N−1−j)!/N^{N−1})
        let n = 6;
        let s = NodeSet::unit(n);
        let rows = s.log_vandermonde_rows();
        let lf = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
        for (j, r) in rows.iter().enumerate() {
            let exact = lf(j) + lf(n - 1 - j) - (n as f64 - 1.0) * (n as f64).ln();
            assert!((r - exact).abs() < 1e-13);
        }
    }
}
