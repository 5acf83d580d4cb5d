use crate::nodes::{DensityShape, NodeDensity, RealFn};
use crate::quad;

/// φ(x) = V(x) + ∫ log|x−y| ρ⁰(y) dy.
#[derive(Clone, Debug)]
pub struct FieldPhi {
    v: VField,
    density: NodeDensity,
}

#[derive(Clone)]
struct VField(RealFn);

impl std::fmt::Debug for VField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "V(..)")
    }
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// ∫_a^b log|x−y| dy.
pub(crate) fn log_integral_flat(x: f64, a: f64, b: f64) -> f64 {
    let (l, r) = ((x - a).abs(), (b - x).abs());
    let sl = if x >= a { 1.0 } else { -1.0 };
    let sr = if x <= b { 1.0 } else { -1.0 };
    sl * xlogx(l) + sr * xlogx(r) - (b - a)
}

pub fn field(v: RealFn, density: &NodeDensity) -> FieldPhi {
    FieldPhi {
        v: VField(v),
        density: density.clone(),
    }
}

impl FieldPhi {
    pub fn density(&self) -> &NodeDensity {
        &self.density
    }

    pub fn v(&self, x: f64) -> f64 {
        (self.v.0)(x)
    }

    /// ∫ log|x−y| ρ⁰(y) dy, by subtracting ρ⁰(x) so that the remaining
    /// integrand is continuous, and integrating the subtracted part exactly.
    pub fn log_potential(&self, x: f64) -> f64 {
        let d = &self.density;
        let (a, b) = (d.a(), d.b());
        match d.shape() {
            DensityShape::Uniform => log_integral_flat(x, a, b) / (b - a),
            _ => {
                let r0 = d.rho(x.clamp(a, b));
                let g = |y: f64| {
                    let t = (x - y).abs();
                    if t == 0.0 {
                        0.0
                    } else {
                        t.ln() * (d.rho(y) - r0)
                    }
                };
                let xc = x.clamp(a, b);
                let mut s = r0 * log_integral_flat(x, a, b);
                if xc > a {
                    s += quad::adaptive(&g, a, xc, 1e-14);
                }
                if xc < b {
                    s += quad::adaptive(&g, xc, b, 1e-14);
                }
                s
            }
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.v(x) + self.log_potential(x)
    }

    /// Cell means of φ over the cells delimited by `edges`.
    pub fn cell_means(&self, edges: &[f64]) -> Vec<f64> {
        let rule = quad::gl8();
        let d = &self.density;
        let uniform = d.is_uniform();
        let (a, b) = (d.a(), d.b());
        edges
            .windows(2)
            .map(|e| {
                let h = e[1] - e[0];
                let vmean = quad::fixed(&|x| self.v(x), e[0], e[1], rule) / h;
                let lmean = if uniform {
                    // antiderivative of log_integral_flat in x
                    let anti = |x: f64| {
                        let (l, r) = (x - a, b - x);
                        0.5 * xlogx(l) * l - 0.25 * l * l - 0.5 * xlogx(r) * r + 0.25 * r * r
                            - (b - a) * x
                    };
                    (anti(e[1]) - anti(e[0])) / (h * (b - a))
                } else {
                    quad::fixed(&|x| self.log_potential(x), e[0], e[1], rule) / h
                };
                vmean + lmean
            })
            .collect()
    }
}

/// A smooth density used in tests: (π/2) sin(πx) on (0, 1).
#[cfg(test)]
pub(crate) fn sine_density() -> NodeDensity {
    use std::sync::Arc;
    use std::f64::consts::PI;
    let f: RealFn = Arc::new(|x: f64| 0.5 * PI * (PI * x).sin());
    NodeDensity::new(0.0, 1.0, DensityShape::Custom(f)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn zero() -> RealFn {
        Arc::new(|_| 0.0)
    }

    #[test]
    fn uniform_field_closed_form() {
        let f = field(zero(), &NodeDensity::unit());
        for &x in &[0.1, 0.37, 0.5, 0.93] {
            let exact = x * f64::ln(x) + (1.0 - x) * f64::ln(1.0 - x) - 1.0;
            assert!((f.phi(x) - exact).abs() < 1e-15);
        }
        assert!((f.phi(0.5) + 2f64.ln() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn subtraction_matches_closed_form_for_uniform() {
        let d = NodeDensity::new(0.0, 1.0, DensityShape::Polynomial(vec![1.0])).unwrap();
        let f = field(zero(), &d);
        for &x in &[0.01, 0.4, 0.77] {
            let exact = x * f64::ln(x) + (1.0 - x) * f64::ln(1.0 - x) - 1.0;
            assert!((f.phi(x) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_density_field_against_graded_quadrature() {
        let d = sine_density();
        let f = field(zero(), &d);
        for &x in &[0.2, 0.5, 0.81] {
            let g = |y: f64| (x - y).abs().ln() * d.rho(y);
            let reference = quad::graded(&g, x, -x, 60) + quad::graded(&g, x, 1.0 - x, 60);
            assert!((f.phi(x) - reference).abs() < 1e-12, "{x}: {}", f.phi(x) - reference);
        }
        // symmetric ρ⁰ and V give a symmetric field
        assert!((f.phi(0.3) - f.phi(0.7)).abs() < 1e-12);
    }

    #[test]
    fn cell_means_of_uniform_field() {
        let f = field(zero(), &NodeDensity::unit());
        let edges: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let means = f.cell_means(&edges);
        for (i, m) in means.iter().enumerate() {
            let g = |x: f64| f.phi(x);
            let r = quad::graded(&g, edges[i], 0.05, 60) + quad::graded(&g, edges[i + 1], -0.05, 60);
            assert!((m - r / 0.1).abs() < 1e-12);
        }
    }
}
