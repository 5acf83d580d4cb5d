//! The constrained equilibrium measure: minimizer of the logarithmic
//! energy in the field φ under 0 ≤ μ ≤ ρ⁰/c and unit mass.

mod classify;
mod field;
mod solver;

pub use classify::{
    classify_intervals, edge_exponent, IntervalClassification, Segment, SegmentKind,
};
pub use field::{field, FieldPhi};
pub use solver::project_capped_simplex;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::nodes::NodeDensity;
use solver::{kernel_matrix, minimize, Problem};

pub const DEFAULT_GRID: usize = 2000;
pub const KKT_TOL: f64 = 1e-8;
pub const DEFAULT_EPS_REL: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 100_000;

/// Piecewise-constant approximation of μ^c_min on M cells of equal ρ⁰-mass.
#[derive(Clone, Debug)]
pub struct EquilibriumMeasure {
    pub c: Fraction,
    density: NodeDensity,
    /// Cell boundaries, M+1 values from a to b.
    pub edges: Vec<f64>,
    /// Cell midpoints.
    pub grid: Vec<f64>,
    /// μ(cell).
    pub mass: Vec<f64>,
    /// Upper bound of μ(cell), i.e. ρ⁰(cell)/c.
    pub cap: Vec<f64>,
    /// Density dμ/dx on each cell.
    pub psi: Vec<f64>,
    /// Cell means of the variational derivative.
    pub derivative: Vec<f64>,
    pub ell: f64,
    pub kkt_residual: f64,
    pub energy_history: Vec<f64>,
    pub iterations: usize,
    pub polished: bool,
    field: FieldPhi,
}

/// Cell boundaries with ρ⁰-mass 1/M each.
pub fn equal_mass_edges(density: &NodeDensity, m: usize) -> Result<Vec<f64>> {
    let mut edges = Vec::with_capacity(m + 1);
    edges.push(density.a());
    for i in 1..m {
        edges.push(density.inverse_cdf(i as f64 / m as f64)?);
    }
    edges.push(density.b());
    Ok(edges)
}

pub fn solve(phi: &FieldPhi, c: Fraction, m: usize) -> Result<EquilibriumMeasure> {
    solve_with(phi, c, m, KKT_TOL, MAX_ITERATIONS)
}

pub fn solve_with(
    phi: &FieldPhi,
    c: Fraction,
    m: usize,
    tol: f64,
    max_iter: usize,
) -> Result<EquilibriumMeasure> {
    if c.num() == 0 || c.num() >= c.den() {
        return Err(Error::config(format!("c = {c} must lie strictly in (0,1)")));
    }
    if m < 8 {
        return Err(Error::config("grid needs at least 8 cells"));
    }
    let cf = c.to_f64();
    let density = phi.density().clone();
    let edges = equal_mass_edges(&density, m)?;
    let grid: Vec<f64> = edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect();
    let cap = vec![1.0 / (cf * m as f64); m];
    let f = phi.cell_means(&edges);
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("field is not finite on the grid"));
    }
    let a = kernel_matrix(&edges);
    let problem = Problem {
        a: &a,
        c: cf,
        f: &f,
        cap: &cap,
    };
    let out = minimize(&problem, tol, max_iter);
    let derivative = problem.gradient(&out.m);
    let psi = out
        .m
        .iter()
        .zip(edges.windows(2))
        .map(|(v, e)| v / (e[1] - e[0]))
        .collect();
    Ok(EquilibriumMeasure {
        c,
        density,
        edges,
        grid,
        mass: out.m,
        cap,
        psi,
        derivative,
        ell: out.ell,
        kkt_residual: out.kkt,
        energy_history: out.energy_history,
        iterations: out.iterations,
        polished: out.polished,
        field: phi.clone(),
    })
}

/// ∫_{t0}^{t1} log|z−y| dy for complex z, as Re[F(z−t0) − F(z−t1)] with
/// F(u) = u log u − u.
fn cell_log_integral(z: Complex64, t0: f64, t1: f64) -> f64 {
    let f = |u: Complex64| {
        if u.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            u * u.ln() - u
        }
    };
    (f(z - t0) - f(z - t1)).re
}

impl EquilibriumMeasure {
    pub fn density(&self) -> &NodeDensity {
        &self.density
    }

    pub fn field(&self) -> &FieldPhi {
        &self.field
    }

    pub fn c_f64(&self) -> f64 {
        self.c.to_f64()
    }

    pub fn m(&self) -> usize {
        self.mass.len()
    }

    pub fn cell_of(&self, x: f64) -> usize {
        let i = self.edges.partition_point(|&e| e <= x);
        i.saturating_sub(1).min(self.m() - 1)
    }

    /// Density at x (piecewise constant).
    pub fn psi_at(&self, x: f64) -> f64 {
        self.psi[self.cell_of(x)]
    }

    /// Upper constraint ρ⁰/c on the cell containing x.
    pub fn cap_density_at(&self, x: f64) -> f64 {
        let i = self.cell_of(x);
        self.cap[i] / (self.edges[i + 1] - self.edges[i])
    }

    /// μ([a, x]).
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.edges[0] {
            return 0.0;
        }
        let i = self.cell_of(x);
        let below: f64 = self.mass[..i].iter().sum();
        below + self.psi[i] * (x.min(self.edges[i + 1]) - self.edges[i])
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// ∫ log|z−x| dμ(x) for complex z.
    pub fn log_potential(&self, z: Complex64) -> f64 {
        self.psi
            .iter()
            .zip(self.edges.windows(2))
            .filter(|(p, _)| **p != 0.0)
            .map(|(p, e)| p * cell_log_integral(z, e[0], e[1]))
            .sum()
    }

    /// −2c ∫ log|x−y| dμ(y) + φ(x).
    pub fn variational_derivative(&self, x: f64) -> f64 {
        -2.0 * self.c_f64() * self.log_potential(Complex64::new(x, 0.0)) + self.field.phi(x)
    }

    /// k ∫ log|z−x| dμ(x).
    pub fn log_transform(&self, k: usize, z: Complex64) -> f64 {
        k as f64 * self.log_potential(z)
    }

    /// Largest relative violation of 0 ≤ μ ≤ cap and of unit mass.
    pub fn feasibility_error(&self) -> f64 {
        let bounds = self
            .mass
            .iter()
            .zip(&self.cap)
            .map(|(m, u)| ((-m).max(m - u)).max(0.0) / u)
            .fold(0.0, f64::max);
        bounds.max((self.total_mass() - 1.0).abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightSpec;

    fn krawtchouk_eqm(p: f64, c: &str, m: usize) -> EquilibriumMeasure {
        let spec = WeightSpec::krawtchouk(p);
        let phi = field(spec.potential(100), &NodeDensity::unit());
        solve(&phi, c.parse().unwrap(), m).unwrap()
    }

    #[test]
    fn self_dual_krawtchouk_is_flat() {
        let e = krawtchouk_eqm(0.5, "1/2", 400);
        assert!(e.kkt_residual < 1e-8, "kkt {}", e.kkt_residual);
        assert!((e.total_mass() - 1.0).abs() < 1e-10);
        for p in &e.psi {
            assert!((p - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn symmetric_field_gives_symmetric_measure() {
        let e = krawtchouk_eqm(0.5, "1/4", 400);
        let m = e.m();
        let asym = (0..m)
            .map(|i| (e.psi[i] - e.psi[m - 1 - i]).abs())
            .fold(0.0, f64::max);
        assert!(asym < 1e-6, "asymmetry {asym}");
        assert!(e.kkt_residual < 1e-8);
    }

    #[test]
    fn energy_is_monotone() {
        let e = krawtchouk_eqm(0.9, "1/2", 300);
        for w in e.energy_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-13 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn krawtchouk_band_matches_closed_form() {
        // band of the Krawtchouk measure: (√(p(1−c)) ± √(qc))²
        let (p, c) = (0.9, 0.5);
        let e = krawtchouk_eqm(p, "1/2", 1000);
        assert!(e.kkt_residual < 1e-8);
        let lo = ((p * (1.0 - c)).sqrt() - ((1.0 - p) * c).sqrt()).powi(2);
        let hi = ((p * (1.0 - c)).sqrt() + ((1.0 - p) * c).sqrt()).powi(2);
        let cls = classify_intervals(&e, 1e-6);
        let kinds: Vec<SegmentKind> = cls.segments.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, vec![SegmentKind::Void, SegmentKind::Band, SegmentKind::Saturated]);
        assert!((cls.segments[1].left - lo).abs() < 2e-3, "{}", cls.segments[1].left);
        assert!((cls.segments[1].right - hi).abs() < 2e-3, "{}", cls.segments[1].right);
    }

    #[test]
    fn variational_derivative_signs() {
        let e = krawtchouk_eqm(0.9, "1/2", 1000);
        assert!((e.variational_derivative(0.5) - e.ell).abs() < 1e-5);
        assert!(e.variational_derivative(0.1) > e.ell);
        assert!(e.variational_derivative(0.9) < e.ell);
    }

    #[test]
    fn log_transform_far_field() {
        let e = krawtchouk_eqm(0.7, "1/3", 300);
        let k = 10;
        let mut devs = Vec::new();
        for r in [1e2, 1e3, 1e4] {
            let z = Complex64::new(0.5 + r, 0.0);
            devs.push((e.log_transform(k, z) - k as f64 * (z - 0.5).norm().ln()).abs());
        }
        assert!(devs[2] < devs[1] && devs[1] < devs[0]);
        let z = Complex64::new(0.3, 0.4);
        assert!((e.log_transform(2 * k, z) - 2.0 * e.log_transform(k, z)).abs() < 1e-12);
    }

    #[test]
    fn rejects_improper_ratio() {
        let phi = field(WeightSpec::krawtchouk(0.5).potential(10), &NodeDensity::unit());
        let err = solve(&phi, Fraction::new(3, 2).unwrap(), 100).unwrap_err();
        assert!(err.is_config());
    }
}
