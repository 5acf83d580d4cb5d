//! The common chain weights → basis → equilibrium measure for one (N, k).

use dopkit::equilibrium::{
    classify_intervals, field, solve, EquilibriumMeasure, IntervalClassification, DEFAULT_EPS_REL,
};
use dopkit::nodes::{build_nodes, NodeDensity};
use dopkit::orthopoly::{build_basis_ladder, OrthoBasis};
use dopkit::weights::{log_weight, LogWeights, WeightSpec};
use dopkit::{Fraction, Result};

pub fn weights(spec: &WeightSpec, density: &NodeDensity, n: usize) -> Result<LogWeights> {
    log_weight(spec, &build_nodes(density, n)?)
}

/// Equilibrium measure for the field of `spec` with `n` nodes at ratio c.
pub fn equilibrium(
    spec: &WeightSpec,
    density: &NodeDensity,
    n: usize,
    c: Fraction,
    grid: usize,
) -> Result<(EquilibriumMeasure, IntervalClassification)> {
    let eqm = solve(&field(spec.potential(n), density), c, grid)?;
    let cls = classify_intervals(&eqm, DEFAULT_EPS_REL);
    Ok((eqm, cls))
}

pub struct Prepared {
    pub n: usize,
    pub k: usize,
    pub basis: OrthoBasis,
    pub eqm: EquilibriumMeasure,
    pub cls: IntervalClassification,
}

/// Everything needed for degree k = cN; `full` builds the basis up to
/// N−1 (needed for accurate 1 − K near saturated regions).
pub fn prepare(
    spec: &WeightSpec,
    density: &NodeDensity,
    n: usize,
    c: Fraction,
    grid: usize,
    bits: u32,
    full: bool,
) -> Result<Prepared> {
    let k = c.degree_for(n)?;
    let lw = weights(spec, density, n)?;
    let basis = build_basis_ladder(&lw, if full { n - 1 } else { k }, bits)?;
    let (eqm, cls) = equilibrium(spec, density, n, c, grid)?;
    Ok(Prepared {
        n,
        k,
        basis,
        eqm,
        cls,
    })
}
