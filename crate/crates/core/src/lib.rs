//! Discrete orthogonal polynomials on general node sets, constrained
//! equilibrium measures, and the determinantal ensembles built on them.

pub mod ensembles;
pub mod equilibrium;
pub mod error;
pub mod fraction;
pub mod harness;
pub mod kernels;
pub mod mp;
pub mod nodes;
pub mod oracle;
pub mod orthopoly;
pub mod quad;
pub mod tiling;
pub mod weights;

pub use error::{Error, Result};
pub use fraction::Fraction;
