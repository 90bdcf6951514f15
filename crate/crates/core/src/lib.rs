//! Steady ion transport through long, charged, axisymmetric nanopores.
//!
//! Three solvers share one scenario description: a reduced axial model whose
//! coefficients carry the radial Debye-layer structure ([`quasi1d`]), a plain
//! area-averaged drift-diffusion model ([`area1d`]) and a 2D axisymmetric
//! Poisson-Nernst-Planck reference solver ([`pnp2d`]).

pub mod error;
pub mod linalg;
pub mod model;
pub mod radial;
pub mod gfuncs;
pub mod quasi1d;
pub mod area1d;
pub mod pnp2d;
pub mod fixtures;
pub mod harness;

pub use error::{Error, Result};
