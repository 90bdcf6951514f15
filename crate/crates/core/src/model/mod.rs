//! Physical constants, scenario definition, geometry and scaling shared by all solvers.

mod charge;
mod constants;
mod file;
mod geometry;
mod scenario;

pub use charge::SurfaceChargeProfile;
pub use constants::{Electrolyte, PhysicalConstants, MOLAR, NANOMETER};
pub use file::{BoundarySection, ElectrolyteSection, GeometrySection, NumericsSection, ScenarioFile};
pub use geometry::{BathRegions, PoreGeometry, RadiusProfile};
pub use scenario::{beta_lambda, local_beta_lambda, nondimensionalize, BoundaryConditions, DimensionlessParams, PoreScenario};
