use serde::{Deserialize, Serialize};

use super::charge::SurfaceChargeProfile;
use super::constants::{Electrolyte, PhysicalConstants};
use super::geometry::PoreGeometry;
use crate::error::{Error, Result};

/// Applied voltage (V) and bath concentrations (mol/m^3). The left electrode is
/// grounded; `v_applied` is the right electrode potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConditions {
    pub v_applied: f64,
    pub conc_left_n: f64,
    pub conc_left_p: f64,
    pub conc_right_n: f64,
    pub conc_right_p: f64,
}

impl BoundaryConditions {
    pub fn validate(&self) -> Result<()> {
        let c = [
            (self.conc_left_n, "conc_left_n"),
            (self.conc_left_p, "conc_left_p"),
            (self.conc_right_n, "conc_right_n"),
            (self.conc_right_p, "conc_right_p"),
        ];
        for (v, name) in c {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveInput(name));
            }
        }
        if !self.v_applied.is_finite() {
            return Err(Error::Config("applied voltage must be finite".into()));
        }
        if self.conc_left_n != self.conc_left_p || self.conc_right_n != self.conc_right_p {
            log::warn!("bath concentrations are not electroneutral (p != n at a bath)");
        }
        Ok(())
    }

    pub fn is_symmetric(&self) -> bool {
        self.conc_left_n == self.conc_right_n && self.conc_left_p == self.conc_right_p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoreScenario {
    pub name: String,
    pub constants: PhysicalConstants,
    pub electrolyte: Electrolyte,
    pub geometry: PoreGeometry,
    /// Wall charge in C/m^2, positions in m from the left domain end.
    pub surface_charge: SurfaceChargeProfile,
    pub bc: BoundaryConditions,
    /// Explicit wall-charge strength replacing the value computed from the
    /// physical constants.
    pub upsilon_override: Option<f64>,
}

impl PoreScenario {
    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        self.electrolyte.validate()?;
        self.geometry.validate()?;
        self.surface_charge.validate()?;
        self.bc.validate()
    }

    /// Dimensionless radius at normalized domain coordinate `x`.
    pub fn radius(&self, x: f64) -> Result<f64> {
        self.geometry.eval_radius(x)
    }

    /// Dimensionless wall charge (units of the charge scale) at `x`.
    pub fn sigma(&self, x: f64) -> f64 {
        self.surface_charge.eval(x * self.geometry.total_length())
            / self.electrolyte.surface_charge_scale_sigmabar
    }

    pub fn with_voltage(&self, v: f64) -> Self {
        let mut s = self.clone();
        s.bc.v_applied = v;
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    /// Aspect ratio R0 / L (L the full domain length).
    pub delta: f64,
    /// Debye length over R0.
    pub lambda_cap: f64,
    /// Wall charge strength R0 sigmabar / (eps V_T).
    pub upsilon: f64,
    pub kappa_p: f64,
    pub kappa_n: f64,
    /// m
    pub debye_length: f64,
    /// V
    pub thermal_voltage: f64,
    /// mol/m^3
    pub conc_scale: f64,
    /// A per unit dimensionless current.
    pub current_scale: f64,
    /// m
    pub length: f64,
    /// m
    pub radius_scale: f64,
}

impl DimensionlessParams {
    /// Upsilon computed from the physical data, ignoring any override.
    pub fn physical_upsilon(scenario: &PoreScenario) -> f64 {
        let c = &scenario.constants;
        scenario.geometry.radius_scale_r0 * scenario.electrolyte.surface_charge_scale_sigmabar
            / (c.permittivity() * c.thermal_voltage)
    }

    /// Dimensionless right-electrode potential.
    pub fn phi_right(&self, v_applied: f64) -> f64 {
        v_applied / self.thermal_voltage
    }
}

pub fn nondimensionalize(scenario: &PoreScenario) -> Result<DimensionlessParams> {
    scenario.validate()?;
    let c = &scenario.constants;
    let e = &scenario.electrolyte;
    let g = &scenario.geometry;
    let length = g.total_length();
    let r0 = g.radius_scale_r0;
    let debye_length = (c.permittivity() * c.thermal_voltage / (e.conc_scale_cbar * c.faraday)).sqrt();
    let computed = DimensionlessParams::physical_upsilon(scenario);
    let upsilon = match scenario.upsilon_override {
        Some(u) => {
            if !u.is_finite() {
                return Err(Error::Config("upsilon override must be finite".into()));
            }
            if ((u - computed) / computed).abs() > 0.01 {
                log::warn!(
                    "upsilon override {u} differs from the value {computed:.4} implied by R0, sigmabar, eps and V_T"
                );
            }
            u
        }
        None => computed,
    };
    Ok(DimensionlessParams {
        delta: r0 / length,
        lambda_cap: debye_length / r0,
        upsilon,
        kappa_p: e.kappa_p(),
        kappa_n: e.kappa_n(),
        debye_length,
        thermal_voltage: c.thermal_voltage,
        conc_scale: e.conc_scale_cbar,
        current_scale: c.faraday * e.diff_ref * e.conc_scale_cbar * r0 * r0 / length,
        length,
        radius_scale: r0,
    })
}

/// Local Debye ratio and wall-flux parameter from the local radius, charge and
/// the product of the axial Boltzmann prefactors.
pub fn beta_lambda(params: &DimensionlessParams, radius: f64, sigma: f64, qs: f64) -> Result<(f64, f64)> {
    if !(qs > 0.0) {
        return Err(Error::NonPositiveConcentration { node: 0, value: qs });
    }
    let lambda = params.lambda_cap / (radius * qs.sqrt().sqrt());
    Ok((lambda, params.upsilon * sigma * radius))
}

pub fn local_beta_lambda(params: &DimensionlessParams, scenario: &PoreScenario, x: f64, qs: f64) -> Result<(f64, f64)> {
    let r = scenario.radius(x)?;
    beta_lambda(params, r, scenario.sigma(x), qs)
}
