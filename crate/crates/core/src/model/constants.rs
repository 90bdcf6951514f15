use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants in SI units. Defaults follow the usual room-temperature
/// aqueous setup (T = 300 K, water permittivity 78.4, V_T rounded to 25 mV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalConstants {
    /// J/K
    pub boltzmann_k: f64,
    /// K
    pub temperature: f64,
    /// C/(V m)
    pub vacuum_permittivity: f64,
    pub relative_permittivity: f64,
    /// C
    pub elementary_charge: f64,
    /// C/mol
    pub faraday: f64,
    /// Configured thermal voltage in V. Used by every solver; see
    /// [`PhysicalConstants::thermal_voltage_kt`] for the value implied by k T / e.
    pub thermal_voltage: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            boltzmann_k: 1.380_650_4e-23,
            temperature: 300.0,
            vacuum_permittivity: 8.854_187_817e-12,
            relative_permittivity: 78.4,
            elementary_charge: 1.602_176e-19,
            faraday: 96_485.0,
            thermal_voltage: 0.025,
        }
    }
}

impl PhysicalConstants {
    /// Electrolyte permittivity eps0 * eps_r.
    pub fn permittivity(&self) -> f64 {
        self.vacuum_permittivity * self.relative_permittivity
    }

    /// k T / e, the thermal voltage implied by the other constants.
    pub fn thermal_voltage_kt(&self) -> f64 {
        self.boltzmann_k * self.temperature / self.elementary_charge
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            (self.boltzmann_k, "boltzmann_k"),
            (self.temperature, "temperature"),
            (self.vacuum_permittivity, "vacuum_permittivity"),
            (self.relative_permittivity, "relative_permittivity"),
            (self.elementary_charge, "elementary_charge"),
            (self.faraday, "faraday"),
            (self.thermal_voltage, "thermal_voltage"),
        ];
        for (v, name) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveInput(name));
            }
        }
        Ok(())
    }
}

/// Transport and scaling data of a 1:1 electrolyte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Electrolyte {
    /// m^2/s
    pub diff_p: f64,
    /// m^2/s
    pub diff_n: f64,
    /// Reference diffusivity used for the current scale, m^2/s.
    pub diff_ref: f64,
    /// Concentration scale, mol/m^3.
    pub conc_scale_cbar: f64,
    /// Surface charge scale, C/m^2.
    pub surface_charge_scale_sigmabar: f64,
}

impl Electrolyte {
    pub fn kappa_p(&self) -> f64 {
        self.diff_p / self.diff_ref
    }

    pub fn kappa_n(&self) -> f64 {
        self.diff_n / self.diff_ref
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            (self.diff_p, "diff_p"),
            (self.diff_n, "diff_n"),
            (self.diff_ref, "diff_ref"),
            (self.conc_scale_cbar, "conc_scale_cbar"),
            (self.surface_charge_scale_sigmabar, "surface_charge_scale_sigmabar"),
        ];
        for (v, name) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveInput(name));
            }
        }
        Ok(())
    }
}

/// mol/L to mol/m^3.
pub const MOLAR: f64 = 1000.0;
/// nm to m.
pub const NANOMETER: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_constants_are_valid() {
        let c = PhysicalConstants::default();
        c.validate().unwrap();
        // k T / e at 300 K is ~25.85 mV; the configured value is the rounded 25 mV
        assert!((c.thermal_voltage_kt() - 0.025_852).abs() < 1e-5);
        assert_eq!(c.thermal_voltage, 0.025);
    }

    #[test]
    fn zero_temperature_rejected() {
        let c = PhysicalConstants { temperature: 0.0, ..Default::default() };
        assert!(matches!(c.validate(), Err(Error::NonPositiveInput("temperature"))));
    }
}
