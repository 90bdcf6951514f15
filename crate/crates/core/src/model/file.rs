//! On-disk scenario format (TOML). Lengths in nm, concentrations in mol/L,
//! voltage in V, surface charge in e/nm^2, diffusivities in m^2/s.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::charge::SurfaceChargeProfile;
use super::constants::{Electrolyte, PhysicalConstants, MOLAR, NANOMETER};
use super::geometry::{BathRegions, PoreGeometry, RadiusProfile};
use super::scenario::{BoundaryConditions, PoreScenario};
use crate::error::{Error, Result};

fn is_default_constants(c: &PhysicalConstants) -> bool {
    *c == PhysicalConstants::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    /// Omitted from written files while it holds the defaults.
    #[serde(default, skip_serializing_if = "is_default_constants")]
    pub constants: PhysicalConstants,
    pub electrolyte: ElectrolyteSection,
    pub geometry: GeometrySection,
    pub surface_charge: SurfaceChargeProfile,
    pub boundary: BoundarySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerics: Option<NumericsSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrolyteSection {
    pub diff_p: f64,
    pub diff_n: f64,
    pub diff_ref: f64,
    /// mol/L
    pub conc_scale: f64,
    /// e/nm^2
    pub surface_charge_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upsilon_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    /// Pore section length, nm.
    pub length: f64,
    /// nm
    pub radius_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath_radius_factor: Option<f64>,
    /// Radii in nm.
    pub profile: RadiusProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub voltage: f64,
    pub n_left: f64,
    pub p_left: f64,
    pub n_right: f64,
    pub p_right: f64,
}

/// Default grid sizes for the solvers; each may be overridden on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axial_intervals: Option<usize>,
    /// Axial node density of the 1D solvers grows like `R^-axial_grading`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axial_grading: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx_2d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nr_2d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grading_2d: Option<f64>,
}

const DEFAULT_BATH_FACTOR: f64 = 5.0;

fn scale_profile(p: &RadiusProfile, f: f64) -> RadiusProfile {
    match p {
        RadiusProfile::Trumpet { mouth, neck } => RadiusProfile::Trumpet { mouth: mouth * f, neck: neck * f },
        RadiusProfile::Conical { left, right } => RadiusProfile::Conical { left: left * f, right: right * f },
        RadiusProfile::Cylindrical { radius } => RadiusProfile::Cylindrical { radius: radius * f },
        RadiusProfile::Table { s, radius } => RadiusProfile::Table {
            s: s.clone(),
            radius: radius.iter().map(|r| r * f).collect(),
        },
    }
}

impl ScenarioFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("scenario parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("scenario serialization error: {e}")))
    }

    pub fn to_scenario(&self) -> Result<PoreScenario> {
        let c = self.constants.clone();
        let e = &self.electrolyte;
        let g = &self.geometry;
        let baths = match (g.bath_length, g.bath_radius_factor) {
            (None, None) => None,
            (Some(len), factor) => Some(BathRegions {
                length: len * NANOMETER,
                radius_factor: factor.unwrap_or(DEFAULT_BATH_FACTOR),
            }),
            (None, Some(_)) => return Err(Error::Config("bath_radius_factor given without bath_length".into())),
        };
        let charge_unit = c.elementary_charge / (NANOMETER * NANOMETER);
        let b = &self.boundary;
        let scenario = PoreScenario {
            name: self.name.clone(),
            electrolyte: Electrolyte {
                diff_p: e.diff_p,
                diff_n: e.diff_n,
                diff_ref: e.diff_ref,
                conc_scale_cbar: e.conc_scale * MOLAR,
                surface_charge_scale_sigmabar: e.surface_charge_scale * charge_unit,
            },
            geometry: PoreGeometry {
                length_l: g.length * NANOMETER,
                radius_scale_r0: g.radius_scale * NANOMETER,
                profile: scale_profile(&g.profile, NANOMETER),
                baths,
            },
            surface_charge: self.surface_charge.scaled(NANOMETER, charge_unit),
            bc: BoundaryConditions {
                v_applied: b.voltage,
                conc_left_n: b.n_left * MOLAR,
                conc_left_p: b.p_left * MOLAR,
                conc_right_n: b.n_right * MOLAR,
                conc_right_p: b.p_right * MOLAR,
            },
            upsilon_override: e.upsilon_override,
            constants: c,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
name = "demo"

[electrolyte]
diff_p = 1.33e-9
diff_n = 0.79e-9
diff_ref = 1e-9
conc_scale = 0.1
surface_charge_scale = 1.0

[geometry]
length = 1000.0
radius_scale = 1.0
profile = { kind = "cylindrical", radius = 5.0 }

[surface_charge]
kind = "band"
start = 100.0
end = 900.0
value = -0.5

[boundary]
voltage = 0.1
n_left = 0.1
p_left = 0.1
n_right = 0.1
p_right = 0.1
"#;

    #[test]
    fn parses_and_converts_units() {
        let f = ScenarioFile::from_toml_str(TEXT).unwrap();
        let s = f.to_scenario().unwrap();
        assert_eq!(s.constants, PhysicalConstants::default());
        assert!((s.geometry.length_l - 1e-6).abs() < 1e-20);
        assert!((s.radius(0.3).unwrap() - 5.0).abs() < 1e-12);
        assert!((s.bc.conc_left_n - 100.0).abs() < 1e-12);
        assert!((s.sigma(0.5) + 0.5).abs() < 1e-12);
        assert_eq!(s.sigma(0.05), 0.0);
    }

    #[test]
    fn round_trips_through_text() {
        let f = ScenarioFile::from_toml_str(TEXT).unwrap();
        let text = f.to_toml_string().unwrap();
        assert_eq!(ScenarioFile::from_toml_str(&text).unwrap(), f);
    }

    #[test]
    fn unknown_field_is_config_error() {
        let bad = TEXT.replace("conc_scale = 0.1", "conc_scale = 0.1\nbogus = 1");
        assert!(matches!(ScenarioFile::from_toml_str(&bad), Err(Error::Config(_))));
    }
}
