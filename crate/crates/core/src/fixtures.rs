//! Built-in scenarios. Each is defined in file units so that the shipped
//! scenario files can be regenerated from here byte for byte.

use crate::error::{Error, Result};
use crate::model::{
    BoundarySection, ElectrolyteSection, GeometrySection, NumericsSection, PhysicalConstants, PoreScenario,
    RadiusProfile, ScenarioFile, SurfaceChargeProfile,
};

pub const BUILTIN_NAMES: [&str; 5] = ["trumpet", "trumpet_weak", "conical", "cylinder", "cylinder_charged"];

fn electrolyte() -> ElectrolyteSection {
    ElectrolyteSection {
        diff_p: 1.33e-9,
        diff_n: 0.79e-9,
        diff_ref: 1e-9,
        conc_scale: 0.1,
        surface_charge_scale: 1.0,
        upsilon_override: None,
    }
}

fn baths(voltage: f64) -> BoundarySection {
    BoundarySection { voltage, n_left: 0.1, p_left: 0.1, n_right: 0.1, p_right: 0.1 }
}

/// 1000 nm pore narrowing parabolically from 10 nm to a 1.5 nm neck, charged
/// on 100 nm < x < 900 nm.
pub fn trumpet_file(sigma: f64) -> ScenarioFile {
    ScenarioFile {
        name: if sigma == 1.0 { "trumpet".into() } else { format!("trumpet_sigma_{sigma}") },
        constants: PhysicalConstants::default(),
        electrolyte: electrolyte(),
        geometry: GeometrySection {
            length: 1000.0,
            radius_scale: 1.0,
            bath_length: None,
            bath_radius_factor: None,
            profile: RadiusProfile::Trumpet { mouth: 10.0, neck: 1.5 },
        },
        surface_charge: SurfaceChargeProfile::Band { start: 100.0, end: 900.0, value: sigma },
        boundary: baths(0.2),
        numerics: Some(NumericsSection {
            axial_intervals: Some(1000),
            axial_grading: None,
            nx_2d: Some(256),
            nr_2d: Some(64),
            grading_2d: Some(1.06),
        }),
    }
}

/// 10 um conical pore (1.5 nm tip on the left, 10 nm base on the right) with
/// 5 um bath regions on both sides; only the pore wall is charged.
pub fn conical_file() -> ScenarioFile {
    ScenarioFile {
        name: "conical".into(),
        constants: PhysicalConstants::default(),
        electrolyte: electrolyte(),
        geometry: GeometrySection {
            length: 10_000.0,
            radius_scale: 1.0,
            bath_length: Some(5000.0),
            bath_radius_factor: Some(5.0),
            profile: RadiusProfile::Conical { left: 1.5, right: 10.0 },
        },
        surface_charge: SurfaceChargeProfile::Band { start: 5000.0, end: 15_000.0, value: 1.0 },
        boundary: baths(0.2),
        numerics: Some(NumericsSection {
            axial_intervals: Some(2000),
            // resolves the layer where the charged tip meets the bath
            axial_grading: Some(1.0),
            nx_2d: Some(512),
            nr_2d: Some(48),
            grading_2d: Some(1.08),
        }),
    }
}

/// Straight 1000 nm pore of radius 5 nm; optionally charged on the central
/// half (250 nm < x < 750 nm), which keeps it mirror symmetric.
pub fn cylinder_file(sigma: f64) -> ScenarioFile {
    ScenarioFile {
        name: if sigma == 0.0 { "cylinder".into() } else { "cylinder_charged".into() },
        constants: PhysicalConstants::default(),
        electrolyte: electrolyte(),
        geometry: GeometrySection {
            length: 1000.0,
            radius_scale: 1.0,
            bath_length: None,
            bath_radius_factor: None,
            profile: RadiusProfile::Cylindrical { radius: 5.0 },
        },
        surface_charge: if sigma == 0.0 {
            SurfaceChargeProfile::Zero
        } else {
            SurfaceChargeProfile::Band { start: 250.0, end: 750.0, value: sigma }
        },
        boundary: baths(0.05),
        numerics: Some(NumericsSection {
            axial_intervals: Some(1000),
            axial_grading: None,
            nx_2d: Some(128),
            nr_2d: Some(32),
            grading_2d: Some(1.08),
        }),
    }
}

pub fn builtin_file(name: &str) -> Result<ScenarioFile> {
    let mut f = match name {
        "trumpet" => trumpet_file(1.0),
        "trumpet_weak" => trumpet_file(0.2),
        "conical" => conical_file(),
        "cylinder" => cylinder_file(0.0),
        "cylinder_charged" => cylinder_file(0.5),
        _ => return Err(Error::Config(format!("unknown built-in scenario '{name}'"))),
    };
    f.name = name.to_string();
    Ok(f)
}

pub fn builtin(name: &str) -> Result<PoreScenario> {
    builtin_file(name)?.to_scenario()
}

pub fn trumpet(sigma: f64) -> PoreScenario {
    trumpet_file(sigma).to_scenario().expect("valid fixture")
}

pub fn conical() -> PoreScenario {
    conical_file().to_scenario().expect("valid fixture")
}

pub fn cylinder(sigma: f64) -> PoreScenario {
    cylinder_file(sigma).to_scenario().expect("valid fixture")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_builtins_are_valid_and_round_trip() {
        for name in BUILTIN_NAMES {
            let f = builtin_file(name).unwrap();
            f.to_scenario().unwrap();
            let text = f.to_toml_string().unwrap();
            assert_eq!(ScenarioFile::from_toml_str(&text).unwrap(), f);
        }
    }

    #[test]
    fn conical_stations() {
        let s = conical();
        assert!((s.geometry.total_length() - 20e-6).abs() < 1e-18);
        assert!((s.radius(0.25).unwrap() - 1.5).abs() < 1e-12);
        assert!((s.radius(0.75).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(s.sigma(0.2), 0.0);
        assert!((s.sigma(0.5) - 1.0).abs() < 1e-12);
    }
}
