//! The shipped scenario files match the built-in fixtures and load cleanly.

use nanopnp::fixtures;
use nanopnp::model::ScenarioFile;

const SHIPPED: [(&str, &str); 5] = [
    ("trumpet", include_str!("../../../scenarios/trumpet.toml")),
    ("trumpet_weak", include_str!("../../../scenarios/trumpet_weak.toml")),
    ("conical", include_str!("../../../scenarios/conical.toml")),
    ("cylinder", include_str!("../../../scenarios/cylinder.toml")),
    ("cylinder_charged", include_str!("../../../scenarios/cylinder_charged.toml")),
];

#[test]
fn shipped_files_match_builtins() {
    for (name, text) in SHIPPED {
        let builtin = fixtures::builtin_file(name).unwrap();
        assert_eq!(builtin.to_toml_string().unwrap(), text, "{name}");
        assert_eq!(ScenarioFile::from_toml_str(text).unwrap(), builtin, "{name}");
    }
}

#[test]
fn every_builtin_is_shipped() {
    let names: Vec<&str> = SHIPPED.iter().map(|(n, _)| *n).collect();
    assert_eq!(names, fixtures::BUILTIN_NAMES);
}

#[test]
fn shipped_files_build_scenarios() {
    for (name, text) in SHIPPED {
        let s = ScenarioFile::from_toml_str(text).unwrap().to_scenario().unwrap();
        assert!(s.bc.is_symmetric(), "{name}");
        let nd = nanopnp::model::nondimensionalize(&s).unwrap();
        assert!(nd.delta > 0.0 && nd.delta < 1.0, "{name}");
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let text = SHIPPED[0].1.replace("neck = 1.5", "neck = 1.5\nthroat = 2.0");
    assert!(ScenarioFile::from_toml_str(&text).is_err());
}
