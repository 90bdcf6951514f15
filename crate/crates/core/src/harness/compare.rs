//! Three-way comparison of current-voltage curves and cross-section profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quasi1d::IvCurve;

/// Potential and concentrations across one cross-section, sampled at `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationProfile {
    pub x: f64,
    pub xi: Vec<f64>,
    pub phi: Vec<f64>,
    pub n: Vec<f64>,
    pub p: Vec<f64>,
}

/// Results of one solver: its curve and, optionally, station profiles at a
/// single voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverRun {
    pub label: String,
    pub curve: IvCurve,
    pub stations: Vec<StationProfile>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentDiff {
    pub label: String,
    pub current: f64,
    pub abs_diff: f64,
    /// `|I - I_ref| / |I_ref|`; NaN when the reference current is zero.
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub voltage: f64,
    pub reference_current: f64,
    pub entries: Vec<CurrentDiff>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileDiff {
    pub label: String,
    pub x: f64,
    pub l2_phi: f64,
    pub l2_n: f64,
    pub l2_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub reference: String,
    pub labels: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub profiles: Vec<ProfileDiff>,
    pub runtimes: Vec<(String, f64)>,
}

impl ComparisonReport {
    /// Voltages at which `label` is strictly closer to the reference than `other`.
    pub fn closer_count(&self, label: &str, other: &str) -> usize {
        self.rows
            .iter()
            .filter(|row| {
                let d = |l: &str| row.entries.iter().find(|e| e.label == l).map(|e| e.abs_diff);
                matches!((d(label), d(other)), (Some(a), Some(b)) if a < b)
            })
            .count()
    }
}

/// Ring areas of cells centred on `xi` in the unit disc (per radian).
pub fn ring_weights(xi: &[f64]) -> Vec<f64> {
    let m = xi.len();
    let mut edges = Vec::with_capacity(m + 1);
    edges.push(0.0);
    edges.extend(xi.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    edges.push(1.0);
    edges.windows(2).map(|e| 0.5 * (e[1] * e[1] - e[0] * e[0])).collect()
}

/// Area-weighted relative L2 distance `|a - b| / |b|` over a cross-section.
pub fn relative_l2(xi: &[f64], a: &[f64], reference: &[f64]) -> f64 {
    let w = ring_weights(xi);
    let num: f64 = w.iter().zip(a.iter().zip(reference)).map(|(w, (a, b))| w * (a - b).powi(2)).sum();
    let den: f64 = w.iter().zip(reference).map(|(w, b)| w * b * b).sum();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
}

/// Compares every run in `others` against `reference`, voltage by voltage and
/// station by station.
pub fn compare(reference: &SolverRun, others: &[SolverRun]) -> Result<ComparisonReport> {
    let ref_v = reference.curve.voltages();
    for o in others {
        if !same_grid(&ref_v, &o.curve.voltages()) {
            return Err(Error::GridMismatch(format!(
                "voltages of '{}' do not match those of '{}'",
                o.label, reference.label
            )));
        }
    }
    let rows = reference
        .curve
        .points
        .iter()
        .enumerate()
        .map(|(k, rp)| {
            let i_ref = rp.current_dimensionless;
            let entries = others
                .iter()
                .map(|o| {
                    let current = o.curve.points[k].current_dimensionless;
                    let abs_diff = (current - i_ref).abs();
                    CurrentDiff { label: o.label.clone(), current, abs_diff, rel_diff: abs_diff / i_ref.abs() }
                })
                .collect();
            ReportRow { voltage: rp.voltage, reference_current: i_ref, entries }
        })
        .collect();

    let mut profiles = Vec::new();
    for o in others {
        for st in &o.stations {
            let Some(r) = reference.stations.iter().find(|r| (r.x - st.x).abs() < 1e-12) else {
                continue;
            };
            if !same_grid(&r.xi, &st.xi) {
                return Err(Error::GridMismatch(format!(
                    "radial samples of '{}' at x = {} differ from the reference",
                    o.label, st.x
                )));
            }
            profiles.push(ProfileDiff {
                label: o.label.clone(),
                x: st.x,
                l2_phi: relative_l2(&r.xi, &st.phi, &r.phi),
                l2_n: relative_l2(&r.xi, &st.n, &r.n),
                l2_p: relative_l2(&r.xi, &st.p, &r.p),
            });
        }
    }
    let runtimes = std::iter::once(reference).chain(others).map(|r| (r.label.clone(), r.runtime_s)).collect();
    Ok(ComparisonReport {
        reference: reference.label.clone(),
        labels: others.iter().map(|o| o.label.clone()).collect(),
        rows,
        profiles,
        runtimes,
    })
}

/// Cross-section stations used for profile comparisons: the three conical
/// stations sit at 5.8, 7.8 and 12.8 um of the 20 um domain.
pub fn default_stations(scenario_name: &str) -> Vec<f64> {
    if scenario_name.starts_with("conical") {
        vec![0.29, 0.39, 0.64]
    } else {
        vec![0.2, 0.5, 0.8]
    }
}
