//! CSV writers. Numbers use the shortest round-trip scientific notation so
//! reruns are byte-identical.

use std::path::Path;

use super::compare::{ComparisonReport, StationProfile};
use crate::area1d::AreaAveragedSolution;
use crate::error::Result;
use crate::model::PoreScenario;
use crate::pnp2d::Field2D;
use crate::quasi1d::{IvCurve, QuasiSolution, ReconstructedFields};

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_iv(path: &Path, curve: &IvCurve) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["voltage", "current", "current_a", "iterations", "residual", "converged"])?;
    for p in &curve.points {
        w.write_record([
            num(p.voltage),
            num(p.current_dimensionless),
            num(p.current_a),
            p.iterations.to_string(),
            num(p.residual),
            p.converged().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Axial profile of the quasi-1D solution.
pub fn write_axial(path: &Path, sol: &QuasiSolution, scenario: &PoreScenario) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["x", "radius", "sigma", "q", "s", "mu_e", "phi_tilde", "g1", "g2", "lambda", "beta"])?;
    let (mu, ft) = (sol.mu_e(), sol.phi_tilde());
    for i in 0..sol.x.len() {
        let x = sol.x[i];
        w.write_record([
            num(x),
            num(scenario.radius(x)?),
            num(scenario.sigma(x)),
            num(sol.q[i]),
            num(sol.s[i]),
            num(mu[i]),
            num(ft[i]),
            num(sol.g1[i]),
            num(sol.g2[i]),
            num(sol.lambda[i]),
            num(sol.beta[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_axial_area(path: &Path, sol: &AreaAveragedSolution) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["x", "phi", "n", "p"])?;
    for i in 0..sol.x.len() {
        w.write_record([num(sol.x[i]), num(sol.phi[i]), num(sol.n[i]), num(sol.p[i])])?;
    }
    w.flush()?;
    Ok(())
}

/// Reconstructed quasi-1D fields in long format.
pub fn write_fields(path: &Path, f: &ReconstructedFields) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["x", "r", "phi", "n", "p"])?;
    for i in 0..f.x.len() {
        for k in 0..f.xi.len() {
            let idx = f.index(i, k);
            w.write_record([num(f.x[i]), num(f.r(i, k)), num(f.phi[idx]), num(f.n[idx]), num(f.p[idx])])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// 2D cell values in long format.
pub fn write_fields2d(path: &Path, f: &Field2D) -> Result<()> {
    let m = &f.mesh;
    let mut w = writer(path)?;
    w.write_record(["x", "r", "phi", "n", "p"])?;
    for i in 0..m.nx {
        for j in 0..m.nr {
            let k = m.index(i, j);
            w.write_record([num(m.x_centers[i]), num(m.r(i, j)), num(f.phi[k]), num(f.n[k]), num(f.p[k])])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_current_profile(path: &Path, f: &Field2D) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["x", "current"])?;
    for (x, c) in f.mesh.x_faces.iter().zip(&f.current_profile) {
        w.write_record([num(*x), num(*c)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report(path: &Path, report: &ComparisonReport) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["voltage".to_string(), format!("current_{}", report.reference)];
    for l in &report.labels {
        header.extend([format!("current_{l}"), format!("absdiff_{l}"), format!("reldiff_{l}")]);
    }
    w.write_record(&header)?;
    for row in &report.rows {
        let mut rec = vec![num(row.voltage), num(row.reference_current)];
        for e in &row.entries {
            rec.extend([num(e.current), num(e.abs_diff), num(e.rel_diff)]);
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile_report(path: &Path, report: &ComparisonReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["solver", "x", "l2_phi", "l2_n", "l2_p"])?;
    for d in &report.profiles {
        w.write_record([d.label.clone(), num(d.x), num(d.l2_phi), num(d.l2_n), num(d.l2_p)])?;
    }
    w.flush()?;
    Ok(())
}

/// Station profiles of several solvers in long format, radius in R0 units.
pub fn write_cross_sections(path: &Path, runs: &[(&str, &[StationProfile], Vec<f64>)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["solver", "x", "r", "phi", "n", "p"])?;
    for (label, stations, radii) in runs {
        for (st, radius) in stations.iter().zip(radii) {
            for k in 0..st.xi.len() {
                w.write_record([
                    label.to_string(),
                    num(st.x),
                    num(st.xi[k] * radius),
                    num(st.phi[k]),
                    num(st.n[k]),
                    num(st.p[k]),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Table of the closed-form G approximations against the radial solve.
pub fn write_g_table<W: std::io::Write>(out: W, rows: &[crate::gfuncs::GTableRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "g1_large", "g1_small", "g1_smooth", "g1_oracle", "g2"])?;
    for r in rows {
        w.write_record([num(r.lambda), num(r.g1_large), num(r.g1_small), num(r.g1_smooth), num(r.g1_oracle), num(r.g2)])?;
    }
    w.flush()?;
    Ok(())
}
