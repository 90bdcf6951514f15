use rayon::prelude::*;

use super::QuasiSolution;
use crate::error::{Error, Result};
use crate::model::PoreScenario;
use crate::radial::{solve_psi, RadialProblem, RadialProfile};

/// Potential and concentrations on an (x, xi) tensor grid, stored with the
/// radial index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedFields {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    /// Wall radius at each axial node (units of R0).
    pub radius: Vec<f64>,
    pub phi: Vec<f64>,
    pub n: Vec<f64>,
    pub p: Vec<f64>,
}

impl ReconstructedFields {
    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.xi.len() + k
    }

    /// Radial coordinate (units of R0) of sample `(i, k)`.
    pub fn r(&self, i: usize, k: usize) -> f64 {
        self.radius[i] * self.xi[k]
    }
}

fn radial_profile(lambda: f64, beta: f64) -> Result<Option<RadialProfile>> {
    if beta == 0.0 {
        return Ok(None);
    }
    solve_psi(&RadialProblem::new(lambda, beta)).map(Some)
}

fn fill(profile: &Option<RadialProfile>, q: f64, s: f64, xi: &[f64], phi: &mut [f64], n: &mut [f64], p: &mut [f64]) {
    let c = (q * s).sqrt();
    let base = 0.5 * (s / q).ln();
    for (k, &x) in xi.iter().enumerate() {
        let psi = profile.as_ref().map_or(0.0, |pr| pr.psi_at(x));
        phi[k] = base + psi;
        n[k] = c * psi.exp();
        p[k] = c * (-psi).exp();
    }
}

/// Solves the radial problem at every axial node and assembles
/// `n = sqrt(QS) e^psi`, `p = sqrt(QS) e^-psi`, `phi = ln sqrt(S/Q) + psi`
/// on `radial_resolution` equally spaced values of xi.
pub fn reconstruct_fields(
    solution: &QuasiSolution,
    scenario: &PoreScenario,
    radial_resolution: usize,
) -> Result<ReconstructedFields> {
    if radial_resolution < 2 {
        return Err(Error::Config("radial resolution must be >= 2".into()));
    }
    let m = radial_resolution;
    let xi: Vec<f64> = (0..m).map(|k| k as f64 / (m - 1) as f64).collect();
    let nx = solution.x.len();
    let profiles: Vec<Option<RadialProfile>> = (0..nx)
        .into_par_iter()
        .map(|i| radial_profile(solution.lambda[i], solution.beta[i]))
        .collect::<Result<_>>()?;
    let mut phi = vec![0.0; nx * m];
    let mut n = vec![0.0; nx * m];
    let mut p = vec![0.0; nx * m];
    for i in 0..nx {
        let r = i * m..(i + 1) * m;
        fill(&profiles[i], solution.q[i], solution.s[i], &xi, &mut phi[r.clone()], &mut n[r.clone()], &mut p[r]);
    }
    let radius = solution.x.iter().map(|&x| scenario.radius(x)).collect::<Result<_>>()?;
    Ok(ReconstructedFields { x: solution.x.clone(), xi, radius, phi, n, p })
}

/// Cross-section profile at an arbitrary station: Q and S interpolated
/// linearly between nodes, then a fresh radial solve.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub xi: Vec<f64>,
    pub phi: Vec<f64>,
    pub n: Vec<f64>,
    pub p: Vec<f64>,
}

pub fn cross_section(
    solution: &QuasiSolution,
    scenario: &PoreScenario,
    params: &crate::model::DimensionlessParams,
    x: f64,
    xi: &[f64],
) -> Result<CrossSection> {
    let xs = &solution.x;
    let k = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1) - 1;
    let t = ((x - xs[k]) / (xs[k + 1] - xs[k])).clamp(0.0, 1.0);
    let q = solution.q[k] * (1.0 - t) + solution.q[k + 1] * t;
    let s = solution.s[k] * (1.0 - t) + solution.s[k + 1] * t;
    let (lambda, beta) = crate::model::local_beta_lambda(params, scenario, x, q * s)?;
    let profile = radial_profile(lambda, beta)?;
    let m = xi.len();
    let mut out = CrossSection { xi: xi.to_vec(), phi: vec![0.0; m], n: vec![0.0; m], p: vec![0.0; m] };
    fill(&profile, q, s, xi, &mut out.phi, &mut out.n, &mut out.p);
    Ok(out)
}
