//! Reduced axial model. Each station carries Boltzmann prefactors `Q` (anions)
//! and `S` (cations) with `n = Q e^phi`, `p = S e^-phi`; the cross-sectional
//! Debye-layer structure enters only through the moments `g1`, `g2`.
//!
//! The steady state solves the two conservation laws
//! `(theta1 S')' = 0`, `(theta2 Q')' = 0` with
//! `theta1 = A sqrt(Q/S) g1`, `theta2 = A sqrt(S/Q) g2`, by a fixed-point
//! iteration on the coefficients.

mod fields;
mod grid;
mod muphi;
mod sweep;

pub use fields::{cross_section, reconstruct_fields, CrossSection, ReconstructedFields};
pub use grid::AxialGrid;
pub use muphi::{solve_steady_mu_phi, MuPhiSolution};
pub use sweep::{check_voltages, iv_sweep, sweep_order, IvCurve, IvPoint};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfuncs::{self, GPolicy, Regime};
use crate::model::{nondimensionalize, BoundaryConditions, DimensionlessParams, PoreScenario};
use crate::radial::{solve_psi, solve_psi_from, RadialProblem, RadialProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiOptions {
    /// Relative fixed-point tolerance on `|dQ|/|Q| + |dS|/|S|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Under-relaxation factor used at and above `v_threshold`.
    pub relaxation: f64,
    /// Voltage (V) from which relaxation is applied; `None` means 4 V_T.
    pub v_threshold: Option<f64>,
    pub g_policy: GPolicy,
    pub axial_intervals: usize,
    /// Exponent of the node density `R^-grading`; 0 gives a uniform grid.
    pub grading: f64,
    /// Constant added to both electrode potentials (dimensionless).
    pub potential_offset: f64,
}

impl Default for QuasiOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 5000,
            relaxation: 0.1,
            v_threshold: None,
            g_policy: GPolicy::default(),
            axial_intervals: 1000,
            grading: 0.0,
            potential_offset: 0.0,
        }
    }
}

impl QuasiOptions {
    pub fn with_oracle(mut self, n_points: usize) -> Self {
        self.g_policy = GPolicy::Oracle { n_points };
        self
    }
}

/// Dirichlet values of the Boltzmann prefactors in units of the concentration scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLift {
    pub q_left: f64,
    pub s_left: f64,
    pub q_right: f64,
    pub s_right: f64,
}

/// Left electrode at 0, right at `v_applied / V_T`.
pub fn boundary_lift(bc: &BoundaryConditions, params: &DimensionlessParams) -> BoundaryLift {
    boundary_lift_with_offset(bc, params, 0.0)
}

/// As [`boundary_lift`] with both electrode potentials shifted by `offset`.
pub fn boundary_lift_with_offset(bc: &BoundaryConditions, params: &DimensionlessParams, offset: f64) -> BoundaryLift {
    let c = params.conc_scale;
    let phi_l = offset;
    let phi_r = params.phi_right(bc.v_applied) + offset;
    BoundaryLift {
        q_left: bc.conc_left_n / c * (-phi_l).exp(),
        s_left: bc.conc_left_p / c * phi_l.exp(),
        q_right: bc.conc_right_n / c * (-phi_r).exp(),
        s_right: bc.conc_right_p / c * phi_r.exp(),
    }
}

/// Geometry and charge sampled on the axial nodes.
#[derive(Debug, Clone)]
pub(crate) struct Stations {
    pub x: Vec<f64>,
    pub radius: Vec<f64>,
    pub area: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl Stations {
    pub fn new(scenario: &PoreScenario, grid: &AxialGrid) -> Result<Self> {
        let radius = grid.x.iter().map(|&x| scenario.radius(x)).collect::<Result<Vec<_>>>()?;
        let area = radius.iter().map(|r| std::f64::consts::PI * r * r).collect();
        let sigma = grid.x.iter().map(|&x| scenario.sigma(x)).collect();
        Ok(Self { x: grid.x.clone(), radius, area, sigma })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    /// Normalized potential shape of an uncharged pore: `int dx/A` from the left.
    pub fn resistance_profile(&self) -> Vec<f64> {
        let mut f = vec![0.0; self.len()];
        for i in 1..self.len() {
            let h = self.x[i] - self.x[i - 1];
            f[i] = f[i - 1] + h / harmonic(self.area[i - 1], self.area[i]);
        }
        let total = *f.last().unwrap();
        f.iter_mut().for_each(|v| *v /= total);
        f
    }
}

pub(crate) fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiSolution {
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    pub s: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub lambda: Vec<f64>,
    pub beta: Vec<f64>,
    /// Dimensionless current (mean over faces).
    pub current_i: f64,
    /// Largest deviation of a face current from the mean.
    pub current_deviation: f64,
    pub iterations: usize,
    pub residual: f64,
    pub v_applied: f64,
    /// Stations where the smoothed closed form was replaced by a radial solve.
    pub oracle_fallbacks: usize,
}

impl QuasiSolution {
    pub fn mu_e(&self) -> Vec<f64> {
        self.q.iter().zip(&self.s).map(|(q, s)| 0.5 * (q * s).ln()).collect()
    }

    pub fn phi_tilde(&self) -> Vec<f64> {
        self.q.iter().zip(&self.s).map(|(q, s)| 0.5 * (s / q).ln()).collect()
    }
}

/// Evaluates g1, g2 at every station, optionally warm-starting radial solves
/// from a per-station cache.
pub(crate) struct GEvaluator {
    policy: GPolicy,
    cache: Vec<Option<RadialProfile>>,
    pub fallbacks: usize,
}

impl GEvaluator {
    pub fn new(policy: GPolicy, n: usize) -> Self {
        Self { policy, cache: vec![None; n], fallbacks: 0 }
    }

    pub fn eval(&mut self, lambda: &[f64], beta: &[f64], g1: &mut [f64], g2: &mut [f64]) -> Result<()> {
        match self.policy {
            GPolicy::Smoothed(cfg) => {
                self.fallbacks = 0;
                for i in 0..lambda.len() {
                    let e = gfuncs::evaluate_smoothed(lambda[i], beta[i], &cfg)?;
                    if e.regime == Regime::NumericOracle {
                        self.fallbacks += 1;
                    }
                    g1[i] = e.g1;
                    g2[i] = e.g2;
                }
            }
            GPolicy::Oracle { n_points } => {
                use rayon::prelude::*;
                let results: Vec<Result<RadialProfile>> = self
                    .cache
                    .par_iter()
                    .zip(lambda.par_iter().zip(beta.par_iter()))
                    .map(|(cached, (&l, &b))| {
                        let problem = RadialProblem { lambda: l, beta: b, n_points };
                        match cached {
                            Some(prev) if b != 0.0 => solve_psi_from(&problem, prev),
                            _ => solve_psi(&problem),
                        }
                    })
                    .collect();
                for (i, r) in results.into_iter().enumerate() {
                    let p = r?;
                    let l2b = lambda[i] * lambda[i] * beta[i];
                    if beta[i] >= 0.0 {
                        g1[i] = p.g1;
                        g2[i] = p.g1 + l2b;
                    } else {
                        g2[i] = p.g2;
                        g1[i] = p.g2 - l2b;
                    }
                    self.cache[i] = Some(p);
                }
            }
        }
        Ok(())
    }
}

/// Per-station coefficients for a given state.
pub(crate) struct Coefficients {
    pub lambda: Vec<f64>,
    pub beta: Vec<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
}

pub(crate) fn coefficients(
    st: &Stations,
    params: &DimensionlessParams,
    q: &[f64],
    s: &[f64],
    geval: &mut GEvaluator,
) -> Result<Coefficients> {
    let n = st.len();
    let mut lambda = vec![0.0; n];
    let mut beta = vec![0.0; n];
    for i in 0..n {
        let qs = q[i] * s[i];
        if !(q[i] > 0.0 && s[i] > 0.0) {
            return Err(Error::NonPositiveConcentration { node: i, value: q[i].min(s[i]) });
        }
        let (l, b) = crate::model::beta_lambda(params, st.radius[i], st.sigma[i], qs)?;
        lambda[i] = l;
        beta[i] = b;
    }
    let mut g1 = vec![0.0; n];
    let mut g2 = vec![0.0; n];
    geval.eval(&lambda, &beta, &mut g1, &mut g2)?;
    let theta1 = (0..n).map(|i| st.area[i] * (q[i] / s[i]).sqrt() * g1[i]).collect();
    let theta2 = (0..n).map(|i| st.area[i] * (s[i] / q[i]).sqrt() * g2[i]).collect();
    Ok(Coefficients { lambda, beta, g1, g2, theta1, theta2 })
}

/// Face conductances `harmonic(theta_i, theta_{i+1}) / h`.
pub(crate) fn face_conductances(x: &[f64], theta: &[f64]) -> Vec<f64> {
    (0..x.len() - 1).map(|i| harmonic(theta[i], theta[i + 1]) / (x[i + 1] - x[i])).collect()
}

/// Solves `(a u')' = 0` with Dirichlet end values for face conductances `a`.
/// The discrete flux is uniform, so `u` follows the cumulative face
/// resistance; equal end values give an exactly constant solution.
pub(crate) fn solve_conservation(a: &[f64], left: f64, right: f64) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    let mut cumulative = Vec::with_capacity(a.len() + 1);
    cumulative.push(0.0);
    for (i, &c) in a.iter().enumerate() {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Singular(i));
        }
        acc += 1.0 / c;
        cumulative.push(acc);
    }
    let mut u: Vec<f64> = cumulative.iter().map(|w| left + (right - left) * (w / acc)).collect();
    u[a.len()] = right;
    Ok(u)
}

/// Interior residuals of the two discrete conservation laws with coefficients
/// taken from the state itself. Entries at the two end nodes are zero.
pub fn assemble_residual(
    q: &[f64],
    s: &[f64],
    grid: &AxialGrid,
    params: &DimensionlessParams,
    scenario: &PoreScenario,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let st = Stations::new(scenario, grid)?;
    let mut geval = GEvaluator::new(GPolicy::default(), st.len());
    let c = coefficients(&st, params, q, s, &mut geval)?;
    let a1 = face_conductances(&st.x, &c.theta1);
    let a2 = face_conductances(&st.x, &c.theta2);
    let n = st.len();
    let mut r1 = vec![0.0; n];
    let mut r2 = vec![0.0; n];
    for i in 1..n - 1 {
        r1[i] = a1[i] * (s[i + 1] - s[i]) - a1[i - 1] * (s[i] - s[i - 1]);
        r2[i] = a2[i] * (q[i + 1] - q[i]) - a2[i - 1] * (q[i] - q[i - 1]);
    }
    Ok((r1, r2))
}

/// Face currents `2 (kappa_n theta2 Q' - kappa_p theta1 S')`, the full
/// cross-section integral of the charge flux.
pub(crate) fn face_currents(params: &DimensionlessParams, x: &[f64], c: &Coefficients, q: &[f64], s: &[f64]) -> Vec<f64> {
    let a1 = face_conductances(x, &c.theta1);
    let a2 = face_conductances(x, &c.theta2);
    (0..a1.len())
        .map(|i| 2.0 * (params.kappa_n * a2[i] * (q[i + 1] - q[i]) - params.kappa_p * a1[i] * (s[i + 1] - s[i])))
        .collect()
}

pub fn mean_and_deviation(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let dev = values.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    (mean, dev)
}

/// Current of a converged solution: mean over faces and the largest deviation.
pub fn current(solution: &QuasiSolution, scenario: &PoreScenario, params: &DimensionlessParams) -> Result<(f64, f64)> {
    let n = solution.x.len();
    let mut theta1 = vec![0.0; n];
    let mut theta2 = vec![0.0; n];
    for i in 0..n {
        let r = (solution.s[i] / solution.q[i]).sqrt();
        let area = scenario.geometry.area(solution.x[i])?;
        theta1[i] = area / r * solution.g1[i];
        theta2[i] = area * r * solution.g2[i];
    }
    let c = Coefficients {
        lambda: solution.lambda.clone(),
        beta: solution.beta.clone(),
        g1: solution.g1.clone(),
        g2: solution.g2.clone(),
        theta1,
        theta2,
    };
    Ok(mean_and_deviation(&face_currents(params, &solution.x, &c, &solution.q, &solution.s)))
}

fn rel_change(new: &[f64], old: &[f64]) -> f64 {
    let mut d = 0.0;
    let mut m = 0.0;
    for (a, b) in new.iter().zip(old) {
        d += (a - b) * (a - b);
        m += a * a;
    }
    (d / m).sqrt()
}

/// Uncharged starting state: concentration interpolated between the baths and
/// the potential distributed like the ohmic drop of an uncharged pore.
pub(crate) fn initial_state(st: &Stations, lift: &BoundaryLift) -> (Vec<f64>, Vec<f64>) {
    let f = st.resistance_profile();
    let c_l = (lift.q_left * lift.s_left).sqrt();
    let c_r = (lift.q_right * lift.s_right).sqrt();
    let phi_l = 0.5 * (lift.s_left / lift.q_left).ln();
    let phi_r = 0.5 * (lift.s_right / lift.q_right).ln();
    let mut q = vec![0.0; st.len()];
    let mut s = vec![0.0; st.len()];
    for (i, &t) in f.iter().enumerate() {
        let c = c_l + (c_r - c_l) * t;
        let phi = phi_l + (phi_r - phi_l) * t;
        q[i] = c * (-phi).exp();
        s[i] = c * phi.exp();
    }
    (q, s)
}

/// Adapts a solution at another voltage to new boundary data by shifting its
/// effective potential along the uncharged potential shape.
fn warm_state(st: &Stations, lift: &BoundaryLift, prev: &QuasiSolution) -> Option<(Vec<f64>, Vec<f64>)> {
    if prev.x.len() != st.len() {
        return None;
    }
    let f = st.resistance_profile();
    let n = st.len();
    let old_r = 0.5 * (prev.s[n - 1] / prev.q[n - 1]).ln();
    let old_l = 0.5 * (prev.s[0] / prev.q[0]).ln();
    let new_r = 0.5 * (lift.s_right / lift.q_right).ln();
    let new_l = 0.5 * (lift.s_left / lift.q_left).ln();
    let mut q = prev.q.clone();
    let mut s = prev.s.clone();
    for i in 0..n {
        let shift = (new_l - old_l) + ((new_r - old_r) - (new_l - old_l)) * f[i];
        q[i] *= (-shift).exp();
        s[i] *= shift.exp();
    }
    q[0] = lift.q_left;
    s[0] = lift.s_left;
    q[n - 1] = lift.q_right;
    s[n - 1] = lift.s_right;
    Some((q, s))
}

/// Steady state by the coefficient fixed-point iteration.
pub fn solve_steady(scenario: &PoreScenario, v_applied: f64, options: &QuasiOptions) -> Result<QuasiSolution> {
    solve_steady_from(scenario, v_applied, options, None)
}

/// As [`solve_steady`], warm-started from a solution at a nearby voltage.
pub fn solve_steady_from(
    scenario: &PoreScenario,
    v_applied: f64,
    options: &QuasiOptions,
    warm: Option<&QuasiSolution>,
) -> Result<QuasiSolution> {
    let scenario = scenario.with_voltage(v_applied);
    let params = nondimensionalize(&scenario)?;
    let grid = AxialGrid::for_scenario(&scenario, options.axial_intervals, options.grading)?;
    let st = Stations::new(&scenario, &grid)?;
    let lift = boundary_lift_with_offset(&scenario.bc, &params, options.potential_offset);
    let (mut q, mut s) = warm.and_then(|w| warm_state(&st, &lift, w)).unwrap_or_else(|| initial_state(&st, &lift));
    let threshold = options.v_threshold.unwrap_or(4.0 * params.thermal_voltage);
    let theta = if v_applied.abs() >= threshold { options.relaxation } else { 1.0 };
    let mut geval = GEvaluator::new(options.g_policy, st.len());
    let mut history = Vec::new();
    for iter in 1..=options.max_iter {
        let c = coefficients(&st, &params, &q, &s, &mut geval)?;
        let s_new = solve_conservation(&face_conductances(&st.x, &c.theta1), lift.s_left, lift.s_right)?;
        let q_new = solve_conservation(&face_conductances(&st.x, &c.theta2), lift.q_left, lift.q_right)?;
        if let Some(i) = (0..st.len()).find(|&i| !(q_new[i] > 0.0 && s_new[i] > 0.0)) {
            return Err(Error::NonPositiveConcentration { node: i, value: q_new[i].min(s_new[i]) });
        }
        let res = rel_change(&q_new, &q) + rel_change(&s_new, &s);
        history.push(res);
        if iter > 5 && theta == 1.0 && res > history[iter - 2] * (1.0 + 1e-6) && res > options.tol {
            log::debug!("quasi1d: fixed-point residual increased at iteration {iter}: {res:e}");
        }
        for i in 0..st.len() {
            q[i] = theta * q_new[i] + (1.0 - theta) * q[i];
            s[i] = theta * s_new[i] + (1.0 - theta) * s[i];
        }
        let last = st.len() - 1;
        (q[0], s[0], q[last], s[last]) = (lift.q_left, lift.s_left, lift.q_right, lift.s_right);
        if !res.is_finite() {
            break;
        }
        if res < options.tol {
            let c = coefficients(&st, &params, &q, &s, &mut geval)?;
            let (current_i, current_deviation) = mean_and_deviation(&face_currents(&params, &st.x, &c, &q, &s));
            return Ok(QuasiSolution {
                x: st.x.clone(),
                q,
                s,
                g1: c.g1,
                g2: c.g2,
                lambda: c.lambda,
                beta: c.beta,
                current_i,
                current_deviation,
                iterations: iter,
                residual: res,
                v_applied,
                oracle_fallbacks: geval.fallbacks,
            });
        }
    }
    Err(Error::NoConvergence {
        solver: "quasi1d",
        iterations: history.len(),
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

/// Solves at `v_applied`, stepping the voltage up from `start` (a converged
/// solution or equilibrium) by repeated halving when a direct solve fails.
pub fn solve_with_continuation(
    scenario: &PoreScenario,
    v_applied: f64,
    options: &QuasiOptions,
    start: Option<&QuasiSolution>,
) -> Result<QuasiSolution> {
    let first_err = match solve_steady_from(scenario, v_applied, options, start) {
        Ok(s) => return Ok(s),
        Err(e) if e.is_no_convergence() => e,
        Err(e) => return Err(e),
    };
    let mut anchor = match start {
        Some(s) => s.clone(),
        None => solve_steady(scenario, 0.0, options)?,
    };
    let mut step = 0.5 * (v_applied - anchor.v_applied);
    let mut halvings = 0;
    while (anchor.v_applied - v_applied).abs() > 0.0 {
        let target = if (v_applied - anchor.v_applied).abs() <= step.abs() { v_applied } else { anchor.v_applied + step };
        match solve_steady_from(scenario, target, options, Some(&anchor)) {
            Ok(s) => anchor = s,
            Err(e) if e.is_no_convergence() => {
                halvings += 1;
                if halvings > 8 {
                    return Err(first_err);
                }
                step *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(anchor)
}

#[cfg(test)]
mod tests;
