//! Reduced model in chemical-potential form: unknowns `mu = ln sqrt(QS)` and
//! `phi_tilde = ln sqrt(S/Q)`, with cross-section averaged densities
//! `P = 2 e^mu g1`, `N = 2 e^mu g2`. Steady state:
//! `(A P (mu + phi_tilde)')' = 0`, `(A N (mu - phi_tilde)')' = 0`,
//! solved by Newton on the coupled block-tridiagonal system.

use super::{boundary_lift, harmonic, initial_state, mean_and_deviation, AxialGrid, QuasiOptions, Stations};
use crate::error::{Error, Result};
use crate::gfuncs::{self, GPolicy};
use crate::linalg::{solve_block_tridiagonal, Block2};
use crate::model::{beta_lambda, nondimensionalize, DimensionlessParams, PoreScenario};

const NEWTON_TOL: f64 = 1e-11;
const NEWTON_MAX_ITER: usize = 100;
const MAX_STEP: f64 = 1.0;
/// Largest jump of the dimensionless electrode potential per continuation step.
const MAX_PHI_STEP: f64 = 2.0;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MuPhiSolution {
    pub x: Vec<f64>,
    pub mu_e: Vec<f64>,
    pub phi_tilde: Vec<f64>,
    /// `g1 + g2` at each station.
    pub psi_hat: Vec<f64>,
    /// Cross-section averaged cation density.
    pub p_bar: Vec<f64>,
    pub n_bar: Vec<f64>,
    pub area: Vec<f64>,
    /// Fixed wall charge per unit length.
    pub sigma_l: Vec<f64>,
    pub current_i: f64,
    pub current_deviation: f64,
    pub iterations: usize,
    pub residual: f64,
    pub v_applied: f64,
}

impl MuPhiSolution {
    pub fn q(&self) -> Vec<f64> {
        self.mu_e.iter().zip(&self.phi_tilde).map(|(m, f)| (m - f).exp()).collect()
    }

    pub fn s(&self) -> Vec<f64> {
        self.mu_e.iter().zip(&self.phi_tilde).map(|(m, f)| (m + f).exp()).collect()
    }

    /// `A (P - N) + sigma_l` at every station.
    pub fn neutrality_residual(&self) -> Vec<f64> {
        (0..self.x.len()).map(|i| self.area[i] * (self.p_bar[i] - self.n_bar[i]) + self.sigma_l[i]).collect()
    }
}

struct Model<'a> {
    st: &'a Stations,
    params: &'a DimensionlessParams,
    policy: GPolicy,
}

impl Model<'_> {
    /// (A P, A N, g1, g2) at station `i` for chemical potential `mu`.
    fn densities(&self, i: usize, mu: f64) -> Result<(f64, f64, f64, f64)> {
        let qs = (2.0 * mu).exp();
        let (lambda, beta) = beta_lambda(self.params, self.st.radius[i], self.st.sigma[i], qs)?;
        let g = gfuncs::evaluate(lambda, beta, &self.policy)?;
        let a = self.st.area[i];
        let e = 2.0 * mu.exp();
        Ok((a * e * g.g1, a * e * g.g2, g.g1, g.g2))
    }

    /// Densities and their mu-derivatives.
    fn densities_with_slope(&self, i: usize, mu: f64) -> Result<([f64; 2], [f64; 2])> {
        let (u, w, _, _) = self.densities(i, mu)?;
        let (up, wp, _, _) = self.densities(i, mu + FD_STEP)?;
        let (um, wm, _, _) = self.densities(i, mu - FD_STEP)?;
        Ok(([u, w], [(up - um) / (2.0 * FD_STEP), (wp - wm) / (2.0 * FD_STEP)]))
    }

    fn newton(&self, mu: &mut [f64], phi: &mut [f64]) -> Result<(usize, f64)> {
        let n = mu.len();
        let x = &self.st.x;
        let mut history = Vec::new();
        for iter in 1..=NEWTON_MAX_ITER {
            let mut val = vec![[0.0; 2]; n];
            let mut der = vec![[0.0; 2]; n];
            for i in 0..n {
                let (v, d) = self.densities_with_slope(i, mu[i])?;
                val[i] = v;
                der[i] = d;
            }
            let mut lower: Vec<Block2> = vec![[0.0; 4]; n];
            let mut diag: Vec<Block2> = vec![[1.0, 0.0, 0.0, 1.0]; n];
            let mut upper: Vec<Block2> = vec![[0.0; 4]; n];
            let mut rhs = vec![[0.0; 2]; n];
            for i in 1..n - 1 {
                // species k = 0: cations, potential X = mu + phi; k = 1: anions, Y = mu - phi
                for k in 0..2 {
                    let sign = if k == 0 { 1.0 } else { -1.0 };
                    let pot = |j: usize| mu[j] + sign * phi[j];
                    let (hl, hr) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                    let (ul, uc, ur) = (val[i - 1][k], val[i][k], val[i + 1][k]);
                    let al = harmonic(ul, uc) / hl;
                    let ar = harmonic(uc, ur) / hr;
                    let dl = pot(i) - pot(i - 1);
                    let dr = pot(i + 1) - pot(i);
                    rhs[i][k] = -(ar * dr - al * dl);
                    // derivatives of the harmonic face means
                    let sl = (ul + uc) * (ul + uc);
                    let sr = (uc + ur) * (uc + ur);
                    let dal_dul = 2.0 * uc * uc / sl / hl;
                    let dal_duc = 2.0 * ul * ul / sl / hl;
                    let dar_duc = 2.0 * ur * ur / sr / hr;
                    let dar_dur = 2.0 * uc * uc / sr / hr;
                    let row = 2 * k;
                    lower[i][row] = al - dl * dal_dul * der[i - 1][k];
                    lower[i][row + 1] = sign * al;
                    diag[i][row] = -ar - al + (dr * dar_duc - dl * dal_duc) * der[i][k];
                    diag[i][row + 1] = -sign * (ar + al);
                    upper[i][row] = ar + dr * dar_dur * der[i + 1][k];
                    upper[i][row + 1] = sign * ar;
                }
            }
            let step = solve_block_tridiagonal(&lower, &diag, &upper, &rhs)?;
            let max_step = step.iter().fold(0.0f64, |m, s| m.max(s[0].abs()).max(s[1].abs()));
            let scale = if max_step > MAX_STEP { MAX_STEP / max_step } else { 1.0 };
            for i in 0..n {
                mu[i] += scale * step[i][0];
                phi[i] += scale * step[i][1];
            }
            history.push(max_step);
            if !max_step.is_finite() {
                break;
            }
            if scale == 1.0 && max_step < NEWTON_TOL {
                return Ok((iter, max_step));
            }
        }
        Err(Error::NoConvergence {
            solver: "quasi1d-mu-phi",
            iterations: history.len(),
            residual: history.last().copied().unwrap_or(f64::NAN),
            history,
        })
    }
}

/// Steady state of the chemical-potential formulation. The electrode
/// potential is ramped from zero in steps of at most 2 V_T.
pub fn solve_steady_mu_phi(scenario: &PoreScenario, v_applied: f64, options: &QuasiOptions) -> Result<MuPhiSolution> {
    let scenario = scenario.with_voltage(v_applied);
    let params = nondimensionalize(&scenario)?;
    let grid = AxialGrid::for_scenario(&scenario, options.axial_intervals, options.grading)?;
    let st = Stations::new(&scenario, &grid)?;
    let model = Model { st: &st, params: &params, policy: options.g_policy };
    let n = st.len();
    let f = st.resistance_profile();

    let phi_total = params.phi_right(v_applied);
    let steps = ((phi_total.abs() / MAX_PHI_STEP).ceil() as usize).max(1);
    let start = boundary_lift(&scenario.with_voltage(0.0).bc, &params);
    let (q0, s0) = initial_state(&st, &start);
    let mut mu: Vec<f64> = (0..n).map(|i| 0.5 * (q0[i] * s0[i]).ln()).collect();
    let mut phi: Vec<f64> = (0..n).map(|i| 0.5 * (s0[i] / q0[i]).ln()).collect();
    let mut iterations = 0;
    let mut residual;
    let mut reached = 0.0;
    let mut step = phi_total / steps as f64;
    let mut halvings = 0;
    loop {
        let target = if (phi_total - reached).abs() <= step.abs() * (1.0 + 1e-12) { phi_total } else { reached + step };
        let (mut m, mut p) = (mu.clone(), phi.clone());
        // shift the effective potential along the uncharged shape so the ends match
        for i in 0..n {
            p[i] += (target - reached) * f[i];
        }
        let lift = boundary_lift(&scenario.with_voltage(target * params.thermal_voltage).bc, &params);
        m[0] = 0.5 * (lift.q_left * lift.s_left).ln();
        p[0] = 0.5 * (lift.s_left / lift.q_left).ln();
        m[n - 1] = 0.5 * (lift.q_right * lift.s_right).ln();
        p[n - 1] = 0.5 * (lift.s_right / lift.q_right).ln();
        match model.newton(&mut m, &mut p) {
            Ok((it, res)) => {
                iterations += it;
                residual = res;
                mu = m;
                phi = p;
                reached = target;
                if target == phi_total {
                    break;
                }
            }
            Err(e) if e.is_no_convergence() && halvings < 10 => {
                halvings += 1;
                step *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }

    let mut p_bar = vec![0.0; n];
    let mut n_bar = vec![0.0; n];
    let mut psi_hat = vec![0.0; n];
    let mut sigma_l = vec![0.0; n];
    let mut au = vec![0.0; n];
    let mut aw = vec![0.0; n];
    for i in 0..n {
        let (u, w, g1, g2) = model.densities(i, mu[i])?;
        au[i] = u;
        aw[i] = w;
        p_bar[i] = u / st.area[i];
        n_bar[i] = w / st.area[i];
        psi_hat[i] = g1 + g2;
        sigma_l[i] = params.lambda_cap.powi(2) * params.upsilon * 2.0 * std::f64::consts::PI * st.radius[i] * st.sigma[i];
    }
    // face currents: kappa_p * cation flux - kappa_n * anion flux, each flux = -A P (ln S)'
    let faces: Vec<f64> = (0..n - 1)
        .map(|i| {
            let h = st.x[i + 1] - st.x[i];
            let jp = -harmonic(au[i], au[i + 1]) / h * ((mu[i + 1] + phi[i + 1]) - (mu[i] + phi[i]));
            let jn = -harmonic(aw[i], aw[i + 1]) / h * ((mu[i + 1] - phi[i + 1]) - (mu[i] - phi[i]));
            params.kappa_p * jp - params.kappa_n * jn
        })
        .collect();
    let (current_i, current_deviation) = mean_and_deviation(&faces);
    Ok(MuPhiSolution {
        x: st.x.clone(),
        mu_e: mu,
        phi_tilde: phi,
        psi_hat,
        p_bar,
        n_bar,
        area: st.area.clone(),
        sigma_l,
        current_i,
        current_deviation,
        iterations,
        residual,
        v_applied,
    })
}
