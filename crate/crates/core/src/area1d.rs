//! Cross-section averaged drift-diffusion model: the potential and both
//! concentrations are treated as uniform over each cross-section and the wall
//! charge enters the Poisson equation as a line source,
//!
//! ```text
//! delta^2 Lambda^2 (A phi')' = A (n - p) - sigma_l,   sigma_l = 2 pi R Lambda^2 Upsilon sigma
//! (A (p' + p phi'))' = 0,   (A (n' - n phi'))' = 0
//! ```
//!
//! solved by Gummel iteration with Scharfetter-Gummel fluxes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{bernoulli, solve_tridiagonal};
use crate::model::{nondimensionalize, DimensionlessParams, PoreScenario};
use crate::quasi1d::AxialGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaOptions {
    pub axial_intervals: usize,
    /// Sup-norm tolerance on the potential update between Gummel sweeps.
    pub tol: f64,
    pub max_iter: usize,
    pub grading: f64,
}

impl Default for AreaOptions {
    fn default() -> Self {
        Self { axial_intervals: 1000, tol: 1e-10, max_iter: 5000, grading: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AreaAveragedSolution {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub n: Vec<f64>,
    pub p: Vec<f64>,
    pub current_i: f64,
    pub current_deviation: f64,
    pub iterations: usize,
    pub residual: f64,
    pub v_applied: f64,
}

struct Problem {
    x: Vec<f64>,
    /// Area at nodes.
    area: Vec<f64>,
    /// Area at face midpoints.
    face_area: Vec<f64>,
    /// Line charge at nodes.
    sigma_l: Vec<f64>,
    /// delta^2 Lambda^2
    eps: f64,
    kappa_p: f64,
    kappa_n: f64,
    phi_bc: (f64, f64),
    n_bc: (f64, f64),
    p_bc: (f64, f64),
}

impl Problem {
    fn new(scenario: &PoreScenario, params: &DimensionlessParams, grid: &AxialGrid, v: f64) -> Result<Self> {
        let x = grid.x.clone();
        let area = x.iter().map(|&xi| scenario.geometry.area(xi)).collect::<Result<Vec<_>>>()?;
        let face_area = x.windows(2).map(|w| scenario.geometry.area(0.5 * (w[0] + w[1]))).collect::<Result<Vec<_>>>()?;
        let sigma_l = x
            .iter()
            .map(|&xi| {
                let r = scenario.radius(xi)?;
                Ok(2.0 * std::f64::consts::PI * r * params.lambda_cap.powi(2) * params.upsilon * scenario.sigma(xi))
            })
            .collect::<Result<Vec<_>>>()?;
        let c = params.conc_scale;
        let bc = &scenario.bc;
        Ok(Self {
            x,
            area,
            face_area,
            sigma_l,
            eps: (params.delta * params.lambda_cap).powi(2),
            kappa_p: params.kappa_p,
            kappa_n: params.kappa_n,
            phi_bc: (0.0, params.phi_right(v)),
            n_bc: (bc.conc_left_n / c, bc.conc_right_n / c),
            p_bc: (bc.conc_left_p / c, bc.conc_right_p / c),
        })
    }

    fn len(&self) -> usize {
        self.x.len()
    }

    fn h(&self, i: usize) -> f64 {
        self.x[i + 1] - self.x[i]
    }

    fn control_length(&self, i: usize) -> f64 {
        let n = self.len();
        let l = if i == 0 { 0.0 } else { self.h(i - 1) };
        let r = if i == n - 1 { 0.0 } else { self.h(i) };
        0.5 * (l + r)
    }

    /// Newton on the Poisson equation with concentrations tied to the
    /// potential through fixed Slotboom variables.
    fn poisson(&self, phi: &mut [f64], vn: &[f64], vp: &[f64]) -> Result<()> {
        let n = self.len();
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut history = Vec::new();
        for _ in 0..100 {
            for i in 1..n - 1 {
                let cl = self.eps * self.face_area[i - 1] / self.h(i - 1);
                let cr = self.eps * self.face_area[i] / self.h(i);
                let vol = self.control_length(i);
                let nn = vn[i] * phi[i].exp();
                let pp = vp[i] * (-phi[i]).exp();
                let f = cr * (phi[i + 1] - phi[i]) - cl * (phi[i] - phi[i - 1])
                    - vol * (self.area[i] * (nn - pp) - self.sigma_l[i]);
                lower[i] = cl;
                upper[i] = cr;
                diag[i] = -cl - cr - vol * self.area[i] * (nn + pp);
                rhs[i] = -f;
            }
            let step = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
            let m = step.iter().fold(0.0f64, |a, s| a.max(s.abs()));
            let scale = if m > 1.0 { 1.0 / m } else { 1.0 };
            phi.iter_mut().zip(&step).for_each(|(p, s)| *p += scale * s);
            history.push(m);
            if !m.is_finite() {
                break;
            }
            if scale == 1.0 && m < 1e-13 {
                return Ok(());
            }
        }
        Err(Error::NoConvergence {
            solver: "area1d-poisson",
            iterations: history.len(),
            residual: history.last().copied().unwrap_or(f64::NAN),
            history,
        })
    }

    /// Face fluxes of cations (`sign = -1`, drift down the potential) or
    /// anions (`sign = +1`) for concentration `c`.
    fn fluxes(&self, phi: &[f64], c: &[f64], kappa: f64, sign: f64) -> Vec<f64> {
        (0..self.len() - 1)
            .map(|i| {
                let d = sign * (phi[i + 1] - phi[i]);
                kappa * self.face_area[i] / self.h(i) * (bernoulli(-d) * c[i] - bernoulli(d) * c[i + 1])
            })
            .collect()
    }

    /// Steady continuity with Scharfetter-Gummel fluxes, in residual-correction form.
    fn continuity(&self, phi: &[f64], c: &mut [f64], kappa: f64, sign: f64, bc: (f64, f64)) -> Result<()> {
        let n = self.len();
        let last = n - 1;
        c[0] = bc.0;
        c[last] = bc.1;
        let flux = self.fluxes(phi, c, kappa, sign);
        let mut lower = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        // Newton correction for flux_{i+1/2} - flux_{i-1/2} = 0
        for i in 1..last {
            let dl = sign * (phi[i] - phi[i - 1]);
            let dr = sign * (phi[i + 1] - phi[i]);
            let gl = kappa * self.face_area[i - 1] / self.h(i - 1);
            let gr = kappa * self.face_area[i] / self.h(i);
            lower[i] = -gl * bernoulli(-dl);
            diag[i] = gl * bernoulli(dl) + gr * bernoulli(-dr);
            upper[i] = -gr * bernoulli(dr);
            rhs[i] = -(flux[i] - flux[i - 1]);
        }
        let dc = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
        for i in 1..last {
            c[i] += dc[i];
        }
        Ok(())
    }
}

/// Steady state at `v_applied`.
pub fn solve_area_averaged(scenario: &PoreScenario, v_applied: f64, options: &AreaOptions) -> Result<AreaAveragedSolution> {
    solve_area_averaged_from(scenario, v_applied, options, None)
}

pub fn solve_area_averaged_from(
    scenario: &PoreScenario,
    v_applied: f64,
    options: &AreaOptions,
    warm: Option<&AreaAveragedSolution>,
) -> Result<AreaAveragedSolution> {
    let scenario = scenario.with_voltage(v_applied);
    let params = nondimensionalize(&scenario)?;
    let grid = AxialGrid::for_scenario(&scenario, options.axial_intervals, options.grading)?;
    let pb = Problem::new(&scenario, &params, &grid, v_applied)?;
    let n = pb.len();
    let last = n - 1;

    // ohmic potential shape of the uncharged pore
    let mut shape = vec![0.0; n];
    for i in 1..n {
        shape[i] = shape[i - 1] + pb.h(i - 1) / pb.face_area[i - 1];
    }
    let total = shape[last];
    shape.iter_mut().for_each(|s| *s /= total);

    let (mut phi, mut cn, mut cp) = match warm {
        Some(w) if w.x.len() == n => {
            let dv = pb.phi_bc.1 - w.phi[last];
            let phi: Vec<f64> = (0..n).map(|i| w.phi[i] + dv * shape[i]).collect();
            (phi, w.n.clone(), w.p.clone())
        }
        _ => {
            let phi: Vec<f64> = shape.iter().map(|s| pb.phi_bc.0 + (pb.phi_bc.1 - pb.phi_bc.0) * s).collect();
            let cn = shape.iter().map(|s| pb.n_bc.0 + (pb.n_bc.1 - pb.n_bc.0) * s).collect();
            let cp = shape.iter().map(|s| pb.p_bc.0 + (pb.p_bc.1 - pb.p_bc.0) * s).collect();
            (phi, cn, cp)
        }
    };
    phi[0] = pb.phi_bc.0;
    phi[last] = pb.phi_bc.1;

    let mut history = Vec::new();
    for iter in 1..=options.max_iter {
        let vn: Vec<f64> = (0..n).map(|i| cn[i] * (-phi[i]).exp()).collect();
        let vp: Vec<f64> = (0..n).map(|i| cp[i] * phi[i].exp()).collect();
        let old = phi.clone();
        pb.poisson(&mut phi, &vn, &vp)?;
        let update = phi.iter().zip(&old).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if update > 2.0 {
            for i in 0..n {
                phi[i] = old[i] + 0.5 * (phi[i] - old[i]);
            }
        }
        for i in 0..n {
            cn[i] = vn[i] * phi[i].exp();
            cp[i] = vp[i] * (-phi[i]).exp();
        }
        pb.continuity(&phi, &mut cp, pb.kappa_p, -1.0, pb.p_bc)?;
        pb.continuity(&phi, &mut cn, pb.kappa_n, 1.0, pb.n_bc)?;
        if let Some(i) = (0..n).find(|&i| !(cn[i] > 0.0 && cp[i] > 0.0)) {
            return Err(Error::NonPositiveConcentration { node: i, value: cn[i].min(cp[i]) });
        }
        history.push(update);
        if !update.is_finite() {
            break;
        }
        if update < options.tol {
            let jp = pb.fluxes(&phi, &cp, pb.kappa_p, -1.0);
            let jn = pb.fluxes(&phi, &cn, pb.kappa_n, 1.0);
            let faces: Vec<f64> = jp.iter().zip(&jn).map(|(a, b)| a - b).collect();
            let (current_i, current_deviation) = crate::quasi1d::mean_and_deviation(&faces);
            return Ok(AreaAveragedSolution {
                x: pb.x.clone(),
                phi,
                n: cn,
                p: cp,
                current_i,
                current_deviation,
                iterations: iter,
                residual: update,
                v_applied,
            });
        }
    }
    Err(Error::NoConvergence {
        solver: "area1d",
        iterations: history.len(),
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

/// Direct solve, falling back to voltage stepping from equilibrium.
pub fn solve_with_continuation(
    scenario: &PoreScenario,
    v_applied: f64,
    options: &AreaOptions,
    start: Option<&AreaAveragedSolution>,
) -> Result<AreaAveragedSolution> {
    let first_err = match solve_area_averaged_from(scenario, v_applied, options, start) {
        Ok(s) => return Ok(s),
        Err(e) if e.is_no_convergence() => e,
        Err(e) => return Err(e),
    };
    let mut anchor = match start {
        Some(s) => s.clone(),
        None => solve_area_averaged(scenario, 0.0, options)?,
    };
    let mut step = 0.5 * (v_applied - anchor.v_applied);
    let mut halvings = 0;
    while anchor.v_applied != v_applied {
        let target = if (v_applied - anchor.v_applied).abs() <= step.abs() { v_applied } else { anchor.v_applied + step };
        match solve_area_averaged_from(scenario, target, options, Some(&anchor)) {
            Ok(s) => anchor = s,
            Err(e) if e.is_no_convergence() && halvings < 8 => {
                halvings += 1;
                step *= 0.5;
            }
            Err(e) if e.is_no_convergence() => return Err(first_err),
            Err(e) => return Err(e),
        }
    }
    Ok(anchor)
}

/// Current-voltage curve, walking outward from the voltage nearest zero.
pub fn iv_sweep(
    scenario: &PoreScenario,
    voltages: &[f64],
    options: &AreaOptions,
) -> Result<crate::quasi1d::IvCurve> {
    use crate::quasi1d::{IvCurve, IvPoint};
    crate::quasi1d::check_voltages(voltages)?;
    let params = nondimensionalize(scenario)?;
    let mut points: Vec<Option<IvPoint>> = vec![None; voltages.len()];
    let (start, up, down) = crate::quasi1d::sweep_order(voltages);
    let mut solve = |i: usize, warm: Option<&AreaAveragedSolution>| -> Result<Option<AreaAveragedSolution>> {
        match solve_with_continuation(scenario, voltages[i], options, warm) {
            Ok(sol) => {
                points[i] = Some(IvPoint {
                    voltage: voltages[i],
                    current_dimensionless: sol.current_i,
                    current_a: sol.current_i * params.current_scale,
                    iterations: sol.iterations,
                    residual: sol.residual,
                    error: None,
                });
                Ok(Some(sol))
            }
            Err(e) if e.is_no_convergence() => {
                log::warn!("area1d: no convergence at {} V: {e}", voltages[i]);
                points[i] = Some(IvPoint::failed(voltages[i], &e));
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let first = solve(start, None)?;
    for dir in [up, down] {
        let mut warm = first.clone();
        for i in dir {
            if let Some(sol) = solve(i, warm.as_ref())? {
                warm = Some(sol);
            }
        }
    }
    Ok(IvCurve { points: points.into_iter().map(|p| p.expect("every voltage visited")).collect() })
}
