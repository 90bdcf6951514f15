//! Radial Poisson-Boltzmann problem for the cross-sectional potential deviation:
//!
//! ```text
//! (1/xi) d/dxi (xi dpsi/dxi) = 2 sinh(psi) / lambda^2,   psi'(0) = 0,   psi'(1) = beta
//! ```
//!
//! solved by finite volumes on a grid graded toward the wall, together with
//! the two closed-form asymptotic solutions and the moments
//! `g1 = int xi e^{-psi}`, `g2 = int xi e^{psi}`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;

/// Default number of radial intervals for production solves.
pub const DEFAULT_POINTS: usize = 400;
/// Resolution used when the radial solve serves as a reference.
pub const FINE_POINTS: usize = 2000;

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 50;
const MAX_NEWTON_STEP: f64 = 1.0;
const CONTINUATION_STEPS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProblem {
    pub lambda: f64,
    pub beta: f64,
    /// Number of grid intervals.
    pub n_points: usize,
}

impl RadialProblem {
    pub fn new(lambda: f64, beta: f64) -> Self {
        Self { lambda, beta, n_points: DEFAULT_POINTS }
    }

    pub fn fine(lambda: f64, beta: f64) -> Self {
        Self { lambda, beta, n_points: FINE_POINTS }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::NonPositiveInput("lambda"));
        }
        if !self.beta.is_finite() {
            return Err(Error::DomainError("beta must be finite".into()));
        }
        if self.n_points < 16 {
            return Err(Error::DomainError(format!("radial grid needs >= 16 intervals, got {}", self.n_points)));
        }
        Ok(())
    }

    fn needs_continuation(&self) -> bool {
        self.lambda < 0.05 || self.beta.abs() > 20.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub xi: Vec<f64>,
    pub psi: Vec<f64>,
    pub lambda: f64,
    pub beta: f64,
    pub g1: f64,
    pub g2: f64,
    /// Total Newton iterations over all continuation steps.
    pub iterations: usize,
    /// Final max-norm of the discrete residual.
    pub residual: f64,
}

impl RadialProfile {
    /// Second-order one-sided estimate of dpsi/dxi at the wall.
    pub fn wall_slope(&self) -> f64 {
        let n = self.xi.len() - 1;
        let h = self.xi[n] - self.xi[n - 1];
        let curvature = 2.0 * self.psi[n].sinh() / (self.lambda * self.lambda) - self.beta;
        (self.psi[n] - self.psi[n - 1]) / h + 0.5 * h * curvature
    }

    /// Linear interpolation of psi at `xi`.
    pub fn psi_at(&self, xi: f64) -> f64 {
        interpolate(&self.xi, &self.psi, xi)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["xi", "psi"])?;
        for (x, p) in self.xi.iter().zip(&self.psi) {
            w.write_record([x.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let k = xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
    let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
    ys[k] + t * (ys[k + 1] - ys[k])
}

/// Grid on [0, 1] with `n` intervals, geometrically graded so the wall cell is
/// comparable to the thinner of the Debye layer and the wall-gradient length.
pub fn radial_grid(n: usize, lambda: f64, beta: f64) -> Vec<f64> {
    let layer = lambda.min(2.0 / (beta.abs() + 2.0));
    let h_wall = layer / 8.0;
    if h_wall * n as f64 >= 1.0 {
        return (0..=n).map(|i| i as f64 / n as f64).collect();
    }
    // h (q^n - 1)/(q - 1) = 1, solved for q > 1 by bisection
    let total = |q: f64| h_wall * (q.powi(n as i32) - 1.0) / (q - 1.0);
    let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
    while total(hi) < 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let mut xi = vec![0.0; n + 1];
    xi[n] = 1.0;
    let mut h = h_wall;
    for i in (1..n).rev() {
        xi[i] = xi[i + 1] - h;
        h *= q;
    }
    xi[0] = 0.0;
    xi
}

/// Control-volume weights: the cross-sectional measure int xi dxi of each node's cell.
pub fn control_volumes(xi: &[f64]) -> Vec<f64> {
    let n = xi.len() - 1;
    (0..=n)
        .map(|i| {
            let lo = if i == 0 { 0.0 } else { 0.5 * (xi[i - 1] + xi[i]) };
            let hi = if i == n { 1.0 } else { 0.5 * (xi[i] + xi[i + 1]) };
            0.5 * (hi * hi - lo * lo)
        })
        .collect()
}

/// Moments g1 = int xi e^{-psi}, g2 = int xi e^{psi}, using the same control
/// volumes as the discretization so that g2 - g1 = lambda^2 beta holds to solver tolerance.
pub fn compute_g(profile: &RadialProfile) -> (f64, f64) {
    moments(&profile.xi, &profile.psi)
}

fn moments(xi: &[f64], psi: &[f64]) -> (f64, f64) {
    let v = control_volumes(xi);
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    for (w, p) in v.iter().zip(psi) {
        g1 += w * (-p).exp();
        g2 += w * p.exp();
    }
    (g1, g2)
}

struct Discretization {
    xi: Vec<f64>,
    volumes: Vec<f64>,
    /// Face conductances xi_{i+1/2} / (xi_{i+1} - xi_i).
    faces: Vec<f64>,
}

impl Discretization {
    fn new(xi: Vec<f64>) -> Self {
        let volumes = control_volumes(&xi);
        let faces = xi.windows(2).map(|w| 0.5 * (w[0] + w[1]) / (w[1] - w[0])).collect();
        Self { xi, volumes, faces }
    }

    fn residual(&self, psi: &[f64], lambda: f64, beta: f64, out: &mut [f64]) {
        let n = psi.len() - 1;
        let inv_l2 = 1.0 / (lambda * lambda);
        for i in 0..=n {
            let right = if i == n { beta } else { self.faces[i] * (psi[i + 1] - psi[i]) };
            let left = if i == 0 { 0.0 } else { self.faces[i - 1] * (psi[i] - psi[i - 1]) };
            out[i] = right - left - self.volumes[i] * 2.0 * psi[i].sinh() * inv_l2;
        }
    }

    /// Newton iteration from `psi` in place; returns (iterations, residual).
    fn newton(&self, psi: &mut [f64], lambda: f64, beta: f64) -> Result<(usize, f64)> {
        let n = psi.len() - 1;
        let inv_l2 = 1.0 / (lambda * lambda);
        let mut res = vec![0.0; n + 1];
        let mut lower = vec![0.0; n + 1];
        let mut diag = vec![0.0; n + 1];
        let mut upper = vec![0.0; n + 1];
        let mut history = Vec::new();
        for iter in 1..=NEWTON_MAX_ITER {
            self.residual(psi, lambda, beta, &mut res);
            for i in 0..=n {
                let cr = if i == n { 0.0 } else { self.faces[i] };
                let cl = if i == 0 { 0.0 } else { self.faces[i - 1] };
                lower[i] = cl;
                upper[i] = cr;
                diag[i] = -cr - cl - self.volumes[i] * 2.0 * psi[i].cosh() * inv_l2;
                res[i] = -res[i];
            }
            let step = solve_tridiagonal(&lower, &diag, &upper, &res)?;
            let max_step = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
            let scale = if max_step > MAX_NEWTON_STEP { MAX_NEWTON_STEP / max_step } else { 1.0 };
            for (p, s) in psi.iter_mut().zip(&step) {
                *p += scale * s;
            }
            history.push(max_step);
            if scale == 1.0 && max_step < NEWTON_TOL {
                self.residual(psi, lambda, beta, &mut res);
                let r = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                return Ok((iter, r));
            }
            if !max_step.is_finite() {
                break;
            }
        }
        Err(Error::NoConvergence {
            solver: "radial",
            iterations: history.len(),
            residual: history.last().copied().unwrap_or(f64::NAN),
            history,
        })
    }
}

/// Starting profile: the Debye-layer closed form, which carries the correct
/// wall slope and sign for every lambda.
fn initial_guess(xi: &[f64], lambda: f64, beta: f64) -> Vec<f64> {
    if beta == 0.0 {
        return vec![0.0; xi.len()];
    }
    let b = lambda * beta;
    xi.iter().map(|&x| psi_debye_layer((1.0 - x) / lambda, b).unwrap_or(0.0)).collect()
}

/// Solves the radial problem from the closed-form initial guess, continuing
/// from milder parameters in the stiff regime.
pub fn solve_psi(problem: &RadialProblem) -> Result<RadialProfile> {
    problem.validate()?;
    let RadialProblem { lambda, beta, n_points } = *problem;
    let disc = Discretization::new(radial_grid(n_points, lambda, beta));
    let mut total_iters = 0;
    let mut psi;
    if problem.needs_continuation() {
        let lambda0 = lambda.max(0.1);
        psi = initial_guess(&disc.xi, lambda0, beta / CONTINUATION_STEPS as f64);
        for k in 1..=CONTINUATION_STEPS {
            let t = k as f64 / CONTINUATION_STEPS as f64;
            let lk = lambda0 * (lambda / lambda0).powf(t);
            let bk = if k == CONTINUATION_STEPS { beta } else { beta * t };
            let lk = if k == CONTINUATION_STEPS { lambda } else { lk };
            let (it, _) = disc.newton(&mut psi, lk, bk)?;
            total_iters += it;
        }
    } else {
        psi = initial_guess(&disc.xi, lambda, beta);
    }
    let (it, residual) = disc.newton(&mut psi, lambda, beta)?;
    total_iters += it;
    Ok(finish(disc, psi, lambda, beta, total_iters, residual))
}

/// Solves starting from an earlier profile (interpolated onto the new grid),
/// falling back to [`solve_psi`] if Newton fails from there.
pub fn solve_psi_from(problem: &RadialProblem, previous: &RadialProfile) -> Result<RadialProfile> {
    problem.validate()?;
    let RadialProblem { lambda, beta, n_points } = *problem;
    let disc = Discretization::new(radial_grid(n_points, lambda, beta));
    let mut psi: Vec<f64> = disc.xi.iter().map(|&x| previous.psi_at(x)).collect();
    match disc.newton(&mut psi, lambda, beta) {
        Ok((it, residual)) => Ok(finish(disc, psi, lambda, beta, it, residual)),
        Err(_) => solve_psi(problem),
    }
}

fn finish(disc: Discretization, psi: Vec<f64>, lambda: f64, beta: f64, iterations: usize, residual: f64) -> RadialProfile {
    let (g1, g2) = moments(&disc.xi, &psi);
    RadialProfile { xi: disc.xi, psi, lambda, beta, g1, g2, iterations, residual }
}

/// Whether the large-beta closed form applies (it requires lambda >> 2^{-3/2}).
pub fn large_beta_valid(lambda: f64) -> bool {
    lambda > 2f64.powf(-1.5)
}

/// Large-beta, order-one-lambda closed form for psi. Written in a form that is
/// finite at the centerline:
/// `3 ln 2 + 2 ln lambda + ln(beta/(beta+4)) - 2 ln(1 - xi^2 beta/(beta+4))`.
pub fn psi_large_beta(xi: f64, lambda: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::DomainError(format!("large-beta form needs beta > 0, got {beta}")));
    }
    if !(0.0..=1.0).contains(&xi) || !(lambda > 0.0) {
        return Err(Error::DomainError(format!("invalid xi = {xi} or lambda = {lambda}")));
    }
    let k = beta / (beta + 4.0);
    Ok(3.0 * std::f64::consts::LN_2 + 2.0 * lambda.ln() + k.ln() - 2.0 * (1.0 - xi * xi * k).ln())
}

/// Centerline value of the large-beta closed form.
pub fn psi_large_beta_centerline(lambda: f64, beta: f64) -> Result<f64> {
    psi_large_beta(0.0, lambda, beta)
}

/// Planar Debye-layer (Gouy-Chapman) solution in the stretched wall
/// coordinate `zeta = (1 - xi)/lambda`, with `b = lambda beta`.
pub fn psi_debye_layer(zeta: f64, b: f64) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::DomainError("Debye-layer form undefined for zero wall flux (limit is 0)".into()));
    }
    if !(zeta >= 0.0) {
        return Err(Error::DomainError(format!("zeta must be >= 0, got {zeta}")));
    }
    let s = std::f64::consts::SQRT_2;
    let shift = (2.0 * s / b.abs()).asinh() / s;
    let arg = (zeta + shift) / s;
    // 2 ln coth(a) = -2 ln tanh(a); the tanh form avoids overflow at large zeta
    let lt = arg.tanh().ln();
    Ok(if b > 0.0 { -2.0 * lt } else { 2.0 * lt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_charge_gives_zero_profile() {
        let p = solve_psi(&RadialProblem::new(1.0, 0.0)).unwrap();
        assert!(p.psi.iter().all(|&v| v == 0.0));
        assert_abs_diff_eq!(p.g1, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.g2, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn grid_is_graded_and_covers_unit_interval() {
        let xi = radial_grid(400, 0.02, 50.0);
        assert_eq!(xi[0], 0.0);
        assert_eq!(xi[400], 1.0);
        assert!(xi.windows(2).all(|w| w[1] > w[0]));
        let h_wall = 1.0 - xi[399];
        assert!(h_wall < 0.02 / 7.9);
        assert_abs_diff_eq!(control_volumes(&xi).iter().sum::<f64>(), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn centerline_matches_large_beta_form() {
        let p = solve_psi(&RadialProblem::fine(1.0, 50.0)).unwrap();
        let c = psi_large_beta_centerline(1.0, 50.0).unwrap();
        // 3 ln 2 - 2 arcoth(26)
        let arcoth = 0.5 * (27.0f64 / 25.0).ln();
        assert_abs_diff_eq!(c, 3.0 * std::f64::consts::LN_2 - 2.0 * arcoth, epsilon = 1e-12);
        assert_abs_diff_eq!(c, 2.002, epsilon = 1e-3);
        assert!((p.psi[0] - c).abs() < 0.05, "centerline {} vs {}", p.psi[0], c);
    }

    #[test]
    fn large_beta_form_has_wall_slope_beta() {
        let h = 1e-6;
        let d = (psi_large_beta(1.0, 1.3, 20.0).unwrap() - psi_large_beta(1.0 - h, 1.3, 20.0).unwrap()) / h;
        assert!((d - 20.0).abs() < 1e-3);
        assert!(psi_large_beta(0.5, 1.0, -1.0).is_err());
        assert!(large_beta_valid(0.5) && !large_beta_valid(0.3));
    }

    #[test]
    fn large_beta_form_grows_with_beta() {
        let mut last = f64::NEG_INFINITY;
        for beta in [1.0, 10.0, 100.0, 1e3, 1e5] {
            let v = psi_large_beta(1.0, 1.0, beta).unwrap();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn debye_layer_form_limits_and_slope() {
        assert!(psi_debye_layer(0.3, 1e-9).unwrap().abs() < 1e-8);
        assert!(psi_debye_layer(40.0, 5.0).unwrap().abs() < 1e-12);
        assert!(psi_debye_layer(0.0, 0.0).is_err());
        let h = 1e-6;
        let d = (psi_debye_layer(h, 5.0).unwrap() - psi_debye_layer(0.0, 5.0).unwrap()) / h;
        assert!((d + 5.0).abs() < 1e-3, "slope {d}");
        assert_abs_diff_eq!(psi_debye_layer(0.4, -3.0).unwrap(), -psi_debye_layer(0.4, 3.0).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn solved_profile_satisfies_bc_and_identity() {
        for &(l, b) in &[(3.0, 10.0), (0.1, 50.0), (0.02, 5.0), (0.5, -7.0)] {
            let p = solve_psi(&RadialProblem::fine(l, b)).unwrap();
            assert!((p.g2 - p.g1 - l * l * b).abs() < 1e-9);
            assert!((p.wall_slope() - b).abs() < 1e-2 * (1.0 + b.abs()), "slope {} vs {}", p.wall_slope(), b);
            assert!(p.residual < 1e-8);
        }
    }

    #[test]
    fn moderate_case_monotone_increasing() {
        let p = solve_psi(&RadialProblem::new(3.0, 10.0)).unwrap();
        assert!(p.psi.windows(2).all(|w| w[1] >= w[0]));
        assert!(p.psi[0] > 0.0);
    }

    #[test]
    fn g1_at_small_lambda() {
        let p = solve_psi(&RadialProblem::fine(0.1, 50.0)).unwrap();
        assert!((p.g1 - 0.396).abs() < 0.01, "g1 = {}", p.g1);
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let a = solve_psi(&RadialProblem::new(0.3, 12.0)).unwrap();
        let b = solve_psi_from(&RadialProblem::new(0.31, 12.5), &a).unwrap();
        let c = solve_psi(&RadialProblem::new(0.31, 12.5)).unwrap();
        assert!((b.g1 - c.g1).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_problems() {
        assert!(solve_psi(&RadialProblem::new(0.0, 1.0)).is_err());
        assert!(solve_psi(&RadialProblem { lambda: 1.0, beta: 1.0, n_points: 8 }).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn maximum_principle_and_antisymmetry(l in 0.03f64..3.0, b in 0.1f64..60.0) {
            let pos = solve_psi(&RadialProblem::new(l, b)).unwrap();
            let neg = solve_psi(&RadialProblem::new(l, -b)).unwrap();
            prop_assert!(pos.psi.iter().all(|&v| v >= 0.0));
            prop_assert!(pos.psi.windows(2).all(|w| w[1] >= w[0] - 1e-12));
            for (a, c) in pos.psi.iter().zip(&neg.psi) {
                prop_assert!((a + c).abs() < 1e-9);
            }
            prop_assert!((pos.g2 - pos.g1 - l * l * b).abs() < 1e-6);
            prop_assert!((neg.g2 - neg.g1 + l * l * b).abs() < 1e-6);
        }
    }
}
