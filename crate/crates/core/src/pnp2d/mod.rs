//! Axisymmetric 2D Poisson-Nernst-Planck reference solver.
//!
//! In radius units (`X = x / delta`, `r = R(X) xi`) the steady system is
//!
//! ```text
//! Lambda^2 div grad phi = n - p
//! div (kappa_p e^{-phi} grad v_p) = 0,   p = v_p e^{-phi}
//! div (kappa_n e^{ phi} grad v_n) = 0,   n = v_n e^{ phi}
//! ```
//!
//! with bath values at both ends, `d phi / d nu = Upsilon sigma` and zero ion
//! flux on the wall. Finite volumes on the mapped grid carry the metric
//! `J g^ab` with `J = R^2 xi`; the two-point parts of the ion fluxes are
//! exponentially fitted through Bernoulli-weighted face mobilities.

mod mesh;

pub use mesh::{build_mesh, build_mesh_graded, graded_faces, AxiMesh};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{bernoulli, BandMatrix};
use crate::model::{nondimensionalize, DimensionlessParams, PoreScenario};
use crate::quasi1d::{check_voltages, mean_and_deviation, sweep_order, IvCurve, IvPoint};

const POISSON_TOL: f64 = 1e-11;
const POISSON_MAX_ITER: usize = 60;
/// Largest jump of the electrode potential (V_T units) per continuation step.
const MAX_PHI_STEP: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pnp2dOptions {
    pub nx: usize,
    pub nr: usize,
    pub grading: f64,
    /// Axial cell density `~ R^-axial_grading`; 0 is uniform.
    pub axial_grading: f64,
    /// Sup-norm tolerance on successive potential updates.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for Pnp2dOptions {
    fn default() -> Self {
        Self { nx: 256, nr: 64, grading: 1.06, axial_grading: 0.0, tol: 1e-7, max_iter: 2000 }
    }
}

impl Pnp2dOptions {
    pub fn mesh(&self, scenario: &PoreScenario) -> Result<AxiMesh> {
        build_mesh_graded(scenario, self.nx, self.nr, self.grading, self.axial_grading)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub mesh: AxiMesh,
    /// Cell values, index `i * nr + j`.
    pub phi: Vec<f64>,
    pub n: Vec<f64>,
    pub p: Vec<f64>,
    /// Current through every axial face (`x_faces`).
    pub current_profile: Vec<f64>,
    pub current_i: f64,
    /// max - min of the face currents.
    pub current_spread: f64,
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
    pub v_applied: f64,
    /// Dimensionless potential imposed at the right end.
    pub phi_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection2D {
    pub x: f64,
    pub xi: Vec<f64>,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    pub n: Vec<f64>,
    pub p: Vec<f64>,
}

impl Field2D {
    /// Column values at `x`, interpolated linearly between cell centers at
    /// fixed `xi`.
    pub fn cross_section(&self, x: f64) -> Result<CrossSection2D> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let m = &self.mesh;
        let xc = &m.x_centers;
        let (i0, t) = if x <= xc[0] {
            (0, 0.0)
        } else if x >= xc[m.nx - 1] {
            (m.nx - 2, 1.0)
        } else {
            let i = xc.partition_point(|&c| c <= x) - 1;
            (i, (x - xc[i]) / (xc[i + 1] - xc[i]))
        };
        let lerp = |f: &[f64], j: usize| (1.0 - t) * f[m.index(i0, j)] + t * f[m.index(i0 + 1, j)];
        let radius = radius_at(m, x);
        Ok(CrossSection2D {
            x,
            xi: m.xi_centers.clone(),
            r: m.xi_centers.iter().map(|xi| xi * radius).collect(),
            phi: (0..m.nr).map(|j| lerp(&self.phi, j)).collect(),
            n: (0..m.nr).map(|j| lerp(&self.n, j)).collect(),
            p: (0..m.nr).map(|j| lerp(&self.p, j)).collect(),
        })
    }
}

fn radius_at(m: &AxiMesh, x: f64) -> f64 {
    let f = &m.x_faces;
    let i = f.partition_point(|&c| c <= x).clamp(1, f.len() - 1) - 1;
    let t = (x - f[i]) / (f[i + 1] - f[i]);
    (1.0 - t) * m.radius_f[i] + t * m.radius_f[i + 1]
}

/// Current at axial station `x`, linear between face values.
pub fn current_2d(field: &Field2D, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain(x));
    }
    let f = &field.mesh.x_faces;
    let i = f.partition_point(|&c| c <= x).clamp(1, f.len() - 1) - 1;
    let t = (x - f[i]) / (f[i + 1] - f[i]);
    Ok((1.0 - t) * field.current_profile[i] + t * field.current_profile[i + 1])
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Node {
    Cell(usize),
    Left,
    Right,
}

/// Linear two-point-plus-cross-term flux `sum w u + bc . u_bc` through one face,
/// oriented from `left` to `right`; it is multiplied by a face coefficient.
#[derive(Debug, Clone)]
struct Face {
    left: Node,
    right: Node,
    terms: Vec<(usize, f64)>,
    bc: [f64; 2],
}

struct Stencils {
    faces: Vec<Face>,
    /// The first `(nx + 1) * nr` faces are axial, ordered by face column.
    n_axial: usize,
}

impl Stencils {
    fn new(m: &AxiMesh) -> Self {
        let (nx, nr) = (m.nx, m.nr);
        let big_xc: Vec<f64> = m.x_centers.iter().map(|&x| m.big_x(x)).collect();
        let x_end = m.big_x(1.0);
        // d/dxi at a cell center, as (j, weight)
        let dxi = |j: usize| -> [(usize, f64); 2] {
            let c = &m.xi_centers;
            if j == 0 {
                let d = c[1] + c[0];
                [(1, 1.0 / d), (0, -1.0 / d)]
            } else if j == nr - 1 {
                let d = c[j] - c[j - 1];
                [(j, 1.0 / d), (j - 1, -1.0 / d)]
            } else {
                let d = c[j + 1] - c[j - 1];
                [(j + 1, 1.0 / d), (j - 1, -1.0 / d)]
            }
        };
        // d/dX at a cell center, as (column or boundary, weight)
        let dx = |i: usize| -> [(Node, f64); 2] {
            if i == 0 {
                let d = big_xc[1];
                [(Node::Cell(1), 1.0 / d), (Node::Left, -1.0 / d)]
            } else if i == nx - 1 {
                let d = x_end - big_xc[i - 1];
                [(Node::Right, 1.0 / d), (Node::Cell(i - 1), -1.0 / d)]
            } else {
                let d = big_xc[i + 1] - big_xc[i - 1];
                [(Node::Cell(i + 1), 1.0 / d), (Node::Cell(i - 1), -1.0 / d)]
            }
        };

        let mut faces = Vec::with_capacity((nx + 1) * nr + nx * (nr - 1));
        for f in 0..=nx {
            let (radius, slope) = (m.radius_f[f], m.slope_f[f]);
            let xl = if f == 0 { 0.0 } else { big_xc[f - 1] };
            let xr = if f == nx { x_end } else { big_xc[f] };
            let h = xr - xl;
            for j in 0..nr {
                let xi = m.xi_centers[j];
                let m11 = radius * radius * xi * m.dxi(j);
                let m12 = -radius * xi * xi * slope * m.dxi(j);
                let mut face = Face {
                    left: if f == 0 { Node::Left } else { Node::Cell(m.index(f - 1, j)) },
                    right: if f == nx { Node::Right } else { Node::Cell(m.index(f, j)) },
                    terms: Vec::with_capacity(6),
                    bc: [0.0; 2],
                };
                match face.left {
                    Node::Cell(k) => face.terms.push((k, -m11 / h)),
                    _ => face.bc[0] = -m11 / h,
                }
                match face.right {
                    Node::Cell(k) => face.terms.push((k, m11 / h)),
                    _ => face.bc[1] = m11 / h,
                }
                if m12 != 0.0 {
                    // boundary data is uniform in xi and contributes nothing
                    for col in [f.checked_sub(1), (f < nx).then_some(f)].into_iter().flatten() {
                        for (jj, w) in dxi(j) {
                            face.terms.push((m.index(col, jj), 0.5 * m12 * w));
                        }
                    }
                }
                faces.push(face);
            }
        }
        let n_axial = faces.len();
        for i in 0..nx {
            let (radius, slope) = (m.radius_c[i], m.slope_c[i]);
            let dxb = m.dx_big(i);
            for j in 0..nr - 1 {
                let xf = m.xi_faces[j + 1];
                let h = m.xi_centers[j + 1] - m.xi_centers[j];
                let m22 = xf * (1.0 + xf * xf * slope * slope) * dxb;
                let m21 = -radius * xf * xf * slope * dxb;
                let mut face = Face {
                    left: Node::Cell(m.index(i, j)),
                    right: Node::Cell(m.index(i, j + 1)),
                    terms: vec![(m.index(i, j), -m22 / h), (m.index(i, j + 1), m22 / h)],
                    bc: [0.0; 2],
                };
                if m21 != 0.0 {
                    for jj in [j, j + 1] {
                        for (node, w) in dx(i) {
                            match node {
                                Node::Cell(col) => face.terms.push((m.index(col, jj), 0.5 * m21 * w)),
                                Node::Left => face.bc[0] += 0.5 * m21 * w,
                                Node::Right => face.bc[1] += 0.5 * m21 * w,
                            }
                        }
                    }
                }
                faces.push(face);
            }
        }
        Self { faces, n_axial }
    }

    fn flux(face: &Face, coef: f64, u: &[f64], bc: [f64; 2]) -> f64 {
        let s: f64 = face.terms.iter().map(|&(k, w)| w * u[k]).sum();
        coef * (s + face.bc[0] * bc[0] + face.bc[1] * bc[1])
    }

    /// Net outgoing gradient flux of every cell, `sum_faces coef (M grad u) . nu`.
    fn divergence(&self, coef: &[f64], u: &[f64], bc: [f64; 2], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (face, &c) in self.faces.iter().zip(coef) {
            let f = Self::flux(face, c, u, bc);
            if let Node::Cell(a) = face.left {
                out[a] += f;
            }
            if let Node::Cell(b) = face.right {
                out[b] -= f;
            }
        }
    }

    fn assemble(&self, coef: &[f64], scale: f64, mat: &mut BandMatrix) {
        for (face, &c) in self.faces.iter().zip(coef) {
            for &(k, w) in &face.terms {
                if let Node::Cell(a) = face.left {
                    mat.add(a, k, scale * c * w);
                }
                if let Node::Cell(b) = face.right {
                    mat.add(b, k, -scale * c * w);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Species {
    kappa: f64,
    /// +1 for anions (`n = v e^phi`), -1 for cations.
    charge_sign: f64,
    bc: [f64; 2],
}

impl Species {
    /// Slotboom mobility `kappa e^{-s phi}` averaged over a face by exponential fitting.
    fn face_coefficient(&self, phi_l: f64, phi_r: f64) -> f64 {
        let s = self.charge_sign;
        self.kappa * (s * phi_l).exp() * bernoulli(s * (phi_l - phi_r))
    }
}

struct Problem<'a> {
    mesh: &'a AxiMesh,
    st: Stencils,
    phi_bc: [f64; 2],
    anion: Species,
    cation: Species,
    /// `eps * A` for the Poisson operator, reused by every Newton step.
    laplace: BandMatrix,
    laplace_bc: Vec<f64>,
    delta: f64,
}

impl<'a> Problem<'a> {
    fn new(mesh: &'a AxiMesh, scenario: &PoreScenario, params: &DimensionlessParams, v: f64) -> Self {
        let st = Stencils::new(mesh);
        let eps = params.lambda_cap.powi(2);
        let nr = mesh.nr;
        // wall charge source of the Poisson equation, nonzero in the wall cells only
        let mut wall = vec![0.0; mesh.cells()];
        for i in 0..mesh.nx {
            let (r, s) = (mesh.radius_c[i], mesh.slope_c[i]);
            wall[mesh.index(i, nr - 1)] = eps * r * (1.0 + s * s).sqrt() * params.upsilon * mesh.sigma_c[i] * mesh.dx_big(i);
        }
        let phi_bc = [0.0, params.phi_right(v)];
        let c = params.conc_scale;
        let bc = &scenario.bc;
        let anion = Species {
            kappa: params.kappa_n,
            charge_sign: 1.0,
            bc: [bc.conc_left_n / c * (-phi_bc[0]).exp(), bc.conc_right_n / c * (-phi_bc[1]).exp()],
        };
        let cation = Species {
            kappa: params.kappa_p,
            charge_sign: -1.0,
            bc: [bc.conc_left_p / c * phi_bc[0].exp(), bc.conc_right_p / c * phi_bc[1].exp()],
        };
        let ones = vec![1.0; st.faces.len()];
        let mut laplace = BandMatrix::zeros(mesh.cells(), nr + 1);
        st.assemble(&ones, eps, &mut laplace);
        let mut laplace_bc = vec![0.0; mesh.cells()];
        st.divergence(&ones, &vec![0.0; mesh.cells()], phi_bc, &mut laplace_bc);
        laplace_bc.iter_mut().zip(&wall).for_each(|(b, w)| *b = eps * *b + w);
        Self { mesh, st, phi_bc, anion, cation, laplace, laplace_bc, delta: params.delta }
    }

    fn node_value(&self, node: Node, u: &[f64], bc: [f64; 2]) -> f64 {
        match node {
            Node::Cell(k) => u[k],
            Node::Left => bc[0],
            Node::Right => bc[1],
        }
    }

    /// Newton on the Poisson equation with the Slotboom variables frozen.
    fn poisson(&self, phi: &mut [f64], vn: &[f64], vp: &[f64]) -> Result<usize> {
        let vol = &self.mesh.volume;
        let mut history = Vec::new();
        for iter in 1..=POISSON_MAX_ITER {
            let mut f = self.laplace.mul_vec(phi);
            let mut jac = self.laplace.clone();
            for k in 0..f.len() {
                let n = vn[k] * phi[k].exp();
                let p = vp[k] * (-phi[k]).exp();
                f[k] = -(f[k] + self.laplace_bc[k] - vol[k] * (n - p));
                jac.add(k, k, -vol[k] * (n + p));
            }
            jac.solve_in_place(&mut f)?;
            let m = f.iter().fold(0.0f64, |a, s| a.max(s.abs()));
            let scale = if m > 1.0 { 1.0 / m } else { 1.0 };
            phi.iter_mut().zip(&f).for_each(|(p, s)| *p += scale * s);
            history.push(m);
            if !m.is_finite() {
                break;
            }
            if scale == 1.0 && m < POISSON_TOL {
                return Ok(iter);
            }
        }
        Err(Error::NoConvergence {
            solver: "pnp2d-poisson",
            iterations: history.len(),
            residual: history.last().copied().unwrap_or(f64::NAN),
            history,
        })
    }

    fn coefficients(&self, species: &Species, phi: &[f64]) -> Vec<f64> {
        self.st
            .faces
            .iter()
            .map(|face| {
                let pl = self.node_value(face.left, phi, self.phi_bc);
                let pr = self.node_value(face.right, phi, self.phi_bc);
                species.face_coefficient(pl, pr)
            })
            .collect()
    }

    /// Steady continuity for one species in residual-correction form.
    fn continuity(&self, species: &Species, phi: &[f64], v: &mut [f64]) -> Result<()> {
        let coef = self.coefficients(species, phi);
        let mut res = vec![0.0; v.len()];
        self.st.divergence(&coef, v, species.bc, &mut res);
        let mut mat = BandMatrix::zeros(v.len(), self.mesh.nr + 1);
        self.st.assemble(&coef, 1.0, &mut mat);
        res.iter_mut().for_each(|r| *r = -*r);
        mat.solve_in_place(&mut res)?;
        v.iter_mut().zip(&res).for_each(|(a, d)| *a += d);
        Ok(())
    }

    /// Current through every axial face column.
    fn currents(&self, phi: &[f64], vn: &[f64], vp: &[f64]) -> Vec<f64> {
        let nr = self.mesh.nr;
        let cn = self.coefficients(&self.anion, phi);
        let cp = self.coefficients(&self.cation, phi);
        let scale = 2.0 * std::f64::consts::PI / self.delta;
        self.st.faces[..self.st.n_axial]
            .chunks(nr)
            .enumerate()
            .map(|(f, col)| {
                let base = f * nr;
                let s: f64 = col
                    .iter()
                    .enumerate()
                    .map(|(j, face)| {
                        // physical flux is minus the gradient flux
                        Stencils::flux(face, cn[base + j], vn, self.anion.bc)
                            - Stencils::flux(face, cp[base + j], vp, self.cation.bc)
                    })
                    .sum();
                scale * s
            })
            .collect()
    }
}

struct State {
    phi: Vec<f64>,
    vn: Vec<f64>,
    vp: Vec<f64>,
}

/// Normalized axial resistance `int dx / R^2` from the left end, per column.
fn resistance_profile(mesh: &AxiMesh) -> Vec<f64> {
    let mut acc = 0.0;
    let mut at_center = Vec::with_capacity(mesh.nx);
    for i in 0..mesh.nx {
        let w = (mesh.x_faces[i + 1] - mesh.x_faces[i]) / mesh.radius_c[i].powi(2);
        at_center.push(acc + 0.5 * w);
        acc += w;
    }
    at_center.iter().map(|v| v / acc).collect()
}

fn initial_state(prob: &Problem, scenario: &PoreScenario, params: &DimensionlessParams) -> State {
    let m = prob.mesh;
    let f = resistance_profile(m);
    let c = params.conc_scale;
    let bc = &scenario.bc;
    let mut st = State { phi: vec![0.0; m.cells()], vn: vec![0.0; m.cells()], vp: vec![0.0; m.cells()] };
    for i in 0..m.nx {
        let t = m.x_centers[i];
        let phi = prob.phi_bc[0] + (prob.phi_bc[1] - prob.phi_bc[0]) * f[i];
        let n = (bc.conc_left_n + (bc.conc_right_n - bc.conc_left_n) * t) / c;
        let p = (bc.conc_left_p + (bc.conc_right_p - bc.conc_left_p) * t) / c;
        for j in 0..m.nr {
            let k = m.index(i, j);
            st.phi[k] = phi;
            st.vn[k] = n * (-phi).exp();
            st.vp[k] = p * phi.exp();
        }
    }
    st
}

/// Start from a converged field at another voltage, shifting the potential
/// along the uncharged resistance profile so the ends match.
fn warm_state(prob: &Problem, warm: &Field2D) -> Option<State> {
    let m = prob.mesh;
    if warm.mesh.nx != m.nx || warm.mesh.nr != m.nr || warm.mesh.x_faces != m.x_faces {
        return None;
    }
    let f = resistance_profile(m);
    let old_right = warm.phi_right;
    let mut st = State { phi: warm.phi.clone(), vn: vec![0.0; m.cells()], vp: vec![0.0; m.cells()] };
    for i in 0..m.nx {
        let shift = (prob.phi_bc[1] - old_right) * f[i];
        for j in 0..m.nr {
            let k = m.index(i, j);
            st.phi[k] += shift;
            st.vn[k] = warm.n[k] * (-st.phi[k]).exp();
            st.vp[k] = warm.p[k] * st.phi[k].exp();
        }
    }
    Some(st)
}

fn gummel(prob: &Problem, mut st: State, options: &Pnp2dOptions, v_applied: f64) -> Result<Field2D> {
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    for iter in 1..=options.max_iter {
        iterations = iter;
        let old = st.phi.clone();
        prob.poisson(&mut st.phi, &st.vn, &st.vp)?;
        let update = st.phi.iter().zip(&old).fold(0.0f64, |a, (n, o)| a.max((n - o).abs()));
        if update > 2.0 {
            st.phi.iter_mut().zip(&old).for_each(|(n, o)| *n = o + 0.5 * (*n - o));
        }
        prob.continuity(&prob.anion, &st.phi, &mut st.vn)?;
        prob.continuity(&prob.cation, &st.phi, &mut st.vp)?;
        history.push(update);
        if !update.is_finite() {
            break;
        }
        // the first potential update precedes any continuity solve and says nothing
        if iter > 1 && update < options.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            solver: "pnp2d-gummel",
            iterations,
            residual: history.last().copied().unwrap_or(f64::NAN),
            history,
        });
    }
    let m = prob.mesh;
    let n: Vec<f64> = st.vn.iter().zip(&st.phi).map(|(v, f)| v * f.exp()).collect();
    let p: Vec<f64> = st.vp.iter().zip(&st.phi).map(|(v, f)| v * (-f).exp()).collect();
    for (k, (&a, &b)) in n.iter().zip(&p).enumerate() {
        if !(a > 0.0) || !(b > 0.0) {
            return Err(Error::NonPositiveConcentration { node: k, value: a.min(b) });
        }
    }
    let current_profile = prob.currents(&st.phi, &st.vn, &st.vp);
    let (current_i, _) = mean_and_deviation(&current_profile);
    let (lo, hi) = current_profile.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &c| (l.min(c), h.max(c)));
    Ok(Field2D {
        mesh: m.clone(),
        phi: st.phi,
        n,
        p,
        current_profile,
        current_i,
        current_spread: hi - lo,
        iterations,
        residual: history.last().copied().unwrap_or(0.0),
        history,
        v_applied,
        phi_right: prob.phi_bc[1],
    })
}

/// Steady state on `mesh` at `v_applied`. Falls back to voltage continuation
/// from equilibrium when the direct Gummel iteration fails.
pub fn gummel_solve(mesh: &AxiMesh, scenario: &PoreScenario, v_applied: f64, options: &Pnp2dOptions) -> Result<Field2D> {
    gummel_solve_from(mesh, scenario, v_applied, options, None)
}

pub fn gummel_solve_from(
    mesh: &AxiMesh,
    scenario: &PoreScenario,
    v_applied: f64,
    options: &Pnp2dOptions,
    warm: Option<&Field2D>,
) -> Result<Field2D> {
    let scenario = scenario.with_voltage(v_applied);
    let params = nondimensionalize(&scenario)?;
    let prob = Problem::new(mesh, &scenario, &params, v_applied);
    let start = warm.and_then(|w| warm_state(&prob, w)).unwrap_or_else(|| initial_state(&prob, &scenario, &params));
    match gummel(&prob, start, options, v_applied) {
        Err(e) if e.is_no_convergence() => {
            log::info!("pnp2d: direct solve at {v_applied} V failed ({e}); ramping the voltage");
            continuation(mesh, &scenario, &params, v_applied, options, warm)
        }
        other => other,
    }
}

fn continuation(
    mesh: &AxiMesh,
    scenario: &PoreScenario,
    params: &DimensionlessParams,
    v_applied: f64,
    options: &Pnp2dOptions,
    warm: Option<&Field2D>,
) -> Result<Field2D> {
    let vt = params.thermal_voltage;
    let (mut current, mut reached) = match warm {
        Some(w) => (w.clone(), w.v_applied),
        None => {
            let eq = scenario.with_voltage(0.0);
            let prob = Problem::new(mesh, &eq, params, 0.0);
            (gummel(&prob, initial_state(&prob, &eq, params), options, 0.0)?, 0.0)
        }
    };
    let mut step = (MAX_PHI_STEP * vt).copysign(v_applied - reached);
    let mut halvings = 0;
    while reached != v_applied {
        let target = if (v_applied - reached).abs() <= step.abs() { v_applied } else { reached + step };
        let sc = scenario.with_voltage(target);
        let prob = Problem::new(mesh, &sc, params, target);
        let start = warm_state(&prob, &current).expect("same mesh");
        match gummel(&prob, start, options, target) {
            Ok(field) => {
                current = field;
                reached = target;
            }
            Err(e) if e.is_no_convergence() && halvings < 8 => {
                halvings += 1;
                step *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(current)
}

/// Builds the mesh from `options` and solves.
pub fn solve(scenario: &PoreScenario, v_applied: f64, options: &Pnp2dOptions) -> Result<Field2D> {
    let mesh = options.mesh(scenario)?;
    gummel_solve(&mesh, scenario, v_applied, options)
}

/// Current-voltage curve, walking outward from the voltage nearest zero
/// with warm starts. Points that fail to converge are recorded, not fatal.
pub fn iv_sweep(scenario: &PoreScenario, voltages: &[f64], options: &Pnp2dOptions) -> Result<IvCurve> {
    check_voltages(voltages)?;
    let mesh = options.mesh(scenario)?;
    let params = nondimensionalize(scenario)?;
    let mut points: Vec<Option<IvPoint>> = vec![None; voltages.len()];
    let (start, up, down) = sweep_order(voltages);
    let mut solve = |i: usize, warm: Option<&Field2D>| -> Result<Option<Field2D>> {
        match gummel_solve_from(&mesh, scenario, voltages[i], options, warm) {
            Ok(field) => {
                points[i] = Some(IvPoint {
                    voltage: voltages[i],
                    current_dimensionless: field.current_i,
                    current_a: field.current_i * params.current_scale,
                    iterations: field.iterations,
                    residual: field.residual,
                    error: None,
                });
                Ok(Some(field))
            }
            Err(e) if e.is_no_convergence() => {
                log::warn!("pnp2d: no convergence at {} V: {e}", voltages[i]);
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
            if let Some(field) = solve(i, warm.as_ref())? {
                warm = Some(field);
            }
        }
    }
    Ok(IvCurve { points: points.into_iter().map(|p| p.expect("every voltage visited")).collect() })
}
