//! Boundary-fitted structured mesh for an axisymmetric pore. The radial
//! coordinate is mapped to `xi = r / R(x)` so the wall is the grid line
//! `xi = 1`; cells are uniform (or radius-graded) in x and geometrically
//! graded toward the wall in xi.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{nondimensionalize, PoreScenario};
use crate::quasi1d::AxialGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiMesh {
    pub nx: usize,
    pub nr: usize,
    /// Ratio of neighbouring radial cell sizes, largest at the axis.
    pub grading: f64,
    /// Aspect ratio; the axial coordinate in radius units is `X = x / delta`.
    pub delta: f64,
    /// Normalized axial cell faces, `nx + 1` values on [0, 1].
    pub x_faces: Vec<f64>,
    pub x_centers: Vec<f64>,
    /// Radial faces on [0, 1], `nr + 1` values.
    pub xi_faces: Vec<f64>,
    pub xi_centers: Vec<f64>,
    /// Radius and dR/dX at cell centers (in R0 units).
    pub radius_c: Vec<f64>,
    pub slope_c: Vec<f64>,
    /// Radius and dR/dX at axial faces.
    pub radius_f: Vec<f64>,
    pub slope_f: Vec<f64>,
    /// Dimensionless wall charge per column.
    pub sigma_c: Vec<f64>,
    /// Cell volume per radian, `R^2 xi dxi dX` integrated exactly in xi.
    pub volume: Vec<f64>,
}

impl AxiMesh {
    pub fn cells(&self) -> usize {
        self.nx * self.nr
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nr + j
    }

    /// Axial position in radius units.
    pub fn big_x(&self, x: f64) -> f64 {
        x / self.delta
    }

    pub fn dx_big(&self, i: usize) -> f64 {
        (self.x_faces[i + 1] - self.x_faces[i]) / self.delta
    }

    pub fn dxi(&self, j: usize) -> f64 {
        self.xi_faces[j + 1] - self.xi_faces[j]
    }

    /// Size of the wall-adjacent cell in radius units for column `i`.
    pub fn wall_cell(&self, i: usize) -> f64 {
        self.radius_c[i] * self.dxi(self.nr - 1)
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.radius_c[i] * self.xi_centers[j]
    }
}

/// Radial faces with cell sizes shrinking by `grading` toward the wall.
pub fn graded_faces(nr: usize, grading: f64) -> Vec<f64> {
    let sizes: Vec<f64> = (0..nr).map(|j| grading.powi((nr - 1 - j) as i32)).collect();
    let total: f64 = sizes.iter().sum();
    let mut faces = Vec::with_capacity(nr + 1);
    let mut acc = 0.0;
    faces.push(0.0);
    for s in &sizes {
        acc += s / total;
        faces.push(acc);
    }
    faces[nr] = 1.0;
    faces
}

/// Mesh with uniform axial cells.
pub fn build_mesh(scenario: &PoreScenario, nx: usize, nr: usize, grading: f64) -> Result<AxiMesh> {
    build_mesh_graded(scenario, nx, nr, grading, 0.0)
}

/// Mesh whose axial cell density scales like `R^-axial_strength`.
pub fn build_mesh_graded(
    scenario: &PoreScenario,
    nx: usize,
    nr: usize,
    grading: f64,
    axial_strength: f64,
) -> Result<AxiMesh> {
    if nx < 8 || nr < 8 {
        return Err(Error::Config(format!("2D mesh needs nx, nr >= 8 (got {nx} x {nr})")));
    }
    if !(grading >= 1.0) || !grading.is_finite() {
        return Err(Error::Config(format!("radial grading must be >= 1 (got {grading})")));
    }
    let params = nondimensionalize(scenario)?;
    let delta = params.delta;
    let x_faces = AxialGrid::for_scenario(scenario, nx, axial_strength)?.x;
    let x_centers: Vec<f64> = x_faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let xi_faces = graded_faces(nr, grading);
    let xi_centers: Vec<f64> = xi_faces.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();

    let geom = &scenario.geometry;
    let eval = |x: f64| -> Result<(f64, f64)> { Ok((geom.eval_radius(x)?, geom.eval_slope(x)? * delta)) };
    let (radius_c, slope_c): (Vec<f64>, Vec<f64>) =
        x_centers.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let (radius_f, slope_f): (Vec<f64>, Vec<f64>) =
        x_faces.iter().map(|&x| eval(x)).collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let sigma_c: Vec<f64> = x_centers.iter().map(|&x| scenario.sigma(x)).collect();

    let mut volume = vec![0.0; nx * nr];
    for i in 0..nx {
        let dx = (x_faces[i + 1] - x_faces[i]) / delta;
        for j in 0..nr {
            let ring = 0.5 * (xi_faces[j + 1].powi(2) - xi_faces[j].powi(2));
            volume[i * nr + j] = radius_c[i].powi(2) * ring * dx;
        }
    }

    let mesh = AxiMesh {
        nx,
        nr,
        grading,
        delta,
        x_faces,
        x_centers,
        xi_faces,
        xi_centers,
        radius_c,
        slope_c,
        radius_f,
        slope_f,
        sigma_c,
        volume,
    };

    // Debye layers must be resolved: the wall cell may not exceed a quarter of
    // the screening length at the most concentrated bath.
    let bc = &scenario.bc;
    let c_max = [bc.conc_left_n, bc.conc_left_p, bc.conc_right_n, bc.conc_right_p]
        .into_iter()
        .fold(0.0f64, f64::max)
        / params.conc_scale;
    let floor = 0.25 * params.lambda_cap / c_max.sqrt();
    let (worst, i) = (0..nx).map(|i| (mesh.wall_cell(i), i)).fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a });
    if worst > floor {
        return Err(Error::DegenerateGeometry(format!(
            "wall cell {worst:.4} (R0 units) at x = {:.4} exceeds a quarter Debye length {floor:.4}; \
             raise nr or the radial grading",
            mesh.x_centers[i]
        )));
    }
    Ok(mesh)
}
