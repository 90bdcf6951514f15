use serde::Serialize;

use super::{solve_with_continuation, QuasiOptions, QuasiSolution};
use crate::error::{Error, Result};
use crate::model::{nondimensionalize, PoreScenario};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IvPoint {
    pub voltage: f64,
    /// NaN when the point failed.
    pub current_dimensionless: f64,
    pub current_a: f64,
    pub iterations: usize,
    pub residual: f64,
    #[serde(skip)]
    pub error: Option<String>,
}

impl IvPoint {
    pub fn converged(&self) -> bool {
        self.error.is_none()
    }

    pub fn failed(voltage: f64, err: &Error) -> Self {
        let (iterations, residual) = match err {
            Error::NoConvergence { iterations, residual, .. } => (*iterations, *residual),
            _ => (0, f64::NAN),
        };
        Self {
            voltage,
            current_dimensionless: f64::NAN,
            current_a: f64::NAN,
            iterations,
            residual,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IvCurve {
    pub points: Vec<IvPoint>,
}

impl IvCurve {
    pub fn voltages(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.voltage).collect()
    }

    pub fn currents(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.current_dimensionless).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(IvPoint::converged)
    }

    pub fn current_at(&self, v: f64) -> Option<f64> {
        self.points.iter().find(|p| (p.voltage - v).abs() < 1e-12).map(|p| p.current_dimensionless)
    }
}

pub fn check_voltages(voltages: &[f64]) -> Result<()> {
    if voltages.is_empty() {
        return Err(Error::Config("empty voltage list".into()));
    }
    let increasing = voltages.windows(2).all(|w| w[1] > w[0]);
    let decreasing = voltages.windows(2).all(|w| w[1] < w[0]);
    if !(increasing || decreasing) {
        return Err(Error::Config("voltage list must be strictly monotone".into()));
    }
    Ok(())
}

/// Visiting order: start at the voltage nearest zero, then walk outward in
/// each direction so every point is warm-started from its neighbour.
pub fn sweep_order(voltages: &[f64]) -> (usize, Vec<usize>, Vec<usize>) {
    let start = (0..voltages.len())
        .min_by(|&a, &b| voltages[a].abs().total_cmp(&voltages[b].abs()))
        .unwrap_or(0);
    ((start), (start + 1..voltages.len()).collect(), (0..start).rev().collect())
}

/// Current-voltage curve with warm starts between neighbouring voltages.
/// A failed point is recorded and the walk continues from the last success.
pub fn iv_sweep(scenario: &PoreScenario, voltages: &[f64], options: &QuasiOptions) -> Result<IvCurve> {
    check_voltages(voltages)?;
    let params = nondimensionalize(scenario)?;
    let mut points: Vec<Option<IvPoint>> = vec![None; voltages.len()];
    let (start, up, down) = sweep_order(voltages);
    let mut solve = |i: usize, warm: Option<&QuasiSolution>| -> Result<Option<QuasiSolution>> {
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
                log::warn!("quasi1d: no convergence at {} V: {e}", voltages[i]);
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
