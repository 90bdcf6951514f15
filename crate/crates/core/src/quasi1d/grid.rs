use crate::error::{Error, Result};
use crate::model::PoreScenario;

/// Axial nodes on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AxialGrid {
    pub x: Vec<f64>,
}

impl AxialGrid {
    pub fn uniform(intervals: usize) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::Config("axial grid needs at least 2 intervals".into()));
        }
        Ok(Self { x: (0..=intervals).map(|i| i as f64 / intervals as f64).collect() })
    }

    /// Node density proportional to `R(x)^-strength`, so narrow sections get
    /// more nodes. `strength = 0` is uniform.
    pub fn graded(scenario: &PoreScenario, intervals: usize, strength: f64) -> Result<Self> {
        let base = Self::uniform(intervals)?;
        if strength == 0.0 {
            return Ok(base);
        }
        let fine = 8 * intervals;
        let mut cumulative = vec![0.0; fine + 1];
        for k in 1..=fine {
            let xm = (k as f64 - 0.5) / fine as f64;
            cumulative[k] = cumulative[k - 1] + scenario.radius(xm)?.powf(-strength);
        }
        let total = cumulative[fine];
        let mut x = Vec::with_capacity(intervals + 1);
        let mut k = 0;
        for i in 0..=intervals {
            let target = total * i as f64 / intervals as f64;
            while k < fine && cumulative[k + 1] < target {
                k += 1;
            }
            let t = if k == fine { 0.0 } else { (target - cumulative[k]) / (cumulative[k + 1] - cumulative[k]) };
            x.push(((k as f64 + t.clamp(0.0, 1.0)) / fine as f64).min(1.0));
        }
        x[0] = 0.0;
        x[intervals] = 1.0;
        Ok(Self { x })
    }

    pub fn for_scenario(scenario: &PoreScenario, intervals: usize, grading: f64) -> Result<Self> {
        Self::graded(scenario, intervals, grading)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}
