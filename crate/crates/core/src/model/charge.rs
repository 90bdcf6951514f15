use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wall charge density along the domain axis. Positions are measured from the
/// left end of the computational domain (baths included) in the same length
/// unit as the owning geometry; values are charge densities in the owning
/// unit system (C/m^2 inside the solver, e/nm^2 in scenario files).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceChargeProfile {
    Zero,
    Uniform { value: f64 },
    /// `value` on the open interval (start, end), zero elsewhere.
    Band { start: f64, end: f64, value: f64 },
    /// Piecewise-linear samples; zero outside the sampled range.
    Table { position: Vec<f64>, value: Vec<f64> },
}

impl SurfaceChargeProfile {
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            SurfaceChargeProfile::Zero => 0.0,
            SurfaceChargeProfile::Uniform { value } => *value,
            SurfaceChargeProfile::Band { start, end, value } => {
                if z > *start && z < *end {
                    *value
                } else {
                    0.0
                }
            }
            SurfaceChargeProfile::Table { position, value } => {
                let n = position.len();
                if z < position[0] || z > position[n - 1] {
                    return 0.0;
                }
                let k = position.partition_point(|&p| p <= z).clamp(1, n - 1) - 1;
                let t = (z - position[k]) / (position[k + 1] - position[k]);
                value[k] + t * (value[k + 1] - value[k])
            }
        }
    }

    /// Closed support interval of the nonzero charge, if any.
    pub fn support(&self, domain_length: f64) -> Option<(f64, f64)> {
        match self {
            SurfaceChargeProfile::Zero => None,
            SurfaceChargeProfile::Uniform { value } => (*value != 0.0).then_some((0.0, domain_length)),
            SurfaceChargeProfile::Band { start, end, value } => (*value != 0.0).then_some((*start, *end)),
            SurfaceChargeProfile::Table { position, value } => {
                let first = value.iter().position(|&v| v != 0.0)?;
                let last = value.iter().rposition(|&v| v != 0.0)?;
                Some((position[first.saturating_sub(1)], position[(last + 1).min(position.len() - 1)]))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support(1.0).is_none()
    }

    /// Same profile with positions multiplied by `length` and values by `charge`.
    pub fn scaled(&self, length: f64, charge: f64) -> Self {
        match self {
            SurfaceChargeProfile::Zero => SurfaceChargeProfile::Zero,
            SurfaceChargeProfile::Uniform { value } => SurfaceChargeProfile::Uniform { value: value * charge },
            SurfaceChargeProfile::Band { start, end, value } => SurfaceChargeProfile::Band {
                start: start * length,
                end: end * length,
                value: value * charge,
            },
            SurfaceChargeProfile::Table { position, value } => SurfaceChargeProfile::Table {
                position: position.iter().map(|p| p * length).collect(),
                value: value.iter().map(|v| v * charge).collect(),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SurfaceChargeProfile::Zero => Ok(()),
            SurfaceChargeProfile::Uniform { value } => finite(*value),
            SurfaceChargeProfile::Band { start, end, value } => {
                finite(*value)?;
                if !(start < end) {
                    return Err(Error::Config("surface charge band needs start < end".into()));
                }
                Ok(())
            }
            SurfaceChargeProfile::Table { position, value } => {
                if position.len() < 2 || position.len() != value.len() {
                    return Err(Error::Config("surface charge table needs >= 2 matching samples".into()));
                }
                if position.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("surface charge table positions must increase".into()));
                }
                value.iter().try_for_each(|v| finite(*v))
            }
        }
    }
}

fn finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config("surface charge must be finite".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_is_open_interval() {
        let s = SurfaceChargeProfile::Band { start: 100.0, end: 900.0, value: 1.0 };
        assert_eq!(s.eval(100.0), 0.0);
        assert_eq!(s.eval(100.5), 1.0);
        assert_eq!(s.eval(899.9), 1.0);
        assert_eq!(s.eval(950.0), 0.0);
        assert_eq!(s.support(1000.0), Some((100.0, 900.0)));
    }

    #[test]
    fn table_interpolates_and_vanishes_outside() {
        let s = SurfaceChargeProfile::Table { position: vec![1.0, 2.0, 3.0], value: vec![0.0, 2.0, 0.0] };
        assert_eq!(s.eval(0.5), 0.0);
        assert!((s.eval(1.5) - 1.0).abs() < 1e-15);
        assert!((s.eval(2.0) - 2.0).abs() < 1e-15);
        assert_eq!(s.eval(3.5), 0.0);
    }

    #[test]
    fn zero_profile_has_no_support() {
        assert!(SurfaceChargeProfile::Zero.is_zero());
        assert!(SurfaceChargeProfile::Uniform { value: 0.0 }.is_zero());
        assert!(!SurfaceChargeProfile::Uniform { value: -0.2 }.is_zero());
    }
}
