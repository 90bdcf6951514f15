use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radius of the pore section as a function of the pore-local coordinate
/// `s` in [0, 1]. All radii in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadiusProfile {
    /// Parabolic profile `neck + (mouth - neck) (2 s - 1)^2`. With a 10 nm mouth
    /// and a 1.5 nm neck this is `34 s^2 - 34 s + 10` nm.
    Trumpet { mouth: f64, neck: f64 },
    /// Linear between the left and right radii.
    Conical { left: f64, right: f64 },
    Cylindrical { radius: f64 },
    /// Piecewise-linear table with strictly increasing `s` covering [0, 1].
    Table { s: Vec<f64>, radius: Vec<f64> },
}

impl RadiusProfile {
    pub fn kind(&self) -> &'static str {
        match self {
            RadiusProfile::Trumpet { .. } => "trumpet",
            RadiusProfile::Conical { .. } => "conical",
            RadiusProfile::Cylindrical { .. } => "cylindrical",
            RadiusProfile::Table { .. } => "table",
        }
    }

    /// Radius in meters and its derivative with respect to `s`.
    fn eval(&self, s: f64) -> (f64, f64) {
        match self {
            RadiusProfile::Trumpet { mouth, neck } => {
                let u = 2.0 * s - 1.0;
                (neck + (mouth - neck) * u * u, 4.0 * (mouth - neck) * u)
            }
            RadiusProfile::Conical { left, right } => (left + (right - left) * s, right - left),
            RadiusProfile::Cylindrical { radius } => (*radius, 0.0),
            RadiusProfile::Table { s: xs, radius } => {
                let k = match xs.partition_point(|&v| v <= s) {
                    0 => 0,
                    k if k >= xs.len() => xs.len() - 2,
                    k => k - 1,
                };
                let slope = (radius[k + 1] - radius[k]) / (xs[k + 1] - xs[k]);
                (radius[k] + slope * (s - xs[k]), slope)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            RadiusProfile::Trumpet { mouth, neck } => {
                if !(*mouth > 0.0 && *neck > 0.0) {
                    return Err(Error::NonPositiveInput("trumpet radius"));
                }
            }
            RadiusProfile::Conical { left, right } => {
                if !(*left > 0.0 && *right > 0.0) {
                    return Err(Error::NonPositiveInput("conical radius"));
                }
            }
            RadiusProfile::Cylindrical { radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::NonPositiveInput("cylinder radius"));
                }
            }
            RadiusProfile::Table { s, radius } => {
                if s.len() < 2 || s.len() != radius.len() {
                    return Err(Error::Config("radius table needs >= 2 matching samples".into()));
                }
                if s.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("radius table samples must be strictly increasing".into()));
                }
                if s[0] > 0.0 || *s.last().unwrap() < 1.0 {
                    return Err(Error::Config("radius table must cover [0, 1]".into()));
                }
                if radius.iter().any(|&r| !(r > 0.0)) {
                    return Err(Error::NonPositiveInput("table radius"));
                }
            }
        }
        Ok(())
    }
}

/// Reservoir sections attached to both pore ends. The radius widens linearly
/// from the pore mouth to `radius_factor` times the mouth radius at the outer end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathRegions {
    /// m
    pub length: f64,
    pub radius_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoreGeometry {
    /// Length of the pore section, m.
    pub length_l: f64,
    /// Radius scale R0, m.
    pub radius_scale_r0: f64,
    pub profile: RadiusProfile,
    pub baths: Option<BathRegions>,
}

impl PoreGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_l > 0.0) {
            return Err(Error::NonPositiveInput("pore length"));
        }
        if !(self.radius_scale_r0 > 0.0) {
            return Err(Error::NonPositiveInput("radius scale"));
        }
        if let Some(b) = &self.baths {
            if !(b.length > 0.0 && b.radius_factor > 0.0) {
                return Err(Error::NonPositiveInput("bath region"));
            }
        }
        self.profile.validate()
    }

    /// Length of the whole computational domain (pore plus baths), m.
    pub fn total_length(&self) -> f64 {
        self.length_l + 2.0 * self.bath_length()
    }

    fn bath_length(&self) -> f64 {
        self.baths.as_ref().map_or(0.0, |b| b.length)
    }

    /// Radius in meters and dR/dx (m per unit normalized x) at normalized
    /// domain coordinate `x`.
    pub fn radius_and_slope_m(&self, x: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let total = self.total_length();
        let z = x * total;
        let Some(baths) = &self.baths else {
            return Ok(self.profile.eval(x));
        };
        let lb = baths.length;
        let (r_left, _) = self.profile.eval(0.0);
        let (r_right, _) = self.profile.eval(1.0);
        if z < lb {
            let outer = baths.radius_factor * r_left;
            let t = z / lb;
            Ok((outer + (r_left - outer) * t, (r_left - outer) * total / lb))
        } else if z > lb + self.length_l {
            let outer = baths.radius_factor * r_right;
            let t = (z - lb - self.length_l) / lb;
            Ok((r_right + (outer - r_right) * t, (outer - r_right) * total / lb))
        } else {
            let s = ((z - lb) / self.length_l).clamp(0.0, 1.0);
            let (r, dr) = self.profile.eval(s);
            Ok((r, dr * total / self.length_l))
        }
    }

    /// Dimensionless radius R(x) in units of R0.
    pub fn eval_radius(&self, x: f64) -> Result<f64> {
        Ok(self.radius_and_slope_m(x)?.0 / self.radius_scale_r0)
    }

    /// dR/dx in units of R0 per unit normalized x.
    pub fn eval_slope(&self, x: f64) -> Result<f64> {
        Ok(self.radius_and_slope_m(x)?.1 / self.radius_scale_r0)
    }

    /// Cross-sectional area pi R^2 in units of R0^2.
    pub fn area(&self, x: f64) -> Result<f64> {
        let r = self.eval_radius(x)?;
        Ok(std::f64::consts::PI * r * r)
    }
}
