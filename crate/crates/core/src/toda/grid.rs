use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[r_min, r_max]` with `points` nodes, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, points: usize) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) || r_min <= 0.0 || r_max <= r_min {
            return Err(Error::InvalidConfig(format!(
                "grid needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if points < 3 {
            return Err(Error::InvalidConfig(format!("grid needs at least 3 points, got {points}")));
        }
        Ok(Self { r_min, r_max, points })
    }

    pub fn h(&self) -> f64 {
        (self.r_max - self.r_min) / (self.points - 1) as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.r_max
        } else {
            self.r_min + i as f64 * self.h()
        }
    }

    pub fn interior(&self) -> std::ops::Range<usize> {
        1..self.points - 1
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.r(i)).collect()
    }
}

impl std::str::FromStr for RadialGrid {
    type Err = String;

    /// `r0:r1:points`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected r0:r1:points, got `{s}`"));
        }
        let r0 = parts[0].trim().parse::<f64>().map_err(|e| format!("r0: {e}"))?;
        let r1 = parts[1].trim().parse::<f64>().map_err(|e| format!("r1: {e}"))?;
        let pts = parts[2].trim().parse::<usize>().map_err(|e| format!("points: {e}"))?;
        RadialGrid::new(r0, r1, pts).map_err(|e| e.to_string())
    }
}
