//! Construction parameters: the marked heights and the pinch parameter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One member of the family: marked heights `b_1 < ... < b_n` on the vertical
/// axis and the pinch parameter `a`.
///
/// The heights live in `(-1/2, 1/2)` so every domain piece has a nonempty
/// x-range, and `a` in `(0, 1/2)` keeps the arctan singularities `b_j ± ia`
/// outside the domain. The base point of all path integrals is `z = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    /// Strictly increasing heights `b_j`.
    pub points: Vec<f64>,
    /// Pinch parameter in `(0, 1/2)`.
    pub a: f64,
}

impl ConstructionParams {
    pub fn new(points: Vec<f64>, a: f64) -> Result<Self> {
        let params = Self { points, a };
        params.validate()?;
        Ok(params)
    }

    /// Number of marked heights.
    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Weight `2^(1-j)` of the j-th arctan term, `j` counted from 1.
    pub fn weight(&self, j: usize) -> f64 {
        // j is the 0-based index here; the term is 1/2^(j) of the first.
        0.5f64.powi(j as i32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidParams("at least one point required".into()));
        }
        // Upper end inclusive: the family is studied as a -> 0, and the
        // boundary value 1/2 is harmless (the pinch half-width a^(3/2)/2
        // still stays below the arctan branch cut at |y| = a).
        if !(self.a > 0.0 && self.a <= 0.5) {
            return Err(Error::InvalidParams(format!(
                "a = {} not in (0, 1/2]",
                self.a
            )));
        }
        for b in &self.points {
            if !(-0.5 < *b && *b < 0.5) {
                return Err(Error::InvalidParams(format!(
                    "point {b} not in (-1/2, 1/2)"
                )));
            }
        }
        for w in self.points.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidParams(format!(
                    "points must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_valid_params() {
        assert!(ConstructionParams::new(vec![0.0], 0.25).is_ok());
        assert!(ConstructionParams::new(vec![-0.3, 0.0, 0.3], 0.05).is_ok());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ConstructionParams::new(vec![], 0.1).is_err());
        assert!(ConstructionParams::new(vec![0.0], 0.51).is_err());
        assert!(ConstructionParams::new(vec![0.0], 0.0).is_err());
        assert!(ConstructionParams::new(vec![0.0], -0.1).is_err());
        assert!(ConstructionParams::new(vec![0.2, 0.2], 0.1).is_err());
        assert!(ConstructionParams::new(vec![0.3, -0.3], 0.1).is_err());
        assert!(ConstructionParams::new(vec![0.6], 0.1).is_err());
    }

    #[test]
    fn weights_halve() {
        let p = ConstructionParams::new(vec![-0.2, 0.0, 0.2], 0.1).unwrap();
        assert_eq!(p.weight(0), 1.0);
        assert_eq!(p.weight(1), 0.5);
        assert_eq!(p.weight(2), 0.25);
    }
}
