use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform radial grid `r_j = j·h`, `j = 0…J`, with `J·h = R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    step: f64,
    node_count: usize, // J + 1
}

impl RadialGrid {
    /// Grid with step `h` covering `[0, R]`; `R` must be an exact multiple
    /// of `h` to within one ulp.
    pub fn new(step: f64, right_end: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid(format!("grid step must be positive, got {step}")));
        }
        if !(right_end > step && right_end.is_finite()) {
            return Err(Error::invalid(format!("grid right end must exceed the step, got {right_end}")));
        }
        let j = (right_end / step).round();
        if (j * step - right_end).abs() > 4.0 * f64::EPSILON * right_end {
            return Err(Error::invalid(format!(
                "right end {right_end} is not a multiple of step {step}"
            )));
        }
        Ok(RadialGrid { step, node_count: j as usize + 1 })
    }

    /// Grid reaching at least `r_min`, rounded up to a whole number of steps.
    pub fn covering(step: f64, r_min: f64) -> Result<Self> {
        let j = (r_min / step).ceil().max(2.0);
        RadialGrid::new(step, j * step)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn right_end(&self) -> f64 {
        (self.node_count - 1) as f64 * self.step
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.node_count).map(|j| self.node(j))
    }

    /// Index of the grid node nearest to `r`.
    pub fn nearest_node(&self, r: f64) -> usize {
        ((r / self.step).round() as usize).min(self.node_count - 1)
    }

    /// Grid with the step halved, same right end.
    pub fn refined(&self) -> RadialGrid {
        RadialGrid {
            step: 0.5 * self.step,
            node_count: 2 * (self.node_count - 1) + 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_multiple_enforced() {
        assert!(RadialGrid::new(0.1, 1.0).is_ok());
        assert!(RadialGrid::new(0.3, 1.0).is_err());
    }

    #[test]
    fn covering_reaches() {
        let g = RadialGrid::covering(0.1, 12.34).unwrap();
        assert!(g.right_end() >= 12.34);
        assert!(g.right_end() < 12.34 + 0.1 + 1e-12);
    }

    #[test]
    fn refinement_halves_step() {
        let g = RadialGrid::new(0.1, 2.0).unwrap();
        let f = g.refined();
        assert_eq!(f.step(), 0.05);
        assert_eq!(f.right_end(), g.right_end());
        assert_eq!(f.node_count(), 2 * g.node_count() - 1);
    }
}
