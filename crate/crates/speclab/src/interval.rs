use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Closed interval `[a, b]` on the real line, `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(format!("not an interval: [{a}, {b}]")));
        }
        Ok(Interval { a, b })
    }

    pub fn left(&self) -> f64 {
        self.a
    }

    pub fn right(&self) -> f64 {
        self.b
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.a <= other.a && other.b <= self.b
    }

    /// Uniform lattice of `n ≥ 2` points including both endpoints.
    pub fn lattice(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2);
        let h = self.length() / (n - 1) as f64;
        (0..n).map(|i| self.a + i as f64 * h).collect()
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}
