use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A closed interval `[lo, hi]`. Serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// `count` evenly spaced points including both endpoints; a single point
    /// for degenerate intervals or `count == 1`.
    pub fn grid(&self, count: usize) -> Vec<f64> {
        if self.is_degenerate() || count <= 1 {
            return vec![self.lo];
        }
        let step = self.width() / (count - 1) as f64;
        (0..count)
            .map(|i| {
                if i + 1 == count {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect()
    }

    /// Point at fraction `t ∈ [0, 1]` of the interval.
    pub fn lerp(&self, t: f64) -> f64 {
        (self.lo + t * self.width()).clamp(self.lo, self.hi)
    }

    /// Checks finiteness, ordering and (optionally) strict positivity.
    pub fn validate(&self, name: &'static str, strictly_positive: bool) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(invalid(name, "bounds must be finite"));
        }
        if self.lo > self.hi {
            return Err(invalid(name, format!("lower bound {} exceeds upper bound {}", self.lo, self.hi)));
        }
        if strictly_positive && self.lo <= 0.0 {
            return Err(invalid(name, format!("lower bound {} must be positive", self.lo)));
        }
        Ok(())
    }
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_endpoints() {
        let g = Interval::new(0.5, 1.0).grid(3);
        assert_eq!(g, vec![0.5, 0.75, 1.0]);
        assert_eq!(Interval::point(0.3).grid(32), vec![0.3]);
    }

    #[test]
    fn validation_rejects_reversed_and_nonpositive() {
        assert!(Interval::new(1.0, 0.5).validate("x", false).is_err());
        assert!(Interval::new(0.0, 0.5).validate("x", true).is_err());
        assert!(Interval::new(0.0, 0.5).validate("x", false).is_ok());
    }

    #[test]
    fn serializes_as_pair() {
        let s = serde_json::to_string(&Interval::new(0.1, 0.5)).unwrap();
        assert_eq!(s, "[0.1,0.5]");
    }
}
