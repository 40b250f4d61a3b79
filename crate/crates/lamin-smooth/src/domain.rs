//! Compact boxes and polydisks on which all statements are tested.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A nonempty closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Parameter(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }

    pub fn clamp(&self, t: f64) -> f64 {
        t.clamp(self.lo, self.hi)
    }

    /// The interval shrunk towards its center by `frac` of its length on each side.
    pub fn inset(&self, frac: f64) -> Interval {
        let m = frac * self.len();
        Interval {
            lo: self.lo + m,
            hi: self.hi - m,
        }
    }

    /// `n` evenly spaced points including both endpoints (a single midpoint when n == 1).
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![self.mid()];
        }
        let step = self.len() / (n - 1) as f64;
        (0..n).map(|i| self.lo + step * i as f64).collect()
    }
}

/// Rectangle in the (x, y) plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2 {
    pub x: Interval,
    pub y: Interval,
}

impl Box2 {
    pub fn new(x: Interval, y: Interval) -> Self {
        Self { x, y }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x.contains(x) && self.y.contains(y)
    }
}

/// Box in (x, y1, y2): the base line times a square of transversal parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub x: Interval,
    pub y1: Interval,
    pub y2: Interval,
}

impl Box3 {
    pub fn new(x: Interval, y1: Interval, y2: Interval) -> Self {
        Self { x, y1, y2 }
    }

    pub fn contains(&self, x: f64, y: [f64; 2]) -> bool {
        self.x.contains(x) && self.y1.contains(y[0]) && self.y2.contains(y[1])
    }

    pub fn contains_y(&self, y: [f64; 2]) -> bool {
        self.y1.contains(y[0]) && self.y2.contains(y[1])
    }
}

/// Polydisk `|x - cx| <= r`, `|y_i - cy_i| <= r`, the local window for the
/// curve-lamination results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polydisk {
    pub center_x: f64,
    pub center_y: [f64; 2],
    pub radius: f64,
}

impl Polydisk {
    pub fn contains(&self, x: f64, y: [f64; 2]) -> bool {
        (x - self.center_x).abs() <= self.radius
            && (y[0] - self.center_y[0]).abs() <= self.radius
            && (y[1] - self.center_y[1]).abs() <= self.radius
    }

    pub fn x_interval(&self) -> Interval {
        Interval {
            lo: self.center_x - self.radius,
            hi: self.center_x + self.radius,
        }
    }
}
