//! Families of disjoint curve graphs `y = f_a(x)` in three-space, labeled by
//! a two-dimensional transversal parameter with `f_a(0) = a`.

use crate::domain::Interval;
use crate::error::{Error, Result};
use crate::family2d::LeafFamily2D;
use std::sync::Arc;

pub trait CurveFamily3D: Send + Sync {
    fn eval(&self, a: [f64; 2], x: f64) -> Result<[f64; 2]>;
    fn slope(&self, a: [f64; 2], x: f64) -> Result<[f64; 2]>;
    fn a_box(&self) -> (Interval, Interval);
    fn pi_analytic(&self, _x: f64, _y: [f64; 2]) -> Option<[f64; 2]> {
        None
    }
}

impl CurveFamily3D for Arc<dyn CurveFamily3D> {
    fn eval(&self, a: [f64; 2], x: f64) -> Result<[f64; 2]> {
        (**self).eval(a, x)
    }
    fn slope(&self, a: [f64; 2], x: f64) -> Result<[f64; 2]> {
        (**self).slope(a, x)
    }
    fn a_box(&self) -> (Interval, Interval) {
        (**self).a_box()
    }
    fn pi_analytic(&self, x: f64, y: [f64; 2]) -> Option<[f64; 2]> {
        (**self).pi_analytic(x, y)
    }
}

fn check_a(range: (Interval, Interval), a: [f64; 2]) -> Result<()> {
    if !range.0.contains(a[0]) || !range.1.contains(a[1]) {
        return Err(Error::Domain(format!("parameter {a:?} outside range")));
    }
    Ok(())
}

/// Constant leaves `f_a(x) = a`.
pub struct FlatCurves3D {
    pub a_box: (Interval, Interval),
}

impl CurveFamily3D for FlatCurves3D {
    fn eval(&self, a: [f64; 2], _x: f64) -> Result<[f64; 2]> {
        check_a(self.a_box, a)?;
        Ok(a)
    }
    fn slope(&self, a: [f64; 2], _x: f64) -> Result<[f64; 2]> {
        check_a(self.a_box, a)?;
        Ok([0.0, 0.0])
    }
    fn a_box(&self) -> (Interval, Interval) {
        self.a_box
    }
    fn pi_analytic(&self, _x: f64, y: [f64; 2]) -> Option<[f64; 2]> {
        Some(y)
    }
}

/// `f_a(x) = (a1 + x, a2)`.
pub struct AffineCurves3D {
    pub a_box: (Interval, Interval),
}

impl CurveFamily3D for AffineCurves3D {
    fn eval(&self, a: [f64; 2], x: f64) -> Result<[f64; 2]> {
        check_a(self.a_box, a)?;
        Ok([a[0] + x, a[1]])
    }
    fn slope(&self, a: [f64; 2], _x: f64) -> Result<[f64; 2]> {
        check_a(self.a_box, a)?;
        Ok([1.0, 0.0])
    }
    fn a_box(&self) -> (Interval, Interval) {
        self.a_box
    }
    fn pi_analytic(&self, x: f64, y: [f64; 2]) -> Option<[f64; 2]> {
        Some([y[0] - x, y[1]])
    }
}

/// Leaves of the canonical Osgood field `F(x, y) = (y1 log(1/y1), 0)`:
/// `f_a(x) = (a1^(exp(-x)), a2)`.
pub struct CanonicalOsgoodCurves3D;

impl CanonicalOsgoodCurves3D {
    pub const A_BOX: (Interval, Interval) = (
        Interval { lo: 0.0, hi: 1.0 },
        Interval { lo: -1.0, hi: 1.0 },
    );
}

impl CurveFamily3D for CanonicalOsgoodCurves3D {
    fn eval(&self, a: [f64; 2], x: f64) -> Result<[f64; 2]> {
        check_a(Self::A_BOX, a)?;
        let y1 = crate::family2d::CanonicalOsgoodFamily.eval(a[0], x)?;
        Ok([y1, a[1]])
    }
    fn slope(&self, a: [f64; 2], x: f64) -> Result<[f64; 2]> {
        let y = self.eval(a, x)?;
        Ok([crate::family2d::osgood_slope(y[0]), 0.0])
    }
    fn a_box(&self) -> (Interval, Interval) {
        Self::A_BOX
    }
    fn pi_analytic(&self, x: f64, y: [f64; 2]) -> Option<[f64; 2]> {
        crate::family2d::CanonicalOsgoodFamily
            .pi_analytic(x, y[0])
            .map(|a1| [a1, y[1]])
    }
}

pub fn norm2(v: [f64; 2]) -> f64 {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_3d_closed_form() {
        let fam = CanonicalOsgoodCurves3D;
        let v = fam.eval([0.25, 0.5], 2.0f64.ln()).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-14);
        assert_eq!(v[1], 0.5);
        let a = fam.pi_analytic(2.0f64.ln(), [0.5, 0.5]).unwrap();
        assert!((a[0] - 0.25).abs() < 1e-14);
    }
}
