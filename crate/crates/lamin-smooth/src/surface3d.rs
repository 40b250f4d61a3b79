//! Families of disjoint graph surfaces `z = f_a(x, y)` in three-space.

use crate::domain::Interval;
use crate::error::{Error, Result};
use crate::family2d::LeafFamily2D;
use std::sync::Arc;

pub trait SurfaceFamily3D: Send + Sync {
    fn eval(&self, a: f64, x: f64, y: f64) -> Result<f64>;
    fn slope_x(&self, a: f64, x: f64, y: f64) -> Result<f64>;
    fn slope_y(&self, a: f64, x: f64, y: f64) -> Result<f64>;
    fn a_range(&self) -> Interval;
    fn pi_analytic(&self, _x: f64, _y: f64, _z: f64) -> Option<f64> {
        None
    }
}

impl SurfaceFamily3D for Arc<dyn SurfaceFamily3D> {
    fn eval(&self, a: f64, x: f64, y: f64) -> Result<f64> {
        (**self).eval(a, x, y)
    }
    fn slope_x(&self, a: f64, x: f64, y: f64) -> Result<f64> {
        (**self).slope_x(a, x, y)
    }
    fn slope_y(&self, a: f64, x: f64, y: f64) -> Result<f64> {
        (**self).slope_y(a, x, y)
    }
    fn a_range(&self) -> Interval {
        (**self).a_range()
    }
    fn pi_analytic(&self, x: f64, y: f64, z: f64) -> Option<f64> {
        (**self).pi_analytic(x, y, z)
    }
}

fn check_a(range: Interval, a: f64) -> Result<()> {
    if !range.contains(a) {
        return Err(Error::Domain(format!(
            "parameter a = {a} outside [{}, {}]",
            range.lo, range.hi
        )));
    }
    Ok(())
}

/// Horizontal planes `f_a(x, y) = a`.
pub struct FlatSurfaces {
    pub a_range: Interval,
}

impl SurfaceFamily3D for FlatSurfaces {
    fn eval(&self, a: f64, _x: f64, _y: f64) -> Result<f64> {
        check_a(self.a_range, a)?;
        Ok(a)
    }
    fn slope_x(&self, a: f64, _x: f64, _y: f64) -> Result<f64> {
        check_a(self.a_range, a)?;
        Ok(0.0)
    }
    fn slope_y(&self, a: f64, _x: f64, _y: f64) -> Result<f64> {
        check_a(self.a_range, a)?;
        Ok(0.0)
    }
    fn a_range(&self) -> Interval {
        self.a_range
    }
    fn pi_analytic(&self, _x: f64, _y: f64, z: f64) -> Option<f64> {
        Some(z)
    }
}

/// Tilted planes `f_a(x, y) = a + x + y`.
pub struct TiltedSurfaces {
    pub a_range: Interval,
}

impl SurfaceFamily3D for TiltedSurfaces {
    fn eval(&self, a: f64, x: f64, y: f64) -> Result<f64> {
        check_a(self.a_range, a)?;
        Ok(a + x + y)
    }
    fn slope_x(&self, a: f64, _x: f64, _y: f64) -> Result<f64> {
        check_a(self.a_range, a)?;
        Ok(1.0)
    }
    fn slope_y(&self, a: f64, _x: f64, _y: f64) -> Result<f64> {
        check_a(self.a_range, a)?;
        Ok(1.0)
    }
    fn a_range(&self) -> Interval {
        self.a_range
    }
    fn pi_analytic(&self, x: f64, y: f64, z: f64) -> Option<f64> {
        Some(z - x - y)
    }
}

/// The canonical Osgood curves extended constantly in y:
/// `f_a(x, y) = a^(exp(-x))`.
pub struct ProductOsgoodSurfaces;

impl ProductOsgoodSurfaces {
    pub const A_RANGE: Interval = Interval { lo: 0.0, hi: 1.0 };
}

impl SurfaceFamily3D for ProductOsgoodSurfaces {
    fn eval(&self, a: f64, x: f64, _y: f64) -> Result<f64> {
        crate::family2d::CanonicalOsgoodFamily.eval(a, x)
    }
    fn slope_x(&self, a: f64, x: f64, _y: f64) -> Result<f64> {
        crate::family2d::CanonicalOsgoodFamily.slope(a, x)
    }
    fn slope_y(&self, a: f64, _x: f64, _y: f64) -> Result<f64> {
        check_a(Self::A_RANGE, a)?;
        Ok(0.0)
    }
    fn a_range(&self) -> Interval {
        Self::A_RANGE
    }
    fn pi_analytic(&self, x: f64, _y: f64, z: f64) -> Option<f64> {
        crate::family2d::CanonicalOsgoodFamily.pi_analytic(x, z)
    }
}

/// The surface-family leaf projection, by bisection over the monotone
/// ordering in `a`.
pub fn project_pi_surface(family: &dyn SurfaceFamily3D, x: f64, y: f64, z: f64) -> Result<f64> {
    if let Some(a) = family.pi_analytic(x, y, z) {
        return Ok(a);
    }
    const TOL: f64 = crate::family2d::PI_TOL;
    let range = family.a_range();
    let (mut lo, mut hi) = (range.lo, range.hi);
    let f_lo = family.eval(lo, x, y)?;
    let f_hi = family.eval(hi, x, y)?;
    if z < f_lo - TOL || z > f_hi + TOL {
        return Err(Error::Coverage(format!(
            "z = {z} at ({x}, {y}) not bracketed by surfaces [{f_lo}, {f_hi}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = family.eval(mid, x, y)?;
        if (fm - z).abs() <= TOL || hi - lo < f64::EPSILON * mid.abs().max(1.0) {
            return Ok(mid);
        }
        if fm < z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric("surface projection bisection stalled".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tilted_depends_only_on_z_minus_x_minus_y() {
        let fam = TiltedSurfaces {
            a_range: Interval::new(-5.0, 5.0).unwrap(),
        };
        let a = project_pi_surface(&fam, 0.3, 0.4, 1.0).unwrap();
        assert!((a - 0.3).abs() < 1e-12);
    }

    #[test]
    fn product_family_matches_planar_canonical() {
        let fam = ProductOsgoodSurfaces;
        let v = fam.eval(0.25, 2.0f64.ln(), 0.7).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        assert_eq!(fam.slope_y(0.25, 0.1, 0.2).unwrap(), 0.0);
    }
}
