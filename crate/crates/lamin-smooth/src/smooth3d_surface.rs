//! Transversal smoothing for laminations of three-space by graph surfaces.
//!
//! Identical construction to the planar case with `(x, y)` as base
//! coordinates and `z` transversal; the leafwise derivative bound becomes
//! radial, `delta * C_chi * (L log 4 + 2 L log(1/delta) e^(L sqrt(x^2+y^2)))`.

use crate::chi::CutoffChi;
use crate::diff;
use crate::domain::{Box2, Interval};
use crate::error::{Error, Result};
use crate::report::{BoundReport, ReportParams};
use crate::smooth2d::PartitionLambda;
use crate::surface3d::{project_pi_surface, SurfaceFamily3D};
use std::sync::Arc;

/// Default enlargement of L when passing to the radial bound.
pub const RADIAL_L_FACTOR: f64 = 1.5;

/// A continuous function of (x, y, z), C1 along every surface leaf.
#[derive(Clone)]
pub struct Phi3S {
    eval: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
}

impl Phi3S {
    pub fn new(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { eval: Arc::new(f) }
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        (self.eval)(x, y, z)
    }
}

pub struct TransversalSmoother3DS {
    pub family: Arc<dyn SurfaceFamily3D>,
    pub delta: f64,
    pub chi: CutoffChi,
    /// Base rectangle in (x, y); z is covered by the grid surfaces.
    pub base: Box2,
    pub z: Interval,
    j_min: i64,
    j_max: i64,
}

impl TransversalSmoother3DS {
    pub fn grid_leaf(&self, j: i64) -> f64 {
        j as f64 * self.delta
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        let (j, f_j, f_j1) = self.bracket(x, y, z)?;
        let gap = f_j1 - f_j;
        if gap <= 0.0 {
            return Err(Error::Monotonicity(format!(
                "surface gap {gap} at ({x}, {y})"
            )));
        }
        let u = (z - f_j) / gap;
        let c = self.chi.eval(u);
        Ok(self.grid_leaf(j) * c + self.grid_leaf(j + 1) * (1.0 - c))
    }

    fn bracket(&self, x: f64, y: f64, z: f64) -> Result<(i64, f64, f64)> {
        let f_lo = self.family.eval(self.grid_leaf(self.j_min), x, y)?;
        let f_hi = self.family.eval(self.grid_leaf(self.j_max), x, y)?;
        if z < f_lo || z > f_hi {
            return Err(Error::Coverage(format!(
                "z = {z} at ({x}, {y}) outside grid surfaces [{f_lo}, {f_hi}]"
            )));
        }
        let (mut lo, mut hi) = (self.j_min, self.j_max);
        let mut f_lo = f_lo;
        let mut f_hi = f_hi;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let fm = self.family.eval(self.grid_leaf(mid), x, y)?;
            if fm <= z {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
        }
        Ok((lo, f_lo, f_hi))
    }
}

/// Build the surface smoother over `base x z`.
pub fn build_h_delta_surface(
    family: Arc<dyn SurfaceFamily3D>,
    delta: f64,
    chi: CutoffChi,
    base: &Box2,
    z: Interval,
) -> Result<TransversalSmoother3DS> {
    if !(delta > 0.0) {
        return Err(Error::Parameter(format!("delta = {delta} must be positive")));
    }
    let mut a_lo = f64::INFINITY;
    let mut a_hi = f64::NEG_INFINITY;
    for x in base.x.linspace(17) {
        for y in base.y.linspace(17) {
            a_lo = a_lo.min(project_pi_surface(&family, x, y, z.lo)?);
            a_hi = a_hi.max(project_pi_surface(&family, x, y, z.hi)?);
        }
    }
    let range = family.a_range();
    let j_min = ((a_lo / delta).floor() as i64 - 1).max((range.lo / delta - 1e-9).ceil() as i64);
    let j_max = ((a_hi / delta).ceil() as i64 + 1).min((range.hi / delta + 1e-9).floor() as i64);
    if j_max - j_min < 1 {
        return Err(Error::Construction(
            "surface family range too small for the grid spacing".into(),
        ));
    }
    Ok(TransversalSmoother3DS {
        family,
        delta,
        chi,
        base: *base,
        z,
        j_min,
        j_max,
    })
}

/// Leafwise partials of the smoother along the surface through `b`, by
/// central differences with one Richardson level.
pub fn eval_h_surface_partials(
    s: &TransversalSmoother3DS,
    b: f64,
    x0: f64,
    y0: f64,
    h: f64,
) -> Result<(f64, f64)> {
    if x0 - h < s.base.x.lo || x0 + h > s.base.x.hi || y0 - h < s.base.y.lo || y0 + h > s.base.y.hi
    {
        return Err(Error::Domain(format!(
            "stencil around ({x0}, {y0}) exits the base rectangle"
        )));
    }
    let gx = |x: f64| -> f64 {
        let z = s.family.eval(b, x, y0).expect("surface eval");
        s.eval(x, y0, z).expect("smoother eval")
    };
    let gy = |y: f64| -> f64 {
        let z = s.family.eval(b, x0, y).expect("surface eval");
        s.eval(x0, y, z).expect("smoother eval")
    };
    Ok((
        diff::central_richardson(gx, x0, h),
        diff::central_richardson(gy, y0, h),
    ))
}

/// Radial leafwise-derivative bound at base point (x, y).
pub fn prop2_bound(delta: f64, c_chi: f64, l_radial: f64, x: f64, y: f64) -> f64 {
    let r = (x * x + y * y).sqrt();
    delta
        * c_chi
        * (l_radial * 4.0f64.ln() + 2.0 * l_radial * (1.0 / delta).ln() * (l_radial * r).exp())
}

/// Measured leafwise partials of `h_delta` along `Gamma_b` against the radial
/// bound on an `n x n` base grid.
pub fn check_prop2_bounds(
    s: &TransversalSmoother3DS,
    b: f64,
    l: f64,
    radial_factor: f64,
    n: usize,
    fd_step: f64,
    slack: f64,
) -> Result<(BoundReport, BoundReport)> {
    let l_rad = l * radial_factor;
    let xs = s.base.x.inset(0.1).linspace(n);
    let ys = s.base.y.inset(0.1).linspace(n);
    let mut worst_x: Option<(f64, f64)> = None;
    let mut worst_y: Option<(f64, f64)> = None;
    let mut plateau_points = 0usize;
    for &x in &xs {
        for &y in &ys {
            // Plateau points have derivative exactly 0; still measured, so
            // they can never fail against a positive bound.
            let z = s.family.eval(b, x, y)?;
            let u = {
                let (_j, f_j, f_j1) = s.bracket(x, y, z)?;
                (z - f_j) / (f_j1 - f_j)
            };
            if !(0.25..=0.75).contains(&u) {
                plateau_points += 1;
            }
            let (dx, dy) = eval_h_surface_partials(s, b, x, y, fd_step)?;
            let bound = prop2_bound(s.delta, s.chi.deriv_bound(), l_rad, x, y);
            for (worst, d) in [(&mut worst_x, dx), (&mut worst_y, dy)] {
                match *worst {
                    Some((m, bd)) if d.abs() - bound <= m - bd => {}
                    _ => *worst = Some((d.abs(), bound)),
                }
            }
        }
    }
    let params = ReportParams {
        delta: Some(s.delta),
        l: Some(l_rad),
        ..Default::default()
    };
    let grid = format!("{n}x{n} base grid, b = {b}, {plateau_points} plateau points");
    let (mx, bx) = worst_x.unwrap();
    let (my, by) = worst_y.unwrap();
    Ok((
        BoundReport::new("prop2-dx", mx, bx, slack)
            .with_params(params)
            .with_grid(grid.clone()),
        BoundReport::new("prop2-dy", my, by, slack)
            .with_params(params)
            .with_grid(grid),
    ))
}

/// The composite surface approximant
/// `psi(x,y,z) = sum_j phi(x, y, f_{j/J}(x,y)) Lambda_j(h_delta(x,y,z))`.
pub struct CompositeApproximant3DS {
    pub phi: Phi3S,
    pub family: Arc<dyn SurfaceFamily3D>,
    pub partition: PartitionLambda,
    pub smoother: Arc<TransversalSmoother3DS>,
}

pub fn build_psi_surface(
    phi: Phi3S,
    family: Arc<dyn SurfaceFamily3D>,
    j_count: u32,
    smoother: Arc<TransversalSmoother3DS>,
) -> Result<CompositeApproximant3DS> {
    Ok(CompositeApproximant3DS {
        phi,
        family,
        partition: PartitionLambda::new(j_count)?,
        smoother,
    })
}

impl CompositeApproximant3DS {
    pub fn eval(&self, x: f64, y: f64, z: f64) -> Result<f64> {
        let h = self.smoother.eval(x, y, z)?;
        self.eval_at_label(x, y, h)
    }

    pub fn eval_at_label(&self, x: f64, y: f64, label: f64) -> Result<f64> {
        let jj = self.partition.j_count as f64;
        let range = self.family.a_range();
        let mut sum = 0.0;
        for j in self.partition.active(label) {
            let w = self.partition.eval(j, label);
            if w == 0.0 {
                continue;
            }
            let a = (j as f64 / jj).clamp(range.lo, range.hi);
            sum += self.phi.eval(x, y, self.family.eval(a, x, y)?) * w;
        }
        Ok(sum)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface3d::{FlatSurfaces, ProductOsgoodSurfaces, TiltedSurfaces};

    fn base() -> Box2 {
        Box2::new(
            Interval::new(-1.0, 1.0).unwrap(),
            Interval::new(-1.0, 1.0).unwrap(),
        )
    }

    fn flat() -> Arc<dyn SurfaceFamily3D> {
        Arc::new(FlatSurfaces {
            a_range: Interval::new(-5.0, 5.0).unwrap(),
        })
    }

    #[test]
    fn flat_grid_surface_is_exact() {
        let s = build_h_delta_surface(
            flat(),
            0.1,
            CutoffChi::cubic(),
            &base(),
            Interval::new(0.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!((s.eval(0.3, -0.2, 0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn tilted_depends_on_z_minus_x_minus_y() {
        let fam: Arc<dyn SurfaceFamily3D> = Arc::new(TiltedSurfaces {
            a_range: Interval::new(-5.0, 5.0).unwrap(),
        });
        let s = build_h_delta_surface(
            fam,
            0.1,
            CutoffChi::cubic(),
            &base(),
            Interval::new(-2.0, 3.0).unwrap(),
        )
        .unwrap();
        // z - x - y = 0.31: u = 0.1 <= 1/4 so chi = 1 and h = 0.3.
        let v = s.eval(0.5, 0.2, 0.31 + 0.5 + 0.2).unwrap();
        assert!((v - 0.3).abs() < 1e-12, "{v}");
        // Mid-gap: u = 1/2 gives (j + 1/2) delta.
        let v = s.eval(0.5, 0.2, 0.35 + 0.7).unwrap();
        assert!((v - 0.35).abs() < 1e-12, "{v}");
    }

    #[test]
    fn prop2_trivial_families_have_zero_derivative() {
        for fam in [
            flat(),
            Arc::new(TiltedSurfaces {
                a_range: Interval::new(-5.0, 5.0).unwrap(),
            }) as Arc<dyn SurfaceFamily3D>,
        ] {
            let s = build_h_delta_surface(
                fam,
                0.1,
                CutoffChi::cubic(),
                &base(),
                Interval::new(-2.0, 3.0).unwrap(),
            )
            .unwrap();
            let (rx, ry) = check_prop2_bounds(&s, 0.345, 1.45, RADIAL_L_FACTOR, 16, 1e-4, 1e-9)
                .unwrap();
            assert!(rx.pass && rx.measured < 1e-9, "{rx}");
            assert!(ry.pass && ry.measured < 1e-9, "{ry}");
        }
    }

    #[test]
    fn prop2_product_family_passes_radial_bound() {
        let fam: Arc<dyn SurfaceFamily3D> = Arc::new(ProductOsgoodSurfaces);
        let s = build_h_delta_surface(
            fam,
            0.05,
            CutoffChi::cubic(),
            &base(),
            Interval::new(0.05, 0.95).unwrap(),
        )
        .unwrap();
        let (rx, ry) =
            check_prop2_bounds(&s, 0.525, 1.45, RADIAL_L_FACTOR, 32, 1e-5, 1e-9).unwrap();
        assert!(rx.pass, "{rx}");
        assert!(ry.pass && ry.measured < 1e-9, "{ry}");
    }

    #[test]
    fn surface_results_match_planar_for_y_constant_families() {
        // ProductOsgoodSurfaces at fixed y must agree with the planar
        // canonical smoother to machine precision.
        let fam3: Arc<dyn SurfaceFamily3D> = Arc::new(ProductOsgoodSurfaces);
        let s3 = build_h_delta_surface(
            fam3,
            0.05,
            CutoffChi::cubic(),
            &base(),
            Interval::new(0.05, 0.95).unwrap(),
        )
        .unwrap();
        let fam2: Arc<dyn crate::family2d::LeafFamily2D> =
            Arc::new(crate::family2d::CanonicalOsgoodFamily);
        let k = Box2::new(
            Interval::new(-1.0, 1.0).unwrap(),
            Interval::new(0.05, 0.95).unwrap(),
        );
        let s2 = crate::smooth2d::build_h_delta(fam2, 0.05, CutoffChi::cubic(), &k).unwrap();
        for x in k.x.linspace(11) {
            for z in k.y.inset(0.05).linspace(11) {
                let v3 = s3.eval(x, 0.37, z).unwrap();
                let v2 = s2.eval(x, z).unwrap();
                assert!((v3 - v2).abs() <= 1e-12, "{v3} vs {v2}");
            }
        }
    }

    #[test]
    fn psi_surface_exactness_cases() {
        let s = Arc::new(
            build_h_delta_surface(
                flat(),
                1e-3,
                CutoffChi::cubic(),
                &base(),
                Interval::new(0.0, 1.0).unwrap(),
            )
            .unwrap(),
        );
        // phi = x is reproduced exactly by the partition of unity.
        let psi = build_psi_surface(Phi3S::new(|x, _, _| x), flat(), 10, s.clone()).unwrap();
        assert!((psi.eval(0.4, -0.3, 0.52).unwrap() - 0.4).abs() < 1e-12);

        // phi(x,y,z) = z on flat surfaces at label 0.35 blends to 0.35.
        let psi = build_psi_surface(Phi3S::new(|_, _, z| z), flat(), 10, s).unwrap();
        let v = psi.eval_at_label(0.0, 0.0, 0.35).unwrap();
        assert!((v - 0.35).abs() < 1e-12, "{v}");
    }
}
