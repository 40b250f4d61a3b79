//! Families of disjoint curve graphs `y = f_a(x)` in the plane, normalized by
//! `f_a(0) = a`, together with the leaf projection and leafwise derivatives.

use crate::diff;
use crate::domain::Interval;
use crate::error::{Error, Result};
use crate::ode::{integrate_refined, IntegratorParams};
use crate::slope::SlopeField2D;
use dashmap::DashMap;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    OdeIntegrated,
}

pub trait LeafFamily2D: Send + Sync {
    /// `f_a(x)`.
    fn eval(&self, a: f64, x: f64) -> Result<f64>;

    /// `f_a'(x)`.
    fn slope(&self, a: f64, x: f64) -> Result<f64>;

    fn a_range(&self) -> Interval;

    fn provenance(&self) -> Provenance;

    /// Analytic inverse of the leaf projection, when the family has one.
    fn pi_analytic(&self, _x: f64, _y: f64) -> Option<f64> {
        None
    }
}

impl LeafFamily2D for Arc<dyn LeafFamily2D> {
    fn eval(&self, a: f64, x: f64) -> Result<f64> {
        (**self).eval(a, x)
    }
    fn slope(&self, a: f64, x: f64) -> Result<f64> {
        (**self).slope(a, x)
    }
    fn a_range(&self) -> Interval {
        (**self).a_range()
    }
    fn provenance(&self) -> Provenance {
        (**self).provenance()
    }
    fn pi_analytic(&self, x: f64, y: f64) -> Option<f64> {
        (**self).pi_analytic(x, y)
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

/// Constant leaves `f_a(x) = a`.
pub struct FlatFamily {
    pub a_range: Interval,
}

impl LeafFamily2D for FlatFamily {
    fn eval(&self, a: f64, _x: f64) -> Result<f64> {
        check_a(self.a_range, a)?;
        Ok(a)
    }
    fn slope(&self, a: f64, _x: f64) -> Result<f64> {
        check_a(self.a_range, a)?;
        Ok(0.0)
    }
    fn a_range(&self) -> Interval {
        self.a_range
    }
    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
    fn pi_analytic(&self, _x: f64, y: f64) -> Option<f64> {
        Some(y)
    }
}

/// Unit-slope leaves `f_a(x) = a + x`.
pub struct AffineFamily {
    pub a_range: Interval,
}

impl LeafFamily2D for AffineFamily {
    fn eval(&self, a: f64, x: f64) -> Result<f64> {
        check_a(self.a_range, a)?;
        Ok(a + x)
    }
    fn slope(&self, a: f64, _x: f64) -> Result<f64> {
        check_a(self.a_range, a)?;
        Ok(1.0)
    }
    fn a_range(&self) -> Interval {
        self.a_range
    }
    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
    fn pi_analytic(&self, x: f64, y: f64) -> Option<f64> {
        Some(y - x)
    }
}

/// Leaves of the Osgood equation `y' = y log(1/y)` on (0, 1):
/// `f_a(x) = a^(exp(-x))`, extended by the constant leaves at a = 0 and a = 1.
pub struct CanonicalOsgoodFamily;

impl CanonicalOsgoodFamily {
    pub const A_RANGE: Interval = Interval { lo: 0.0, hi: 1.0 };
}

impl LeafFamily2D for CanonicalOsgoodFamily {
    fn eval(&self, a: f64, x: f64) -> Result<f64> {
        check_a(Self::A_RANGE, a)?;
        if a == 0.0 {
            return Ok(0.0);
        }
        Ok((a.ln() * (-x).exp()).exp())
    }
    fn slope(&self, a: f64, x: f64) -> Result<f64> {
        let y = self.eval(a, x)?;
        Ok(osgood_slope(y))
    }
    fn a_range(&self) -> Interval {
        Self::A_RANGE
    }
    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
    fn pi_analytic(&self, x: f64, y: f64) -> Option<f64> {
        if !(0.0..=1.0).contains(&y) {
            return None;
        }
        if y == 0.0 {
            return Some(0.0);
        }
        Some((y.ln() * x.exp()).exp())
    }
}

/// Slope of the canonical Osgood field, `y log(1/y)` on (0, 1), zero outside.
pub fn osgood_slope(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        y * (1.0 / y).ln()
    }
}

/// `f_a(x) = a + a^2 sin x`, a in [0, 1/4]. Graphs stay disjoint:
/// df/da = 1 + 2a sin x >= 1/2 on this range.
pub struct PerturbedAffineFamily;

impl PerturbedAffineFamily {
    pub const A_RANGE: Interval = Interval { lo: 0.0, hi: 0.25 };
}

impl LeafFamily2D for PerturbedAffineFamily {
    fn eval(&self, a: f64, x: f64) -> Result<f64> {
        check_a(Self::A_RANGE, a)?;
        Ok(a + a * a * x.sin())
    }
    fn slope(&self, a: f64, x: f64) -> Result<f64> {
        check_a(Self::A_RANGE, a)?;
        Ok(a * a * x.cos())
    }
    fn a_range(&self) -> Interval {
        Self::A_RANGE
    }
    fn provenance(&self) -> Provenance {
        Provenance::ClosedForm
    }
}

/// Bisection tolerance in y for the leaf projection.
pub const PI_TOL: f64 = 1e-10;
const PI_MAX_ITER: usize = 200;

/// The leaf projection: the unique `a` with `f_a(x) = y`, found by bisection
/// using the family's monotone ordering in `a`.
pub fn project_pi(family: &dyn LeafFamily2D, x: f64, y: f64) -> Result<f64> {
    if let Some(a) = family.pi_analytic(x, y) {
        return Ok(a);
    }
    let range = family.a_range();
    let (mut lo, mut hi) = (range.lo, range.hi);
    let f_lo = family.eval(lo, x)?;
    let f_hi = family.eval(hi, x)?;
    if y < f_lo - PI_TOL || y > f_hi + PI_TOL {
        return Err(Error::Coverage(format!(
            "y = {y} at x = {x} not bracketed by leaves [{f_lo}, {f_hi}]"
        )));
    }
    for _ in 0..PI_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let fm = family.eval(mid, x)?;
        if (fm - y).abs() <= PI_TOL || hi - lo < f64::EPSILON * mid.abs().max(1.0) {
            return Ok(mid);
        }
        if fm < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Bisection has contracted |f - y| below tolerance in well under 200
    // iterations for any family with bounded slope in a; reaching here means
    // the evaluator is too noisy.
    let mid = 0.5 * (lo + hi);
    let fm = family.eval(mid, x)?;
    if (fm - y).abs() <= 10.0 * PI_TOL {
        Ok(mid)
    } else {
        Err(Error::Numeric(format!(
            "projection bisection stalled at a = {mid}, residual {}",
            (fm - y).abs()
        )))
    }
}

/// A member of the partially smooth class: continuous, C1 along each leaf.
#[derive(Clone)]
pub struct Phi2 {
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    /// Analytic leafwise derivative `d/dx phi(x, f_a(x))`, when known.
    leaf_deriv: Option<Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>>,
}

impl Phi2 {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            leaf_deriv: None,
        }
    }

    pub fn with_leaf_deriv(
        mut self,
        d: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.leaf_deriv = Some(Arc::new(d));
        self
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.eval)(x, y)
    }

    pub fn leaf_deriv_analytic(&self, x: f64, y: f64) -> Option<f64> {
        self.leaf_deriv.as_ref().map(|d| d(x, y))
    }
}

/// Central-difference (one Richardson level) estimate of
/// `d/dx [phi(x, f_a(x))]` along the single leaf through parameter `a`.
pub fn leafwise_derivative(
    phi: &Phi2,
    family: &dyn LeafFamily2D,
    a: f64,
    x0: f64,
    x_domain: Interval,
    h: f64,
) -> Result<f64> {
    if x0 - h < x_domain.lo || x0 + h > x_domain.hi {
        return Err(Error::Domain(format!(
            "stencil [{}, {}] exits x-domain",
            x0 - h,
            x0 + h
        )));
    }
    let g = |x: f64| phi.eval(x, family.eval(a, x).expect("leaf eval inside stencil"));
    Ok(diff::central_richardson(g, x0, h))
}

/// One cached, densely interpolated integral curve of a slope field.
struct LeafCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    /// Valid x span (shorter than requested when the solution left the box).
    valid: Interval,
}

impl LeafCurve {
    fn eval(&self, x: f64) -> Result<f64> {
        if !self.valid.contains(x) {
            return Err(Error::Truncation {
                exit_x: if x < self.valid.lo {
                    self.valid.lo
                } else {
                    self.valid.hi
                },
            });
        }
        let i = match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => return Ok(self.ys[i]),
            Err(i) => i.clamp(1, self.xs.len() - 1) - 1,
        };
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        // Cubic Hermite with the field's slopes at the stations.
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1)
    }
}

/// A leaf family reconstructed from a slope field by ODE integration,
/// with per-leaf caching at grid x-stations and dense Hermite interpolation.
pub struct IntegratedFamily2D {
    field: Arc<dyn SlopeField2D>,
    a_range: Interval,
    x_domain: Interval,
    /// Solutions leaving this y-window are truncated.
    y_guard: Interval,
    station_step: f64,
    params: IntegratorParams,
    cache: DashMap<u64, Arc<LeafCurve>>,
}

impl IntegratedFamily2D {
    pub fn new(
        field: Arc<dyn SlopeField2D>,
        a_range: Interval,
        x_domain: Interval,
        y_guard: Interval,
        params: IntegratorParams,
    ) -> Self {
        Self {
            field,
            a_range,
            x_domain,
            y_guard,
            station_step: 1.0 / 128.0,
            params,
            cache: DashMap::new(),
        }
    }

    fn leaf(&self, a: f64) -> Arc<LeafCurve> {
        self.cache
            .entry(a.to_bits())
            .or_insert_with(|| Arc::new(self.build_leaf(a)))
            .clone()
    }

    fn build_leaf(&self, a: f64) -> LeafCurve {
        let f = |x: f64, y: [f64; 1]| [self.field.eval(x, y[0])];
        let guard = |y: [f64; 1]| self.y_guard.contains(y[0]);
        let n_fwd = (self.x_domain.hi.max(0.0) / self.station_step).ceil() as usize;
        let n_bwd = ((-self.x_domain.lo).max(0.0) / self.station_step).ceil() as usize;

        let mut xs = vec![0.0];
        let mut ys = vec![a];
        let mut valid = Interval { lo: 0.0, hi: 0.0 };
        // Forward from x = 0, one station at a time.
        let mut y = a;
        for k in 1..=n_fwd {
            let x0 = (k - 1) as f64 * self.station_step;
            let x1 = (k as f64 * self.station_step).min(self.x_domain.hi);
            match integrate_refined(&f, x0, [y], x1, &self.params, &guard) {
                Ok(state) => {
                    y = state[0];
                    xs.push(x1);
                    ys.push(y);
                    valid.hi = x1;
                }
                Err(_) => break,
            }
        }
        // Backward from x = 0.
        let mut y = a;
        let mut bx = Vec::new();
        let mut by = Vec::new();
        for k in 1..=n_bwd {
            let x0 = -((k - 1) as f64) * self.station_step;
            let x1 = (-(k as f64) * self.station_step).max(self.x_domain.lo);
            match integrate_refined(&f, x0, [y], x1, &self.params, &guard) {
                Ok(state) => {
                    y = state[0];
                    bx.push(x1);
                    by.push(y);
                    valid.lo = x1;
                }
                Err(_) => break,
            }
        }
        bx.reverse();
        by.reverse();
        bx.extend(xs);
        by.extend(ys);
        let slopes = bx
            .iter()
            .zip(by.iter())
            .map(|(&x, &y)| self.field.eval(x, y))
            .collect();
        LeafCurve {
            xs: bx,
            ys: by,
            slopes,
            valid,
        }
    }

    /// The x span on which the leaf through `a` actually exists in the box.
    pub fn valid_span(&self, a: f64) -> Result<Interval> {
        check_a(self.a_range, a)?;
        Ok(self.leaf(a).valid)
    }
}

impl LeafFamily2D for IntegratedFamily2D {
    fn eval(&self, a: f64, x: f64) -> Result<f64> {
        check_a(self.a_range, a)?;
        if x == 0.0 {
            return Ok(a); // normalization is exact at the base slice
        }
        self.leaf(a).eval(x)
    }

    fn slope(&self, a: f64, x: f64) -> Result<f64> {
        let y = self.eval(a, x)?;
        Ok(self.field.eval(x, y))
    }

    fn a_range(&self) -> Interval {
        self.a_range
    }

    fn provenance(&self) -> Provenance {
        Provenance::OdeIntegrated
    }
}

/// Reconstruct a leaf family from a slope field by integrating `dy/dx = F`
/// forward and backward from the base slice `x = 0`.
pub fn family_from_slope_field(
    field: Arc<dyn SlopeField2D>,
    a_range: Interval,
    x_domain: Interval,
    y_guard: Interval,
    params: IntegratorParams,
) -> IntegratedFamily2D {
    IntegratedFamily2D::new(field, a_range, x_domain, y_guard, params)
}

/// View a leaf family as the slope field `F(x, y) = f_a'(x)` for `y = f_a(x)`.
pub struct FamilySlopeField2D<F: LeafFamily2D> {
    pub family: F,
}

impl<F: LeafFamily2D> SlopeField2D for FamilySlopeField2D<F> {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match project_pi(&self.family, x, y) {
            Ok(a) => self.family.slope(a, x).unwrap_or(0.0),
            Err(_) => {
                // Outside coverage: clamp to the nearest boundary leaf.
                let r = self.family.a_range();
                let lo = self.family.eval(r.lo, x).unwrap_or(f64::NEG_INFINITY);
                let a = if y <= lo { r.lo } else { r.hi };
                self.family.slope(a, x).unwrap_or(0.0)
            }
        }
    }
}
