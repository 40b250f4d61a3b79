//! The example-family catalog shared by the CLI and the config layer.
//!
//! Identifiers: "flat", "affine", "canonical-osgood", "perturbed-affine",
//! "canonical-osgood-3d", and "slope-field:<path>" for a sampled field file.
//! Surface variants reuse the planar ids, with "affine" mapping to the tilted
//! planes `a + x + y`.

use crate::curve3d::{AffineCurves3D, CanonicalOsgoodCurves3D, CurveFamily3D, FlatCurves3D};
use crate::domain::{Box3, Interval};
use crate::error::{Error, Result};
use crate::family2d::{
    osgood_slope, AffineFamily, CanonicalOsgoodFamily, FlatFamily, LeafFamily2D,
    PerturbedAffineFamily,
};
use crate::slope::{FnField3D, SampledField3D, SlopeField3D};
use crate::surface3d::{FlatSurfaces, ProductOsgoodSurfaces, SurfaceFamily3D, TiltedSurfaces};
use std::path::Path;
use std::sync::Arc;

pub const PLANE_FAMILIES: &[&str] = &["flat", "affine", "canonical-osgood", "perturbed-affine"];
pub const FIELD_FAMILIES: &[&str] = &["canonical-osgood-3d", "slope-field:<path>"];

/// Default parameter range used for the unbounded catalog families.
fn open_range() -> Interval {
    Interval { lo: -4.0, hi: 4.0 }
}

pub fn plane_family(id: &str) -> Result<Arc<dyn LeafFamily2D>> {
    match id {
        "flat" => Ok(Arc::new(FlatFamily {
            a_range: open_range(),
        })),
        "affine" => Ok(Arc::new(AffineFamily {
            a_range: open_range(),
        })),
        "canonical-osgood" => Ok(Arc::new(CanonicalOsgoodFamily)),
        "perturbed-affine" => Ok(Arc::new(PerturbedAffineFamily)),
        _ => Err(Error::Input(format!(
            "unknown plane family '{id}' (expected one of {PLANE_FAMILIES:?})"
        ))),
    }
}

pub fn surface_family(id: &str) -> Result<Arc<dyn SurfaceFamily3D>> {
    match id {
        "flat" => Ok(Arc::new(FlatSurfaces {
            a_range: open_range(),
        })),
        "affine" => Ok(Arc::new(TiltedSurfaces {
            a_range: open_range(),
        })),
        "canonical-osgood" => Ok(Arc::new(ProductOsgoodSurfaces)),
        _ => Err(Error::Input(format!(
            "unknown surface family '{id}' (expected flat, affine, or canonical-osgood)"
        ))),
    }
}

pub fn curve_family_3d(id: &str) -> Result<Arc<dyn CurveFamily3D>> {
    match id {
        "flat" => Ok(Arc::new(FlatCurves3D {
            a_box: (open_range(), open_range()),
        })),
        "affine" => Ok(Arc::new(AffineCurves3D {
            a_box: (open_range(), open_range()),
        })),
        "canonical-osgood-3d" => Ok(Arc::new(CanonicalOsgoodCurves3D)),
        _ => Err(Error::Input(format!(
            "no 3D curve family '{id}' (expected flat, affine, or canonical-osgood-3d)"
        ))),
    }
}

/// The slope field paired with a 3D family id, plus a default box when the
/// id does not carry one of its own.
pub fn slope_field_3d(id: &str) -> Result<(Arc<dyn SlopeField3D>, Box3)> {
    if let Some(path) = id.strip_prefix("slope-field:") {
        let field = SampledField3D::load(Path::new(path))?;
        let bb = field.bounding_box();
        return Ok((Arc::new(field), bb));
    }
    match id {
        "flat" => Ok((
            Arc::new(FnField3D(|_x, _y| [0.0, 0.0])),
            default_box_3d(),
        )),
        "affine" => Ok((
            Arc::new(FnField3D(|_x, _y| [1.0, 0.0])),
            Box3::new(
                Interval { lo: -1.0, hi: 1.0 },
                Interval { lo: -2.0, hi: 2.0 },
                Interval { lo: -2.0, hi: 2.0 },
            ),
        )),
        "canonical-osgood-3d" => Ok((
            Arc::new(FnField3D(|_x, y: [f64; 2]| [osgood_slope(y[0]), 0.0])),
            default_box_3d(),
        )),
        _ => Err(Error::Input(format!(
            "unknown 3D slope field '{id}' (expected one of {FIELD_FAMILIES:?} or flat/affine)"
        ))),
    }
}

/// The canonical-osgood-3d test box: |x| <= 1, y in [0.05, 0.95]^2.
pub fn default_box_3d() -> Box3 {
    Box3::new(
        Interval { lo: -1.0, hi: 1.0 },
        Interval { lo: 0.05, hi: 0.95 },
        Interval { lo: 0.05, hi: 0.95 },
    )
}
