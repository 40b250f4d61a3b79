//! The surface-lamination smoother: h_delta over graph surfaces in
//! three-space, with the radial leafwise derivative bound.
//!
//! Run with: cargo run --example surface_smoothing

use lamin_smooth::catalog;
use lamin_smooth::chi::CutoffChi;
use lamin_smooth::domain::{Box2, Interval};
use lamin_smooth::slope::L_FLOOR;
use lamin_smooth::smooth3d_surface::{
    build_h_delta_surface, check_prop2_bounds, RADIAL_L_FACTOR,
};

fn main() -> lamin_smooth::Result<()> {
    let family = catalog::surface_family("canonical-osgood")?;
    let base = Box2::new(Interval::new(-1.0, 1.0)?, Interval::new(-1.0, 1.0)?);
    let z = Interval::new(0.05, 0.95)?;
    let delta = 0.05;
    let s = build_h_delta_surface(family.clone(), delta, CutoffChi::cubic(), &base, z)?;

    // On a grid surface the smoother is exact.
    println!("h_delta on grid surface a = 0.40 at (0.2, -0.3): {:.12}", {
        use lamin_smooth::surface3d::SurfaceFamily3D;
        let zz = family.eval(0.40, 0.2, -0.3)?;
        s.eval(0.2, -0.3, zz)?
    });

    // Mid-gap surface: both leafwise partials against the radial bound,
    // which grows like exp(L sqrt(x^2 + y^2)).
    let (dx, dy) = check_prop2_bounds(&s, 0.425, L_FLOOR, RADIAL_L_FACTOR, 48, 1e-5, 0.0)?;
    println!("{dx}");
    println!("{dy}");
    Ok(())
}
