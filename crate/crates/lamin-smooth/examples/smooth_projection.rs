//! The smooth leaf projection pi_delta: flow backward along the mollified
//! field to the base slice, then verify its quantitative estimates (leaf
//! deviation, leaf separation, gradient, and the final leafwise bound).
//!
//! Run with: cargo run --example smooth_projection

use lamin_smooth::catalog;
use lamin_smooth::curve3d::CanonicalOsgoodCurves3D;
use lamin_smooth::ode::IntegratorParams;
use lamin_smooth::slope::L_FLOOR;
use lamin_smooth::smooth3d_curve::{
    build_f_delta, check_corollary1, check_grad_pi_and_final, check_leaf_separation,
    integrate_approx_leaf, project_pi_delta, select_polydisk, BuildParams,
};

fn main() -> lamin_smooth::Result<()> {
    let delta = 1e-3;
    let (field, bb) = catalog::slope_field_3d("canonical-osgood-3d")?;
    let sf = build_f_delta(field, delta, bb, L_FLOOR, &BuildParams::default())?;
    let params = IntegratorParams::default();

    // Round trip: integrate a leaf out, project back to its label.
    let a = [0.25, 0.5];
    let y = integrate_approx_leaf(&sf, a, 0.5, &params)?;
    let back = project_pi_delta(&sf, 0.5, y, &params)?;
    println!("leaf through {a:?} at x = 0.5: {y:?}");
    println!("projected back:               {back:?}");

    // Deviation from the true lamination stays below delta^tau on the window.
    let a_samples: Vec<[f64; 2]> = (0..5)
        .flat_map(|i| (0..5).map(move |k| [0.2 + 0.15 * i as f64, 0.2 + 0.15 * k as f64]))
        .collect();
    let dev = check_corollary1(&sf, &CanonicalOsgoodCurves3D, &a_samples, 0.5, 60, &params, 0.0)?;
    println!("{dev}");

    // Nearby leaves spread no faster than delta^(-C|x|).
    let sep = check_leaf_separation(&sf, [0.5, 0.5], [7e-5, 7e-5], 0.4 / sf.c, 21, &params, 1e-9)?;
    println!("{}", sep.lower);
    println!("{}", sep.upper);

    // On a polydisk with C R <= 1/2 the projection is quantitatively smooth.
    let disk = select_polydisk(&sf, [0.5, 0.5], &params)?;
    let (grad, fin) = check_grad_pi_and_final(
        &sf,
        &CanonicalOsgoodCurves3D,
        &disk,
        (3, 5),
        (9, 5),
        &params,
        0.0,
    )?;
    println!("polydisk radius R = {:.4} (C = {:.3})", disk.radius, sf.c);
    println!("{grad}");
    println!("{fin}");
    Ok(())
}
