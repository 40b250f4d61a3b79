//! Build the transversal smoother h_delta for a plane lamination and measure
//! how well it approximates the leaf projection.
//!
//! Run with: cargo run --example smooth_transversal_2d

use lamin_smooth::catalog;
use lamin_smooth::chi::CutoffChi;
use lamin_smooth::domain::{Box2, Interval};
use lamin_smooth::family2d::{project_pi, LeafFamily2D};
use lamin_smooth::smooth2d::{build_h_delta, eval_h_leafwise_deriv, h_delta_errors};

fn main() -> lamin_smooth::Result<()> {
    let family = catalog::plane_family("canonical-osgood")?;
    let k = Box2::new(Interval::new(-1.0, 1.0)?, Interval::new(0.05, 0.95)?);
    let delta = 0.05;
    let s = build_h_delta(family.clone(), delta, CutoffChi::cubic(), &k)?;

    // Grid leaves are reproduced exactly; between them h_delta blends.
    let x = 0.3;
    for a in [0.40, 0.41, 0.425, 0.45] {
        let y = family.eval(a, x)?;
        println!(
            "a = {a:.3}: h_delta = {:.6}, pi = {:.6}",
            s.eval(x, y)?,
            project_pi(&family, x, y)?
        );
    }

    // Leafwise derivative: exactly zero on plateaus, small everywhere.
    for b in [0.40, 0.405, 0.425] {
        let d = eval_h_leafwise_deriv(&s, b, 0.3, 1e-5)?;
        println!("leafwise d/dx h_delta along b = {b:.3}: {d:.6e}");
    }

    let (c0, c1) = h_delta_errors(&s, 64, 64, 40, 1e-5)?;
    println!("sup |h_delta - pi|   = {c0:.6e} (grid gap delta = {delta})");
    println!("sup |d/dx h_delta|   = {c1:.6e}");
    Ok(())
}
