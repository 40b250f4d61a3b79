//! Approximate a partially smooth function by a globally C1 composite:
//! psi(x, y) = sum_j phi(x, f_{j/J}(x)) Lambda_j(h_delta(x, y)).
//!
//! Run with: cargo run --example composite_approximant

use lamin_smooth::catalog;
use lamin_smooth::chi::CutoffChi;
use lamin_smooth::domain::{Box2, Interval};
use lamin_smooth::family2d::Phi2;
use lamin_smooth::smooth2d::report_theorem1;

fn main() -> lamin_smooth::Result<()> {
    let family = catalog::plane_family("canonical-osgood")?;
    let k = Box2::new(Interval::new(-1.0, 1.0)?, Interval::new(0.05, 0.95)?);

    // phi(x, y) = y is continuous and C1 along every leaf, but the leaves
    // themselves are only continuous transversally.
    let phi = Phi2::new(|_x, y| y);

    for j_count in [16u32, 32, 64] {
        let delta = 1.0 / (j_count as f64 * j_count as f64);
        let (c0, c1) = report_theorem1(
            &phi,
            family.clone(),
            &k,
            0.05,
            delta,
            j_count,
            CutoffChi::cubic(),
            40,
            30,
        )?;
        println!(
            "J = {j_count:>2}, delta = {delta:.2e}: sup|psi - phi| = {:.4e}, \
             sup leafwise C1 error = {:.4e}",
            c0.measured, c1.measured
        );
    }
    Ok(())
}
