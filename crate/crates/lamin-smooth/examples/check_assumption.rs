//! Estimate the log-Lipschitz modulus of a slope field and check the basic
//! assumption against a declared constant.
//!
//! Run with: cargo run --example check_assumption

use lamin_smooth::domain::{Box2, Interval};
use lamin_smooth::slope::{
    check_basic_assumption_2d, estimate_log_lipschitz_2d, FnField2D, L_FLOOR,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lamin_smooth::Result<()> {
    // The canonical Osgood field y' = y log(1/y): log-Lipschitz but not
    // Lipschitz near y = 0.
    let field = FnField2D(|_x, y: f64| if y > 0.0 { y * (1.0 / y).ln() } else { 0.0 });
    let domain = Box2::new(
        Interval::new(-1.0, 1.0)?,
        Interval::new(0.01, 0.5)?,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let est = estimate_log_lipschitz_2d(&field, &domain, 5_000, &mut rng)?;
    println!("estimated L          = {:.6}", est.l);
    println!("effective L          = {:.6} (floor {L_FLOOR})", est.l_effective);
    println!("sampled pairs        = {}", est.samples);
    if let Some(w) = &est.witness {
        println!(
            "worst pair           = x = {:.4}, y = {:.6} vs {:.6} (ratio {:.6})",
            w.x, w.y[0], w.y_other[0], w.ratio
        );
    }

    // The declared constant must dominate every sampled modulus ratio.
    let report = check_basic_assumption_2d(&field, &domain, L_FLOOR, 5_000, 1e-3, &mut rng)?;
    println!("{report}");
    Ok(())
}
