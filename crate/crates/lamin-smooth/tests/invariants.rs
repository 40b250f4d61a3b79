//! Cross-module invariants checked at integration scale: leaf ordering,
//! projection round trips, slope consistency, and grid-node exactness of
//! the mollified field.

use lamin_smooth::catalog;
use lamin_smooth::domain::Interval;
use lamin_smooth::family2d::{
    osgood_slope, project_pi, CanonicalOsgoodFamily, LeafFamily2D, PerturbedAffineFamily,
};
use lamin_smooth::ode::IntegratorParams;
use lamin_smooth::slope::{SlopeField3D, L_FLOOR};
use lamin_smooth::smooth3d_curve::{
    build_f_delta, integrate_approx_leaf, project_pi_delta, BuildParams,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn plane_families() -> Vec<(&'static str, std::sync::Arc<dyn LeafFamily2D>)> {
    catalog::PLANE_FAMILIES
        .iter()
        .map(|id| (*id, catalog::plane_family(id).expect("family")))
        .collect()
}

#[test]
fn leaves_stay_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (id, family) in plane_families() {
        let range = family.a_range().inset(0.02);
        for _ in 0..1_000 {
            let a1 = rng.gen_range(range.lo..range.hi);
            let a2 = rng.gen_range(range.lo..range.hi);
            let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
            if hi - lo < 1e-12 {
                continue;
            }
            let x = rng.gen_range(-1.0..1.0);
            let y_lo = family.eval(lo, x).unwrap();
            let y_hi = family.eval(hi, x).unwrap();
            assert!(
                y_lo < y_hi,
                "{id}: leaves crossed at x = {x}: f_{lo}(x) = {y_lo} >= f_{hi}(x) = {y_hi}"
            );
        }
    }
}

#[test]
fn projection_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (id, family) in plane_families() {
        let range = family.a_range().inset(0.02);
        for _ in 0..1_000 {
            let a = rng.gen_range(range.lo..range.hi);
            let x = rng.gen_range(-1.0..1.0);
            let y = family.eval(a, x).unwrap();
            let back = project_pi(family.as_ref(), x, y).unwrap();
            assert!(
                (back - a).abs() <= 1e-9,
                "{id}: pi(x, f_a(x)) = {back} vs a = {a} at x = {x}"
            );
        }
    }
}

#[test]
fn slope_matches_generating_field() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let canonical = CanonicalOsgoodFamily;
    let range = CanonicalOsgoodFamily::A_RANGE.inset(0.05);
    for _ in 0..1_000 {
        let a = rng.gen_range(range.lo..range.hi);
        let x = rng.gen_range(-1.0..1.0);
        let y = canonical.eval(a, x).unwrap();
        let s = canonical.slope(a, x).unwrap();
        assert!(
            (s - osgood_slope(y)).abs() <= 1e-9,
            "slope mismatch at a = {a}, x = {x}: {s} vs {}",
            osgood_slope(y)
        );
    }
}

#[test]
fn perturbed_family_slope_by_finite_difference() {
    let family = PerturbedAffineFamily;
    let range = PerturbedAffineFamily::A_RANGE.inset(0.05);
    for a in range.linspace(20) {
        for x in Interval::new(-1.0, 1.0).unwrap().linspace(20) {
            let s = family.slope(a, x).unwrap();
            let h = 1e-6;
            let fd = (family.eval(a, x + h).unwrap() - family.eval(a, x - h).unwrap()) / (2.0 * h);
            assert!(
                (s - fd).abs() <= 1e-6,
                "slope vs finite difference at a = {a}, x = {x}: {s} vs {fd}"
            );
        }
    }
}

#[test]
fn mollified_field_exact_at_grid_nodes() {
    let delta = 0.05;
    let (field, bb) = catalog::slope_field_3d("canonical-osgood-3d").expect("field");
    let sf = build_f_delta(field.clone(), delta, bb, L_FLOOR, &BuildParams::default()).unwrap();
    // The canonical field does not depend on x, so each mollified strand is
    // constant and F_delta interpolates the field exactly on the strand grid.
    let (cov_y1, cov_y2) = sf.coverage_y();
    let (m_lo, m_hi) = (
        (cov_y1.lo / delta).round() as i64,
        (cov_y1.hi / delta).round() as i64,
    );
    let (n_lo, n_hi) = (
        (cov_y2.lo / delta).round() as i64,
        (cov_y2.hi / delta).round() as i64,
    );
    for m in m_lo..=m_hi {
        for n in n_lo..=n_hi {
            let y = [m as f64 * delta, n as f64 * delta];
            for x in [-0.9, 0.0, 0.7] {
                let fd = sf.eval(x, y).unwrap();
                let f = field.eval(x, y);
                let err = (fd[0] - f[0]).hypot(fd[1] - f[1]);
                assert!(err <= 1e-12, "node ({m}, {n}) at x = {x}: |F_delta - F| = {err}");
            }
        }
    }
}

#[test]
fn pi_delta_round_trip() {
    let delta = 1e-3;
    let (field, bb) = catalog::slope_field_3d("canonical-osgood-3d").expect("field");
    let sf = build_f_delta(field, delta, bb, L_FLOOR, &BuildParams::default()).unwrap();
    let params = IntegratorParams::default();
    for a in [[0.2, 0.3], [0.5, 0.5], [0.8, 0.6]] {
        for x in [-0.5, 0.25, 0.5] {
            let y = integrate_approx_leaf(&sf, a, x, &params).unwrap();
            let back = project_pi_delta(&sf, x, y, &params).unwrap();
            let err = (back[0] - a[0]).hypot(back[1] - a[1]);
            assert!(err <= 1e-8, "pi_delta round trip at a = {a:?}, x = {x}: {err}");
        }
    }
}
