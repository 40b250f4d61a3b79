//! Randomized property checks over the cutoff, the partition of unity, the
//! transversal smoother, and config serialization.

use std::sync::Arc;

use lamin_smooth::chi::{ChiVariant, CutoffChi};
use lamin_smooth::config::ExperimentConfig;
use lamin_smooth::domain::{Box2, Interval};
use lamin_smooth::family2d::FlatFamily;
use lamin_smooth::smooth2d::{build_h_delta, PartitionLambda};
use proptest::prelude::*;

proptest! {
    #[test]
    fn chi_range_and_plateaus(t in -0.5f64..1.5, variant in prop_oneof![
        Just(ChiVariant::Cubic),
        Just(ChiVariant::Bump),
    ]) {
        let chi = CutoffChi::new(variant);
        let v = chi.eval(t);
        prop_assert!((0.0..=1.0).contains(&v));
        if t <= 0.25 {
            prop_assert_eq!(v, 1.0);
            prop_assert_eq!(chi.deriv(t), 0.0);
        }
        if t >= 0.75 {
            prop_assert_eq!(v, 0.0);
            prop_assert_eq!(chi.deriv(t), 0.0);
        }
        prop_assert!(chi.deriv(t).abs() <= chi.deriv_bound());
    }

    #[test]
    fn chi_monotone_decreasing(a in 0.0f64..1.0, b in 0.0f64..1.0, variant in prop_oneof![
        Just(ChiVariant::Cubic),
        Just(ChiVariant::Bump),
    ]) {
        let chi = CutoffChi::new(variant);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(chi.eval(lo) >= chi.eval(hi));
    }

    #[test]
    fn partition_sums_to_one(a in 0.0f64..1.0, j_count in 1u32..96) {
        let lambda = PartitionLambda::new(j_count).unwrap();
        let [lo, hi] = lambda.active(a);
        let sum: f64 = (lo..=hi).map(|j| lambda.eval(j, a)).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12, "sum = {sum} at a = {a}, J = {j_count}");
    }

    #[test]
    fn smoother_monotone_in_y(
        x in -1.0f64..1.0,
        y1 in 0.1f64..0.9,
        y2 in 0.1f64..0.9,
        delta in 0.01f64..0.2,
    ) {
        // Headroom beyond [0, 1] keeps the grid-leaf clamp from binding at
        // coarse delta, so every sampled y stays bracketed.
        let family = Arc::new(FlatFamily { a_range: Interval::new(-1.0, 2.0).unwrap() });
        let k = Box2::new(
            Interval::new(-1.0, 1.0).unwrap(),
            Interval::new(0.05, 0.95).unwrap(),
        );
        let h = build_h_delta(family, delta, CutoffChi::cubic(), &k).unwrap();
        let (lo, hi) = if y1 < y2 { (y1, y2) } else { (y2, y1) };
        prop_assert!(h.eval(x, lo).unwrap() <= h.eval(x, hi).unwrap() + 1e-12);
    }

    #[test]
    fn config_toml_round_trip(
        tau in 0.05f64..0.95,
        // TOML integers are i64, which caps seeds a config file can hold.
        seed in 0u64..=i64::MAX as u64,
        nx in 2usize..512,
    ) {
        let mut config = ExperimentConfig::default();
        config.smoothing.tau = tau;
        config.seed = seed;
        config.sampling.nx = nx;
        let text = toml::to_string(&config).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        prop_assert_eq!(config, back);
    }
}

#[test]
fn partition_translates_by_grid_step() {
    let lambda = PartitionLambda::new(16).unwrap();
    for a in Interval::new(0.1, 0.8).unwrap().linspace(50) {
        let v = lambda.eval(4, a);
        let shifted = lambda.eval(5, a + 1.0 / 16.0);
        assert!((v - shifted).abs() <= 1e-12);
    }
}
