use proptest::prelude::*;
use rayon::prelude::*;

use fsde::longrun::{contraction_diagnostic, ergodic_average, hitting_time, PhiTag};
use fsde::noise::sample_fbm_rep;
use fsde::scheme::solve_path;
use fsde::{DriftSpec, NoiseConfig, TimeGrid};

#[test]
fn contraction_ratio_stays_below_one() {
    let spec = DriftSpec::b1_unit(2.0).unwrap();
    let n = 4096;
    let grid = TimeGrid::new(1.0, n).unwrap();
    let worst = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let driver = sample_fbm_rep(&NoiseConfig::new(0.7, 1.0, n, seed), 12, 0).unwrap();
            let report = contraction_diagnostic(&spec, 0.3, (4.0, 0.3), grid, &driver).unwrap();
            assert!(report.ordered, "seed {seed}");
            report.ratio
        })
        .reduce(|| 0.0, f64::max);
    assert!(worst <= 1.0 + 1e-2, "ratio {worst}");
}

fn path(seed: u64, x0: f64, horizon: f64, n: usize) -> fsde::EulerPath {
    let spec = DriftSpec::b1_unit(2.0).unwrap();
    let driver = sample_fbm_rep(&NoiseConfig::new(0.7, horizon, n, seed), 1, 0).unwrap();
    solve_path(&spec, 0.3, x0, TimeGrid::new(horizon, n).unwrap(), &driver).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bounded_observables_average_within_bounds(seed in any::<u64>(), x0 in 0.05f64..10.0, c in 0.1f64..3.0) {
        let p = path(seed, x0, 4.0, 256);
        let avg = ergodic_average(PhiTag::Bounded, &p);
        prop_assert!(avg > 0.0 && avg < 1.0);
        let clipped = ergodic_average(PhiTag::Clip(c), &p);
        prop_assert!(clipped <= c * (1.0 + 1e-12) && clipped > 0.0);
        prop_assert_eq!(ergodic_average(PhiTag::One, &p), 1.0);
    }

    #[test]
    fn hits_never_precede_the_start(seed in any::<u64>(), level in 0.2f64..2.0, t_star in 0.0f64..3.0) {
        let p = path(seed, 0.5, 4.0, 256);
        if let Some(tau) = hitting_time(&p, level, t_star).unwrap() {
            prop_assert!(tau >= t_star && tau <= 4.0);
        }
    }

    #[test]
    fn shared_noise_preserves_order(seed in any::<u64>(), low in 0.05f64..3.0, gap in 1e-3f64..5.0) {
        let a = path(seed, low, 2.0, 256);
        let b = path(seed, low + gap, 2.0, 256);
        prop_assert!(a.knots.iter().zip(&b.knots).all(|(x, y)| x < y));
    }
}
