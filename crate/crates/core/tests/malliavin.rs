use proptest::prelude::*;

use fsde::malliavin::{directional_derivative, rkhs_inner_product};
use fsde::noise::sample_fbm_rep;
use fsde::scheme::solve_path;
use fsde::{DriftSpec, EulerPath, NoiseConfig, TimeGrid};

const N: usize = 128;

fn path(seed: u64) -> (DriftSpec, EulerPath) {
    let spec = DriftSpec::b1_unit(2.0).unwrap();
    let driver = sample_fbm_rep(&NoiseConfig::new(0.7, 1.0, N, seed), 1, 0).unwrap();
    let p = solve_path(&spec, 0.3, 0.8, TimeGrid::new(1.0, N).unwrap(), &driver).unwrap();
    (spec, p)
}

fn direction() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, N + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derivative_is_linear_in_the_direction(
        seed in any::<u64>(), xi1 in -2.0f64..2.0, xi2 in -2.0f64..2.0,
        h1 in direction(), h2 in direction(), a in -3.0f64..3.0, b in -3.0f64..3.0,
    ) {
        let (spec, p) = path(seed);
        let d1 = directional_derivative(&spec, 0.3, &p, xi1, &h1).unwrap().values;
        let d2 = directional_derivative(&spec, 0.3, &p, xi2, &h2).unwrap().values;
        let h: Vec<f64> = h1.iter().zip(&h2).map(|(x, y)| a * x + b * y).collect();
        let d = directional_derivative(&spec, 0.3, &p, a * xi1 + b * xi2, &h).unwrap().values;
        for k in 0..=N {
            let want = a * d1[k] + b * d2[k];
            prop_assert!((d[k] - want).abs() <= 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn initial_condition_sensitivity_is_positive(seed in any::<u64>()) {
        let (spec, p) = path(seed);
        let d = directional_derivative(&spec, 0.3, &p, 1.0, &vec![0.0; N + 1]).unwrap().values;
        prop_assert!(d.iter().all(|v| *v > 0.0 && *v <= 1.0));
    }

    #[test]
    fn rkhs_product_is_symmetric_and_nonnegative(
        phi in prop::collection::vec(-3.0f64..3.0, 1..64), hurst in 0.51f64..0.99,
        shift in -1.0f64..1.0,
    ) {
        let psi: Vec<f64> = phi.iter().map(|v| v * v + shift).collect();
        let dt = 1.0 / phi.len() as f64;
        let ab = rkhs_inner_product(&phi, &psi, hurst, dt).unwrap();
        let ba = rkhs_inner_product(&psi, &phi, hurst, dt).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
        prop_assert!(rkhs_inner_product(&phi, &phi, hurst, dt).unwrap() >= -1e-12);
    }
}
