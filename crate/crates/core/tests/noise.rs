use proptest::prelude::*;

use fsde::noise::{
    fbm_covariance, gauss_2f1, sample_fbm_rep, sample_two_sided_fbm_rep, VolterraCoupling,
};
use fsde::rng::stream_rng;
use fsde::NoiseConfig;

const PATHS: u64 = 20_000;

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn brownian_increments_are_uncorrelated() {
    let cfg = NoiseConfig::new(0.5, 1.0, 2, 31);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for rep in 0..PATHS {
        let p = sample_fbm_rep(&cfg, 1, rep).unwrap();
        a.push(p.increments[0]);
        b.push(p.increments[1]);
    }
    let (ma, va) = mean_and_var(&a);
    let (mb, vb) = mean_and_var(&b);
    let cov = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (PATHS as f64 - 1.0);
    let rho = cov / (va * vb).sqrt();
    assert!(rho.abs() <= 0.02, "lag-1 correlation {rho}");
}

#[test]
fn empirical_covariance_matches_formula() {
    let cfg = NoiseConfig::new(0.7, 1.0, 2, 32);
    let mut acc = 0.0;
    for rep in 0..PATHS {
        let p = sample_fbm_rep(&cfg, 1, rep).unwrap();
        acc += p.values[1] * p.values[2];
    }
    let emp = acc / PATHS as f64;
    let exact = fbm_covariance(0.5, 1.0, 0.7).unwrap();
    assert!((emp - exact).abs() <= 0.02, "{emp} vs {exact}");
}

#[test]
fn two_sided_variance_at_minus_one() {
    let cfg = NoiseConfig::new(0.7, 1.0, 4, 33).two_sided(true);
    let vals: Vec<f64> = (0..PATHS)
        .map(|rep| sample_two_sided_fbm_rep(&cfg, 1, rep).unwrap().values[0])
        .collect();
    let second_moment = vals.iter().map(|v| v * v).sum::<f64>() / PATHS as f64;
    assert!((second_moment - 1.0).abs() <= 0.02, "E[B(-1)^2] = {second_moment}");
}

#[test]
fn coupled_fbm_has_unit_variance_at_one() {
    let coupling = VolterraCoupling::new(0.7, 1.0, 256).unwrap();
    let second_moment = (0..PATHS)
        .map(|rep| {
            let noise = coupling.sample(&mut stream_rng(34, 11, rep)).unwrap();
            noise.fbm.values[256].powi(2)
        })
        .sum::<f64>()
        / PATHS as f64;
    assert!((second_moment - 1.0).abs() <= 0.03, "E[B(1)^2] = {second_moment}");
}

fn raw_series(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 0..2000 {
        let k = k as f64;
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn cholesky_succeeds(m: &[Vec<f64>]) -> bool {
    let n = m.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = m[i][i] - s;
                if d <= 0.0 {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hypergeometric_matches_series(
        a in -1.5f64..1.5, b in -1.5f64..1.5, c in 0.5f64..3.0, z in -0.5f64..0.0,
    ) {
        let got = gauss_2f1(a, b, c, z).unwrap();
        let want = raw_series(a, b, c, z);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn covariance_is_positive_definite(
        times in prop::collection::btree_set(1u32..10_000, 8), hurst in 0.05f64..0.95,
    ) {
        let t: Vec<f64> = times.iter().map(|&k| k as f64 / 1000.0).collect();
        let m: Vec<Vec<f64>> = t
            .iter()
            .map(|&s| t.iter().map(|&u| fbm_covariance(s, u, hurst).unwrap()).collect())
            .collect();
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                prop_assert_eq!(*v, m[j][i]);
            }
        }
        prop_assert!(cholesky_succeeds(&m));
    }

    #[test]
    fn paths_are_finite_and_pinned(seed in any::<u64>(), hurst in 0.1f64..0.95, n in 2usize..300) {
        let p = sample_fbm_rep(&NoiseConfig::new(hurst, 2.0, n, seed), 1, 0).unwrap();
        prop_assert_eq!(p.values[p.origin], 0.0);
        prop_assert!(p.values.iter().all(|v| v.is_finite()));
        let q = sample_two_sided_fbm_rep(&NoiseConfig::new(hurst, 2.0, n, seed).two_sided(true), 1, 0).unwrap();
        prop_assert_eq!(q.values[q.origin], 0.0);
        prop_assert!(q.values.iter().all(|v| v.is_finite()));
    }
}
