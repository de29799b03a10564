use rayon::prelude::*;

use fsde::heston::{HestonConfig, HestonSimulator, RateFn};
use fsde::noise::VolterraCoupling;
use fsde::rng::stream_rng;
use fsde::TimeGrid;

fn config(n: usize, zeta: f64, z0: f64) -> HestonConfig {
    HestonConfig {
        s0: 100.0,
        z0,
        v: 0.08,
        w: 2.0,
        zeta,
        gamma: 1.0,
        hurst: 0.7,
        alpha: None,
        mu: RateFn::Constant(0.05),
        r: RateFn::Constant(0.02),
        bond0: 1.0,
        grid: TimeGrid::new(1.0, n).unwrap(),
        seed: 7,
    }
}

#[test]
fn grid_refinement_barely_moves_the_terminal_price() {
    let fine = HestonSimulator::new(config(1024, 0.3, 0.04)).unwrap();
    let coarse = HestonSimulator::new(config(512, 0.3, 0.04)).unwrap();
    let fine_coupling = VolterraCoupling::new(0.7, 1.0, 1024).unwrap();
    let coarse_coupling = VolterraCoupling::new(0.7, 1.0, 512).unwrap();
    let mut changes: Vec<f64> = (0..200u64)
        .into_par_iter()
        .map(|rep| {
            let noise = fine_coupling.sample(&mut stream_rng(9, 10, rep)).unwrap();
            let coarse_bm: Vec<f64> = noise.bm_increments.chunks(2).map(|c| c[0] + c[1]).collect();
            let coarse_fbm = coarse_coupling.apply(&coarse_bm).unwrap();
            let zf = fine.simulate_vol(&noise.fbm).unwrap();
            let zc = coarse.simulate_vol(&coarse_fbm).unwrap();
            let sf = *fine.simulate_price(&zf, &noise.bm_increments).unwrap().last().unwrap();
            let sc = *coarse.simulate_price(&zc, &coarse_bm).unwrap().last().unwrap();
            (sf - sc).abs() / sf
        })
        .collect();
    changes.sort_by(f64::total_cmp);
    let median = changes[changes.len() / 2];
    assert!(median <= 0.05, "median relative change {median}");
}

#[test]
fn near_deterministic_variance_follows_its_drift() {
    let (v, w, z0) = (0.08, 2.0, 0.2);
    let mut worst = Vec::new();
    for n in [256, 1024] {
        let sim = HestonSimulator::new(config(n, 1e-4, z0)).unwrap();
        let dt = 1.0 / n as f64;
        let path = sim.path(0).unwrap();
        let mut integral = 0.0;
        let mut err: f64 = 0.0;
        for k in 0..n {
            integral += 0.5 * dt * ((v - w * path.z[k]) + (v - w * path.z[k + 1]));
            err = err.max((path.z[k + 1] - z0 - integral).abs());
        }
        worst.push(err);
    }
    assert!(worst[1] <= 2e-3, "residuals {worst:?}");
    assert!(worst[1] < worst[0], "residuals {worst:?}");
}

#[test]
fn variance_and_price_stay_positive() {
    let sim = HestonSimulator::new(config(256, 0.5, 0.04)).unwrap();
    for path in sim.paths(200).unwrap() {
        assert!(path.z.iter().all(|z| *z > 0.0));
        assert!(path.s.iter().chain(&path.s_discounted).all(|s| *s > 0.0));
    }
}
