//! Dynkin martingale of the empirical pairing and its quadratic variation.

use fpme_core::dynamics::{carre_du_champ, simulate, PairingContext, SimParams};
use fpme_core::fracops::{loglog_slope, FracParams};
use fpme_core::observables::{martingale_estimate, SnapshotPath};
use fpme_core::rng::{derive_seed, stream_rng};
use fpme_core::{JumpKernel, LatticeConfig, MeasureSpec, ProfileSpec, RateModel, TestFunction};

const LEN: f64 = 2.0;

fn ensemble(n: usize, gamma: f64, m: u32, paths: usize, horizon: f64, seed: u64) -> (Vec<SnapshotPath>, PairingContext) {
    let size = (n as f64 * LEN) as usize;
    let kernel = JumpKernel::new(gamma, size).unwrap();
    let rates = RateModel::new(m).unwrap();
    let measure = MeasureSpec::new(ProfileSpec::default(), n, LEN).unwrap();
    let times: Vec<f64> = (0..=50).map(|i| horizon * i as f64 / 50.0).collect();
    let out = (0..paths)
        .map(|i| {
            let mut rng = stream_rng(seed, 2 * i as u64);
            let init = measure.sample_initial(&mut rng);
            let params = SimParams {
                n,
                horizon,
                gamma,
                m,
                seed: derive_seed(seed, 2 * i as u64 + 1),
                snapshot_times: times.clone(),
                record_events: false,
            };
            let log = simulate(&params, &kernel, rates, init).unwrap();
            SnapshotPath {
                times: times.clone(),
                configs: log.snapshots.into_iter().map(|(_, c)| c).collect(),
            }
        })
        .collect();
    (out, PairingContext::new(&kernel, rates, n))
}

#[test]
fn martingale_is_centred_and_variance_decays() {
    let g = TestFunction::gaussian_bump(1.0, 0.2).with_time_poly(&[1.0, 0.5]);
    let ns = [32usize, 64, 128];
    let mut variances = Vec::new();
    for (k, &n) in ns.iter().enumerate() {
        let (paths, ctx) = ensemble(n, 1.0, 2, 100, 0.5, 100 + k as u64);
        let stats = martingale_estimate(&paths, &g, &ctx).unwrap();
        for i in 1..stats.times.len() {
            assert!(stats.mean[i].abs() < 3.0 * stats.stderr[i] + 1e-12, "n={n} t={}: {} ± {}", stats.times[i], stats.mean[i], stats.stderr[i]);
        }
        variances.push(*stats.variance.last().unwrap());
    }
    let slope = loglog_slope(&ns.map(|n| n as f64), &variances);
    let want = FracParams::new(1.0).unwrap().quadratic_variation_exponent();
    assert!((slope - want).abs() < 0.4, "slope {slope}");
}

#[test]
fn carre_du_champ_scaling() {
    let g = TestFunction::gaussian_bump(1.0, 0.15);
    for gamma in [0.5, 1.0, 1.5] {
        let ns = [128usize, 256, 512, 1024, 2048, 4096];
        let vals: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let size = (n as f64 * LEN) as usize;
                let kernel = JumpKernel::new(gamma, size).unwrap();
                let ctx = PairingContext::new(&kernel, RateModel::new(2).unwrap(), n);
                let cfg = LatticeConfig::from_occupancies((0..size).map(|x| (x * 7 + x / 3) % 2 == 0));
                carre_du_champ(&cfg, &g.values_on_ring(0.0, n, size), &ctx)
            })
            .collect();
        let slope = loglog_slope(&ns.map(|n| n as f64), &vals);
        let bound = FracParams::new(gamma).unwrap().quadratic_variation_exponent();
        // the bound is attained for γ ≤ 1; for γ > 1 the carré du champ
        // still decays like 1/n, below the bound
        assert!(slope < bound + 0.3, "γ={gamma}: {slope}");
        if gamma <= 1.0 {
            assert!((slope - bound).abs() < 0.3, "γ={gamma}: {slope}");
        } else {
            assert!((slope + 1.0).abs() < 0.3, "γ={gamma}: {slope}");
        }
    }
}
