//! Ensembles of the particle system against the continuum solution.
//!
//! For every n the ensemble is simulated from the product measure with the
//! configured profile. At each snapshot time t and test function G the study
//! records E(n,t,G), the ensemble mean of |⟨π_t^n,G_t⟩ − ∫G_t ρ(t,·)du|, and
//! the fraction of trajectories whose deviation exceeds each δ of a fixed
//! ladder. When martingale diagnostics are on, trajectories are also
//! observed on a uniform grid and the Dynkin martingale M_t(G) is evaluated
//! at the snapshot times.

use fpme_core::dynamics::{simulate, PairingContext, SimParams};
use fpme_core::fracops::FracParams;
use fpme_core::observables::{martingale_path, pair_with_test_function, SnapshotPath};
use fpme_core::pde::{FracSymbol, SolverConfig};
use fpme_core::rng::{derive_seed, stream_rng};
use fpme_core::{JumpKernel, MeasureSpec, ProfileSpec, RateModel, TestFunction};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pde::{exact_cached, solve_cached};
use super::{fit, Runtime};
use crate::config::{ExperimentConfig, TestFunctionSpec};
use crate::error::{HarnessError, Result};
use crate::report::{Check, Comparison, ExperimentReport, Row};

pub const DELTA_LADDER: [f64; 3] = [0.1, 0.05, 0.02];
const HALVING_SPAN: usize = 8;
const MARTINGALE_SIGMAS: f64 = 3.0;
const VARIANCE_SLOPE_TOL: f64 = 0.4;

/// Everything an ensemble depends on; its JSON form is the cache key.
#[derive(Debug, Clone, Serialize)]
struct EnsembleKey<'a> {
    n: usize,
    ring_size: usize,
    gamma: f64,
    m: u32,
    torus_length: f64,
    horizon: f64,
    profile: &'a ProfileSpec,
    test_functions: &'a [TestFunctionSpec],
    snapshot_times: &'a [f64],
    martingale_steps: usize,
    ensemble_size: usize,
    master_seed: u64,
}

/// Per-path observations, indexed [test function][snapshot time][path].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Ensemble {
    pairings: Vec<Vec<Vec<f64>>>,
    martingale: Vec<Vec<Vec<f64>>>,
}

/// One path's pairings and martingale values, indexed [test function][time].
type PathObservations = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Observation grid: 0, the snapshot times and (if on) a uniform grid with
/// points that nearly coincide with a snapshot time dropped.
fn observation_grid(snapshots: &[f64], horizon: f64, steps: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    grid.extend_from_slice(snapshots);
    for k in 1..=steps {
        let t = horizon * k as f64 / steps as f64;
        if snapshots.iter().all(|s| (s - t).abs() > 1e-9 * horizon) {
            grid.push(t);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn run_ensemble(cfg: &ExperimentConfig, rt: &Runtime, n: usize, tests: &[TestFunction]) -> Result<Ensemble> {
    let size = cfg.ring_size(n);
    let key = EnsembleKey {
        n,
        ring_size: size,
        gamma: cfg.gamma,
        m: cfg.m,
        torus_length: cfg.torus_length,
        horizon: cfg.horizon,
        profile: &cfg.profile,
        test_functions: &cfg.test_functions,
        snapshot_times: &cfg.snapshot_times,
        martingale_steps: cfg.hydro.martingale_steps,
        ensemble_size: cfg.ensemble_size,
        master_seed: cfg.master_seed,
    };
    rt.cache.get_or_compute("ensemble", &key, || {
        let stage = format!("ensemble n={n}");
        let kernel = JumpKernel::new(cfg.gamma, size).map_err(HarnessError::stage(stage.clone()))?;
        let rates = RateModel::new(cfg.m).map_err(HarnessError::stage(stage.clone()))?;
        let measure = MeasureSpec::new(cfg.profile.clone(), n, cfg.torus_length).map_err(HarnessError::stage(stage.clone()))?;
        let martingale_on = cfg.hydro.martingale_steps > 0;
        let grid = if martingale_on {
            observation_grid(&cfg.snapshot_times, cfg.horizon, cfg.hydro.martingale_steps)
        } else {
            cfg.snapshot_times.clone()
        };
        let probes: Vec<usize> = cfg
            .snapshot_times
            .iter()
            .map(|t| grid.iter().position(|g| g == t).expect("snapshot times are on the grid"))
            .collect();
        let ctx = PairingContext::new(&kernel, rates, n);
        let base = derive_seed(cfg.master_seed, n as u64);

        let per_path = rt.install(|| {
            (0..cfg.ensemble_size)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(base, 2 * i as u64);
                    let init = measure.sample_initial(&mut rng);
                    let params = SimParams {
                        n,
                        horizon: cfg.horizon,
                        gamma: cfg.gamma,
                        m: cfg.m,
                        seed: derive_seed(base, 2 * i as u64 + 1),
                        snapshot_times: grid.clone(),
                        record_events: false,
                    };
                    let log = simulate(&params, &kernel, rates, init).map_err(HarnessError::stage(stage.clone()))?;
                    let configs: Vec<_> = log.snapshots.into_iter().map(|(_, c)| c).collect();
                    let pairings: Vec<Vec<f64>> = tests
                        .iter()
                        .map(|g| {
                            probes
                                .iter()
                                .zip(&cfg.snapshot_times)
                                .map(|(&k, &t)| pair_with_test_function(&configs[k], g, t, n))
                                .collect()
                        })
                        .collect();
                    let martingale: Vec<Vec<f64>> = if martingale_on {
                        let path = SnapshotPath {
                            times: grid.clone(),
                            configs,
                        };
                        tests
                            .iter()
                            .map(|g| {
                                let mt = martingale_path(&path, g, &ctx);
                                probes.iter().map(|&k| mt[k]).collect()
                            })
                            .collect()
                    } else {
                        Vec::new()
                    };
                    Ok((pairings, martingale))
                })
                .collect::<Result<Vec<_>>>()
        })?;

        let transpose = |pick: &dyn Fn(&PathObservations) -> &Vec<Vec<f64>>| -> Vec<Vec<Vec<f64>>> {
            (0..tests.len())
                .map(|gi| {
                    (0..cfg.snapshot_times.len())
                        .map(|ti| per_path.iter().map(|p| pick(p)[gi][ti]).collect())
                        .collect()
                })
                .collect()
        };
        Ok(Ensemble {
            pairings: transpose(&|p| &p.0),
            martingale: if martingale_on { transpose(&|p| &p.1) } else { Vec::new() },
        })
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mu = mean(v);
    v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

pub fn run_hydro_study(cfg: &ExperimentConfig, rt: &Runtime) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(cfg);
    let tests = cfg.test_function_list();
    let labels: Vec<String> = tests.iter().map(|g| g.label()).collect();
    let times = &cfg.snapshot_times;
    let grid = cfg.hydro.pde_grid;

    let fields = if cfg.m == 1 {
        report.notes.push(format!("targets: exact multiplier solution on {grid} modes"));
        let symbol = FracSymbol::model(cfg.gamma).map_err(HarnessError::stage("pde"))?;
        exact_cached(rt, &cfg.profile, symbol, grid, cfg.torus_length, times)?
    } else {
        report.notes.push(format!("targets: RK4 pseudospectral solution on {grid} points"));
        let solver = SolverConfig::rk4(cfg.gamma, cfg.m, grid, cfg.torus_length).map_err(HarnessError::stage("pde"))?;
        solve_cached(rt, &cfg.profile, &solver, times)?
    };
    let targets: Vec<Vec<f64>> = tests
        .iter()
        .map(|g| fields.iter().zip(times).map(|(f, &t)| f.pair(g, t)).collect())
        .collect();

    let mut ensembles = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        ensembles.push(run_ensemble(cfg, rt, n, &tests)?);
    }

    let martingale_on = cfg.hydro.martingale_steps > 0;
    // errors[gi][ti][ni] and martingale variances in the same layout
    let mut errors = vec![vec![vec![0.0; cfg.n_list.len()]; times.len()]; tests.len()];
    let mut variances = errors.clone();
    for (ni, (&n, ens)) in cfg.n_list.iter().zip(&ensembles).enumerate() {
        for (ti, &t) in times.iter().enumerate() {
            for gi in 0..tests.len() {
                let target = targets[gi][ti];
                let samples = &ens.pairings[gi][ti];
                let devs: Vec<f64> = samples.iter().map(|p| (p - target).abs()).collect();
                let e = mean(&devs);
                errors[gi][ti][ni] = e;
                let mut row = Row::new("hydro")
                    .n(n)
                    .gamma(cfg.gamma)
                    .m(cfg.m)
                    .t(t)
                    .test_function(&labels[gi])
                    .metric("mean_abs_error", e)
                    .metric("mean_pairing", mean(samples))
                    .metric("target", target);
                for d in DELTA_LADDER {
                    let frac = devs.iter().filter(|&&v| v > d).count() as f64 / devs.len() as f64;
                    row = row.metric(&format!("exceed_{d}"), frac);
                }
                if martingale_on {
                    let mt = &ens.martingale[gi][ti];
                    let var = sample_variance(mt);
                    variances[gi][ti][ni] = var;
                    row = row
                        .metric("martingale_mean", mean(mt))
                        .metric("martingale_variance", var)
                        .metric("martingale_stderr", (var / mt.len() as f64).sqrt());
                }
                report.rows.push(row);
            }
        }
    }

    let xs: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
    let (n_min, n_max) = (cfg.n_list[0], *cfg.n_list.last().unwrap());
    let qv_exponent = FracParams::new(cfg.gamma).map_err(HarnessError::stage("hydro"))?.quadratic_variation_exponent();
    for (gi, label) in labels.iter().enumerate() {
        for (ti, &t) in times.iter().enumerate() {
            let e = &errors[gi][ti];
            let tag = format!("m={} t={t} G={label}", cfg.m);
            let mut f = fit("mean_abs_error", xs.clone(), e.clone(), None);
            (f.gamma, f.m, f.t, f.test_function) = (Some(cfg.gamma), Some(cfg.m), Some(t), Some(label.clone()));
            report.fits.push(f);
            if e.len() >= 2 {
                let worst = e.windows(2).map(|w| w[1] / w[0]).fold(f64::NEG_INFINITY, f64::max);
                report.checks.push(Check::new(
                    "hydro.error_decreasing",
                    format!("{tag}: largest ratio E(n_next)/E(n)"),
                    worst,
                    Comparison::Below { limit: 1.0 },
                ));
            }
            if n_max >= HALVING_SPAN * n_min {
                report.checks.push(Check::new(
                    "hydro.error_halved",
                    format!("{tag}: E({n_max})/E({n_min})"),
                    e[e.len() - 1] / e[0],
                    Comparison::Below { limit: 0.5 },
                ));
            }
            if martingale_on && cfg.ensemble_size >= 2 && xs.len() >= 2 && !tests[gi].is_spatially_constant() {
                let mut f = fit("martingale_variance", xs.clone(), variances[gi][ti].clone(), Some(qv_exponent));
                (f.gamma, f.m, f.t, f.test_function) = (Some(cfg.gamma), Some(cfg.m), Some(t), Some(label.clone()));
                report.checks.push(Check::new(
                    "hydro.martingale_variance_slope",
                    format!("{tag}: log-log slope of Var M_t against n"),
                    f.slope.unwrap_or(f64::NAN),
                    Comparison::Near {
                        target: qv_exponent,
                        tolerance: VARIANCE_SLOPE_TOL,
                    },
                ));
                report.fits.push(f);
            }
        }
    }
    if martingale_on {
        if cfg.ensemble_size < 2 {
            report.notes.push("ensemble of one path: martingale checks skipped".into());
        } else {
            for (&n, ens) in cfg.n_list.iter().zip(&ensembles) {
                for (gi, label) in labels.iter().enumerate() {
                    let worst = ens.martingale[gi]
                        .iter()
                        .map(|mt| {
                            let (mu, se) = (mean(mt).abs(), (sample_variance(mt) / mt.len() as f64).sqrt());
                            if se > 0.0 {
                                mu / se
                            } else if mu == 0.0 {
                                0.0
                            } else {
                                f64::INFINITY
                            }
                        })
                        .fold(0.0, f64::max);
                    report.checks.push(Check::new(
                        "hydro.martingale_centred",
                        format!("n={n} G={label}: max over snapshot times of |mean M_t|/stderr"),
                        worst,
                        Comparison::Below { limit: MARTINGALE_SIGMAS },
                    ));
                }
            }
        }
    }
    Ok(report)
}
