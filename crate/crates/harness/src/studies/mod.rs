//! The five experiment suites and the machinery they share.

mod hydro;
mod invariance;
mod operators;
mod pde;
mod rates_audit;

use std::time::Instant;

use fpme_core::fracops::loglog_slope;

pub use hydro::run_hydro_study;
pub use invariance::run_invariance_suite;
pub use operators::run_operator_suite;
pub use pde::run_pde_suite;
pub use rates_audit::run_rates_audit;

use crate::cache::Cache;
use crate::config::{ExperimentConfig, Mode};
use crate::error::{HarnessError, Result};
use crate::report::{ExperimentReport, SlopeFit, WallTime};

/// Worker pool and cache shared by the suites. Work units are merged in key
/// order, so the pool size never changes a result.
pub struct Runtime {
    pool: rayon::ThreadPool,
    pub cache: Cache,
}

impl Runtime {
    pub fn new(jobs: usize, cache: Cache) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| HarnessError::Config(format!("cannot start {jobs} workers: {e}")))?;
        Ok(Runtime { pool, cache })
    }

    /// One worker, no cache.
    pub fn serial() -> Self {
        Runtime::new(1, Cache::disabled()).expect("a one-thread pool always starts")
    }

    pub fn jobs(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

/// Validates `cfg` and runs the suite selected by its mode.
pub fn run(cfg: &ExperimentConfig, rt: &Runtime) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut report = match cfg.mode {
        Mode::Hydro => run_hydro_study(cfg, rt)?,
        Mode::Invariance => run_invariance_suite(cfg, rt)?,
        Mode::Operators => run_operator_suite(cfg, rt)?,
        Mode::Pde => run_pde_suite(cfg, rt)?,
        Mode::RatesAudit => run_rates_audit(cfg, rt)?,
    };
    report.wall_time = WallTime(Some(start.elapsed().as_secs_f64()));
    Ok(report)
}

/// Least-squares slope of log y against log x; `None` unless there are at
/// least two points and every y is positive.
pub(crate) fn slope_of(xs: &[f64], ys: &[f64]) -> Option<f64> {
    (xs.len() >= 2 && ys.iter().all(|&y| y > 0.0 && y.is_finite())).then(|| loglog_slope(xs, ys))
}

pub(crate) fn fit(name: &str, xs: Vec<f64>, ys: Vec<f64>, predicted: Option<f64>) -> SlopeFit {
    SlopeFit {
        name: name.to_string(),
        gamma: None,
        m: None,
        t: None,
        test_function: None,
        slope: slope_of(&xs, &ys),
        xs,
        ys,
        predicted,
    }
}
