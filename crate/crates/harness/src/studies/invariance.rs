//! Exact stationarity, reversibility and Dirichlet-form checks on small
//! rings, plus the sampled thinning audit.

use fpme_core::dynamics::{bernoulli_weights, dirichlet_form, dirichlet_pairing, exact_generator, stationarity_check, thinning_audit};
use fpme_core::rng::{derive_seed, stream_rng};
use fpme_core::{JumpKernel, LatticeConfig, RateModel};
use rand::Rng;
use rayon::prelude::*;

use super::Runtime;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{Check, Comparison, ExperimentReport, Row};

const STATIONARY_TOL: f64 = 1e-12;
const BALANCE_TOL: f64 = 1e-13;
const DIRICHLET_TOL: f64 = 1e-10;
const THINNING_SIGMAS: f64 = 3.0;

/// Sub-stream tags under the master seed.
const DIRICHLET_STREAM: u64 = 1;
const THINNING_STREAM: u64 = 2;

pub fn run_invariance_suite(cfg: &ExperimentConfig, rt: &Runtime) -> Result<ExperimentReport> {
    let s = &cfg.invariance;
    let mut report = ExperimentReport::new(cfg);
    let pairs: Vec<(u32, f64)> = s.ms.iter().flat_map(|&m| s.gammas.iter().map(move |&g| (m, g))).collect();

    for &(m, gamma) in &pairs {
        let rates = RateModel::new(m).map_err(HarnessError::stage("rates"))?;
        let kernel = JumpKernel::new(gamma, s.ring_size).map_err(HarnessError::stage("kernel"))?;
        let gen = exact_generator(&kernel, rates).map_err(HarnessError::stage("generator"))?;
        for &b in &s.densities {
            let st = stationarity_check(&gen, b).map_err(HarnessError::stage("stationarity"))?;
            report.rows.push(
                Row::new("stationarity")
                    .n(s.ring_size)
                    .gamma(gamma)
                    .m(m)
                    .metric("b", b)
                    .metric("residual", st.residual)
                    .metric("detailed_balance", st.detailed_balance),
            );
            let tag = format!("m={m} gamma={gamma} b={b} ring={}", s.ring_size);
            report.checks.push(Check::new(
                "invariance.stationary",
                format!("{tag}: sup |nu_b^T L|"),
                st.residual,
                Comparison::Below { limit: STATIONARY_TOL },
            ));
            report.checks.push(Check::new(
                "invariance.detailed_balance",
                format!("{tag}: sup |nu(i)L(i,j) - nu(j)L(j,i)|"),
                st.detailed_balance,
                Comparison::Below { limit: BALANCE_TOL },
            ));
        }
    }

    let mut index = 0u64;
    for &(m, gamma) in &pairs {
        let rates = RateModel::new(m).map_err(HarnessError::stage("rates"))?;
        let kernel = JumpKernel::new(gamma, s.dirichlet_ring).map_err(HarnessError::stage("kernel"))?;
        let gen = exact_generator(&kernel, rates).map_err(HarnessError::stage("generator"))?;
        for &b in &s.densities {
            let nu = bernoulli_weights(s.dirichlet_ring, b).map_err(HarnessError::stage("dirichlet"))?;
            let mut rng = stream_rng(derive_seed(cfg.master_seed, DIRICHLET_STREAM), index);
            index += 1;
            let mut worst = 0.0f64;
            for _ in 0..s.dirichlet_samples {
                let w: Vec<f64> = (0..nu.len()).map(|_| rng.random::<f64>().powi(3) + 1e-3).collect();
                let mass: f64 = w.iter().zip(&nu).map(|(a, b)| a * b).sum();
                let f: Vec<f64> = w.iter().map(|v| v / mass).collect();
                let lhs = dirichlet_pairing(&gen, &f, b).map_err(HarnessError::stage("dirichlet"))?;
                let d = dirichlet_form(&kernel, rates, &f, b).map_err(HarnessError::stage("dirichlet"))?;
                worst = worst.max((lhs + 0.5 * d).abs());
            }
            report.rows.push(
                Row::new("dirichlet")
                    .n(s.dirichlet_ring)
                    .gamma(gamma)
                    .m(m)
                    .metric("b", b)
                    .metric("samples", s.dirichlet_samples as f64)
                    .metric("max_error", worst),
            );
            report.checks.push(Check::new(
                "invariance.dirichlet",
                format!("m={m} gamma={gamma} b={b}: max |<L sqrt f, sqrt f> + D/2| over {} densities", s.dirichlet_samples),
                worst,
                Comparison::Below { limit: DIRICHLET_TOL },
            ));
        }
    }

    let audits = rt.install(|| {
        pairs
            .par_iter()
            .enumerate()
            .map(|(i, &(m, gamma))| {
                let rates = RateModel::new(m).map_err(HarnessError::stage("rates"))?;
                let kernel = JumpKernel::new(gamma, s.thinning_ring).map_err(HarnessError::stage("kernel"))?;
                let mut rng = stream_rng(derive_seed(cfg.master_seed, THINNING_STREAM), 2 * i as u64);
                let init = LatticeConfig::from_occupancies((0..s.thinning_ring).map(|_| rng.random::<bool>()));
                let seed = derive_seed(derive_seed(cfg.master_seed, THINNING_STREAM), 2 * i as u64 + 1);
                thinning_audit(&kernel, rates, init, s.thinning_events, seed).map_err(HarnessError::stage("thinning"))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for (&(m, gamma), a) in pairs.iter().zip(audits) {
        if a.events == 0 {
            report.notes.push(format!("thinning m={m} gamma={gamma}: initial configuration is empty or full, no activity"));
        }
        report.rows.push(
            Row::new("thinning")
                .n(s.thinning_ring)
                .gamma(gamma)
                .m(m)
                .metric("events", a.events as f64)
                .metric("proposals", a.proposals as f64)
                .metric("classes", a.classes.len() as f64)
                .metric("chi2", a.chi2)
                .metric("chi2_sigma", a.chi2_sigma)
                .metric("max_abs_z", a.max_abs_z),
        );
        report.checks.push(Check::new(
            "invariance.thinning",
            format!(
                "m={m} gamma={gamma}: aggregate deviation of {} class counts from the generator, in sigmas",
                a.classes.len()
            ),
            a.chi2_sigma,
            Comparison::Below { limit: THINNING_SIGMAS },
        ));
    }
    Ok(report)
}
