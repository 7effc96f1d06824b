//! Exhaustive integer audits of the rate factors.

use fpme_core::{LatticeConfig, RateModel};
use rayon::prelude::*;

use super::Runtime;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::report::{Check, Comparison, ExperimentReport, Row};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AuditCount {
    pub configurations: u64,
    pub pairs: u64,
    /// Pairs where the identity's left side is nonzero.
    pub nontrivial: u64,
    pub violations: u64,
}

impl std::ops::Add for AuditCount {
    type Output = AuditCount;
    fn add(self, o: AuditCount) -> AuditCount {
        AuditCount {
            configurations: self.configurations + o.configurations,
            pairs: self.pairs + o.pairs,
            nontrivial: self.nontrivial + o.nontrivial,
            violations: self.violations + o.violations,
        }
    }
}

/// Checks the B_m/C_m decomposition of the symmetric rate for every
/// configuration of a ring of `window` sites, every x and every y with
/// 2 ≤ |x − y| ≤ `max_distance`.
pub fn decomposition_audit(rates: RateModel, window: usize, max_distance: usize) -> AuditCount {
    (0..1u64 << window)
        .into_par_iter()
        .map(|idx| {
            let cfg = LatticeConfig::from_index(idx, window);
            let mut c = AuditCount {
                configurations: 1,
                ..Default::default()
            };
            for x in 0..window as i64 {
                for d in 2..=max_distance as i64 {
                    for y in [x + d, x - d] {
                        let (lhs, rhs) = rates.decomposition_sides(&cfg, x, y);
                        c.pairs += 1;
                        c.nontrivial += u64::from(lhs != 0);
                        c.violations += u64::from(lhs != rhs);
                    }
                }
            }
            c
        })
        .reduce(AuditCount::default, |a, b| a + b)
}

/// Checks ξ_{x,x±1}·c^(m)_{x,x±1} ≥ ξ_{x,x±1} for every configuration of a
/// ring of `window` sites.
pub fn unit_jump_audit(rates: RateModel, window: usize) -> AuditCount {
    (0..1u64 << window)
        .into_par_iter()
        .map(|idx| {
            let cfg = LatticeConfig::from_index(idx, window);
            let mut c = AuditCount {
                configurations: 1,
                ..Default::default()
            };
            for x in 0..window as i64 {
                for y in [x + 1, x - 1] {
                    let xi = cfg.discrepancy(x as usize, y.rem_euclid(window as i64) as usize);
                    let rate = rates.c_m_unchecked(&cfg, x, y);
                    c.pairs += 1;
                    c.nontrivial += u64::from(xi != 0);
                    c.violations += u64::from(xi * rate < xi);
                }
            }
            c
        })
        .reduce(AuditCount::default, |a, b| a + b)
}

pub fn run_rates_audit(cfg: &ExperimentConfig, rt: &Runtime) -> Result<ExperimentReport> {
    let s = &cfg.rates;
    let mut report = ExperimentReport::new(cfg);
    for &m in &s.ms {
        let rates = RateModel::new(m).map_err(HarnessError::stage("rates"))?;
        let dec = rt.install(|| decomposition_audit(rates, s.window, s.max_distance));
        report.rows.push(count_row("decomposition", m, s.window, dec));
        report.checks.push(Check::new(
            "rates.decomposition",
            format!("m={m}: identity violations over ring {} and 2<=|x-y|<={}", s.window, s.max_distance),
            dec.violations as f64,
            Comparison::Below { limit: 0.5 },
        ));
        let unit = rt.install(|| unit_jump_audit(rates, s.bond_window));
        report.rows.push(count_row("unit_jump", m, s.bond_window, unit));
        report.checks.push(Check::new(
            "rates.unit_jump",
            format!("m={m}: adjacent pairs with xi*c < xi over ring {}", s.bond_window),
            unit.violations as f64,
            Comparison::Below { limit: 0.5 },
        ));
    }
    Ok(report)
}

fn count_row(stage: &str, m: u32, window: usize, c: AuditCount) -> Row {
    Row::new(stage)
        .n(window)
        .m(m)
        .metric("configurations", c.configurations as f64)
        .metric("pairs", c.pairs as f64)
        .metric("nontrivial", c.nontrivial as f64)
        .metric("violations", c.violations as f64)
}
