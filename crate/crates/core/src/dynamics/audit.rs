//! Sampled transition counts against the exact generator.
//!
//! Accepted exchanges are grouped by (ring distance, rate factor c). The
//! count in each class is compared with its compensator, the time integral
//! of the class's total rate read off the generator matrix along the path.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{exact_generator, Simulator};
use crate::error::{Error, Result};
use crate::kernel::JumpKernel;
use crate::lattice::LatticeConfig;
use crate::rates::RateModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub distance: usize,
    pub rate: u32,
    pub observed: u64,
    pub expected: f64,
    /// (observed − expected)/√expected
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinningAudit {
    pub events: u64,
    pub proposals: u64,
    pub classes: Vec<ClassCount>,
    pub max_abs_z: f64,
    /// Σ z² over the classes.
    pub chi2: f64,
    /// (χ² − k)/√(2k) for k classes: the aggregate deviation in standard
    /// deviations of a χ²_k variable.
    pub chi2_sigma: f64,
}

impl ThinningAudit {
    /// Aggregate agreement: the class counts jointly deviate by fewer than
    /// `sigmas` standard deviations.
    pub fn within(&self, sigmas: f64) -> bool {
        self.chi2_sigma <= sigmas
    }
}

fn ring_distance(x: usize, y: usize, size: usize) -> usize {
    let d = x.abs_diff(y);
    d.min(size - d)
}

/// Runs the unaccelerated process from `init` until `target_events` exchanges
/// have happened and audits every class.
pub fn thinning_audit(kernel: &JumpKernel, rates: RateModel, init: LatticeConfig, target_events: u64, seed: u64) -> Result<ThinningAudit> {
    let size = init.size();
    let gen = exact_generator(kernel, rates)?;
    if init.count() == 0 || init.count() == size {
        return Ok(ThinningAudit {
            events: 0,
            proposals: 0,
            classes: Vec::new(),
            max_abs_z: 0.0,
            chi2: 0.0,
            chi2_sigma: 0.0,
        });
    }
    // class rates per state, keyed by (distance, c)
    let mut per_state: Vec<Vec<((usize, u32), f64)>> = Vec::with_capacity(gen.dim());
    for i in 0..gen.dim() {
        let cfg = LatticeConfig::from_index(i as u64, size);
        let mut acc: BTreeMap<(usize, u32), f64> = BTreeMap::new();
        for &(j, q) in gen.row(i) {
            let diff = i ^ j as usize;
            let x = diff.trailing_zeros() as usize;
            let y = (usize::BITS - 1 - diff.leading_zeros()) as usize;
            let c = rates.c_m_unchecked(&cfg, x as i64, y as i64);
            *acc.entry((ring_distance(x, y, size), c)).or_insert(0.0) += q;
        }
        per_state.push(acc.into_iter().collect());
    }

    // n = 2; macroscopic time is converted back with the factor 2^γ
    let mut sim = Simulator::new(kernel, rates, init, 2, seed)?;
    let scale = 2f64.powf(kernel.gamma());
    let mut observed: BTreeMap<(usize, u32), u64> = BTreeMap::new();
    let mut expected: BTreeMap<(usize, u32), f64> = BTreeMap::new();
    let mut last = 0.0;
    let mut events = 0u64;
    let mut step = 1.0;
    while events < target_events {
        let horizon = sim.time() + step;
        sim.run_until(horizon, |cfg, e| {
            let dt = (e.time - last) * scale;
            for &(key, rate) in &per_state[cfg.to_index() as usize] {
                *expected.entry(key).or_insert(0.0) += rate * dt;
            }
            last = e.time;
            *observed.entry((ring_distance(e.x, e.y, size), e.rate)).or_insert(0) += 1;
            events += 1;
        })?;
        let dt = (horizon - last) * scale;
        for &(key, rate) in &per_state[sim.config().to_index() as usize] {
            *expected.entry(key).or_insert(0.0) += rate * dt;
        }
        last = horizon;
        if events == 0 {
            step *= 2.0;
            if step > 1e12 {
                return Err(Error::InvalidArgument("no transitions are possible from this state".into()));
            }
        }
    }
    let mut classes = Vec::new();
    let mut max_abs_z = 0.0f64;
    for (&(distance, rate), &exp) in &expected {
        let obs = observed.get(&(distance, rate)).copied().unwrap_or(0);
        let z = if exp > 0.0 { (obs as f64 - exp) / exp.sqrt() } else { 0.0 };
        max_abs_z = max_abs_z.max(z.abs());
        classes.push(ClassCount {
            distance,
            rate,
            observed: obs,
            expected: exp,
            z,
        });
    }
    for (key, &obs) in &observed {
        if !expected.contains_key(key) && obs > 0 {
            return Err(Error::InvalidArgument(format!("events observed in class {key:?} with zero rate")));
        }
    }
    let chi2: f64 = classes.iter().map(|c| c.z * c.z).sum();
    let k = classes.len() as f64;
    let chi2_sigma = if k > 0.0 { (chi2 - k) / (2.0 * k).sqrt() } else { 0.0 };
    Ok(ThinningAudit {
        events,
        proposals: sim.proposals(),
        classes,
        max_abs_z,
        chi2,
        chi2_sigma,
    })
}
