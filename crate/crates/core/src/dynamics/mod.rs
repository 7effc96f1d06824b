//! Continuous-time exclusion dynamics with long jumps, sped up by n^γ.
//!
//! Trajectories are sampled by thinning: proposals arrive at the constant
//! microscopic rate size·(2m+1)/2, each picks x uniformly and a jump
//! z ~ p, and is accepted with probability ξ_{x,x+z}·c^(m)/(2(2m+1)). The
//! resulting unordered-bond exchange rate is p(z)·c^(m)/2.

mod audit;
mod exact;
mod pairing;

pub use audit::{thinning_audit, ClassCount, ThinningAudit};
pub use exact::{
    bernoulli_weights, dirichlet_form, dirichlet_pairing, exact_generator, stationarity_check,
    GeneratorMatrix, StationarityReport, GENERATOR_SITE_CAP,
};
pub use pairing::{carre_du_champ, generator_pairing, generator_pairing_direct, PairingContext};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{check_gamma, Error, Result};
use crate::kernel::JumpKernel;
use crate::lattice::LatticeConfig;
use crate::rates::RateModel;

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    /// Sites per unit of macroscopic length.
    pub n: usize,
    /// Macroscopic horizon T.
    pub horizon: f64,
    pub gamma: f64,
    pub m: u32,
    pub seed: u64,
    /// Macroscopic times at which to copy the configuration, sorted, in [0, T].
    pub snapshot_times: Vec<f64>,
    /// Keep every accepted exchange in the log.
    pub record_events: bool,
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0])
            || self.snapshot_times.iter().any(|&t| t < 0.0 || t > self.horizon)
        {
            return Err(Error::InvalidArgument("snapshot times must be sorted and inside [0, T]".into()));
        }
        Ok(())
    }
}

/// An executed exchange between `x` and `y` at macroscopic time `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub x: usize,
    pub y: usize,
    /// c^(m)_{x,y} at the moment of the exchange.
    pub rate: u32,
}

#[derive(Debug, Clone)]
pub struct EventLog {
    pub events: Vec<Event>,
    pub snapshots: Vec<(f64, LatticeConfig)>,
    pub proposals: u64,
    pub accepted: u64,
    pub final_config: LatticeConfig,
    pub final_time: f64,
}

/// Thinning sampler holding one trajectory.
pub struct Simulator<'a> {
    kernel: &'a JumpKernel,
    rates: RateModel,
    cfg: LatticeConfig,
    rng: ChaCha8Rng,
    /// n^γ
    time_scale: f64,
    /// Proposal rate in microscopic time.
    envelope: f64,
    /// 2(2m+1)
    acceptance_denominator: u32,
    micro_now: f64,
    next_proposal: f64,
    proposals: u64,
    accepted: u64,
}

impl<'a> Simulator<'a> {
    pub fn new(kernel: &'a JumpKernel, rates: RateModel, init: LatticeConfig, n: usize, seed: u64) -> Result<Self> {
        if kernel.ring_size() != init.size() {
            return Err(Error::InvalidArgument(format!(
                "kernel ring of {} sites does not match configuration of {}",
                kernel.ring_size(),
                init.size()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n must be at least 2, got {n}")));
        }
        let bound = rates.rate_bound();
        let envelope = init.size() as f64 * bound as f64 / 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first: f64 = rng.sample(Exp1);
        Ok(Simulator {
            kernel,
            rates,
            cfg: init,
            rng,
            time_scale: (n as f64).powf(kernel.gamma()),
            envelope,
            acceptance_denominator: 2 * bound,
            micro_now: 0.0,
            next_proposal: first / envelope,
            proposals: 0,
            accepted: 0,
        })
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.cfg
    }

    /// Current macroscopic time.
    pub fn time(&self) -> f64 {
        self.micro_now / self.time_scale
    }

    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    /// Advances to macroscopic time `t`, calling `on_event` with the
    /// configuration just before each accepted exchange. The pending proposal
    /// time is kept, so stopping points never change the trajectory.
    pub fn run_until<F>(&mut self, t: f64, mut on_event: F) -> Result<()>
    where
        F: FnMut(&LatticeConfig, &Event),
    {
        let target = t * self.time_scale;
        let size = self.cfg.size();
        let bound = self.rates.rate_bound();
        while self.next_proposal <= target {
            self.micro_now = self.next_proposal;
            self.proposals += 1;
            let x = self.rng.random_range(0..size);
            let z = self.kernel.sample_jump(&mut self.rng);
            let y = if x + z >= size { x + z - size } else { x + z };
            if self.cfg.bit(x) != self.cfg.bit(y) {
                let c = self.rates.c_m_unchecked(&self.cfg, x as i64, y as i64);
                if c > bound {
                    return Err(Error::EnvelopeViolation { rate: c, bound, x, y });
                }
                if self.rng.random_range(0..self.acceptance_denominator) < c {
                    let event = Event {
                        time: self.micro_now / self.time_scale,
                        x,
                        y,
                        rate: c,
                    };
                    on_event(&self.cfg, &event);
                    self.cfg.exchange_unchecked(x, y);
                    self.accepted += 1;
                }
            }
            let wait: f64 = self.rng.sample(Exp1);
            self.next_proposal += wait / self.envelope;
        }
        if target > self.micro_now {
            self.micro_now = target;
        }
        Ok(())
    }
}

/// Samples one trajectory of the n^γ-accelerated process up to the horizon.
pub fn simulate(params: &SimParams, kernel: &JumpKernel, rates: RateModel, init: LatticeConfig) -> Result<EventLog> {
    params.validate()?;
    if rates.m() != params.m || kernel.gamma() != params.gamma {
        return Err(Error::InvalidArgument("kernel or rate model disagrees with parameters".into()));
    }
    let mut sim = Simulator::new(kernel, rates, init, params.n, params.seed)?;
    let mut events = Vec::new();
    let mut snapshots = Vec::with_capacity(params.snapshot_times.len());
    let record = params.record_events;
    for &t in &params.snapshot_times {
        sim.run_until(t, |_, e| {
            if record {
                events.push(*e)
            }
        })?;
        snapshots.push((t, sim.config().clone()));
    }
    sim.run_until(params.horizon, |_, e| {
        if record {
            events.push(*e)
        }
    })?;
    Ok(EventLog {
        events,
        snapshots,
        proposals: sim.proposals(),
        accepted: sim.accepted(),
        final_time: sim.time(),
        final_config: sim.cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: u32, gamma: f64, horizon: f64, seed: u64) -> SimParams {
        SimParams {
            n,
            horizon,
            gamma,
            m,
            seed,
            snapshot_times: vec![],
            record_events: true,
        }
    }

    #[test]
    fn full_lattice_never_changes() {
        let k = JumpKernel::new(1.0, 32).unwrap();
        let log = simulate(&params(16, 1, 1.0, 1.0, 1), &k, RateModel::new(1).unwrap(), LatticeConfig::full(32)).unwrap();
        assert!(log.proposals > 0);
        assert_eq!(log.accepted, 0);
        assert_eq!(log.final_config, LatticeConfig::full(32));
    }

    #[test]
    fn deterministic_given_seed() {
        let k = JumpKernel::new(0.5, 40).unwrap();
        let init = LatticeConfig::from_occupancies((0..40).map(|x| x % 3 == 0));
        let run = |seed| simulate(&params(20, 2, 0.5, 0.5, seed), &k, RateModel::new(2).unwrap(), init.clone()).unwrap();
        let (a, b, c) = (run(7), run(7), run(8));
        assert_eq!(a.events, b.events);
        assert_eq!(a.final_config, b.final_config);
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn events_are_valid_and_ordered() {
        let k = JumpKernel::new(1.5, 48).unwrap();
        let init = LatticeConfig::from_occupancies((0..48).map(|x| x % 2 == 0));
        let rm = RateModel::new(3).unwrap();
        let mut sim = Simulator::new(&k, rm, init, 24, 3).unwrap();
        let mut last = 0.0;
        sim.run_until(1.0, |cfg, e| {
            assert!(e.time > last);
            last = e.time;
            assert_eq!(cfg.discrepancy(e.x, e.y), 1);
            assert!(e.rate > 0);
            assert_eq!(rm.c_m(cfg, e.x as i64, e.y as i64).unwrap(), e.rate);
        })
        .unwrap();
        assert!(sim.accepted() > 0);
        assert!((sim.time() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn snapshots_do_not_perturb_trajectory() {
        let k = JumpKernel::new(1.0, 30).unwrap();
        let init = LatticeConfig::from_occupancies((0..30).map(|x| x < 15));
        let mut p = params(15, 2, 1.0, 1.0, 5);
        let plain = simulate(&p, &k, RateModel::new(2).unwrap(), init.clone()).unwrap();
        p.snapshot_times = vec![0.0, 0.1, 0.25, 0.5, 0.9];
        let snap = simulate(&p, &k, RateModel::new(2).unwrap(), init.clone()).unwrap();
        assert_eq!(plain.events, snap.events);
        assert_eq!(plain.final_config, snap.final_config);
        assert_eq!(snap.snapshots[0].1, init);
        assert_eq!(snap.snapshots.len(), 5);
    }

    #[test]
    fn particle_count_conserved() {
        let k = JumpKernel::new(0.5, 64).unwrap();
        let init = LatticeConfig::from_occupancies((0..64).map(|x| x % 5 < 2));
        let log = simulate(&params(32, 3, 0.5, 2.0, 9), &k, RateModel::new(3).unwrap(), init.clone()).unwrap();
        assert_eq!(log.final_config.count(), init.count());
        assert_eq!(log.final_config.popcount(), init.count());
    }

    #[test]
    fn rejects_bad_parameters() {
        let k = JumpKernel::new(1.0, 32).unwrap();
        let init = LatticeConfig::empty(32);
        let rm = RateModel::new(1).unwrap();
        let mut p = params(16, 1, 1.0, 1.0, 0);
        p.horizon = 0.0;
        assert!(simulate(&p, &k, rm, init.clone()).is_err());
        let mut p = params(16, 1, 1.0, 1.0, 0);
        p.snapshot_times = vec![0.5, 0.2];
        assert!(simulate(&p, &k, rm, init.clone()).is_err());
        assert!(simulate(&params(16, 1, 1.0, 1.0, 0), &k, rm, LatticeConfig::empty(30)).is_err());
        assert!(simulate(&params(16, 2, 1.0, 1.0, 0), &k, rm, init).is_err());
    }
}
