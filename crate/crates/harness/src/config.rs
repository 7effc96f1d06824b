//! Experiment configuration: a TOML file, per-mode defaults and CLI overrides.

use std::path::{Path, PathBuf};

use fpme_core::{ProfileSpec, TestFunction};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Hydro,
    Invariance,
    Operators,
    #[serde(alias = "pde-only")]
    Pde,
    RatesAudit,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Hydro => "hydro",
            Mode::Invariance => "invariance",
            Mode::Operators => "operators",
            Mode::Pde => "pde",
            Mode::RatesAudit => "rates-audit",
        }
    }
}

/// Test functions as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunctionSpec {
    GaussianBump {
        center: f64,
        width: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        time_poly: Vec<f64>,
    },
    HermiteBump {
        center: f64,
        width: f64,
        order: usize,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        time_poly: Vec<f64>,
    },
    Cosine {
        omega: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        time_poly: Vec<f64>,
    },
    Constant {
        value: f64,
    },
}

impl TestFunctionSpec {
    pub fn build(&self) -> TestFunction {
        let (g, poly) = match self {
            TestFunctionSpec::GaussianBump { center, width, time_poly } => (TestFunction::gaussian_bump(*center, *width), time_poly),
            TestFunctionSpec::HermiteBump { center, width, order, time_poly } => {
                (TestFunction::hermite_bump(*center, *width, *order), time_poly)
            }
            TestFunctionSpec::Cosine { omega, time_poly } => (TestFunction::cosine_mode(*omega), time_poly),
            TestFunctionSpec::Constant { value } => return TestFunction::constant(*value),
        };
        if poly.is_empty() {
            g
        } else {
            g.with_time_poly(poly)
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            TestFunctionSpec::GaussianBump { center, width, time_poly } | TestFunctionSpec::HermiteBump { center, width, time_poly, .. } => {
                center.is_finite() && width.is_finite() && *width > 0.0 && time_poly.iter().all(|c| c.is_finite())
            }
            TestFunctionSpec::Cosine { omega, time_poly } => omega.is_finite() && time_poly.iter().all(|c| c.is_finite()),
            TestFunctionSpec::Constant { value } => value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(HarnessError::Config(format!("invalid test function {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HydroSettings {
    /// Grid of the PDE solution the ensembles are compared with.
    pub pde_grid: usize,
    /// Uniform snapshot steps on [0, T] for the martingale quadrature; 0 turns
    /// the martingale diagnostics off.
    pub martingale_steps: usize,
}

impl Default for HydroSettings {
    fn default() -> Self {
        HydroSettings {
            pde_grid: 1024,
            martingale_steps: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvarianceSettings {
    pub ms: Vec<u32>,
    pub gammas: Vec<f64>,
    pub densities: Vec<f64>,
    pub ring_size: usize,
    pub dirichlet_ring: usize,
    pub dirichlet_samples: usize,
    pub thinning_ring: usize,
    pub thinning_events: u64,
}

impl Default for InvarianceSettings {
    fn default() -> Self {
        InvarianceSettings {
            ms: vec![1, 2, 3],
            gammas: vec![0.5, 1.0, 1.5],
            densities: vec![0.3, 0.5],
            ring_size: 10,
            dirichlet_ring: 5,
            dirichlet_samples: 20,
            thinning_ring: 8,
            thinning_events: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorSettings {
    pub gammas: Vec<f64>,
}

impl Default for OperatorSettings {
    fn default() -> Self {
        OperatorSettings {
            gammas: vec![0.5, 1.0, 1.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeSettings {
    /// Grid of the time-order study (m = 1, stable dt against dt/2).
    pub order_grid: usize,
    /// Grid of the m = 1 comparison with the multiplier solution.
    pub exact_grid: usize,
    /// Coarse grid and step count of the weak-residual study; the fine run
    /// doubles both.
    pub residual_grid: usize,
    pub residual_steps: usize,
    pub energy_ms: Vec<u32>,
    pub energy_grids: Vec<usize>,
    pub energy_horizon: f64,
    pub energy_outputs: usize,
}

impl Default for PdeSettings {
    fn default() -> Self {
        PdeSettings {
            order_grid: 64,
            exact_grid: 1024,
            residual_grid: 256,
            residual_steps: 20,
            energy_ms: vec![1, 2],
            energy_grids: vec![1024, 2048],
            energy_horizon: 1.0,
            energy_outputs: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesSettings {
    pub ms: Vec<u32>,
    /// Ring size for the decomposition audit (all 2^window configurations).
    pub window: usize,
    pub max_distance: usize,
    /// Ring size for the unit-jump audit.
    pub bond_window: usize,
}

impl Default for RatesSettings {
    fn default() -> Self {
        RatesSettings {
            ms: vec![2, 3, 4],
            window: 14,
            max_distance: 5,
            bond_window: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub gamma: f64,
    pub m: u32,
    /// Empty means the default list of the mode.
    pub n_list: Vec<usize>,
    #[serde(rename = "T", alias = "horizon")]
    pub horizon: f64,
    /// Empty means five equally spaced times in (0, T].
    pub snapshot_times: Vec<f64>,
    pub ensemble_size: usize,
    pub master_seed: u64,
    pub profile: ProfileSpec,
    pub test_functions: Vec<TestFunctionSpec>,
    pub output_dir: PathBuf,
    pub torus_length: f64,
    pub hydro: HydroSettings,
    pub invariance: InvarianceSettings,
    pub operators: OperatorSettings,
    pub pde: PdeSettings,
    pub rates: RatesSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: Mode::Hydro,
            gamma: 1.0,
            m: 2,
            n_list: Vec::new(),
            horizon: 0.5,
            snapshot_times: Vec::new(),
            ensemble_size: 200,
            master_seed: 2024,
            profile: ProfileSpec::default(),
            test_functions: vec![TestFunctionSpec::GaussianBump {
                center: 1.0,
                width: 0.2,
                time_poly: Vec::new(),
            }],
            output_dir: PathBuf::from("fpme-out"),
            torus_length: 2.0,
            hydro: HydroSettings::default(),
            invariance: InvarianceSettings::default(),
            operators: OperatorSettings::default(),
            pde: PdeSettings::default(),
            rates: RatesSettings::default(),
        }
    }
}

/// Values given on the command line; each replaces the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<Mode>,
    /// Also replaces the γ lists of the invariance and operator suites.
    pub gamma: Option<f64>,
    /// Also replaces the m lists of the invariance, PDE and rate suites.
    pub m: Option<u32>,
    pub n: Vec<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn for_mode(mode: Mode) -> Self {
        let mut cfg = ExperimentConfig { mode, ..Default::default() };
        cfg.fill_defaults();
        cfg
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.fill_defaults();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Serialization(e.to_string()))
    }

    /// Fills the empty n list and snapshot times with the mode defaults.
    pub fn fill_defaults(&mut self) {
        if self.n_list.is_empty() {
            self.n_list = match self.mode {
                Mode::Hydro => vec![256, 512, 1024, 2048],
                Mode::Operators => (8..=13).map(|k| 1usize << k).collect(),
                _ => Vec::new(),
            };
        }
        if self.snapshot_times.is_empty() && self.mode == Mode::Hydro {
            self.snapshot_times = (1..=5).map(|i| self.horizon * i as f64 / 5.0).collect();
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(mode) = o.mode {
            self.mode = mode;
        }
        if let Some(g) = o.gamma {
            self.gamma = g;
            self.invariance.gammas = vec![g];
            self.operators.gammas = vec![g];
        }
        if let Some(m) = o.m {
            self.m = m;
            self.invariance.ms = vec![m];
            self.pde.energy_ms = vec![m];
            self.rates.ms = vec![m];
        }
        if !o.n.is_empty() {
            let mut n = o.n.clone();
            n.sort_unstable();
            n.dedup();
            self.n_list = n;
        }
        if let Some(seed) = o.seed {
            self.master_seed = seed;
        }
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
        self.fill_defaults();
    }

    /// Ring size n·Λ for a scaling parameter n.
    pub fn ring_size(&self, n: usize) -> usize {
        (n as f64 * self.torus_length).round() as usize
    }

    pub fn test_function_list(&self) -> Vec<TestFunction> {
        self.test_functions.iter().map(TestFunctionSpec::build).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let gamma_ok = |g: f64| g > 0.0 && g < 2.0;
        let m_ok = |m: u32| (1..=8).contains(&m);
        if !gamma_ok(self.gamma) {
            return bad(format!("gamma = {} must lie in (0, 2)", self.gamma));
        }
        if !m_ok(self.m) {
            return bad(format!("m = {} must lie in 1..=8", self.m));
        }
        if !(self.torus_length.is_finite() && self.torus_length > 0.0) {
            return bad(format!("torus_length = {} must be positive", self.torus_length));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("T = {} must be positive", self.horizon));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("n_list {:?} must be strictly ascending", self.n_list));
        }
        for &n in &self.n_list {
            let size = n as f64 * self.torus_length;
            if n < 2 || size.fract() != 0.0 || size < 4.0 {
                return bad(format!("n = {n} needs n >= 2 and an integral ring size n*torus_length >= 4"));
            }
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0])
            || self.snapshot_times.iter().any(|&t| !(t > 0.0 && t <= self.horizon))
        {
            return bad(format!("snapshot_times {:?} must be strictly ascending inside (0, T]", self.snapshot_times));
        }
        if !(1..=1_000_000).contains(&self.ensemble_size) {
            return bad(format!("ensemble_size = {} must lie in 1..=1000000", self.ensemble_size));
        }
        self.profile
            .validate(self.torus_length)
            .map_err(|e| HarnessError::Config(format!("profile: {e}")))?;
        for g in &self.test_functions {
            g.validate()?;
        }
        match self.mode {
            Mode::Hydro => {
                if self.n_list.is_empty() || self.test_functions.is_empty() || self.snapshot_times.is_empty() {
                    return bad("hydro needs n_list, snapshot_times and test_functions".into());
                }
                if self.hydro.pde_grid < 16 {
                    return bad("hydro.pde_grid must be at least 16".into());
                }
            }
            Mode::Operators => {
                if self.n_list.is_empty() || self.test_functions.is_empty() {
                    return bad("operators needs n_list and test_functions".into());
                }
                if self.operators.gammas.iter().any(|&g| !gamma_ok(g)) {
                    return bad(format!("operators.gammas {:?} must lie in (0, 2)", self.operators.gammas));
                }
            }
            Mode::Invariance => {
                let s = &self.invariance;
                if s.ms.iter().any(|&m| !m_ok(m)) || s.gammas.iter().any(|&g| !gamma_ok(g)) {
                    return bad("invariance.ms must lie in 1..=8 and invariance.gammas in (0, 2)".into());
                }
                if s.densities.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
                    return bad(format!("invariance.densities {:?} must lie in (0, 1)", s.densities));
                }
                for (name, size) in [("ring_size", s.ring_size), ("dirichlet_ring", s.dirichlet_ring), ("thinning_ring", s.thinning_ring)] {
                    if !(3..=fpme_core::dynamics::GENERATOR_SITE_CAP).contains(&size) {
                        return bad(format!(
                            "invariance.{name} = {size} must lie in 3..={}",
                            fpme_core::dynamics::GENERATOR_SITE_CAP
                        ));
                    }
                }
            }
            Mode::Pde => {
                let p = &self.pde;
                let grids = [p.order_grid, p.exact_grid, p.residual_grid];
                if grids.iter().chain(&p.energy_grids).any(|&g| g < 8) || p.residual_steps == 0 || p.energy_outputs == 0 {
                    return bad("pde grids must be at least 8 and step counts positive".into());
                }
                if !(p.energy_horizon.is_finite() && p.energy_horizon > 0.0) {
                    return bad("pde.energy_horizon must be positive".into());
                }
                if p.energy_ms.iter().any(|&m| !m_ok(m)) {
                    return bad("pde.energy_ms must lie in 1..=8".into());
                }
            }
            Mode::RatesAudit => {
                let r = &self.rates;
                if r.ms.iter().any(|&m| !(2..=8).contains(&m)) {
                    return bad("rates.ms must lie in 2..=8".into());
                }
                let m_max = r.ms.iter().copied().max().unwrap_or(2) as usize;
                if r.max_distance < 2 || r.window < r.max_distance + 2 * m_max - 1 || r.window > 20 {
                    return bad(format!(
                        "rates.window = {} must hold max_distance + 2m - 1 = {} sites and be at most 20",
                        r.window,
                        r.max_distance + 2 * m_max - 1
                    ));
                }
                if r.bond_window < 2 * m_max || r.bond_window > 20 {
                    return bad(format!("rates.bond_window = {} must lie in {}..=20", r.bond_window, 2 * m_max));
                }
            }
        }
        Ok(())
    }
}
