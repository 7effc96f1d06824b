//! Empirical-measure pairings, box averages and martingale diagnostics.

use serde::{Deserialize, Serialize};

use crate::dynamics::{generator_pairing, PairingContext};
use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;
use crate::testfn::TestFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub n: usize,
    pub gamma: f64,
    pub m: u32,
    pub seed: u64,
    pub observable: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: SeriesMeta,
}

impl EmpiricalSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, meta: SeriesMeta) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidArgument("times and values differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("times must be sorted".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("values must be finite".into()));
        }
        Ok(EmpiricalSeries { times, values, meta })
    }

    /// CSV rows `time,value,n,gamma,m,seed,observable`.
    pub fn to_csv_rows(&self) -> Vec<String> {
        self.times
            .iter()
            .zip(&self.values)
            .map(|(t, v)| {
                format!(
                    "{t},{v},{},{},{},{},{}",
                    self.meta.n, self.meta.gamma, self.meta.m, self.meta.seed, self.meta.observable
                )
            })
            .collect()
    }
}

/// ⟨π^n, G_s⟩ = (1/n) Σ_x G_s(x/n) η(x).
pub fn pair_with_test_function(cfg: &LatticeConfig, g: &TestFunction, s: f64, n: usize) -> f64 {
    let len = cfg.size() as f64 / n as f64;
    (0..cfg.size())
        .filter(|&x| cfg.bit(x) == 1)
        .map(|x| g.value_torus(s, x as f64 / n as f64, len))
        .sum::<f64>()
        / n as f64
}

/// Same pairing with G_s already tabulated at every site.
pub fn pair_with_values(cfg: &LatticeConfig, values: &[f64], n: usize) -> f64 {
    (0..cfg.size())
        .filter(|&x| cfg.bit(x) == 1)
        .map(|x| values[x])
        .sum::<f64>()
        / n as f64
}

/// (1/ℓ) Σ_{i=1}^{ℓ} η(x + i).
pub fn box_average(cfg: &LatticeConfig, x: i64, ell: usize) -> Result<f64> {
    if ell == 0 {
        return Err(Error::InvalidArgument("box length must be positive".into()));
    }
    let total: u32 = (1..=ell as i64).map(|i| cfg.occupancy(x + i)).sum();
    Ok(total as f64 / ell as f64)
}

/// Box averages with ℓ = ⌊εn⌋ at every site, entry x belonging to u = x/n.
/// The box sits to the right of x; shift by ℓ/2 sites when plotting.
pub fn density_profile(cfg: &LatticeConfig, n: usize, eps: f64) -> Result<Vec<f64>> {
    let ell = (eps * n as f64).floor() as usize;
    if ell < 1 {
        return Err(Error::InvalidArgument(format!("eps * n = {} is below one site", eps * n as f64)));
    }
    let size = cfg.size();
    // running window sum over sites x+1..=x+ell
    let mut sum: u32 = (1..=ell).map(|i| cfg.bit(i % size)).sum();
    let mut out = Vec::with_capacity(size);
    for x in 0..size {
        out.push(sum as f64 / ell as f64);
        sum = sum + cfg.bit((x + ell + 1) % size) - cfg.bit((x + 1) % size);
    }
    Ok(out)
}

/// Default profile box fraction ε = c/√n.
pub fn default_profile_eps(n: usize) -> f64 {
    2.0 / (n as f64).sqrt()
}

/// One trajectory observed at snapshot times t_0 = 0 < t_1 < ….
#[derive(Debug, Clone)]
pub struct SnapshotPath {
    pub times: Vec<f64>,
    pub configs: Vec<LatticeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleStats {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
}

/// M_t for one path, trapezoid rule in time over the snapshot grid:
/// M_t = ⟨π_t,G_t⟩ − ⟨π_0,G_0⟩ − ∫_0^t (⟨π_s, ∂_sG_s⟩ + n^γ L⟨π_s,G_s⟩) ds.
pub fn martingale_path(path: &SnapshotPath, g: &TestFunction, ctx: &PairingContext) -> Vec<f64> {
    let n = ctx.n();
    let size = ctx.size();
    let dg = g.time_derivative();
    let integrand: Vec<f64> = path
        .times
        .iter()
        .zip(&path.configs)
        .map(|(&t, cfg)| {
            let dvals = dg.values_on_ring(t, n, size);
            let gvals = g.values_on_ring(t, n, size);
            pair_with_values(cfg, &dvals, n) + generator_pairing(cfg, &gvals, ctx)
        })
        .collect();
    let pairing: Vec<f64> = path
        .times
        .iter()
        .zip(&path.configs)
        .map(|(&t, cfg)| pair_with_values(cfg, &g.values_on_ring(t, n, size), n))
        .collect();
    let mut out = Vec::with_capacity(path.times.len());
    let mut integral = 0.0;
    for i in 0..path.times.len() {
        if i > 0 {
            integral += 0.5 * (path.times[i] - path.times[i - 1]) * (integrand[i] + integrand[i - 1]);
        }
        out.push(pairing[i] - pairing[0] - integral);
    }
    out
}

/// Ensemble mean, variance and standard error of M_t at each snapshot time.
pub fn martingale_estimate(paths: &[SnapshotPath], g: &TestFunction, ctx: &PairingContext) -> Result<MartingaleStats> {
    let first = paths
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
    if paths.iter().any(|p| p.times != first.times) {
        return Err(Error::InvalidArgument("paths must share snapshot times".into()));
    }
    let values: Vec<Vec<f64>> = paths.iter().map(|p| martingale_path(p, g, ctx)).collect();
    Ok(summarize(&first.times, &values))
}

pub(crate) fn summarize(times: &[f64], values: &[Vec<f64>]) -> MartingaleStats {
    let k = values.len() as f64;
    let mut mean = vec![0.0; times.len()];
    let mut variance = vec![0.0; times.len()];
    for i in 0..times.len() {
        let m = values.iter().map(|v| v[i]).sum::<f64>() / k;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v[i] - m).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        mean[i] = m;
        variance[i] = var;
    }
    let stderr = variance.iter().map(|v| (v / k).sqrt()).collect();
    MartingaleStats {
        times: times.to_vec(),
        mean,
        variance,
        stderr,
        samples: values.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{MeasureSpec, ProfileSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pairing_trivial_cases() {
        let g = TestFunction::gaussian_bump(1.0, 0.2);
        let n = 64;
        assert_eq!(pair_with_test_function(&LatticeConfig::empty(128), &g, 0.0, n), 0.0);
        let full = pair_with_test_function(&LatticeConfig::full(128), &g, 0.0, n);
        let riemann: f64 = (0..128).map(|x| g.value_torus(0.0, x as f64 / 64.0, 2.0)).sum::<f64>() / 64.0;
        assert!((full - riemann).abs() < 1e-14);
    }

    #[test]
    fn pairing_bernoulli_within_four_sigma() {
        let n = 4096;
        let g = TestFunction::gaussian_bump(1.0, 0.2);
        let ms = MeasureSpec::new(ProfileSpec::Constant { b: 0.5 }, n, 2.0).unwrap();
        let cfg = ms.sample_initial(&mut ChaCha8Rng::seed_from_u64(4));
        let v = pair_with_test_function(&cfg, &g, 0.0, n);
        let vals = g.values_on_ring(0.0, n, 2 * n);
        let integral = 0.2 * (2.0 * std::f64::consts::PI).sqrt();
        let sigma = (vals.iter().map(|x| x * x * 0.25).sum::<f64>()).sqrt() / n as f64;
        assert!((v - 0.5 * integral).abs() < 4.0 * sigma);
    }

    #[test]
    fn pairing_linear_and_monotone() {
        let cfg = LatticeConfig::from_occupancies((0..40).map(|x| x % 3 == 0));
        let a = TestFunction::gaussian_bump(0.7, 0.3);
        let b = TestFunction::hermite_bump(1.2, 0.2, 1);
        let lhs = pair_with_test_function(&cfg, &a.clone().scaled(2.0).plus(b.clone().scaled(-1.5)), 0.0, 20);
        let rhs = 2.0 * pair_with_test_function(&cfg, &a, 0.0, 20) - 1.5 * pair_with_test_function(&cfg, &b, 0.0, 20);
        assert!((lhs - rhs).abs() < 1e-14);
        let with_extra = LatticeConfig::from_occupancies((0..40).map(|x| x % 3 == 0 || x == 1));
        assert!(pair_with_test_function(&with_extra, &a, 0.0, 20) >= pair_with_test_function(&cfg, &a, 0.0, 20));
    }

    #[test]
    fn box_average_examples() {
        let cfg = LatticeConfig::from_occupancies((0..20).map(|x| x % 2 == 0));
        assert_eq!(box_average(&cfg, 3, 1).unwrap(), cfg.occupancy(4) as f64);
        assert_eq!(box_average(&LatticeConfig::full(9), 2, 7).unwrap(), 1.0);
        for ell in [2usize, 4, 6, 18] {
            assert_eq!(box_average(&cfg, 5, ell).unwrap(), 0.5);
        }
        assert!(box_average(&cfg, 0, 0).is_err());
    }

    #[test]
    fn profile_matches_box_average_and_mass() {
        let cfg = LatticeConfig::from_occupancies((0..50).map(|x| (x * 7) % 11 < 5));
        let n = 25;
        let prof = density_profile(&cfg, n, 0.2).unwrap();
        for x in 0..50 {
            assert!((prof[x] - box_average(&cfg, x as i64, 5).unwrap()).abs() < 1e-15);
        }
        let mass: f64 = prof.iter().sum::<f64>() / n as f64;
        assert!((mass - cfg.count() as f64 / n as f64).abs() < 1e-12);
        let unit = density_profile(&cfg, n, 1.0 / n as f64).unwrap();
        for x in 0..50 {
            assert_eq!(unit[x], cfg.occupancy(x as i64 + 1) as f64);
        }
        assert!(density_profile(&LatticeConfig::full(50), n, 0.3).unwrap().iter().all(|&v| v == 1.0));
        assert!(density_profile(&cfg, n, 0.01).is_err());
    }

    #[test]
    fn profile_tracks_smooth_density() {
        let n = 1 << 14;
        let p = ProfileSpec::default();
        let ms = MeasureSpec::new(p.clone(), n, 2.0).unwrap();
        let cfg = ms.sample_initial(&mut ChaCha8Rng::seed_from_u64(21));
        let eps = 0.02;
        let prof = density_profile(&cfg, n, eps).unwrap();
        let ell = (eps * n as f64) as usize;
        let bound = 4.0 * (1.0 / (eps * n as f64)).sqrt();
        for probe in 0..20 {
            let x = probe * (2 * n / 20);
            // compare with g at the box centre
            let u = (x as f64 + 0.5 * (ell + 1) as f64) / n as f64;
            assert!((prof[x] - p.value_torus(u, 2.0)).abs() < bound);
        }
    }

    #[test]
    fn series_validation_and_csv() {
        let meta = SeriesMeta { n: 8, gamma: 1.0, m: 2, seed: 3, observable: "pair".into() };
        let s = EmpiricalSeries::new(vec![0.0, 0.5], vec![1.0, 2.0], meta.clone()).unwrap();
        assert_eq!(s.to_csv_rows()[1], "0.5,2,8,1,2,3,pair");
        assert!(EmpiricalSeries::new(vec![0.5, 0.0], vec![1.0, 2.0], meta.clone()).is_err());
        assert!(EmpiricalSeries::new(vec![0.0], vec![f64::NAN], meta).is_err());
    }
}
