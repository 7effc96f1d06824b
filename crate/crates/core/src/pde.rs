//! Fractional porous-medium equation ∂_t ρ = −κ(−Δ)^{γ/2} ρ^m on a torus of
//! length Λ: pseudospectral RK4, the exact m = 1 multiplier solution, the
//! weak-form residual and the energy integrals.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracops::sobolev_seminorm;
use crate::measures::ProfileSpec;
use crate::special::symbol_coefficient;
use crate::spectral::{dft, idft_real, signed_mode};
use crate::testfn::TestFunction;

/// Values below −CLIP_LEVEL are clipped to 0 in reported fields.
pub const CLIP_LEVEL: f64 = 1e-10;
/// Solver aborts once the sup norm exceeds this.
pub const BLOWUP_LEVEL: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub grid_size: usize,
    pub torus_length: f64,
    pub time: f64,
    pub values: Vec<f64>,
    /// Smallest value before clipping.
    pub raw_min: f64,
}

impl DensityField {
    fn new(values: Vec<f64>, torus_length: f64, time: f64) -> Self {
        let raw_min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let mut values = values;
        let mut clipped = 0usize;
        for v in values.iter_mut() {
            if *v < -CLIP_LEVEL {
                *v = 0.0;
                clipped += 1;
            }
        }
        if clipped > 0 {
            log::warn!("clipped {clipped} negative values at t = {time} (min {raw_min:e})");
        }
        DensityField {
            grid_size: values.len(),
            torus_length,
            time,
            values,
            raw_min,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.torus_length / self.grid_size as f64
    }

    /// Grid coordinates u_j = jΛ/grid.
    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.grid_size).map(|j| j as f64 * self.spacing()).collect()
    }

    /// ∫_0^Λ ρ du by the periodic rectangle rule.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// ∫_0^Λ ρ(u) G_t(u) du by the periodic rectangle rule.
    pub fn pair(&self, g: &TestFunction, t: f64) -> f64 {
        let h = self.spacing();
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| v * g.value_torus(t, j as f64 * h, self.torus_length))
            .sum::<f64>()
            * h
    }

    /// CSV rows `u,rho`.
    pub fn to_csv_rows(&self) -> Vec<String> {
        self.coordinates()
            .iter()
            .zip(&self.values)
            .map(|(u, r)| format!("{u},{r}"))
            .collect()
    }
}

/// Fourier multiplier −coeff·|ξ|^γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracSymbol {
    pub coeff: f64,
    pub gamma: f64,
}

impl FracSymbol {
    /// Symbol matched to the particle system, coeff = κ_γ.
    pub fn model(gamma: f64) -> Result<Self> {
        crate::error::check_gamma(gamma)?;
        Ok(FracSymbol {
            coeff: symbol_coefficient(gamma),
            gamma,
        })
    }

    /// coeff = 1, allowing γ = 2 (the heat equation).
    pub fn unit(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 2.0) {
            return Err(Error::Domain {
                name: "gamma",
                value: gamma,
                expected: "0 < gamma <= 2",
            });
        }
        Ok(FracSymbol { coeff: 1.0, gamma })
    }

    /// Multiplier at DFT bin `k` for `grid` points on a torus of length Λ.
    pub fn at_mode(&self, k: usize, grid: usize, torus_length: f64) -> f64 {
        let xi = 2.0 * PI * signed_mode(k, grid) as f64 / torus_length;
        if xi == 0.0 {
            0.0
        } else {
            -self.coeff * xi.abs().powf(self.gamma)
        }
    }

    fn table(&self, grid: usize, torus_length: f64) -> Vec<f64> {
        (0..grid).map(|k| self.at_mode(k, grid, torus_length)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Rk4Spectral,
    ExactLinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt: f64,
    pub grid_size: usize,
    pub torus_length: f64,
    pub m: u32,
    pub symbol: FracSymbol,
    pub integrator: Integrator,
    /// Zero the top third of the modes of ρ^m before applying the symbol.
    pub dealias: bool,
}

impl SolverConfig {
    /// RK4 pseudospectral configuration with the model symbol and dt = dt_stable.
    pub fn rk4(gamma: f64, m: u32, grid_size: usize, torus_length: f64) -> Result<Self> {
        let mut cfg = SolverConfig {
            dt: 0.0,
            grid_size,
            torus_length,
            m,
            symbol: FracSymbol::model(gamma)?,
            integrator: Integrator::Rk4Spectral,
            dealias: false,
        };
        cfg.dt = cfg.dt_stable();
        Ok(cfg)
    }

    /// 0.5 / (m·coeff·k_max^γ), k_max = π·grid/Λ.
    pub fn dt_stable(&self) -> f64 {
        let k_max = PI * self.grid_size as f64 / self.torus_length;
        0.5 / (self.m.max(1) as f64 * self.symbol.coeff * k_max.powf(self.symbol.gamma))
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 4 {
            return Err(Error::InvalidArgument(format!("grid needs at least 4 points, got {}", self.grid_size)));
        }
        if !(self.torus_length > 0.0) {
            return Err(Error::InvalidArgument("torus length must be positive".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        if !(self.dt > 0.0) || self.dt > self.dt_stable() * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "dt = {} must be positive and at most {}",
                self.dt,
                self.dt_stable()
            )));
        }
        if self.integrator == Integrator::ExactLinear && self.m != 1 {
            return Err(Error::Unsupported("exact linear integrator needs m = 1".into()));
        }
        Ok(())
    }
}

struct Rhs {
    m: i32,
    multiplier: Vec<f64>,
}

impl Rhs {
    fn new(cfg: &SolverConfig) -> Self {
        let grid = cfg.grid_size;
        let mut multiplier = cfg.symbol.table(grid, cfg.torus_length);
        if cfg.dealias {
            for (k, v) in multiplier.iter_mut().enumerate() {
                if 3 * signed_mode(k, grid).unsigned_abs() as usize > grid {
                    *v = 0.0;
                }
            }
        }
        Rhs { m: cfg.m as i32, multiplier }
    }

    fn eval(&self, rho: &[f64]) -> Vec<f64> {
        let pow: Vec<f64> = rho.iter().map(|r| r.powi(self.m)).collect();
        let mut hat = dft(&pow);
        for (c, s) in hat.iter_mut().zip(&self.multiplier) {
            *c *= *s;
        }
        hat[0] = Complex::new(0.0, 0.0);
        idft_real(&hat)
    }
}

fn axpy(base: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    base.iter().zip(x).map(|(b, v)| b + a * v).collect()
}

fn rk4_step(rhs: &Rhs, rho: &[f64], h: f64) -> Vec<f64> {
    let k1 = rhs.eval(rho);
    let k2 = rhs.eval(&axpy(rho, 0.5 * h, &k1));
    let k3 = rhs.eval(&axpy(rho, 0.5 * h, &k2));
    let k4 = rhs.eval(&axpy(rho, h, &k3));
    (0..rho.len())
        .map(|i| rho[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Solves from ρ(0) = g and returns ρ at each of the sorted times `t_out`.
/// Each interval between outputs is split into equal steps no longer than dt.
pub fn solve_fpme(g: &ProfileSpec, cfg: &SolverConfig, t_out: &[f64]) -> Result<Vec<DensityField>> {
    cfg.validate()?;
    g.validate(cfg.torus_length)?;
    if t_out.iter().any(|&t| t < 0.0) || t_out.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("output times must be sorted and nonnegative".into()));
    }
    if cfg.integrator == Integrator::ExactLinear {
        return t_out
            .iter()
            .map(|&t| exact_linear_solution(g, cfg.symbol, t, cfg.grid_size, cfg.torus_length))
            .collect();
    }
    let rhs = Rhs::new(cfg);
    let mut rho = g.sample_grid(cfg.grid_size, cfg.torus_length);
    let mut now = 0.0;
    let mut out = Vec::with_capacity(t_out.len());
    for &target in t_out {
        let span = target - now;
        if span > 0.0 {
            let steps = (span / cfg.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for s in 0..steps {
                rho = rk4_step(&rhs, &rho, h);
                let sup = rho.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if !(sup <= BLOWUP_LEVEL) {
                    return Err(Error::Instability {
                        time: now + (s + 1) as f64 * h,
                        sup_norm: sup,
                    });
                }
            }
            now = target;
        }
        out.push(DensityField::new(rho.clone(), cfg.torus_length, target));
    }
    Ok(out)
}

/// ρ̂(t,k) = exp(symbol(k)·t)·ĝ(k) from the DFT of g on the grid.
pub fn exact_linear_solution(g: &ProfileSpec, symbol: FracSymbol, t: f64, grid_size: usize, torus_length: f64) -> Result<DensityField> {
    g.validate(torus_length)?;
    if grid_size < 4 || t < 0.0 {
        return Err(Error::InvalidArgument(format!("need grid >= 4 and t >= 0, got {grid_size}, {t}")));
    }
    let mut hat = dft(&g.sample_grid(grid_size, torus_length));
    for (k, c) in hat.iter_mut().enumerate() {
        *c *= (symbol.at_mode(k, grid_size, torus_length) * t).exp();
    }
    Ok(DensityField::new(idft_real(&hat), torus_length, t))
}

/// F = ⟨ρ_t,G_t⟩ − ⟨g,G_0⟩ − ∫_0^t ⟨ρ_s, ∂_sG_s⟩ ds − ∫_0^t ⟨ρ_s^m, L G_s⟩ ds
/// where L is the solver's multiplier applied spectrally to G sampled on the
/// grid. `rho` must start at time 0 on a uniform time grid; the integrals use
/// the trapezoid rule over the entries with time ≤ t.
pub fn weak_residual_f(rho: &[DensityField], test: &TestFunction, g: &ProfileSpec, t: f64, m: u32, symbol: FracSymbol) -> Result<f64> {
    let first = rho
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty time series".into()))?;
    if first.time != 0.0 {
        return Err(Error::InvalidArgument("time series must start at 0".into()));
    }
    let used: Vec<&DensityField> = rho.iter().filter(|f| f.time <= t + 1e-12).collect();
    let last = used[used.len() - 1];
    if (last.time - t).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("no field at t = {t}")));
    }
    let (grid, len) = (first.grid_size, first.torus_length);
    if used.iter().any(|f| f.grid_size != grid || f.torus_length != len) {
        return Err(Error::InvalidArgument("fields must share one grid".into()));
    }
    let h = len / grid as f64;
    let multiplier = symbol.table(grid, len);
    let dg = test.time_derivative();
    let sample = |f: &TestFunction, s: f64| -> Vec<f64> { (0..grid).map(|j| f.value_torus(s, j as f64 * h, len)).collect() };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * h;

    let integrand: Vec<f64> = used
        .iter()
        .map(|f| {
            let gs = sample(test, f.time);
            let mut hat = dft(&gs);
            for (c, s) in hat.iter_mut().zip(&multiplier) {
                *c *= *s;
            }
            let lg = idft_real(&hat);
            let pow: Vec<f64> = f.values.iter().map(|r| r.powi(m as i32)).collect();
            dot(&f.values, &sample(&dg, f.time)) + dot(&pow, &lg)
        })
        .collect();
    let mut integral = 0.0;
    for i in 1..used.len() {
        integral += 0.5 * (used[i].time - used[i - 1].time) * (integrand[i] + integrand[i - 1]);
    }
    let end = dot(&last.values, &sample(test, t));
    let start = dot(&g.sample_grid(grid, len), &sample(test, 0.0));
    Ok(end - start - integral)
}

/// (min, max) of a field, with the minimum taken before clipping.
pub fn range_check(rho: &DensityField) -> (f64, f64) {
    let min = rho.values.iter().cloned().fold(rho.raw_min, f64::min);
    let max = rho.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyNorms {
    /// ∫_0^T ‖ρ_s − b‖²_{L²} ds
    pub l2_dist: f64,
    /// ∫_0^T [ρ_s^m − b^m]²_{H^{γ/2}} ds
    pub sobolev_integral: f64,
}

/// Trapezoid-in-time energy integrals over the given time series.
pub fn energy_norms(rho: &[DensityField], b: f64, gamma: f64, m: u32) -> Result<EnergyNorms> {
    if rho.is_empty() {
        return Err(Error::InvalidArgument("empty time series".into()));
    }
    let mut l2 = Vec::with_capacity(rho.len());
    let mut sob = Vec::with_capacity(rho.len());
    let bm = b.powi(m as i32);
    for f in rho {
        let h = f.spacing();
        l2.push(f.values.iter().map(|v| (v - b).powi(2)).sum::<f64>() * h);
        let diff: Vec<f64> = f.values.iter().map(|v| v.powi(m as i32) - bm).collect();
        sob.push(sobolev_seminorm(&diff, f.torus_length, gamma)?);
    }
    let trap = |v: &[f64]| -> f64 {
        (1..rho.len())
            .map(|i| 0.5 * (rho[i].time - rho[i - 1].time) * (v[i] + v[i - 1]))
            .sum()
    };
    Ok(EnergyNorms {
        l2_dist: trap(&l2),
        sobolev_integral: trap(&sob),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> ProfileSpec {
        ProfileSpec::default()
    }

    fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
    }

    #[test]
    fn constant_is_fixed_point() {
        let g = ProfileSpec::Constant { b: 0.37 };
        for m in 1..=3 {
            let cfg = SolverConfig::rk4(1.0, m, 64, 2.0).unwrap();
            let out = solve_fpme(&g, &cfg, &[0.3, 1.0]).unwrap();
            for f in &out {
                assert!(f.values.iter().all(|v| (v - 0.37).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn mass_conserved() {
        let g = bump();
        let cfg = SolverConfig::rk4(1.2, 2, 128, 2.0).unwrap();
        let m0 = exact_linear_solution(&g, cfg.symbol, 0.0, 128, 2.0).unwrap().mass();
        for f in solve_fpme(&g, &cfg, &[0.25, 0.5, 1.0]).unwrap() {
            assert!((f.mass() - m0).abs() < 1e-10);
        }
    }

    #[test]
    fn single_mode_decays_exactly() {
        // g = b + a·cos(2πu/Λ) sampled exactly; ρ(t) = b + a e^{−coeff|ξ|^γ t} cos.
        let len = 2.0;
        let xi = 2.0 * PI / len;
        let sym = FracSymbol::unit(2.0).unwrap();
        let grid = 32;
        let vals: Vec<f64> = (0..grid).map(|j| 0.5 + 0.2 * (xi * j as f64 * len / grid as f64).cos()).collect();
        let mut hat = dft(&vals);
        for (k, c) in hat.iter_mut().enumerate() {
            *c *= (sym.at_mode(k, grid, len) * 0.3).exp();
        }
        let out = idft_real(&hat);
        for (j, v) in out.iter().enumerate() {
            let want = 0.5 + 0.2 * (-xi * xi * 0.3).exp() * (xi * j as f64 * len / grid as f64).cos();
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_solution_at_zero_is_sample() {
        let g = bump();
        let f = exact_linear_solution(&g, FracSymbol::model(1.0).unwrap(), 0.0, 64, 2.0).unwrap();
        assert!(sup_diff(&f.values, &g.sample_grid(64, 2.0)) < 1e-15);
    }

    #[test]
    fn rk4_matches_exact_linear() {
        let g = bump();
        let cfg = SolverConfig::rk4(1.0, 1, 256, 2.0).unwrap();
        let num = solve_fpme(&g, &cfg, &[0.5]).unwrap();
        let ex = exact_linear_solution(&g, cfg.symbol, 0.5, 256, 2.0).unwrap();
        assert!(sup_diff(&num[0].values, &ex.values) < 1e-8);
    }

    #[test]
    fn linear_contraction_and_range() {
        let g = bump();
        let sym = FracSymbol::model(0.7).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..6 {
            let f = exact_linear_solution(&g, sym, 0.2 * i as f64, 128, 2.0).unwrap();
            let dev = f.values.iter().fold(0.0f64, |a, v| a.max((v - 0.3).abs()));
            assert!(dev <= last + 1e-14);
            last = dev;
            let (lo, hi) = range_check(&f);
            assert!(lo >= 0.3 - 1e-9 && hi <= 0.7 + 1e-9);
        }
    }

    #[test]
    fn order_preserved() {
        let low = ProfileSpec::Bump { center: 1.0, width: 0.5, height: 0.3, background: 0.2 };
        let high = ProfileSpec::Bump { center: 1.0, width: 0.5, height: 0.4, background: 0.3 };
        for m in 1..=2 {
            let cfg = SolverConfig::rk4(1.0, m, 128, 2.0).unwrap();
            let a = solve_fpme(&low, &cfg, &[0.5]).unwrap();
            let b = solve_fpme(&high, &cfg, &[0.5]).unwrap();
            assert!(a[0].values.iter().zip(&b[0].values).all(|(x, y)| x <= &(y + 1e-8)));
        }
    }

    #[test]
    fn nonlinear_stays_in_unit_interval() {
        let g = ProfileSpec::Bump { center: 1.0, width: 0.5, height: 0.9, background: 0.05 };
        let cfg = SolverConfig::rk4(1.0, 2, 128, 2.0).unwrap();
        let (lo, hi) = range_check(&solve_fpme(&g, &cfg, &[1.0]).unwrap()[0]);
        assert!(lo >= -1e-6 && hi <= 1.0 + 1e-6);
    }

    #[test]
    fn residual_vanishes_at_zero_and_for_constants() {
        let g = ProfileSpec::Constant { b: 0.4 };
        let cfg = SolverConfig::rk4(1.0, 2, 64, 2.0).unwrap();
        let times: Vec<f64> = (0..=10).map(|i| 0.05 * i as f64).collect();
        let rho = solve_fpme(&g, &cfg, &times).unwrap();
        let test = TestFunction::gaussian_bump(1.0, 0.2).with_time_poly(&[1.0, 0.5]);
        assert!(weak_residual_f(&rho, &test, &g, 0.5, 2, cfg.symbol).unwrap().abs() < 1e-13);
        let bump = bump();
        let rho = solve_fpme(&bump, &cfg, &times).unwrap();
        assert!(weak_residual_f(&rho, &test, &bump, 0.0, 2, cfg.symbol).unwrap().abs() < 1e-15);
    }

    #[test]
    fn energy_of_constant_is_zero() {
        let g = ProfileSpec::Constant { b: 0.3 };
        let cfg = SolverConfig::rk4(1.0, 2, 64, 2.0).unwrap();
        let rho = solve_fpme(&g, &cfg, &[0.0, 0.5, 1.0]).unwrap();
        let e = energy_norms(&rho, 0.3, 1.0, 2).unwrap();
        assert!(e.l2_dist.abs() < 1e-25 && e.sobolev_integral.abs() < 1e-20);
    }

    #[test]
    fn power_gap_inequality() {
        for &b in &[0.1, 0.3, 0.6] {
            for m in 1..=4 {
                for i in 0..=100 {
                    let lam = i as f64 / 100.0;
                    let lhs = (lam.powi(m) - f64::powi(b, m)).abs();
                    assert!(lhs <= (lam - b).abs() / (1.0 - b) + 1e-15);
                }
            }
        }
    }

    #[test]
    fn rejects_unstable_dt_and_linear_misuse() {
        let mut cfg = SolverConfig::rk4(1.0, 2, 64, 2.0).unwrap();
        cfg.dt *= 2.0;
        assert!(solve_fpme(&bump(), &cfg, &[0.1]).is_err());
        let mut cfg = SolverConfig::rk4(1.0, 2, 64, 2.0).unwrap();
        cfg.integrator = Integrator::ExactLinear;
        assert!(matches!(solve_fpme(&bump(), &cfg, &[0.1]), Err(Error::Unsupported(_))));
    }
}
