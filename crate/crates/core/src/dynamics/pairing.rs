//! n^γ L⟨π^n, G⟩ and the carré du champ of the empirical pairing.
//!
//! With A_j(x) = ∏_{i=1}^{j} η(x−i) and R_k(y) = ∏_{i=1}^{k} η(y+i),
//! c_dif(x,y) = Σ_{k=0}^{m−1} A_{m−1−k}(x)·R_k(y), so the double sum over
//! bonds factors into 4m circular convolutions with p.

use crate::kernel::JumpKernel;
use crate::lattice::LatticeConfig;
use crate::rates::RateModel;
use crate::spectral::RingConvolver;

pub struct PairingContext {
    kernel: JumpKernel,
    rates: RateModel,
    n: usize,
    /// n^γ
    time_scale: f64,
    convolver: RingConvolver,
}

impl PairingContext {
    pub fn new(kernel: &JumpKernel, rates: RateModel, n: usize) -> Self {
        PairingContext {
            kernel: kernel.clone(),
            rates,
            n,
            time_scale: (n as f64).powf(kernel.gamma()),
            convolver: RingConvolver::new(kernel.folded_pmf()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.kernel.ring_size()
    }

    pub fn kernel(&self) -> &JumpKernel {
        &self.kernel
    }

    pub fn rates(&self) -> RateModel {
        self.rates
    }
}

/// Products of `j` consecutive occupancies, to the left (`step = −1`) or
/// right (`step = +1`) of each site, for j = 0..=depth.
fn run_products(eta: &[f64], depth: usize, step: i64) -> Vec<Vec<f64>> {
    let size = eta.len() as i64;
    let mut out = vec![vec![1.0; eta.len()]];
    for j in 1..=depth as i64 {
        let prev = &out[j as usize - 1];
        let next: Vec<f64> = (0..size)
            .map(|x| prev[x as usize] * eta[(x + step * j).rem_euclid(size) as usize])
            .collect();
        out.push(next);
    }
    out
}

/// n^γ·L⟨π^n, G⟩(η) = n^γ/(2n)·Σ_{x,y} G(x)p(y−x)c^(m)_{x,y}(η)[η(y) − η(x)],
/// with G given by its values at the ring sites.
pub fn generator_pairing(cfg: &LatticeConfig, g_values: &[f64], ctx: &PairingContext) -> f64 {
    let size = ctx.size();
    assert_eq!(cfg.size(), size);
    assert_eq!(g_values.len(), size);
    let eta = cfg.to_f64_vec();
    let m = ctx.rates.m() as usize;
    let conv = |v: &[f64]| ctx.convolver.apply(v);
    let mut total = 0.0;
    if m == 1 {
        let p_eta = conv(&eta);
        total = 2.0 * (0..size).map(|x| g_values[x] * (p_eta[x] - eta[x])).sum::<f64>();
    } else {
        let left = run_products(&eta, m - 1, -1);
        let right = run_products(&eta, m - 1, 1);
        for k in 0..m {
            let j = m - 1 - k;
            let (a, r) = (&left[j], &right[k]);
            let r_eta: Vec<f64> = r.iter().zip(&eta).map(|(u, v)| u * v).collect();
            let a_eta: Vec<f64> = a.iter().zip(&eta).map(|(u, v)| u * v).collect();
            let (p_r_eta, p_r) = (conv(&r_eta), conv(r));
            let (p_a_eta, p_a) = (conv(&a_eta), conv(a));
            for x in 0..size {
                total += g_values[x] * a[x] * (p_r_eta[x] - eta[x] * p_r[x]);
                total += g_values[x] * r[x] * (p_a_eta[x] - eta[x] * p_a[x]);
            }
        }
        if m >= 3 {
            // nearest-neighbour bonds use the product form instead of the windows
            let p1 = ctx.kernel.folded(1);
            for x in 0..size as i64 {
                for y in [x - 1, x + 1] {
                    let d = cfg.occupancy(y) as f64 - eta[x as usize];
                    if d == 0.0 {
                        continue;
                    }
                    let fixed = ctx.rates.c_m_unchecked(cfg, x, y) as f64;
                    let literal = (ctx.rates.c_dif(cfg, x, y) + ctx.rates.c_dif(cfg, y, x)) as f64;
                    total += g_values[x as usize] * p1 * (fixed - literal) * d;
                }
            }
        }
    }
    ctx.time_scale / (2.0 * ctx.n as f64) * total
}

/// O(N²) evaluation of [`generator_pairing`] straight from the rates.
pub fn generator_pairing_direct(cfg: &LatticeConfig, g_values: &[f64], ctx: &PairingContext) -> f64 {
    let size = ctx.size();
    let mut total = 0.0;
    for x in 0..size {
        for y in 0..size {
            if x == y || cfg.discrepancy(x, y) == 0 {
                continue;
            }
            let c = ctx.rates.c_m_unchecked(cfg, x as i64, y as i64) as f64;
            let d = cfg.bit(y) as f64 - cfg.bit(x) as f64;
            total += g_values[x] * ctx.kernel.folded(y as i64 - x as i64) * c * d;
        }
    }
    ctx.time_scale / (2.0 * ctx.n as f64) * total
}

/// Γ(η) = n^γ/(4n²)·Σ_{x≠y} [G(y) − G(x)]²·p(y−x)·c^(m)_{x,y}(η)·ξ_{x,y}(η),
/// the predictable quadratic variation rate of ⟨π^n, G⟩.
pub fn carre_du_champ(cfg: &LatticeConfig, g_values: &[f64], ctx: &PairingContext) -> f64 {
    let size = ctx.size();
    assert_eq!(g_values.len(), size);
    let mut total = 0.0;
    for x in 0..size {
        for y in 0..size {
            if x == y || cfg.discrepancy(x, y) == 0 {
                continue;
            }
            let c = ctx.rates.c_m_unchecked(cfg, x as i64, y as i64) as f64;
            total += (g_values[y] - g_values[x]).powi(2) * ctx.kernel.folded(y as i64 - x as i64) * c;
        }
    }
    let n = ctx.n as f64;
    ctx.time_scale / (4.0 * n * n) * total
}
