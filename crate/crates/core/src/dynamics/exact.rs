//! Exact generator on small rings, stored as sparse rows over all 2^N states.

use crate::error::{Error, Result};
use crate::kernel::JumpKernel;
use crate::lattice::LatticeConfig;
use crate::rates::RateModel;

/// Largest ring for which the full state space is enumerated.
pub const GENERATOR_SITE_CAP: usize = 14;

/// Q(η, η') with η indexed by [`LatticeConfig::to_index`].
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    size: usize,
    /// Off-diagonal entries of each row, sorted by column.
    rows: Vec<Vec<(u32, f64)>>,
    diag: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn ring_size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        match self.rows[i].binary_search_by_key(&(j as u32), |&(c, _)| c) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => 0.0,
        }
    }

    /// (Qf)(η) = Σ_η' Q(η,η') f(η').
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.dim());
        (0..self.dim())
            .map(|i| self.diag[i] * f[i] + self.rows[i].iter().map(|&(j, q)| q * f[j as usize]).sum::<f64>())
            .collect()
    }

    /// (μQ)(η') = Σ_η μ(η) Q(η,η').
    pub fn apply_transpose(&self, mu: &[f64]) -> Vec<f64> {
        assert_eq!(mu.len(), self.dim());
        let mut out: Vec<f64> = mu.iter().zip(&self.diag).map(|(a, d)| a * d).collect();
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, q) in row {
                out[j as usize] += mu[i] * q;
            }
        }
        out
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| {
                let mut r = vec![0.0; self.dim()];
                r[i] = self.diag[i];
                for &(j, q) in &self.rows[i] {
                    r[j as usize] = q;
                }
                r
            })
            .collect()
    }
}

/// Generator of the unaccelerated process: each unordered bond {x, y} with
/// η(x) ≠ η(y) exchanges at rate p(y−x)·c^(m)_{x,y}/2.
pub fn exact_generator(kernel: &JumpKernel, rates: RateModel) -> Result<GeneratorMatrix> {
    let size = kernel.ring_size();
    if size > GENERATOR_SITE_CAP {
        return Err(Error::TooLarge {
            size,
            cap: GENERATOR_SITE_CAP,
        });
    }
    let dim = 1usize << size;
    let mut rows = Vec::with_capacity(dim);
    let mut diag = Vec::with_capacity(dim);
    for idx in 0..dim {
        let cfg = LatticeConfig::from_index(idx as u64, size);
        let mut row: Vec<(u32, f64)> = Vec::new();
        for x in 0..size {
            for y in 0..size {
                if x == y || cfg.discrepancy(x, y) == 0 {
                    continue;
                }
                let c = rates.c_m_unchecked(&cfg, x as i64, y as i64);
                if c == 0 {
                    continue;
                }
                let q = 0.25 * kernel.folded(y as i64 - x as i64) * c as f64;
                let target = (idx ^ (1 << x) ^ (1 << y)) as u32;
                row.push((target, q));
            }
        }
        row.sort_by_key(|&(j, _)| j);
        row.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        diag.push(-row.iter().map(|&(_, q)| q).sum::<f64>());
        rows.push(row);
    }
    Ok(GeneratorMatrix { size, rows, diag })
}

/// Product Bernoulli(b) weights ν_b(η) over all 2^size states.
pub fn bernoulli_weights(size: usize, b: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::Domain {
            name: "b",
            value: b,
            expected: "[0, 1]",
        });
    }
    if size > GENERATOR_SITE_CAP {
        return Err(Error::TooLarge {
            size,
            cap: GENERATOR_SITE_CAP,
        });
    }
    Ok((0..1u64 << size)
        .map(|idx| {
            let k = idx.count_ones() as i32;
            b.powi(k) * (1.0 - b).powi(size as i32 - k)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityReport {
    /// max_η' |(νQ)(η')|
    pub residual: f64,
    /// max |ν(η)Q(η,η') − ν(η')Q(η',η)|
    pub detailed_balance: f64,
}

pub fn stationarity_check(gen: &GeneratorMatrix, b: f64) -> Result<StationarityReport> {
    let nu = bernoulli_weights(gen.ring_size(), b)?;
    let residual = gen
        .apply_transpose(&nu)
        .into_iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut detailed_balance = 0.0f64;
    for i in 0..gen.dim() {
        for &(j, q) in gen.row(i) {
            let back = gen.entry(j as usize, i);
            detailed_balance = detailed_balance.max((nu[i] * q - nu[j as usize] * back).abs());
        }
    }
    Ok(StationarityReport {
        residual,
        detailed_balance,
    })
}

/// D(f) = ¼ Σ_{x≠y} p(y−x) Σ_η ν_b(η) c^(m)_{x,y}(η) [√f(η^{x,y}) − √f(η)]²,
/// computed by direct enumeration without the matrix.
pub fn dirichlet_form(kernel: &JumpKernel, rates: RateModel, f: &[f64], b: f64) -> Result<f64> {
    let size = kernel.ring_size();
    let nu = bernoulli_weights(size, b)?;
    if f.len() != nu.len() {
        return Err(Error::InvalidArgument(format!(
            "density has {} entries, state space has {}",
            f.len(),
            nu.len()
        )));
    }
    if f.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("density must be nonnegative".into()));
    }
    let mass: f64 = f.iter().zip(&nu).map(|(a, w)| a * w).sum();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("density integrates to {mass}, not 1")));
    }
    let mut total = 0.0;
    for (idx, &w) in nu.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let cfg = LatticeConfig::from_index(idx as u64, size);
        let root = f[idx].sqrt();
        for x in 0..size {
            for y in 0..size {
                if x == y || cfg.discrepancy(x, y) == 0 {
                    continue;
                }
                let c = rates.c_m_unchecked(&cfg, x as i64, y as i64) as f64;
                let other = f[idx ^ (1 << x) ^ (1 << y)].sqrt();
                total += kernel.folded(y as i64 - x as i64) * w * c * (other - root).powi(2);
            }
        }
    }
    Ok(0.25 * total)
}

/// ⟨Q√f, √f⟩_ν through the matrix.
pub fn dirichlet_pairing(gen: &GeneratorMatrix, f: &[f64], b: f64) -> Result<f64> {
    let nu = bernoulli_weights(gen.ring_size(), b)?;
    if f.len() != nu.len() {
        return Err(Error::InvalidArgument("density length does not match state space".into()));
    }
    let root: Vec<f64> = f.iter().map(|v| v.max(0.0).sqrt()).collect();
    let lr = gen.apply(&root);
    Ok(nu.iter().zip(&lr).zip(&root).map(|((w, a), r)| w * a * r).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(gamma: f64, size: usize, m: u32) -> (JumpKernel, RateModel, GeneratorMatrix) {
        let k = JumpKernel::new(gamma, size).unwrap();
        let r = RateModel::new(m).unwrap();
        let g = exact_generator(&k, r).unwrap();
        (k, r, g)
    }

    #[test]
    fn rows_sum_to_zero_and_conserve_particles() {
        let (_, _, g) = gen(1.0, 7, 2);
        for i in 0..g.dim() {
            let s: f64 = g.row(i).iter().map(|e| e.1).sum::<f64>() + g.entry(i, i);
            assert!(s.abs() < 1e-14);
            for &(j, _) in g.row(i) {
                assert_eq!((j as usize).count_ones(), i.count_ones());
            }
        }
    }

    #[test]
    fn symmetric_exclusion_entry_matches_kernel() {
        // m = 1: rate of {x, y} is p(y − x).
        let (k, _, g) = gen(0.5, 6, 1);
        let cfg = LatticeConfig::from_occupancies([true, false, false, false, false, false]);
        let i = cfg.to_index() as usize;
        for y in 1..6 {
            let mut t = cfg.clone();
            t.exchange_unchecked(0, y);
            assert!((g.entry(i, t.to_index() as usize) - k.folded(y as i64)).abs() < 1e-15);
        }
    }

    #[test]
    fn bernoulli_is_stationary_and_reversible() {
        for &m in &[1, 2, 3] {
            for &gamma in &[0.5, 1.0, 1.5] {
                let (_, _, g) = gen(gamma, 8, m);
                for &b in &[0.2, 0.5, 0.7] {
                    let rep = stationarity_check(&g, b).unwrap();
                    assert!(rep.residual < 1e-14, "m={m} γ={gamma} b={b} {rep:?}");
                    assert!(rep.detailed_balance < 1e-14);
                }
            }
        }
    }

    #[test]
    fn weights_normalized() {
        let w = bernoulli_weights(10, 0.3).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert!(bernoulli_weights(4, 1.2).is_err());
    }

    #[test]
    fn transpose_agrees_with_dense() {
        let (_, _, g) = gen(1.5, 5, 2);
        let mu: Vec<f64> = (0..g.dim()).map(|i| (i as f64 * 0.3).cos()).collect();
        let dense = g.to_dense();
        let t = g.apply_transpose(&mu);
        for j in 0..g.dim() {
            let d: f64 = (0..g.dim()).map(|i| mu[i] * dense[i][j]).sum();
            assert!((d - t[j]).abs() < 1e-13);
        }
    }

    #[test]
    fn dirichlet_identity() {
        let (k, r, g) = gen(1.0, 8, 2);
        let raw: Vec<f64> = (0..g.dim()).map(|i| 1.0 + 0.5 * ((i * 37 % 101) as f64 / 101.0)).collect();
        let nu = bernoulli_weights(8, 0.4).unwrap();
        let z: f64 = raw.iter().zip(&nu).map(|(a, w)| a * w).sum();
        let f: Vec<f64> = raw.iter().map(|v| v / z).collect();
        let d = dirichlet_form(&k, r, &f, 0.4).unwrap();
        let pair = dirichlet_pairing(&g, &f, 0.4).unwrap();
        assert!(d > 0.0);
        assert!((pair + 0.5 * d).abs() < 1e-13 * d.max(1.0));
    }

    #[test]
    fn dirichlet_of_constant_density_vanishes() {
        let (k, r, _) = gen(1.0, 6, 3);
        let f = vec![1.0; 64];
        assert_eq!(dirichlet_form(&k, r, &f, 0.3).unwrap(), 0.0);
        assert!(dirichlet_form(&k, r, &vec![2.0; 64], 0.3).is_err());
    }

    #[test]
    fn spectrum_in_left_half_plane() {
        let (_, _, g) = gen(1.0, 5, 2);
        let dense = g.to_dense();
        let mat = nalgebra::DMatrix::from_fn(g.dim(), g.dim(), |i, j| dense[i][j]);
        for ev in mat.complex_eigenvalues().iter() {
            assert!(ev.re < 1e-10, "{ev}");
        }
    }

    #[test]
    fn cap_enforced() {
        let k = JumpKernel::new(1.0, 15).unwrap();
        assert!(matches!(
            exact_generator(&k, RateModel::new(1).unwrap()),
            Err(Error::TooLarge { .. })
        ));
    }
}
