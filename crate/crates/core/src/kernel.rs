//! Long-jump law p(z) = c_γ |z|^{-1-γ}, its folding onto a ring and an
//! O(1) alias sampler.

use rand::RngCore;

use crate::error::{check_gamma, Error, Result};
use crate::special::{hurwitz_zeta, jump_normalizer};

/// c_γ = (2 ζ(1+γ))^{-1}, the constant making Σ_{z≠0} c_γ |z|^{-1-γ} = 1.
pub fn normalizer(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(jump_normalizer(gamma))
}

/// Vose alias table over outcomes `0..len`.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let k = weights.len();
        if k == 0 || k > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!(
                "alias table needs 1..=2^32 weights, got {k}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "alias weights must be finite, non-negative and not all zero".into(),
            ));
        }
        let scale = k as f64 / total;
        let mut prob: Vec<f64> = weights.iter().map(|w| w * scale).collect();
        let mut alias: Vec<u32> = (0..k as u32).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) =
            (0..k).partition(|&i| prob[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            alias[s] = l as u32;
            prob[l] -= 1.0 - prob[s];
            if prob[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }
        Ok(AliasTable { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        let r = rng.next_u64();
        let col = ((r as u128 * self.prob.len() as u128) >> 64) as usize;
        // 53 random bits for the coin, independent of the column bits above
        let coin = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        if coin < self.prob[col] {
            col
        } else {
            self.alias[col] as usize
        }
    }

    /// Probability mass each outcome receives from the table.
    pub fn reconstruct(&self) -> Vec<f64> {
        let k = self.prob.len() as f64;
        let mut out: Vec<f64> = self.prob.iter().map(|p| p / k).collect();
        for (i, &a) in self.alias.iter().enumerate() {
            out[a as usize] += (1.0 - self.prob[i]) / k;
        }
        out
    }
}

/// Jump law on a ring of `ring_size` sites, folded from the infinite-lattice
/// law by image sums.
#[derive(Debug, Clone)]
pub struct JumpKernel {
    gamma: f64,
    c_gamma: f64,
    ring_size: usize,
    /// Indexed by displacement `z` in `0..ring_size`; entry 0 is 0.
    folded: Vec<f64>,
    sampler: AliasTable,
}

impl JumpKernel {
    pub fn new(gamma: f64, ring_size: usize) -> Result<Self> {
        let c_gamma = normalizer(gamma)?;
        if ring_size < 3 {
            return Err(Error::InvalidArgument(format!(
                "ring needs at least 3 sites, got {ring_size}"
            )));
        }
        let folded = fold_to_ring(gamma, ring_size);
        let sampler = AliasTable::new(&folded[1..])?;
        Ok(JumpKernel {
            gamma,
            c_gamma,
            ring_size,
            folded,
            sampler,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c_gamma(&self) -> f64 {
        self.c_gamma
    }

    pub fn ring_size(&self) -> usize {
        self.ring_size
    }

    /// p(z) on ℤ.
    pub fn pmf_infinite(&self, z: i64) -> f64 {
        if z == 0 {
            0.0
        } else {
            self.c_gamma * (z.unsigned_abs() as f64).powf(-1.0 - self.gamma)
        }
    }

    /// Folded law indexed by displacement `0..ring_size`.
    pub fn folded_pmf(&self) -> &[f64] {
        &self.folded
    }

    /// Folded probability of displacement `z` (any integer, taken mod ring).
    #[inline]
    pub fn folded(&self, z: i64) -> f64 {
        self.folded[z.rem_euclid(self.ring_size as i64) as usize]
    }

    pub fn sampler(&self) -> &AliasTable {
        &self.sampler
    }

    /// Draws a displacement in `1..ring_size`.
    #[inline]
    pub fn sample_jump<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng) + 1
    }
}

/// folded[z] ∝ Σ_{j∈ℤ} |z + jN|^{-1-γ} = N^{-1-γ} [ζ(1+γ, z/N) + ζ(1+γ, 1 − z/N)],
/// renormalised to a probability on displacements 1..N−1. Displacements that
/// are multiples of N would be self-jumps and carry no mass.
fn fold_to_ring(gamma: f64, ring_size: usize) -> Vec<f64> {
    let s = 1.0 + gamma;
    let n = ring_size as f64;
    let mut folded = vec![0.0; ring_size];
    for z in 1..ring_size {
        if z > ring_size / 2 {
            folded[z] = folded[ring_size - z];
            continue;
        }
        let a = z as f64 / n;
        folded[z] = n.powf(-s) * (hurwitz_zeta(s, a) + hurwitz_zeta(s, 1.0 - a));
    }
    let total: f64 = folded.iter().sum();
    for p in folded.iter_mut() {
        *p /= total;
    }
    folded
}
