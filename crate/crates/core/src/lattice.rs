//! Periodic ring of sites with bit-packed exclusion occupancy.

use std::fmt;

use crate::error::{Error, Result};

/// A site on a ring of `size` sites. Constructed only through
/// [`SiteIndex::wrap`], so the stored value is always in `[0, size)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteIndex(usize);

impl SiteIndex {
    pub fn wrap(value: i64, size: usize) -> Self {
        SiteIndex(value.rem_euclid(size as i64) as usize)
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// `self + offset` reduced into the ring.
    pub fn offset(self, offset: i64, size: usize) -> Self {
        SiteIndex::wrap(self.0 as i64 + offset, size)
    }
}

/// Occupancy state η ∈ {0,1}^ring, 64 sites per word, with a cached
/// particle count.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatticeConfig {
    size: usize,
    words: Vec<u64>,
    count: usize,
}

impl LatticeConfig {
    pub fn empty(size: usize) -> Self {
        assert!(size > 0, "ring must have at least one site");
        LatticeConfig {
            size,
            words: vec![0; size.div_ceil(64)],
            count: 0,
        }
    }

    pub fn full(size: usize) -> Self {
        let mut cfg = Self::empty(size);
        for w in cfg.words.iter_mut() {
            *w = u64::MAX;
        }
        cfg.clear_padding();
        cfg.count = size;
        cfg
    }

    pub fn from_occupancies<I>(occ: I) -> Self
    where
        I: IntoIterator<Item = bool>,
    {
        let bits: Vec<bool> = occ.into_iter().collect();
        let mut cfg = Self::empty(bits.len());
        for (x, &b) in bits.iter().enumerate() {
            if b {
                cfg.words[x >> 6] |= 1 << (x & 63);
            }
        }
        cfg.count = bits.iter().filter(|&&b| b).count();
        cfg
    }

    /// Configuration whose site `x` holds bit `x` of `index` (rings of at
    /// most 64 sites). This is the state enumeration used by the exact
    /// generator.
    pub fn from_index(index: u64, size: usize) -> Self {
        assert!(size <= 64);
        let mut cfg = Self::empty(size);
        let mask = if size == 64 { u64::MAX } else { (1u64 << size) - 1 };
        cfg.words[0] = index & mask;
        cfg.count = cfg.words[0].count_ones() as usize;
        cfg
    }

    /// Inverse of [`LatticeConfig::from_index`].
    pub fn to_index(&self) -> u64 {
        assert!(self.size <= 64);
        self.words[0]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn site(&self, x: i64) -> SiteIndex {
        SiteIndex::wrap(x, self.size)
    }

    /// η(x) for an already reduced site.
    #[inline(always)]
    pub fn bit(&self, x: usize) -> u32 {
        debug_assert!(x < self.size);
        ((self.words[x >> 6] >> (x & 63)) & 1) as u32
    }

    /// η(x) with `x` taken modulo the ring size.
    #[inline]
    pub fn occupancy(&self, x: i64) -> u32 {
        self.bit(x.rem_euclid(self.size as i64) as usize)
    }

    #[inline]
    pub fn occupancy_at(&self, x: SiteIndex) -> u32 {
        self.bit(x.get())
    }

    /// ξ_{x,y}(η) = 1 iff the two occupancies differ.
    #[inline]
    pub fn discrepancy(&self, x: usize, y: usize) -> u32 {
        self.bit(x) ^ self.bit(y)
    }

    /// Swap the occupancies of `x` and `y` (η ↦ η^{x,y}).
    pub fn exchange(&mut self, x: SiteIndex, y: SiteIndex) -> Result<()> {
        if x == y {
            return Err(Error::InvalidArgument(format!(
                "exchange needs distinct sites, got x = y = {}",
                x.get()
            )));
        }
        self.exchange_unchecked(x.get(), y.get());
        Ok(())
    }

    /// Swap without the distinctness check; a no-op when the occupancies
    /// agree. `x` and `y` must already be reduced.
    #[inline]
    pub fn exchange_unchecked(&mut self, x: usize, y: usize) {
        if self.bit(x) != self.bit(y) {
            self.words[x >> 6] ^= 1 << (x & 63);
            self.words[y >> 6] ^= 1 << (y & 63);
        }
    }

    pub fn exchanged(&self, x: SiteIndex, y: SiteIndex) -> Result<Self> {
        let mut out = self.clone();
        out.exchange(x, y)?;
        Ok(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.size).map(move |x| self.bit(x))
    }

    /// Occupancies as `f64` (0.0 / 1.0), convenient for FFT work.
    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.iter().map(f64::from).collect()
    }

    /// Recomputes the particle count from the bits.
    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Snapshot string `"<size>:<hex>"`. Each 64-site word is written as 16
    /// lowercase hex digits, word 0 (sites 0..63) first, site `x` at bit
    /// `x mod 64` of its word.
    pub fn to_hex(&self) -> String {
        let mut s = format!("{}:", self.size);
        for w in &self.words {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let (size, hex) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing ':' in snapshot {s:?}")))?;
        let size: usize = size
            .parse()
            .map_err(|e| Error::Parse(format!("bad ring size {size:?}: {e}")))?;
        if size == 0 {
            return Err(Error::Parse("ring size must be positive".into()));
        }
        let n_words = size.div_ceil(64);
        if hex.len() != 16 * n_words {
            return Err(Error::Parse(format!(
                "expected {} hex digits for {size} sites, got {}",
                16 * n_words,
                hex.len()
            )));
        }
        let mut words = Vec::with_capacity(n_words);
        for i in 0..n_words {
            let chunk = &hex[16 * i..16 * (i + 1)];
            let w = u64::from_str_radix(chunk, 16)
                .map_err(|e| Error::Parse(format!("bad hex word {chunk:?}: {e}")))?;
            words.push(w);
        }
        let mut cfg = LatticeConfig {
            size,
            words,
            count: 0,
        };
        let padded = cfg.words.clone();
        cfg.clear_padding();
        if cfg.words != padded {
            return Err(Error::Parse("bits set beyond ring size".into()));
        }
        cfg.count = cfg.popcount();
        Ok(cfg)
    }

    fn clear_padding(&mut self) {
        let rem = self.size % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for LatticeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.size <= 128 {
            let s: String = self.iter().map(|b| if b == 1 { '1' } else { '0' }).collect();
            write!(f, "LatticeConfig({s})")
        } else {
            write!(f, "LatticeConfig(size={}, count={})", self.size, self.count)
        }
    }
}
