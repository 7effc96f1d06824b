//! Exchange-rate factors c^(m)_{x,y}(η) and the auxiliary products B_m, C_m.
//!
//! Sites are plain integers on ℤ; every occupancy read reduces them modulo
//! the ring size of the configuration, so a ring configuration is treated as
//! its periodic extension.

use crate::error::{Error, Result};
use crate::lattice::{LatticeConfig, SiteIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateModel {
    m: u32,
}

impl RateModel {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        if m > 16 {
            return Err(Error::Unsupported(format!("m = {m} (at most 16 supported)")));
        }
        Ok(RateModel { m })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Upper bound on c^(m) used as the thinning envelope.
    pub fn rate_bound(&self) -> u32 {
        2 * self.m + 1
    }

    /// Offsets a_{1,x,y}, …, a_{4m−4,x,y} on ℤ.
    ///
    /// The first 2m−2 entries are x−(m−1), …, x−1, y+1, …, y+m−1 and the last
    /// 2m−2 are the same list with x and y swapped.
    pub fn window_offsets(&self, x: i64, y: i64) -> Result<Vec<i64>> {
        if self.m < 2 {
            return Err(Error::Unsupported("window sites need m >= 2".into()));
        }
        let m = self.m as i64;
        Ok((1..=4 * (m - 1))
            .map(|j| {
                if j <= m - 1 {
                    x - (m - j)
                } else if j <= 2 * (m - 1) {
                    y + j - (m - 1)
                } else if j <= 3 * (m - 1) {
                    y - (3 * m - 2 - j)
                } else {
                    x + j - 3 * (m - 1)
                }
            })
            .collect())
    }

    /// [`RateModel::window_offsets`] reduced into a ring of `size` sites.
    pub fn window_sites(&self, x: SiteIndex, y: SiteIndex, size: usize) -> Result<Vec<SiteIndex>> {
        Ok(self
            .window_offsets(x.get() as i64, y.get() as i64)?
            .into_iter()
            .map(|a| SiteIndex::wrap(a, size))
            .collect())
    }

    /// c^(m,dif)_{x,y}(η): the number of fully occupied length-(m−1) windows
    /// in the list x−(m−1), …, x−1, y+1, …, y+m−1 (there are m windows).
    pub fn c_dif(&self, cfg: &LatticeConfig, x: i64, y: i64) -> u32 {
        let m = self.m as i64;
        if m < 2 {
            return 0;
        }
        let mut bits = [0u32; 32];
        let len = (2 * m - 2) as usize;
        for i in 0..(m - 1) {
            bits[i as usize] = cfg.occupancy(x - (m - 1) + i);
            bits[(m - 1 + i) as usize] = cfg.occupancy(y + 1 + i);
        }
        count_full_windows(&bits[..len], (m - 1) as usize)
    }

    /// Nearest-neighbour product form Σ_{k=1}^m ∏_{j=k−m, j∉{0,1}}^{k} η(x+j).
    pub fn c_dif_bond(&self, cfg: &LatticeConfig, x: i64) -> u32 {
        let m = self.m as i64;
        let mut total = 0;
        for k in 1..=m {
            let mut prod = 1;
            for j in (k - m)..=k {
                if j == 0 || j == 1 {
                    continue;
                }
                prod &= cfg.occupancy(x + j);
                if prod == 0 {
                    break;
                }
            }
            total += prod;
        }
        total
    }

    /// c^(m)_{x,y}(η).
    ///
    /// For m ≥ 3 and a nearest-neighbour bond {x, x+1} both orientations use
    /// the product form, c = 2·c_dif_bond(x) + 1, so the rate never reads
    /// η(x) or η(x+1) and is unchanged by the exchange itself.
    pub fn c_m(&self, cfg: &LatticeConfig, x: i64, y: i64) -> Result<u32> {
        let n = cfg.size() as i64;
        if (x - y).rem_euclid(n) == 0 {
            return Err(Error::InvalidArgument(format!(
                "rate needs distinct sites, got x = {x}, y = {y} on a ring of {n}"
            )));
        }
        Ok(self.c_m_unchecked(cfg, x, y))
    }

    #[inline]
    pub fn c_m_unchecked(&self, cfg: &LatticeConfig, x: i64, y: i64) -> u32 {
        if self.m == 1 {
            return 2;
        }
        if self.m >= 3 {
            if let Some(left) = bond_left(x, y, cfg.size()) {
                return 2 * self.c_dif_bond(cfg, left) + 1;
            }
        }
        self.c_dif(cfg, x, y) + self.c_dif(cfg, y, x)
    }

    /// Symmetric sum c_dif(x,y) + c_dif(y,x) in the double-product window
    /// form: Σ_{j=1}^{m} (∏_{i=0}^{m−2} η(a_{i+j}) + ∏_{i=0}^{m−2} η(a_{i+j+2(m−1)})).
    pub fn c_sym_windows(&self, cfg: &LatticeConfig, x: i64, y: i64) -> Result<u32> {
        let a = self.window_offsets(x, y)?;
        let m = self.m as usize;
        let prod = |start: usize| -> u32 {
            (0..m - 1).map(|i| cfg.occupancy(a[start + i - 1])).product()
        };
        Ok((1..=m).map(|j| prod(j) + prod(j + 2 * (m - 1))).sum())
    }

    /// B_m(η, z) = ∏_{i=0}^{m−1} η(z−i) + ∏_{i=0}^{m−1} η(z+i).
    pub fn b_m(&self, cfg: &LatticeConfig, z: i64) -> u32 {
        let m = self.m as i64;
        let left: u32 = (0..m).map(|i| cfg.occupancy(z - i)).product();
        let right: u32 = (0..m).map(|i| cfg.occupancy(z + i)).product();
        left + right
    }

    /// C_m(η, z, w) = Σ_{k=1}^{m−1} ∏_{j=0}^{k−1} η(z+j) · ∏_{i=1}^{m−k} η(w−i).
    pub fn c_aux(&self, cfg: &LatticeConfig, z: i64, w: i64) -> u32 {
        let m = self.m as i64;
        let mut total = 0;
        for k in 1..m {
            let right: u32 = (0..k).map(|j| cfg.occupancy(z + j)).product();
            if right == 0 {
                // every later k includes the same zero factor
                break;
            }
            let left: u32 = (1..=m - k).map(|i| cfg.occupancy(w - i)).product();
            total += left;
        }
        total
    }

    /// Checks, in integer arithmetic,
    /// [c_dif(x,y) + c_dif(y,x)]·[η(y) − η(x)]
    ///   = B_m(y) − B_m(x) + [C_m(y,x) − C_m(y+1,x+1)] − [C_m(x,y) − C_m(x+1,y+1)].
    pub fn check_decomposition(&self, cfg: &LatticeConfig, x: i64, y: i64) -> Result<bool> {
        if self.m < 2 {
            return Err(Error::Unsupported("decomposition needs m >= 2".into()));
        }
        if (x - y).abs() <= 1 {
            return Err(Error::InvalidArgument(format!(
                "decomposition needs |x - y| > 1, got x = {x}, y = {y}"
            )));
        }
        let (lhs, rhs) = self.decomposition_sides(cfg, x, y);
        Ok(lhs == rhs)
    }

    /// Both sides of the identity in [`RateModel::check_decomposition`].
    pub fn decomposition_sides(&self, cfg: &LatticeConfig, x: i64, y: i64) -> (i64, i64) {
        let sym = (self.c_dif(cfg, x, y) + self.c_dif(cfg, y, x)) as i64;
        let lhs = sym * (cfg.occupancy(y) as i64 - cfg.occupancy(x) as i64);
        let b = |z| self.b_m(cfg, z) as i64;
        let c = |z, w| self.c_aux(cfg, z, w) as i64;
        let rhs = b(y) - b(x) + (c(y, x) - c(y + 1, x + 1)) - (c(x, y) - c(x + 1, y + 1));
        (lhs, rhs)
    }
}

/// Left endpoint of a nearest-neighbour bond on the ring, if {x, y} is one.
#[inline]
pub(crate) fn bond_left(x: i64, y: i64, size: usize) -> Option<i64> {
    let n = size as i64;
    let d = (y - x).rem_euclid(n);
    if d == 1 {
        Some(x)
    } else if d == n - 1 {
        Some(y)
    } else {
        None
    }
}

fn count_full_windows(bits: &[u32], width: usize) -> u32 {
    let mut run = 0usize;
    let mut count = 0;
    for &b in bits {
        if b == 1 {
            run += 1;
            if run >= width {
                count += 1;
            }
        } else {
            run = 0;
        }
    }
    count
}
