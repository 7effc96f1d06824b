//! Initial profiles, product measures with slowly varying marginals, and the
//! relative entropy with respect to a homogeneous Bernoulli measure.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeConfig;
use crate::observables::pair_with_test_function;
use crate::testfn::TestFunction;

const ENTROPY_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSpec {
    Constant { b: f64 },
    /// background + height·exp(1 − 1/(1 − r²)) for r = |u − center|/width < 1,
    /// background elsewhere; smooth, peak value background + height.
    Bump {
        center: f64,
        width: f64,
        height: f64,
        background: f64,
    },
    /// `left` on [start, mid), `right` on [mid, end), background elsewhere.
    Step {
        left: f64,
        right: f64,
        background: f64,
        start: f64,
        mid: f64,
        end: f64,
    },
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec::Bump {
            center: 1.0,
            width: 0.5,
            height: 0.4,
            background: 0.3,
        }
    }
}

fn in_unit(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value: v,
            expected: "a value in [0, 1]",
        })
    }
}

impl ProfileSpec {
    /// Checks value ranges and that the non-constant part sits strictly
    /// inside (0, torus_length).
    pub fn validate(&self, torus_length: f64) -> Result<()> {
        match *self {
            ProfileSpec::Constant { b } => in_unit("b", b),
            ProfileSpec::Bump { center, width, height, background } => {
                in_unit("background", background)?;
                in_unit("background + height", background + height)?;
                if width <= 0.0 || center - width <= 0.0 || center + width >= torus_length {
                    return Err(Error::InvalidArgument(format!(
                        "bump support [{}, {}] must lie inside (0, {torus_length})",
                        center - width,
                        center + width
                    )));
                }
                Ok(())
            }
            ProfileSpec::Step { left, right, background, start, mid, end } => {
                in_unit("left", left)?;
                in_unit("right", right)?;
                in_unit("background", background)?;
                if !(0.0 < start && start <= mid && mid <= end && end < torus_length) {
                    return Err(Error::InvalidArgument(format!(
                        "step breakpoints {start} <= {mid} <= {end} must lie inside (0, {torus_length})"
                    )));
                }
                Ok(())
            }
        }
    }

    /// g(u) for u in [0, Λ) (callers reduce periodically).
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            ProfileSpec::Constant { b } => b,
            ProfileSpec::Bump { center, width, height, background } => {
                let r = (u - center) / width;
                if r.abs() < 1.0 {
                    background + height * (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    background
                }
            }
            ProfileSpec::Step { left, right, background, start, mid, end } => {
                if u >= start && u < mid {
                    left
                } else if u >= mid && u < end {
                    right
                } else {
                    background
                }
            }
        }
    }

    pub fn value_torus(&self, u: f64, torus_length: f64) -> f64 {
        self.value(u.rem_euclid(torus_length))
    }

    /// Value far from the perturbation.
    pub fn background(&self) -> f64 {
        match *self {
            ProfileSpec::Constant { b } => b,
            ProfileSpec::Bump { background, .. } | ProfileSpec::Step { background, .. } => background,
        }
    }

    /// g sampled at u_j = jΛ/grid, j = 0..grid.
    pub fn sample_grid(&self, grid: usize, torus_length: f64) -> Vec<f64> {
        (0..grid)
            .map(|j| self.value(j as f64 * torus_length / grid as f64))
            .collect()
    }

    /// ∫_0^Λ G_t(u) g(u) du by a fine midpoint rule.
    pub fn integrate_against(&self, g: &TestFunction, t: f64, torus_length: f64) -> f64 {
        let cells = 1 << 16;
        let h = torus_length / cells as f64;
        (0..cells)
            .map(|j| {
                let u = (j as f64 + 0.5) * h;
                g.value_torus(t, u, torus_length) * self.value(u)
            })
            .sum::<f64>()
            * h
    }
}

/// Product measure with marginal Bernoulli(g(x/n)) at site x on a ring of
/// n·Λ sites.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    pub profile: ProfileSpec,
    pub n: usize,
    pub torus_length: f64,
}

impl MeasureSpec {
    pub fn new(profile: ProfileSpec, n: usize, torus_length: f64) -> Result<Self> {
        profile.validate(torus_length)?;
        if n < 1 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        let size = n as f64 * torus_length;
        if (size - size.round()).abs() > 1e-9 || size < 3.0 {
            return Err(Error::InvalidArgument(format!(
                "n * torus_length = {size} must be an integer of at least 3"
            )));
        }
        Ok(MeasureSpec { profile, n, torus_length })
    }

    pub fn ring_size(&self) -> usize {
        (self.n as f64 * self.torus_length).round() as usize
    }

    pub fn marginal(&self, x: usize) -> f64 {
        self.profile.value(x as f64 / self.n as f64)
    }

    pub fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R) -> LatticeConfig {
        let size = self.ring_size();
        LatticeConfig::from_occupancies((0..size).map(|x| {
            let p = self.marginal(x);
            // one draw per site keeps streams aligned across profiles
            let u: f64 = rng.random();
            u < p
        }))
    }

    /// H(μ_n | ν_b) = Σ_x [g_x log(g_x/b) + (1 − g_x) log((1 − g_x)/(1 − b))].
    pub fn relative_entropy(&self, b: f64) -> Result<f64> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::Domain {
                name: "b",
                value: b,
                expected: "0 < b < 1",
            });
        }
        Ok((0..self.ring_size())
            .map(|x| {
                let g = self.marginal(x).clamp(ENTROPY_CLAMP, 1.0 - ENTROPY_CLAMP);
                g * (g / b).ln() + (1.0 - g) * ((1.0 - g) / (1.0 - b)).ln()
            })
            .sum())
    }
}

/// Fraction of samples with |⟨π^n, G_0⟩ − ∫ G_0 g du| > delta.
pub fn association_check(
    samples: &[LatticeConfig],
    profile: &ProfileSpec,
    g: &TestFunction,
    n: usize,
    delta: f64,
) -> Result<f64> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?;
    let len = first.size() as f64 / n as f64;
    let target = profile.integrate_against(g, 0.0, len);
    let exceed = samples
        .iter()
        .filter(|cfg| (pair_with_test_function(cfg, g, 0.0, n) - target).abs() > delta)
        .count();
    Ok(exceed as f64 / samples.len() as f64)
}
