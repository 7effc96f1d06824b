//! Test functions G(t,u) = Σ_i P_i(t)·S_i(u): polynomial in time, smooth and
//! (numerically) compactly supported in space.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::special::symbol_coefficient;

/// Beyond |u − center| > HERMITE_REACH · width a Hermite–Gaussian is below
/// e^{-800} and treated as zero.
const HERMITE_REACH: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialShape {
    /// Σ_j coeffs[j]·ψ_j((u − center)/width) with ψ_j(s) = H_j(s)·e^{−s²/2}
    /// and H_j the physicists' Hermite polynomial.
    HermiteGaussian {
        center: f64,
        width: f64,
        coeffs: Vec<f64>,
    },
    /// amplitude·cos(omega·u + phase)
    Cosine {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    Constant { value: f64 },
}

/// ψ_0(s), …, ψ_{len−1}(s).
fn hermite_functions(s: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len.max(2));
    let g = (-0.5 * s * s).exp();
    out.push(g);
    out.push(2.0 * s * g);
    for j in 1..len.saturating_sub(1) {
        let next = 2.0 * s * out[j] - 2.0 * j as f64 * out[j - 1];
        out.push(next);
    }
    out.truncate(len);
    out
}

fn hermite_sum(coeffs: &[f64], s: f64) -> f64 {
    if coeffs.is_empty() || s.abs() > HERMITE_REACH {
        return 0.0;
    }
    hermite_functions(s, coeffs.len())
        .iter()
        .zip(coeffs)
        .map(|(p, c)| p * c)
        .sum()
}

/// Coefficients of d/ds Σ c_j ψ_j, using ψ_j' = j ψ_{j−1} − ψ_{j+1}/2.
fn hermite_derivative(coeffs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; coeffs.len() + 1];
    for (j, &c) in coeffs.iter().enumerate() {
        if j > 0 {
            out[j - 1] += j as f64 * c;
        }
        out[j + 1] -= 0.5 * c;
    }
    out
}

impl SpatialShape {
    pub fn value(&self, u: f64) -> f64 {
        match self {
            SpatialShape::HermiteGaussian { center, width, coeffs } => {
                hermite_sum(coeffs, (u - center) / width)
            }
            SpatialShape::Cosine { amplitude, omega, phase } => amplitude * (omega * u + phase).cos(),
            SpatialShape::Constant { value } => *value,
        }
    }

    /// Value of the periodisation Σ_k S(u + kΛ); cosines and constants are
    /// returned as they are.
    pub fn value_torus(&self, u: f64, torus_length: f64) -> f64 {
        match self {
            SpatialShape::HermiteGaussian { center, width, .. } => {
                let reach = HERMITE_REACH * width;
                let lo = ((center - reach - u) / torus_length).floor() as i64;
                let hi = ((center + reach - u) / torus_length).ceil() as i64;
                (lo..=hi).map(|k| self.value(u + k as f64 * torus_length)).sum()
            }
            _ => self.value(u),
        }
    }

    pub fn derivative(&self) -> SpatialShape {
        match self {
            SpatialShape::HermiteGaussian { center, width, coeffs } => SpatialShape::HermiteGaussian {
                center: *center,
                width: *width,
                coeffs: hermite_derivative(coeffs).into_iter().map(|c| c / width).collect(),
            },
            SpatialShape::Cosine { amplitude, omega, phase } => SpatialShape::Cosine {
                amplitude: amplitude * omega,
                omega: *omega,
                phase: phase + 0.5 * PI,
            },
            SpatialShape::Constant { .. } => SpatialShape::Constant { value: 0.0 },
        }
    }

    pub fn nth_derivative(&self, order: usize) -> SpatialShape {
        let mut s = self.clone();
        for _ in 0..order {
            s = s.derivative();
        }
        s
    }

    /// Periodic fractional Laplacian −κ_γ|D|^γ of the periodisation on a
    /// torus of length Λ, where κ_γ is [`symbol_coefficient`]. Cosines must
    /// be torus-periodic for this to be meaningful.
    pub fn frac_lap_periodic(&self, u: f64, gamma: f64, torus_length: f64) -> f64 {
        let kappa = symbol_coefficient(gamma);
        match self {
            SpatialShape::HermiteGaussian { center, width, coeffs } => {
                // −(2κ/Λ) Σ_{k≥1} ξ_k^γ Re[Ŝ(ξ_k) e^{iξ_k u}],
                // Ŝ(ξ) e^{iξu} = w√(2π) e^{iξ(u−c)} Σ_j c_j (−i)^j ψ_j(wξ)
                let dxi = 2.0 * PI / torus_length;
                let kmax = (HERMITE_REACH / (width * dxi)).ceil() as usize;
                let theta = dxi * (u - center);
                let (s1, c1) = theta.sin_cos();
                let (mut sk, mut ck) = (s1, c1);
                let mut acc = 0.0;
                for k in 1..=kmax {
                    let xi = k as f64 * dxi;
                    let (even, odd) = even_odd_parts(coeffs, width * xi);
                    acc += xi.powf(gamma) * (even * ck + odd * sk);
                    let next_c = ck * c1 - sk * s1;
                    sk = sk * c1 + ck * s1;
                    ck = next_c;
                }
                -2.0 * kappa / torus_length * width * (2.0 * PI).sqrt() * acc
            }
            SpatialShape::Cosine { omega, .. } => -kappa * omega.abs().powf(gamma) * self.value(u),
            SpatialShape::Constant { .. } => 0.0,
        }
    }

    /// Fourier transform ∫ S(u) e^{−iξu} du as (re, im). Only defined for
    /// Hermite–Gaussians; other shapes return `None`.
    pub fn fourier(&self, xi: f64) -> Option<(f64, f64)> {
        match self {
            SpatialShape::HermiteGaussian { center, width, coeffs } => {
                let (even, odd) = even_odd_parts(coeffs, width * xi);
                let scale = width * (2.0 * PI).sqrt();
                let (s, c) = (xi * center).sin_cos();
                // e^{−iξc}(E − iO)
                Some((scale * (even * c - odd * s), scale * (-even * s - odd * c)))
            }
            _ => None,
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            SpatialShape::HermiteGaussian { coeffs, .. } => coeffs.iter().all(|&c| c == 0.0),
            SpatialShape::Cosine { amplitude, .. } => *amplitude == 0.0,
            SpatialShape::Constant { value } => *value == 0.0,
        }
    }
}

/// E(s) = Σ_{j even} c_j (−1)^{j/2} ψ_j(s) and O(s) = Σ_{j odd} c_j (−1)^{(j−1)/2} ψ_j(s),
/// so that Σ_j c_j (−i)^j ψ_j(s) = E − iO.
fn even_odd_parts(coeffs: &[f64], s: f64) -> (f64, f64) {
    if s.abs() > HERMITE_REACH {
        return (0.0, 0.0);
    }
    let psi = hermite_functions(s, coeffs.len());
    let (mut even, mut odd) = (0.0, 0.0);
    for (j, (&c, p)) in coeffs.iter().zip(psi).enumerate() {
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if j % 2 == 0 {
            even += sign * c * p;
        } else {
            odd += sign * c * p;
        }
    }
    (even, odd)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    /// a_0 + a_1 t + a_2 t² + …
    pub time_poly: Vec<f64>,
    pub shape: SpatialShape,
}

impl Term {
    pub fn time_factor(&self, t: f64) -> f64 {
        self.time_poly.iter().rev().fold(0.0, |acc, a| acc * t + a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub terms: Vec<Term>,
}

impl TestFunction {
    pub fn from_shape(shape: SpatialShape) -> Self {
        TestFunction {
            terms: vec![Term { time_poly: vec![1.0], shape }],
        }
    }

    /// exp(−(u − center)²/(2 width²)), constant in time.
    pub fn gaussian_bump(center: f64, width: f64) -> Self {
        Self::hermite_bump(center, width, 0)
    }

    /// ψ_order((u − center)/width), constant in time.
    pub fn hermite_bump(center: f64, width: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[order] = 1.0;
        Self::from_shape(SpatialShape::HermiteGaussian { center, width, coeffs })
    }

    /// cos(omega·u).
    pub fn cosine_mode(omega: f64) -> Self {
        Self::from_shape(SpatialShape::Cosine {
            amplitude: 1.0,
            omega,
            phase: 0.0,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self::from_shape(SpatialShape::Constant { value })
    }

    /// Multiplies every term by the time polynomial `poly`.
    pub fn with_time_poly(mut self, poly: &[f64]) -> Self {
        for term in &mut self.terms {
            term.time_poly = poly_mul(&term.time_poly, poly);
        }
        self
    }

    pub fn scaled(mut self, a: f64) -> Self {
        for term in &mut self.terms {
            for c in &mut term.time_poly {
                *c *= a;
            }
        }
        self
    }

    pub fn plus(mut self, other: TestFunction) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn time_degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.time_poly.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    pub fn is_time_independent(&self) -> bool {
        self.time_degree() == 0
    }

    /// True if G is constant in u for every t.
    pub fn is_spatially_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|t| matches!(t.shape, SpatialShape::Constant { .. }) || t.shape.is_zero())
    }

    pub fn time_factors(&self, t: f64) -> Vec<f64> {
        self.terms.iter().map(|term| term.time_factor(t)).collect()
    }

    pub fn value(&self, t: f64, u: f64) -> f64 {
        self.terms.iter().map(|term| term.time_factor(t) * term.shape.value(u)).sum()
    }

    pub fn value_torus(&self, t: f64, u: f64, torus_length: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.time_factor(t) * term.shape.value_torus(u, torus_length))
            .sum()
    }

    /// ∂_u^order G.
    pub fn space_derivative(&self, order: usize) -> TestFunction {
        TestFunction {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    time_poly: t.time_poly.clone(),
                    shape: t.shape.nth_derivative(order),
                })
                .collect(),
        }
    }

    /// ∂_t G.
    pub fn time_derivative(&self) -> TestFunction {
        TestFunction {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    time_poly: if t.time_poly.len() <= 1 {
                        vec![0.0]
                    } else {
                        t.time_poly[1..].iter().enumerate().map(|(j, a)| (j + 1) as f64 * a).collect()
                    },
                    shape: t.shape.clone(),
                })
                .collect(),
        }
    }

    pub fn frac_lap_periodic(&self, t: f64, u: f64, gamma: f64, torus_length: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| {
                let a = term.time_factor(t);
                if a == 0.0 {
                    0.0
                } else {
                    a * term.shape.frac_lap_periodic(u, gamma, torus_length)
                }
            })
            .sum()
    }

    /// Per-term spatial values at sites x/n, x = 0..size (torus length size/n).
    pub fn spatial_on_ring(&self, n: usize, size: usize) -> Vec<Vec<f64>> {
        let len = size as f64 / n as f64;
        self.terms
            .iter()
            .map(|term| (0..size).map(|x| term.shape.value_torus(x as f64 / n as f64, len)).collect())
            .collect()
    }

    /// Per-term periodic fractional Laplacian at sites x/n.
    pub fn frac_lap_on_ring(&self, n: usize, size: usize, gamma: f64) -> Vec<Vec<f64>> {
        let len = size as f64 / n as f64;
        self.terms
            .iter()
            .map(|term| {
                (0..size)
                    .map(|x| term.shape.frac_lap_periodic(x as f64 / n as f64, gamma, len))
                    .collect()
            })
            .collect()
    }

    /// G_t at sites x/n.
    pub fn values_on_ring(&self, t: f64, n: usize, size: usize) -> Vec<f64> {
        let len = size as f64 / n as f64;
        (0..size).map(|x| self.value_torus(t, x as f64 / n as f64, len)).collect()
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| {
                let shape = match &t.shape {
                    SpatialShape::HermiteGaussian { center, width, coeffs } => {
                        if coeffs.len() == 1 {
                            format!("gauss(c={center},w={width})")
                        } else {
                            format!("hermite(c={center},w={width},deg={})", coeffs.len() - 1)
                        }
                    }
                    SpatialShape::Cosine { amplitude, omega, phase } => {
                        format!("{amplitude}*cos({omega}u+{phase})")
                    }
                    SpatialShape::Constant { value } => format!("const({value})"),
                };
                if t.time_poly == [1.0] {
                    shape
                } else {
                    format!("{:?}(t)*{shape}", t.time_poly)
                }
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Chebyshev–Lobatto nodes T/2·(1 − cos(πj/16)), j = 0..=16; a single node
/// at 0 when `time_independent`.
pub fn sup_time_nodes(horizon: f64, time_independent: bool) -> Vec<f64> {
    if time_independent {
        return vec![0.0];
    }
    (0..=16)
        .map(|j| 0.5 * horizon * (1.0 - (PI * j as f64 / 16.0).cos()))
        .collect()
}
