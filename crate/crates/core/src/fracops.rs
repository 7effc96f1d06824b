//! Fractional Laplacian, the discrete operator K_n, and the diagnostics
//! measuring how fast n^γ K_n approaches the continuum operator.

use crate::error::{check_gamma, Error, Result};
use crate::kernel::JumpKernel;
use crate::lattice::SiteIndex;
use crate::quadrature::integrate;
use crate::spectral::{dft, RingConvolver};
use crate::special::{hurwitz_zeta, jump_normalizer, symbol_coefficient};
use crate::testfn::{sup_time_nodes, SpatialShape, TestFunction};

/// Beyond this many widths from the centre a Hermite–Gaussian is zero.
const FAR_REACH: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    pub gamma: f64,
    pub delta_gamma: f64,
}

impl FracParams {
    pub fn new(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let delta_gamma = if gamma == 1.0 {
            0.5
        } else if gamma > 1.0 {
            1.0
        } else {
            0.0
        };
        Ok(FracParams { gamma, delta_gamma })
    }

    /// max{γ − 2, −1, γ − 1 − δ_γ}.
    pub fn y1_exponent(&self) -> f64 {
        (self.gamma - 2.0).max(-1.0).max(self.gamma - 1.0 - self.delta_gamma)
    }

    /// max{γ − 2, −1}.
    pub fn quadratic_variation_exponent(&self) -> f64 {
        (self.gamma - 2.0).max(-1.0)
    }
}

/// c_γ·PV∫_ℝ [G_t(v) − G_t(u)] |u − v|^{−1−γ} dv on the real line.
///
/// Cosines and constants use their exact multipliers. Hermite–Gaussian terms
/// are integrated in the symmetrised form ∫_0^∞ [S(u+w) + S(u−w) − 2S(u)] w^{−1−γ} dw:
/// a Taylor series on [0, h] (h a quarter width), adaptive Gauss–Kronrod on
/// [h, R] and the exact tail −2S(u)R^{−γ}/γ beyond the support.
pub fn frac_laplacian(g: &TestFunction, t: f64, u: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let mut total = 0.0;
    for term in &g.terms {
        let a = term.time_factor(t);
        if a != 0.0 {
            total += a * shape_frac_laplacian(&term.shape, u, gamma);
        }
    }
    Ok(total)
}

fn shape_frac_laplacian(shape: &SpatialShape, u: f64, gamma: f64) -> f64 {
    match shape {
        SpatialShape::Constant { .. } => 0.0,
        SpatialShape::Cosine { omega, .. } => {
            -symbol_coefficient(gamma) * omega.abs().powf(gamma) * shape.value(u)
        }
        SpatialShape::HermiteGaussian { center, width, .. } => {
            let h = 0.25 * width;
            // Near field: S(u+w) + S(u−w) − 2S(u) = Σ_k 2 S^{(2k)}(u) w^{2k}/(2k)!
            let mut near = 0.0;
            let mut deriv = shape.clone();
            let mut factorial = 1.0;
            for k in 1..=6 {
                deriv = deriv.nth_derivative(2);
                factorial *= (2 * k - 1) as f64 * (2 * k) as f64;
                let p = 2.0 * k as f64 - gamma;
                near += 2.0 * deriv.value(u) / factorial * h.powf(p) / p;
            }
            let s0 = shape.value(u);
            let integrand = |w: f64| (shape.value(u + w) + shape.value(u - w) - 2.0 * s0) * w.powf(-1.0 - gamma);
            let reach = (u - center).abs() + FAR_REACH * width;
            let mut far = 0.0;
            let mut a = h;
            // geometric panels up to one width, then one-width panels
            while a < reach {
                let b = if a < *width { (2.0 * a).min(*width) } else { (a + width).min(reach) };
                far += integrate(&integrand, a, b, 1e-13, 30);
                a = b;
            }
            let tail = -2.0 * s0 * reach.powf(-gamma) / gamma;
            jump_normalizer(gamma) * (near + far + tail)
        }
    }
}

/// Periodic operator −κ_γ|D|^γ on a torus of length `torus_length`, the
/// image-summed counterpart of [`frac_laplacian`].
pub fn frac_laplacian_periodic(g: &TestFunction, t: f64, u: f64, gamma: f64, torus_length: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(g.frac_lap_periodic(t, u, gamma, torus_length))
}

/// K_n G_s(x/n) = Σ_y [G_s(y/n) − G_s(x/n)] p(y − x) over the ring, by direct
/// summation.
pub fn kn_apply(g: &TestFunction, s: f64, x: SiteIndex, n: usize, kernel: &JumpKernel) -> f64 {
    let size = kernel.ring_size();
    let len = size as f64 / n as f64;
    let at = |site: usize| g.value_torus(s, site as f64 / n as f64, len);
    let gx = at(x.get());
    let pmf = kernel.folded_pmf();
    (1..size).map(|z| (at((x.get() + z) % size) - gx) * pmf[z]).sum()
}

/// K_n applied to every site of the ring at once: (p ⊛ v) − v.
pub fn kn_on_ring(values: &[f64], convolver: &RingConvolver) -> Vec<f64> {
    convolver
        .apply(values)
        .into_iter()
        .zip(values)
        .map(|(c, v)| c - v)
        .collect()
}

fn check_ring(kernel: &JumpKernel, n: usize) -> Result<()> {
    if n < 2 || kernel.ring_size() % n != 0 {
        return Err(Error::InvalidArgument(format!(
            "ring of {} sites is not a whole number of macroscopic units at n = {n}",
            kernel.ring_size()
        )));
    }
    Ok(())
}

/// Sup over the time nodes of |Σ_i P_i(t) d_i(x)|, for every site.
fn sup_over_time(g: &TestFunction, per_term: &[Vec<f64>], horizon: f64) -> Vec<f64> {
    let size = per_term.first().map_or(0, |v| v.len());
    let nodes = sup_time_nodes(horizon, g.is_time_independent());
    let factors: Vec<Vec<f64>> = nodes.iter().map(|&t| g.time_factors(t)).collect();
    (0..size)
        .map(|x| {
            factors
                .iter()
                .map(|f| f.iter().zip(per_term).map(|(a, d)| a * d[x]).sum::<f64>().abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// (1/n) Σ_x sup_{s∈[0,T]} |n^γ K_n G_s(x/n) − [−(−Δ)^{γ/2} G_s](x/n)|, with the
/// periodic operator on the torus of length ring_size/n.
pub fn convdisc_gap(g: &TestFunction, kernel: &JumpKernel, n: usize, horizon: f64) -> Result<f64> {
    check_ring(kernel, n)?;
    let size = kernel.ring_size();
    let gamma = kernel.gamma();
    let scale = (n as f64).powf(gamma);
    let convolver = RingConvolver::new(kernel.folded_pmf());
    let values = g.spatial_on_ring(n, size);
    let lap = g.frac_lap_on_ring(n, size, gamma);
    let diffs: Vec<Vec<f64>> = g
        .terms
        .iter()
        .zip(values.iter().zip(&lap))
        .map(|(term, (v, l))| {
            if matches!(term.shape, SpatialShape::Constant { .. }) {
                vec![0.0; size]
            } else {
                kn_on_ring(v, &convolver)
                    .into_iter()
                    .zip(l)
                    .map(|(k, l)| scale * k - l)
                    .collect()
            }
        })
        .collect();
    Ok(sup_over_time(g, &diffs, horizon).iter().sum::<f64>() / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtraTerms {
    pub y1: f64,
    pub y2: f64,
}

/// Y1 = ((m−1)/n²) Σ_{x,y} sup_s n^γ |∇G^n_s(y/n) − ∇G^n_s(x/n)| p(y−x), with
/// ∇G^n_s(x/n) = n[G_s(x/n) − G_s((x−1)/n)], and
/// Y2 = (1/n) Σ_x sup_s n^γ |G_s((x+1)/n) + G_s((x−1)/n) − 2G_s(x/n)|.
pub fn extra_term_bounds(g: &TestFunction, kernel: &JumpKernel, n: usize, m: u32, horizon: f64) -> Result<ExtraTerms> {
    check_ring(kernel, n)?;
    if m < 2 {
        return Err(Error::Unsupported("extra terms exist only for m >= 2".into()));
    }
    let size = kernel.ring_size();
    let scale = (n as f64).powf(kernel.gamma());
    let nf = n as f64;
    let nodes = sup_time_nodes(horizon, g.is_time_independent());
    let grads: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&t| {
            let v = g.values_on_ring(t, n, size);
            (0..size).map(|x| nf * (v[x] - v[(x + size - 1) % size])).collect()
        })
        .collect();
    let second: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&t| {
            let v = g.values_on_ring(t, n, size);
            (0..size)
                .map(|x| v[(x + 1) % size] + v[(x + size - 1) % size] - 2.0 * v[x])
                .collect()
        })
        .collect();

    let pmf = kernel.folded_pmf();
    let mut y1 = 0.0;
    for x in 0..size {
        let mut row = 0.0;
        for z in 1..size {
            let y = if x + z >= size { x + z - size } else { x + z };
            let mut sup = 0.0f64;
            for grad in &grads {
                sup = sup.max((grad[y] - grad[x]).abs());
            }
            row += sup * pmf[z];
        }
        y1 += row;
    }
    y1 *= (m - 1) as f64 * scale / (nf * nf);

    let y2 = (0..size)
        .map(|x| second.iter().map(|d| d[x].abs()).fold(0.0, f64::max))
        .sum::<f64>()
        * scale
        / nf;
    Ok(ExtraTerms { y1, y2 })
}

/// Σ_{d≥1} [∫_{d−½}^{d+½} w^{1−γ} dw − d^{1−γ}]: the midpoint-rule defect of
/// the leading near-diagonal behaviour f'(u)²|w|^{1−γ}, in units of h^{2−γ}.
fn midpoint_defect(gamma: f64) -> f64 {
    let q = 2.0 - gamma;
    let terms = 100_000usize;
    let mut sum = 0.0;
    for d in (1..=terms).rev() {
        let d = d as f64;
        sum += ((d + 0.5).powf(q) - (d - 0.5).powf(q)) / q - d.powf(1.0 - gamma);
    }
    // leading Euler–Maclaurin tail, term ≈ (1−γ)(−γ)/24 · d^{−1−γ}
    let big = terms as f64 + 0.5;
    sum + (1.0 - gamma) * (-gamma) / 24.0 * big.powf(-gamma) / gamma
}

/// ∫_0^Λ ∫_ℝ [f(u) − f(v)]² |u − v|^{−1−γ} dv du for a Λ-periodic f sampled on
/// a uniform grid (the squared H^{γ/2} seminorm over one period).
///
/// Off-diagonal cells use a Riemann sum with image-summed weights
/// W(d) = Λ^{−1−γ}[ζ(1+γ, d/M) + ζ(1+γ, 1 − d/M)]; the band |u − v| < h/2 and
/// the midpoint defect of the singular f'²|w|^{1−γ} behaviour are added
/// analytically.
pub fn sobolev_seminorm(f: &[f64], torus_length: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let m = f.len();
    if m < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 grid points, got {m}")));
    }
    let mean = f.iter().sum::<f64>() / m as f64;
    let g: Vec<f64> = f.iter().map(|v| v - mean).collect();
    if g.iter().all(|v| v.abs() < 1e-300) {
        return Ok(0.0);
    }
    let h = torus_length / m as f64;
    let s = 1.0 + gamma;

    // Q(d) = Σ_u [g(u) − g(u+d)]², directly for short lags and from the
    // autocorrelation otherwise (the direct form avoids cancellation).
    let direct_lags = 32.min(m / 2);
    let energy: f64 = g.iter().map(|v| v * v).sum();
    let spectrum = dft(&g);
    let power: Vec<f64> = spectrum.iter().map(|c| c.norm_sqr()).collect();
    let autocorr = crate::spectral::idft_real(
        &power
            .iter()
            .map(|&p| rustfft::num_complex::Complex::new(p, 0.0))
            .collect::<Vec<_>>(),
    );
    let lag_sum = |d: usize| -> f64 {
        let lag = d.min(m - d);
        if lag <= direct_lags {
            (0..m).map(|u| (g[u] - g[(u + d) % m]).powi(2)).sum()
        } else {
            (2.0 * energy - 2.0 * autocorr[d]).max(0.0)
        }
    };
    let mut off = 0.0;
    for d in 1..m {
        let a = d as f64 / m as f64;
        let w = torus_length.powf(-s) * (hurwitz_zeta(s, a) + hurwitz_zeta(s, 1.0 - a));
        off += w * lag_sum(d);
    }
    off *= h * h;

    let slope_sq: f64 = (0..m)
        .map(|u| ((g[(u + 1) % m] - g[(u + m - 1) % m]) / (2.0 * h)).powi(2))
        .sum();
    let band = 2.0 * (0.5 * h).powf(2.0 - gamma) / (2.0 - gamma);
    let defect = 2.0 * h.powf(2.0 - gamma) * midpoint_defect(gamma);
    Ok(off + h * slope_sq * (band + defect))
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1Profile {
    pub values: Vec<f64>,
    pub max: f64,
}

/// (1/n) Σ_x sup_s |[−(−Δ)^{γ/2} G_s](x/n)| for each n, with the periodic
/// operator on a torus of length `torus_length`.
pub fn l1_boundedness(g: &TestFunction, n_list: &[usize], gamma: f64, torus_length: f64, horizon: f64) -> Result<L1Profile> {
    check_gamma(gamma)?;
    let mut values = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let size = (n as f64 * torus_length).round() as usize;
        if (size as f64 - n as f64 * torus_length).abs() > 1e-9 || size == 0 {
            return Err(Error::InvalidArgument(format!(
                "torus length {torus_length} is not a multiple of 1/{n}"
            )));
        }
        let lap = g.frac_lap_on_ring(n, size, gamma);
        values.push(sup_over_time(g, &lap, horizon).iter().sum::<f64>() / n as f64);
    }
    let max = values.iter().cloned().fold(0.0, f64::max);
    Ok(L1Profile { values, max })
}

/// Least-squares slope of log(y) against log(x).
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn delta_gamma_branches() {
        assert_eq!(FracParams::new(0.5).unwrap().delta_gamma, 0.0);
        assert_eq!(FracParams::new(1.0).unwrap().delta_gamma, 0.5);
        assert_eq!(FracParams::new(1.5).unwrap().delta_gamma, 1.0);
        assert!(FracParams::new(2.0).is_err());
        assert_eq!(FracParams::new(0.5).unwrap().y1_exponent(), -0.5);
        assert_eq!(FracParams::new(1.5).unwrap().y1_exponent(), -0.5);
    }

    #[test]
    fn constant_gives_zero() {
        let g = TestFunction::constant(3.0);
        assert_eq!(frac_laplacian(&g, 0.0, 0.4, 1.0).unwrap(), 0.0);
        let k = JumpKernel::new(1.0, 512).unwrap();
        assert_eq!(kn_apply(&g, 0.0, SiteIndex::wrap(5, 512), 256, &k), 0.0);
        assert_eq!(convdisc_gap(&g, &k, 256, 1.0).unwrap(), 0.0);
        assert_eq!(l1_boundedness(&g, &[256], 1.0, 2.0, 1.0).unwrap().max, 0.0);
        assert_eq!(sobolev_seminorm(&[0.7; 64], 2.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn cosine_eigenfunction() {
        let omega = 3.0;
        let g = TestFunction::cosine_mode(omega);
        for gamma in [0.5, 1.0, 1.5] {
            let v = frac_laplacian(&g, 0.0, 0.2, gamma).unwrap();
            let want = -symbol_coefficient(gamma) * omega.powf(gamma) * (omega * 0.2).cos();
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn standard_gaussian_at_origin() {
        let g = TestFunction::gaussian_bump(0.0, 1.0);
        let v = frac_laplacian(&g, 0.0, 0.0, 1.0).unwrap();
        let want = -3.0 * (2.0 * PI).sqrt() / (PI * PI);
        assert!((v - want).abs() < 1e-9, "{v} vs {want}");
    }

    /// Trapezoid rule with Richardson extrapolation on the symmetrised
    /// integrand, an independent evaluation of the same integral.
    fn richardson_oracle(g: &TestFunction, u: f64, gamma: f64) -> f64 {
        assert_eq!(g, &TestFunction::gaussian_bump(0.0, 1.0));
        // the test function is e^{−u²/2}, with second derivative (u² − 1)e^{−u²/2}
        let curvature = (u * u - 1.0) * (-0.5 * u * u).exp();
        let f = |w: f64| {
            if w < 1e-4 {
                // second difference lost to cancellation; use its Taylor limit
                return curvature * w.powf(1.0 - gamma);
            }
            (g.value(0.0, u + w) + g.value(0.0, u - w) - 2.0 * g.value(0.0, u)) * w.powf(-1.0 - gamma)
        };
        // substitute w = r^k to make the integrand smooth at 0
        let k = 4.0;
        let big = 12.0f64;
        let r_max = big.powf(1.0 / k);
        let trap = |steps: usize| -> f64 {
            let dr = r_max / steps as f64;
            let mut s = 0.0;
            for i in 1..=steps {
                let r = i as f64 * dr;
                let wgt = if i == steps { 0.5 } else { 1.0 };
                s += wgt * f(r.powf(k)) * k * r.powf(k - 1.0);
            }
            s * dr
        };
        let (a, b) = (trap(200_000), trap(400_000));
        let extrap = b + (b - a) / 3.0;
        let tail = -2.0 * g.value(0.0, u) * big.powf(-gamma) / gamma;
        jump_normalizer(gamma) * (extrap + tail)
    }

    #[test]
    fn gaussian_matches_quadrature_oracle() {
        let g = TestFunction::gaussian_bump(0.0, 1.0);
        for (u, gamma) in [(0.0, 1.0), (0.7, 0.5), (-1.2, 1.5)] {
            let v = frac_laplacian(&g, 0.0, u, gamma).unwrap();
            let o = richardson_oracle(&g, u, gamma);
            assert!((v - o).abs() < 1e-6, "u={u} gamma={gamma}: {v} vs {o}");
        }
    }

    #[test]
    fn line_operator_matches_fourier_for_hermite() {
        // −κ (1/2π) ∫ |ξ|^γ Ŝ(ξ) e^{iξu} dξ, by quadrature in ξ
        let g = TestFunction::hermite_bump(0.3, 0.4, 2).plus(TestFunction::hermite_bump(0.3, 0.4, 1).scaled(0.5));
        for gamma in [0.5, 1.0, 1.5] {
            let u = 0.55;
            let kappa = symbol_coefficient(gamma);
            let spectral = |xi: f64| {
                let mut acc = 0.0;
                for term in &g.terms {
                    let (a, b) = term.shape.fourier(xi).unwrap();
                    acc += term.time_factor(0.0) * (a * (xi * u).cos() - b * (xi * u).sin());
                }
                xi.powf(gamma) * acc
            };
            let integral = integrate(&spectral, 0.0, 120.0, 1e-12, 40);
            let want = -kappa / PI * integral;
            let v = frac_laplacian(&g, 0.0, u, gamma).unwrap();
            assert!((v - want).abs() < 1e-8, "gamma {gamma}: {v} vs {want}");
        }
    }

    #[test]
    fn periodic_operator_is_line_operator_plus_images() {
        // Periodic value = line value + c_γ Σ_{k≠0} ∫ [S(v + kΛ)] |u − v|^{−1−γ} dv;
        // for a narrow bump the image integrals are c_γ S-mass·|u − c − kΛ|^{−1−γ}
        // to leading order, summed with Hurwitz zeta.
        let w = 0.05;
        let c = 1.0;
        let len = 2.0;
        let g = TestFunction::gaussian_bump(c, w);
        let gamma = 1.0;
        let u = 1.1;
        let line = frac_laplacian(&g, 0.0, u, gamma).unwrap();
        let per = frac_laplacian_periodic(&g, 0.0, u, gamma, len).unwrap();
        let mass = w * (2.0 * PI).sqrt();
        let s = 1.0 + gamma;
        let d = (u - c) / len;
        let images = mass * len.powf(-s) * (hurwitz_zeta(s, 1.0 - d) + hurwitz_zeta(s, 1.0 + d));
        // second moment w²·mass against the curvature s(s+1)|D|^{−s−2}
        let curv = mass * w * w * 0.5 * s * (s + 1.0) * len.powf(-s - 2.0)
            * (hurwitz_zeta(s + 2.0, 1.0 - d) + hurwitz_zeta(s + 2.0, 1.0 + d));
        let want = line + jump_normalizer(gamma) * (images + curv);
        assert!((per - want).abs() < 1e-6, "{per} vs {want}");
    }

    #[test]
    fn linearity_and_translation() {
        let a = TestFunction::gaussian_bump(0.8, 0.2);
        let b = TestFunction::hermite_bump(1.1, 0.15, 1);
        let sum = a.clone().scaled(2.0).plus(b.clone().scaled(-0.5));
        for gamma in [0.5, 1.5] {
            let u = 0.9;
            let lhs = frac_laplacian(&sum, 0.0, u, gamma).unwrap();
            let rhs = 2.0 * frac_laplacian(&a, 0.0, u, gamma).unwrap() - 0.5 * frac_laplacian(&b, 0.0, u, gamma).unwrap();
            assert!((lhs - rhs).abs() < 1e-9);
        }
        let shifted = TestFunction::gaussian_bump(1.05, 0.2);
        let v0 = frac_laplacian(&a, 0.0, 0.7, 1.0).unwrap();
        let v1 = frac_laplacian(&shifted, 0.0, 0.95, 1.0).unwrap();
        assert!((v0 - v1).abs() < 1e-10);
        let p0 = a.frac_lap_periodic(0.0, 0.7, 1.0, 2.0);
        let p1 = shifted.frac_lap_periodic(0.0, 0.95, 1.0, 2.0);
        assert!((p0 - p1).abs() < 1e-10);
    }

    #[test]
    fn negative_at_maximum() {
        let g = TestFunction::gaussian_bump(1.0, 0.1);
        for gamma in [0.5, 1.0, 1.5] {
            assert!(frac_laplacian(&g, 0.0, 1.0, gamma).unwrap() < 0.0);
            assert!(g.frac_lap_periodic(0.0, 1.0, gamma, 2.0) < 0.0);
        }
    }

    #[test]
    fn kn_fft_matches_direct_and_is_symmetric() {
        let n = 64;
        let k = JumpKernel::new(0.5, 2 * n).unwrap();
        let g = TestFunction::gaussian_bump(1.0, 0.2);
        let conv = RingConvolver::new(k.folded_pmf());
        let values = g.values_on_ring(0.0, n, 2 * n);
        let fft = kn_on_ring(&values, &conv);
        for x in [0usize, 17, 64, 100] {
            let direct = kn_apply(&g, 0.0, SiteIndex::wrap(x as i64, 2 * n), n, &k);
            assert!((fft[x] - direct).abs() < 1e-13);
        }
        // even G about the site x = n: the two halves of the sum agree
        let pmf = k.folded_pmf();
        let x = n;
        let gx = values[x];
        let left: f64 = (1..n).map(|z| (values[x - z] - gx) * pmf[z]).sum();
        let right: f64 = (1..n).map(|z| (values[x + z] - gx) * pmf[z]).sum();
        assert!((left - right).abs() < 1e-14);
    }

    #[test]
    fn translation_equivariance_of_kn() {
        let n = 32;
        let size = 64;
        let k = JumpKernel::new(1.0, size).unwrap();
        let a = TestFunction::gaussian_bump(0.8, 0.1);
        let b = TestFunction::gaussian_bump(0.8 + 5.0 / n as f64, 0.1);
        let va = kn_apply(&a, 0.0, SiteIndex::wrap(20, size), n, &k);
        let vb = kn_apply(&b, 0.0, SiteIndex::wrap(25, size), n, &k);
        assert!((va - vb).abs() < 1e-13);
    }

    #[test]
    fn gap_decreases_with_n() {
        let g = TestFunction::gaussian_bump(1.0, 0.1);
        let gaps: Vec<f64> = [256usize, 1024]
            .iter()
            .map(|&n| convdisc_gap(&g, &JumpKernel::new(1.0, 2 * n).unwrap(), n, 1.0).unwrap())
            .collect();
        assert!(gaps[1] < gaps[0] / 2.0, "{gaps:?}");
    }

    #[test]
    fn second_difference_vanishes_for_affine_pieces() {
        // A cosine of tiny frequency is affine to O(ω²) on the grid, so its
        // second differences are O(ω²/n²).
        let omega = 2.0 * PI / 2.0;
        let g = TestFunction::cosine_mode(omega).scaled(1e-3);
        let k = JumpKernel::new(1.0, 512).unwrap();
        let e = extra_term_bounds(&g, &k, 256, 2, 1.0).unwrap();
        assert!(e.y2 < 1e-3 * omega * omega / 256.0 * 2.0 * 1.01);
        let lin = |x: f64| 0.3 * x + 0.1;
        let h = 1.0 / 256.0;
        for x in [0.2, 0.5, 0.9] {
            assert!((lin(x + h) + lin(x - h) - 2.0 * lin(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn y1_matches_pairwise_definition() {
        let n = 16;
        let size = 32;
        let k = JumpKernel::new(1.5, size).unwrap();
        let g = TestFunction::gaussian_bump(1.0, 0.25).with_time_poly(&[1.0, -0.8]);
        let horizon = 1.0;
        let e = extra_term_bounds(&g, &k, n, 3, horizon).unwrap();
        let nodes = sup_time_nodes(horizon, false);
        let grad = |t: f64, x: i64| {
            let len = size as f64 / n as f64;
            n as f64 * (g.value_torus(t, x as f64 / n as f64, len) - g.value_torus(t, (x - 1) as f64 / n as f64, len))
        };
        let mut want = 0.0;
        for x in 0..size as i64 {
            for y in 0..size as i64 {
                let sup = nodes.iter().map(|&t| (grad(t, y) - grad(t, x)).abs()).fold(0.0, f64::max);
                want += sup * k.folded(y - x);
            }
        }
        want *= 2.0 * (n as f64).powf(1.5) / (n * n) as f64;
        assert!((e.y1 - want).abs() < 1e-12 * want);
    }

    fn spectral_seminorm(f: &[f64], len: f64, gamma: f64) -> f64 {
        let m = f.len();
        let hat = dft(f);
        let mut acc = 0.0;
        for k in 1..m {
            let mode = crate::spectral::signed_mode(k, m) as f64;
            if 2 * k == m {
                continue;
            }
            let xi = 2.0 * PI * mode / len;
            acc += (hat[k].norm() / m as f64).powi(2) * xi.abs().powf(gamma);
        }
        2.0 * len * crate::special::cosine_moment(gamma) * acc
    }

    #[test]
    fn seminorm_of_cosine_matches_spectral_identity() {
        // the next correction is O(h^{4−γ}) relative, so the error drops at
        // least fourfold per grid doubling
        let len = 2.0;
        for gamma in [0.5, 1.0, 1.5] {
            let mut last = f64::INFINITY;
            for m in [128usize, 256, 512, 1024] {
                let f: Vec<f64> = (0..m).map(|i| (2.0 * PI * 3.0 * i as f64 / m as f64).cos()).collect();
                let v = sobolev_seminorm(&f, len, gamma).unwrap();
                let want = spectral_seminorm(&f, len, gamma);
                let err = (v - want).abs() / want;
                assert!(err < 4e-3, "gamma {gamma} m {m}: {v} vs {want}");
                assert!(m < 256 || err < 1e-3);
                assert!(err < last / 4.0);
                last = err;
            }
        }
    }

    #[test]
    fn seminorm_of_bump_converges() {
        let g = TestFunction::gaussian_bump(1.0, 0.15);
        let len = 2.0;
        let vals: Vec<f64> = [256usize, 512, 1024]
            .iter()
            .map(|&m| {
                let f: Vec<f64> = (0..m).map(|i| g.value_torus(0.0, i as f64 * len / m as f64, len)).collect();
                sobolev_seminorm(&f, len, 1.0).unwrap()
            })
            .collect();
        assert!(((vals[2] - vals[1]) / vals[2]).abs() < 0.01);
        assert!(((vals[1] - vals[0]) / vals[1]).abs() < 0.01);
        let f: Vec<f64> = (0..1024).map(|i| g.value_torus(0.0, i as f64 * len / 1024.0, len)).collect();
        let want = spectral_seminorm(&f, len, 1.0);
        assert!((vals[2] - want).abs() < 1e-3 * want);
    }

    #[test]
    fn l1_homogeneity_and_stability() {
        let g = TestFunction::gaussian_bump(1.0, 0.1);
        let ns = [256usize, 512, 1024, 2048, 4096];
        let a = l1_boundedness(&g, &ns, 1.0, 2.0, 1.0).unwrap();
        let b = l1_boundedness(&g.clone().scaled(2.0), &ns, 1.0, 2.0, 1.0).unwrap();
        assert!((b.max - 2.0 * a.max).abs() < 1e-10 * a.max);
        let lo = a.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((a.max - lo) / a.max < 0.05);
    }

    #[test]
    fn slope_fit() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.7)).collect();
        assert!((loglog_slope(&xs, &ys) + 0.7).abs() < 1e-12);
    }
}
