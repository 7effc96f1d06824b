//! FFT helpers for circular convolutions and real periodic transforms.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Circular convolution with a fixed kernel, (k ⊛ v)(x) = Σ_z k[z]·v[x − z].
/// For a symmetric kernel this is Σ_z k[z]·v[x + z].
pub struct RingConvolver {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex<f64>>,
}

impl RingConvolver {
    pub fn new(kernel: &[f64]) -> Self {
        let size = kernel.len();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut kernel_hat: Vec<Complex<f64>> = kernel.iter().map(|&k| Complex::new(k, 0.0)).collect();
        forward.process(&mut kernel_hat);
        let scale = 1.0 / size as f64;
        for c in &mut kernel_hat {
            *c *= scale;
        }
        RingConvolver {
            size,
            forward,
            inverse,
            kernel_hat,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.size);
        let mut buf: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.forward.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Forward DFT of a real vector, X_k = Σ_j x_j e^{−2πijk/N}.
pub fn dft(v: &[f64]) -> Vec<Complex<f64>> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(v.len());
    let mut buf: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft.process(&mut buf);
    buf
}

/// Inverse of [`dft`], returning the real part.
pub fn idft_real(hat: &[Complex<f64>]) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(hat.len());
    let mut buf = hat.to_vec();
    fft.process(&mut buf);
    let scale = 1.0 / hat.len() as f64;
    buf.into_iter().map(|c| c.re * scale).collect()
}

/// Signed wavenumber index of DFT bin `k` for length `n`: 0, 1, …, −1.
pub fn signed_mode(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}
