use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse transforms of one length with shared scratch space.
/// Neither direction normalizes.
pub struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self { forward, inverse, scratch: vec![Complex64::default(); scratch_len] }
    }

    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
    }

    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }

    /// Inverse transform including the `1/N` factor.
    pub fn inverse_normalized(&mut self, buf: &mut [Complex64]) {
        self.inverse(buf);
        let k = 1.0 / buf.len() as f64;
        for v in buf.iter_mut() {
            *v *= k;
        }
    }
}

/// Angular frequency of each DFT bin, in standard FFT order.
pub fn angular_frequencies(len: usize, sample_rate: f64) -> Vec<f64> {
    let df = sample_rate / len as f64;
    (0..len)
        .map(|j| {
            let k = if j < len.div_ceil(2) { j as f64 } else { j as f64 - len as f64 };
            2.0 * PI * k * df
        })
        .collect()
}
