use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse FFT pair over the blocks of a component-major buffer.
#[derive(Clone)]
pub(crate) struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Spectral {
    pub(crate) fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    /// Unnormalized forward transform of `blocks` consecutive arrays.
    pub(crate) fn forward(&self, data: &mut [Complex64], blocks: usize) {
        debug_assert_eq!(data.len(), blocks * self.len);
        self.forward.process(data);
    }

    /// Inverse transform including the `1/N` factor.
    pub(crate) fn inverse(&self, data: &mut [Complex64], blocks: usize) {
        debug_assert_eq!(data.len(), blocks * self.len);
        self.inverse.process(data);
        let scale = 1.0 / self.len as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("len", &self.len).finish()
    }
}
