use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Unnormalized 2-D FFT on row-major `n × n` buffers (`index = i1 * n + i2`).
#[derive(Clone)]
pub(crate) struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// `X[k] = Σ_j x[j] e^{−2πi k·j/n}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// `x[j] = Σ_k X[k] e^{+2πi k·j/n}` (no `1/n²`).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // rows (axis 2)
        plan.process_with_scratch(data, &mut scratch);
        // columns (axis 1)
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for i2 in 0..n {
            for i1 in 0..n {
                col[i1] = data[i1 * n + i2];
            }
            plan.process_with_scratch(&mut col, &mut scratch);
            for i1 in 0..n {
                data[i1 * n + i2] = col[i1];
            }
        }
    }
}

/// Map a signed wavenumber to its FFT bin.
#[inline]
pub(crate) fn bin(k: i32, n: usize) -> usize {
    k.rem_euclid(n as i32) as usize
}

/// Signed wavenumber of an FFT bin in `[−n/2, n/2)`.
#[inline]
pub(crate) fn wavenumber(bin: usize, n: usize) -> i32 {
    let b = bin as i32;
    let n = n as i32;
    if b >= n / 2 {
        b - n
    } else {
        b
    }
}
