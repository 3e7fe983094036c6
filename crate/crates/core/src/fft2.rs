//! Square 2-D FFT on row-major `n × n` buffers.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::algebra::C64;

#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [C64]) {
        let n = self.n;
        assert_eq!(data.len(), n * n, "buffer is not n x n");
        plan.process(data);
        let mut col = vec![C64::default(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            plan.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }

    /// Unnormalised forward transform.
    pub fn forward(&self, data: &mut [C64]) {
        self.run(&self.fwd, data);
    }

    /// Inverse transform including the `1/n²` factor.
    pub fn inverse(&self, data: &mut [C64]) {
        self.run(&self.inv, data);
        let s = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}
