use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Orthonormal 2-D DFT on row-major `(nx, ny)` arrays. Parseval holds exactly
/// up to rounding: Σ|x|² = Σ|X|².
#[derive(Clone)]
pub struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("nx", &self.nx).field("ny", &self.ny).finish()
    }
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            scale: 1.0 / ((nx * ny) as f64).sqrt(),
        }
    }

    pub fn forward(&self, a: &mut Array2<Complex64>) {
        self.transform(a, &*self.fwd_x, &*self.fwd_y);
    }

    pub fn inverse(&self, a: &mut Array2<Complex64>) {
        self.transform(a, &*self.inv_x, &*self.inv_y);
    }

    fn transform(&self, a: &mut Array2<Complex64>, fx: &dyn Fft<f64>, fy: &dyn Fft<f64>) {
        assert_eq!(a.dim(), (self.nx, self.ny), "array shape does not match FFT plan");
        if !a.is_standard_layout() {
            *a = a.as_standard_layout().to_owned();
        }
        let buf = a.as_slice_mut().expect("standard layout");
        // rows (contiguous along y)
        fy.process(buf);
        // columns
        let mut col = vec![Complex64::new(0.0, 0.0); self.nx];
        for j in 0..self.ny {
            for i in 0..self.nx {
                col[i] = buf[i * self.ny + j];
            }
            fx.process(&mut col);
            for i in 0..self.nx {
                buf[i * self.ny + j] = col[i] * self.scale;
            }
        }
    }
}
