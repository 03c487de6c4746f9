use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transverse sampling grid. Index `[ix, iy]` sits at
/// `x = (ix - nx/2)·dx`, `y = (iy - ny/2)·dy`, so the optical axis is pixel `(nx/2, ny/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        let g = GridSpec { nx, ny, dx, dy };
        g.validate()?;
        Ok(g)
    }

    /// Square grid of `n × n` samples spanning `extent` metres.
    pub fn square(n: usize, extent: f64) -> Result<Self> {
        GridSpec::new(n, n, extent / n as f64, extent / n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("grid.nx", self.nx), ("grid.ny", self.ny)] {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::invariant(name, format!("must be a power of two >= 8, got {n}")));
            }
        }
        for (name, d) in [("grid.dx", self.dx), ("grid.dy", self.dy)] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::invariant(name, "must be > 0"));
            }
        }
        Ok(())
    }

    /// Checks that the grid spans at least `extent` in both directions.
    pub fn check_covers(&self, extent: f64) -> Result<()> {
        if self.extent_x() + 1e-12 < extent || self.extent_y() + 1e-12 < extent {
            return Err(Error::invariant(
                "grid.extent",
                format!(
                    "grid {:.3e} x {:.3e} m does not cover the medium extent {extent:.3e} m",
                    self.extent_x(),
                    self.extent_y()
                ),
            ));
        }
        Ok(())
    }

    pub fn extent_x(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn extent_y(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn x(&self, ix: usize) -> f64 {
        (ix as f64 - (self.nx / 2) as f64) * self.dx
    }

    pub fn y(&self, iy: usize) -> f64 {
        (iy as f64 - (self.ny / 2) as f64) * self.dy
    }

    /// Angular spatial frequencies in FFT order.
    pub fn kx(&self) -> Vec<f64> {
        fft_freqs(self.nx, self.dx)
    }

    pub fn ky(&self) -> Vec<f64> {
        fft_freqs(self.ny, self.dy)
    }

    /// |k⊥|² on the FFT-ordered grid.
    pub fn kperp2(&self) -> Array2<f64> {
        let kx = self.kx();
        let ky = self.ky();
        Array2::from_shape_fn((self.nx, self.ny), |(i, j)| kx[i] * kx[i] + ky[j] * ky[j])
    }

    /// Largest |k⊥| representable on the grid.
    pub fn kperp_max(&self) -> f64 {
        ((PI / self.dx).powi(2) + (PI / self.dy).powi(2)).sqrt()
    }
}

fn fft_freqs(n: usize, d: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * d);
    (0..n)
        .map(|i| {
            let m = if i < n.div_ceil(2) { i as f64 } else { i as f64 - n as f64 };
            m * dk
        })
        .collect()
}
