use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Pgm;
use crate::optics::Image2D;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub quantum_efficiency: f64,
    pub n_frames: u32,
    /// Exposure per frame (s).
    pub exposure: f64,
    pub seed: u64,
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel {
            quantum_efficiency: 0.25,
            n_frames: 50,
            exposure: 1.0,
            seed: 1,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.quantum_efficiency > 0.0 && self.quantum_efficiency <= 1.0) {
            return Err(Error::invariant("camera.quantum_efficiency", "must be in (0, 1]"));
        }
        if self.n_frames == 0 {
            return Err(Error::invariant("camera.n_frames", "must be >= 1"));
        }
        if !(self.exposure.is_finite() && self.exposure > 0.0) {
            return Err(Error::invariant("camera.exposure", "must be > 0"));
        }
        Ok(())
    }
}

/// Sum over `n_frames` of independent Poisson counts with mean
/// `photons·QE·intensity` per pixel. Pixel k draws from its own ChaCha stream,
/// so the result does not depend on how pixels are scheduled.
pub fn camera_render(intensity: &Image2D<f64>, photons: f64, camera: &CameraModel) -> Result<Array2<u64>> {
    camera.validate()?;
    if intensity.data.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Metric("camera: intensity must be non-negative".into()));
    }
    if !(photons.is_finite() && photons >= 0.0) {
        return Err(Error::Metric("camera: photon number must be >= 0".into()));
    }
    let norm = intensity.normalized();
    let (nx, ny) = norm.grid.shape();
    let scale = photons * camera.quantum_efficiency;
    let counts: Vec<u64> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let mean = scale * norm.data[[k / ny, k % ny]];
            if mean <= 0.0 {
                return 0;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(camera.seed);
            rng.set_stream(k as u64);
            let dist = Poisson::new(mean).expect("positive finite mean");
            (0..camera.n_frames).map(|_| rng.sample(dist) as u64).sum()
        })
        .collect();
    Ok(Array2::from_shape_vec((nx, ny), counts).expect("pixel count matches grid"))
}

/// Variance over mean of the pixel values.
pub fn index_of_dispersion(counts: &Array2<u64>) -> f64 {
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var / mean
}

/// Converts an (x, y) counts array to a 16-bit PGM with the top row at the
/// largest y. Returns the image and the counts-per-level scale (≥ 1).
pub fn counts_to_pgm(counts: &Array2<u64>, comments: Vec<String>) -> (Pgm, f64) {
    let (nx, ny) = counts.dim();
    let max = counts.iter().cloned().max().unwrap_or(0);
    let scale = if max > u16::MAX as u64 { max as f64 / u16::MAX as f64 } else { 1.0 };
    let mut pixels = Vec::with_capacity(nx * ny);
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            pixels.push((counts[[ix, iy]] as f64 / scale).round().min(u16::MAX as f64) as u16);
        }
    }
    let pgm = Pgm {
        width: nx,
        height: ny,
        maxval: u16::MAX,
        pixels,
        comments,
    };
    (pgm, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::GridSpec;

    fn flat(n: usize) -> Image2D<f64> {
        Image2D::new(GridSpec::square(n, 1e-3).unwrap(), Array2::from_elem((n, n), 1.0))
    }

    #[test]
    fn zero_photons_gives_zero_image() {
        let c = camera_render(&flat(16), 0.0, &CameraModel::default()).unwrap();
        assert!(c.iter().all(|&v| v == 0));
    }

    #[test]
    fn seeded_and_schedule_independent() {
        let cam = CameraModel::default();
        let a = camera_render(&flat(32), 1e4, &cam).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| camera_render(&flat(32), 1e4, &cam).unwrap());
        assert_eq!(a, b);
        let c = camera_render(&flat(32), 1e4, &CameraModel { seed: 2, ..cam }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_negative_intensity() {
        let mut img = flat(8);
        img.data[[1, 1]] = -1.0;
        assert!(camera_render(&img, 1.0, &CameraModel::default()).is_err());
    }

    #[test]
    fn pgm_scaling() {
        let mut c = Array2::<u64>::zeros((2, 3));
        c[[1, 2]] = 131070;
        c[[0, 0]] = 2;
        let (p, s) = counts_to_pgm(&c, vec![]);
        assert_eq!(s, 2.0);
        assert_eq!(p.pixels[1], 65535); // top row is iy = 2
        assert_eq!(p.pixels[4], 1);
        assert_eq!(p.pixels[5], 0);
    }
}
