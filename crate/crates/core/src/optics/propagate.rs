use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use super::fft::Fft2;
use super::grid::GridSpec;
use super::image::FieldPlane;
use crate::error::{Error, Result};

/// Largest |k⊥|/k accepted by the paraxial transfer function.
pub const PARAXIAL_LIMIT: f64 = 0.1;

/// Cached FFT plan and |k⊥|² table for repeated paraxial propagation on one grid.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: GridSpec,
    fft: Fft2,
    kperp2: Array2<f64>,
}

impl Propagator {
    pub fn new(grid: GridSpec) -> Self {
        Propagator {
            grid,
            fft: Fft2::new(grid.nx, grid.ny),
            kperp2: grid.kperp2(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    pub fn kperp2(&self) -> &Array2<f64> {
        &self.kperp2
    }

    pub fn check_band_limit(&self, wavelength: f64) -> Result<()> {
        let ratio = self.grid.kperp_max() * wavelength / (2.0 * PI);
        if ratio > PARAXIAL_LIMIT {
            return Err(Error::BandLimit { ratio });
        }
        Ok(())
    }

    /// Fresnel transfer function e^{-i k⊥² d / (2k)} in FFT order.
    pub fn transfer(&self, distance: f64, wavelength: f64) -> Array2<Complex64> {
        let k = 2.0 * PI / wavelength;
        self.kperp2
            .mapv(|q2| Complex64::from_polar(1.0, -q2 * distance / (2.0 * k)))
    }

    /// Propagates a field given in real space, in place.
    pub fn propagate_in_place(&self, data: &mut Array2<Complex64>, transfer: &Array2<Complex64>) {
        self.fft.forward(data);
        data.zip_mut_with(transfer, |a, h| *a *= h);
        self.fft.inverse(data);
    }

    pub fn propagate(&self, field: &FieldPlane, distance: f64, wavelength: f64) -> Result<FieldPlane> {
        self.check_band_limit(wavelength)?;
        let mut data = field.data.clone();
        if distance != 0.0 {
            let h = self.transfer(distance, wavelength);
            self.propagate_in_place(&mut data, &h);
        }
        Ok(FieldPlane::new(field.grid, data))
    }
}

/// Paraxial free-space propagation by `distance` metres (negative propagates backwards).
pub fn angular_spectrum_propagate(field: &FieldPlane, distance: f64, wavelength: f64) -> Result<FieldPlane> {
    Propagator::new(field.grid).propagate(field, distance, wavelength)
}

/// Image through a 4-f relay of focal lengths `f1`, `f2`: inverted, magnified by
/// `f2/f1`, bilinearly resampled onto the input grid and renormalized to the input power.
pub fn image_through_4f(field: &FieldPlane, f1: f64, f2: f64) -> Result<FieldPlane> {
    if !(f1.is_finite() && f1 > 0.0 && f2.is_finite() && f2 > 0.0) {
        return Err(Error::invariant("focal_length", "f1 and f2 must be > 0"));
    }
    let g = field.grid;
    let m = -f2 / f1;
    let p_in = field.power();

    // Power that would land outside the grid.
    let (hx, hy) = (0.5 * g.extent_x(), 0.5 * g.extent_y());
    let mut outside = 0.0;
    for ((i, j), v) in field.data.indexed_iter() {
        let (x, y) = (g.x(i) * m, g.y(j) * m);
        if x.abs() > hx - g.dx || y.abs() > hy - g.dy {
            outside += v.norm_sqr();
        }
    }
    if p_in > 0.0 && outside * g.pixel_area() > 1e-6 * p_in {
        return Err(Error::ImageOverflow { magnification: m });
    }

    let cx = (g.nx / 2) as f64;
    let cy = (g.ny / 2) as f64;
    let out = Array2::from_shape_fn(g.shape(), |(i, j)| {
        // source coordinate in fractional pixel units
        let sx = (i as f64 - cx) / m + cx;
        let sy = (j as f64 - cy) / m + cy;
        bilinear(&field.data, sx, sy) / m.abs()
    });
    let mut image = FieldPlane::new(g, out);
    let p_out = image.power();
    if p_out > 0.0 {
        let s = (p_in / p_out).sqrt();
        image.data.mapv_inplace(|z| z * s);
    }
    Ok(image)
}

fn bilinear(a: &Array2<Complex64>, x: f64, y: f64) -> Complex64 {
    let (nx, ny) = a.dim();
    let (x0, y0) = (x.floor(), y.floor());
    let (fx, fy) = (x - x0, y - y0);
    let get = |i: f64, j: f64| {
        if i < 0.0 || j < 0.0 || i >= nx as f64 || j >= ny as f64 {
            Complex64::new(0.0, 0.0)
        } else {
            a[[i as usize, j as usize]]
        }
    };
    get(x0, y0) * (1.0 - fx) * (1.0 - fy)
        + get(x0 + 1.0, y0) * fx * (1.0 - fy)
        + get(x0, y0 + 1.0) * (1.0 - fx) * fy
        + get(x0 + 1.0, y0 + 1.0) * fx * fy
}

/// Checks that the grid resolves the transverse carrier of a beam tilted by `angle`.
pub fn check_tilt_resolved(grid: &GridSpec, angle: f64, wavelength: f64) -> Result<()> {
    if !(angle.is_finite() && angle.abs() < 0.1) {
        return Err(Error::invariant("tilt_angle", "paraxial tilts need |angle| < 0.1 rad"));
    }
    if angle != 0.0 {
        let limit = wavelength / (4.0 * angle.sin().abs());
        if grid.dx >= limit {
            return Err(Error::UnderResolved {
                what: format!("tilt carrier at {:.3} deg", angle.to_degrees()),
                limit,
                dx: grid.dx,
            });
        }
    }
    Ok(())
}

/// Multiplies by the tilt carrier e^{i k sin(angle) x}.
pub fn apply_tilt(field: &FieldPlane, angle: f64, wavelength: f64) -> Result<FieldPlane> {
    check_tilt_resolved(&field.grid, angle, wavelength)?;
    let g = field.grid;
    let kx = 2.0 * PI / wavelength * angle.sin();
    let data = Array2::from_shape_fn(g.shape(), |(i, j)| field.data[[i, j]] * Complex64::from_polar(1.0, kx * g.x(i)));
    Ok(FieldPlane::new(g, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: GridSpec, w0: f64) -> FieldPlane {
        let data = Array2::from_shape_fn(grid.shape(), |(i, j)| {
            let r2 = grid.x(i).powi(2) + grid.y(j).powi(2);
            Complex64::new((-r2 / (w0 * w0)).exp(), 0.0)
        });
        FieldPlane::new(grid, data)
    }

    /// 1/e² intensity radius from the second moment: w = 2·sqrt(<x²>).
    fn second_moment_radius(f: &FieldPlane) -> f64 {
        let g = f.grid;
        let mut num = 0.0;
        let mut den = 0.0;
        for ((i, _), v) in f.data.indexed_iter() {
            num += v.norm_sqr() * g.x(i).powi(2);
            den += v.norm_sqr();
        }
        2.0 * (num / den).sqrt()
    }

    #[test]
    fn zero_distance_is_identity() {
        let g = GridSpec::square(64, 2.6e-3).unwrap();
        let f = gaussian(g, 0.25e-3);
        let out = angular_spectrum_propagate(&f, 0.0, 795e-9).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn gaussian_waist_grows_by_sqrt2_at_rayleigh_range() {
        let g = GridSpec::square(256, 6e-3).unwrap();
        let w0 = 0.25e-3;
        let lambda = 795e-9;
        let zr = PI * w0 * w0 / lambda;
        assert!((zr - 0.247).abs() < 1e-3);
        let f = gaussian(g, w0);
        let out = angular_spectrum_propagate(&f, zr, lambda).unwrap();
        let w = second_moment_radius(&out);
        assert!((w / (w0 * 2f64.sqrt()) - 1.0).abs() < 0.01, "w = {w}");
    }

    #[test]
    fn forward_then_backward_restores() {
        let g = GridSpec::square(64, 2.6e-3).unwrap();
        let f = apply_tilt(&gaussian(g, 0.3e-3), 0.004, 795e-9).unwrap();
        let p = Propagator::new(g);
        let a = p.propagate(&f, 0.1, 795e-9).unwrap();
        let b = p.propagate(&a, -0.1, 795e-9).unwrap();
        let err: f64 = b.data.iter().zip(f.data.iter()).map(|(x, y)| (x - y).norm_sqr()).sum();
        let norm: f64 = f.data.iter().map(|x| x.norm_sqr()).sum();
        assert!((err / norm).sqrt() < 1e-10);
        assert!((a.power() / f.power() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn band_limit_enforced() {
        let g = GridSpec::square(16, 16e-6).unwrap();
        let f = gaussian(g, 4e-6);
        assert!(matches!(angular_spectrum_propagate(&f, 1e-3, 795e-9), Err(Error::BandLimit { .. })));
    }

    #[test]
    fn symmetric_4f_inverts() {
        let g = GridSpec::square(64, 2.6e-3).unwrap();
        let mut data = Array2::from_elem(g.shape(), Complex64::new(0.0, 0.0));
        data[[40, 32]] = Complex64::new(1.0, 0.0);
        let f = FieldPlane::new(g, data);
        let out = image_through_4f(&f, 0.3, 0.3).unwrap();
        // x -> -x around pixel 32
        assert!((out.data[[24, 32]].norm() - 1.0).abs() < 1e-12);
        assert!((out.power() / f.power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn magnification_five_thirds() {
        let g = GridSpec::square(128, 2.6e-3).unwrap();
        let w0 = 0.2e-3;
        let f = gaussian(g, w0);
        let out = image_through_4f(&f, 0.3, 0.5).unwrap();
        let m = second_moment_radius(&out) / second_moment_radius(&f);
        assert!((m - 5.0 / 3.0).abs() < 0.01, "m = {m}");
        assert!((out.power() / f.power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oversized_image_rejected() {
        let g = GridSpec::square(64, 2.6e-3).unwrap();
        let f = gaussian(g, 0.8e-3);
        assert!(matches!(image_through_4f(&f, 0.3, 0.5), Err(Error::ImageOverflow { .. })));
    }

    #[test]
    fn tilt_carrier_period() {
        // λ / sin(0.5°) = 91.10 µm
        let lambda = 795e-9;
        let angle = 0.5f64.to_radians();
        let period = lambda / angle.sin();
        assert!((period - 91.10e-6).abs() < 0.01e-6);
        let g = GridSpec::square(256, 256.0 * 5e-6).unwrap();
        let f = gaussian(g, 0.3e-3);
        let t = apply_tilt(&f, angle, lambda).unwrap();
        for (a, b) in t.data.iter().zip(f.data.iter()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        // phase advance over one period is 2π
        let steps = period / g.dx;
        let kx = 2.0 * PI / lambda * angle.sin();
        assert!((kx * steps * g.dx - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn tilt_round_trip_exact_and_zero_identity() {
        let g = GridSpec::square(64, 64.0 * 5e-6).unwrap();
        let f = gaussian(g, 0.1e-3);
        assert_eq!(apply_tilt(&f, 0.0, 795e-9).unwrap(), f);
        let a = apply_tilt(&f, 0.01, 795e-9).unwrap();
        let b = apply_tilt(&a, -0.01, 795e-9).unwrap();
        for (x, y) in b.data.iter().zip(f.data.iter()) {
            assert!((x - y).norm() <= 1e-15 * y.norm().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn under_resolved_tilt_rejected() {
        let g = GridSpec::square(128, 2.6e-3).unwrap();
        let f = gaussian(g, 0.3e-3);
        // 1.33° needs dx < 8.56 µm; this grid has ~20 µm
        assert!(matches!(
            apply_tilt(&f, 1.33f64.to_radians(), 795e-9),
            Err(Error::UnderResolved { .. })
        ));
    }
}
