use ndarray::Array2;
use num_complex::Complex64;

use super::camera::CameraModel;
use crate::error::{Error, Result};
use crate::model::ProbeField;
use crate::optics::{GridSpec, Image2D, SlitGeometry};

fn nearest_column(grid: &GridSpec, x: f64) -> Option<usize> {
    let ix = (x / grid.dx + (grid.nx / 2) as f64).round();
    (ix >= 0.0 && ix < grid.nx as f64).then_some(ix as usize)
}

fn mean_at(image: &Image2D<f64>, xs: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &x in xs {
        let ix = nearest_column(&image.grid, x)
            .ok_or_else(|| Error::Metric(format!("visibility: position {x:.3e} m is off the grid")))?;
        sum += image.data.row(ix).mean().unwrap_or(0.0);
    }
    Ok(sum / xs.len() as f64)
}

/// Slit contrast (Ī_max − Ī_min)/(Ī_max + Ī_min): Ī_max averages the slit-centre
/// lines and Ī_min the gap-centre lines (slits run along y, spaced along x).
pub fn visibility(image: &Image2D<f64>, geometry: &SlitGeometry) -> Result<f64> {
    if image.data.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::Metric("visibility: image must be non-negative".into()));
    }
    let gaps = geometry.gap_centers();
    if gaps.is_empty() {
        return Err(Error::Metric("visibility: slit geometry has no gaps".into()));
    }
    let hi = mean_at(image, &geometry.centers)?;
    let lo = mean_at(image, &gaps)?;
    if hi + lo == 0.0 {
        return Ok(0.0);
    }
    Ok(((hi - lo) / (hi + lo)).clamp(0.0, 1.0))
}

/// Normalized overlap Σab/√(Σa²·Σb²) of two intensity images.
pub fn correlation(a: &Image2D<f64>, b: &Image2D<f64>) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::Metric("correlation: images are on different grids".into()));
    }
    let ab: f64 = a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum();
    let aa: f64 = a.data.iter().map(|x| x * x).sum();
    let bb: f64 = b.data.iter().map(|x| x * x).sum();
    if aa == 0.0 || bb == 0.0 {
        return Ok(0.0);
    }
    Ok((ab / (aa * bb).sqrt()).clamp(0.0, 1.0))
}

/// ⟨e^{iΔω t}⟩ over an exposure of length `t`.
fn beat_average(dw: f64, t: f64) -> Complex64 {
    let x = dw * t;
    if x.abs() < 1e-9 {
        Complex64::new(1.0, 0.0)
    } else {
        (Complex64::new(0.0, x).exp() - 1.0) / Complex64::new(0.0, x)
    }
}

/// Exposure-integrated intensity of overlapping fields, Σ_n |Σ_j E_j e^{iΔω_j t}|²·dτ,
/// with each cross term weighted by its beat average over the exposure.
pub fn interference_image(fields: &[ProbeField], camera: &CameraModel) -> Result<Image2D<f64>> {
    let first = fields.first().ok_or_else(|| Error::Metric("interference: no fields".into()))?;
    for f in fields {
        if f.grid != first.grid || f.time != first.time {
            return Err(Error::Metric("interference: fields must share grid and time axis".into()));
        }
    }
    let mut out = Array2::<f64>::zeros(first.grid.shape());
    let dense: Vec<_> = fields.iter().map(|f| f.to_dense()).collect();
    for (j, a) in dense.iter().enumerate() {
        for (k, b) in dense.iter().enumerate().skip(j) {
            let dw = fields[j].frequency_offset - fields[k].frequency_offset;
            if dw != 0.0 && camera.exposure * dw.abs() < 2.0 * std::f64::consts::PI {
                return Err(Error::Metric("interference: exposure shorter than one beat period".into()));
            }
            let avg = beat_average(dw, camera.exposure);
            for ((ix, iy), v) in out.indexed_iter_mut() {
                let mut s = Complex64::new(0.0, 0.0);
                for n in 0..first.time.nt {
                    s += a[[ix, iy, n]] * b[[ix, iy, n]].conj();
                }
                *v += if j == k { s.re } else { 2.0 * (s * avg).re } * first.time.dtau;
            }
        }
    }
    Ok(Image2D::new(first.grid, out))
}

/// Fringe contrast along x: (max − min)/(max + min) of the column sums over the
/// central half of the grid in both directions.
pub fn interference_contrast(fields: &[ProbeField], camera: &CameraModel) -> Result<f64> {
    let img = interference_image(fields, camera)?;
    let (nx, ny) = img.grid.shape();
    let profile: Vec<f64> = (nx / 4..3 * nx / 4)
        .map(|ix| (ny / 4..3 * ny / 4).map(|iy| img.data[[ix, iy]]).sum())
        .collect();
    let max = profile.iter().cloned().fold(f64::MIN, f64::max);
    let min = profile.iter().cloned().fold(f64::MAX, f64::min);
    if max + min <= 0.0 {
        return Ok(0.0);
    }
    Ok(((max - min) / (max + min)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{make_mask, MaskKind};

    #[test]
    fn binary_and_uniform_visibility() {
        let grid = GridSpec::square(128, 2.56e-3).unwrap();
        let kind = MaskKind::ThreeSlit { width: 0.2e-3, pitch: 0.5e-3 };
        let m = make_mask(&kind, &grid).unwrap();
        let g = kind.slit_geometry().unwrap();
        assert_eq!(visibility(&m, &g).unwrap(), 1.0);
        let u = make_mask(&MaskKind::Uniform, &grid).unwrap();
        assert_eq!(visibility(&u, &g).unwrap(), 0.0);
        let mut off = m.clone();
        off.data.mapv_inplace(|v| v + 0.1);
        assert!(visibility(&off, &g).unwrap() < 1.0);
    }

    #[test]
    fn degenerate_geometry_rejected() {
        let grid = GridSpec::square(16, 1e-3).unwrap();
        let g = SlitGeometry { centers: vec![0.0], width: 1e-4 };
        assert!(visibility(&Image2D::zeros(grid), &g).is_err());
    }

    #[test]
    fn correlation_bounds() {
        let grid = GridSpec::square(16, 1e-3).unwrap();
        let a = Image2D::new(grid, Array2::from_shape_fn((16, 16), |(i, j)| (i * j) as f64));
        assert!((correlation(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let mut b = a.clone();
        b.data.mapv_inplace(|v| 3.0 * v);
        assert!((correlation(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }
}
