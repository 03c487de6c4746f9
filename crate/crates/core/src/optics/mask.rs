use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;
use super::image::Image2D;
use crate::error::{Error, Result};

/// Smallest feature, in pixels, a mask may contain.
pub const MIN_FEATURE_PX: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub enum MaskKind {
    /// Three slits parallel to y, spanning the full grid height, centred on x = 0.
    ThreeSlit { width: f64, pitch: f64 },
    /// The digit "2" rasterized from a 5×7 cell font; `height` is the glyph height.
    DigitTwo { height: f64 },
    /// A USAF-style element: a vertical and a horizontal triplet of bars of width `bar`.
    BarTarget { bar: f64 },
    Uniform,
    /// Arbitrary binary mask (e.g. loaded from PGM), already on the grid.
    Custom(Array2<f64>),
}

/// Slit centres along the measurement axis, for the visibility estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlitGeometry {
    pub centers: Vec<f64>,
    pub width: f64,
}

impl SlitGeometry {
    pub fn three_slit(width: f64, pitch: f64) -> Self {
        SlitGeometry {
            centers: vec![-pitch, 0.0, pitch],
            width,
        }
    }

    /// Mid-points between neighbouring slits.
    pub fn gap_centers(&self) -> Vec<f64> {
        self.centers.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Geometry seen after an imaging system of (signed) magnification `m`.
    pub fn magnified(&self, m: f64) -> Self {
        let mut centers: Vec<f64> = self.centers.iter().map(|c| c * m).collect();
        centers.sort_by(f64::total_cmp);
        SlitGeometry {
            centers,
            width: self.width * m.abs(),
        }
    }
}

impl MaskKind {
    pub fn slit_geometry(&self) -> Option<SlitGeometry> {
        match self {
            MaskKind::ThreeSlit { width, pitch } => Some(SlitGeometry::three_slit(*width, *pitch)),
            _ => None,
        }
    }
}

fn check_feature(grid: &GridSpec, name: &str, size: f64) -> Result<()> {
    let px = size / grid.dx.max(grid.dy);
    if !(size.is_finite() && px >= MIN_FEATURE_PX) {
        return Err(Error::UnderResolved {
            what: format!("{name} feature of {size:.3e} m"),
            limit: size / MIN_FEATURE_PX,
            dx: grid.dx.max(grid.dy),
        });
    }
    Ok(())
}

// 5×7 glyph of "2", top row first.
const DIGIT_TWO: [&str; 7] = [".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"];

/// Renders a binary {0, 1} mask.
pub fn make_mask(kind: &MaskKind, grid: &GridSpec) -> Result<Image2D<f64>> {
    let g = *grid;
    let mut m = Array2::<f64>::zeros(g.shape());
    match kind {
        MaskKind::Uniform => m.fill(1.0),
        MaskKind::ThreeSlit { width, pitch } => {
            check_feature(&g, "slit width", *width)?;
            check_feature(&g, "slit gap", pitch - width)?;
            if 2.0 * pitch + width > g.extent_x() {
                return Err(Error::invariant("three_slit", "slits do not fit the grid"));
            }
            for c in [-pitch, 0.0, *pitch] {
                for ix in 0..g.nx {
                    let x = g.x(ix);
                    if x >= c - 0.5 * width && x < c + 0.5 * width {
                        m.row_mut(ix).fill(1.0);
                    }
                }
            }
        }
        MaskKind::DigitTwo { height } => {
            let cell = height / 7.0;
            check_feature(&g, "digit stroke", cell)?;
            let (w, h) = (5.0 * cell, 7.0 * cell);
            if w > g.extent_x() || h > g.extent_y() {
                return Err(Error::invariant("digit_two", "glyph does not fit the grid"));
            }
            for ((ix, iy), v) in m.indexed_iter_mut() {
                let (x, y) = (g.x(ix) + 0.5 * w, 0.5 * h - g.y(iy));
                if x < 0.0 || y < 0.0 || x >= w || y >= h {
                    continue;
                }
                let (col, row) = ((x / cell) as usize, (y / cell) as usize);
                if DIGIT_TWO[row].as_bytes()[col] == b'#' {
                    *v = 1.0;
                }
            }
        }
        MaskKind::BarTarget { bar } => {
            check_feature(&g, "bar", *bar)?;
            let b = *bar;
            let len = 5.0 * b;
            // vertical triplet on the left, horizontal triplet on the right, separated by 2b
            let total = 5.0 * b + 2.0 * b + 5.0 * b;
            if total > g.extent_x() || len > g.extent_y() {
                return Err(Error::invariant("bar_target", "target does not fit the grid"));
            }
            let x0 = -0.5 * total;
            for ((ix, iy), v) in m.indexed_iter_mut() {
                let (x, y) = (g.x(ix) - x0, g.y(iy) + 0.5 * len);
                if y < 0.0 || y >= len {
                    continue;
                }
                let on = if (0.0..5.0 * b).contains(&x) {
                    ((x / b) as usize).is_multiple_of(2)
                } else if (7.0 * b..12.0 * b).contains(&x) {
                    ((y / b) as usize).is_multiple_of(2)
                } else {
                    false
                };
                if on {
                    *v = 1.0;
                }
            }
        }
        MaskKind::Custom(data) => {
            if data.dim() != g.shape() {
                return Err(Error::invariant(
                    "custom_mask",
                    format!("mask is {:?}, grid is {:?}", data.dim(), g.shape()),
                ));
            }
            m = data.mapv(|v| if v >= 0.5 { 1.0 } else { 0.0 });
        }
    }
    Ok(Image2D::new(g, m))
}

/// Binarizes an 8-bit grey image at threshold 128 and resamples it onto `grid`
/// by nearest neighbour.
pub fn mask_from_gray(pixels: &Array2<u16>, maxval: u16, grid: &GridSpec) -> Array2<f64> {
    let (w, h) = pixels.dim();
    let threshold = if maxval == 255 { 128.0 } else { 128.0 * f64::from(maxval) / 255.0 };
    Array2::from_shape_fn(grid.shape(), |(ix, iy)| {
        let sx = ((ix as f64 + 0.5) * w as f64 / grid.nx as f64) as usize;
        let sy = ((iy as f64 + 0.5) * h as f64 / grid.ny as f64) as usize;
        if f64::from(pixels[[sx.min(w - 1), sy.min(h - 1)]]) >= threshold {
            1.0
        } else {
            0.0
        }
    })
}
