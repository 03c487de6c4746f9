use ndarray::Array2;
use num_complex::Complex64;
use num_traits::Zero;

use super::grid::GridSpec;

/// A sampled transverse plane: real for intensities and masks, complex for fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D<T> {
    pub grid: GridSpec,
    pub data: Array2<T>,
}

pub type FieldPlane = Image2D<Complex64>;

impl<T: Clone + Zero> Image2D<T> {
    pub fn zeros(grid: GridSpec) -> Self {
        Image2D {
            grid,
            data: Array2::from_elem(grid.shape(), T::zero()),
        }
    }
}

impl<T> Image2D<T> {
    pub fn new(grid: GridSpec, data: Array2<T>) -> Self {
        assert_eq!(data.dim(), grid.shape(), "image data does not match its grid");
        Image2D { grid, data }
    }
}

impl Image2D<f64> {
    /// Promotes a real amplitude to a complex field.
    pub fn to_field(&self) -> FieldPlane {
        Image2D::new(self.grid, self.data.mapv(|v| Complex64::new(v, 0.0)))
    }

    pub fn total(&self) -> f64 {
        self.data.sum()
    }

    /// Rescales to unit sum; a zero image stays zero.
    pub fn normalized(&self) -> Image2D<f64> {
        let s = self.total();
        if s > 0.0 {
            Image2D::new(self.grid, self.data.mapv(|v| v / s))
        } else {
            self.clone()
        }
    }
}

impl FieldPlane {
    /// Σ|E|²·dx·dy.
    pub fn power(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.pixel_area()
    }

    pub fn intensity(&self) -> Image2D<f64> {
        Image2D::new(self.grid, self.data.mapv(|z| z.norm_sqr()))
    }

    pub fn scaled(&self, s: Complex64) -> FieldPlane {
        Image2D::new(self.grid, self.data.mapv(|z| z * s))
    }
}
