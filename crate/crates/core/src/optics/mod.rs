//! Transverse optics: grids, FFT, masks, paraxial propagation and relay imaging.

pub mod fft;
pub mod grid;
pub mod image;
pub mod mask;
pub mod propagate;

pub use fft::Fft2;
pub use grid::GridSpec;
pub use image::{FieldPlane, Image2D};
pub use mask::{make_mask, mask_from_gray, MaskKind, SlitGeometry, MIN_FEATURE_PX};
pub use propagate::{
    angular_spectrum_propagate, apply_tilt, check_tilt_resolved, image_through_4f, Propagator,
    PARAXIAL_LIMIT,
};
