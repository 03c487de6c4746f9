//! Observables computed from simulation records: efficiencies, image contrast,
//! crosstalk and shot-noise camera frames.

mod camera;
mod contrast;
mod energy;
mod report;

pub use camera::{camera_render, counts_to_pgm, index_of_dispersion, CameraModel};
pub use contrast::{correlation, interference_contrast, interference_image, visibility};
pub use energy::{crosstalk, efficiency, CROSSTALK_FLOOR_DB};
pub use report::MetricsReport;
