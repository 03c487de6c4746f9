pub mod constants;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod optics;
pub mod scenario;

pub use error::{Error, Result};
