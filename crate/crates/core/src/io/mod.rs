//! File formats: binary PGM images.

mod pgm;

pub use pgm::{read_pgm, write_pgm16, Pgm};
