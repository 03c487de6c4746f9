//! Physical constants (CODATA 2018) and ⁸⁵Rb line data.

use std::f64::consts::PI;

pub const C: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const KB: f64 = 1.380_649e-23;

/// ⁸⁵Rb atomic mass (kg).
pub const RB85_MASS: f64 = 1.409_993_199e-25;

/// Reduced dipole matrix elements (C·m) of the D1 (795 nm) and D2 (780 nm) lines.
pub const RB_D1_DIPOLE: f64 = 2.537e-29;
pub const RB_D2_DIPOLE: f64 = 3.584e-29;

pub const LAMBDA_D1: f64 = 795e-9;
pub const LAMBDA_D2: f64 = 780e-9;

/// Natural linewidths (rad/s).
pub const GAMMA_D1: f64 = 2.0 * PI * 6.0e6;
pub const GAMMA_D2: f64 = 2.0 * PI * 6.0e6;

/// ⁸⁵Rb ground hyperfine splitting (rad/s).
pub const DELTA_HF_RB85: f64 = 2.0 * PI * 3.0378e9;
