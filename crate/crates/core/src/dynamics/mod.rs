//! Weak-probe Maxwell–Bloch kernel: write, dark storage, and readout on either leg.

mod basis;
pub mod column;
pub mod dense;
mod kernel;
mod mismatch;
mod record;
mod spinwave;

pub use basis::orthonormalize;
pub use kernel::{
    read_out, simulate_sequence, simulate_sequence_with, write_stage, ReadOutcome, SimOptions, WriteOutcome,
    DEFAULT_NZ, MAX_STEP,
};
pub use mismatch::{delta_kz, phase_mismatch_factor};
pub use record::{EnergyLedger, SimRecord, SpinSnapshot};
pub use spinwave::{motional_factor, spin_wave_decay, ChannelSpin, SpinMode, SpinWaveState};
