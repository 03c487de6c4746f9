//! Physical data model: level scheme, medium, probe fields, control timing, and parameter helpers.

mod field;
mod probe;
mod schedule;
mod scheme;

pub use field::{photon_flux_weight, FieldTerm, ProbeField};
pub use probe::{build_probe, combine, GaussianPulse, ProbeSpec};
pub use schedule::{ControlProfile, ControlPulse, ControlSchedule, TimeGrid, TimingSequence};
pub use scheme::{
    optical_depth_from_atoms, rabi_from_power, validate_scheme, Channel, DensityProfile, Detunings, Level,
    LevelScheme, MediumParams, ReadLeg, ValidatedModel,
};
