use crate::dynamics::SimRecord;
use crate::error::{Error, Result};
use crate::model::{Channel, ProbeField};

/// Reported in place of −∞ dB when the undriven channel is exactly dark.
pub const CROSSTALK_FLOOR_DB: f64 = -999.0;

/// Photon-number ratio of `output` to `input`.
pub fn efficiency(output: &ProbeField, input: &ProbeField) -> Result<f64> {
    if output.grid != input.grid {
        return Err(Error::Metric("efficiency: fields are on different grids".into()));
    }
    let n_in = input.photons();
    if n_in.is_nan() || n_in <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(output.photons() / n_in)
}

/// 10·log₁₀ of retrieved energy in the undriven channel over the driven one.
pub fn crosstalk(record: &SimRecord, driven: Channel) -> Result<f64> {
    let other = driven.other();
    if record.ledger(other).input > 0.0 {
        return Err(Error::Metric("crosstalk: both channels are driven".into()));
    }
    let e_driven = record.ledger(driven).retrieved;
    let e_other = record.ledger(other).retrieved;
    if e_driven.is_nan() || e_driven <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    if e_other == 0.0 {
        return Ok(CROSSTALK_FLOOR_DB);
    }
    Ok(10.0 * (e_other / e_driven).log10())
}
