use serde::Serialize;

use crate::model::{Channel, ProbeField, ReadLeg};

use super::spinwave::SpinWaveState;

/// Photon bookkeeping of one channel over a full store/retrieve cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub input: f64,
    pub leaked: f64,
    pub retrieved: f64,
    pub absorbed: f64,
    /// Excitation left in the medium at the end of the read window.
    pub residual: f64,
}

impl EnergyLedger {
    /// |input − (leaked + retrieved + absorbed + residual)| / input; zero for a null input.
    pub fn closure_error(&self) -> f64 {
        if self.input == 0.0 {
            return (self.leaked + self.retrieved + self.absorbed + self.residual).abs();
        }
        (self.input - (self.leaked + self.retrieved + self.absorbed + self.residual)).abs() / self.input
    }

    pub fn eta_leak(&self) -> f64 {
        if self.input > 0.0 {
            self.leaked / self.input
        } else {
            0.0
        }
    }

    pub fn eta_ret(&self) -> f64 {
        if self.input > 0.0 {
            self.retrieved / self.input
        } else {
            0.0
        }
    }
}

/// Stored-excitation photons of each channel at time `t` (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinSnapshot {
    pub t: f64,
    pub photons: [f64; 2],
}

/// Everything a store/retrieve simulation produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub read_leg: ReadLeg,
    /// Light leaving the medium during the write window, per channel.
    pub transmitted: [ProbeField; 2],
    /// Light emitted during the read window, per channel.
    pub retrieved: [ProbeField; 2],
    /// Spin wave at the end of the write window, before the dark interval.
    pub stored: SpinWaveState,
    pub spinwave_snapshots: Vec<SpinSnapshot>,
    pub energy_ledger: [EnergyLedger; 2],
}

impl SimRecord {
    pub fn ledger(&self, c: Channel) -> &EnergyLedger {
        &self.energy_ledger[c.index()]
    }

    pub fn transmitted(&self, c: Channel) -> &ProbeField {
        &self.transmitted[c.index()]
    }

    pub fn retrieved(&self, c: Channel) -> &ProbeField {
        &self.retrieved[c.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closure_and_ratios() {
        let l = EnergyLedger {
            input: 10.0,
            leaked: 2.0,
            retrieved: 5.0,
            absorbed: 2.5,
            residual: 0.5,
        };
        assert_eq!(l.closure_error(), 0.0);
        assert_eq!(l.eta_leak(), 0.2);
        assert_eq!(l.eta_ret(), 0.5);
        assert_eq!(EnergyLedger::default().eta_ret(), 0.0);
    }
}
