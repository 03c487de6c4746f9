use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::scheme::ReadLeg;
use crate::error::{Error, Result};

/// A flat-top control pulse with raised-cosine edges of duration `ramp`.
///
/// The pulse is exactly zero before `t_on` and after `t_off + ramp`, so two
/// pulses with disjoint supports never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPulse {
    /// Peak Rabi frequency (rad/s).
    pub rabi: f64,
    pub t_on: f64,
    pub t_off: f64,
    pub ramp: f64,
}

impl ControlPulse {
    pub fn eval(&self, t: f64) -> f64 {
        let rise = edge((t - self.t_on) / self.ramp);
        let fall = 1.0 - edge((t - self.t_off) / self.ramp);
        self.rabi * rise * fall
    }

    pub fn support(&self) -> (f64, f64) {
        (self.t_on, self.t_off + self.ramp)
    }
}

fn edge(x: f64) -> f64 {
    if x.is_nan() {
        // ramp = 0 and t exactly on the edge
        1.0
    } else if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        0.5 * (1.0 - (PI * x).cos())
    }
}

/// Ω(t) as a sum of pulses; empty means the control is dark.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlProfile {
    pub pulses: Vec<ControlPulse>,
}

impl ControlProfile {
    pub fn dark() -> Self {
        ControlProfile { pulses: Vec::new() }
    }

    pub fn single(pulse: ControlPulse) -> Self {
        ControlProfile { pulses: vec![pulse] }
    }

    /// Held on at `rabi` for all times.
    pub fn constant(rabi: f64) -> Self {
        ControlProfile::single(ControlPulse {
            rabi,
            t_on: f64::NEG_INFINITY,
            t_off: f64::INFINITY,
            ramp: 1.0,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.pulses.iter().map(|p| p.eval(t)).sum()
    }

    pub fn is_dark(&self) -> bool {
        self.pulses.iter().all(|p| p.rabi == 0.0)
    }

    /// Pulse area ∫Ω dt (rad).
    pub fn area(&self) -> f64 {
        self.pulses
            .iter()
            .map(|p| p.rabi * (p.t_off - p.t_on))
            .sum()
    }

    fn support(&self) -> Option<(f64, f64)> {
        self.pulses
            .iter()
            .filter(|p| p.rabi != 0.0)
            .map(ControlPulse::support)
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    fn validate(&self, name: &str) -> Result<()> {
        for p in &self.pulses {
            if !p.rabi.is_finite() || p.rabi < 0.0 {
                return Err(Error::invariant(name, "Rabi frequency must be finite and >= 0"));
            }
            if p.ramp.is_nan() || p.ramp < 0.0 || p.t_off < p.t_on {
                return Err(Error::invariant(name, "pulse needs t_on <= t_off and ramp >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSchedule {
    pub omega_write: ControlProfile,
    pub omega_read: ControlProfile,
    pub read_leg: ReadLeg,
    /// Angle between the write control and the probe-1 axis (rad).
    pub write_angle_alpha: f64,
    /// Angle between the read control and the probe-1 axis (rad).
    pub read_angle: f64,
    pub dark_time: f64,
}

impl ControlSchedule {
    /// Checks the schedule against itself and against `timing`.
    pub fn validate(&self, timing: &TimingSequence) -> Result<()> {
        self.omega_write.validate("omega_write")?;
        self.omega_read.validate("omega_read")?;
        if self.dark_time.is_nan() || self.dark_time < 0.0 {
            return Err(Error::invariant("dark_time", "must be >= 0"));
        }
        let dark = timing.t_read_on - timing.t_write_off;
        if (dark - self.dark_time).abs() > 1e-12_f64.max(1e-9 * self.dark_time) {
            return Err(Error::invariant(
                "dark_time",
                format!("t_read_on - t_write_off = {dark:e} s but dark_time = {:e} s", self.dark_time),
            ));
        }
        for (name, a) in [("write_angle_alpha", self.write_angle_alpha), ("read_angle", self.read_angle)] {
            if !(a.is_finite() && a.abs() < 0.1) {
                return Err(Error::invariant(name, "paraxial angles need |angle| < 0.1 rad"));
            }
        }
        if let (Some(w), Some(r)) = (self.omega_write.support(), self.omega_read.support()) {
            if w.1 > r.0 && r.1 > w.0 {
                return Err(Error::invariant(
                    "control_overlap",
                    "write and read controls must never be on at the same time",
                ));
            }
        }
        if let Some(r) = self.omega_read.support() {
            if r.0 < timing.t_write_end {
                return Err(Error::invariant("omega_read", "read pulses must start after the write window"));
            }
        }
        if let Some(w) = self.omega_write.support() {
            if w.1 > timing.t_read_on {
                return Err(Error::invariant("omega_write", "write control still on at t_read_on"));
            }
        }
        Ok(())
    }
}

/// Time windows of one store/retrieve cycle (seconds).
///
/// The write window `[t_write_start, t_write_end]` and the read window
/// `[t_read_on, t_end]` are integrated; the remainder of the dark interval is
/// applied analytically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingSequence {
    pub t_write_start: f64,
    pub t_write_off: f64,
    pub t_write_end: f64,
    pub t_read_on: f64,
    pub t_end: f64,
    pub dtau: f64,
}

/// A uniform time axis `t0 + n·dtau`, `n = 0..nt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dtau: f64,
    pub nt: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, dtau: f64) -> Self {
        let steps = ((t1 - t0) / dtau - 1e-9).ceil().max(1.0) as usize;
        TimeGrid { t0, dtau, nt: steps + 1 }
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 * self.dtau
    }

    pub fn t_last(&self) -> f64 {
        self.time(self.nt - 1)
    }

    /// The `nt − 1` interval midpoints.
    pub fn midpoints(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0 + 0.5 * self.dtau,
            dtau: self.dtau,
            nt: self.nt - 1,
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nt).map(|n| self.time(n))
    }
}

impl TimingSequence {
    pub fn validate(&self) -> Result<()> {
        let ts = [self.t_write_start, self.t_write_off, self.t_write_end, self.t_read_on, self.t_end];
        if ts.iter().any(|t| !t.is_finite()) {
            return Err(Error::invariant("timing", "times must be finite"));
        }
        if !(self.t_write_start < self.t_write_off
            && self.t_write_off <= self.t_write_end
            && self.t_write_end <= self.t_read_on
            && self.t_read_on < self.t_end)
        {
            return Err(Error::invariant(
                "timing",
                "need t_write_start < t_write_off <= t_write_end <= t_read_on < t_end",
            ));
        }
        if !(self.dtau.is_finite() && self.dtau > 0.0) {
            return Err(Error::invariant("dtau", "must be > 0"));
        }
        Ok(())
    }

    pub fn dark_time(&self) -> f64 {
        self.t_read_on - self.t_write_off
    }

    pub fn write_grid(&self) -> TimeGrid {
        TimeGrid::new(self.t_write_start, self.t_write_end, self.dtau)
    }

    pub fn read_grid(&self) -> TimeGrid {
        TimeGrid::new(self.t_read_on, self.t_end, self.dtau)
    }

    /// Interval midpoints of the write window; probe and leak traces live here.
    pub fn write_samples(&self) -> TimeGrid {
        self.write_grid().midpoints()
    }

    /// Interval midpoints of the read window.
    pub fn read_samples(&self) -> TimeGrid {
        self.read_grid().midpoints()
    }

    /// Total number of integrated samples.
    pub fn nt(&self) -> usize {
        self.write_grid().nt + self.read_grid().nt
    }
}
