#![allow(dead_code)]

use eitmem::dynamics::*;
use eitmem::model::*;
use eitmem::optics::*;

pub fn gamma4() -> f64 {
    LevelScheme::rb85().gamma4
}

pub fn model(od: f64, gamma_s: f64) -> ValidatedModel {
    let mut s = LevelScheme::rb85();
    s.gamma_s = gamma_s;
    let m = MediumParams {
        od1: od,
        od2: od,
        od_conv: od,
        ..MediumParams::default()
    };
    validate_scheme(s, m).unwrap()
}

pub fn probe(
    mask: MaskKind,
    channel: Channel,
    tilt: f64,
    pulse: GaussianPulse,
    grid: &GridSpec,
    m: &ValidatedModel,
    nodes: &TimeGrid,
) -> ProbeField {
    let spec = ProbeSpec {
        mask,
        channel,
        tilt,
        photons: 1e4,
        pulse,
    };
    build_probe(&spec, grid, m, &nodes.midpoints()).unwrap()
}

/// Peak time of a sampled trace with parabolic refinement.
pub fn peak_time(p: &[f64], t: &TimeGrid) -> f64 {
    let k = (0..p.len()).fold(0, |a, i| if p[i] > p[a] { i } else { a });
    let (a, b, c) = (p[k - 1], p[k], p[k + 1]);
    t.time(k) + 0.5 * (a - c) / (a - 2.0 * b + c) * t.dtau
}

/// A store/retrieve cycle with a Gaussian probe centred at 2·fwhm, the write
/// control switched off at `center + off·fwhm` and a read pulse after `dark`.
pub struct Cycle {
    pub fwhm: f64,
    pub off: f64,
    pub rabi: f64,
    pub dark: f64,
    pub leg: ReadLeg,
    pub angle: f64,
}

impl Cycle {
    pub fn new(fwhm: f64, off: f64, rabi: f64) -> Self {
        Cycle {
            fwhm,
            off,
            rabi,
            dark: 1e-6,
            leg: ReadLeg::R795,
            angle: 0.0,
        }
    }

    pub fn pulse(&self) -> GaussianPulse {
        GaussianPulse {
            center: 2.0 * self.fwhm,
            fwhm: self.fwhm,
        }
    }

    pub fn parts(&self) -> (ControlSchedule, TimingSequence) {
        let ramp = 0.1e-6;
        let t_off = self.pulse().center + self.off * self.fwhm;
        let t_read = t_off + self.dark;
        let timing = TimingSequence {
            t_write_start: 0.0,
            t_write_off: t_off,
            t_write_end: t_off,
            t_read_on: t_read,
            t_end: t_read + 4e-6,
            dtau: 0.05 / gamma4(),
        };
        let write = ControlPulse {
            rabi: self.rabi,
            t_on: -1.0,
            t_off: t_off - ramp,
            ramp,
        };
        let read = ControlPulse {
            rabi: self.rabi,
            t_on: t_read,
            t_off: t_read + 3e-6,
            ramp,
        };
        let controls = ControlSchedule {
            omega_write: ControlProfile::single(write),
            omega_read: ControlProfile::single(read),
            read_leg: self.leg,
            write_angle_alpha: self.angle,
            read_angle: self.angle,
            dark_time: self.dark,
        };
        (controls, timing)
    }

    pub fn run(&self, probes: &[ProbeField], m: &ValidatedModel, nz: usize) -> eitmem::Result<SimRecord> {
        let (c, t) = self.parts();
        simulate_sequence_with(probes, &c, m, &t, &SimOptions { nz })
    }

    pub fn write_nodes(&self) -> TimeGrid {
        self.parts().1.write_grid()
    }
}
