use std::f64::consts::PI;
use std::path::Path;

use ndarray::Array2;

use super::config::{MaskConfig, Scenario};
use crate::dynamics::SimOptions;
use crate::error::{Error, Result};
use crate::io::read_pgm;
use crate::metrics::CameraModel;
use crate::model::{
    validate_scheme, ControlProfile, ControlPulse, ControlSchedule, Detunings, GaussianPulse, LevelScheme,
    MediumParams, ProbeSpec, TimingSequence, ValidatedModel,
};
use crate::optics::{mask_from_gray, GridSpec, MaskKind};

/// A scenario resolved into SI module inputs.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: ValidatedModel,
    pub grid: GridSpec,
    pub probes: Vec<ProbeSpec>,
    pub controls: ControlSchedule,
    pub timing: TimingSequence,
    pub camera: CameraModel,
    pub options: SimOptions,
    pub lens_f1: f64,
    pub lens_f2: f64,
}

// validate_scheme reports field names; configs speak in keys.
const MODEL_KEYS: [(&str, &str); 15] = [
    ("lambda_p1", "lambda_p1_nm"),
    ("lambda_p2", "lambda_p2_nm"),
    ("lambda_conv", "lambda_conv_nm"),
    ("gamma4", "gamma4_mhz"),
    ("gamma5", "gamma5_mhz"),
    ("gamma_s", "gamma_s_khz"),
    ("delta_hf", "delta_hf_ghz"),
    ("length_l", "length_mm"),
    ("transverse_extent", "transverse_mm"),
    ("atom_number", "atom_number"),
    ("od1", "od1"),
    ("od2", "od2"),
    ("od_conv", "od_conv"),
    ("pop2", "pop2"),
    ("temperature", "temperature_uk"),
];

fn model_key(name: &str) -> String {
    let key = match name {
        "pop3" => "pop3",
        "probe_detuning" => "probe_detuning_mhz",
        "two_photon_detuning" => "two_photon_detuning_khz",
        "read_detuning" => "read_detuning_mhz",
        _ => MODEL_KEYS.iter().find(|(f, _)| *f == name).map_or(name, |(_, k)| k),
    };
    format!("model.{key}")
}

fn mask_kind(m: &MaskConfig, grid: &GridSpec) -> Result<MaskKind> {
    Ok(match m {
        MaskConfig::ThreeSlit { width_mm, pitch_mm } => MaskKind::ThreeSlit {
            width: width_mm * 1e-3,
            pitch: pitch_mm * 1e-3,
        },
        MaskConfig::DigitTwo { height_mm } => MaskKind::DigitTwo { height: height_mm * 1e-3 },
        MaskConfig::BarTarget { bar_mm } => MaskKind::BarTarget { bar: bar_mm * 1e-3 },
        MaskConfig::Uniform => MaskKind::Uniform,
        MaskConfig::Custom { file } => {
            let pgm = read_pgm(Path::new(file))?;
            // PGM rows run top to bottom; the grid's y axis points up.
            let px = Array2::from_shape_fn((pgm.width, pgm.height), |(x, y)| {
                pgm.pixels[(pgm.height - 1 - y) * pgm.width + x]
            });
            MaskKind::Custom(mask_from_gray(&px, pgm.maxval, grid))
        }
    })
}

impl Scenario {
    /// Checks every invariant that needs more than one key.
    pub fn validate(&self) -> Result<()> {
        self.resolve_static().map(|_| ())
    }

    pub fn model(&self) -> Result<ValidatedModel> {
        let m = &self.model;
        let mhz = 2.0 * PI * 1e6;
        let scheme = LevelScheme {
            lambda_p1: m.lambda_p1_nm * 1e-9,
            lambda_p2: m.lambda_p2_nm * 1e-9,
            lambda_conv: m.lambda_conv_nm * 1e-9,
            gamma4: m.gamma4_mhz * mhz,
            gamma5: m.gamma5_mhz * mhz,
            gamma_s: m.gamma_s_khz * 2.0 * PI * 1e3,
            delta_hf: m.delta_hf_ghz * 2.0 * PI * 1e9,
        };
        let medium = MediumParams {
            length_l: m.length_mm * 1e-3,
            transverse_extent: m.transverse_mm * 1e-3,
            atom_number: m.atom_number,
            density_profile: m.density_profile,
            od1: m.od1,
            od2: m.od2,
            od_conv: m.od_conv,
            pop2: m.pop2,
            pop3: m.pop3,
            temperature: m.temperature_uk.map(|t| t * 1e-6),
        };
        let detunings = Detunings {
            probe: m.probe_detuning_mhz * mhz,
            two_photon: m.two_photon_detuning_khz * 2.0 * PI * 1e3,
            read_conv: m.read_detuning_mhz * mhz,
        };
        let rename = |e: Error| match e {
            Error::Invariant { name, detail } => Error::Invariant { name: model_key(&name), detail },
            e => e,
        };
        validate_scheme(scheme, medium)
            .and_then(|v| v.with_detunings(detunings))
            .map_err(rename)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let g = GridSpec::square(self.grid.n, self.grid.extent_mm * 1e-3).map_err(|e| match e {
            Error::Invariant { detail, .. } => Error::invariant("grid.n", detail),
            e => e,
        })?;
        g.check_covers(self.model.transverse_mm * 1e-3)
            .map_err(|e| match e {
                Error::Invariant { detail, .. } => Error::invariant("grid.extent_mm", detail),
                e => e,
            })?;
        Ok(g)
    }

    /// Everything except masks loaded from files.
    fn resolve_static(&self) -> Result<(ValidatedModel, GridSpec, ControlSchedule, TimingSequence)> {
        let model = self.model()?;
        let grid = self.grid_spec()?;
        let g4 = model.scheme().gamma4;
        let us = 1e-6;
        let c = &self.control;
        let ramp = c.ramp_us * us;
        let pulses: Vec<GaussianPulse> = self
            .probes
            .iter()
            .map(|p| GaussianPulse {
                center: p.center_us * us,
                fwhm: p.fwhm_us * us,
            })
            .collect();
        let write_off = self.timing.write_off_us.map_or(pulses[0].center, |v| v * us);
        if write_off <= ramp {
            return Err(Error::invariant("timing.write_off_us", "write control must stay on for longer than one ramp"));
        }
        let tail = pulses.iter().map(|p| p.tail_end()).fold(write_off, f64::max);
        let t_read_on = write_off + self.timing.dark_time_us * us;
        if t_read_on < tail {
            return Err(Error::invariant(
                "timing.dark_time_us",
                format!("read starts at {:.3} us, before the probe tail has passed ({:.3} us)", t_read_on / us, tail / us),
            ));
        }
        let write = if c.write_rabi_mhz > 0.0 {
            ControlProfile::single(ControlPulse {
                rabi: c.write_rabi_mhz * 2.0 * PI * 1e6,
                t_on: -ramp,
                t_off: write_off - ramp,
                ramp,
            })
        } else {
            ControlProfile::dark()
        };
        let mut read = Vec::new();
        let mut t = t_read_on;
        for d in &c.read_durations_us {
            read.push(ControlPulse {
                rabi: c.read_rabi_mhz * 2.0 * PI * 1e6,
                t_on: t,
                t_off: t + d * us,
                ramp,
            });
            t += d * us + ramp + c.read_gap_us * us;
        }
        let t_end = t - c.read_gap_us * us + self.timing.read_tail_us * us;
        let read = if c.read_rabi_mhz > 0.0 { ControlProfile { pulses: read } } else { ControlProfile::dark() };
        let timing = TimingSequence {
            t_write_start: 0.0,
            t_write_off: write_off,
            t_write_end: tail,
            t_read_on,
            t_end,
            dtau: self.timing.dtau_gamma4 / g4,
        };
        let controls = ControlSchedule {
            omega_write: write,
            omega_read: read,
            read_leg: c.read_leg,
            write_angle_alpha: c.write_angle_deg.to_radians(),
            read_angle: c.read_angle_deg.unwrap_or(c.write_angle_deg).to_radians(),
            dark_time: self.timing.dark_time_us * us,
        };
        timing.validate()?;
        controls.validate(&timing)?;
        for (i, p) in self.probes.iter().enumerate() {
            if self.probes[..i].iter().any(|q| q.channel == p.channel) {
                return Err(Error::invariant(format!("probe.{}.channel", i + 1), "each channel takes at most one probe"));
            }
            crate::optics::check_tilt_resolved(&grid, p.tilt_deg.to_radians(), model.probe_wavelength(p.channel))?;
        }
        Ok((model, grid, controls, timing))
    }

    /// Resolves into SI inputs, loading custom masks.
    pub fn resolve(&self) -> Result<Resolved> {
        let (model, grid, controls, timing) = self.resolve_static()?;
        let probes = self
            .probes
            .iter()
            .map(|p| {
                Ok(ProbeSpec {
                    mask: mask_kind(&p.mask, &grid)?,
                    channel: p.channel,
                    tilt: p.tilt_deg.to_radians(),
                    photons: p.photons,
                    pulse: GaussianPulse {
                        center: p.center_us * 1e-6,
                        fwhm: p.fwhm_us * 1e-6,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let k = &self.camera;
        Ok(Resolved {
            model,
            grid,
            probes,
            controls,
            timing,
            camera: CameraModel {
                quantum_efficiency: k.quantum_efficiency,
                n_frames: k.n_frames,
                exposure: k.exposure_s,
                seed: k.seed,
            },
            options: SimOptions { nz: self.grid.nz },
            lens_f1: k.lens_f1_mm * 1e-3,
            lens_f2: k.lens_f2_mm * 1e-3,
        })
    }
}
