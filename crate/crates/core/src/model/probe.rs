use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::{photon_flux_weight, FieldTerm, ProbeField};
use super::schedule::TimeGrid;
use super::scheme::{Channel, ValidatedModel};
use crate::constants::RB_D1_DIPOLE;
use crate::error::{Error, Result};
use crate::optics::{apply_tilt, check_tilt_resolved, make_mask, GridSpec, MaskKind, Propagator};

/// Everything needed to synthesize one input probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    pub mask: MaskKind,
    pub channel: Channel,
    /// In-plane angle to the z axis (rad).
    pub tilt: f64,
    pub photons: f64,
    pub pulse: GaussianPulse,
}

/// Gaussian temporal envelope; `fwhm` refers to the intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPulse {
    pub center: f64,
    pub fwhm: f64,
}

impl GaussianPulse {
    pub fn amplitude(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.fwhm;
        (-2.0 * std::f64::consts::LN_2 * x * x).exp()
    }

    /// Time by which the pulse intensity has fallen below 1e-12 of its peak.
    pub fn tail_end(&self) -> f64 {
        self.center + self.fwhm * (12.0 * std::f64::consts::LN_10 / (4.0 * std::f64::consts::LN_2)).sqrt()
    }
}

/// Builds the probe envelope entering the medium at z = 0.
///
/// The mask is imaged onto the centre of the cloud, so the field at the entrance
/// face is the mask (times its tilt carrier) propagated back by L/2. The amplitude
/// is set so that the envelope carries `photons` photons on `time`.
pub fn build_probe(spec: &ProbeSpec, grid: &GridSpec, model: &ValidatedModel, time: &TimeGrid) -> Result<ProbeField> {
    if !(spec.photons.is_finite() && spec.photons >= 0.0) {
        return Err(Error::invariant("probe.photons", "must be >= 0"));
    }
    if !(spec.pulse.fwhm.is_finite() && spec.pulse.fwhm > 0.0) {
        return Err(Error::invariant("probe.pulse_fwhm", "must be > 0"));
    }
    let lambda = model.probe_wavelength(spec.channel);
    check_tilt_resolved(grid, spec.tilt, lambda)?;
    let mask = make_mask(&spec.mask, grid)?;
    let tilted = apply_tilt(&mask.to_field(), spec.tilt, lambda)?;
    let prop = Propagator::new(*grid);
    prop.check_band_limit(lambda)?;
    let entrance = prop.propagate(&tilted, -0.5 * model.medium().length_l, lambda)?;

    let weight = photon_flux_weight(RB_D1_DIPOLE, lambda);
    let mut field = ProbeField::zero(*grid, *time, spec.channel, lambda, weight);
    field.tilt_angle = spec.tilt;
    field.tilt_applied = true;
    field.photons_per_pulse = spec.photons;
    field.frequency_offset = model.frequency_offset(spec.channel);

    let trace: Vec<Complex64> = time.times().map(|t| Complex64::new(spec.pulse.amplitude(t), 0.0)).collect();
    let e_profile = entrance.power();
    let e_trace: f64 = trace.iter().map(|z| z.norm_sqr()).sum::<f64>() * time.dtau;
    if spec.photons == 0.0 || e_profile == 0.0 || e_trace == 0.0 {
        return Ok(field);
    }
    let amp = (spec.photons / (weight * e_profile * e_trace)).sqrt();
    field.terms.push(FieldTerm {
        profile: entrance.data,
        trace: trace.into_iter().map(|z| z * amp).collect(),
    });
    Ok(field)
}

/// Sums probes sharing a channel into one field (their terms are concatenated).
pub fn combine(fields: &[ProbeField]) -> Option<ProbeField> {
    let mut it = fields.iter();
    let mut out = it.next()?.clone();
    for f in it {
        debug_assert_eq!(f.channel, out.channel);
        out.terms.extend(f.terms.iter().cloned());
        out.photons_per_pulse += f.photons_per_pulse;
    }
    Some(out)
}
