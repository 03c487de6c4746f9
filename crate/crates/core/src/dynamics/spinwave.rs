use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;

use crate::constants::{KB, RB85_MASS};
use crate::model::{Channel, ValidatedModel};
use crate::optics::{GridSpec, Propagator};

/// One separable spin-wave component: transverse image times longitudinal amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMode {
    /// Orthonormal transverse profile referred to the entrance face (z = 0).
    pub image: Array2<Complex64>,
    /// Flux-normalized amplitude on each slab.
    pub amplitude: Vec<Complex64>,
}

/// Stored coherence of one channel, plus the write geometry needed at readout.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpin {
    pub modes: Vec<SpinMode>,
    /// Wavelength with which the stored images were diffracted while writing.
    pub write_wavelength: f64,
    /// Angle of the write control to this channel's probe axis (rad).
    pub write_angle: f64,
    /// Photons per unit of normalized energy.
    pub photon_scale: f64,
    /// Reference coupling of the write leg.
    pub g_ref: f64,
    /// Tilt of the probe that wrote this channel.
    pub tilt: f64,
}

impl ChannelSpin {
    pub fn empty(write_wavelength: f64) -> Self {
        ChannelSpin {
            modes: Vec::new(),
            write_wavelength,
            write_angle: 0.0,
            photon_scale: 0.0,
            g_ref: 1.0,
            tilt: 0.0,
        }
    }

    /// Σ dz·|s|² over modes and slabs, in normalized units.
    pub fn energy(&self, dz: f64) -> f64 {
        dz * self
            .modes
            .iter()
            .flat_map(|m| m.amplitude.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
    }
}

/// Ground-state coherences σ₂₁ (channel 1) and σ₃₁ (channel 2) on (x, y, z).
#[derive(Debug, Clone, PartialEq)]
pub struct SpinWaveState {
    pub grid: GridSpec,
    pub nz: usize,
    /// Slab width (m).
    pub dz: f64,
    pub channels: [ChannelSpin; 2],
}

impl SpinWaveState {
    pub fn channel(&self, c: Channel) -> &ChannelSpin {
        &self.channels[c.index()]
    }

    /// Normalized slab width dz/L.
    pub fn dz_norm(&self) -> f64 {
        1.0 / self.nz as f64
    }

    /// Stored excitation of `c`, in photons.
    pub fn photons(&self, c: Channel) -> f64 {
        let ch = self.channel(c);
        ch.photon_scale * ch.energy(self.dz_norm())
    }

    /// Dense (nx, ny, nz) coherence of channel `c` in flux-normalized units.
    pub fn to_dense(&self, c: Channel) -> Array3<Complex64> {
        let ch = self.channel(c);
        let prop = Propagator::new(self.grid);
        let (nx, ny) = self.grid.shape();
        let mut out = Array3::<Complex64>::zeros((nx, ny, self.nz));
        for j in 0..self.nz {
            let z = (j as f64 + 0.5) * self.dz;
            let h = prop.transfer(z, ch.write_wavelength);
            let mut slab = out.index_axis_mut(Axis(2), j);
            for m in &ch.modes {
                let mut img = m.image.clone();
                prop.propagate_in_place(&mut img, &h);
                let a = m.amplitude[j];
                slab.zip_mut_with(&img, |o, v| *o += a * v);
            }
        }
        out
    }

    fn scale(&mut self, factors: [f64; 2]) {
        for (ch, f) in self.channels.iter_mut().zip(factors) {
            for m in &mut ch.modes {
                m.amplitude.iter_mut().for_each(|v| *v *= f);
            }
        }
    }
}

/// Amplitude factor of motional dephasing of a grating written at `angle`
/// between probe and control: e^{−(|K| v_rms T)²/2}, |K| = |k_p − k_w|.
pub fn motional_factor(model: &ValidatedModel, angle: f64, wavelength: f64, time: f64) -> f64 {
    match model.medium().temperature {
        Some(temp) if temp > 0.0 => {
            let k = 2.0 * std::f64::consts::PI / wavelength;
            let kmag = 2.0 * k * (0.5 * angle).sin().abs();
            let v = (KB * temp / RB85_MASS).sqrt();
            (-(kmag * v * time).powi(2) / 2.0).exp()
        }
        _ => 1.0,
    }
}

/// Per-channel amplitude factors after `spin_time` of γ_s decay and `motion_time`
/// of motional dephasing.
pub(crate) fn decay_factors(state: &SpinWaveState, spin_time: f64, motion_time: f64, model: &ValidatedModel) -> [f64; 2] {
    let gs = (-model.scheme().gamma_s * spin_time).exp();
    let f = |c: Channel| {
        let ch = state.channel(c);
        gs * motional_factor(model, ch.write_angle, ch.write_wavelength, motion_time)
    };
    [f(Channel::Ch1), f(Channel::Ch2)]
}

pub(crate) fn apply_decay(mut state: SpinWaveState, factors: [f64; 2]) -> SpinWaveState {
    state.scale(factors);
    state
}

/// Free evolution over a dark interval: each channel is multiplied by e^{−γ_s T}
/// and, when a temperature is set, by the motional factor.
pub fn spin_wave_decay(state: SpinWaveState, dark_time: f64, model: &ValidatedModel) -> SpinWaveState {
    assert!(dark_time >= 0.0, "dark time must be >= 0");
    let f = decay_factors(&state, dark_time, dark_time, model);
    apply_decay(state, f)
}
