use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{self, C, EPS0, HBAR};
use crate::error::{Error, Result};

/// The five scalar levels of the tripod: three ground states and two excited states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    G1,
    G2,
    G3,
    E4,
    E5,
}

/// Storage channel: which ground state holds the spin wave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    /// |2⟩–|4⟩ probe, spin coherence σ₂₁.
    Ch1,
    /// |3⟩–|4⟩ probe, spin coherence σ₃₁.
    Ch2,
}

impl Channel {
    pub const ALL: [Channel; 2] = [Channel::Ch1, Channel::Ch2];

    pub fn index(self) -> usize {
        match self {
            Channel::Ch1 => 0,
            Channel::Ch2 => 1,
        }
    }

    pub fn ground(self) -> Level {
        match self {
            Channel::Ch1 => Level::G2,
            Channel::Ch2 => Level::G3,
        }
    }

    pub fn other(self) -> Channel {
        match self {
            Channel::Ch1 => Channel::Ch2,
            Channel::Ch2 => Channel::Ch1,
        }
    }
}

/// Which excited state the read control addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReadLeg {
    /// Read through |4⟩; retrieved light at the probe wavelength.
    R795,
    /// Read through |5⟩; retrieved light converted to the 780 nm line.
    Rprime780,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelScheme {
    /// |2⟩–|4⟩ wavelength (m).
    pub lambda_p1: f64,
    /// |3⟩–|4⟩ wavelength (m).
    pub lambda_p2: f64,
    /// |2⟩–|5⟩ and |3⟩–|5⟩ wavelength (m).
    pub lambda_conv: f64,
    /// Population decay rates of |4⟩ and |5⟩ (rad/s).
    pub gamma4: f64,
    pub gamma5: f64,
    /// Ground-coherence decay rate (rad/s).
    pub gamma_s: f64,
    /// Ground hyperfine splitting (rad/s).
    pub delta_hf: f64,
}

impl LevelScheme {
    /// ⁸⁵Rb D1/D2 tripod with γ_s = 2π·1 kHz.
    pub fn rb85() -> Self {
        LevelScheme {
            lambda_p1: constants::LAMBDA_D1,
            lambda_p2: constants::LAMBDA_D1,
            lambda_conv: constants::LAMBDA_D2,
            gamma4: constants::GAMMA_D1,
            gamma5: constants::GAMMA_D2,
            gamma_s: 2.0 * PI * 1.0e3,
            delta_hf: constants::DELTA_HF_RB85,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DensityProfile {
    Uniform,
    /// Gaussian along z (σ = L/4, truncated to the cloud), uniform transversely.
    GaussianCigar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    pub length_l: f64,
    pub transverse_extent: f64,
    pub atom_number: f64,
    pub density_profile: DensityProfile,
    /// Nominal optical depths of each channel.
    pub od1: f64,
    pub od2: f64,
    pub od_conv: f64,
    /// Relative preparation of |2⟩ and |3⟩, in [0, 1]; they scale the nominal
    /// optical depths of channel 1 and channel 2.
    pub pop2: f64,
    pub pop3: f64,
    /// Temperature (K) for motional dephasing of the stored grating.
    pub temperature: Option<f64>,
}

impl Default for MediumParams {
    fn default() -> Self {
        MediumParams {
            length_l: 0.03,
            transverse_extent: 0.002,
            atom_number: 9.1e8,
            density_profile: DensityProfile::Uniform,
            od1: 10.0,
            od2: 10.0,
            od_conv: 10.0,
            pop2: 1.0,
            pop3: 1.0,
            temperature: None,
        }
    }
}

/// Laser detunings (rad/s); all default to resonance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Detunings {
    /// One-photon detuning of the probes and the R control from |4⟩.
    pub probe: f64,
    /// Two-photon detuning δ₂.
    pub two_photon: f64,
    /// One-photon detuning of R′ from |5⟩.
    pub read_conv: f64,
}

/// A scheme and medium whose invariants have been checked, with derived couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedModel {
    scheme: LevelScheme,
    medium: MediumParams,
    detunings: Detunings,
}

pub fn validate_scheme(scheme: LevelScheme, medium: MediumParams) -> Result<ValidatedModel> {
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::invariant(name, format!("must be > 0, got {v}")))
        }
    };
    positive("lambda_p1", scheme.lambda_p1)?;
    positive("lambda_p2", scheme.lambda_p2)?;
    positive("lambda_conv", scheme.lambda_conv)?;
    if scheme.lambda_conv >= scheme.lambda_p1 {
        return Err(Error::invariant(
            "lambda_conv",
            format!(
                "converted wavelength {} m must be shorter than the probe wavelength {} m",
                scheme.lambda_conv, scheme.lambda_p1
            ),
        ));
    }
    positive("gamma4", scheme.gamma4)?;
    positive("gamma5", scheme.gamma5)?;
    if !(scheme.gamma_s.is_finite() && scheme.gamma_s >= 0.0) {
        return Err(Error::invariant("gamma_s", format!("must be >= 0, got {}", scheme.gamma_s)));
    }
    if scheme.gamma_s >= scheme.gamma4 {
        return Err(Error::invariant("gamma_s", "must be smaller than gamma4"));
    }
    positive("delta_hf", scheme.delta_hf)?;

    positive("length_l", medium.length_l)?;
    positive("transverse_extent", medium.transverse_extent)?;
    if !(medium.atom_number.is_finite() && medium.atom_number >= 0.0) {
        return Err(Error::invariant("atom_number", "must be >= 0"));
    }
    for (name, od) in [("od1", medium.od1), ("od2", medium.od2), ("od_conv", medium.od_conv)] {
        if !(od.is_finite() && od >= 0.0) {
            return Err(Error::invariant(name, format!("must be >= 0, got {od}")));
        }
    }
    for (name, p) in [("pop2", medium.pop2), ("pop3", medium.pop3)] {
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(Error::invariant(name, format!("must lie in [0, 1], got {p}")));
        }
    }
    if let Some(t) = medium.temperature {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invariant("temperature", "must be >= 0"));
        }
    }
    Ok(ValidatedModel {
        scheme,
        medium,
        detunings: Detunings::default(),
    })
}

impl ValidatedModel {
    pub fn rb85_default() -> Self {
        validate_scheme(LevelScheme::rb85(), MediumParams::default()).expect("default preset is valid")
    }

    pub fn with_detunings(mut self, detunings: Detunings) -> Result<Self> {
        for (name, v) in [
            ("probe_detuning", detunings.probe),
            ("two_photon_detuning", detunings.two_photon),
            ("read_detuning", detunings.read_conv),
        ] {
            if !v.is_finite() {
                return Err(Error::invariant(name, "must be finite"));
            }
        }
        self.detunings = detunings;
        Ok(self)
    }

    pub fn scheme(&self) -> &LevelScheme {
        &self.scheme
    }

    pub fn medium(&self) -> &MediumParams {
        &self.medium
    }

    pub fn detunings(&self) -> &Detunings {
        &self.detunings
    }

    /// Optical-coherence decay rate γ_ge = Γ/2 of the excited state used by `leg`.
    pub fn gamma_ge(&self, leg: ReadLeg) -> f64 {
        match leg {
            ReadLeg::R795 => 0.5 * self.scheme.gamma4,
            ReadLeg::Rprime780 => 0.5 * self.scheme.gamma5,
        }
    }

    /// Full-population optical depth of `channel` on `leg`.
    pub fn od(&self, channel: Channel, leg: ReadLeg) -> f64 {
        match (leg, channel) {
            (ReadLeg::R795, Channel::Ch1) => self.medium.od1,
            (ReadLeg::R795, Channel::Ch2) => self.medium.od2,
            (ReadLeg::Rprime780, _) => self.medium.od_conv,
        }
    }

    pub fn population(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Ch1 => self.medium.pop2,
            Channel::Ch2 => self.medium.pop3,
        }
    }

    /// Full-population coupling κ = od·γ_ge/(2L) in rad/(s·m).
    pub fn kappa_full(&self, channel: Channel, leg: ReadLeg) -> f64 {
        self.od(channel, leg) * self.gamma_ge(leg) / (2.0 * self.medium.length_l)
    }

    /// Coupling seen by the prepared population of `channel`.
    pub fn kappa(&self, channel: Channel, leg: ReadLeg) -> f64 {
        self.population(channel) * self.kappa_full(channel, leg)
    }

    /// Probe carrier wavelength of `channel`.
    pub fn probe_wavelength(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Ch1 => self.scheme.lambda_p1,
            Channel::Ch2 => self.scheme.lambda_p2,
        }
    }

    /// Carrier wavelength of light emitted by `channel` when read on `leg`.
    pub fn output_wavelength(&self, channel: Channel, leg: ReadLeg) -> f64 {
        match leg {
            ReadLeg::R795 => self.probe_wavelength(channel),
            ReadLeg::Rprime780 => self.scheme.lambda_conv,
        }
    }

    /// Wavelength of the control field on the write/R transition (|1⟩–|4⟩) or R′ (|1⟩–|5⟩).
    pub fn control_wavelength(&self, leg: ReadLeg) -> f64 {
        match leg {
            ReadLeg::R795 => self.scheme.lambda_p1,
            ReadLeg::Rprime780 => self.scheme.lambda_conv,
        }
    }

    /// Optical frequency offset of `channel` relative to channel 1 (rad/s).
    pub fn frequency_offset(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Ch1 => 0.0,
            Channel::Ch2 => self.scheme.delta_hf,
        }
    }

    /// Relative atomic density at normalized depth `u ∈ [0, 1]`, normalized so
    /// that its mean over the cloud is one.
    pub fn density_shape(&self, u: f64) -> f64 {
        match self.medium.density_profile {
            DensityProfile::Uniform => 1.0,
            DensityProfile::GaussianCigar => {
                // σ = L/4 centred on the cloud; normalisation = mean over [0, 1].
                let s = 0.25;
                let norm = s * (2.0 * PI).sqrt() * libm::erf(0.5 / (s * 2f64.sqrt()));
                (-(u - 0.5).powi(2) / (2.0 * s * s)).exp() / norm
            }
        }
    }
}

/// Resonant optical depth n·σ₀·L of a box-shaped cloud, σ₀ = 3λ²/(2π).
///
/// `cloud_dims` is (longitudinal, transverse x, transverse y) in metres.
pub fn optical_depth_from_atoms(atom_number: f64, cloud_dims: (f64, f64, f64), wavelength: f64) -> Result<f64> {
    let (len, wx, wy) = cloud_dims;
    let volume = len * wx * wy;
    if !(volume.is_finite() && volume > 0.0) {
        return Err(Error::invariant("cloud_volume", "must be > 0"));
    }
    if !(atom_number.is_finite() && atom_number >= 0.0) {
        return Err(Error::invariant("atom_number", "must be >= 0"));
    }
    let sigma0 = 3.0 * wavelength * wavelength / (2.0 * PI);
    Ok(atom_number / volume * sigma0 * len)
}

/// Rabi frequency (rad/s) of a flat-top beam of `power` W over a disc of `beam_diameter` m.
pub fn rabi_from_power(power: f64, beam_diameter: f64, dipole_moment: f64) -> Result<f64> {
    if !(power.is_finite() && power >= 0.0) {
        return Err(Error::invariant("power", "must be >= 0"));
    }
    if !(beam_diameter.is_finite() && beam_diameter > 0.0) {
        return Err(Error::invariant("beam_diameter", "must be > 0"));
    }
    let area = PI * (0.5 * beam_diameter).powi(2);
    let field = (2.0 * power / (EPS0 * C * area)).sqrt();
    Ok(dipole_moment * field / HBAR)
}
