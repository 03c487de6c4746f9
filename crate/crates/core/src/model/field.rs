use ndarray::{Array2, Array3};
use num_complex::Complex64;

use super::schedule::TimeGrid;
use super::scheme::Channel;
use crate::constants::{C, EPS0, HBAR};
use crate::optics::{FieldPlane, GridSpec, Image2D};

/// One separable piece of an envelope: `profile(x, y) · trace(τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTerm {
    pub profile: Array2<Complex64>,
    pub trace: Vec<Complex64>,
}

/// Probe envelope in Rabi-frequency units (rad/s) on an (x, y, τ) grid.
///
/// The envelope is held as a sum of separable terms; `to_dense` materializes it.
/// Trace sample `n` sits at `time.time(n)` and represents the interval of width
/// `time.dtau` centred there.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeField {
    pub grid: GridSpec,
    pub time: TimeGrid,
    pub terms: Vec<FieldTerm>,
    pub carrier_wavelength: f64,
    pub tilt_angle: f64,
    /// Set once the tilt carrier has been multiplied into the profiles.
    pub tilt_applied: bool,
    pub channel: Channel,
    pub photons_per_pulse: f64,
    /// Photons per unit of ∬∑|E|²·dx·dy·dτ.
    pub flux_weight: f64,
    /// Optical frequency offset relative to channel 1 at the same wavelength (rad/s).
    pub frequency_offset: f64,
}

/// Photons per unit ∬|Ω|² dx dy dt for a field of Rabi frequency Ω = d·E/ħ on a
/// transition of dipole `d` at `wavelength`: the photon flux density is
/// ε₀c|E₀|²/(2ħω).
pub fn photon_flux_weight(dipole: f64, wavelength: f64) -> f64 {
    let omega = 2.0 * std::f64::consts::PI * C / wavelength;
    EPS0 * C * HBAR / (2.0 * dipole * dipole * omega)
}

impl ProbeField {
    /// A field with no terms (identically zero).
    pub fn zero(grid: GridSpec, time: TimeGrid, channel: Channel, carrier_wavelength: f64, flux_weight: f64) -> Self {
        ProbeField {
            grid,
            time,
            terms: Vec::new(),
            carrier_wavelength,
            tilt_angle: 0.0,
            tilt_applied: true,
            channel,
            photons_per_pulse: 0.0,
            flux_weight,
            frequency_offset: 0.0,
        }
    }

    /// Gram matrix entries of profiles and traces, without grid factors.
    fn gram(&self) -> (Array2<Complex64>, Array2<Complex64>) {
        let n = self.terms.len();
        let mut gp = Array2::zeros((n, n));
        let mut gt = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let p: Complex64 = self.terms[i]
                    .profile
                    .iter()
                    .zip(self.terms[j].profile.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let t: Complex64 = self.terms[i]
                    .trace
                    .iter()
                    .zip(self.terms[j].trace.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                gp[[i, j]] = p;
                gp[[j, i]] = p.conj();
                gt[[i, j]] = t;
                gt[[j, i]] = t.conj();
            }
        }
        (gp, gt)
    }

    /// ∬∑|E|²·dx·dy·dτ in (rad/s)²·s·m².
    pub fn energy(&self) -> f64 {
        let (gp, gt) = self.gram();
        let s: Complex64 = gp.iter().zip(gt.iter()).map(|(a, b)| a * b).sum();
        s.re.max(0.0) * self.grid.pixel_area() * self.time.dtau
    }

    pub fn photons(&self) -> f64 {
        self.flux_weight * self.energy()
    }

    /// ∬|E(x, y, τ)|² dx dy for each time sample.
    pub fn power_trace(&self) -> Vec<f64> {
        let (gp, _) = self.gram();
        let n = self.terms.len();
        (0..self.time.nt)
            .map(|k| {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        s += self.terms[i].trace[k].conj() * gp[[i, j]] * self.terms[j].trace[k];
                    }
                }
                s.re.max(0.0) * self.grid.pixel_area()
            })
            .collect()
    }

    /// ∑_τ |E|²·dτ per pixel.
    pub fn time_integrated_intensity(&self) -> Image2D<f64> {
        let (_, gt) = self.gram();
        let n = self.terms.len();
        let mut out = Array2::<f64>::zeros(self.grid.shape());
        for (idx, v) in out.indexed_iter_mut() {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let pi = self.terms[i].profile[idx].conj();
                for j in 0..n {
                    s += pi * gt[[i, j]] * self.terms[j].profile[idx];
                }
            }
            *v = s.re.max(0.0) * self.time.dtau;
        }
        Image2D::new(self.grid, out)
    }

    /// Field at time sample `k`.
    pub fn slice(&self, k: usize) -> FieldPlane {
        let mut out = Array2::<Complex64>::zeros(self.grid.shape());
        for t in &self.terms {
            let c = t.trace[k];
            if c != Complex64::new(0.0, 0.0) {
                out.zip_mut_with(&t.profile, |o, p| *o += c * p);
            }
        }
        Image2D::new(self.grid, out)
    }

    /// Materializes the envelope as an `(nx, ny, nt)` array.
    pub fn to_dense(&self) -> Array3<Complex64> {
        let (nx, ny) = self.grid.shape();
        let mut out = Array3::<Complex64>::zeros((nx, ny, self.time.nt));
        for k in 0..self.time.nt {
            out.index_axis_mut(ndarray::Axis(2), k).assign(&self.slice(k).data);
        }
        out
    }

    /// Multiplies every term by `s`.
    pub fn scaled(&self, s: f64) -> ProbeField {
        let mut f = self.clone();
        for t in &mut f.terms {
            t.trace.iter_mut().for_each(|v| *v *= s);
        }
        f.photons_per_pulse *= s * s;
        f
    }

    pub fn is_null(&self) -> bool {
        self.terms.is_empty() || self.energy() == 0.0
    }
}
