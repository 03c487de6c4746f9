//! Store/retrieve kernel for transversely uniform media.
//!
//! In a medium whose density depends on z only, diffraction commutes with the
//! atomic response, so a probe `Σ_i Q_i(x, y)·f_i(τ)` is handled by orthonormalizing
//! the profiles Q_i and marching one (z, τ) column per profile. Inside the medium
//! the field on slab j is `Prop[(j+½)dz](Q)·e(j)`; at the exit it is `Prop[L](Q)·e_out`.
//!
//! On the converting leg the emitted light diffracts with a different wavenumber
//! than the light that wrote the grating. In the emitter's frame the stored profile
//! on slab j is `e^{−iδ(k⊥)·z_j}·Q̂(k⊥)` with δ = k⊥²/2·(1/k − 1/k′); this is expanded
//! in powers of z_j so the readout again splits into independent columns.

use ndarray::Array2;
use num_complex::Complex64;

use super::basis::orthonormalize;
use super::column::{march_many, ColumnMedium, ColumnState, Drive};
use super::mismatch::delta_kz;
use super::record::{EnergyLedger, SimRecord, SpinSnapshot};
use super::spinwave::{apply_decay, decay_factors, ChannelSpin, SpinMode, SpinWaveState};
use crate::error::{Error, Result};
use crate::model::{
    Channel, ControlProfile, ControlSchedule, FieldTerm, ProbeField, ReadLeg, TimeGrid, TimingSequence,
    ValidatedModel,
};
use crate::optics::{check_tilt_resolved, Propagator};

/// Default number of longitudinal slabs.
pub const DEFAULT_NZ: usize = 128;
/// Largest allowed time step, in units of 1/Γ₄, while a control is on.
pub const MAX_STEP: f64 = 0.1;
/// Relative size of the first neglected term of the conversion-diffraction series.
const SERIES_TOL: f64 = 1e-13;
const MAX_SERIES_TERMS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub nz: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { nz: DEFAULT_NZ }
    }
}

/// Column parameters of `channel` on `leg`, plus the reference coupling used to
/// normalize the field.
pub(crate) fn leg_medium(model: &ValidatedModel, channel: Channel, leg: ReadLeg, nz: usize) -> (ColumnMedium, f64) {
    let s = model.scheme();
    let d = model.detunings();
    let g4 = s.gamma4;
    let (gamma, delta) = match leg {
        ReadLeg::R795 => (s.gamma4, d.probe),
        ReadLeg::Rprime780 => (s.gamma5, d.read_conv),
    };
    let g0 = (model.kappa(channel, leg) * model.medium().length_l / g4).sqrt();
    let g = (0..nz)
        .map(|j| g0 * model.density_shape((j as f64 + 0.5) / nz as f64).sqrt())
        .collect();
    let medium = ColumnMedium {
        a: Complex64::new(0.5 * gamma / g4, delta / g4),
        b: Complex64::new(s.gamma_s / g4, d.two_photon / g4),
        g,
        dz: 1.0 / nz as f64,
    };
    (medium, if g0 > 0.0 { g0 } else { 1.0 })
}

pub(crate) fn drive(profile: &ControlProfile, nodes: &TimeGrid, gamma4: f64) -> Drive {
    Drive {
        h: nodes.dtau * gamma4,
        omega: nodes.midpoints().times().map(|t| profile.eval(t) / gamma4).collect(),
    }
}

pub(crate) fn check_step(dtau: f64, gamma4: f64, controls: &[&ControlProfile]) -> Result<()> {
    let h = dtau * gamma4;
    if h > MAX_STEP * (1.0 + 1e-12) && controls.iter().any(|c| !c.is_dark()) {
        return Err(Error::StepTooLarge { dtau_gamma: h });
    }
    Ok(())
}

/// Result of integrating the write window.
#[derive(Debug, Clone, PartialEq)]
pub struct WriteOutcome {
    pub transmitted: [ProbeField; 2],
    /// Spin wave at the last node of the window.
    pub spin: SpinWaveState,
    /// Normalized energies per channel.
    pub input: [f64; 2],
    pub leaked: [f64; 2],
    pub absorbed: [f64; 2],
    /// dz·Σ|P|² left at the end of the window.
    pub optical_residual: [f64; 2],
    pub snapshots: Vec<SpinSnapshot>,
}

/// Result of integrating the read window.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadOutcome {
    pub retrieved: [ProbeField; 2],
    /// Normalized energies per channel.
    pub retrieved_energy: [f64; 2],
    pub absorbed: [f64; 2],
    pub residual: [f64; 2],
    pub snapshots: Vec<SpinSnapshot>,
}

fn channel_probes(probes: &[ProbeField], c: Channel) -> Vec<&ProbeField> {
    probes.iter().filter(|p| p.channel == c).collect()
}

/// Integrates the write window `nodes` with control `omega`: probes enter the
/// medium, part leaks through and part is mapped onto the spin coherences.
///
/// Probe traces must be sampled on `nodes.midpoints()`.
pub fn write_stage(
    probes: &[ProbeField],
    omega: &ControlProfile,
    write_angle: f64,
    model: &ValidatedModel,
    nodes: &TimeGrid,
    opts: &SimOptions,
) -> Result<WriteOutcome> {
    let first = probes.first().ok_or_else(|| Error::invariant("probes", "at least one probe field is required"))?;
    let grid = first.grid;
    let samples = nodes.midpoints();
    for p in probes {
        if p.grid != grid {
            return Err(Error::invariant("probes", "all probes must share one grid"));
        }
        if p.time.nt != samples.nt || (p.time.t0 - samples.t0).abs() > 1e-6 * samples.dtau || p.time.dtau != samples.dtau {
            return Err(Error::invariant("probe.time", "probe traces must be sampled on the write-window midpoints"));
        }
        check_tilt_resolved(&grid, p.tilt_angle, p.carrier_wavelength)?;
    }
    let g4 = model.scheme().gamma4;
    check_step(nodes.dtau, g4, &[omega])?;
    let prop = Propagator::new(grid);
    let drv = drive(omega, nodes, g4);
    let length = model.medium().length_l;

    let mut out: Vec<(ProbeField, ChannelSpin, [f64; 4], Vec<f64>)> = Vec::with_capacity(2);
    for c in Channel::ALL {
        let lambda = model.probe_wavelength(c);
        prop.check_band_limit(lambda)?;
        let (medium, g_ref) = leg_medium(model, c, ReadLeg::R795, opts.nz);
        let mine = channel_probes(probes, c);
        let weight = mine.first().map_or(first.flux_weight, |p| p.flux_weight);
        let tilt = mine.first().map_or(0.0, |p| p.tilt_angle);
        let mut transmitted = ProbeField::zero(grid, samples, c, lambda, weight);
        transmitted.tilt_angle = tilt;
        transmitted.frequency_offset = model.frequency_offset(c);
        let mut spin = ChannelSpin::empty(lambda);
        spin.write_angle = write_angle - tilt;
        spin.photon_scale = weight * g4 * g_ref * g_ref;
        spin.g_ref = g_ref;
        spin.tilt = tilt;

        let terms: Vec<&FieldTerm> = mine.iter().flat_map(|p| p.terms.iter()).collect();
        let images: Vec<Array2<Complex64>> = terms.iter().map(|t| t.profile.clone()).collect();
        let (basis, coeff) = orthonormalize(&images, grid.pixel_area());
        let norm = 1.0 / (g4 * g_ref);
        let jobs: Vec<(Vec<Complex64>, ColumnState)> = (0..basis.len())
            .map(|m| {
                let e = (0..samples.nt)
                    .map(|n| terms.iter().enumerate().map(|(i, t)| coeff[[i, m]] * t.trace[n]).sum::<Complex64>() * norm)
                    .collect();
                (e, ColumnState::zeros(opts.nz))
            })
            .collect();
        let runs = march_many(&medium, &drv, &jobs, "write")?;

        let h = drv.h;
        let mut sums = [0.0; 4];
        let mut snaps = vec![0.0; nodes.nt];
        let exit = prop.transfer(length, lambda);
        for ((q, (e_in, _)), run) in basis.into_iter().zip(&jobs).zip(runs) {
            sums[0] += h * e_in.iter().map(|z| z.norm_sqr()).sum::<f64>();
            sums[1] += h * run.e_out.iter().map(|z| z.norm_sqr()).sum::<f64>();
            sums[2] += run.absorbed;
            sums[3] += medium.dz * run.state.p.iter().map(|z| z.norm_sqr()).sum::<f64>();
            snaps.iter_mut().zip(&run.spin_energy).for_each(|(a, b)| *a += b);
            let mut img = q.clone();
            prop.propagate_in_place(&mut img, &exit);
            transmitted.terms.push(FieldTerm {
                profile: img,
                trace: run.e_out.iter().map(|z| z * (g4 * g_ref)).collect(),
            });
            spin.modes.push(SpinMode {
                image: q,
                amplitude: run.state.s,
            });
        }
        transmitted.photons_per_pulse = transmitted.photons();
        let scale = spin.photon_scale;
        out.push((transmitted, spin, sums, snaps.into_iter().map(|v| v * scale).collect()));
    }
    let (o2, o1) = (out.pop().expect("two channels"), out.pop().expect("two channels"));
    let snapshots = nodes
        .times()
        .enumerate()
        .map(|(n, t)| SpinSnapshot {
            t,
            photons: [o1.3[n], o2.3[n]],
        })
        .collect();
    Ok(WriteOutcome {
        input: [o1.2[0], o2.2[0]],
        leaked: [o1.2[1], o2.2[1]],
        absorbed: [o1.2[2], o2.2[2]],
        optical_residual: [o1.2[3], o2.2[3]],
        transmitted: [o1.0, o2.0],
        spin: SpinWaveState {
            grid,
            nz: opts.nz,
            dz: length / opts.nz as f64,
            channels: [o1.1, o2.1],
        },
        snapshots,
    })
}

/// Number of terms needed for the series of e^{−iδ z} with |δ z| ≤ `x`.
fn series_terms(x: f64) -> Result<usize> {
    let mut term = 1.0;
    let mut n = 0;
    while term > SERIES_TOL {
        n += 1;
        term *= x / n as f64;
        if n >= MAX_SERIES_TERMS {
            return Err(Error::invariant(
                "grid",
                format!("differential diffraction |δ|L = {x:.2} too large for the conversion readout; use a coarser grid"),
            ));
        }
    }
    Ok(n)
}

/// Reads both channels of `state` with the shared control `omega` on `leg`.
///
/// `nodes` is the read window; `read_angle` is the read control's angle to the
/// probe-1 axis.
pub fn read_out(
    state: &SpinWaveState,
    leg: ReadLeg,
    omega: &ControlProfile,
    read_angle: f64,
    model: &ValidatedModel,
    nodes: &TimeGrid,
) -> Result<ReadOutcome> {
    let g4 = model.scheme().gamma4;
    check_step(nodes.dtau, g4, &[omega])?;
    let grid = state.grid;
    let nz = state.nz;
    let prop = Propagator::new(grid);
    let drv = drive(omega, nodes, g4);
    let samples = nodes.midpoints();
    let length = model.medium().length_l;
    let lambda_w = model.control_wavelength(ReadLeg::R795);
    let lambda_r = model.control_wavelength(leg);

    let mut res = Vec::with_capacity(2);
    for c in Channel::ALL {
        let ch = state.channel(c);
        let lambda_out = model.output_wavelength(c, leg);
        prop.check_band_limit(lambda_out)?;
        let (medium, g_ref_out) = leg_medium(model, c, leg, nz);
        let weight_in = if ch.photon_scale > 0.0 { ch.photon_scale / (g4 * ch.g_ref * ch.g_ref) } else { 0.0 };
        let weight = weight_in * (ch.g_ref / g_ref_out).powi(2);
        let mut retrieved = ProbeField::zero(grid, samples, c, lambda_out, weight);
        retrieved.tilt_angle = ch.tilt;
        retrieved.frequency_offset = model.frequency_offset(c);

        let dkz = delta_kz(ch.write_angle, read_angle - ch.tilt, lambda_w, lambda_r);
        let u: Vec<f64> = (0..nz).map(|j| (j as f64 + 0.5) / nz as f64).collect();
        let phase: Vec<Complex64> = u.iter().map(|&uj| Complex64::from_polar(1.0, dkz * length * uj)).collect();

        // Profiles and slab amplitudes of the spin wave in the emitter's frame.
        let mut images: Vec<Array2<Complex64>> = Vec::new();
        let mut spins: Vec<Vec<Complex64>> = Vec::new();
        let kdiff = 1.0 / (2.0 * std::f64::consts::PI / ch.write_wavelength) - 1.0 / (2.0 * std::f64::consts::PI / lambda_out);
        let delta = prop.kperp2().mapv(|q2| 0.5 * q2 * kdiff * length);
        let dmax = delta.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let nterms = if dmax == 0.0 || ch.modes.is_empty() { 0 } else { series_terms(dmax)? };
        for m in &ch.modes {
            let base: Vec<Complex64> = m.amplitude.iter().zip(&phase).map(|(a, p)| a * p).collect();
            if nterms == 0 {
                images.push(m.image.clone());
                spins.push(base);
                continue;
            }
            let mut spec = m.image.clone();
            prop.fft().forward(&mut spec);
            let mut coef = Array2::from_elem(spec.dim(), Complex64::new(1.0, 0.0));
            for n in 0..=nterms {
                if n > 0 {
                    coef.zip_mut_with(&delta, |c, d| *c *= Complex64::new(0.0, -d) / n as f64);
                }
                let mut img = &spec * &coef;
                prop.fft().inverse(&mut img);
                images.push(img);
                spins.push(base.iter().zip(&u).map(|(b, uj)| b * uj.powi(n as i32)).collect());
            }
        }
        let (basis, coeff) = orthonormalize(&images, grid.pixel_area());
        let jobs: Vec<(Vec<Complex64>, ColumnState)> = (0..basis.len())
            .map(|q| {
                let s = (0..nz)
                    .map(|j| spins.iter().enumerate().map(|(p, sp)| coeff[[p, q]] * sp[j]).sum())
                    .collect();
                (Vec::new(), ColumnState::from_spin(s))
            })
            .collect();
        let runs = march_many(&medium, &drv, &jobs, "read")?;

        let h = drv.h;
        let mut sums = [0.0; 3];
        let mut snaps = vec![0.0; nodes.nt];
        let exit = prop.transfer(length, lambda_out);
        for (b, run) in basis.into_iter().zip(runs) {
            sums[0] += h * run.e_out.iter().map(|z| z.norm_sqr()).sum::<f64>();
            sums[1] += run.absorbed;
            sums[2] += run.state.energy(medium.dz);
            snaps.iter_mut().zip(&run.spin_energy).for_each(|(a, v)| *a += v);
            let mut img = b;
            prop.propagate_in_place(&mut img, &exit);
            retrieved.terms.push(FieldTerm {
                profile: img,
                trace: run.e_out.iter().map(|z| z * (g4 * g_ref_out)).collect(),
            });
        }
        retrieved.photons_per_pulse = retrieved.photons();
        let scale = ch.photon_scale;
        res.push((retrieved, sums, snaps.into_iter().map(|v| v * scale).collect::<Vec<f64>>()));
    }
    let (r2, r1) = (res.pop().expect("two channels"), res.pop().expect("two channels"));
    let snapshots = nodes
        .times()
        .enumerate()
        .map(|(n, t)| SpinSnapshot {
            t,
            photons: [r1.2[n], r2.2[n]],
        })
        .collect();
    Ok(ReadOutcome {
        retrieved_energy: [r1.1[0], r2.1[0]],
        absorbed: [r1.1[1], r2.1[1]],
        residual: [r1.1[2], r2.1[2]],
        retrieved: [r1.0, r2.0],
        snapshots,
    })
}

/// Full write → dark → read cycle with the default slab count.
pub fn simulate_sequence(
    probes: &[ProbeField],
    controls: &ControlSchedule,
    model: &ValidatedModel,
    timing: &TimingSequence,
) -> Result<SimRecord> {
    simulate_sequence_with(probes, controls, model, timing, &SimOptions::default())
}

pub fn simulate_sequence_with(
    probes: &[ProbeField],
    controls: &ControlSchedule,
    model: &ValidatedModel,
    timing: &TimingSequence,
    opts: &SimOptions,
) -> Result<SimRecord> {
    timing.validate()?;
    controls.validate(timing)?;
    if opts.nz == 0 {
        return Err(Error::invariant("nz", "must be >= 1"));
    }
    check_step(timing.dtau, model.scheme().gamma4, &[&controls.omega_write, &controls.omega_read])?;
    let w = write_stage(
        probes,
        &controls.omega_write,
        controls.write_angle_alpha,
        model,
        &timing.write_grid(),
        opts,
    )?;
    let spin_time = timing.t_read_on - timing.write_grid().t_last();
    let f = decay_factors(&w.spin, spin_time.max(0.0), controls.dark_time, model);
    let dz = w.spin.dz_norm();
    let stored_energy = [w.spin.channels[0].energy(dz), w.spin.channels[1].energy(dz)];
    let stored = w.spin.clone();
    let decayed = apply_decay(w.spin, f);
    let r = read_out(
        &decayed,
        controls.read_leg,
        &controls.omega_read,
        controls.read_angle,
        model,
        &timing.read_grid(),
    )?;
    let mut ledger = [EnergyLedger::default(); 2];
    for c in Channel::ALL {
        let i = c.index();
        let scale = stored.channels[i].photon_scale;
        let dark_loss = w.optical_residual[i] + stored_energy[i] * (1.0 - f[i] * f[i]);
        ledger[i] = EnergyLedger {
            input: scale * w.input[i],
            leaked: scale * w.leaked[i],
            retrieved: scale * r.retrieved_energy[i],
            absorbed: scale * (w.absorbed[i] + dark_loss + r.absorbed[i]),
            residual: scale * r.residual[i],
        };
    }
    let mut snapshots = w.snapshots;
    snapshots.extend(r.snapshots);
    Ok(SimRecord {
        read_leg: controls.read_leg,
        transmitted: w.transmitted,
        retrieved: r.retrieved,
        stored,
        spinwave_snapshots: snapshots,
        energy_ledger: ledger,
    })
}
