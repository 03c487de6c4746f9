//! Per-pixel reference kernel.
//!
//! Marches the full (x, y, τ) field slab by slab: half-slab diffraction, the
//! atomic response of every pixel, half-slab diffraction. Slow, but it makes no
//! use of the separable structure of the factored kernel, so the two can be
//! cross-checked on small grids.

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use super::column::{march, ColumnMedium, ColumnState, Drive};
use super::kernel::{check_step, drive, leg_medium, SimOptions};
use super::mismatch::delta_kz;
use super::spinwave::SpinWaveState;
use crate::error::Result;
use crate::model::{Channel, ControlProfile, ProbeField, ReadLeg, TimeGrid, ValidatedModel};
use crate::optics::Propagator;

/// Dense outputs of one window. Fields are (nx, ny, nt) in rad/s; spins are
/// (nx, ny, nz) in the same flux-normalized units as `SpinWaveState::to_dense`.
#[derive(Debug, Clone)]
pub struct DenseOutcome {
    pub field: [Array3<Complex64>; 2],
    pub spin: [Array3<Complex64>; 2],
}

fn diffract(field: &mut Array3<Complex64>, prop: &Propagator, transfer: &Array2<Complex64>) {
    for mut slice in field.axis_iter_mut(Axis(2)) {
        let mut s = slice.to_owned();
        prop.propagate_in_place(&mut s, transfer);
        slice.assign(&s);
    }
}

/// Advances every pixel of `field` through slab `j`, starting from `spin0`.
fn slab(
    field: &mut Array3<Complex64>,
    spin0: &Array2<Complex64>,
    medium: &ColumnMedium,
    j: usize,
    drv: &Drive,
    stage: &'static str,
) -> Result<Array2<Complex64>> {
    let one = ColumnMedium {
        a: medium.a,
        b: medium.b,
        g: vec![medium.g[j]],
        dz: medium.dz,
    };
    let (nx, ny, nt) = field.dim();
    let runs: Vec<(Vec<Complex64>, Complex64)> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (ix, iy) = (k / ny, k % ny);
            let e: Vec<Complex64> = (0..nt).map(|n| field[[ix, iy, n]]).collect();
            let run = march(&one, drv, &e, &ColumnState::from_spin(vec![spin0[[ix, iy]]]), stage)?;
            Ok((run.e_out, run.state.s[0]))
        })
        .collect::<Result<_>>()?;
    let mut spin = Array2::zeros((nx, ny));
    for (k, (e, s)) in runs.into_iter().enumerate() {
        let (ix, iy) = (k / ny, k % ny);
        for (n, v) in e.into_iter().enumerate() {
            field[[ix, iy, n]] = v;
        }
        spin[[ix, iy]] = s;
    }
    Ok(spin)
}

/// Dense counterpart of `write_stage`.
pub fn dense_write(
    probes: &[ProbeField],
    omega: &ControlProfile,
    model: &ValidatedModel,
    nodes: &TimeGrid,
    opts: &SimOptions,
) -> Result<DenseOutcome> {
    let grid = probes[0].grid;
    let g4 = model.scheme().gamma4;
    check_step(nodes.dtau, g4, &[omega])?;
    let prop = Propagator::new(grid);
    let drv = drive(omega, nodes, g4);
    let (nx, ny) = grid.shape();
    let nt = nodes.nt - 1;
    let half = 0.5 * model.medium().length_l / opts.nz as f64;
    let mut fields = Vec::new();
    let mut spins = Vec::new();
    for c in Channel::ALL {
        let lambda = model.probe_wavelength(c);
        let (medium, g_ref) = leg_medium(model, c, ReadLeg::R795, opts.nz);
        let mut e = Array3::<Complex64>::zeros((nx, ny, nt));
        for p in probes.iter().filter(|p| p.channel == c) {
            e += &p.to_dense();
        }
        e.mapv_inplace(|v| v / (g4 * g_ref));
        let h = prop.transfer(half, lambda);
        let mut spin = Array3::zeros((nx, ny, opts.nz));
        let zero = Array2::zeros((nx, ny));
        for j in 0..opts.nz {
            diffract(&mut e, &prop, &h);
            let s = slab(&mut e, &zero, &medium, j, &drv, "write")?;
            spin.index_axis_mut(Axis(2), j).assign(&s);
            diffract(&mut e, &prop, &h);
        }
        e.mapv_inplace(|v| v * (g4 * g_ref));
        fields.push(e);
        spins.push(spin);
    }
    let (f2, f1) = (fields.pop().unwrap(), fields.pop().unwrap());
    let (s2, s1) = (spins.pop().unwrap(), spins.pop().unwrap());
    Ok(DenseOutcome {
        field: [f1, f2],
        spin: [s1, s2],
    })
}

/// Dense counterpart of `read_out`; the returned spins are what remains after the window.
pub fn dense_read(
    state: &SpinWaveState,
    leg: ReadLeg,
    omega: &ControlProfile,
    read_angle: f64,
    model: &ValidatedModel,
    nodes: &TimeGrid,
) -> Result<DenseOutcome> {
    let g4 = model.scheme().gamma4;
    check_step(nodes.dtau, g4, &[omega])?;
    let grid = state.grid;
    let prop = Propagator::new(grid);
    let drv = drive(omega, nodes, g4);
    let (nx, ny) = grid.shape();
    let nt = nodes.nt - 1;
    let nz = state.nz;
    let length = model.medium().length_l;
    let mut fields = Vec::new();
    let mut spins = Vec::new();
    for c in Channel::ALL {
        let ch = state.channel(c);
        let lambda_out = model.output_wavelength(c, leg);
        let (medium, g_ref) = leg_medium(model, c, leg, nz);
        let dkz = delta_kz(
            ch.write_angle,
            read_angle - ch.tilt,
            model.control_wavelength(ReadLeg::R795),
            model.control_wavelength(leg),
        );
        let stored = state.to_dense(c);
        let h = prop.transfer(0.5 * length / nz as f64, lambda_out);
        let mut e = Array3::<Complex64>::zeros((nx, ny, nt));
        let mut left = Array3::zeros((nx, ny, nz));
        for j in 0..nz {
            let phase = Complex64::from_polar(1.0, dkz * length * (j as f64 + 0.5) / nz as f64);
            let s0 = stored.index_axis(Axis(2), j).mapv(|v| v * phase);
            diffract(&mut e, &prop, &h);
            let s = slab(&mut e, &s0, &medium, j, &drv, "read")?;
            left.index_axis_mut(Axis(2), j).assign(&s);
            diffract(&mut e, &prop, &h);
        }
        e.mapv_inplace(|v| v * (g4 * g_ref));
        fields.push(e);
        spins.push(left);
    }
    let (f2, f1) = (fields.pop().unwrap(), fields.pop().unwrap());
    let (s2, s1) = (spins.pop().unwrap(), spins.pop().unwrap());
    Ok(DenseOutcome {
        field: [f1, f2],
        spin: [s1, s2],
    })
}
