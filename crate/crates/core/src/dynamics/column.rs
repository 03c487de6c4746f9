//! One-dimensional (z, τ) march of the weak-probe Maxwell–Bloch equations for a
//! single transverse mode.
//!
//! Variables are flux-normalized and dimensionless (time in 1/Γ₄, z in units of L):
//!
//! ```text
//! ∂τ P = −a P + i g e + i Ω S
//! ∂τ S = −b S + i Ω P
//! ∂z e = i g P
//! ```
//!
//! Each slab of width dz is advanced with the implicit midpoint rule in τ; inside
//! the slab the atoms see the mid-slab field e_in + i g dz P/2. With these choices
//! `h·Σ|e_out|² + dz·Σ(|P|² + |S|²)` changes only by the dissipated amount, so the
//! energy ledger closes to rounding.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Longitudinal medium seen by one channel on one leg.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMedium {
    /// Optical coherence decay plus detuning, Γ/(2Γ₄) + iΔ/Γ₄.
    pub a: Complex64,
    /// Spin coherence decay plus two-photon detuning, γ_s/Γ₄ + iδ/Γ₄.
    pub b: Complex64,
    /// Coupling per slab.
    pub g: Vec<f64>,
    pub dz: f64,
}

impl ColumnMedium {
    pub fn nz(&self) -> usize {
        self.g.len()
    }

    fn is_uniform(&self) -> bool {
        self.g.windows(2).all(|w| w[0] == w[1])
    }
}

/// Control Rabi frequency at each interval midpoint, normalized to Γ₄.
#[derive(Debug, Clone, PartialEq)]
pub struct Drive {
    pub h: f64,
    pub omega: Vec<f64>,
}

impl Drive {
    pub fn steps(&self) -> usize {
        self.omega.len()
    }
}

/// Atomic state of every slab at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnState {
    pub p: Vec<Complex64>,
    pub s: Vec<Complex64>,
}

impl ColumnState {
    pub fn zeros(nz: usize) -> Self {
        ColumnState {
            p: vec![Complex64::new(0.0, 0.0); nz],
            s: vec![Complex64::new(0.0, 0.0); nz],
        }
    }

    pub fn from_spin(s: Vec<Complex64>) -> Self {
        ColumnState {
            p: vec![Complex64::new(0.0, 0.0); s.len()],
            s,
        }
    }

    /// dz·Σ(|P|² + |S|²).
    pub fn energy(&self, dz: f64) -> f64 {
        dz * self.p.iter().chain(&self.s).map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn spin_energy(&self, dz: f64) -> f64 {
        dz * self.s.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnOutput {
    /// Field leaving the last slab, one value per interval.
    pub e_out: Vec<Complex64>,
    pub state: ColumnState,
    /// Energy dissipated by optical and spin decay.
    pub absorbed: f64,
    /// dz·Σ|S|² at every time node, `steps + 1` values.
    pub spin_energy: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Step {
    n11: Complex64,
    n12: Complex64,
    n21: Complex64,
    n22: Complex64,
    c1: Complex64,
    c2: Complex64,
}

fn step_coefficients(h: f64, a: Complex64, b: Complex64, omega: f64, g: f64) -> Step {
    let hh = 0.5 * h;
    let ma = 1.0 + hh * a;
    let mb = 1.0 + hh * b;
    let off = I * hh * omega;
    let det = ma * mb - off * off;
    let inv = 1.0 / det;
    // M⁻¹ = [[mb, off], [off, ma]]/det, N = I + hA/2 = [[2 − ma, off], [off, 2 − mb]]
    let (pa, pb) = (2.0 - ma, 2.0 - mb);
    Step {
        n11: (mb * pa + off * off) * inv,
        n12: (mb * off + off * pb) * inv,
        n21: (off * pa + ma * off) * inv,
        n22: (off * off + ma * pb) * inv,
        c1: I * h * g * mb * inv,
        c2: I * h * g * off * inv,
    }
}

fn coefficients(medium: &ColumnMedium, drive: &Drive, g: f64) -> Vec<Step> {
    let a_eff = medium.a + 0.5 * g * g * medium.dz;
    drive
        .omega
        .iter()
        .map(|&w| step_coefficients(drive.h, a_eff, medium.b, w, g))
        .collect()
}

/// Marches the column through all intervals of `drive`.
///
/// `e_in` gives the field entering slab 0 at each interval midpoint (it may be
/// empty, meaning no input).
pub fn march(
    medium: &ColumnMedium,
    drive: &Drive,
    e_in: &[Complex64],
    init: &ColumnState,
    stage: &'static str,
) -> Result<ColumnOutput> {
    let steps = drive.steps();
    let nz = medium.nz();
    assert!(e_in.is_empty() || e_in.len() == steps, "input trace length mismatch");
    assert_eq!(init.p.len(), nz);
    let zero = Complex64::new(0.0, 0.0);
    let mut field: Vec<Complex64> = if e_in.is_empty() { vec![zero; steps] } else { e_in.to_vec() };
    let mut state = init.clone();
    let mut spin_energy = vec![0.0; steps + 1];
    let mut absorbed = 0.0;
    let uniform = medium.is_uniform();
    let shared = if uniform && nz > 0 { coefficients(medium, drive, medium.g[0]) } else { Vec::new() };
    let ra = 2.0 * medium.a.re;
    let rb = 2.0 * medium.b.re;
    let w = drive.h * medium.dz;

    for j in 0..nz {
        let g = medium.g[j];
        let local;
        let coef = if uniform {
            &shared
        } else {
            local = coefficients(medium, drive, g);
            &local
        };
        let igdz = I * g * medium.dz;
        let (mut p, mut s) = (state.p[j], state.s[j]);
        let mut loss = 0.0;
        spin_energy[0] += medium.dz * s.norm_sqr();
        for (n, (c, e)) in coef.iter().zip(field.iter_mut()).enumerate() {
            let p1 = c.n11 * p + c.n12 * s + c.c1 * *e;
            let s1 = c.n21 * p + c.n22 * s + c.c2 * *e;
            let pm = 0.5 * (p + p1);
            let sm = 0.5 * (s + s1);
            *e += igdz * pm;
            loss += ra * pm.norm_sqr() + rb * sm.norm_sqr();
            p = p1;
            s = s1;
            spin_energy[n + 1] += medium.dz * s.norm_sqr();
        }
        if !(p.is_finite() && s.is_finite() && loss.is_finite()) {
            return Err(Error::NonFinite { stage, slab: j });
        }
        absorbed += w * loss;
        state.p[j] = p;
        state.s[j] = s;
    }
    if field.iter().any(|z| !z.is_finite()) {
        return Err(Error::NonFinite { stage, slab: nz.saturating_sub(1) });
    }
    Ok(ColumnOutput {
        e_out: field,
        state,
        absorbed,
        spin_energy,
    })
}

/// Runs independent columns in parallel; output order matches input order.
pub fn march_many(
    medium: &ColumnMedium,
    drive: &Drive,
    jobs: &[(Vec<Complex64>, ColumnState)],
    stage: &'static str,
) -> Result<Vec<ColumnOutput>> {
    jobs.par_iter()
        .map(|(e, st)| march(medium, drive, e, st, stage))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn medium(od: f64, nz: usize) -> ColumnMedium {
        ColumnMedium {
            a: Complex64::new(0.5, 0.0),
            b: Complex64::new(0.0, 0.0),
            g: vec![(od / 4.0).sqrt(); nz],
            dz: 1.0 / nz as f64,
        }
    }

    fn gaussian(steps: usize, h: f64, t0: f64, width: f64) -> Vec<Complex64> {
        (0..steps)
            .map(|n| {
                let t = (n as f64 + 0.5) * h;
                Complex64::new((-((t - t0) / width).powi(2)).exp(), 0.0)
            })
            .collect()
    }

    #[test]
    fn two_level_beer_lambert() {
        // slow pulse, control off: amplitude transmission e^{-od/2}
        let m = medium(2.0, 64);
        let h = 0.05;
        let steps = 8000;
        let drive = Drive { h, omega: vec![0.0; steps] };
        let e = gaussian(steps, h, 200.0, 60.0);
        let out = march(&m, &drive, &e, &ColumnState::zeros(64), "test").unwrap();
        let ein: f64 = e.iter().map(|z| z.norm_sqr()).sum();
        let eout: f64 = out.e_out.iter().map(|z| z.norm_sqr()).sum();
        assert!((eout / ein - (-2.0f64).exp()).abs() < 0.02 * (-2.0f64).exp());
    }

    #[test]
    fn ledger_closes() {
        let mut m = medium(20.0, 32);
        m.b = Complex64::new(0.01, 0.02);
        m.a = Complex64::new(0.5, 0.3);
        let h = 0.02;
        let steps = 3000;
        let omega: Vec<f64> = (0..steps).map(|n| if n < 1500 { 0.7 } else { 0.0 }).collect();
        let drive = Drive { h, omega };
        let e = gaussian(steps, h, 20.0, 6.0);
        let out = march(&m, &drive, &e, &ColumnState::zeros(32), "test").unwrap();
        let ein: f64 = h * e.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let eout: f64 = h * out.e_out.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let total = eout + out.absorbed + out.state.energy(m.dz);
        assert!((total - ein).abs() < 1e-12 * ein, "{total} vs {ein}");
        assert!(out.state.spin_energy(m.dz) > 0.05 * ein);
    }

    #[test]
    fn readout_ledger_closes_from_initial_spin() {
        let m = medium(10.0, 16);
        let h = 0.02;
        let drive = Drive { h, omega: vec![1.0; 4000] };
        let init = ColumnState::from_spin((0..16).map(|j| Complex64::new(1.0, j as f64 * 0.1)).collect());
        let e0 = init.energy(m.dz);
        let out = march(&m, &drive, &[], &init, "test").unwrap();
        let eout: f64 = h * out.e_out.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let total = eout + out.absorbed + out.state.energy(m.dz);
        assert!((total - e0).abs() < 1e-12 * e0);
        assert!(eout > 0.5 * e0);
    }

    #[test]
    fn nonuniform_ledger_closes() {
        let mut m = medium(5.0, 8);
        for (j, g) in m.g.iter_mut().enumerate() {
            *g *= 0.5 + 0.2 * j as f64;
        }
        let drive = Drive { h: 0.05, omega: (0..400).map(|n| if n < 200 { 0.5 } else { 0.0 }).collect() };
        let e = gaussian(400, 0.05, 3.0, 1.0);
        let out = march(&m, &drive, &e, &ColumnState::zeros(8), "t").unwrap();
        let ein: f64 = 0.05 * e.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let eout: f64 = 0.05 * out.e_out.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let total = eout + out.absorbed + out.state.energy(m.dz);
        assert!((total - ein).abs() < 1e-12 * ein);
    }

    #[test]
    fn non_finite_aborts() {
        let m = medium(5.0, 4);
        let drive = Drive { h: 0.05, omega: vec![0.0; 10] };
        let mut e = vec![Complex64::new(0.0, 0.0); 10];
        e[3] = Complex64::new(f64::NAN, 0.0);
        let r = march(&m, &drive, &e, &ColumnState::zeros(4), "write");
        assert!(matches!(r, Err(Error::NonFinite { stage: "write", slab: 0 })));
    }
}
