mod common;

use common::*;
use eitmem::dynamics::dense::{dense_read, dense_write};
use eitmem::dynamics::*;
use eitmem::model::*;
use eitmem::optics::*;
use num_complex::Complex64;

fn small_grid() -> GridSpec {
    GridSpec::square(32, 2.56e-3).unwrap()
}

fn rel_diff(a: &ndarray::Array3<Complex64>, b: &ndarray::Array3<Complex64>) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn bar_probe(c: Channel, tilt: f64, cyc: &Cycle, grid: &GridSpec, m: &ValidatedModel) -> ProbeField {
    probe(MaskKind::ThreeSlit { width: 0.32e-3, pitch: 0.64e-3 }, c, tilt, cyc.pulse(), grid, m, &cyc.write_nodes())
}

#[test]
fn beer_lambert_two_level() {
    let m = model(2.0, 0.0);
    let grid = GridSpec::square(32, 2.56e-3).unwrap();
    let nodes = TimeGrid::new(0.0, 8e-6, 0.05 / gamma4());
    let p = probe(MaskKind::Uniform, Channel::Ch1, 0.0, GaussianPulse { center: 4e-6, fwhm: 1e-6 }, &grid, &m, &nodes);
    let w = write_stage(std::slice::from_ref(&p), &ControlProfile::dark(), 0.0, &m, &nodes, &SimOptions { nz: 64 }).unwrap();
    let t = w.transmitted[0].photons() / p.photons();
    assert!((t - (-2.0f64).exp()).abs() < 0.02 * (-2.0f64).exp(), "{t}");
}

#[test]
fn group_delay_matches_steady_state_slope() {
    // Steady state of the column equations gives e(z) = e(0)·exp(−κ L z χ) with
    // χ(ω) = g²/(a − iω + Ω²/(b − iω)); its ω-slope at ω = 0 is od/(4Ω²) in 1/Γ.
    let m = model(10.0, 0.0);
    let grid = GridSpec::square(16, 2.56e-3).unwrap();
    let nodes = TimeGrid::new(0.0, 16e-6, 0.02 / gamma4());
    let p = probe(MaskKind::Uniform, Channel::Ch1, 0.0, GaussianPulse { center: 8e-6, fwhm: 2e-6 }, &grid, &m, &nodes);
    let w = write_stage(std::slice::from_ref(&p), &ControlProfile::constant(gamma4()), 0.0, &m, &nodes, &SimOptions { nz: 64 }).unwrap();
    let out = &w.transmitted[0];
    let delay = (peak_time(&out.power_trace(), &out.time) - peak_time(&p.power_trace(), &p.time)) * gamma4();
    let expect = 10.0 / 4.0;
    assert!((delay - expect).abs() < 0.05 * expect, "{delay}");
}

#[test]
fn factored_matches_dense_write_and_read() {
    let m = model(8.0, 2.0 * std::f64::consts::PI * 1e4);
    let grid = small_grid();
    let mut cyc = Cycle::new(0.5e-6, 0.5, 0.8 * gamma4());
    cyc.dark = 0.0;
    let p1 = bar_probe(Channel::Ch1, 0.0, &cyc, &grid, &m);
    let p2 = probe(MaskKind::Uniform, Channel::Ch2, 0.1f64.to_radians(), cyc.pulse(), &grid, &m, &cyc.write_nodes());
    let (controls, timing) = cyc.parts();
    let opts = SimOptions { nz: 12 };
    let probes = [p1, p2];
    let w = write_stage(&probes, &controls.omega_write, 0.0, &m, &timing.write_grid(), &opts).unwrap();
    let d = dense_write(&probes, &controls.omega_write, &m, &timing.write_grid(), &opts).unwrap();
    for c in Channel::ALL {
        let i = c.index();
        assert!(rel_diff(&w.transmitted[i].to_dense(), &d.field[i]) < 1e-9);
        assert!(rel_diff(&w.spin.to_dense(c), &d.spin[i]) < 1e-9);
    }
    for (leg, angle) in [(ReadLeg::R795, 0.0), (ReadLeg::Rprime780, 2.5f64.to_radians())] {
        let mut spin = w.spin.clone();
        for ch in &mut spin.channels {
            ch.write_angle = angle - ch.tilt;
        }
        let r = read_out(&spin, leg, &controls.omega_read, angle, &m, &timing.read_grid()).unwrap();
        let dr = dense_read(&spin, leg, &controls.omega_read, angle, &m, &timing.read_grid()).unwrap();
        for c in Channel::ALL {
            let i = c.index();
            let e = rel_diff(&r.retrieved[i].to_dense(), &dr.field[i]);
            assert!(e < 1e-9, "{leg:?} {c:?}: {e}");
        }
    }
}

#[test]
fn ledger_closes_and_is_passive() {
    let m = model(30.0, 2.0 * std::f64::consts::PI * 1e3);
    let grid = small_grid();
    let cyc = Cycle::new(1e-6, 0.5, 0.7 * gamma4());
    let p = bar_probe(Channel::Ch1, 0.0, &cyc, &grid, &m);
    let rec = cyc.run(&[p], &m, 64).unwrap();
    let l = rec.ledger(Channel::Ch1);
    assert!(l.closure_error() < 1e-9, "{l:?}");
    assert!(l.eta_leak() + l.eta_ret() <= 1.0 + 1e-6);
    assert!(l.eta_ret() > 0.1);
}

#[test]
fn zero_input_gives_zero_output() {
    let m = model(30.0, 0.0);
    let grid = small_grid();
    let cyc = Cycle::new(1e-6, 0.5, gamma4());
    let mut p = bar_probe(Channel::Ch1, 0.0, &cyc, &grid, &m);
    p.terms.clear();
    let rec = cyc.run(&[p], &m, 16).unwrap();
    for c in Channel::ALL {
        assert_eq!(rec.ledger(c).eta_ret(), 0.0);
        assert!(rec.retrieved(c).to_dense().iter().all(|z| z.norm() == 0.0));
    }
}

#[test]
fn channels_are_isolated_on_both_legs() {
    let m = model(30.0, 0.0);
    let grid = GridSpec::square(256, 2.15e-3).unwrap();
    for leg in [ReadLeg::R795, ReadLeg::Rprime780] {
        let mut cyc = Cycle::new(1e-6, 0.5, gamma4());
        cyc.leg = leg;
        let p = probe(MaskKind::Uniform, Channel::Ch1, 1.33f64.to_radians(), cyc.pulse(), &grid, &m, &cyc.write_nodes());
        let rec = cyc.run(&[p], &m, 32).unwrap();
        assert!(rec.ledger(Channel::Ch1).retrieved > 0.0);
        assert_eq!(rec.ledger(Channel::Ch2).retrieved, 0.0);
        assert!(rec.retrieved(Channel::Ch2).terms.is_empty());
    }
}

#[test]
fn retrieved_carrier_follows_read_leg() {
    let m = model(20.0, 0.0);
    let grid = small_grid();
    for (leg, lambda) in [(ReadLeg::R795, 795e-9), (ReadLeg::Rprime780, 780e-9)] {
        let mut cyc = Cycle::new(1e-6, 0.5, gamma4());
        cyc.leg = leg;
        let p = bar_probe(Channel::Ch1, 0.0, &cyc, &grid, &m);
        let rec = cyc.run(&[p], &m, 16).unwrap();
        assert!((rec.retrieved(Channel::Ch1).carrier_wavelength - lambda).abs() < 1.0e-9);
        assert_eq!(rec.transmitted(Channel::Ch1).carrier_wavelength, m.probe_wavelength(Channel::Ch1));
    }
}

#[test]
fn deterministic_across_worker_counts() {
    let m = model(20.0, 0.0);
    let grid = small_grid();
    let cyc = Cycle::new(1e-6, 0.5, gamma4());
    let p = bar_probe(Channel::Ch1, 0.0, &cyc, &grid, &m);
    let run = |n| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| cyc.run(std::slice::from_ref(&p), &m, 16).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn two_read_pulses_split_the_single_read_energy() {
    let m = model(30.0, 0.0);
    let grid = small_grid();
    let cyc = Cycle::new(1e-6, 0.5, 0.7 * gamma4());
    let p = bar_probe(Channel::Ch1, 0.0, &cyc, &grid, &m);
    let single = cyc.run(std::slice::from_ref(&p), &m, 32).unwrap().ledger(Channel::Ch1).retrieved;

    let (mut controls, mut timing) = cyc.parts();
    let t0 = timing.t_read_on;
    let ramp = 0.1e-6;
    let rabi = 0.7 * gamma4();
    let first = ControlPulse { rabi: 0.35 * rabi, t_on: t0, t_off: t0 + 0.3e-6, ramp };
    let second = ControlPulse { rabi, t_on: t0 + 4e-6, t_off: t0 + 7e-6, ramp };
    controls.omega_read = ControlProfile { pulses: vec![first, second] };
    timing.t_end = t0 + 12e-6;
    let rec = simulate_sequence_with(&[p], &controls, &m, &timing, &SimOptions { nz: 32 }).unwrap();
    let trace = rec.retrieved(Channel::Ch1).power_trace();
    let t = rec.retrieved(Channel::Ch1).time;
    let split = (0..trace.len()).position(|n| t.time(n) > t0 + 3e-6).unwrap();
    let lobe1: f64 = trace[..split].iter().sum();
    let lobe2: f64 = trace[split..].iter().sum();
    assert!(lobe1 > 0.1 * (lobe1 + lobe2) && lobe2 > 0.1 * (lobe1 + lobe2), "{lobe1} {lobe2}");
    let total = rec.ledger(Channel::Ch1).retrieved;
    assert!((total - single).abs() < 0.01 * single, "{total} vs {single}");
}
