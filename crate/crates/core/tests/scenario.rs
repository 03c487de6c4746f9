use std::fs;
use std::path::Path;
use std::process::Command;

use eitmem::model::Channel;
use eitmem::scenario::{load_config, preset, run_scenario, simulate, sweep, write_config, Scenario, PRESETS};
use eitmem::Error;

/// fig2 geometry shrunk to a quick grid.
fn small() -> Scenario {
    let mut s = preset("fig2_dual_storage").unwrap();
    s.grid.n = 64;
    s.grid.nz = 24;
    s.probes[0].mask = eitmem::scenario::MaskConfig::ThreeSlit { width_mm: 0.2, pitch_mm: 0.5 };
    s.probes[1].mask = eitmem::scenario::MaskConfig::Uniform;
    s
}

fn parse(text: &str) -> eitmem::Result<Scenario> {
    text.parse()
}

#[test]
fn every_preset_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    for (name, _) in PRESETS {
        let s = preset(name).unwrap();
        let path = dir.path().join(format!("{name}.ini"));
        write_config(&s, &path).unwrap();
        assert_eq!(load_config(&path).unwrap(), s, "{name}");
        s.resolve().unwrap();
    }
}

#[test]
fn preset_headers_describe_the_setup() {
    for (name, text) in PRESETS {
        assert!(text.starts_with("# "), "{name}");
        assert!(!preset(name).unwrap().notes.is_empty());
    }
}

#[test]
fn negative_dephasing_rejected_with_key_path() {
    let text = preset("fig2_dual_storage").unwrap().to_ini().replace("gamma_s_khz = 1", "gamma_s_khz = -1");
    match parse(&text) {
        Err(Error::Invariant { name, .. }) => assert_eq!(name, "model.gamma_s_khz"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn misspelled_key_is_fatal() {
    let text = preset("fig2_dual_storage").unwrap().to_ini().replace("dark_time_us", "darktime_us");
    match parse(&text) {
        Err(Error::UnknownKey(k)) => assert_eq!(k, "timing.darktime_us"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse("[modle]\nod1 = 3\n"), Err(Error::UnknownKey(_))));
}

#[test]
fn malformed_lines_report_their_line() {
    match parse("[model]\nod1 = 3\nod2\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn dark_time_shorter_than_probe_tail_rejected() {
    let mut s = small();
    s.timing.dark_time_us = 0.1;
    match s.resolve() {
        Err(Error::Invariant { name, .. }) => assert_eq!(name, "timing.dark_time_us"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn runs_are_byte_identical() {
    let s = small();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_scenario(&s, a.path()).unwrap();
    run_scenario(&s, b.path()).unwrap();
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 8);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn seed_changes_only_camera_frames() {
    let s = small();
    let mut t = s.clone();
    t.camera.seed = 7;
    let (a, b) = (simulate(&s).unwrap(), simulate(&t).unwrap());
    assert_eq!(a.metrics.eta_ch1, b.metrics.eta_ch1);
    assert_ne!(a.counts[0], b.counts[0]);
}

#[test]
fn single_point_sweep_matches_run() {
    let s = small();
    let dir = tempfile::tempdir().unwrap();
    let reports = sweep(&s, "control.write_angle_deg", &[1.5], dir.path()).unwrap();
    let direct = simulate(&s.with_param("control.write_angle_deg", 1.5).unwrap()).unwrap();
    assert_eq!(reports, vec![direct.metrics]);
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("control.write_angle_deg,eta_ch1,eta_ch2,visibility,"));
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    sweep(&small(), "model.od1", &[], dir.path()).unwrap();
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn unknown_sweep_path_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for p in ["model.odd", "nosection.od1", "od1", "control.read_leg"] {
        assert!(matches!(sweep(&small(), p, &[1.0], dir.path()), Err(Error::Unknown { .. })), "{p}");
        assert!(matches!(sweep(&small(), p, &[], dir.path()), Err(Error::Unknown { .. })), "{p}");
    }
}

#[test]
fn optional_keys_can_be_swept() {
    let s = small().with_param("control.read_angle_deg", 1.0).unwrap();
    assert_eq!(s.control.read_angle_deg, Some(1.0));
}

#[test]
fn null_probe_gives_zero_output() {
    let mut s = small();
    for p in &mut s.probes {
        p.photons = 0.0;
    }
    let dir = tempfile::tempdir().unwrap();
    let run = run_scenario(&s, dir.path()).unwrap();
    assert_eq!((run.metrics.eta_ch1, run.metrics.eta_ch2), (0.0, 0.0));
    assert_eq!(run.metrics.camera_total_counts, 0);
    let mut rd = csv::Reader::from_path(dir.path().join("trace.csv")).unwrap();
    for r in rd.records() {
        let r = r.unwrap();
        assert_eq!((&r[1], &r[2]), ("0", "0"));
    }
}

fn pgm_comments(path: &Path) -> Vec<String> {
    eitmem::io::read_pgm(path).unwrap().comments
}

#[test]
fn converted_retrieval_is_tagged_780() {
    let mut s = preset("fig3_conversion").unwrap();
    s.grid.nz = 24;
    let dir = tempfile::tempdir().unwrap();
    let run = run_scenario(&s, dir.path()).unwrap();
    assert!(run.metrics.eta_ch1 > 0.0 && run.metrics.eta_ch2 > 0.0);
    for c in ["ch1", "ch2"] {
        let tags = pgm_comments(&dir.path().join(format!("retrieved_{c}.pgm")));
        assert!(tags.iter().any(|t| t.starts_with("carrier_nm=780.")), "{tags:?}");
        let tags = pgm_comments(&dir.path().join(format!("leaked_{c}.pgm")));
        assert!(tags.iter().any(|t| t.starts_with("carrier_nm=795.")), "{tags:?}");
    }
    for c in Channel::ALL {
        assert!((run.record.retrieved(c).carrier_wavelength - 780e-9).abs() < 1e-9);
    }
}

#[test]
fn beamsplitter_lobes_sum_to_single_read() {
    let mut split = preset("beamsplitter").unwrap();
    split.grid.n = 32;
    split.grid.extent_mm = 2.56;
    split.probes[0].mask = eitmem::scenario::MaskConfig::Uniform;
    let mut single = split.clone();
    single.control.read_durations_us = vec![3.0];
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&split, dir.path()).unwrap();
    let mut rd = csv::Reader::from_path(dir.path().join("trace.csv")).unwrap();
    let t_read = split.resolve().unwrap().timing.t_read_on;
    let (mut t, mut p) = (Vec::new(), Vec::new());
    for r in rd.records() {
        let r = r.unwrap();
        let ts: f64 = r[0].parse().unwrap();
        if ts > t_read {
            t.push(ts);
            p.push(r[1].parse::<f64>().unwrap());
        }
    }
    // one lobe per read pulse, with a dark gap between them
    let second = split.resolve().unwrap().controls.omega_read.pulses[1].t_on;
    let energy = |lo: f64, hi: f64| -> f64 {
        (1..t.len()).filter(|&k| t[k] >= lo && t[k] < hi).map(|k| p[k] * (t[k] - t[k - 1])).sum()
    };
    let (e1, e2) = (energy(t_read, second), energy(second, f64::INFINITY));
    assert!(e1 > 0.1 * (e1 + e2) && e2 > 0.1 * (e1 + e2), "{e1} {e2}");
    let peak = p.iter().cloned().fold(0.0, f64::max);
    let gap = p[t.iter().position(|&x| x >= second - 0.05e-6).unwrap()];
    assert!(gap < 1e-3 * peak, "{gap} vs {peak}");
    let a = simulate(&split).unwrap().metrics.eta_ch1;
    let b = simulate(&single).unwrap().metrics.eta_ch1;
    assert!((a - b).abs() < 0.01 * b, "{a} vs {b}");
}

#[test]
fn crosstalk_preset_sweep_stays_isolated() {
    let mut s = preset("supp1_crosstalk").unwrap();
    s.grid.nz = 8;
    let dir = tempfile::tempdir().unwrap();
    let reports = sweep(&s, "probe.2.tilt_deg", &[0.5, 0.9, 1.33], dir.path()).unwrap();
    for r in reports {
        assert!(r.crosstalk_db.unwrap() < -120.0);
        assert_eq!(r.eta_ch2, 0.0);
    }
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eitmem"))
}

#[test]
fn cli_run_honours_output_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.ini");
    write_config(&small(), &cfg).unwrap();
    let out = dir.path().join("env_out");
    let st = cli().arg("run").arg(&cfg).env("EITMEM_OUT", &out).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let json: serde_json::Value = serde_json::from_slice(&fs::read(out.join("metrics.json")).unwrap()).unwrap();
    for key in ["eta_ch1", "eta_ch2", "visibility", "crosstalk_db", "correlation", "camera_total_counts", "camera_pgm_scale"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    let flag = dir.path().join("flag_out");
    let st = cli().arg("run").arg(&cfg).arg("--out").arg(&flag).arg("--seed").arg("9").env("EITMEM_OUT", &out).output().unwrap();
    assert!(st.status.success());
    assert!(flag.join("camera_ch1.pgm").exists());
}

#[test]
fn cli_config_errors_exit_2_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, small().to_ini().replace("gamma_s_khz = 1", "gamma_s_khz = -1")).unwrap();
    for args in [vec!["validate"], vec!["run"]] {
        let st = cli().args(&args).arg(&cfg).output().unwrap();
        assert_eq!(st.status.code(), Some(2));
        let err: serde_json::Value = serde_json::from_slice(&st.stderr).unwrap();
        assert_eq!(err["error"], "invariant");
        assert!(err["message"].as_str().unwrap().contains("model.gamma_s_khz"));
    }
    let st = cli().args(["oracle", "nope"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn cli_step_too_large_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("coarse.ini");
    let mut s = small();
    s.timing.dtau_gamma4 = 0.2;
    write_config(&s, &cfg).unwrap();
    let st = cli().arg("run").arg(&cfg).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(st.status.code(), Some(3), "{}", String::from_utf8_lossy(&st.stderr));
}

#[test]
fn cli_lists_presets_and_runs_oracles() {
    let st = cli().args(["presets", "--list"]).output().unwrap();
    let text = String::from_utf8(st.stdout).unwrap();
    for (name, _) in PRESETS {
        assert!(text.lines().any(|l| l == name));
    }
    let st = cli().args(["oracle", "beer_lambert"]).output().unwrap();
    assert!(st.status.success());
    assert!(String::from_utf8(st.stdout).unwrap().starts_with("PASS beer_lambert"));
    let st = cli().args(["validate", "fig4_lambda_highOD"]).output().unwrap();
    assert!(st.status.success());
}

#[test]
fn cli_sweep_reads_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.ini");
    write_config(&small(), &cfg).unwrap();
    let out = dir.path().join("sw");
    let st = cli()
        .arg("sweep")
        .arg(&cfg)
        .args(["--param", "model.od1", "--values", "4,8", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(out.join("point_001/metrics.json").exists());
}
