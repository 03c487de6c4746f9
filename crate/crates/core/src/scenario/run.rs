use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;

use super::build::Resolved;
use super::config::Scenario;
use crate::constants::{C, HBAR};
use crate::dynamics::{simulate_sequence_with, SimRecord};
use crate::error::{Error, Result};
use crate::io::write_pgm16;
use crate::metrics::{
    camera_render, correlation, counts_to_pgm, crosstalk, efficiency, interference_contrast, visibility,
    MetricsReport,
};
use crate::model::{build_probe, Channel, FieldTerm, ProbeField};
use crate::optics::{image_through_4f, make_mask, Image2D, Propagator};

/// Everything a run produces in memory.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub resolved: Resolved,
    pub inputs: Vec<ProbeField>,
    pub record: SimRecord,
    pub metrics: MetricsReport,
    /// Noiseless retrieved images on the camera, per channel.
    pub images: [Image2D<f64>; 2],
    /// Frame-summed camera counts, per channel.
    pub counts: [Array2<u64>; 2],
}

/// Field at the centre of the cloud, the plane the camera images.
pub fn object_plane(field: &ProbeField, length: f64) -> Result<ProbeField> {
    let prop = Propagator::new(field.grid);
    prop.check_band_limit(field.carrier_wavelength)?;
    let h = prop.transfer(-0.5 * length, field.carrier_wavelength);
    let mut out = field.clone();
    out.terms = field
        .terms
        .iter()
        .map(|t| {
            let mut p = t.profile.clone();
            prop.propagate_in_place(&mut p, &h);
            FieldTerm {
                profile: p,
                trace: t.trace.clone(),
            }
        })
        .collect();
    Ok(out)
}

/// Intensity image relayed through the 4-f system. The sensor is the grid
/// itself, so light that the magnification would push off it is cropped in
/// the object plane first; the cropped total is preserved.
pub fn relay_intensity(img: &Image2D<f64>, f1: f64, f2: f64) -> Result<Image2D<f64>> {
    let g = img.grid;
    let m = f2 / f1;
    let (hx, hy) = (0.5 * g.extent_x() - g.dx, 0.5 * g.extent_y() - g.dy);
    let mut cropped = img.clone();
    for ((i, j), v) in cropped.data.indexed_iter_mut() {
        if (g.x(i) * m).abs() > hx || (g.y(j) * m).abs() > hy {
            *v = 0.0;
        }
    }
    let total = cropped.total();
    let out = image_through_4f(&cropped.to_field(), f1, f2)?;
    let data = out.data.mapv(|z| z.re.max(0.0));
    let s = data.sum();
    let scale = if s > 0.0 { total / s } else { 0.0 };
    Ok(Image2D::new(g, data.mapv(|v| v * scale)))
}

/// Exposure-integrated image of a field exiting the medium, as seen on the camera.
pub fn camera_plane(field: &ProbeField, length: f64, f1: f64, f2: f64) -> Result<Image2D<f64>> {
    let obj = object_plane(field, length)?;
    relay_intensity(&obj.time_integrated_intensity(), f1, f2)
}

fn noiseless_pgm(img: &Image2D<f64>, comments: Vec<String>) -> crate::io::Pgm {
    let max = img.data.iter().cloned().fold(0.0, f64::max);
    let counts = img.data.mapv(|v| if max > 0.0 { (v / max * 65535.0).round() as u64 } else { 0 });
    counts_to_pgm(&counts, comments).0
}

fn same_mask(s: &Scenario) -> bool {
    s.probes.len() == 2 && s.probes[0].mask == s.probes[1].mask
}

/// Runs the simulation and computes metrics without touching the disk.
pub fn simulate(s: &Scenario) -> Result<RunOutput> {
    let r = s.resolve()?;
    let samples = r.timing.write_samples();
    let inputs: Vec<ProbeField> = r
        .probes
        .iter()
        .map(|p| build_probe(p, &r.grid, &r.model, &samples))
        .collect::<Result<_>>()?;
    let record = simulate_sequence_with(&inputs, &r.controls, &r.model, &r.timing, &r.options)?;
    let length = r.model.medium().length_l;
    let (f1, f2) = (r.lens_f1, r.lens_f2);

    let retrieved_img = [
        camera_plane(record.retrieved(Channel::Ch1), length, f1, f2)?,
        camera_plane(record.retrieved(Channel::Ch2), length, f1, f2)?,
    ];
    let eta = |c: Channel| -> Result<f64> {
        match inputs.iter().find(|p| p.channel == c) {
            Some(p) if p.photons() > 0.0 => efficiency(record.retrieved(c), p),
            _ => Ok(0.0),
        }
    };
    let first = &s.probes[0];
    let c1 = first.channel;
    let retrieved_any = record.ledger(c1).retrieved > 0.0;
    let vis = if same_mask(s) && retrieved_any {
        let obj = [
            object_plane(record.retrieved(Channel::Ch1), length)?,
            object_plane(record.retrieved(Channel::Ch2), length)?,
        ];
        Some(interference_contrast(&obj, &r.camera)?)
    } else {
        match (&r.probes[0].mask.slit_geometry(), retrieved_any) {
            (Some(g), true) => Some(visibility(&retrieved_img[c1.index()], &g.magnified(-f2 / f1))?),
            _ => None,
        }
    };
    let driven: Vec<Channel> = r.probes.iter().filter(|p| p.photons > 0.0).map(|p| p.channel).collect();
    let xtalk = if driven.len() == 1 && record.ledger(driven[0]).retrieved > 0.0 {
        Some(crosstalk(&record, driven[0])?)
    } else {
        None
    };
    let corr = if retrieved_any {
        let mask = make_mask(&r.probes[0].mask, &r.grid)?;
        let reference = relay_intensity(&mask, f1, f2)?;
        Some(correlation(&reference, &retrieved_img[c1.index()])?)
    } else {
        None
    };
    let mut counts = Vec::new();
    let mut scale: f64 = 1.0;
    for c in Channel::ALL {
        let k = camera_render(&retrieved_img[c.index()], record.ledger(c).retrieved, &r.camera)?;
        scale = scale.max(counts_to_pgm(&k, Vec::new()).1);
        counts.push(k);
    }
    let metrics = MetricsReport {
        eta_ch1: eta(Channel::Ch1)?,
        eta_ch2: eta(Channel::Ch2)?,
        visibility: vis,
        crosstalk_db: xtalk,
        correlation: corr,
        camera_total_counts: counts.iter().flat_map(|k| k.iter()).sum(),
        camera_pgm_scale: scale,
    };
    let k2 = counts.pop().expect("two channels");
    let k1 = counts.pop().expect("two channels");
    Ok(RunOutput {
        resolved: r,
        inputs,
        record,
        metrics,
        images: retrieved_img,
        counts: [k1, k2],
    })
}

fn tag(c: Channel) -> &'static str {
    match c {
        Channel::Ch1 => "ch1",
        Channel::Ch2 => "ch2",
    }
}

fn watts(field: &ProbeField) -> Vec<f64> {
    let photon_energy = HBAR * 2.0 * std::f64::consts::PI * C / field.carrier_wavelength;
    field
        .power_trace()
        .into_iter()
        .map(|p| p * field.flux_weight * photon_energy)
        .collect()
}

fn write_trace(path: &Path, rec: &SimRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t_s", "P_ch1_out_W", "P_ch2_out_W"])?;
    for pair in [
        [rec.transmitted(Channel::Ch1), rec.transmitted(Channel::Ch2)],
        [rec.retrieved(Channel::Ch1), rec.retrieved(Channel::Ch2)],
    ] {
        let (a, b) = (watts(pair[0]), watts(pair[1]));
        for (n, t) in pair[0].time.times().enumerate() {
            w.write_record([t.to_string(), a[n].to_string(), b[n].to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs `s` and writes trace.csv, PGM images and metrics.json into `out`.
pub fn run_scenario(s: &Scenario, out: &Path) -> Result<RunOutput> {
    let run = simulate(s)?;
    create_dir(out)?;
    write_trace(&out.join("trace.csv"), &run.record)?;
    let length = run.resolved.model.medium().length_l;
    let (f1, f2) = (run.resolved.lens_f1, run.resolved.lens_f2);
    for c in Channel::ALL {
        let leaked = run.record.transmitted(c);
        let retrieved = run.record.retrieved(c);
        let nm = |f: &ProbeField| format!("carrier_nm={:.3}", f.carrier_wavelength * 1e9);
        let leak_img = camera_plane(leaked, length, f1, f2)?;
        write_pgm16(
            &out.join(format!("leaked_{}.pgm", tag(c))),
            &noiseless_pgm(&leak_img, vec![nm(leaked), "noiseless, peak-normalized".into()]),
        )?;
        write_pgm16(
            &out.join(format!("retrieved_{}.pgm", tag(c))),
            &noiseless_pgm(&run.images[c.index()], vec![nm(retrieved), "noiseless, peak-normalized".into()]),
        )?;
        let counts = &run.counts[c.index()];
        let scale = counts_to_pgm(counts, Vec::new()).1;
        let comments = vec![
            nm(retrieved),
            format!("frames={}", run.resolved.camera.n_frames),
            format!("counts_per_level={scale}"),
        ];
        let (pgm, _) = counts_to_pgm(counts, comments);
        write_pgm16(&out.join(format!("camera_{}.pgm", tag(c))), &pgm)?;
    }
    let json = out.join("metrics.json");
    std::fs::write(&json, run.metrics.to_json()).map_err(|e| Error::io(&json, e))?;
    Ok(run)
}

/// Runs one point per value (in parallel), each into `out/point_NNN`, and
/// writes `out/sweep.csv` in value order.
pub fn sweep(s: &Scenario, param: &str, values: &[f64], out: &Path) -> Result<Vec<MetricsReport>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invariant("sweep.values", "values must be finite"));
    }
    // reject unknown paths even when there is nothing to run
    let probe = values.first().copied().unwrap_or_else(|| current_value(s, param));
    match s.with_param(param, probe) {
        Err(e @ Error::Unknown { .. }) => return Err(e),
        Err(e) if !values.is_empty() => return Err(e),
        _ => {}
    }
    create_dir(out)?;
    let points: Vec<(usize, Scenario)> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| Ok((i, s.with_param(param, v)?)))
        .collect::<Result<_>>()?;
    let reports: Vec<MetricsReport> = points
        .par_iter()
        .map(|(i, sc)| run_scenario(sc, &point_dir(out, *i)).map(|r| r.metrics))
        .collect::<Result<_>>()?;
    let path = out.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        param,
        "eta_ch1",
        "eta_ch2",
        "visibility",
        "crosstalk_db",
        "correlation",
        "camera_total_counts",
        "camera_pgm_scale",
    ])?;
    for (v, m) in values.iter().zip(&reports) {
        let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
        w.write_record([
            v.to_string(),
            m.eta_ch1.to_string(),
            m.eta_ch2.to_string(),
            opt(m.visibility),
            opt(m.crosstalk_db),
            opt(m.correlation),
            m.camera_total_counts.to_string(),
            m.camera_pgm_scale.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(reports)
}

fn point_dir(out: &Path, i: usize) -> PathBuf {
    out.join(format!("point_{i:03}"))
}

fn current_value(s: &Scenario, param: &str) -> f64 {
    let doc = s.to_document();
    let Some((sec, key)) = param.rsplit_once('.') else {
        return 0.0;
    };
    doc.sections
        .iter()
        .find(|x| x.name == sec)
        .and_then(|x| x.entries.iter().find(|e| e.key == key))
        .and_then(|e| e.value.split(',').next()?.trim().parse().ok())
        .unwrap_or(1.0)
}
