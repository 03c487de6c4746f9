use std::path::Path;

use super::ini::{self, Document, Entry, Section};
use crate::error::{Error, Result};
use crate::model::{Channel, DensityProfile, ReadLeg};

/// Atomic scheme, medium and detunings, in config units.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub lambda_p1_nm: f64,
    pub lambda_p2_nm: f64,
    pub lambda_conv_nm: f64,
    /// Γ/2π.
    pub gamma4_mhz: f64,
    pub gamma5_mhz: f64,
    /// γ_s/2π.
    pub gamma_s_khz: f64,
    pub delta_hf_ghz: f64,
    pub length_mm: f64,
    pub transverse_mm: f64,
    pub atom_number: f64,
    pub density_profile: DensityProfile,
    pub od1: f64,
    pub od2: f64,
    pub od_conv: f64,
    pub pop2: f64,
    pub pop3: f64,
    pub temperature_uk: Option<f64>,
    /// Detunings /2π.
    pub probe_detuning_mhz: f64,
    pub two_photon_detuning_khz: f64,
    pub read_detuning_mhz: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            lambda_p1_nm: 795.0,
            lambda_p2_nm: 795.0,
            lambda_conv_nm: 780.0,
            gamma4_mhz: 6.0,
            gamma5_mhz: 6.0,
            gamma_s_khz: 1.0,
            delta_hf_ghz: 3.0378,
            length_mm: 30.0,
            transverse_mm: 2.0,
            atom_number: 9.1e8,
            density_profile: DensityProfile::Uniform,
            od1: 10.0,
            od2: 10.0,
            od_conv: 10.0,
            pop2: 1.0,
            pop3: 1.0,
            temperature_uk: None,
            probe_detuning_mhz: 0.0,
            two_photon_detuning_khz: 0.0,
            read_detuning_mhz: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub n: usize,
    pub extent_mm: f64,
    pub nz: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: 128,
            extent_mm: 2.6,
            nz: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaskConfig {
    ThreeSlit { width_mm: f64, pitch_mm: f64 },
    DigitTwo { height_mm: f64 },
    BarTarget { bar_mm: f64 },
    Uniform,
    /// 8- or 16-bit binary PGM, resolved relative to the config file.
    Custom { file: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub channel: Channel,
    pub mask: MaskConfig,
    pub tilt_deg: f64,
    pub photons: f64,
    pub fwhm_us: f64,
    pub center_us: f64,
}

impl ProbeConfig {
    pub fn new(channel: Channel, mask: MaskConfig) -> Self {
        ProbeConfig {
            channel,
            mask,
            tilt_deg: 0.0,
            photons: 2.7e4,
            fwhm_us: 1.0,
            center_us: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig {
    /// Ω/2π of the write and read controls.
    pub write_rabi_mhz: f64,
    pub read_rabi_mhz: f64,
    pub read_leg: ReadLeg,
    pub write_angle_deg: f64,
    /// Defaults to the write angle (collinear write and read controls).
    pub read_angle_deg: Option<f64>,
    pub ramp_us: f64,
    /// Flat-top durations of successive read pulses.
    pub read_durations_us: Vec<f64>,
    /// Dark gap between successive read pulses.
    pub read_gap_us: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            write_rabi_mhz: 6.0,
            read_rabi_mhz: 6.0,
            read_leg: ReadLeg::R795,
            write_angle_deg: 2.5,
            read_angle_deg: None,
            ramp_us: 0.1,
            read_durations_us: vec![3.0],
            read_gap_us: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingConfig {
    /// Time at which the write control has fully switched off; defaults to the
    /// centre of the first probe.
    pub write_off_us: Option<f64>,
    pub dark_time_us: f64,
    /// Integrated time after the last read pulse has switched off.
    pub read_tail_us: f64,
    /// Time step in units of 1/Γ₄.
    pub dtau_gamma4: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        TimingConfig {
            write_off_us: None,
            dark_time_us: 6.7,
            read_tail_us: 1.0,
            dtau_gamma4: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraConfig {
    pub quantum_efficiency: f64,
    pub n_frames: u32,
    pub exposure_s: f64,
    pub seed: u64,
    pub lens_f1_mm: f64,
    pub lens_f2_mm: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            quantum_efficiency: 0.25,
            n_frames: 50,
            exposure_s: 1.0,
            seed: 1,
            lens_f1_mm: 300.0,
            lens_f2_mm: 500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub param: String,
    pub values: Vec<f64>,
}

/// One end-to-end experiment, as written in a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    /// Leading comment lines of the config file.
    pub notes: Vec<String>,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub probes: Vec<ProbeConfig>,
    pub control: ControlConfig,
    pub timing: TimingConfig,
    pub camera: CameraConfig,
    pub sweep: Option<SweepConfig>,
    pub output_dir: String,
}

/// Typed access to one section; every key must be consumed.
struct Reader<'a> {
    sec: &'a Section,
    used: Vec<bool>,
}

impl<'a> Reader<'a> {
    fn new(sec: &'a Section) -> Self {
        Reader {
            sec,
            used: vec![false; sec.entries.len()],
        }
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{}", self.sec.name, key)
    }

    fn raw(&mut self, key: &str) -> Option<&'a Entry> {
        let i = self.sec.entries.iter().position(|e| e.key == key)?;
        self.used[i] = true;
        Some(&self.sec.entries[i])
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(e) => parse_f64(e),
        }
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(parse_f64).transpose()
    }

    fn uint<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(e) => e.value.parse().map_err(|_| Error::Parse {
                line: e.line,
                detail: format!("`{}` expects a non-negative integer, got `{}`", e.key, e.value),
            }),
        }
    }

    fn list(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default),
            Some(e) => parse_list(&e.value, e.line),
        }
    }

    fn text(&mut self, key: &str) -> Option<(String, usize)> {
        self.raw(key).map(|e| (e.value.clone(), e.line))
    }

    fn finish(self) -> Result<()> {
        match self.used.iter().position(|u| !u) {
            Some(i) => Err(Error::UnknownKey(format!("{}.{}", self.sec.name, self.sec.entries[i].key))),
            None => Ok(()),
        }
    }
}

fn parse_f64(e: &Entry) -> Result<f64> {
    match e.value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            line: e.line,
            detail: format!("`{}` expects a finite number, got `{}`", e.key, e.value),
        }),
    }
}

/// Parses a comma-separated list of finite numbers; empty input gives an empty list.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    parse_list(s, 0)
}

pub(crate) fn parse_list(s: &str, line: usize) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| match t.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Parse {
                line,
                detail: format!("bad list element `{}`", t.trim()),
            }),
        })
        .collect()
}

fn check(ok: bool, path: String, detail: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invariant(path, detail))
    }
}

fn read_leg_name(l: ReadLeg) -> &'static str {
    match l {
        ReadLeg::R795 => "R_795",
        ReadLeg::Rprime780 => "Rprime_780",
    }
}

fn profile_name(p: DensityProfile) -> &'static str {
    match p {
        DensityProfile::Uniform => "uniform",
        DensityProfile::GaussianCigar => "gaussian_cigar",
    }
}

fn read_model(r: &mut Reader) -> Result<ModelConfig> {
    let d = ModelConfig::default();
    let profile = match r.text("density_profile") {
        None => d.density_profile,
        Some((v, line)) => match v.as_str() {
            "uniform" => DensityProfile::Uniform,
            "gaussian_cigar" => DensityProfile::GaussianCigar,
            _ => return Err(Error::Parse { line, detail: format!("unknown density_profile `{v}`") }),
        },
    };
    let m = ModelConfig {
        lambda_p1_nm: r.f64("lambda_p1_nm", d.lambda_p1_nm)?,
        lambda_p2_nm: r.f64("lambda_p2_nm", d.lambda_p2_nm)?,
        lambda_conv_nm: r.f64("lambda_conv_nm", d.lambda_conv_nm)?,
        gamma4_mhz: r.f64("gamma4_mhz", d.gamma4_mhz)?,
        gamma5_mhz: r.f64("gamma5_mhz", d.gamma5_mhz)?,
        gamma_s_khz: r.f64("gamma_s_khz", d.gamma_s_khz)?,
        delta_hf_ghz: r.f64("delta_hf_ghz", d.delta_hf_ghz)?,
        length_mm: r.f64("length_mm", d.length_mm)?,
        transverse_mm: r.f64("transverse_mm", d.transverse_mm)?,
        atom_number: r.f64("atom_number", d.atom_number)?,
        density_profile: profile,
        od1: r.f64("od1", d.od1)?,
        od2: r.f64("od2", d.od2)?,
        od_conv: r.f64("od_conv", d.od_conv)?,
        pop2: r.f64("pop2", d.pop2)?,
        pop3: r.f64("pop3", d.pop3)?,
        temperature_uk: r.opt_f64("temperature_uk")?,
        probe_detuning_mhz: r.f64("probe_detuning_mhz", d.probe_detuning_mhz)?,
        two_photon_detuning_khz: r.f64("two_photon_detuning_khz", d.two_photon_detuning_khz)?,
        read_detuning_mhz: r.f64("read_detuning_mhz", d.read_detuning_mhz)?,
    };
    Ok(m)
}

fn read_probe(r: &mut Reader, index: usize) -> Result<ProbeConfig> {
    let channel = match r.uint("channel", index)? {
        1 => Channel::Ch1,
        2 => Channel::Ch2,
        _ => return Err(Error::invariant(r.path("channel"), "must be 1 or 2")),
    };
    let (kind, line) = r
        .text("mask")
        .ok_or_else(|| Error::invariant(r.path("mask"), "missing mask kind"))?;
    let mask = match kind.as_str() {
        "three_slit" => MaskConfig::ThreeSlit {
            width_mm: r.f64("slit_width_mm", 0.2)?,
            pitch_mm: r.f64("slit_pitch_mm", 0.5)?,
        },
        "digit_two" => MaskConfig::DigitTwo {
            height_mm: r.f64("digit_height_mm", 1.2)?,
        },
        "bar_target" => MaskConfig::BarTarget {
            bar_mm: r.f64("bar_mm", 0.1)?,
        },
        "uniform" => MaskConfig::Uniform,
        "custom" => MaskConfig::Custom {
            file: r
                .text("mask_file")
                .ok_or_else(|| Error::invariant(r.path("mask_file"), "custom masks need a file"))?
                .0,
        },
        _ => return Err(Error::Parse { line, detail: format!("unknown mask kind `{kind}`") }),
    };
    let d = ProbeConfig::new(channel, mask);
    let p = ProbeConfig {
        tilt_deg: r.f64("tilt_deg", d.tilt_deg)?,
        photons: r.f64("photons", d.photons)?,
        fwhm_us: r.f64("fwhm_us", d.fwhm_us)?,
        center_us: r.f64("center_us", d.center_us)?,
        ..d
    };
    check(p.photons >= 0.0, r.path("photons"), "must be >= 0")?;
    check(p.fwhm_us > 0.0, r.path("fwhm_us"), "must be > 0")?;
    check(p.center_us >= 0.0, r.path("center_us"), "must be >= 0")?;
    Ok(p)
}

fn read_control(r: &mut Reader) -> Result<ControlConfig> {
    let d = ControlConfig::default();
    let read_leg = match r.text("read_leg") {
        None => d.read_leg,
        Some((v, line)) => match v.as_str() {
            "R_795" => ReadLeg::R795,
            "Rprime_780" => ReadLeg::Rprime780,
            _ => return Err(Error::Parse { line, detail: format!("unknown read_leg `{v}`") }),
        },
    };
    let c = ControlConfig {
        write_rabi_mhz: r.f64("write_rabi_mhz", d.write_rabi_mhz)?,
        read_rabi_mhz: r.f64("read_rabi_mhz", d.read_rabi_mhz)?,
        read_leg,
        write_angle_deg: r.f64("write_angle_deg", d.write_angle_deg)?,
        read_angle_deg: r.opt_f64("read_angle_deg")?,
        ramp_us: r.f64("ramp_us", d.ramp_us)?,
        read_durations_us: r.list("read_durations_us", d.read_durations_us)?,
        read_gap_us: r.f64("read_gap_us", d.read_gap_us)?,
    };
    check(c.write_rabi_mhz >= 0.0, r.path("write_rabi_mhz"), "must be >= 0")?;
    check(c.read_rabi_mhz >= 0.0, r.path("read_rabi_mhz"), "must be >= 0")?;
    check(c.ramp_us > 0.0, r.path("ramp_us"), "must be > 0")?;
    check(!c.read_durations_us.is_empty(), r.path("read_durations_us"), "need at least one read pulse")?;
    check(
        c.read_durations_us.iter().all(|&v| v >= 0.0),
        r.path("read_durations_us"),
        "durations must be >= 0",
    )?;
    check(c.read_gap_us >= 0.0, r.path("read_gap_us"), "must be >= 0")?;
    for (key, v) in [("write_angle_deg", Some(c.write_angle_deg)), ("read_angle_deg", c.read_angle_deg)] {
        if let Some(v) = v {
            check(v.to_radians().abs() < 0.1, r.path(key), "paraxial angles need |angle| < 0.1 rad")?;
        }
    }
    Ok(c)
}

fn read_timing(r: &mut Reader) -> Result<TimingConfig> {
    let d = TimingConfig::default();
    let t = TimingConfig {
        write_off_us: r.opt_f64("write_off_us")?,
        dark_time_us: r.f64("dark_time_us", d.dark_time_us)?,
        read_tail_us: r.f64("read_tail_us", d.read_tail_us)?,
        dtau_gamma4: r.f64("dtau_gamma4", d.dtau_gamma4)?,
    };
    check(t.dark_time_us >= 0.0, r.path("dark_time_us"), "must be >= 0")?;
    check(t.read_tail_us >= 0.0, r.path("read_tail_us"), "must be >= 0")?;
    // steps above the stability limit are a numerical abort raised by the kernel
    check(t.dtau_gamma4 > 0.0, r.path("dtau_gamma4"), "must be > 0")?;
    if let Some(w) = t.write_off_us {
        check(w > 0.0, r.path("write_off_us"), "must be > 0")?;
    }
    Ok(t)
}

fn read_camera(r: &mut Reader) -> Result<CameraConfig> {
    let d = CameraConfig::default();
    let c = CameraConfig {
        quantum_efficiency: r.f64("quantum_efficiency", d.quantum_efficiency)?,
        n_frames: r.uint("n_frames", d.n_frames)?,
        exposure_s: r.f64("exposure_s", d.exposure_s)?,
        seed: r.uint("seed", d.seed)?,
        lens_f1_mm: r.f64("lens_f1_mm", d.lens_f1_mm)?,
        lens_f2_mm: r.f64("lens_f2_mm", d.lens_f2_mm)?,
    };
    check(
        c.quantum_efficiency > 0.0 && c.quantum_efficiency <= 1.0,
        r.path("quantum_efficiency"),
        "must lie in (0, 1]",
    )?;
    check(c.n_frames >= 1, r.path("n_frames"), "must be >= 1")?;
    check(c.exposure_s > 0.0, r.path("exposure_s"), "must be > 0")?;
    check(c.lens_f1_mm > 0.0, r.path("lens_f1_mm"), "must be > 0")?;
    check(c.lens_f2_mm > 0.0, r.path("lens_f2_mm"), "must be > 0")?;
    Ok(c)
}

const SECTIONS: [&str; 9] = [
    "model", "grid", "probe.1", "probe.2", "control", "timing", "camera", "sweep", "output",
];

impl Scenario {
    pub fn from_document(doc: &Document) -> Result<Scenario> {
        for s in &doc.sections {
            if !SECTIONS.contains(&s.name.as_str()) {
                return Err(Error::UnknownKey(format!("[{}]", s.name)));
            }
        }
        let empty = |name: &str| Section {
            name: name.to_string(),
            line: 0,
            entries: Vec::new(),
        };
        let owned: Vec<Section> = SECTIONS
            .iter()
            .map(|n| doc.sections.iter().find(|s| s.name == *n).cloned().unwrap_or_else(|| empty(n)))
            .collect();
        let present = |n: &str| doc.sections.iter().any(|s| s.name == n);

        let mut r = Reader::new(&owned[0]);
        let model = read_model(&mut r)?;
        r.finish()?;

        let mut r = Reader::new(&owned[1]);
        let dg = GridConfig::default();
        let grid = GridConfig {
            n: r.uint("n", dg.n)?,
            extent_mm: r.f64("extent_mm", dg.extent_mm)?,
            nz: r.uint("nz", dg.nz)?,
        };
        check(grid.n >= 8 && grid.n.is_power_of_two(), r.path("n"), "must be a power of two >= 8")?;
        check(grid.extent_mm > 0.0, r.path("extent_mm"), "must be > 0")?;
        check(grid.nz >= 1, r.path("nz"), "must be >= 1")?;
        r.finish()?;

        let mut probes = Vec::new();
        for (i, name) in ["probe.1", "probe.2"].iter().enumerate() {
            if present(name) {
                let mut r = Reader::new(&owned[2 + i]);
                probes.push(read_probe(&mut r, i + 1)?);
                r.finish()?;
            }
        }
        if probes.is_empty() {
            return Err(Error::invariant("probe.1", "at least one probe section is required"));
        }

        let mut r = Reader::new(&owned[4]);
        let control = read_control(&mut r)?;
        r.finish()?;
        let mut r = Reader::new(&owned[5]);
        let timing = read_timing(&mut r)?;
        r.finish()?;
        let mut r = Reader::new(&owned[6]);
        let camera = read_camera(&mut r)?;
        r.finish()?;

        let sweep = if present("sweep") {
            let mut r = Reader::new(&owned[7]);
            let param = r
                .text("param")
                .ok_or_else(|| Error::invariant("sweep.param", "missing parameter path"))?
                .0;
            let values = r.list("values", Vec::new())?;
            r.finish()?;
            Some(SweepConfig { param, values })
        } else {
            None
        };

        let mut r = Reader::new(&owned[8]);
        let name = r.text("name").map_or_else(|| "scenario".to_string(), |v| v.0);
        let output_dir = r.text("dir").map_or_else(|| "out".to_string(), |v| v.0);
        r.finish()?;

        let s = Scenario {
            name,
            notes: doc.header.clone(),
            model,
            grid,
            probes,
            control,
            timing,
            camera,
            sweep,
            output_dir,
        };
        s.validate()?;
        Ok(s)
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(text: &str) -> Result<Scenario> {
        Scenario::from_document(&ini::parse(text)?)
    }
}

pub fn load_config(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut s: Scenario = text.parse()?;
    // custom mask files are relative to the config
    if let Some(dir) = path.parent() {
        for p in &mut s.probes {
            if let MaskConfig::Custom { file } = &mut p.mask {
                if Path::new(file.as_str()).is_relative() {
                    *file = dir.join(&*file).to_string_lossy().into_owned();
                }
            }
        }
    }
    Ok(s)
}

pub fn write_config(s: &Scenario, path: &Path) -> Result<()> {
    std::fs::write(path, s.to_ini()).map_err(|e| Error::io(path, e))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn section(name: &str, kv: Vec<(&str, String)>) -> Section {
    Section {
        name: name.to_string(),
        line: 0,
        entries: kv
            .into_iter()
            .map(|(k, v)| Entry {
                key: k.to_string(),
                value: v,
                line: 0,
            })
            .collect(),
    }
}

impl Scenario {
    pub fn to_document(&self) -> Document {
        let m = &self.model;
        let mut model = vec![
            ("lambda_p1_nm", m.lambda_p1_nm.to_string()),
            ("lambda_p2_nm", m.lambda_p2_nm.to_string()),
            ("lambda_conv_nm", m.lambda_conv_nm.to_string()),
            ("gamma4_mhz", m.gamma4_mhz.to_string()),
            ("gamma5_mhz", m.gamma5_mhz.to_string()),
            ("gamma_s_khz", m.gamma_s_khz.to_string()),
            ("delta_hf_ghz", m.delta_hf_ghz.to_string()),
            ("length_mm", m.length_mm.to_string()),
            ("transverse_mm", m.transverse_mm.to_string()),
            ("atom_number", m.atom_number.to_string()),
            ("density_profile", profile_name(m.density_profile).to_string()),
            ("od1", m.od1.to_string()),
            ("od2", m.od2.to_string()),
            ("od_conv", m.od_conv.to_string()),
            ("pop2", m.pop2.to_string()),
            ("pop3", m.pop3.to_string()),
        ];
        if let Some(t) = m.temperature_uk {
            model.push(("temperature_uk", t.to_string()));
        }
        model.extend([
            ("probe_detuning_mhz", m.probe_detuning_mhz.to_string()),
            ("two_photon_detuning_khz", m.two_photon_detuning_khz.to_string()),
            ("read_detuning_mhz", m.read_detuning_mhz.to_string()),
        ]);
        let mut sections = vec![
            section("model", model),
            section(
                "grid",
                vec![
                    ("n", self.grid.n.to_string()),
                    ("extent_mm", self.grid.extent_mm.to_string()),
                    ("nz", self.grid.nz.to_string()),
                ],
            ),
        ];
        for (i, p) in self.probes.iter().enumerate() {
            let ch = match p.channel {
                Channel::Ch1 => "1",
                Channel::Ch2 => "2",
            };
            let mut kv = vec![("channel", ch.to_string())];
            match &p.mask {
                MaskConfig::ThreeSlit { width_mm, pitch_mm } => kv.extend([
                    ("mask", "three_slit".to_string()),
                    ("slit_width_mm", width_mm.to_string()),
                    ("slit_pitch_mm", pitch_mm.to_string()),
                ]),
                MaskConfig::DigitTwo { height_mm } => {
                    kv.extend([("mask", "digit_two".to_string()), ("digit_height_mm", height_mm.to_string())])
                }
                MaskConfig::BarTarget { bar_mm } => {
                    kv.extend([("mask", "bar_target".to_string()), ("bar_mm", bar_mm.to_string())])
                }
                MaskConfig::Uniform => kv.push(("mask", "uniform".to_string())),
                MaskConfig::Custom { file } => {
                    kv.extend([("mask", "custom".to_string()), ("mask_file", file.clone())])
                }
            }
            kv.extend([
                ("tilt_deg", p.tilt_deg.to_string()),
                ("photons", p.photons.to_string()),
                ("fwhm_us", p.fwhm_us.to_string()),
                ("center_us", p.center_us.to_string()),
            ]);
            sections.push(section(if i == 0 { "probe.1" } else { "probe.2" }, kv));
        }
        let c = &self.control;
        let mut control = vec![
            ("write_rabi_mhz", c.write_rabi_mhz.to_string()),
            ("read_rabi_mhz", c.read_rabi_mhz.to_string()),
            ("read_leg", read_leg_name(c.read_leg).to_string()),
            ("write_angle_deg", c.write_angle_deg.to_string()),
        ];
        if let Some(a) = c.read_angle_deg {
            control.push(("read_angle_deg", a.to_string()));
        }
        control.extend([
            ("ramp_us", c.ramp_us.to_string()),
            ("read_durations_us", fmt_list(&c.read_durations_us)),
            ("read_gap_us", c.read_gap_us.to_string()),
        ]);
        sections.push(section("control", control));
        let t = &self.timing;
        let mut timing = Vec::new();
        if let Some(w) = t.write_off_us {
            timing.push(("write_off_us", w.to_string()));
        }
        timing.extend([
            ("dark_time_us", t.dark_time_us.to_string()),
            ("read_tail_us", t.read_tail_us.to_string()),
            ("dtau_gamma4", t.dtau_gamma4.to_string()),
        ]);
        sections.push(section("timing", timing));
        let k = &self.camera;
        sections.push(section(
            "camera",
            vec![
                ("quantum_efficiency", k.quantum_efficiency.to_string()),
                ("n_frames", k.n_frames.to_string()),
                ("exposure_s", k.exposure_s.to_string()),
                ("seed", k.seed.to_string()),
                ("lens_f1_mm", k.lens_f1_mm.to_string()),
                ("lens_f2_mm", k.lens_f2_mm.to_string()),
            ],
        ));
        if let Some(sw) = &self.sweep {
            sections.push(section(
                "sweep",
                vec![("param", sw.param.clone()), ("values", fmt_list(&sw.values))],
            ));
        }
        sections.push(section(
            "output",
            vec![("name", self.name.clone()), ("dir", self.output_dir.clone())],
        ));
        Document {
            header: self.notes.clone(),
            sections,
        }
    }

    pub fn to_ini(&self) -> String {
        ini::render(&self.to_document())
    }

    /// Copy with the numeric parameter at `path` (`section.key`) set to `value`.
    /// Optional keys absent from the config are added.
    pub fn with_param(&self, path: &str, value: f64) -> Result<Scenario> {
        let unknown = || Error::Unknown { kind: "parameter", name: path.to_string() };
        let (sec, key) = path.rsplit_once('.').ok_or_else(unknown)?;
        let mut doc = self.to_document();
        let s = doc.sections.iter_mut().find(|s| s.name == sec).ok_or_else(unknown)?;
        let text = if ["n", "nz", "n_frames", "seed", "channel"].contains(&key) {
            format!("{}", value.round() as i64)
        } else {
            value.to_string()
        };
        match s.entries.iter_mut().find(|e| e.key == key) {
            Some(e) if e.value.parse::<f64>().is_err() && !e.value.contains(',') => {
                return Err(Error::Unknown { kind: "numeric parameter", name: path.to_string() });
            }
            Some(e) => e.value = text,
            None => s.entries.push(Entry { key: key.to_string(), value: text, line: 0 }),
        }
        Scenario::from_document(&doc).map_err(|e| match e {
            Error::UnknownKey(_) => unknown(),
            e => e,
        })
    }
}
