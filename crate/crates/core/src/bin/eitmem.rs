use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use eitmem::scenario::{self, load_config, preset, run_oracle, Scenario, PRESETS};
use eitmem::{Error, Result};

/// Environment variable that overrides the output directory of a config.
const OUT_ENV: &str = "EITMEM_OUT";

#[derive(Parser)]
#[command(name = "eitmem", version, about = "Tripod-EIT multi-image storage simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario and write its artifacts.
    Run {
        /// Config file, or the name of a bundled preset.
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Camera seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a parameter sweep; defaults come from the config's [sweep] section.
    Sweep {
        config: String,
        /// Parameter path such as `control.write_angle_deg`.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an analytic self-check.
    Oracle { name: String },
    /// Parse and validate a config without simulating.
    Validate { config: String },
    /// List or print the bundled presets.
    Presets {
        /// List preset names (the default).
        #[arg(long)]
        list: bool,
        /// Print the named preset's config.
        #[arg(long)]
        show: Option<String>,
    },
}

fn load(config: &str) -> Result<Scenario> {
    let path = Path::new(config);
    if !path.exists() && PRESETS.iter().any(|(n, _)| *n == config) {
        return preset(config);
    }
    load_config(path)
}

fn out_dir(flag: Option<PathBuf>, s: &Scenario) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&s.output_dir))
}

fn execute(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run { config, out, seed } => {
            let mut s = load(&config)?;
            if let Some(seed) = seed {
                s.camera.seed = seed;
            }
            let dir = out_dir(out, &s);
            let run = scenario::run_scenario(&s, &dir)?;
            println!("{}", run.metrics.to_json());
            Ok(0)
        }
        Command::Sweep { config, param, values, out } => {
            let s = load(&config)?;
            let from_config = s.sweep.clone();
            let param = param
                .or_else(|| from_config.as_ref().map(|w| w.param.clone()))
                .ok_or_else(|| Error::invariant("sweep.param", "no parameter given"))?;
            let values = match values {
                Some(v) => scenario::parse_values(&v)?,
                None => from_config.map(|w| w.values).unwrap_or_default(),
            };
            let dir = out_dir(out, &s);
            scenario::sweep(&s, &param, &values, &dir)?;
            println!("{}", dir.join("sweep.csv").display());
            Ok(0)
        }
        Command::Oracle { name } => {
            let r = run_oracle(&name)?;
            println!("{r}");
            Ok(if r.pass { 0 } else { 1 })
        }
        Command::Validate { config } => {
            let s = load(&config)?;
            s.resolve()?;
            println!("ok {}", s.name);
            Ok(0)
        }
        Command::Presets { show, .. } => {
            if let Some(name) = show {
                let text = PRESETS
                    .iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, t)| *t)
                    .ok_or(Error::Unknown { kind: "preset", name })?;
                print!("{text}");
            } else {
                for (name, _) in PRESETS {
                    println!("{name}");
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            let report = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
                "exit_code": e.exit_code(),
            });
            eprintln!("{report}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
