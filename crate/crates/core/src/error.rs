use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong between reading a config and writing artifacts.
#[derive(Debug, Error)]
pub enum Error {
    /// A model or scenario invariant does not hold. `name` identifies the
    /// violated invariant (or config key path).
    #[error("invariant `{name}` violated: {detail}")]
    Invariant { name: String, detail: String },

    #[error("config parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("transverse grid does not resolve {what}: need dx < {limit:.3e} m, have {dx:.3e} m")]
    UnderResolved { what: String, limit: f64, dx: f64 },

    #[error("paraxial band limit violated: max |k_perp|/k = {ratio:.3}")]
    BandLimit { ratio: f64 },

    #[error("time step {dtau_gamma:.3}/Gamma4 exceeds the 0.1/Gamma4 limit while a control is on")]
    StepTooLarge { dtau_gamma: f64 },

    #[error("non-finite value in {stage} at slab {slab}; aborting")]
    NonFinite { stage: &'static str, slab: usize },

    #[error("image does not fit the grid after 4-f imaging (magnification {magnification:.3})")]
    ImageOverflow { magnification: f64 },

    #[error("zero-energy reference field")]
    ZeroEnergy,

    #[error("{0}")]
    Metric(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invariant(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Invariant {
            name: name.into(),
            detail: detail.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable short identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invariant { .. } => "invariant",
            Error::Parse { .. } => "parse",
            Error::UnknownKey(_) => "unknown_key",
            Error::UnderResolved { .. } => "under_resolved",
            Error::BandLimit { .. } => "band_limit",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::NonFinite { .. } => "non_finite",
            Error::ImageOverflow { .. } => "image_overflow",
            Error::ZeroEnergy => "zero_energy",
            Error::Metric(_) => "metric",
            Error::Unknown { .. } => "unknown",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for numerical aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite { .. } | Error::StepTooLarge { .. } => 3,
            Error::Io { .. } | Error::Csv(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
