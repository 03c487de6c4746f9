use serde::{Deserialize, Serialize};

/// Flat scalar summary written to `metrics.json`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub eta_ch1: f64,
    pub eta_ch2: f64,
    /// Slit visibility of the retrieved channel-1 image, when the mask has slits.
    pub visibility: Option<f64>,
    /// Only defined when exactly one channel is driven.
    pub crosstalk_db: Option<f64>,
    /// Overlap of the input and retrieved channel-1 images.
    pub correlation: Option<f64>,
    pub camera_total_counts: u64,
    /// Counts per PGM grey level of the camera images.
    pub camera_pgm_scale: f64,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}
