//! Bundled scenario configs.

use super::config::Scenario;
use crate::error::{Error, Result};

pub const PRESETS: [(&str, &str); 8] = [
    ("fig2_dual_storage", include_str!("../../presets/fig2_dual_storage.ini")),
    ("fig3_conversion", include_str!("../../presets/fig3_conversion.ini")),
    ("fig4_lambda_highOD", include_str!("../../presets/fig4_lambda_highOD.ini")),
    ("fig4_lambda_highOD_conv", include_str!("../../presets/fig4_lambda_highOD_conv.ini")),
    ("beamsplitter", include_str!("../../presets/beamsplitter.ini")),
    ("supp1_crosstalk", include_str!("../../presets/supp1_crosstalk.ini")),
    ("supp3_interference", include_str!("../../presets/supp3_interference.ini")),
    ("supp4_lowphoton", include_str!("../../presets/supp4_lowphoton.ini")),
];

pub fn preset(name: &str) -> Result<Scenario> {
    let text = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Unknown {
            kind: "preset",
            name: name.to_string(),
        })?;
    text.parse()
}
