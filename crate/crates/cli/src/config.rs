use std::path::Path;

use debtlab::evalcv::CompareConfig;
use debtlab::topdnn::TopDnnConfig;
use debtlab::{DatasetVariant, GeneratorConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagnoseConfig {
    pub variant: DatasetVariant,
    pub partial: String,
    pub hetero_threshold: f64,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        DiagnoseConfig {
            variant: DatasetVariant::D,
            partial: "housingfactor".into(),
            hetero_threshold: debtlab::linreg::DiagnosticsConfig::default().hetero_threshold,
        }
    }
}

/// Everything a run depends on. The manifest stores the merged value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub generator: GeneratorConfig,
    pub compare: CompareConfig,
    pub topdnn: TopDnnConfig,
    pub diagnose: DiagnoseConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            generator: GeneratorConfig::default(),
            compare: CompareConfig::default(),
            topdnn: TopDnnConfig::default(),
            diagnose: DiagnoseConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads a TOML file (`.toml`) or JSON (anything else). Keys present in
    /// the file replace the defaults one leaf at a time, so a partial nested
    /// table keeps the remaining defaults of its parent.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let invalid = |e: String| Failure::Usage(format!("invalid config {}: {e}", path.display()));
        let overlay: Value = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")) {
            let t: toml::Value = toml::from_str(&text).map_err(|e| invalid(e.to_string()))?;
            serde_json::to_value(t).map_err(|e| invalid(e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))?
        };
        Self::from_overlay(overlay).map_err(invalid)
    }

    pub fn from_overlay(overlay: Value) -> Result<Self, String> {
        let mut base = serde_json::to_value(RunConfig::default()).map_err(|e| e.to_string())?;
        merge(&mut base, overlay, "")?;
        serde_json::from_value(base).map_err(|e| e.to_string())
    }
}

fn merge(base: &mut Value, overlay: Value, at: &str) -> Result<(), String> {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                let key = if at.is_empty() { k.clone() } else { format!("{at}.{k}") };
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &key)?,
                    None => return Err(format!("unknown key '{key}'")),
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}
