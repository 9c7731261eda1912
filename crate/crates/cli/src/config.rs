use std::path::{Path, PathBuf};

use itd_core::ite::IteOptions;
use itd_core::medium::{MediumConfig, RadialMedium};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Csv,
    Json,
    Plotdata,
}

impl std::str::FromStr for Emit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Emit::Csv),
            "json" => Ok(Emit::Json),
            "plotdata" => Ok(Emit::Plotdata),
            other => Err(format!(
                "unknown emit format {other:?} (expected csv, json or plotdata)"
            )),
        }
    }
}

/// One wavenumber window of a duality trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KWindow {
    pub mode: u32,
    pub k_min: f64,
    pub k_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    400
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GridOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_cap: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
}

impl From<GridOverrides> for IteOptions {
    fn from(g: GridOverrides) -> Self {
        IteOptions {
            grid_step: g.grid_step,
            mode_cap: g.mode_cap,
            lambda_min: g.lambda_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Medium fields and the impedance parameter `t` at the top level.
    #[serde(flatten)]
    pub medium: MediumConfig,
    pub lambda_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_windows: Option<Vec<KWindow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_overrides: Option<GridOverrides>,
    /// Start of the flow sweep; chosen automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_ref: Option<f64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_emit")]
    pub emit: Vec<Emit>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("itd-out")
}

fn default_emit() -> Vec<Emit> {
    vec![Emit::Csv, Emit::Json]
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            e => e,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn check(&self) -> Result<(), CliError> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "{name} must be positive and finite, got {x}"
                )))
            }
        };
        positive("lambda_max", self.lambda_max)?;
        if !self.medium.t.is_finite() {
            return Err(CliError::Config(format!(
                "t must be finite, got {}",
                self.medium.t
            )));
        }
        if let Some(a) = self.alpha_ref {
            positive("alpha_ref", a)?;
            if a >= self.lambda_max {
                return Err(CliError::Config(format!(
                    "alpha_ref = {a} must lie below lambda_max = {}",
                    self.lambda_max
                )));
            }
        }
        for (i, w) in self.k_windows.iter().flatten().enumerate() {
            if !(w.k_min > 0.0 && w.k_max > w.k_min && w.k_max.is_finite()) || w.samples < 2 {
                return Err(CliError::Config(format!(
                    "k_windows[{i}]: need 0 < k_min < k_max and samples >= 2, got {w:?}"
                )));
            }
        }
        if let Some(g) = self.grid_overrides {
            if let Some(s) = g.grid_step {
                positive("grid_overrides.grid_step", s)?;
            }
            if let Some(s) = g.lambda_min {
                positive("grid_overrides.lambda_min", s)?;
            }
        }
        Ok(())
    }

    /// The medium, with the contrast checks applied.
    pub fn radial_medium(&self) -> Result<RadialMedium, CliError> {
        Ok(RadialMedium::from_config(&self.medium)?.validate()?)
    }

    pub fn t(&self) -> f64 {
        self.medium.t
    }

    pub fn ite_options(&self) -> IteOptions {
        self.grid_overrides.unwrap_or_default().into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"{
        "dimension": 2,
        "outer_radius": 1.0,
        "layers": [{"r": 0.5, "n": 4.0}, {"r": 1.0, "n": 0.25}],
        "obstacle": {"r": 0.2, "bc": "neumann"},
        "t": -0.5,
        "lambda_max": 120.0,
        "k_windows": [{"mode": 3, "k_min": 0.5, "k_max": 9.0}],
        "grid_overrides": {"grid_step": 0.05},
        "alpha_ref": 0.01,
        "output_dir": "results",
        "emit": ["csv", "plotdata"]
    }"#;

    #[test]
    fn round_trips() {
        for text in [
            FULL,
            r#"{"dimension": 3, "outer_radius": 2.0, "layers": [{"r": 2.0, "n": 4.0}], "lambda_max": 50}"#,
        ] {
            let a = RunConfig::parse(text).unwrap();
            let b = RunConfig::parse(&a.to_json()).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.to_json(), b.to_json());
        }
    }

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::parse(
            r#"{"dimension": 2, "outer_radius": 1.0, "layers": [{"r": 1.0, "n": 4.0}], "lambda_max": 10}"#,
        )
        .unwrap();
        assert_eq!(c.t(), 1.0);
        assert_eq!(c.emit, vec![Emit::Csv, Emit::Json]);
        assert_eq!(c.k_windows, None);
        let full = RunConfig::parse(FULL).unwrap();
        assert_eq!(full.k_windows.unwrap()[0].samples, 400);
    }

    #[test]
    fn missing_field_is_named() {
        let err =
            RunConfig::parse(r#"{"dimension": 2, "layers": [], "lambda_max": 1}"#).unwrap_err();
        assert!(err.to_string().contains("outer_radius"), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn bad_window_is_a_config_error() {
        let text = FULL.replace(r#""k_min": 0.5"#, r#""k_min": 10.0"#);
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("k_windows[0]"));
    }

    #[test]
    fn unit_index_is_degenerate() {
        let c = RunConfig::parse(
            r#"{"dimension": 2, "outer_radius": 1.0, "layers": [{"r": 1.0, "n": 1.0}], "lambda_max": 10}"#,
        )
        .unwrap();
        assert_eq!(c.radial_medium().unwrap_err().exit_code(), 2);
    }
}
