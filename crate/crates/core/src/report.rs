//! Serializable result documents shared by the CLI and the bench harness.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::decompose::{DecompositionConfig, DecompositionResult, IterationRecord, Mode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToneRecord {
    pub frequency_rad_per_sample: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
    pub amplitude: f64,
    pub phase_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    /// `"known"` or `"blind"`.
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tones: Option<usize>,
    pub epsilon: f64,
    pub max_evaluations: usize,
    pub max_tones: usize,
    pub residual_threshold: f64,
}

impl From<&DecompositionConfig> for ConfigEcho {
    fn from(cfg: &DecompositionConfig) -> Self {
        let (mode, tones) = match cfg.mode {
            Mode::Known(m) => ("known", Some(m)),
            Mode::Blind => ("blind", None),
        };
        Self {
            mode: mode.into(),
            tones,
            epsilon: cfg.refine.epsilon,
            max_evaluations: cfg.refine.max_evaluations,
            max_tones: cfg.max_tones,
            residual_threshold: cfg.residual_energy_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDocument {
    pub source: String,
    pub n_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate: Option<f64>,
    pub tones: Vec<ToneRecord>,
    pub residual_energy: f64,
    pub original_energy: f64,
    pub stop_reason: String,
    pub config: ConfigEcho,
    pub diagnostics: Vec<IterationRecord>,
}

impl OutputDocument {
    pub fn new(
        result: &DecompositionResult,
        cfg: &DecompositionConfig,
        sample_rate: Option<f64>,
        source: impl Into<String>,
    ) -> Self {
        let tones = result
            .tones
            .iter()
            .map(|t| ToneRecord {
                frequency_rad_per_sample: t.frequency,
                frequency_hz: sample_rate.map(|fs| t.frequency * fs / (2.0 * PI)),
                amplitude: t.amplitude,
                phase_rad: t.phase,
            })
            .collect();
        Self {
            source: source.into(),
            n_samples: result.residual.len(),
            sample_rate,
            tones,
            residual_energy: result.residual_energy(),
            original_energy: result.original_energy,
            stop_reason: result.stop_reason.as_str().into(),
            config: cfg.into(),
            diagnostics: result.diagnostics.clone(),
        }
    }
}
