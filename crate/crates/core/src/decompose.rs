//! Successive tone extraction with joint refitting.
//!
//! Each iteration takes the FFT of the current residual, picks the bin pair
//! with the largest two-bin amplitude estimate, refines the peak inside it,
//! then refits amplitudes and phases of every accepted frequency against the
//! original signal. The residual for the next iteration is `x − Yλ`.
//!
//! Known-order runs stop after exactly `M` tones (or fail). Blind runs stop
//! when the residual energy drops to `τ · ‖x‖²`, when `max_tones` is reached,
//! or when a newly refined frequency cannot be added to the fit.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::detect::{bin_candidates, select_bin};
use crate::error::{Error, Result};
use crate::fit::JointFitter;
use crate::refine::{refine_robust, RefineConfig};
use crate::signal::{wrap_phase, Signal, Tone};
use crate::spectrum::{dft, HalfSpectrum};

pub const DEFAULT_MAX_TONES: usize = 32;
pub const DEFAULT_RESIDUAL_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "tones")]
pub enum Mode {
    Known(usize),
    Blind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionConfig {
    pub mode: Mode,
    pub refine: RefineConfig,
    /// Cap on extracted tones in blind mode.
    pub max_tones: usize,
    /// Blind-mode stopping threshold `τ` on `‖residual‖² / ‖x‖²`.
    pub residual_energy_fraction: f64,
    /// Reported only; not enforced.
    pub min_bin_separation: usize,
}

impl DecompositionConfig {
    pub fn known(tones: usize) -> Self {
        Self {
            mode: Mode::Known(tones),
            max_tones: tones.max(DEFAULT_MAX_TONES),
            ..Self::blind()
        }
    }

    pub fn blind() -> Self {
        Self {
            mode: Mode::Blind,
            refine: RefineConfig::default(),
            max_tones: DEFAULT_MAX_TONES,
            residual_energy_fraction: DEFAULT_RESIDUAL_FRACTION,
            min_bin_separation: 0,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.refine = RefineConfig::new(epsilon);
        self
    }

    pub fn with_threshold(mut self, fraction: f64) -> Self {
        self.residual_energy_fraction = fraction;
        self
    }

    pub fn with_max_tones(mut self, max_tones: usize) -> Self {
        self.max_tones = max_tones;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.refine.validate()?;
        if self.max_tones == 0 {
            return Err(Error::InvalidConfig("max_tones must be positive".into()));
        }
        if let Mode::Known(m) = self.mode {
            if m == 0 {
                return Err(Error::InvalidConfig("known tone count must be positive".into()));
            }
            if m > self.max_tones {
                return Err(Error::InvalidConfig(format!(
                    "known tone count {m} exceeds max_tones {}",
                    self.max_tones
                )));
            }
        }
        let tau = self.residual_energy_fraction;
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "residual energy fraction {tau} outside (0, 1)"
            )));
        }
        Ok(())
    }
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self::blind()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ReachedM,
    ResidualBelowThreshold,
    MaxTonesHit,
    NoCandidate,
    /// The refined frequency duplicated an accepted one or made the joint
    /// fit ill-conditioned.
    FrequencyRejected,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::ReachedM => "reached_m",
            StopReason::ResidualBelowThreshold => "residual_below_threshold",
            StopReason::MaxTonesHit => "max_tones_hit",
            StopReason::NoCandidate => "no_candidate",
            StopReason::FrequencyRejected => "frequency_rejected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub selected_bin: usize,
    pub bin_amplitude: f64,
    pub frequency: f64,
    /// `‖x − Yλ‖²` after the joint fit of this iteration.
    pub residual_energy: f64,
    pub evaluations: usize,
    pub repairs: usize,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    /// Extraction order; amplitudes and phases from the final joint fit.
    pub tones: Vec<Tone>,
    pub residual: Signal,
    pub original_energy: f64,
    pub diagnostics: Vec<IterationRecord>,
    pub stop_reason: StopReason,
    /// Frequency that ended a blind run with [`StopReason::FrequencyRejected`].
    pub rejected_frequency: Option<f64>,
}

impl DecompositionResult {
    pub fn frequencies(&self) -> Vec<f64> {
        self.tones.iter().map(|t| t.frequency).collect()
    }

    pub fn residual_energy(&self) -> f64 {
        self.residual.energy()
    }

    pub fn total_evaluations(&self) -> usize {
        self.diagnostics.iter().map(|d| d.evaluations).sum()
    }
}

pub fn decompose(x: &Signal, cfg: &DecompositionConfig) -> Result<DecompositionResult> {
    decompose_with_observer(x, cfg, |_, _| {})
}

/// [`decompose`] that hands every residual spectrum it analyses to
/// `observer(iteration, spectrum)`; iteration 0 is the spectrum of `x`.
pub fn decompose_with_observer(
    x: &Signal,
    cfg: &DecompositionConfig,
    mut observer: impl FnMut(usize, &HalfSpectrum),
) -> Result<DecompositionResult> {
    cfg.validate()?;
    let n = x.len();
    if n < 4 {
        return Err(Error::TooFewSamples { len: n, min: 4 });
    }
    if let Mode::Known(m) = cfg.mode {
        if 2 * m > n {
            return Err(Error::TooManyTones {
                requested: m,
                needed: 2 * m,
                available: n,
            });
        }
    }

    let original_energy = x.energy();
    let mut fitter = JointFitter::new(x, cfg.refine.epsilon);
    let mut residual = x.clone();
    let mut diagnostics = Vec::new();
    let mut rejected_frequency = None;

    let stop_reason = loop {
        let m = fitter.len();
        match cfg.mode {
            Mode::Known(target) if m == target => break StopReason::ReachedM,
            Mode::Known(_) => {}
            Mode::Blind => {
                if residual.energy() <= cfg.residual_energy_fraction * original_energy {
                    break StopReason::ResidualBelowThreshold;
                }
                if m >= cfg.max_tones || 2 * (m + 1) > n {
                    break StopReason::MaxTonesHit;
                }
            }
        }

        let spec = dft(&residual);
        observer(m, &spec);
        let best = select_bin(&bin_candidates(&spec))?;
        if !(best.amplitude > 0.0) {
            break StopReason::NoCandidate;
        }
        let (w, trace) = refine_robust(&residual, &spec, best.k, &cfg.refine)?;
        match fitter.push(w) {
            Ok(_) => {}
            Err(Error::DuplicateFrequency { .. } | Error::IllConditioned { .. })
                if cfg.mode == Mode::Blind =>
            {
                rejected_frequency = Some(w);
                break StopReason::FrequencyRejected;
            }
            Err(e) => return Err(e),
        }
        residual = fitter.residual();
        diagnostics.push(IterationRecord {
            selected_bin: best.k,
            bin_amplitude: best.amplitude,
            frequency: w,
            residual_energy: residual.energy(),
            evaluations: trace.evaluations,
            repairs: trace.repairs,
            truncated: trace.truncated,
        });
    };

    if let Mode::Known(target) = cfg.mode {
        if fitter.len() < target {
            return Err(Error::Shortfall {
                found: fitter.len(),
                requested: target,
                reason: stop_reason.as_str().into(),
            });
        }
    }

    Ok(DecompositionResult {
        tones: fitter.tones(),
        residual,
        original_energy,
        diagnostics,
        stop_reason,
        rejected_frequency,
    })
}

/// Errors of one estimate against its matched ground-truth tone
/// (estimate minus truth; phase wrapped to `(−π, π]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneMatch {
    pub truth_index: usize,
    pub estimate_index: usize,
    pub truth: Tone,
    pub estimate: Tone,
    pub frequency_error: f64,
    pub amplitude_error: f64,
    pub phase_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    /// Sorted by `truth_index`.
    pub matches: Vec<ToneMatch>,
    pub unmatched_estimates: usize,
    pub unmatched_truth: usize,
}

/// Greedy nearest-frequency matching of estimates to ground truth.
pub fn evaluate_against_truth(estimates: &[Tone], truth: &[Tone]) -> MatchReport {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(estimates.len() * truth.len());
    for (ti, t) in truth.iter().enumerate() {
        for (ei, e) in estimates.iter().enumerate() {
            pairs.push(((e.frequency - t.frequency).abs(), ti, ei));
        }
    }
    // order by distance, then by the truth/estimate frequencies so the
    // outcome does not depend on the order of the estimate list
    pairs.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(truth[a.1].frequency.total_cmp(&truth[b.1].frequency))
            .then(estimates[a.2].frequency.total_cmp(&estimates[b.2].frequency))
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    let mut truth_used = vec![false; truth.len()];
    let mut est_used = vec![false; estimates.len()];
    let mut matches = Vec::new();
    for (_, ti, ei) in pairs {
        if truth_used[ti] || est_used[ei] {
            continue;
        }
        truth_used[ti] = true;
        est_used[ei] = true;
        let (t, e) = (truth[ti], estimates[ei]);
        matches.push(ToneMatch {
            truth_index: ti,
            estimate_index: ei,
            truth: t,
            estimate: e,
            frequency_error: e.frequency - t.frequency,
            amplitude_error: e.amplitude - t.amplitude,
            phase_error: wrap_phase(e.phase - t.phase),
        });
    }
    matches.sort_by(|a, b| a.truth_index.cmp(&b.truth_index).then(Ordering::Equal));
    MatchReport {
        unmatched_estimates: est_used.iter().filter(|u| !**u).count(),
        unmatched_truth: truth_used.iter().filter(|u| !**u).count(),
        matches,
    }
}
