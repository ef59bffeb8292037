//! Brute-force oracles and measurement harnesses.
//!
//! [`dense_grid_peak`] scans `|X(w)|` on a uniform grid with compensated
//! double-double accumulation, independent of the phasor recurrence in
//! [`crate::spectrum::dtft_point`]. [`monte_carlo`] and [`runtime_scaling`]
//! drive the decomposer over synthesized scenes.
//!
//! SNR is `10·log₁₀(P / σ²)` with `P = Σ A_m² / 2`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decompose::{decompose, evaluate_against_truth, DecompositionConfig, StopReason};
use crate::error::{Error, Result};
use crate::signal::{synthesize, NoiseSpec, Signal, Tone};
use crate::spectrum::{bin_width, dtft_evaluation_count};

/// A trial counts as a detection when it returns exactly as many tones as
/// the truth and every truth tone is matched within this many bins.
pub const DETECTION_TOLERANCE_BINS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPeak {
    pub frequency: f64,
    pub magnitude: f64,
    pub grid_step: f64,
    pub evaluations: usize,
}

/// Error-free `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Double-double accumulator.
#[derive(Clone, Copy, Default)]
struct Compensated {
    hi: f64,
    lo: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, v: f64) {
        let (s, e) = two_sum(self.hi, v);
        let (hi, lo) = two_sum(s, e + self.lo);
        self.hi = hi;
        self.lo = lo;
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// `Σ x_n e^{−jwn}` with the phase `w·n` carried exactly as a double-double
/// and the sums accumulated in double-double.
pub fn accurate_dtft(x: &[f64], w: f64) -> Complex64 {
    let mut re = Compensated::default();
    let mut im = Compensated::default();
    for (n, &s) in x.iter().enumerate() {
        let t = n as f64;
        let hi = w * t;
        let lo = w.mul_add(t, -hi);
        let (sin_hi, cos_hi) = hi.sin_cos();
        let cos = cos_hi - lo * sin_hi;
        let sin = sin_hi + lo * cos_hi;
        re.add(s * cos);
        im.add(-s * sin);
    }
    Complex64::new(re.value(), im.value())
}

/// Largest `|X(w)|` over `w = w_lo + i·step ≤ w_hi`; ties go to the lower
/// frequency.
pub fn dense_grid_peak(x: &[f64], w_lo: f64, w_hi: f64, step: f64) -> Result<GridPeak> {
    if !(w_lo.is_finite() && w_hi.is_finite() && step.is_finite()) || !(w_lo < w_hi) || !(step > 0.0) {
        return Err(Error::EmptyGrid);
    }
    let count = ((w_hi - w_lo) / step).floor() as usize + 1;
    let mut best = GridPeak {
        frequency: w_lo,
        magnitude: f64::NEG_INFINITY,
        grid_step: step,
        evaluations: count,
    };
    for i in 0..count {
        let w = w_lo + i as f64 * step;
        let magnitude = accurate_dtft(x, w).norm();
        if magnitude > best.magnitude {
            best.frequency = w;
            best.magnitude = magnitude;
        }
    }
    Ok(best)
}

/// Noise standard deviation giving `snr_db` for the given tones.
pub fn noise_std_for_snr(truth: &[Tone], snr_db: f64) -> f64 {
    let power: f64 = truth.iter().map(|t| t.amplitude * t.amplitude / 2.0).sum();
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    (power / 10f64.powf(snr_db / 10.0)).sqrt()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub synthesize_secs: f64,
    pub decompose_secs: f64,
    pub evaluate_secs: f64,
}

/// Per-truth-tone errors `(frequency, amplitude, phase)`; `None` when the
/// tone went unmatched.
pub type ToneErrors = Option<(f64, f64, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub estimated_tones: usize,
    pub detected: bool,
    pub stop_reason: Option<StopReason>,
    /// Decomposition error message, if the run failed.
    pub failure: Option<String>,
    pub evaluations: usize,
    pub errors: Vec<ToneErrors>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub n_samples: usize,
    pub snr_db: f64,
    pub noise_std: f64,
    pub base_seed: u64,
    pub config: DecompositionConfig,
    pub truth: Vec<Tone>,
    pub trials: Vec<TrialOutcome>,
    /// RMSE per truth tone over the trials in which it was matched.
    pub frequency_rmse: Vec<f64>,
    pub amplitude_rmse: Vec<f64>,
    pub phase_rmse: Vec<f64>,
    pub matched_counts: Vec<usize>,
    pub detections: usize,
    pub timings: StageTimings,
}

impl TrialReport {
    /// Frequency RMSE per tone in units of `2π/N`.
    pub fn frequency_rmse_bins(&self) -> Vec<f64> {
        let width = bin_width(self.n_samples);
        self.frequency_rmse.iter().map(|e| e / width).collect()
    }

    /// Copy with wall-clock timings cleared, for run-to-run comparison.
    pub fn without_timings(&self) -> Self {
        Self {
            timings: StageTimings::default(),
            ..self.clone()
        }
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "N={} SNR={} dB sigma={:.6} trials={} detections={}",
            self.n_samples,
            self.snr_db,
            self.noise_std,
            self.trials.len(),
            self.detections
        );
        let _ = writeln!(
            out,
            "{:>4} {:>12} {:>10} {:>8} {:>14} {:>14} {:>12}",
            "tone", "freq(bin)", "amplitude", "matched", "freq_rmse(bin)", "amp_rmse", "phase_rmse"
        );
        let width = bin_width(self.n_samples);
        for (i, t) in self.truth.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>4} {:>12.4} {:>10.4} {:>8} {:>14.3e} {:>14.3e} {:>12.3e}",
                i,
                t.frequency / width,
                t.amplitude,
                self.matched_counts[i],
                self.frequency_rmse[i] / width,
                self.amplitude_rmse[i],
                self.phase_rmse[i]
            );
        }
        let _ = writeln!(
            out,
            "time: synthesize {:.3}s decompose {:.3}s evaluate {:.3}s",
            self.timings.synthesize_secs, self.timings.decompose_secs, self.timings.evaluate_secs
        );
        out
    }
}

/// Runs `trials` noisy decompositions; trial `i` uses seed `base_seed + i`.
pub fn monte_carlo(
    truth: &[Tone],
    n_samples: usize,
    snr_db: f64,
    trials: usize,
    cfg: &DecompositionConfig,
    base_seed: u64,
) -> Result<TrialReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig("at least one trial required".into()));
    }
    let noise_std = noise_std_for_snr(truth, snr_db);
    let tolerance = DETECTION_TOLERANCE_BINS * bin_width(n_samples);
    let mut timings = [Duration::ZERO; 3];
    let mut outcomes = Vec::with_capacity(trials);

    for i in 0..trials {
        let seed = base_seed.wrapping_add(i as u64);
        let start = Instant::now();
        let x = synthesize(truth, n_samples, NoiseSpec::new(noise_std, seed))?;
        timings[0] += start.elapsed();

        let start = Instant::now();
        let result = decompose(&x, cfg);
        timings[1] += start.elapsed();

        let start = Instant::now();
        let outcome = match result {
            Ok(result) => {
                let report = evaluate_against_truth(&result.tones, truth);
                let mut errors = vec![None; truth.len()];
                for m in &report.matches {
                    errors[m.truth_index] = Some((m.frequency_error, m.amplitude_error, m.phase_error));
                }
                let detected = result.tones.len() == truth.len()
                    && errors
                        .iter()
                        .all(|e| matches!(e, Some((f, _, _)) if f.abs() <= tolerance));
                TrialOutcome {
                    seed,
                    estimated_tones: result.tones.len(),
                    detected,
                    stop_reason: Some(result.stop_reason),
                    failure: None,
                    evaluations: result.total_evaluations(),
                    errors,
                }
            }
            Err(e) => TrialOutcome {
                seed,
                estimated_tones: 0,
                detected: false,
                stop_reason: None,
                failure: Some(e.to_string()),
                evaluations: 0,
                errors: vec![None; truth.len()],
            },
        };
        timings[2] += start.elapsed();
        outcomes.push(outcome);
    }

    let rmse = |pick: fn(&(f64, f64, f64)) -> f64, tone: usize| -> (f64, usize) {
        let errs: Vec<f64> = outcomes
            .iter()
            .filter_map(|o| o.errors[tone].as_ref().map(pick))
            .collect();
        if errs.is_empty() {
            return (f64::NAN, 0);
        }
        let mse = errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64;
        (mse.sqrt(), errs.len())
    };
    let mut frequency_rmse = Vec::new();
    let mut amplitude_rmse = Vec::new();
    let mut phase_rmse = Vec::new();
    let mut matched_counts = Vec::new();
    for tone in 0..truth.len() {
        let (f, count) = rmse(|e| e.0, tone);
        frequency_rmse.push(f);
        amplitude_rmse.push(rmse(|e| e.1, tone).0);
        phase_rmse.push(rmse(|e| e.2, tone).0);
        matched_counts.push(count);
    }

    Ok(TrialReport {
        n_samples,
        snr_db,
        noise_std,
        base_seed,
        config: *cfg,
        truth: truth.to_vec(),
        detections: outcomes.iter().filter(|o| o.detected).count(),
        trials: outcomes,
        frequency_rmse,
        amplitude_rmse,
        phase_rmse,
        matched_counts,
        timings: StageTimings {
            synthesize_secs: timings[0].as_secs_f64(),
            decompose_secs: timings[1].as_secs_f64(),
            evaluate_secs: timings[2].as_secs_f64(),
        },
    })
}

/// Three-tone scene in cycles/sample, `(frequency, amplitude, phase)`;
/// at `N = 4096` the tones sit at bins 80.21, 160.68 and 411.33.
pub const SCALING_SCENE: [(f64, f64, f64); 3] = [
    (80.21 / 4096.0, 1.0, 0.3),
    (160.68 / 4096.0, 0.7, -1.1),
    (411.33 / 4096.0, 0.4, 2.0),
];

/// [`SCALING_SCENE`] as tones in radians/sample.
pub fn scaling_scene() -> Vec<Tone> {
    SCALING_SCENE
        .iter()
        .map(|&(f, a, p)| Tone::new(2.0 * PI * f, a, p))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n_samples: usize,
    /// Best of the timed repeats.
    pub wall_time_secs: f64,
    /// DTFT evaluations counted at the evaluation site.
    pub evaluations: u64,
    /// Sum of the refine traces of the same run.
    pub traced_evaluations: usize,
    pub tones: usize,
}

/// Times [`decompose`] on [`scaling_scene`] at each size (best of
/// `repeats`), serially.
pub fn runtime_scaling(sizes: &[usize], cfg: &DecompositionConfig, repeats: usize) -> Result<Vec<ScalingPoint>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("sizes must be strictly ascending".into()));
    }
    let scene = scaling_scene();
    sizes
        .iter()
        .map(|&n| {
            let x: Signal = synthesize(&scene, n, NoiseSpec::noiseless())?;
            let mut best = f64::INFINITY;
            let mut point = None;
            for _ in 0..repeats.max(1) {
                let before = dtft_evaluation_count();
                let start = Instant::now();
                let result = decompose(&x, cfg)?;
                let elapsed = start.elapsed().as_secs_f64();
                let evaluations = dtft_evaluation_count() - before;
                best = best.min(elapsed);
                point = Some(ScalingPoint {
                    n_samples: n,
                    wall_time_secs: best,
                    evaluations,
                    traced_evaluations: result.total_evaluations(),
                    tones: result.tones.len(),
                });
            }
            Ok(point.expect("at least one repeat"))
        })
        .collect()
}
