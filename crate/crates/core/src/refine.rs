//! Peak search for `|X(w)|` inside one DFT bin pair.
//!
//! Both searches start from `[2πk/N, 2π(k+1)/N]`, reuse the DFT magnitudes at
//! the endpoints, and stop once the bracket is at most `ε` bins wide.
//!
//! * [`refine_bisect`] compares the two endpoints and moves the weaker one to
//!   the midpoint. It relies on the main lobe being symmetric.
//! * [`refine_robust`] samples the quarter points, keeps the three points
//!   around the largest of five cached magnitudes, and only assumes
//!   quasi-concavity. Newly sampled magnitudes that fall below the median of
//!   themselves and their two neighbours are raised to that median.
//!
//! Positions are tracked in bin units so every bracket endpoint is a dyadic
//! rational and the width after `i` iterations is exactly `2^-i` bins.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;
use crate::spectrum::{dtft_point, HalfSpectrum, SpectrumPoint};

pub const DEFAULT_EPSILON: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    /// Target bracket width as a fraction of one bin.
    pub epsilon: f64,
    /// Hard cap on DTFT evaluations for one refinement.
    pub max_evaluations: usize,
}

impl RefineConfig {
    /// `epsilon` with the default cap `4⌈log₂(1/ε)⌉ + 8`.
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            max_evaluations: 4 * halvings(epsilon) + 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} outside (0, 1]",
                self.epsilon
            )));
        }
        if self.max_evaluations < 3 {
            return Err(Error::InvalidConfig(format!(
                "max_evaluations {} below 3",
                self.max_evaluations
            )));
        }
        Ok(())
    }

    /// `⌈log₂(1/ε)⌉`, the number of halvings needed to reach `ε` bins.
    pub fn halvings(&self) -> usize {
        halvings(self.epsilon)
    }

    /// Evaluation budget of [`refine_robust`]: `2⌈log₂(1/ε)⌉ + 1`.
    pub fn robust_budget(&self) -> usize {
        2 * self.halvings() + 1
    }

    /// Evaluation budget of [`refine_bisect`]: `⌈log₂(1/ε)⌉ + 2`.
    pub fn bisect_budget(&self) -> usize {
        self.halvings() + 2
    }
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self::new(DEFAULT_EPSILON)
    }
}

fn halvings(epsilon: f64) -> usize {
    if !(epsilon > 0.0) || epsilon >= 1.0 {
        return 0;
    }
    // count instead of log2().ceil() so exact powers of two are not overshot
    let mut width = 1.0;
    let mut count = 0;
    while width > epsilon {
        width *= 0.5;
        count += 1;
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub frequency: f64,
    /// Magnitude as evaluated (after any fault injection).
    pub raw_magnitude: f64,
    /// Magnitude after median repair.
    pub magnitude: f64,
}

/// One median-repair check on `(left, middle, right)` cached magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepairCheck {
    pub left: f64,
    /// Middle magnitude after the check.
    pub middle: f64,
    pub right: f64,
    pub repaired: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RefineTrace {
    pub evaluations: usize,
    pub repairs: usize,
    pub iterations: usize,
    /// `w_r − w_l` at exit, radians/sample.
    pub final_interval_width: f64,
    pub truncated: bool,
    pub history: Vec<TracePoint>,
    pub repair_checks: Vec<RepairCheck>,
}

/// Median of three values.
pub fn median3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).min(a.min(b).max(c))
}

/// Raises `middle` to `median(left, middle, right)` when it falls below it.
/// Returns the (possibly) repaired value and whether a repair happened.
pub fn median_repair(left: f64, middle: f64, right: f64) -> (f64, bool) {
    let median = median3(left, middle, right);
    if middle < median {
        (median, true)
    } else {
        (middle, false)
    }
}

type Hook<'a> = &'a mut dyn FnMut(usize, f64, f64) -> f64;

struct Sampler<'a, 'h> {
    samples: &'a [f64],
    width: f64,
    hook: Option<Hook<'h>>,
    trace: RefineTrace,
}

impl<'a, 'h> Sampler<'a, 'h> {
    fn new(x: &'a Signal, spec: &HalfSpectrum, k: usize, cfg: &RefineConfig, hook: Option<Hook<'h>>) -> Result<Self> {
        cfg.validate()?;
        if spec.n_samples() != x.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                actual: spec.n_samples(),
            });
        }
        if k >= spec.last_bin() {
            return Err(Error::InvalidConfig(format!(
                "bin {k} outside 0..{}",
                spec.last_bin()
            )));
        }
        Ok(Self {
            samples: x.samples(),
            width: spec.bin_width(),
            hook,
            trace: RefineTrace::default(),
        })
    }

    fn endpoint(&self, spec: &HalfSpectrum, k: usize) -> SpectrumPoint {
        SpectrumPoint::new(spec.bin_frequency(k), spec.bins()[k])
    }

    fn evaluate(&mut self, bins: f64) -> SpectrumPoint {
        let frequency = bins * self.width;
        let mut point = SpectrumPoint::new(frequency, dtft_point(self.samples, frequency));
        if let Some(hook) = self.hook.as_mut() {
            point.magnitude = hook(self.trace.evaluations, frequency, point.magnitude).max(0.0);
        }
        self.trace.evaluations += 1;
        self.trace.history.push(TracePoint {
            frequency,
            raw_magnitude: point.magnitude,
            magnitude: point.magnitude,
        });
        point
    }

    fn repair(&mut self, left: &SpectrumPoint, middle: &mut SpectrumPoint, right: &SpectrumPoint) {
        let (magnitude, repaired) = median_repair(left.magnitude, middle.magnitude, right.magnitude);
        middle.magnitude = magnitude;
        if repaired {
            self.trace.repairs += 1;
            if let Some(entry) = self
                .trace
                .history
                .iter_mut()
                .rev()
                .find(|p| p.frequency == middle.frequency)
            {
                entry.magnitude = magnitude;
            }
        }
        self.trace.repair_checks.push(RepairCheck {
            left: left.magnitude,
            middle: magnitude,
            right: right.magnitude,
            repaired,
        });
    }

    fn finish(mut self, lo: f64, hi: f64, mid: f64) -> (f64, RefineTrace) {
        self.trace.final_interval_width = (hi - lo) * self.width;
        (mid * self.width, self.trace)
    }
}

/// Endpoint-comparison bisection. Returns the midpoint of the final bracket.
pub fn refine_bisect(x: &Signal, spec: &HalfSpectrum, k: usize, cfg: &RefineConfig) -> Result<(f64, RefineTrace)> {
    let mut s = Sampler::new(x, spec, k, cfg, None)?;
    let (mut lo, mut hi) = (k as f64, k as f64 + 1.0);
    let mut lo_mag = s.endpoint(spec, k).magnitude;
    let mut hi_mag = s.endpoint(spec, k + 1).magnitude;

    while hi - lo > cfg.epsilon {
        if s.trace.evaluations + 1 > cfg.max_evaluations {
            s.trace.truncated = true;
            break;
        }
        let mid = 0.5 * (lo + hi);
        let mid_mag = s.evaluate(mid).magnitude;
        if lo_mag < hi_mag {
            lo = mid;
            lo_mag = mid_mag;
        } else {
            hi = mid;
            hi_mag = mid_mag;
        }
        s.trace.iterations += 1;
    }
    Ok(s.finish(lo, hi, 0.5 * (lo + hi)))
}

/// Five-point quasi-concave search with median repair.
pub fn refine_robust(x: &Signal, spec: &HalfSpectrum, k: usize, cfg: &RefineConfig) -> Result<(f64, RefineTrace)> {
    robust(x, spec, k, cfg, None)
}

/// [`refine_robust`] with a fault-injection hook.
///
/// `hook(evaluation_index, frequency, magnitude)` returns the magnitude the
/// search should see for each DTFT evaluation. Endpoint magnitudes taken
/// from the DFT are not passed through it.
pub fn refine_robust_with_hook(
    x: &Signal,
    spec: &HalfSpectrum,
    k: usize,
    cfg: &RefineConfig,
    hook: &mut dyn FnMut(usize, f64, f64) -> f64,
) -> Result<(f64, RefineTrace)> {
    robust(x, spec, k, cfg, Some(hook))
}

fn robust(
    x: &Signal,
    spec: &HalfSpectrum,
    k: usize,
    cfg: &RefineConfig,
    hook: Option<Hook<'_>>,
) -> Result<(f64, RefineTrace)> {
    let mut s = Sampler::new(x, spec, k, cfg, hook)?;
    let (mut lo, mut hi) = (k as f64, k as f64 + 1.0);
    let mut mid = 0.5 * (lo + hi);
    let mut lo_pt = s.endpoint(spec, k);
    let mut hi_pt = s.endpoint(spec, k + 1);
    let mut mid_pt = s.evaluate(mid);
    s.repair(&lo_pt, &mut mid_pt, &hi_pt);

    while hi - lo > cfg.epsilon {
        if s.trace.evaluations + 2 > cfg.max_evaluations {
            s.trace.truncated = true;
            break;
        }
        let left_q = 0.5 * (lo + mid);
        let right_q = 0.5 * (mid + hi);
        let mut left_pt = s.evaluate(left_q);
        let mut right_pt = s.evaluate(right_q);
        s.repair(&lo_pt, &mut left_pt, &mid_pt);
        s.repair(&mid_pt, &mut right_pt, &hi_pt);

        let best = [lo_pt, left_pt, mid_pt, right_pt, hi_pt]
            .iter()
            .map(|p| p.magnitude)
            .fold(f64::NEG_INFINITY, f64::max);

        if best == mid_pt.magnitude {
            (lo, lo_pt) = (left_q, left_pt);
            (hi, hi_pt) = (right_q, right_pt);
        } else if best == lo_pt.magnitude || best == left_pt.magnitude {
            (hi, hi_pt) = (mid, mid_pt);
            (mid, mid_pt) = (left_q, left_pt);
        } else {
            (lo, lo_pt) = (mid, mid_pt);
            (mid, mid_pt) = (right_q, right_pt);
        }
        s.trace.iterations += 1;
    }
    Ok(s.finish(lo, hi, mid))
}
