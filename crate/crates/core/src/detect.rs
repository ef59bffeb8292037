//! Dominant-tone bin detection from two-bin sinc leakage.
//!
//! A tone at `2π(k + 1 − δ)/N` leaks into bins `k` and `k+1` with magnitudes
//! `A·sinc(1 − δ)` and `A·sinc(δ)`. Solving the pair gives
//!
//! ```text
//! δ_k = |X_k| / (|X_k| + |X_{k+1}|)
//! θ_k = sin(π δ_k)
//! A_k = (π / θ_k) · |X_k| |X_{k+1}| / (|X_k| + |X_{k+1}|)
//! ```
//!
//! and the pair with the largest `A_k` is explored further. `A_k` carries the
//! DFT's `N/2` gain and is only used for ranking.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::HalfSpectrum;

/// Pairs whose summed magnitude is below this multiple of `f64::EPSILON`
/// times the largest bin magnitude are treated as empty.
pub const DEGENERATE_PAIR_SCALE: f64 = 64.0;

/// Below this `min/sum` ratio the pair is treated as an on-bin tone and
/// `A_k` takes its limit `max(|X_k|, |X_{k+1}|)`.
pub const ON_BIN_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinCandidate {
    /// Lower bin of the pair `(k, k+1)`.
    pub k: usize,
    pub delta: f64,
    /// `sin(π δ)`.
    pub theta: f64,
    pub amplitude: f64,
    /// `2π(k + 1 − δ)/N`, radians/sample.
    pub implied_frequency: f64,
}

/// One candidate per adjacent bin pair, `k = 0..K−1`.
///
/// Candidates at `k = 0` and `k = K−1` are computed like any other but are
/// unreliable for tones within a couple of bins of DC or Nyquist, where the
/// negative-frequency image overlaps the main lobe.
pub fn bin_candidates(spec: &HalfSpectrum) -> Vec<BinCandidate> {
    let mags: Vec<f64> = spec.bins().iter().map(|v| v.norm()).collect();
    let peak = mags.iter().copied().fold(0.0, f64::max);
    let floor = (DEGENERATE_PAIR_SCALE * f64::EPSILON * peak).max(f64::MIN_POSITIVE);
    let width = spec.bin_width();

    mags.windows(2)
        .enumerate()
        .map(|(k, pair)| candidate(k, pair[0], pair[1], floor, width))
        .collect()
}

fn candidate(k: usize, lower: f64, upper: f64, floor: f64, width: f64) -> BinCandidate {
    let sum = lower + upper;
    if sum < floor {
        return BinCandidate {
            k,
            delta: 0.5,
            theta: 1.0,
            amplitude: 0.0,
            implied_frequency: (k as f64 + 0.5) * width,
        };
    }
    let delta = lower / sum;
    let theta = (PI * delta).sin();
    let amplitude = if lower.min(upper) / sum < ON_BIN_RATIO {
        lower.max(upper)
    } else {
        PI / theta * lower * upper / sum
    };
    BinCandidate {
        k,
        delta,
        theta,
        amplitude,
        implied_frequency: (k as f64 + 1.0 - delta) * width,
    }
}

/// Candidate with the largest amplitude estimate; ties go to the smaller `k`.
pub fn select_bin(candidates: &[BinCandidate]) -> Result<BinCandidate> {
    let mut iter = candidates.iter();
    let mut best = *iter.next().ok_or(Error::NoCandidates)?;
    for c in iter {
        if c.amplitude > best.amplitude {
            best = *c;
        }
    }
    Ok(best)
}
