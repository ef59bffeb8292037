//! DFT of a real signal and single-frequency DTFT evaluation.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::signal::Signal;

/// Samples between re-seeding the rotating phasor in [`dtft_point`].
const RESEED_INTERVAL: usize = 256;

thread_local! {
    static DTFT_EVALUATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of [`dtft_point`] calls made so far on the current thread.
pub fn dtft_evaluation_count() -> u64 {
    DTFT_EVALUATIONS.with(Cell::get)
}

/// Non-negative-frequency half of the DFT, `X_k` for `k = 0..=⌊N/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpectrum {
    bins: Vec<Complex64>,
    n_samples: usize,
}

impl HalfSpectrum {
    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// `K = ⌊N/2⌋`, the index of the last stored bin.
    pub fn last_bin(&self) -> usize {
        self.bins.len() - 1
    }

    pub fn magnitude(&self, k: usize) -> f64 {
        self.bins[k].norm()
    }

    /// Spacing between adjacent bins, `2π/N`.
    pub fn bin_width(&self) -> f64 {
        bin_width(self.n_samples)
    }

    pub fn bin_frequency(&self, k: usize) -> f64 {
        k as f64 * self.bin_width()
    }

    /// `(frequency, magnitude)` for every stored bin.
    pub fn magnitudes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let width = self.bin_width();
        self.bins
            .iter()
            .enumerate()
            .map(move |(k, v)| (k as f64 * width, v.norm()))
    }
}

/// A DTFT sample whose magnitude may be raised by median repair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub frequency: f64,
    pub value: Complex64,
    pub magnitude: f64,
}

impl SpectrumPoint {
    pub fn new(frequency: f64, value: Complex64) -> Self {
        Self {
            frequency,
            value,
            magnitude: value.norm(),
        }
    }

    pub fn raw_magnitude(&self) -> f64 {
        self.value.norm()
    }
}

pub fn bin_width(n_samples: usize) -> f64 {
    2.0 * PI / n_samples as f64
}

/// FFT of `x`, keeping bins `0..=⌊N/2⌋`.
pub fn dft(x: &Signal) -> HalfSpectrum {
    let n = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.truncate(n / 2 + 1);
    HalfSpectrum {
        bins: buf,
        n_samples: n,
    }
}

/// `X(w) = Σ x_n e^{−jwn}` in a single O(N) pass.
///
/// The phasor `e^{−jwn}` is advanced by complex multiplication and reset from
/// `sin`/`cos` every [`RESEED_INTERVAL`] samples to bound drift.
pub fn dtft_point(x: &[f64], w: f64) -> Complex64 {
    DTFT_EVALUATIONS.with(|c| c.set(c.get() + 1));
    let step = Complex64::from_polar(1.0, -w);
    let mut acc = Complex64::new(0.0, 0.0);
    for (block, chunk) in x.chunks(RESEED_INTERVAL).enumerate() {
        let mut phasor = Complex64::from_polar(1.0, -w * (block * RESEED_INTERVAL) as f64);
        for &s in chunk {
            acc += phasor * s;
            phasor *= step;
        }
    }
    acc
}

/// Rectangular-window kernel `S(w) = sin(Nw/2) / (Nw/2)`.
///
/// Exactly 1 at `w = 0` and exactly 0 at nonzero multiples of `2π/N`.
pub fn sinc_kernel(w: f64, n_samples: usize) -> f64 {
    // u is w in bins; S = sin(πu)/(πu)
    let u = w * n_samples as f64 / (2.0 * PI);
    if u == 0.0 {
        return 1.0;
    }
    let nearest = u.round();
    let mut frac = u - nearest;
    if frac.abs() <= 4.0 * f64::EPSILON * u.abs() {
        frac = 0.0;
    }
    if frac == 0.0 {
        return if nearest == 0.0 { 1.0 } else { 0.0 };
    }
    let sign = if nearest.rem_euclid(2.0) == 0.0 { 1.0 } else { -1.0 };
    sign * (PI * frac).sin() / (PI * u)
}
