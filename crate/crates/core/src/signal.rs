//! Observation model: finite real sample sequences and sinusoid mixtures.
//!
//! Noise is drawn from ChaCha8 seeded with [`NoiseSpec::seed`] and shaped to a
//! standard normal by the ziggurat sampler in `rand_distr`, so a given seed
//! yields the same sequence on every run and platform.

use std::f64::consts::PI;
use std::ops::Deref;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples in a [`Signal`].
pub const MIN_SAMPLES: usize = 2;

/// A finite real-valued sample sequence of length at least two.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
}

impl Signal {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                len: samples.len(),
                min: MIN_SAMPLES,
            });
        }
        if let Some(index) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(Self { samples })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![0.0; len])
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn energy(&self) -> f64 {
        signal_energy(self)
    }

    /// Elementwise `self + other`.
    pub fn add(&self, other: &Signal) -> Result<Signal> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Result<Signal> {
        Signal::new(self.samples.iter().map(|s| s * factor).collect())
    }

    fn zip_with(&self, other: &Signal, op: impl Fn(f64, f64) -> f64) -> Result<Signal> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Signal::new(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        )
    }
}

impl Deref for Signal {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.samples
    }
}

impl TryFrom<Vec<f64>> for Signal {
    type Error = Error;

    fn try_from(samples: Vec<f64>) -> Result<Self> {
        Signal::new(samples)
    }
}

/// One sinusoid `amplitude · sin(frequency · n + phase)`.
///
/// Used both for ground-truth parameters fed to [`synthesize`] and for the
/// estimates produced by the decomposer. Frequency is in radians/sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl Tone {
    pub const fn new(frequency: f64, amplitude: f64, phase: f64) -> Self {
        Self {
            frequency,
            amplitude,
            phase,
        }
    }

    /// Checks the supported parameter ranges: frequency strictly inside
    /// `(0, π)`, finite non-negative amplitude, finite phase.
    pub fn validate(&self) -> Result<()> {
        if !self.frequency.is_finite() || !self.amplitude.is_finite() || !self.phase.is_finite() {
            return Err(Error::InvalidTone(format!("non-finite parameter in {self:?}")));
        }
        if !(self.frequency > 0.0 && self.frequency < PI) {
            return Err(Error::InvalidTone(format!(
                "frequency {} outside (0, π)",
                self.frequency
            )));
        }
        if self.amplitude < 0.0 {
            return Err(Error::InvalidTone(format!(
                "negative amplitude {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    /// Same tone with the phase wrapped to `(−π, π]`.
    pub fn canonical(self) -> Self {
        Self {
            phase: wrap_phase(self.phase),
            ..self
        }
    }

    /// Value of the sinusoid at sample index `n`.
    #[inline]
    pub fn sample(&self, n: usize) -> f64 {
        self.amplitude * (self.frequency * n as f64 + self.phase).sin()
    }
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let mut wrapped = phase.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped -= 2.0 * PI;
    }
    // rem_euclid can land on 2π after rounding; map −π back onto π
    if wrapped <= -PI {
        wrapped += 2.0 * PI;
    }
    wrapped
}

/// Additive white Gaussian noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub standard_deviation: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub const fn new(standard_deviation: f64, seed: u64) -> Self {
        Self {
            standard_deviation,
            seed,
        }
    }

    pub const fn noiseless() -> Self {
        Self::new(0.0, 0)
    }
}

/// Builds `x_n = Σ A_m sin(w_m n + θ_m) + v_n` for `n = 0..n_samples`.
pub fn synthesize(tones: &[Tone], n_samples: usize, noise: NoiseSpec) -> Result<Signal> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            len: n_samples,
            min: MIN_SAMPLES,
        });
    }
    for tone in tones {
        tone.validate()?;
    }
    let sigma = noise.standard_deviation;
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "noise standard deviation {sigma} must be finite and non-negative"
        )));
    }

    let mut samples: Vec<f64> = (0..n_samples)
        .map(|n| tones.iter().map(|t| t.sample(n)).sum())
        .collect();

    if sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        for s in &mut samples {
            let v: f64 = StandardNormal.sample(&mut rng);
            *s += sigma * v;
        }
    }
    Signal::new(samples)
}

/// `Σ x_n²`.
pub fn signal_energy(x: &[f64]) -> f64 {
    x.iter().map(|s| s * s).sum()
}
