//! Multi-tone decomposition of real sample sequences.
//!
//! Given `x_n = Σ A_m sin(w_m n + θ_m) + v_n`, the decomposer recovers the
//! `(w_m, A_m, θ_m)` triples one tone at a time:
//!
//! 1. FFT of the current residual ([`spectrum::dft`]).
//! 2. Two-bin sinc-leakage amplitude estimate for every adjacent bin pair,
//!    keeping the pair with the largest estimate ([`detect`]).
//! 3. Interval-halving search for the DTFT magnitude peak inside that pair,
//!    with median repair of samples that break quasi-concavity ([`refine`]).
//! 4. Joint least-squares fit of amplitudes and phases for every frequency
//!    found so far against the original signal ([`fit`]).
//! 5. Subtract the fitted model and repeat ([`decompose`]).
//!
//! Frequencies are in radians/sample throughout and restricted to the open
//! band `(0, π)`.
//!
//! ```
//! use multitone::{decompose, synthesize, DecompositionConfig, NoiseSpec, Tone};
//!
//! let w = 2.0 * std::f64::consts::PI * 100.37 / 1024.0;
//! let x = synthesize(&[Tone::new(w, 1.0, 0.6)], 1024, NoiseSpec::noiseless()).unwrap();
//! let result = decompose(&x, &DecompositionConfig::known(1)).unwrap();
//! assert_eq!(result.tones.len(), 1);
//! assert!((result.tones[0].frequency - w).abs() < 1e-4);
//! ```

pub mod bench;
pub mod decompose;
pub mod detect;
mod error;
pub mod fit;
pub mod refine;
pub mod report;
pub mod signal;
pub mod spectrum;

pub use bench::{dense_grid_peak, monte_carlo, runtime_scaling, GridPeak, ScalingPoint, TrialReport};
pub use decompose::{
    decompose, decompose_with_observer, evaluate_against_truth, DecompositionConfig,
    DecompositionResult, IterationRecord, MatchReport, Mode, StopReason, ToneMatch,
};
pub use detect::{bin_candidates, select_bin, BinCandidate};
pub use error::{Error, Result};
pub use fit::{joint_ls_fit, make_basis, subtract_model, JointFitter, LinearCoefficients, SinCosBasis};
pub use refine::{refine_bisect, refine_robust, refine_robust_with_hook, RefineConfig, RefineTrace};
pub use signal::{signal_energy, synthesize, wrap_phase, NoiseSpec, Signal, Tone};
pub use num_complex::Complex64;
pub use spectrum::{dft, dtft_point, sinc_kernel, HalfSpectrum, SpectrumPoint};
