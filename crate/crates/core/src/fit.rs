//! Least-squares amplitudes and phases for fixed frequencies.
//!
//! Each frequency `w` contributes the column pair `s_w = sin(wn)`,
//! `c_w = cos(wn)` to `Y = [s_1 c_1 … s_m c_m]`, and the weights
//! `λ = (α_1, β_1, …, α_m, β_m)` minimise `‖x − Yλ‖²`. Since
//! `α sin(wn) + β cos(wn) = A sin(wn + θ)` with `α = A cos θ`, `β = A sin θ`,
//! the tone parameters are `A = hypot(α, β)` and `θ = atan2(β, α)`.
//!
//! [`JointFitter`] keeps `YᵀY` and `Yᵀx` between calls so adding a frequency
//! costs one new row/column (O(mN)) plus a Cholesky solve (O(m³)).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::refine::DEFAULT_EPSILON;
use crate::signal::{Signal, Tone};
use crate::spectrum::bin_width;

/// Largest accepted 1-norm condition number of the normal matrix.
pub const CONDITION_LIMIT: f64 = 1e10;

#[derive(Debug, Clone, PartialEq)]
pub struct SinCosBasis {
    pub frequency: f64,
    pub sin_vector: Vec<f64>,
    pub cos_vector: Vec<f64>,
}

pub fn make_basis(w: f64, n_samples: usize) -> Result<SinCosBasis> {
    if !(w > 0.0 && w < PI) {
        return Err(Error::InvalidTone(format!("frequency {w} outside (0, π)")));
    }
    if n_samples < 2 {
        return Err(Error::TooFewSamples {
            len: n_samples,
            min: 2,
        });
    }
    let (sin_vector, cos_vector) = (0..n_samples).map(|n| (w * n as f64).sin_cos()).unzip();
    Ok(SinCosBasis {
        frequency: w,
        sin_vector,
        cos_vector,
    })
}

/// `(α_i, β_i)` per fitted frequency, in fit order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearCoefficients {
    pub pairs: Vec<(f64, f64)>,
}

impl LinearCoefficients {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn tones(&self, freqs: &[f64]) -> Vec<Tone> {
        freqs
            .iter()
            .zip(&self.pairs)
            .map(|(&w, &(alpha, beta))| Tone::new(w, alpha.hypot(beta), beta.atan2(alpha)))
            .collect()
    }

    /// Inverse of [`LinearCoefficients::tones`].
    pub fn from_tones(tones: &[Tone]) -> Self {
        Self {
            pairs: tones
                .iter()
                .map(|t| (t.amplitude * t.phase.cos(), t.amplitude * t.phase.sin()))
                .collect(),
        }
    }
}

/// Incrementally grown joint least-squares fit against one signal.
#[derive(Debug, Clone)]
pub struct JointFitter<'a> {
    x: &'a Signal,
    min_separation: f64,
    bases: Vec<SinCosBasis>,
    /// Row-major `YᵀY`, dimension `2m`.
    gram: Vec<f64>,
    /// `Yᵀx`.
    projections: Vec<f64>,
    coeffs: LinearCoefficients,
}

impl<'a> JointFitter<'a> {
    /// Frequencies closer than `epsilon` bins to an accepted one are rejected.
    pub fn new(x: &'a Signal, epsilon: f64) -> Self {
        Self {
            x,
            min_separation: epsilon * bin_width(x.len()),
            bases: Vec::new(),
            gram: Vec::new(),
            projections: Vec::new(),
            coeffs: LinearCoefficients::default(),
        }
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.bases.iter().map(|b| b.frequency).collect()
    }

    pub fn coefficients(&self) -> &LinearCoefficients {
        &self.coeffs
    }

    pub fn tones(&self) -> Vec<Tone> {
        self.coeffs.tones(&self.frequencies())
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// Adds `w` and refits all weights. On error the fitter is unchanged.
    pub fn push(&mut self, w: f64) -> Result<&LinearCoefficients> {
        let n = self.x.len();
        let m = self.bases.len();
        if 2 * (m + 1) > n {
            return Err(Error::TooManyTones {
                requested: m + 1,
                needed: 2 * (m + 1),
                available: n,
            });
        }
        if let Some(existing) = self.nearest(w).filter(|e| (e - w).abs() <= self.min_separation) {
            return Err(Error::DuplicateFrequency { existing, new: w });
        }
        let basis = make_basis(w, n)?;

        let dim = 2 * m;
        let new_dim = dim + 2;
        let mut gram = vec![0.0; new_dim * new_dim];
        for r in 0..dim {
            gram[r * new_dim..r * new_dim + dim].copy_from_slice(&self.gram[r * dim..(r + 1) * dim]);
        }
        let new_cols = [&basis.sin_vector, &basis.cos_vector];
        for (j, col) in new_cols.iter().enumerate() {
            let c = dim + j;
            for (i, old) in self.bases.iter().enumerate() {
                for (o, old_col) in [&old.sin_vector, &old.cos_vector].into_iter().enumerate() {
                    let r = 2 * i + o;
                    let v = dot(old_col, col);
                    gram[r * new_dim + c] = v;
                    gram[c * new_dim + r] = v;
                }
            }
            for (jj, other) in new_cols.iter().enumerate() {
                gram[c * new_dim + dim + jj] = dot(col, other);
            }
        }
        let mut projections = self.projections.clone();
        projections.push(dot(&basis.sin_vector, self.x));
        projections.push(dot(&basis.cos_vector, self.x));

        let offender = self.nearest(w).unwrap_or(w);
        let weights = solve_normal(&gram, &projections, new_dim).map_err(|condition| Error::IllConditioned {
            first: offender,
            second: w,
            condition,
        })?;

        self.bases.push(basis);
        self.gram = gram;
        self.projections = projections;
        self.coeffs = LinearCoefficients {
            pairs: weights.chunks(2).map(|p| (p[0], p[1])).collect(),
        };
        Ok(&self.coeffs)
    }

    /// `x − Yλ` for the current fit.
    pub fn residual(&self) -> Signal {
        let mut r = self.x.samples().to_vec();
        for (basis, &(alpha, beta)) in self.bases.iter().zip(&self.coeffs.pairs) {
            for ((v, s), c) in r.iter_mut().zip(&basis.sin_vector).zip(&basis.cos_vector) {
                *v -= alpha * s + beta * c;
            }
        }
        Signal::new(r).expect("residual of a finite fit is finite")
    }

    fn nearest(&self, w: f64) -> Option<f64> {
        self.bases
            .iter()
            .map(|b| b.frequency)
            .min_by(|a, b| (a - w).abs().total_cmp(&(b - w).abs()))
    }
}

/// Fits all of `freqs` jointly, rejecting near-duplicates at the default
/// resolution of `1e-4` bins.
pub fn joint_ls_fit(x: &Signal, freqs: &[f64]) -> Result<(LinearCoefficients, Vec<Tone>)> {
    if freqs.is_empty() {
        return Err(Error::InvalidConfig("no frequencies to fit".into()));
    }
    let mut fitter = JointFitter::new(x, DEFAULT_EPSILON);
    for &w in freqs {
        fitter.push(w)?;
    }
    let tones = fitter.tones();
    Ok((fitter.coeffs, tones))
}

/// `x_n − Σ_i (α_i sin(w_i n) + β_i cos(w_i n))`.
pub fn subtract_model(x: &Signal, coeffs: &LinearCoefficients, freqs: &[f64]) -> Result<Signal> {
    if coeffs.len() != freqs.len() {
        return Err(Error::LengthMismatch {
            expected: freqs.len(),
            actual: coeffs.len(),
        });
    }
    let mut r = x.samples().to_vec();
    for (&w, &(alpha, beta)) in freqs.iter().zip(&coeffs.pairs) {
        let basis = make_basis(w, x.len())?;
        for ((v, s), c) in r.iter_mut().zip(&basis.sin_vector).zip(&basis.cos_vector) {
            *v -= alpha * s + beta * c;
        }
    }
    Signal::new(r)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the SPD system `g·λ = rhs` by Cholesky. Fails with the condition
/// estimate when the factorisation breaks down or exceeds [`CONDITION_LIMIT`].
fn solve_normal(g: &[f64], rhs: &[f64], dim: usize) -> std::result::Result<Vec<f64>, f64> {
    let l = cholesky(g, dim).ok_or(f64::INFINITY)?;
    // κ₁(G) = ‖G‖₁ ‖G⁻¹‖₁, with G⁻¹ built column by column
    let norm = (0..dim)
        .map(|c| (0..dim).map(|r| g[r * dim + c].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut inv_norm: f64 = 0.0;
    let mut e = vec![0.0; dim];
    for c in 0..dim {
        e.fill(0.0);
        e[c] = 1.0;
        let col = cholesky_solve(&l, &e, dim);
        inv_norm = inv_norm.max(col.iter().map(|v| v.abs()).sum());
    }
    let condition = norm * inv_norm;
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(condition);
    }
    Ok(cholesky_solve(&l, rhs, dim))
}

fn cholesky(g: &[f64], dim: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut sum = g[i * dim + j];
            for k in 0..j {
                sum -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i * dim + i] = sum.sqrt();
            } else {
                l[i * dim + j] = sum / l[j * dim + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[f64], rhs: &[f64], dim: usize) -> Vec<f64> {
    let mut y = rhs.to_vec();
    for i in 0..dim {
        for k in 0..i {
            y[i] -= l[i * dim + k] * y[k];
        }
        y[i] /= l[i * dim + i];
    }
    for i in (0..dim).rev() {
        for k in i + 1..dim {
            y[i] -= l[k * dim + i] * y[k];
        }
        y[i] /= l[i * dim + i];
    }
    y
}
