//! Independent reference implementations used as test oracles.
//!
//! Everything here is written against the definitions directly and shares no
//! code with the library: naive O(N²) DFT with exact integer phase reduction,
//! double-double DTFT and trig, and a double-double Gaussian-elimination
//! least-squares solver.

#![allow(dead_code)]

use std::f64::consts::PI;

use multitone::{NoiseSpec, Signal, Tone};
use multitone::Complex64;

/// Unevaluated sum `hi + lo`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    (s, (a - (s - v)) + (b - v))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from(q2)));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from(q3))
    }
}

/// `(sin(w·n), cos(w·n))` with the product `w·n` carried exactly.
pub fn dd_sin_cos(w: f64, n: usize) -> (Dd, Dd) {
    let (hi, lo) = two_prod(w, n as f64);
    let (s, c) = hi.sin_cos();
    // first-order correction for the low part; lo ≤ ulp(hi)/2 so lo² terms vanish
    let sin = Dd::from(s).add(Dd::from(lo * c));
    let cos = Dd::from(c).sub(Dd::from(lo * s));
    (sin, cos)
}

/// `Σ x_n e^{−jwn}` in double-double.
pub fn dd_dtft(x: &[f64], w: f64) -> Complex64 {
    let mut re = Dd::ZERO;
    let mut im = Dd::ZERO;
    for (n, &s) in x.iter().enumerate() {
        let (sin, cos) = dd_sin_cos(w, n);
        re = re.add(cos.mul(Dd::from(s)));
        im = im.sub(sin.mul(Dd::from(s)));
    }
    Complex64::new(re.to_f64(), im.to_f64())
}

/// Naive DFT for `k = 0..=N/2`, phase reduced exactly as `(k·n mod N)`.
pub fn naive_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..=n / 2)
        .map(|k| {
            let mut re = Dd::ZERO;
            let mut im = Dd::ZERO;
            for (i, &s) in x.iter().enumerate() {
                let phase = 2.0 * PI * ((k * i) % n) as f64 / n as f64;
                re = re.add(Dd::from(s * phase.cos()));
                im = im.sub(Dd::from(s * phase.sin()));
            }
            Complex64::new(re.to_f64(), im.to_f64())
        })
        .collect()
}

/// Least-squares weights `(α_i, β_i)` for `x ≈ Σ α_i sin(w_i n) + β_i cos(w_i n)`,
/// via double-double normal equations and partial-pivot elimination.
pub fn dd_least_squares(x: &[f64], freqs: &[f64]) -> Vec<(f64, f64)> {
    let cols: Vec<Vec<Dd>> = freqs
        .iter()
        .flat_map(|&w| {
            let (s, c): (Vec<Dd>, Vec<Dd>) = (0..x.len()).map(|n| dd_sin_cos(w, n)).unzip();
            [s, c]
        })
        .collect();
    let dim = cols.len();
    let dot = |a: &[Dd], b: &[Dd]| a.iter().zip(b).fold(Dd::ZERO, |acc, (p, q)| acc.add(p.mul(*q)));
    let xs: Vec<Dd> = x.iter().map(|&v| Dd::from(v)).collect();

    let mut a: Vec<Vec<Dd>> = (0..dim)
        .map(|i| {
            let mut row: Vec<Dd> = (0..dim).map(|j| dot(&cols[i], &cols[j])).collect();
            row.push(dot(&cols[i], &xs));
            row
        })
        .collect();

    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&i, &j| a[i][col].hi.abs().total_cmp(&a[j][col].hi.abs()))
            .unwrap();
        a.swap(col, pivot);
        for row in col + 1..dim {
            let factor = a[row][col].div(a[col][col]);
            for k in col..=dim {
                let delta = factor.mul(a[col][k]);
                a[row][k] = a[row][k].sub(delta);
            }
        }
    }
    let mut sol = vec![Dd::ZERO; dim];
    for row in (0..dim).rev() {
        let mut acc = a[row][dim];
        for k in row + 1..dim {
            acc = acc.sub(a[row][k].mul(sol[k]));
        }
        sol[row] = acc.div(a[row][row]);
    }
    sol.chunks(2).map(|p| (p[0].to_f64(), p[1].to_f64())).collect()
}

/// Deterministic pseudo-random values in `[-1, 1)` (SplitMix64).
pub fn splitmix(seed: u64, len: usize) -> Vec<f64> {
    let mut state = seed;
    (0..len)
        .map(|_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

pub fn bins_to_rad(bins: f64, n: usize) -> f64 {
    2.0 * PI * bins / n as f64
}

pub fn tone_signal(bins: f64, amplitude: f64, phase: f64, n: usize) -> Signal {
    multitone::synthesize(
        &[Tone::new(bins_to_rad(bins, n), amplitude, phase)],
        n,
        NoiseSpec::noiseless(),
    )
    .unwrap()
}

/// Peak of `|X|` inside bin pair `(k, k+1)` to `fine` bins: a coarse scan
/// at `1e-3` bins locates the lobe, then [`multitone::dense_grid_peak`] runs
/// at `fine` over ±2 coarse steps around it.
pub fn grid_peak_in_bin(x: &[f64], k: usize, fine: f64) -> f64 {
    let n = x.len();
    let width = 2.0 * PI / n as f64;
    let lo = k as f64 * width;
    let hi = (k + 1) as f64 * width;
    let coarse = multitone::dense_grid_peak(x, lo, hi, 1e-3 * width).unwrap();
    let band_lo = (coarse.frequency - 2e-3 * width).max(lo);
    let band_hi = (coarse.frequency + 2e-3 * width).min(hi);
    multitone::dense_grid_peak(x, band_lo, band_hi, fine * width)
        .unwrap()
        .frequency
}
