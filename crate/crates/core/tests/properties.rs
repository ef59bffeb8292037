mod support;

use std::f64::consts::PI;

use multitone::refine::median3;
use multitone::{
    bin_candidates, decompose, dense_grid_peak, dft, dtft_point, joint_ls_fit, make_basis, monte_carlo,
    refine_bisect, refine_robust, signal_energy, subtract_model, synthesize, DecompositionConfig, HalfSpectrum,
    NoiseSpec, RefineConfig, Signal, StopReason, Tone,
};
use proptest::prelude::*;
use support::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn ulp(v: f64) -> f64 {
    f64::EPSILON * v.abs().max(f64::MIN_POSITIVE)
}

prop_compose! {
    fn tone_in(n: usize)(bin in 3.0..(n as f64 / 2.0 - 3.0), amp in 0.1f64..3.0, phase in -3.0f64..3.0) -> Tone {
        Tone::new(bins_to_rad(bin, n), amp, phase)
    }
}

/// Tones separated by at least `gap` bins, sorted by frequency.
fn separated_tones(n: usize, count: usize, gap: f64) -> impl Strategy<Value = Vec<Tone>> {
    prop::collection::vec(tone_in(n), count).prop_filter("tones too close", move |tones| {
        let mut bins: Vec<f64> = tones.iter().map(|t| t.frequency * n as f64 / (2.0 * PI)).collect();
        bins.sort_by(f64::total_cmp);
        bins.windows(2).all(|w| w[1] - w[0] >= gap)
    })
}

fn samples(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

fn peak_pair(spec: &HalfSpectrum) -> usize {
    multitone::select_bin(&bin_candidates(spec)).unwrap().k
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn synthesize_is_closed_form(tone in tone_in(256)) {
        let x = synthesize(&[tone], 256, NoiseSpec::noiseless()).unwrap();
        for (n, &v) in x.iter().enumerate() {
            let expected = tone.amplitude * (tone.frequency * n as f64 + tone.phase).sin();
            prop_assert!((v - expected).abs() <= 4.0 * ulp(tone.amplitude) * (1.0 + tone.frequency * n as f64));
        }
    }

    #[test]
    fn synthesize_is_additive(a in tone_in(200), b in tone_in(200)) {
        let both = synthesize(&[a, b], 200, NoiseSpec::noiseless()).unwrap();
        let xa = synthesize(&[a], 200, NoiseSpec::noiseless()).unwrap();
        let xb = synthesize(&[b], 200, NoiseSpec::noiseless()).unwrap();
        for i in 0..200 {
            prop_assert!((both[i] - (xa[i] + xb[i])).abs() <= 4.0 * ulp(a.amplitude + b.amplitude));
        }
    }

    #[test]
    fn noise_is_seeded(seed in any::<u64>(), sd in 0.01f64..2.0) {
        let a = synthesize(&[], 64, NoiseSpec::new(sd, seed)).unwrap();
        let b = synthesize(&[], 64, NoiseSpec::new(sd, seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn parseval(x in samples(128)) {
        let s = Signal::new(x).unwrap();
        let spec = dft(&s);
        let n = s.len();
        let bins = spec.bins();
        // half spectrum: DC and Nyquist once, the rest twice
        let mut spectral = bins[0].norm_sqr() + bins[n / 2].norm_sqr();
        for b in &bins[1..n / 2] {
            spectral += 2.0 * b.norm_sqr();
        }
        let e = signal_energy(&s);
        prop_assert!((spectral / n as f64 - e).abs() <= 1e-10 * e.max(1.0));
    }

    #[test]
    fn dtft_is_linear(x in samples(96), y in samples(96), a in -3.0f64..3.0, w in 0.01f64..3.1) {
        let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
        let lhs = dtft_point(&combo, w);
        let rhs = dtft_point(&x, w) * a + dtft_point(&y, w);
        let scale = dtft_point(&x, w).norm() * a.abs() + dtft_point(&y, w).norm() + 1.0;
        prop_assert!((lhs - rhs).norm() <= 1e-10 * scale);
    }

    #[test]
    fn dtft_on_bins_equals_dft(x in samples(64)) {
        let s = Signal::new(x).unwrap();
        let spec = dft(&s);
        for k in 0..=32 {
            let w = 2.0 * PI * k as f64 / 64.0;
            let a = dtft_point(&s, w);
            let b = spec.bins()[k];
            prop_assert!((a - b).norm() <= 1e-9 * (b.norm() + s.energy().sqrt()));
        }
    }

    #[test]
    fn candidates_are_well_formed(x in samples(128)) {
        let s = Signal::new(x).unwrap();
        let spec = dft(&s);
        let cands = bin_candidates(&spec);
        prop_assert_eq!(cands.len(), 64);
        let width = spec.bin_width();
        for (i, c) in cands.iter().enumerate() {
            prop_assert_eq!(c.k, i);
            prop_assert!((0.0..=1.0).contains(&c.delta));
            prop_assert!(c.amplitude >= 0.0 && c.amplitude.is_finite());
            let lo = c.k as f64 * width;
            prop_assert!(c.implied_frequency >= lo - 1e-12 && c.implied_frequency <= lo + width + 1e-12);
        }
    }

    #[test]
    fn candidates_scale_with_signal(x in samples(128), c in 0.01f64..100.0) {
        let s = Signal::new(x).unwrap();
        let scaled = s.scale(c).unwrap();
        let a = bin_candidates(&dft(&s));
        let b = bin_candidates(&dft(&scaled));
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p.delta - q.delta).abs() <= 1e-9);
            prop_assert!((q.amplitude - c * p.amplitude).abs() <= 1e-9 * c * p.amplitude.max(1e-12));
        }
    }

    #[test]
    fn refine_interval_halves_exactly(tone in tone_in(512), eps in 1e-6f64..0.2) {
        let x = synthesize(&[tone], 512, NoiseSpec::noiseless()).unwrap();
        let spec = dft(&x);
        let k = peak_pair(&spec);
        let cfg = RefineConfig::new(eps);
        for (_, trace) in [refine_bisect(&x, &spec, k, &cfg).unwrap(), refine_robust(&x, &spec, k, &cfg).unwrap()] {
            let expected = spec.bin_width() * 0.5f64.powi(trace.iterations as i32);
            prop_assert_eq!(trace.final_interval_width, expected);
            prop_assert!(!trace.truncated);
            prop_assert_eq!(trace.iterations, cfg.halvings());
        }
    }

    #[test]
    fn refine_budgets_and_containment(x in samples(256), eps in 1e-6f64..0.2) {
        let s = Signal::new(x).unwrap();
        let spec = dft(&s);
        let k = peak_pair(&spec);
        let cfg = RefineConfig::new(eps);
        let lo = k as f64 * spec.bin_width();
        let hi = lo + spec.bin_width();
        let (wb, tb) = refine_bisect(&s, &spec, k, &cfg).unwrap();
        let (wr, tr) = refine_robust(&s, &spec, k, &cfg).unwrap();
        prop_assert!(tb.evaluations <= cfg.bisect_budget());
        prop_assert!(tr.evaluations <= cfg.robust_budget());
        for w in [wb, wr] {
            prop_assert!(w >= lo && w <= hi);
        }
    }

    #[test]
    fn repaired_samples_are_medians(x in samples(256)) {
        let s = Signal::new(x).unwrap();
        let spec = dft(&s);
        let k = peak_pair(&spec);
        let (_, trace) = refine_robust(&s, &spec, k, &RefineConfig::default()).unwrap();
        for c in &trace.repair_checks {
            // after repair the middle is no longer a strict local minimum
            prop_assert!(c.middle >= median3(c.left, c.middle, c.right));
        }
        let repaired = trace.repair_checks.iter().filter(|c| c.repaired).count();
        prop_assert_eq!(repaired, trace.repairs);
    }

    #[test]
    fn ls_residual_is_orthogonal(tones in separated_tones(512, 3, 2.0), seed in any::<u64>()) {
        let x = synthesize(&tones, 512, NoiseSpec::new(0.3, seed)).unwrap();
        let freqs: Vec<f64> = tones.iter().map(|t| t.frequency).collect();
        let (coeffs, _) = joint_ls_fit(&x, &freqs).unwrap();
        let r = subtract_model(&x, &coeffs, &freqs).unwrap();
        let xn = x.energy().sqrt();
        for &w in &freqs {
            let b = make_basis(w, 512).unwrap();
            for v in [&b.sin_vector, &b.cos_vector] {
                let ip: f64 = r.iter().zip(v.iter()).map(|(p, q)| p * q).sum();
                let vn = v.iter().map(|q| q * q).sum::<f64>().sqrt();
                prop_assert!(ip.abs() <= 1e-7 * xn * vn);
            }
        }
    }

    #[test]
    fn ls_energy_is_monotone(tones in separated_tones(512, 3, 2.0), seed in any::<u64>()) {
        let x = synthesize(&tones, 512, NoiseSpec::new(0.3, seed)).unwrap();
        let freqs: Vec<f64> = tones.iter().map(|t| t.frequency).collect();
        let mut last = x.energy();
        for m in 1..=freqs.len() {
            let (coeffs, _) = joint_ls_fit(&x, &freqs[..m]).unwrap();
            let e = subtract_model(&x, &coeffs, &freqs[..m]).unwrap().energy();
            prop_assert!(e <= last + 1e-12 * x.energy());
            last = e;
        }
    }

    #[test]
    fn polar_round_trip(alpha in -5.0f64..5.0, beta in -5.0f64..5.0) {
        prop_assume!(alpha.hypot(beta) > 1e-6);
        let coeffs = multitone::LinearCoefficients { pairs: vec![(alpha, beta)] };
        let tone = coeffs.tones(&[0.5])[0];
        let back = multitone::LinearCoefficients::from_tones(&[tone]).pairs[0];
        let tol = 4.0 * ulp(alpha.hypot(beta));
        prop_assert!((back.0 - alpha).abs() <= tol && (back.1 - beta).abs() <= tol);
    }

    #[test]
    fn ls_is_scale_equivariant(tones in separated_tones(256, 2, 2.0), c in 0.1f64..10.0) {
        let x = synthesize(&tones, 256, NoiseSpec::noiseless()).unwrap();
        let freqs: Vec<f64> = tones.iter().map(|t| t.frequency).collect();
        let (_, a) = joint_ls_fit(&x, &freqs).unwrap();
        let (_, b) = joint_ls_fit(&x.scale(c).unwrap(), &freqs).unwrap();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((q.amplitude - c * p.amplitude).abs() <= 1e-9 * c * p.amplitude);
            prop_assert!((q.phase - p.phase).abs() <= 1e-9);
        }
    }

    #[test]
    fn decompose_is_deterministic_and_idempotent(tones in separated_tones(1024, 2, 4.0), seed in any::<u64>()) {
        let x = synthesize(&tones, 1024, NoiseSpec::new(0.05, seed)).unwrap();
        let cfg = DecompositionConfig::known(2);
        let a = decompose(&x, &cfg).unwrap();
        let b = decompose(&x, &cfg).unwrap();
        prop_assert_eq!(&a.tones, &b.tones);
        prop_assert_eq!(a.residual.samples(), b.residual.samples());
        prop_assert_eq!(a.tones.len(), 2);
        prop_assert_eq!(a.stop_reason, StopReason::ReachedM);

        let (_, refit) = joint_ls_fit(&x, &a.frequencies()).unwrap();
        for (p, q) in a.tones.iter().zip(&refit) {
            prop_assert!((p.amplitude - q.amplitude).abs() <= 1e-10 * p.amplitude.max(1.0));
            prop_assert!((p.phase - q.phase).abs() <= 1e-10);
        }
        for w in a.diagnostics.windows(2) {
            prop_assert!(w[1].residual_energy <= w[0].residual_energy + 1e-12 * a.original_energy);
        }
    }

    #[test]
    fn grid_peak_is_stable_under_refinement(tone in tone_in(256)) {
        let x = synthesize(&[tone], 256, NoiseSpec::noiseless()).unwrap();
        let width = 2.0 * PI / 256.0;
        let lo = tone.frequency - 0.5 * width;
        let hi = tone.frequency + 0.5 * width;
        let step = 1e-3 * width;
        let coarse = dense_grid_peak(&x, lo, hi, step).unwrap();
        let fine = dense_grid_peak(&x, lo, hi, step / 2.0).unwrap();
        prop_assert!((coarse.frequency - fine.frequency).abs() <= step);
        prop_assert!(fine.magnitude >= coarse.magnitude * (1.0 - 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn monte_carlo_is_deterministic(seed in any::<u32>()) {
        let n = 512;
        let truth = [Tone::new(bins_to_rad(60.3, n), 1.0, 0.2), Tone::new(bins_to_rad(141.7, n), 0.5, -1.0)];
        let cfg = DecompositionConfig::known(2);
        let a = monte_carlo(&truth, n, 15.0, 4, &cfg, seed as u64).unwrap();
        let b = monte_carlo(&truth, n, 15.0, 4, &cfg, seed as u64).unwrap();
        prop_assert_eq!(a.without_timings(), b.without_timings());
    }
}
