use heitler_core::heterodyne::*;
use heitler_core::Execution;
use std::f64::consts::PI;

fn config(acquisition_time: f64) -> HeterodyneConfig {
    HeterodyneConfig {
        acquisition_time,
        ..HeterodyneConfig::default()
    }
}

/// `J_n(x) = (1/π) ∫₀^π cos(nθ − x sin θ) dθ` by composite Simpson.
fn bessel_j(n: i32, x: f64) -> f64 {
    let k = 4000;
    let h = PI / k as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut s = f(0.0) + f(PI);
    for i in 1..k {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0 / PI
}

#[test]
fn sinusoidal_phase_noise_gives_bessel_sidebands() {
    let c = config(0.1);
    for beta in [0.3, 1.0, 2.0] {
        let noise = PhaseNoiseModel {
            sinusoidal_components: vec![PhaseTone {
                freq: 1e3,
                amplitude: beta,
            }],
            ..PhaseNoiseModel::default()
        };
        let trace = beat_signal(&c, &noise, 1, Execution::Parallel).unwrap();
        let s = power_spectrum(&trace, Window::Rectangular).unwrap();
        let carrier = s.power[s.index_of(c.delta_nu)];
        let j0 = bessel_j(0, beta);
        for n in [1, 2] {
            let jn = bessel_j(n, beta);
            for f in [c.delta_nu + n as f64 * 1e3, c.delta_nu - n as f64 * 1e3] {
                let r = s.power[s.index_of(f)] / carrier;
                assert!(
                    (r - (jn / j0).powi(2)).abs() < 1e-6 * (1.0 + (jn / j0).powi(2)),
                    "β = {beta}, n = {n}"
                );
            }
        }
        // Total beat power is independent of the modulation.
        let total: f64 = s.power.iter().skip(1).sum();
        let amp = 2.0 * c.signal_amplitude * c.lo_amplitude;
        assert!((total / (amp * amp / 2.0) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn common_mode_noise_cancels() {
    let c = config(0.05);
    let clean = beat_signal(&c, &PhaseNoiseModel::default(), 3, Execution::Parallel).unwrap();
    let noisy = PhaseNoiseModel {
        common_mode_diffusion: 1e4,
        ..PhaseNoiseModel::default()
    };
    let with_cm = beat_signal(&c, &noisy, 3, Execution::Parallel).unwrap();
    let max = clean
        .samples
        .iter()
        .zip(&with_cm.samples)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(max < 1e-12, "{max}");
    // A phase shared by both fields drops out of each detector current.
    let (i1, _) = detector_intensities(&c, &noisy, 3, Execution::Parallel).unwrap();
    let (j1, _) =
        detector_intensities(&c, &PhaseNoiseModel::default(), 3, Execution::Parallel).unwrap();
    assert!(i1.iter().zip(&j1).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn power_spectrum_satisfies_parseval() {
    let c = config(0.02);
    let noise = PhaseNoiseModel {
        random_walk_diffusion: 50.0,
        ..PhaseNoiseModel::default()
    };
    let trace = beat_signal(&c, &noise, 5, Execution::Parallel).unwrap();
    let s = power_spectrum(&trace, Window::Rectangular).unwrap();
    let ms = trace.samples.iter().map(|x| x * x).sum::<f64>() / trace.samples.len() as f64;
    assert!((s.total() / ms - 1.0).abs() < 1e-10);
}

#[test]
fn zoom_spectrum_matches_fft_bins() {
    let c = config(0.2);
    let noise = PhaseNoiseModel {
        random_walk_diffusion: 10.0,
        ..PhaseNoiseModel::default()
    };
    let trace = beat_signal(&c, &noise, 8, Execution::Parallel).unwrap();
    for window in [Window::Rectangular, Window::Hann] {
        let full = power_spectrum(&trace, window).unwrap();
        let i0 = full.index_of(c.delta_nu) - 20;
        let zoom = zoom_spectrum(
            &trace,
            window,
            full.freq[i0],
            full.freq[i0 + 40],
            41,
            Execution::Parallel,
        )
        .unwrap();
        let peak = full.power[full.peak_index()];
        for k in 0..=40 {
            assert!((zoom.power[k] - full.power[i0 + k]).abs() < 1e-9 * peak);
        }
    }
}

#[test]
fn noiseless_line_is_resolution_limited() {
    for (t, window) in [
        (0.5, Window::Rectangular),
        (2.0, Window::Rectangular),
        (0.5, Window::Hann),
    ] {
        let c = config(t);
        let fit = fitted_linewidth(
            &c,
            &PhaseNoiseModel::default(),
            1,
            window,
            Execution::Parallel,
        )
        .unwrap();
        let rbw = window.resolution_factor() / t;
        assert!(
            (fit.fwhm - rbw).abs() <= 1.0 / t,
            "T = {t}: {} vs {rbw}",
            fit.fwhm
        );
        assert!((fit.center - c.delta_nu).abs() < 0.1 / t);
    }
}

#[test]
fn averaged_width_grows_with_diffusion() {
    let c = HeterodyneConfig {
        averages: 8,
        ..config(0.5)
    };
    let widths: Vec<f64> = [0.0, 10.0, 40.0]
        .iter()
        .map(|&d| {
            let noise = PhaseNoiseModel {
                random_walk_diffusion: d,
                ..PhaseNoiseModel::default()
            };
            fitted_linewidth(&c, &noise, 2, Window::Rectangular, Execution::Parallel)
                .unwrap()
                .fwhm
        })
        .collect();
    assert!(widths[0] < widths[1] && widths[1] < widths[2], "{widths:?}");
    // A D/2π Lorentzian cannot narrow the line below its own width.
    assert!(widths[2] > 40.0 / (2.0 * PI));
}

#[test]
fn averaging_reduces_spectral_scatter() {
    let noise = PhaseNoiseModel {
        random_walk_diffusion: 20.0,
        ..PhaseNoiseModel::default()
    };
    let scatter = |averages| {
        let c = HeterodyneConfig {
            averages,
            ..config(0.2)
        };
        let s = averaged_line_spectrum(&c, &noise, 4, Window::Rectangular, 1, Execution::Parallel)
            .unwrap();
        // Relative roughness between neighbouring points.
        let r: f64 = s
            .power
            .windows(2)
            .map(|w| ((w[1] - w[0]) / (w[1] + w[0])).powi(2))
            .sum();
        r / (s.power.len() - 1) as f64
    };
    assert!(scatter(16) < 0.5 * scatter(1));
}

#[test]
fn execution_modes_agree() {
    let c = HeterodyneConfig {
        chunk_size: 10_000,
        ..config(0.1)
    };
    let noise = PhaseNoiseModel {
        random_walk_diffusion: 3.0,
        common_mode_diffusion: 7.0,
        ..PhaseNoiseModel::default()
    };
    let a = beat_signal(&c, &noise, 9, Execution::Parallel).unwrap();
    let b = beat_signal(&c, &noise, 9, Execution::Sequential).unwrap();
    assert_eq!(a, b);
}

#[test]
fn random_walk_variance_grows_linearly() {
    let d = 4.0;
    let fs = 1e4;
    let n = 1000;
    let trials = 2000;
    let mut var = 0.0;
    for s in 0..trials {
        let p = random_walk_phase(n, d, fs, 256, s, 0, Execution::Sequential);
        var += p[n - 1] * p[n - 1];
    }
    var /= trials as f64;
    let expected = d * (n - 1) as f64 / fs;
    // Standard error of a χ²₁ mean over 2000 trials is √(2/2000).
    assert!((var / expected - 1.0).abs() < 4.0 * (2.0f64 / trials as f64).sqrt());
}

#[test]
fn coherence_formula() {
    let c = mutual_coherence(0.172).unwrap();
    assert!((c.tau_c - 0.66 / 0.172).abs() < 1e-12);
    assert!((c.tau_c - 3.84).abs() < 0.01);
    assert!(c.tau_c > 3.0);
    assert!((c.length / c.tau_c - 299_792_458.0).abs() < 1e-6);
    let e = mutual_coherence_exact(0.172).unwrap();
    assert!((e.tau_c * 0.172 - (2.0 * 2f64.ln() / PI).sqrt()).abs() < 1e-12);
    assert!(mutual_coherence(0.0).is_err());
}

#[test]
fn beat_above_nyquist_rejected() {
    let c = HeterodyneConfig {
        sample_rate: 400e3,
        ..config(0.01)
    };
    assert!(matches!(
        beat_signal(&c, &PhaseNoiseModel::default(), 0, Execution::Parallel),
        Err(heitler_core::Error::Nyquist { .. })
    ));
}
