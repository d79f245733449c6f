//! Balanced optical heterodyne detection of the scattered field against a
//! frequency-shifted local oscillator.
//!
//! The detectors see `I₁,₂ = ½|E_s ± E_LO|²` with `E_s = A_s e^{iφ_cm}` and
//! `E_LO = A_LO e^{i(2πδν t + φ(t) + φ_cm)}`. Their difference is
//! `2 A_s A_LO cos(2πδν t + φ(t))`: the constant terms and any common-mode
//! laser phase `φ_cm` drop out, and only the relative phase `φ` broadens the
//! beat note.

use crate::error::{ensure, Error, Result};
use crate::exec::{stream_rng, Execution};
use crate::SPEED_OF_LIGHT;
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use std::f64::consts::{LN_2, PI, TAU};

/// Samples per independently seeded block of phase increments.
pub const DEFAULT_CHUNK: usize = 65_536;

/// Rounded conversion factor between Gaussian beat-note FWHM and mutual
/// coherence time.
pub const COHERENCE_FACTOR: f64 = 0.66;

/// Samples between direct re-evaluations of the DTFT phasor.
const REANCHOR: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct HeterodyneConfig {
    /// Beat frequency, Hz.
    pub delta_nu: f64,
    pub lo_amplitude: f64,
    pub signal_amplitude: f64,
    /// Hz.
    pub sample_rate: f64,
    /// s.
    pub acquisition_time: f64,
    /// Frequencies of the two acousto-optic shifters, Hz. Metadata only.
    pub aom_freqs: (f64, f64),
    /// Samples per random-number block; part of the reproducibility contract.
    pub chunk_size: usize,
    /// Independent acquisitions whose power spectra are averaged before line
    /// fitting, as in a spectrum analyser's averaging mode.
    pub averages: usize,
}

impl Default for HeterodyneConfig {
    fn default() -> Self {
        HeterodyneConfig {
            delta_nu: 210e3,
            lo_amplitude: 1.0,
            signal_amplitude: 0.05,
            sample_rate: 1e6,
            acquisition_time: 5.0,
            aom_freqs: (80.000e6, 79.790e6),
            chunk_size: DEFAULT_CHUNK,
            averages: 1,
        }
    }
}

impl HeterodyneConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.sample_rate > 0.0, "sample_rate", || {
            "must be positive".into()
        })?;
        ensure(self.delta_nu >= 0.0, "delta_nu", || {
            "must be non-negative".into()
        })?;
        if self.delta_nu >= self.sample_rate / 2.0 {
            return Err(Error::Nyquist {
                freq: self.delta_nu,
                sample_rate: self.sample_rate,
            });
        }
        ensure(self.acquisition_time > 0.0, "acquisition_time", || {
            "must be positive".into()
        })?;
        ensure(
            self.lo_amplitude >= 0.0 && self.signal_amplitude >= 0.0,
            "amplitude",
            || "field amplitudes must be non-negative".into(),
        )?;
        ensure(self.chunk_size > 0, "chunk_size", || {
            "must be positive".into()
        })?;
        ensure(self.averages > 0, "averages", || {
            "must be at least one".into()
        })?;
        ensure(self.sample_count() >= 2, "acquisition_time", || {
            "needs at least two samples".into()
        })
    }

    pub fn sample_count(&self) -> usize {
        (self.acquisition_time * self.sample_rate).round() as usize
    }

    /// Beat frequency implied by the two acousto-optic shifters.
    pub fn aom_difference(&self) -> f64 {
        (self.aom_freqs.0 - self.aom_freqs.1).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseTone {
    /// Hz.
    pub freq: f64,
    /// Peak phase excursion, rad.
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PhaseNoiseModel {
    /// Relative-phase diffusion, rad²/s.
    pub random_walk_diffusion: f64,
    pub sinusoidal_components: Vec<PhaseTone>,
    /// Laser phase diffusion common to signal and LO, rad²/s.
    pub common_mode_diffusion: f64,
}

impl PhaseNoiseModel {
    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        ensure(
            self.random_walk_diffusion >= 0.0,
            "random_walk_diffusion",
            || "must be non-negative".into(),
        )?;
        ensure(
            self.common_mode_diffusion >= 0.0,
            "common_mode_diffusion",
            || "must be non-negative".into(),
        )?;
        for tone in &self.sinusoidal_components {
            if tone.freq >= sample_rate / 2.0 {
                return Err(Error::Nyquist {
                    freq: tone.freq,
                    sample_rate,
                });
            }
        }
        Ok(())
    }
}

/// Real photocurrent difference `I₁ − I₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct BeatTrace {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
}

impl BeatTrace {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }
}

/// Discrete Brownian phase with variance `diffusion / fs` per sample,
/// starting at zero. Blocks of `chunk` increments use their own random
/// streams and are summed in a fixed order.
pub fn random_walk_phase(
    n: usize,
    diffusion: f64,
    sample_rate: f64,
    chunk: usize,
    seed: u64,
    stream_base: u64,
    execution: Execution,
) -> Vec<f64> {
    if diffusion == 0.0 || n == 0 {
        return vec![0.0; n];
    }
    let step = (diffusion / sample_rate).sqrt();
    let n_chunks = n.div_ceil(chunk);
    let local: Vec<Vec<f64>> = execution.map(n_chunks, |c| {
        let len = chunk.min(n - c * chunk);
        let mut rng = stream_rng(seed, stream_base + c as u64);
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(len + 1);
        out.push(0.0);
        for _ in 0..len {
            let z: f64 = rng.sample(StandardNormal);
            acc += step * z;
            out.push(acc);
        }
        out
    });
    let mut offsets = Vec::with_capacity(n_chunks);
    let mut total = 0.0;
    for l in &local {
        offsets.push(total);
        total += l[l.len() - 1];
    }
    let mut phase = Vec::with_capacity(n);
    for (l, off) in local.iter().zip(offsets) {
        phase.extend(l[..l.len() - 1].iter().map(|v| off + v));
    }
    phase
}

/// Separate detector intensities `(I₁, I₂)`.
pub fn detector_intensities(
    config: &HeterodyneConfig,
    noise: &PhaseNoiseModel,
    seed: u64,
    execution: Execution,
) -> Result<(Vec<f64>, Vec<f64>)> {
    config.validate()?;
    noise.validate(config.sample_rate)?;
    let n = config.sample_count();
    let fs = config.sample_rate;
    let chunk = config.chunk_size;
    let rel = random_walk_phase(
        n,
        noise.random_walk_diffusion,
        fs,
        chunk,
        seed,
        0,
        execution,
    );
    let cm = random_walk_phase(
        n,
        noise.common_mode_diffusion,
        fs,
        chunk,
        seed,
        1 << 40,
        execution,
    );
    let (a_s, a_lo) = (config.signal_amplitude, config.lo_amplitude);
    let blocks = execution.map(n.div_ceil(chunk), |c| {
        let range = c * chunk..((c + 1) * chunk).min(n);
        let mut i1 = Vec::with_capacity(range.len());
        let mut i2 = Vec::with_capacity(range.len());
        for k in range {
            let t = k as f64 / fs;
            let tones: f64 = noise
                .sinusoidal_components
                .iter()
                .map(|p| p.amplitude * (TAU * p.freq * t).sin())
                .sum();
            let e_s = Complex64::from_polar(a_s, cm[k]);
            let e_lo = Complex64::from_polar(
                a_lo,
                beat_phase(config.delta_nu, k, fs) + rel[k] + tones + cm[k],
            );
            i1.push(0.5 * (e_s + e_lo).norm_sqr());
            i2.push(0.5 * (e_s - e_lo).norm_sqr());
        }
        (i1, i2)
    });
    let mut i1 = Vec::with_capacity(n);
    let mut i2 = Vec::with_capacity(n);
    for (a, b) in blocks {
        i1.extend(a);
        i2.extend(b);
    }
    Ok((i1, i2))
}

/// `2π δν t` reduced modulo one cycle in exact integer arithmetic where
/// possible, so the carrier phase stays accurate over long traces.
fn beat_phase(delta_nu: f64, k: usize, fs: f64) -> f64 {
    let cycles = delta_nu * k as f64 / fs;
    TAU * (cycles - cycles.floor())
}

/// Balanced difference signal `I₁ − I₂`.
pub fn beat_signal(
    config: &HeterodyneConfig,
    noise: &PhaseNoiseModel,
    seed: u64,
    execution: Execution,
) -> Result<BeatTrace> {
    let (i1, i2) = detector_intensities(config, noise, seed, execution)?;
    Ok(BeatTrace {
        samples: i1.iter().zip(&i2).map(|(a, b)| a - b).collect(),
        sample_rate: config.sample_rate,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Rectangular,
    Hann,
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|k| 0.5 - 0.5 * (TAU * k as f64 / n as f64).cos())
                .collect(),
        }
    }

    /// Mainlobe FWHM of the power response in units of `1/T`.
    pub fn resolution_factor(self) -> f64 {
        match self {
            Window::Rectangular => 0.885_892_941_378_904_6,
            Window::Hann => 1.438_999_266_498_986_2,
        }
    }
}

/// One-sided power per frequency point.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSpectrum {
    pub freq: Vec<f64>,
    pub power: Vec<f64>,
    /// Mainlobe FWHM of the window, Hz.
    pub resolution_bandwidth: f64,
    pub window: Window,
}

impl PowerSpectrum {
    pub fn bin_width(&self) -> f64 {
        self.freq[1] - self.freq[0]
    }

    pub fn total(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn peak_index(&self) -> usize {
        self.power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |p| p.0)
    }

    /// Index of the point nearest `f`.
    pub fn index_of(&self, f: f64) -> usize {
        let i = ((f - self.freq[0]) / self.bin_width()).round();
        i.clamp(0.0, (self.freq.len() - 1) as f64) as usize
    }
}

fn resolution(window: Window, n: usize, fs: f64) -> f64 {
    window.resolution_factor() * fs / n as f64
}

/// FFT power spectrum normalized so that, for the rectangular window, the
/// bins sum to the mean square of the trace (for Hann, to the mean square of
/// the windowed trace divided by the mean square window).
pub fn power_spectrum(trace: &BeatTrace, window: Window) -> Result<PowerSpectrum> {
    let n = trace.samples.len();
    if n < 2 {
        return Err(Error::Empty("trace needs at least two samples"));
    }
    let w = window.weights(n);
    let sum_w2: f64 = w.iter().map(|x| x * x).sum();
    let mut buf: Vec<Complex64> = trace
        .samples
        .iter()
        .zip(&w)
        .map(|(x, w)| Complex64::new(x * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (n as f64 * sum_w2);
    let half = n / 2;
    let df = trace.sample_rate / n as f64;
    let mut freq = Vec::with_capacity(half + 1);
    let mut power = Vec::with_capacity(half + 1);
    for (k, x) in buf.iter().enumerate().take(half + 1) {
        let doubled = k != 0 && !(n.is_multiple_of(2) && k == half);
        freq.push(k as f64 * df);
        power.push(x.norm_sqr() * scale * if doubled { 2.0 } else { 1.0 });
    }
    Ok(PowerSpectrum {
        freq,
        power,
        resolution_bandwidth: resolution(window, n, trace.sample_rate),
        window,
    })
}

/// Power spectrum at `n_points` frequencies spanning `[f_lo, f_hi]` by direct
/// evaluation of the discrete-time Fourier transform, with the normalization
/// of [`power_spectrum`]. Useful for resolving lines much narrower than the
/// plotting range without a giant zero-padded FFT.
pub fn zoom_spectrum(
    trace: &BeatTrace,
    window: Window,
    f_lo: f64,
    f_hi: f64,
    n_points: usize,
    execution: Execution,
) -> Result<PowerSpectrum> {
    let n = trace.samples.len();
    if n < 2 {
        return Err(Error::Empty("trace needs at least two samples"));
    }
    ensure(n_points >= 2 && f_hi > f_lo, "zoom", || {
        "need an increasing range of at least two points".into()
    })?;
    ensure(
        f_lo >= 0.0 && f_hi <= trace.sample_rate / 2.0,
        "zoom",
        || "range must lie within [0, fs/2]".into(),
    )?;
    let w = window.weights(n);
    let sum_w2: f64 = w.iter().map(|x| x * x).sum();
    let xw: Vec<f64> = trace.samples.iter().zip(&w).map(|(x, w)| x * w).collect();
    let fs = trace.sample_rate;
    let df = (f_hi - f_lo) / (n_points - 1) as f64;
    let freq: Vec<f64> = (0..n_points).map(|i| f_lo + i as f64 * df).collect();
    let scale = 1.0 / (n as f64 * sum_w2);
    let power = execution.map(n_points, |i| {
        let f = freq[i];
        let cycles_per_sample = f / fs;
        let step = Complex64::from_polar(1.0, -TAU * cycles_per_sample);
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, block) in xw.chunks(REANCHOR).enumerate() {
            let k0 = (b * REANCHOR) as f64 * cycles_per_sample;
            let mut z = Complex64::from_polar(1.0, -TAU * (k0 - k0.floor()));
            let mut part = Complex64::new(0.0, 0.0);
            for x in block {
                part += z * *x;
                z *= step;
            }
            acc += part;
        }
        let doubled = f > 0.0 && f < fs / 2.0;
        acc.norm_sqr() * scale * if doubled { 2.0 } else { 1.0 }
    });
    Ok(PowerSpectrum {
        freq,
        power,
        resolution_bandwidth: resolution(window, n, fs),
        window,
    })
}

/// Result of a least-squares Gaussian line fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub center: f64,
    pub fwhm: f64,
    /// 1σ uncertainty of `fwhm`.
    pub uncertainty: f64,
    pub amplitude: f64,
    pub background: f64,
}

impl LineFit {
    /// Fitted model at frequency `f`.
    pub fn value_at(&self, f: f64) -> f64 {
        let x = (f - self.center) / self.fwhm;
        self.amplitude * (-4.0 * LN_2 * x * x).exp() + self.background
    }
}

/// Width of the fit window in resolution bandwidths on each side of the peak.
pub const FIT_HALF_WIDTH_RBW: f64 = 10.0;

/// Fit `A exp(−4 ln2 (f − f₀)²/w²) + c` to the points within ±10 resolution
/// bandwidths of the largest point near `around`.
pub fn fit_gaussian_line(spectrum: &PowerSpectrum, around: f64) -> Result<LineFit> {
    let half = FIT_HALF_WIDTH_RBW * spectrum.resolution_bandwidth;
    let near: Vec<usize> = (0..spectrum.freq.len())
        .filter(|&i| (spectrum.freq[i] - around).abs() <= half)
        .collect();
    if near.len() < 5 {
        return Err(Error::NoPeak { around });
    }
    let peak = *near
        .iter()
        .max_by(|&&a, &&b| spectrum.power[a].total_cmp(&spectrum.power[b]))
        .expect("non-empty");
    let f_peak = spectrum.freq[peak];
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..spectrum.freq.len())
        .filter(|&i| (spectrum.freq[i] - f_peak).abs() <= half)
        .map(|i| (spectrum.freq[i], spectrum.power[i]))
        .unzip();
    if xs.len() < 5 {
        return Err(Error::NoPeak { around });
    }

    let med = median(&ys);
    let mad = 1.4826 * median(&ys.iter().map(|y| (y - med).abs()).collect::<Vec<_>>());
    let prominence = spectrum.power[peak] - med;
    if !(prominence > 0.0) || prominence < 5.0 * mad {
        return Err(Error::NoPeak { around });
    }

    let width0 = half_max_width(&xs, &ys, med).unwrap_or(spectrum.resolution_bandwidth);
    // Work in units centred on the peak and scaled by the initial width so the
    // normal equations are well conditioned.
    let scale_f = width0.max(1e-300);
    let u: Vec<f64> = xs.iter().map(|x| (x - f_peak) / scale_f).collect();
    let scale_y = prominence;
    let v: Vec<f64> = ys.iter().map(|y| y / scale_y).collect();
    let mut p = Vector4::new(1.0, 0.0, 1.0, med / scale_y);
    let mut lambda = 1e-3;
    let mut cost = residual_cost(&u, &v, &p);
    for _ in 0..200 {
        let (jtj, jtr) = normal_equations(&u, &v, &p);
        let mut improved = false;
        for _ in 0..30 {
            let mut damped = jtj;
            for d in 0..4 {
                damped[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(inv) = damped.try_inverse() else {
                lambda *= 10.0;
                continue;
            };
            let candidate = p + inv * jtr;
            let c = residual_cost(&u, &v, &candidate);
            if c.is_finite() && c < cost {
                let rel = (cost - c) / cost.max(1e-300);
                p = candidate;
                cost = c;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-14;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let (jtj, _) = normal_equations(&u, &v, &p);
    let dof = (u.len() as f64 - 4.0).max(1.0);
    let sigma2 = cost / dof;
    let cov = jtj.try_inverse().ok_or(Error::NoPeak { around })?;
    let width = p[2].abs() * scale_f;
    let uncertainty = (sigma2 * cov[(2, 2)]).max(0.0).sqrt() * scale_f;
    if !(width.is_finite() && p[0] > 0.0) {
        return Err(Error::NoPeak { around });
    }
    Ok(LineFit {
        center: f_peak + p[1] * scale_f,
        fwhm: width,
        uncertainty,
        amplitude: p[0] * scale_y,
        background: p[3] * scale_y,
    })
}

fn gaussian_terms(u: f64, p: &Vector4<f64>) -> (f64, Vector4<f64>) {
    let (a, u0, w, _c) = (p[0], p[1], p[2], p[3]);
    let d = u - u0;
    let k = 4.0 * LN_2;
    let e = (-k * d * d / (w * w)).exp();
    let model = a * e + p[3];
    let grad = Vector4::new(
        e,
        a * e * 2.0 * k * d / (w * w),
        a * e * 2.0 * k * d * d / (w * w * w),
        1.0,
    );
    (model, grad)
}

fn residual_cost(u: &[f64], v: &[f64], p: &Vector4<f64>) -> f64 {
    u.iter()
        .zip(v)
        .map(|(x, y)| {
            let r = y - gaussian_terms(*x, p).0;
            r * r
        })
        .sum()
}

fn normal_equations(u: &[f64], v: &[f64], p: &Vector4<f64>) -> (Matrix4<f64>, Vector4<f64>) {
    let mut jtj = Matrix4::zeros();
    let mut jtr = Vector4::zeros();
    for (x, y) in u.iter().zip(v) {
        let (m, g) = gaussian_terms(*x, p);
        jtj += g * g.transpose();
        jtr += g * (y - m);
    }
    (jtj, jtr)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn half_max_width(xs: &[f64], ys: &[f64], base: f64) -> Option<f64> {
    let peak = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|p| p.0)?;
    let half = base + 0.5 * (ys[peak] - base);
    let right = (peak..ys.len() - 1)
        .find(|&i| ys[i + 1] <= half)
        .map(|i| xs[i] + (ys[i] - half) / (ys[i] - ys[i + 1]) * (xs[i + 1] - xs[i]))?;
    let left = (1..=peak)
        .rev()
        .find(|&i| ys[i - 1] <= half)
        .map(|i| xs[i] - (ys[i] - half) / (ys[i] - ys[i - 1]) * (xs[i] - xs[i - 1]))?;
    Some(right - left)
}

/// Mutual-coherence time (s) and length (m).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coherence {
    pub tau_c: f64,
    pub length: f64,
}

fn coherence_with(factor: f64, fwhm: f64) -> Result<Coherence> {
    if !(fwhm > 0.0 && fwhm.is_finite()) {
        return Err(Error::param(
            "fwhm",
            format!("must be positive, got {fwhm}"),
        ));
    }
    let tau_c = factor / fwhm;
    Ok(Coherence {
        tau_c,
        length: SPEED_OF_LIGHT * tau_c,
    })
}

/// Coherence time `0.66 / Δν` of a Gaussian beat note of FWHM `fwhm` (Hz),
/// using the customary two-digit value of the prefactor.
pub fn mutual_coherence(fwhm: f64) -> Result<Coherence> {
    coherence_with(COHERENCE_FACTOR, fwhm)
}

/// As [`mutual_coherence`] with the unrounded prefactor `√(2 ln2 / π)`.
pub fn mutual_coherence_exact(fwhm: f64) -> Result<Coherence> {
    coherence_with((2.0 * LN_2 / PI).sqrt(), fwhm)
}

/// Zoomed spectrum around the beat frequency, ±`FIT_HALF_WIDTH_RBW`
/// resolution bandwidths wide with `points_per_rbw` points per bandwidth.
pub fn beat_line_spectrum(
    trace: &BeatTrace,
    delta_nu: f64,
    window: Window,
    points_per_rbw: usize,
    execution: Execution,
) -> Result<PowerSpectrum> {
    let rbw = resolution(window, trace.samples.len(), trace.sample_rate);
    let half = FIT_HALF_WIDTH_RBW * rbw;
    let n = (2.0 * FIT_HALF_WIDTH_RBW * points_per_rbw as f64).round() as usize + 1;
    zoom_spectrum(
        trace,
        window,
        (delta_nu - half).max(0.0),
        (delta_nu + half).min(trace.sample_rate / 2.0),
        n,
        execution,
    )
}

/// Seed of the `k`-th averaged acquisition; acquisition 0 uses `seed` itself.
pub fn acquisition_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Mean of [`beat_line_spectrum`] over `config.averages` independent
/// acquisitions.
pub fn averaged_line_spectrum(
    config: &HeterodyneConfig,
    noise: &PhaseNoiseModel,
    seed: u64,
    window: Window,
    points_per_rbw: usize,
    execution: Execution,
) -> Result<PowerSpectrum> {
    config.validate()?;
    let mut mean: Option<PowerSpectrum> = None;
    for k in 0..config.averages {
        let trace = beat_signal(config, noise, acquisition_seed(seed, k), execution)?;
        let spec = beat_line_spectrum(&trace, config.delta_nu, window, points_per_rbw, execution)?;
        match mean.as_mut() {
            None => mean = Some(spec),
            Some(m) => m
                .power
                .iter_mut()
                .zip(&spec.power)
                .for_each(|(a, b)| *a += b),
        }
    }
    let mut mean = mean.expect("averages validated as positive");
    let k = config.averages as f64;
    mean.power.iter_mut().for_each(|p| *p /= k);
    Ok(mean)
}

/// Fitted beat-note width for a given phase-noise model.
pub fn fitted_linewidth(
    config: &HeterodyneConfig,
    noise: &PhaseNoiseModel,
    seed: u64,
    window: Window,
    execution: Execution,
) -> Result<LineFit> {
    let spec = averaged_line_spectrum(config, noise, seed, window, 8, execution)?;
    fit_gaussian_line(&spec, config.delta_nu)
}

/// Relative-phase diffusion (rad²/s) for which the fitted beat FWHM equals
/// `target_fwhm` for this configuration and seed, by bisection in log space.
pub fn calibrate_diffusion(
    config: &HeterodyneConfig,
    base: &PhaseNoiseModel,
    seed: u64,
    target_fwhm: f64,
    window: Window,
    execution: Execution,
) -> Result<f64> {
    let width = |d: f64| -> Result<f64> {
        let noise = PhaseNoiseModel {
            random_walk_diffusion: d,
            ..base.clone()
        };
        Ok(fitted_linewidth(config, &noise, seed, window, execution)?.fwhm)
    };
    let floor = width(0.0)?;
    ensure(target_fwhm > floor, "target_fwhm", || {
        format!("target {target_fwhm} Hz is below the resolution-limited width {floor} Hz")
    })?;
    // A Lorentzian of FWHM D/2π adds roughly linearly to the resolution width.
    let guess = TAU * (target_fwhm - floor);
    let (mut lo, mut hi);
    if width(guess)? < target_fwhm {
        lo = guess;
        hi = 2.0 * guess;
        while width(hi)? < target_fwhm {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::param(
                    "target_fwhm",
                    "unreachable with diffusion below 1e6 rad²/s",
                ));
            }
        }
    } else {
        hi = guess;
        lo = 0.5 * guess;
        while width(lo)? >= target_fwhm {
            hi = lo;
            lo *= 0.5;
        }
    }
    while hi / lo > 1.0 + 1e-3 {
        let mid = (lo * hi).sqrt();
        if width(mid)? < target_fwhm {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo * hi).sqrt())
}
