//! Excitation-laser waveform synthesis and the weak-drive scattered field.
//!
//! A [`DriveWaveform`] holds the complex field envelope in units of Rabi
//! frequency (rad/s), sampled at `sample_rate`. Sample `k` is held constant on
//! `[k/fs, (k+1)/fs)` (zero-order hold) by every consumer in the crate; the
//! field is zero outside `[0, duration)`.

use crate::emitter::EmitterParams;
use crate::error::{ensure, Error, Result};
use crate::spectrum::Spectrum;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

/// Default sampling rate for synthesized waveforms, 20 GS/s.
pub const DEFAULT_SAMPLE_RATE: f64 = 20e9;

/// Saturation above which the linear (Heitler) response is refused.
pub const WEAK_DRIVE_LIMIT: f64 = 0.2;
/// Saturation above which the linear response logs a warning.
pub const WEAK_DRIVE_WARN: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct DriveWaveform {
    samples: Vec<Complex64>,
    sample_rate: f64,
    carrier_detuning: f64,
    max_modulation_freq: f64,
}

impl DriveWaveform {
    /// `max_modulation_freq` is the highest modulation frequency the caller
    /// declares to be present; it must be below Nyquist.
    pub fn new(
        samples: Vec<Complex64>,
        sample_rate: f64,
        carrier_detuning: f64,
        max_modulation_freq: f64,
    ) -> Result<Self> {
        ensure(
            sample_rate > 0.0 && sample_rate.is_finite(),
            "sample_rate",
            || format!("must be positive and finite, got {sample_rate}"),
        )?;
        ensure(carrier_detuning.is_finite(), "carrier_detuning", || {
            "must be finite".into()
        })?;
        ensure(max_modulation_freq >= 0.0, "max_modulation_freq", || {
            "must be non-negative".into()
        })?;
        if sample_rate <= 2.0 * max_modulation_freq {
            return Err(Error::Nyquist {
                freq: max_modulation_freq,
                sample_rate,
            });
        }
        Ok(DriveWaveform {
            samples,
            sample_rate,
            carrier_detuning,
            max_modulation_freq,
        })
    }

    /// Constant field of real amplitude `rabi`.
    pub fn cw(rabi: f64, duration: f64, sample_rate: f64) -> Result<Self> {
        let n = sample_count(duration, sample_rate)?;
        DriveWaveform::new(vec![Complex64::new(rabi, 0.0); n], sample_rate, 0.0, 0.0)
    }

    pub fn with_carrier_detuning(mut self, detuning: f64) -> Self {
        self.carrier_detuning = detuning;
        self
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn carrier_detuning(&self) -> f64 {
        self.carrier_detuning
    }

    pub fn max_modulation_freq(&self) -> f64 {
        self.max_modulation_freq
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.sample_rate
    }

    pub fn max_rabi(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Instantaneous intensity in units of Rabi frequency squared.
    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm_sqr()).collect()
    }

    /// Time-domain field energy, `sum |E|^2 dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.dt()
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
    }
}

fn sample_count(duration: f64, sample_rate: f64) -> Result<usize> {
    ensure(duration > 0.0 && duration.is_finite(), "duration", || {
        format!("must be positive, got {duration}")
    })?;
    ensure(sample_rate > 0.0, "sample_rate", || {
        "must be positive".into()
    })?;
    Ok((duration * sample_rate).round().max(1.0) as usize)
}

fn check_nyquist(freq: f64, sample_rate: f64) -> Result<()> {
    if freq >= sample_rate / 2.0 {
        Err(Error::Nyquist { freq, sample_rate })
    } else {
        Ok(())
    }
}

/// Sinusoidal intensity modulation: `I(t) = mean_rabi^2 (1 + depth cos(2 pi f t))`,
/// with the field envelope `sqrt(I)`.
pub fn sine_am(
    mod_freq: f64,
    depth: f64,
    mean_rabi: f64,
    duration: f64,
    sample_rate: f64,
) -> Result<DriveWaveform> {
    ensure((0.0..=1.0).contains(&depth), "depth", || {
        format!("must be in [0,1], got {depth}")
    })?;
    ensure(mod_freq >= 0.0, "mod_freq", || {
        "must be non-negative".into()
    })?;
    ensure(mean_rabi >= 0.0, "mean_rabi", || {
        "must be non-negative".into()
    })?;
    check_nyquist(mod_freq, sample_rate)?;
    let n = sample_count(duration, sample_rate)?;
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / sample_rate;
            let i = (1.0 + depth * (TAU * mod_freq * t).cos()).max(0.0);
            Complex64::new(mean_rabi * i.sqrt(), 0.0)
        })
        .collect();
    DriveWaveform::new(samples, sample_rate, 0.0, mod_freq)
}

/// Zero-mean bipolar field `peak_rabi cos(2 pi f t)`: the carrier vanishes and
/// the power sits in two sidebands at `+-mod_freq`.
pub fn carrier_suppressed(
    mod_freq: f64,
    peak_rabi: f64,
    duration: f64,
    sample_rate: f64,
) -> Result<DriveWaveform> {
    ensure(mod_freq > 0.0, "mod_freq", || "must be positive".into())?;
    check_nyquist(mod_freq, sample_rate)?;
    let n = sample_count(duration, sample_rate)?;
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / sample_rate;
            Complex64::new(peak_rabi * (TAU * mod_freq * t).cos(), 0.0)
        })
        .collect();
    DriveWaveform::new(samples, sample_rate, 0.0, mod_freq)
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum PulseShape {
    /// One-sample edges.
    #[default]
    Rectangular,
    /// Flat top with raised-cosine intensity edges of the given 0-100% rise
    /// time; half-intensity points stay at the nominal pulse edges.
    RaisedCosine { rise_time: f64 },
}

/// `n_pulses` intensity pulses with rising edges spaced `1/rep_rate`.
pub fn pulse_train(
    pulse_width: f64,
    rep_rate: f64,
    peak_rabi: f64,
    n_pulses: usize,
    sample_rate: f64,
    shape: PulseShape,
) -> Result<DriveWaveform> {
    ensure(pulse_width > 0.0, "pulse_width", || {
        "must be positive".into()
    })?;
    ensure(rep_rate > 0.0, "rep_rate", || "must be positive".into())?;
    ensure(n_pulses > 0, "n_pulses", || "must be at least one".into())?;
    ensure(pulse_width * rep_rate < 1.0, "pulse_width", || {
        format!("pulses of {pulse_width:e} s overlap at a repetition rate of {rep_rate:e} Hz")
    })?;
    let bandwidth = match shape {
        PulseShape::Rectangular => 1.0 / pulse_width,
        PulseShape::RaisedCosine { rise_time } => {
            ensure(
                rise_time > 0.0 && rise_time <= pulse_width,
                "rise_time",
                || "must be positive and no longer than the pulse".into(),
            )?;
            1.0 / rise_time
        }
    };
    check_nyquist(bandwidth, sample_rate)?;
    let n = sample_count(n_pulses as f64 / rep_rate, sample_rate)?;
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    let period = 1.0 / rep_rate;
    match shape {
        PulseShape::Rectangular => {
            let width = (pulse_width * sample_rate).round() as usize;
            for p in 0..n_pulses {
                let start = (p as f64 * period * sample_rate).round() as usize;
                for s in samples.iter_mut().skip(start).take(width) {
                    *s = Complex64::new(peak_rabi, 0.0);
                }
            }
        }
        PulseShape::RaisedCosine { rise_time } => {
            for (k, s) in samples.iter_mut().enumerate() {
                let t = k as f64 / sample_rate;
                let t_rel = t - (t / period).floor() * period;
                let i = raised_cosine_intensity(t_rel, pulse_width, rise_time).max(
                    raised_cosine_intensity(t_rel - period, pulse_width, rise_time),
                );
                *s = Complex64::new(peak_rabi * i.sqrt(), 0.0);
            }
        }
    }
    DriveWaveform::new(samples, sample_rate, 0.0, bandwidth)
}

fn raised_cosine_intensity(t: f64, width: f64, rise: f64) -> f64 {
    let edge = |x: f64| {
        if x <= -rise / 2.0 {
            0.0
        } else if x >= rise / 2.0 {
            1.0
        } else {
            0.5 * (1.0 - (std::f64::consts::PI * (x + rise / 2.0) / rise).cos())
        }
    };
    edge(t).min(edge(width - t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModulationKind {
    Cw,
    SineAm,
    CarrierSuppressed,
    PulseTrain,
    /// Samples supplied externally (e.g. loaded from a waveform file).
    Custom,
}

/// Declarative description of an excitation waveform.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulationSpec {
    pub kind: ModulationKind,
    pub mod_freq: f64,
    pub depth: f64,
    pub pulse_width: f64,
    pub rep_rate: f64,
    pub shape: PulseShape,
}

impl ModulationSpec {
    pub fn cw() -> Self {
        ModulationSpec {
            kind: ModulationKind::Cw,
            mod_freq: 0.0,
            depth: 0.0,
            pulse_width: 0.0,
            rep_rate: 0.0,
            shape: PulseShape::Rectangular,
        }
    }

    pub fn sine_am(mod_freq: f64, depth: f64) -> Self {
        ModulationSpec {
            kind: ModulationKind::SineAm,
            mod_freq,
            depth,
            ..Self::cw()
        }
    }

    pub fn carrier_suppressed(mod_freq: f64) -> Self {
        ModulationSpec {
            kind: ModulationKind::CarrierSuppressed,
            mod_freq,
            ..Self::cw()
        }
    }

    pub fn pulse_train(pulse_width: f64, rep_rate: f64) -> Self {
        ModulationSpec {
            kind: ModulationKind::PulseTrain,
            pulse_width,
            rep_rate,
            ..Self::cw()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure((0.0..=1.0).contains(&self.depth), "depth", || {
            format!("must be in [0,1], got {}", self.depth)
        })?;
        if self.kind == ModulationKind::PulseTrain {
            ensure(
                self.pulse_width > 0.0 && self.rep_rate > 0.0,
                "pulse_width",
                || "pulse trains need a positive width and repetition rate".into(),
            )?;
            ensure(
                self.pulse_width * self.rep_rate < 1.0,
                "pulse_width",
                || "pulse_width x rep_rate must be below 1".into(),
            )?;
        }
        if matches!(
            self.kind,
            ModulationKind::SineAm | ModulationKind::CarrierSuppressed
        ) {
            ensure(self.mod_freq > 0.0, "mod_freq", || {
                "must be positive".into()
            })?;
        }
        Ok(())
    }

    /// Repetition period of the waveform, if it has one.
    pub fn period(&self) -> Option<f64> {
        match self.kind {
            ModulationKind::PulseTrain => Some(1.0 / self.rep_rate),
            ModulationKind::SineAm | ModulationKind::CarrierSuppressed => Some(1.0 / self.mod_freq),
            ModulationKind::Cw | ModulationKind::Custom => None,
        }
    }

    /// Build the waveform. `amplitude` is the mean Rabi frequency for CW and
    /// sine AM and the peak Rabi frequency otherwise; pulse trains contain
    /// `round(duration * rep_rate)` pulses.
    pub fn synthesize(
        &self,
        amplitude: f64,
        duration: f64,
        sample_rate: f64,
    ) -> Result<DriveWaveform> {
        self.validate()?;
        match self.kind {
            ModulationKind::Cw => DriveWaveform::cw(amplitude, duration, sample_rate),
            ModulationKind::SineAm => {
                sine_am(self.mod_freq, self.depth, amplitude, duration, sample_rate)
            }
            ModulationKind::CarrierSuppressed => {
                carrier_suppressed(self.mod_freq, amplitude, duration, sample_rate)
            }
            ModulationKind::PulseTrain => pulse_train(
                self.pulse_width,
                self.rep_rate,
                amplitude,
                ((duration * self.rep_rate).round() as usize).max(1),
                sample_rate,
                self.shape,
            ),
            ModulationKind::Custom => Err(Error::param(
                "kind",
                "custom waveforms are loaded from samples, not synthesized",
            )),
        }
    }
}

/// Energy spectral density of the field envelope.
///
/// The grid is the full DFT grid in ascending order, offset by the carrier
/// detuning; `sum(power) * df` equals [`DriveWaveform::energy`].
pub fn waveform_spectrum(drive: &DriveWaveform) -> Result<Spectrum> {
    envelope_spectrum(
        drive.samples(),
        drive.sample_rate(),
        drive.carrier_detuning(),
    )
}

pub(crate) fn envelope_spectrum(
    samples: &[Complex64],
    sample_rate: f64,
    carrier_detuning: f64,
) -> Result<Spectrum> {
    if samples.len() < 2 {
        return Err(Error::Empty("waveform needs at least two samples"));
    }
    let n = samples.len();
    let dt = 1.0 / sample_rate;
    let mut buf = samples.to_vec();
    // Components e^{-i 2 pi f t} of the envelope sit at +f relative to the
    // carrier, hence the e^{+i} transform.
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let df = sample_rate / n as f64;
    let shift = n / 2;
    let offset = carrier_detuning / TAU;
    let mut freq = Vec::with_capacity(n);
    let mut power = Vec::with_capacity(n);
    for j in 0..n {
        let k = (j + n - shift) % n;
        let signed = if k >= n - shift {
            k as f64 - n as f64
        } else {
            k as f64
        };
        freq.push(signed * df + offset);
        power.push((buf[k] * dt).norm_sqr());
    }
    Spectrum::new(freq, power, 0.0)
}

/// Weak-drive scattered field `<sigma(t)>` of the emitter.
///
/// The drive is filtered by the single-pole response with pole
/// `gamma/2 + pure_dephasing - i*detuning`, discretized exactly for the
/// zero-order-hold drive. Output sample `k` is `<sigma>` at `t = k/fs`,
/// starting from the ground state.
///
/// The amplitude pole at `gamma/2` makes the scattered *intensity* decay at
/// `gamma + 2*pure_dephasing`, i.e. with the excited-state lifetime `T1` for a
/// transform-limited emitter.
pub fn heitler_response(drive: &DriveWaveform, params: &EmitterParams) -> Result<DriveWaveform> {
    if let Some(index) = drive.first_non_finite() {
        return Err(Error::NonFiniteDrive { index });
    }
    let detuning = params.detuning_offset + drive.carrier_detuning();
    let max_s = params.saturation(drive.max_rabi(), detuning);
    if max_s > WEAK_DRIVE_LIMIT {
        return Err(Error::WeakDriveViolated {
            max_s,
            limit: WEAK_DRIVE_LIMIT,
        });
    }
    if max_s > WEAK_DRIVE_WARN {
        log::warn!("linear response at saturation {max_s:.3}; nonlinear corrections of order s");
    }
    let pole = Complex64::new(params.coherence_decay(), -detuning);
    let dt = drive.dt();
    let decay = (-pole * dt).exp();
    let gain = (Complex64::new(1.0, 0.0) - decay) / pole;
    let half_i = Complex64::new(0.0, -0.5);
    let mut sigma = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(drive.len());
    for omega in drive.samples() {
        out.push(sigma);
        sigma = decay * sigma + gain * half_i * omega;
    }
    DriveWaveform::new(
        out,
        drive.sample_rate(),
        drive.carrier_detuning(),
        drive.max_modulation_freq(),
    )
}

/// Weight of the line at `offset` (Hz from the carrier) relative to the
/// carrier line, in `emitted` divided by the same ratio in `laser`. Both
/// spectra must share a grid.
pub fn sideband_transfer(laser: &Spectrum, emitted: &Spectrum, offset: f64) -> Result<f64> {
    if laser.freq() != emitted.freq() {
        return Err(Error::GridMismatch(
            "laser and emitted spectra differ in grid".into(),
        ));
    }
    let (i0, i1) = (laser.index_of(0.0), laser.index_of(offset));
    let ratio = |s: &Spectrum| s.power()[i1] / s.power()[i0];
    if !(laser.power()[i0] > 0.0 && emitted.power()[i0] > 0.0 && laser.power()[i1] > 0.0) {
        return Err(Error::Undefined(
            "carrier or sideband carries no laser power",
        ));
    }
    Ok(ratio(emitted) / ratio(laser))
}

/// Carrier power relative to the stronger first-order sideband, dB.
pub fn carrier_suppression_db(spectrum: &Spectrum, mod_freq: f64) -> Result<f64> {
    let p = |f: f64| spectrum.power()[spectrum.index_of(f)];
    let side = p(mod_freq).max(p(-mod_freq));
    if !(side > 0.0) {
        return Err(Error::Undefined("no power in the first-order sidebands"));
    }
    Ok(10.0 * (p(0.0) / side).log10())
}
