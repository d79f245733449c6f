//! Photon streams: Monte Carlo wave-function trajectories, the detection chain
//! and amplitude calibration for pulsed excitation.
//!
//! Trajectories evolve the unnormalized state `(c_g, c_e)` under
//! `H_eff = H − (i/2)κ|e⟩⟨e|` with `κ = Γ + 2γ_φ` and jump when the squared
//! norm falls to a uniform random threshold. A jump is radiative (an emitted
//! photon, resetting to `|g⟩`) with probability `Γ/κ`, otherwise it is a pure
//! dephasing event that projects onto `|e⟩`.

use crate::emitter::{periodic_steady_state, EmitterParams, SpectralDiffusion};
use crate::error::{ensure, Error, Result};
use crate::exec::{stream_rng, Execution};
use crate::waveform::{DriveWaveform, ModulationKind, ModulationSpec};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

/// Picoseconds per second.
pub const PS_PER_S: f64 = 1e12;

/// Conversion factor from FWHM to standard deviation of a Gaussian.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhotonRecord {
    pub timestamp_ps: u64,
    pub channel: u8,
}

impl PhotonRecord {
    pub fn new(timestamp_ps: u64, channel: u8) -> Self {
        PhotonRecord {
            timestamp_ps,
            channel,
        }
    }

    /// Timestamp in seconds.
    pub fn time(&self) -> f64 {
        self.timestamp_ps as f64 / PS_PER_S
    }
}

/// Quantize times (s) to picoseconds, saturating negative values at zero.
pub fn to_picoseconds(t: f64) -> u64 {
    let ps = (t * PS_PER_S).round();
    if ps <= 0.0 {
        0
    } else {
        ps as u64
    }
}

/// Records for sorted emission times, without any detection losses.
pub fn records_from_times(times: &[f64], channel: u8) -> Vec<PhotonRecord> {
    times
        .iter()
        .map(|&t| PhotonRecord::new(to_picoseconds(t), channel))
        .collect()
}

/// Index of the first record whose timestamp is smaller than that of an
/// earlier record on the same channel.
pub fn first_out_of_order(records: &[PhotonRecord]) -> Option<usize> {
    let mut last = [None::<u64>; 256];
    for (i, r) in records.iter().enumerate() {
        let slot = &mut last[r.channel as usize];
        if let Some(prev) = *slot {
            if r.timestamp_ps < prev {
                return Some(i);
            }
        }
        *slot = Some(r.timestamp_ps);
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionChain {
    /// Detection efficiency in `[0, 1]`.
    pub efficiency: f64,
    /// Residual laser background, counts/s.
    pub background_rate: f64,
    /// Gaussian timing jitter FWHM, s.
    pub jitter_fwhm: f64,
    /// Histogram bin width used downstream, s.
    pub bin_width: f64,
    /// Fraction of the emission lost to the phonon sideband, `[0, 1]`.
    pub sideband_loss: f64,
}

impl Default for DetectionChain {
    fn default() -> Self {
        DetectionChain::ideal()
    }
}

impl DetectionChain {
    /// Lossless, noiseless, jitter-free detection with 162 ps bins.
    pub fn ideal() -> Self {
        DetectionChain {
            efficiency: 1.0,
            background_rate: 0.0,
            jitter_fwhm: 0.0,
            bin_width: 162e-12,
            sideband_loss: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure((0.0..=1.0).contains(&self.efficiency), "efficiency", || {
            format!("must be in [0,1], got {}", self.efficiency)
        })?;
        ensure(
            (0.0..=1.0).contains(&self.sideband_loss),
            "sideband_loss",
            || format!("must be in [0,1], got {}", self.sideband_loss),
        )?;
        ensure(
            self.background_rate >= 0.0 && self.background_rate.is_finite(),
            "background_rate",
            || "must be non-negative".into(),
        )?;
        ensure(
            self.jitter_fwhm >= 0.0 && self.jitter_fwhm.is_finite(),
            "jitter_fwhm",
            || "must be non-negative".into(),
        )?;
        ensure(self.bin_width > 0.0, "bin_width", || {
            "must be positive".into()
        })
    }

    /// Probability that an emitted photon is registered.
    pub fn transmission(&self) -> f64 {
        self.efficiency * (1.0 - self.sideband_loss)
    }

    pub fn jitter_sigma(&self) -> f64 {
        self.jitter_fwhm / FWHM_PER_SIGMA
    }
}

/// Thin, jitter and add background to sorted emission times (s).
///
/// Background counts are a homogeneous Poisson process on `[0, duration)`.
/// Output timestamps are rounded to 1 ps, clamped at zero and sorted.
pub fn apply_detection(
    emissions: &[f64],
    chain: &DetectionChain,
    duration: f64,
    channel: u8,
    seed: u64,
) -> Result<Vec<PhotonRecord>> {
    chain.validate()?;
    ensure(duration >= 0.0 && duration.is_finite(), "duration", || {
        "must be non-negative".into()
    })?;
    let mut rng = stream_rng(seed, (1 << 32) | channel as u64);
    let keep = chain.transmission();
    let sigma = chain.jitter_sigma();
    let jitter = if sigma > 0.0 {
        Some(Normal::new(0.0, sigma).map_err(|e| Error::param("jitter_fwhm", e.to_string()))?)
    } else {
        None
    };
    let mut out = Vec::with_capacity((emissions.len() as f64 * keep) as usize + 16);
    for &t in emissions {
        if keep < 1.0 && rng.random::<f64>() >= keep {
            continue;
        }
        let t = match &jitter {
            Some(n) => t + n.sample(&mut rng),
            None => t,
        };
        out.push(PhotonRecord::new(to_picoseconds(t), channel));
    }
    let mean_bg = chain.background_rate * duration;
    if mean_bg > 0.0 {
        let count = Poisson::new(mean_bg)
            .map_err(|e| Error::param("background_rate", e.to_string()))?
            .sample(&mut rng) as u64;
        for _ in 0..count {
            let t = rng.random::<f64>() * duration;
            out.push(PhotonRecord::new(to_picoseconds(t), channel));
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McConfig {
    /// Length of the independently seeded simulation blocks, s.
    pub block_duration: f64,
    pub execution: Execution,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            block_duration: 100e-6,
            execution: Execution::Parallel,
        }
    }
}

type Mat2 = [[Complex64; 2]; 2];

#[derive(Clone, Copy, Debug)]
struct Segment {
    duration: f64,
    omega: Complex64,
}

/// Run-length encoded drive, either repeating with `period` or followed by
/// an undriven tail.
#[derive(Clone, Debug)]
struct Schedule {
    segs: Vec<Segment>,
    starts: Vec<f64>,
    period: f64,
    periodic: bool,
}

impl Schedule {
    fn new(drive: &DriveWaveform, period: Option<f64>, max_chunk: f64) -> Result<Self> {
        if let Some(index) = drive.first_non_finite() {
            return Err(Error::NonFiniteDrive { index });
        }
        if drive.is_empty() {
            return Err(Error::Empty("drive waveform"));
        }
        let span = period.unwrap_or(drive.duration());
        ensure(span > 0.0 && span.is_finite(), "period", || {
            "must be positive and finite".into()
        })?;
        let fs = drive.sample_rate();
        let mut runs: Vec<Segment> = Vec::new();
        let mut covered = 0.0;
        for (k, &omega) in drive.samples().iter().enumerate() {
            let a = k as f64 / fs;
            if a >= span {
                break;
            }
            let b = ((k + 1) as f64 / fs).min(span);
            match runs.last_mut() {
                Some(last) if last.omega == omega => last.duration = b - (covered - last.duration),
                _ => runs.push(Segment {
                    duration: b - a,
                    omega,
                }),
            }
            covered = b;
        }
        if covered < span {
            runs.push(Segment {
                duration: span - covered,
                omega: Complex64::new(0.0, 0.0),
            });
        }
        let mut segs = Vec::new();
        for run in runs {
            let pieces = (run.duration / max_chunk).ceil().max(1.0) as usize;
            for _ in 0..pieces {
                segs.push(Segment {
                    duration: run.duration / pieces as f64,
                    omega: run.omega,
                });
            }
        }
        let mut starts = Vec::with_capacity(segs.len() + 1);
        let mut acc = 0.0;
        for s in &segs {
            starts.push(acc);
            acc += s.duration;
        }
        starts.push(span);
        Ok(Schedule {
            segs,
            starts,
            period: span,
            periodic: period.is_some(),
        })
    }
}

/// `exp(A t)` for `A = [[0, −iΩ*/2], [−iΩ/2, iΔ − κ/2]]` acting on `(c_g, c_e)`.
fn propagator(omega: Complex64, delta: f64, kappa: f64, t: f64) -> Mat2 {
    let i = Complex64::i();
    let a0 = Complex64::new(-0.25 * kappa, 0.5 * delta);
    let q = (a0 * a0 - 0.25 * omega.norm_sqr()).sqrt();
    let qt = q * t;
    let ep = ((a0 + q) * t).exp();
    let em = ((a0 - q) * t).exp();
    let ch = 0.5 * (ep + em);
    let sh = if qt.norm() < 1e-3 {
        let q2 = qt * qt;
        (a0 * t).exp() * t * (1.0 + q2 / 6.0 + q2 * q2 / 120.0)
    } else {
        (ep - em) / (2.0 * q)
    };
    let b01 = -0.5 * i * omega.conj();
    let b10 = -0.5 * i * omega;
    [[ch - sh * a0, sh * b01], [sh * b10, ch + sh * a0]]
}

#[inline]
fn apply(m: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

#[inline]
fn norm_sqr(v: &[Complex64; 2]) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

struct Diffusion {
    model: SpectralDiffusion,
    interval: f64,
    value: f64,
    next_update: f64,
}

impl Diffusion {
    fn new(model: SpectralDiffusion, value: f64, start: f64) -> Self {
        let interval = model.correlation_time / 20.0;
        Diffusion {
            model,
            interval,
            value,
            next_update: start + interval,
        }
    }
}

fn ou_step(model: &SpectralDiffusion, value: f64, dt: f64, rng: &mut ChaCha8Rng) -> f64 {
    let decay = (-dt / model.correlation_time).exp();
    let n: f64 = rng.sample(rand_distr::StandardNormal);
    value * decay + model.rms_detuning * (1.0 - decay * decay).sqrt() * n
}

/// One quantum trajectory walking through a [`Schedule`].
struct Walker<'a> {
    sched: &'a Schedule,
    detuning: f64,
    kappa: f64,
    radiative: f64,
    diffusion: Option<Diffusion>,
    cache: Vec<Option<Mat2>>,
    rng: ChaCha8Rng,
    psi: [Complex64; 2],
    threshold: f64,
    period_index: u64,
    seg: usize,
    offset: f64,
}

impl<'a> Walker<'a> {
    fn new(
        params: &EmitterParams,
        sched: &'a Schedule,
        carrier_detuning: f64,
        mut rng: ChaCha8Rng,
        start: f64,
        diffusion_value: Option<f64>,
    ) -> Self {
        let kappa = params.scattered_intensity_decay();
        let threshold = open_unit(&mut rng);
        let diffusion = match (params.diffusion, diffusion_value) {
            (Some(m), Some(v)) if m.rms_detuning > 0.0 => Some(Diffusion::new(m, v, start)),
            _ => None,
        };
        let mut w = Walker {
            sched,
            detuning: params.detuning_offset + carrier_detuning,
            kappa,
            radiative: params.gamma / kappa,
            diffusion,
            cache: vec![None; sched.segs.len()],
            rng,
            psi: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            threshold,
            period_index: 0,
            seg: 0,
            offset: 0.0,
        };
        w.seek(start);
        w
    }

    fn seek(&mut self, t: f64) {
        let s = self.sched;
        if s.periodic {
            self.period_index = (t / s.period).floor() as u64;
            let phase = t - self.period_index as f64 * s.period;
            self.place(phase);
        } else if t >= s.period {
            self.seg = s.segs.len();
            self.offset = t - s.period;
        } else {
            self.place(t);
        }
    }

    fn place(&mut self, phase: f64) {
        let s = self.sched;
        let idx = s.starts[..s.segs.len()]
            .partition_point(|&x| x <= phase)
            .saturating_sub(1);
        self.seg = idx;
        self.offset = (phase - s.starts[idx]).max(0.0);
        if self.offset >= s.segs[idx].duration {
            self.next_segment();
        }
    }

    fn time(&self) -> f64 {
        let s = self.sched;
        self.period_index as f64 * s.period + s.starts[self.seg] + self.offset
    }

    fn current_detuning(&self) -> f64 {
        self.detuning + self.diffusion.as_ref().map_or(0.0, |d| d.value)
    }

    fn next_segment(&mut self) {
        self.offset = 0.0;
        self.seg += 1;
        if self.seg == self.sched.segs.len() && self.sched.periodic {
            self.seg = 0;
            self.period_index += 1;
        }
    }

    fn update_diffusion(&mut self, now: f64) {
        let Some(d) = self.diffusion.as_mut() else {
            return;
        };
        let mut changed = false;
        while now >= d.next_update {
            d.value = ou_step(&d.model, d.value, d.interval, &mut self.rng);
            d.next_update += d.interval;
            changed = true;
        }
        if changed {
            self.cache.iter_mut().for_each(|c| *c = None);
        }
    }

    fn population(&self) -> f64 {
        self.psi[1].norm_sqr() / norm_sqr(&self.psi)
    }

    /// Evolve to absolute time `target`, appending radiative jump times.
    fn advance_to(&mut self, target: f64, emissions: &mut Vec<f64>) {
        loop {
            let now = self.time();
            let remaining = target - now;
            if remaining <= 1e-18 {
                return;
            }
            self.update_diffusion(now);
            let delta = self.current_detuning();
            let in_drive = self.seg < self.sched.segs.len();
            let (omega, seg_left) = if in_drive {
                let s = &self.sched.segs[self.seg];
                (s.omega, s.duration - self.offset)
            } else {
                (Complex64::new(0.0, 0.0), f64::INFINITY)
            };
            let to_end = seg_left <= remaining;
            let h = if to_end { seg_left } else { remaining };
            let u = if in_drive && to_end && self.offset == 0.0 {
                let kappa = self.kappa;
                *self.cache[self.seg].get_or_insert_with(|| propagator(omega, delta, kappa, h))
            } else {
                propagator(omega, delta, self.kappa, h)
            };
            let next = apply(&u, self.psi);
            if norm_sqr(&next) > self.threshold {
                self.psi = next;
                if to_end {
                    self.next_segment();
                } else {
                    self.offset += h;
                }
                continue;
            }
            let tau = self.jump_time(omega, delta, h);
            self.psi = apply(&propagator(omega, delta, self.kappa, tau), self.psi);
            if to_end && tau >= h {
                self.next_segment();
            } else {
                self.offset += tau;
            }
            if self.rng.random::<f64>() < self.radiative {
                emissions.push(self.time());
                self.psi = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
            } else {
                self.psi = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
            }
            self.threshold = open_unit(&mut self.rng);
        }
    }

    /// Time within `(0, h]` at which the squared norm reaches the threshold,
    /// by Newton iteration safeguarded with bisection.
    fn jump_time(&self, omega: Complex64, delta: f64, h: f64) -> f64 {
        let n0 = norm_sqr(&self.psi);
        let nh = norm_sqr(&apply(&propagator(omega, delta, self.kappa, h), self.psi));
        let (mut lo, mut hi) = (0.0, h);
        let mut tau = if n0 > nh {
            h * (n0 - self.threshold) / (n0 - nh)
        } else {
            0.5 * h
        };
        tau = tau.clamp(0.0, h);
        for _ in 0..100 {
            let psi = apply(&propagator(omega, delta, self.kappa, tau), self.psi);
            let f = norm_sqr(&psi) - self.threshold;
            if f > 0.0 {
                lo = tau;
            } else {
                hi = tau;
            }
            if f.abs() <= 1e-13 * self.threshold || hi - lo <= 1e-16 {
                break;
            }
            let slope = -self.kappa * psi[1].norm_sqr();
            let newton = tau - f / slope;
            tau = if slope < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        tau.clamp(lo, hi)
    }
}

fn max_chunk(params: &EmitterParams) -> f64 {
    20.0 / params.gamma
}

fn diffusion_start(params: &EmitterParams, rng: &mut ChaCha8Rng) -> Option<f64> {
    params.diffusion.map(|d| {
        let n: f64 = rng.sample(rand_distr::StandardNormal);
        d.rms_detuning * n
    })
}

/// Emission times of a single trajectory started in `|g⟩` over the drive
/// duration.
pub fn mc_trajectory(params: &EmitterParams, drive: &DriveWaveform, seed: u64) -> Result<Vec<f64>> {
    params.validate()?;
    let sched = Schedule::new(drive, None, max_chunk(params))?;
    let mut rng = stream_rng(seed, 0);
    let start = diffusion_start(params, &mut rng);
    let mut w = Walker::new(params, &sched, drive.carrier_detuning(), rng, 0.0, start);
    let mut out = Vec::new();
    w.advance_to(drive.duration(), &mut out);
    Ok(out)
}

/// Trajectory-averaged excited population at the times in `grid`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsemblePopulation {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
}

/// Average the normalized excited population over `n_trajectories`
/// trajectories, each started in `|g⟩` at `t = 0`; trajectory `i` uses
/// random stream `i` of `seed`.
pub fn mc_ensemble_population(
    params: &EmitterParams,
    drive: &DriveWaveform,
    grid: &[f64],
    n_trajectories: usize,
    seed: u64,
    execution: Execution,
) -> Result<EnsemblePopulation> {
    params.validate()?;
    ensure(n_trajectories >= 2, "n_trajectories", || {
        "need at least two".into()
    })?;
    if grid.is_empty() {
        return Err(Error::Empty("time grid"));
    }
    ensure(
        grid.windows(2).all(|w| w[1] > w[0]) && grid[0] >= 0.0,
        "grid",
        || "times must be non-negative and strictly increasing".into(),
    )?;
    let sched = Schedule::new(drive, None, max_chunk(params))?;
    let runs = execution.map(n_trajectories, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let start = diffusion_start(params, &mut rng);
        let mut w = Walker::new(params, &sched, drive.carrier_detuning(), rng, 0.0, start);
        let mut sink = Vec::new();
        grid.iter()
            .map(|&t| {
                w.advance_to(t, &mut sink);
                w.population()
            })
            .collect::<Vec<f64>>()
    });
    let n = n_trajectories as f64;
    let mut sum = vec![0.0; grid.len()];
    let mut sum_sq = vec![0.0; grid.len()];
    for run in &runs {
        for (k, p) in run.iter().enumerate() {
            sum[k] += p;
            sum_sq[k] += p * p;
        }
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std_error = sum_sq
        .iter()
        .zip(&mean)
        .map(|(sq, m)| ((sq / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt())
        .collect();
    Ok(EnsemblePopulation { mean, std_error })
}

/// Continuous emission record over `[0, duration)` for `drive` repeated with
/// `period` (the drive duration if `None`).
///
/// The record is split into blocks of `config.block_duration`, each started in
/// `|g⟩` with its own random stream, so the result does not depend on the
/// thread count. With spectral diffusion, the detuning at block starts follows
/// one sequential Ornstein-Uhlenbeck path and evolves inside each block in
/// steps of a twentieth of the correlation time.
pub fn mc_stream(
    params: &EmitterParams,
    drive: &DriveWaveform,
    period: Option<f64>,
    duration: f64,
    seed: u64,
    config: &McConfig,
) -> Result<Vec<f64>> {
    params.validate()?;
    ensure(duration > 0.0 && duration.is_finite(), "duration", || {
        "must be positive".into()
    })?;
    ensure(config.block_duration > 0.0, "block_duration", || {
        "must be positive".into()
    })?;
    let period = Some(period.unwrap_or(drive.duration()));
    let sched = Schedule::new(drive, period, max_chunk(params))?;
    let n_blocks = (duration / config.block_duration).ceil() as usize;
    let block_starts: Vec<Option<f64>> = match params.diffusion {
        Some(d) => {
            let mut rng = stream_rng(seed, u64::MAX);
            let mut v = diffusion_start(params, &mut rng).unwrap_or(0.0);
            (0..n_blocks)
                .map(|_| {
                    let here = v;
                    v = ou_step(&d, v, config.block_duration, &mut rng);
                    Some(here)
                })
                .collect()
        }
        None => vec![None; n_blocks],
    };
    let blocks = config.execution.map(n_blocks, |b| {
        let start = b as f64 * config.block_duration;
        let end = ((b + 1) as f64 * config.block_duration).min(duration);
        let rng = stream_rng(seed, b as u64);
        let mut w = Walker::new(
            params,
            &sched,
            drive.carrier_detuning(),
            rng,
            start,
            block_starts[b],
        );
        let mut out = Vec::new();
        w.advance_to(end, &mut out);
        out
    });
    Ok(blocks.concat())
}

/// Quantity to match when calibrating a pulse amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseTarget {
    /// Time-integrated elastic share of the scattered light.
    CoherentFraction(f64),
    /// Mean emitted photons per pulse.
    EmissionsPerPulse(f64),
}

/// Peak Rabi frequency of a pulse train that meets `target` in the periodic
/// steady state. Searches upward from a weak drive and returns the first
/// crossing, so multi-Rabi-cycle solutions are never selected.
pub fn calibrate_peak_rabi(
    params: &EmitterParams,
    spec: &ModulationSpec,
    sample_rate: f64,
    target: PulseTarget,
) -> Result<f64> {
    spec.validate()?;
    if spec.kind != ModulationKind::PulseTrain {
        return Err(Error::param("kind", "calibration expects a pulse train"));
    }
    let period = 1.0 / spec.rep_rate;
    let evaluate = |rabi: f64| -> Result<f64> {
        let drive = spec.synthesize(rabi, period, sample_rate)?;
        let r = periodic_steady_state(params, &drive, period)?;
        Ok(match target {
            // Decreasing in rabi; negate so both targets increase.
            PulseTarget::CoherentFraction(_) => -r.coherent_fraction,
            PulseTarget::EmissionsPerPulse(_) => r.emissions_per_period,
        })
    };
    let goal = match target {
        PulseTarget::CoherentFraction(f) => {
            ensure(f > 0.0 && f < 1.0, "target", || {
                "coherent fraction must be in (0,1)".into()
            })?;
            -f
        }
        PulseTarget::EmissionsPerPulse(n) => {
            ensure(n > 0.0, "target", || {
                "emissions per pulse must be positive".into()
            })?;
            n
        }
    };
    let mut lo = 1e-4 * params.gamma;
    if evaluate(lo)? >= goal {
        return Err(Error::param(
            "target",
            "reached already at negligible drive",
        ));
    }
    let mut hi = lo;
    loop {
        hi *= 1.5;
        if hi > 100.0 * params.gamma {
            return Err(Error::param(
                "target",
                "not reachable below 100 Γ peak Rabi frequency",
            ));
        }
        if evaluate(hi)? >= goal {
            break;
        }
        lo = hi;
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if evaluate(mid)? >= goal {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi / lo - 1.0 < 1e-10 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}
