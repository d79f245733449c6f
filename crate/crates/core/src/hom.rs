//! Two-photon interference in an unbalanced Mach-Zehnder interferometer.
//!
//! Photons from one emitter are split at BS1, one arm is delayed by one pulse
//! period, and consecutive photons meet at BS2. Coefficients are intensity
//! transmissions and reflections.

use crate::correlation::{correlate_g2, CoincidenceHistogram};
use crate::emitter::{CorrelationFunction, CorrelationKind};
use crate::error::{ensure, Error, Result};
use crate::exec::{stream_rng, Execution};
use crate::photon::{apply_detection, DetectionChain, PhotonRecord, PS_PER_S};
use rand::Rng;

/// Bins whose normalized g² falls below this level are masked in
/// [`normalized_difference`].
pub const MASK_LEVEL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferometerConfig {
    pub t1: f64,
    pub r1: f64,
    pub t2: f64,
    pub r2: f64,
    /// Arm delay, s.
    pub delay: f64,
    pub pol_overlap_parallel: f64,
    pub pol_overlap_orthogonal: f64,
    /// Squared temporal-mode overlap of the interfering wavepackets.
    pub mode_overlap: f64,
    /// Largest arrival-time difference at BS2 for two photons to interfere,
    /// s. Defaults to half the delay.
    pub overlap_window: Option<f64>,
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        let ratio = 1.3;
        InterferometerConfig {
            t1: ratio / (1.0 + ratio),
            r1: 1.0 / (1.0 + ratio),
            t2: 0.41,
            r2: 0.59,
            delay: 3.33e-9,
            pol_overlap_parallel: 0.97,
            pol_overlap_orthogonal: 0.05,
            mode_overlap: 1.0,
            overlap_window: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarization {
    Parallel,
    Orthogonal,
}

impl InterferometerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t1", self.t1),
            ("r1", self.r1),
            ("t2", self.t2),
            ("r2", self.r2),
            ("pol_overlap_parallel", self.pol_overlap_parallel),
            ("pol_overlap_orthogonal", self.pol_overlap_orthogonal),
            ("mode_overlap", self.mode_overlap),
        ] {
            ensure((0.0..=1.0).contains(&v), name, || {
                format!("must be in [0,1], got {v}")
            })?;
        }
        ensure((self.t1 + self.r1 - 1.0).abs() < 1e-9, "r1", || {
            "t1 + r1 must equal 1".into()
        })?;
        ensure((self.t2 + self.r2 - 1.0).abs() < 1e-9, "r2", || {
            "t2 + r2 must equal 1".into()
        })?;
        ensure(self.delay > 0.0, "delay", || "must be positive".into())?;
        if let Some(w) = self.overlap_window {
            ensure(w >= 0.0 && w < self.delay, "overlap_window", || {
                "must be non-negative and shorter than the delay".into()
            })?;
        }
        Ok(())
    }

    /// `η = pol_overlap × mode_overlap`.
    pub fn eta(&self, polarization: Polarization) -> f64 {
        let pol = match polarization {
            Polarization::Parallel => self.pol_overlap_parallel,
            Polarization::Orthogonal => self.pol_overlap_orthogonal,
        };
        pol * self.mode_overlap
    }

    pub fn overlap_window(&self) -> f64 {
        self.overlap_window.unwrap_or(0.5 * self.delay)
    }
}

/// `(t1² + r1²) g²(τ) + 2 r1 t1 (1 − η + η g²(τ))` pointwise.
pub fn hom_model(
    g2: &CorrelationFunction,
    t1: f64,
    r1: f64,
    eta: f64,
) -> Result<CorrelationFunction> {
    ensure((0.0..=1.0).contains(&eta), "eta", || {
        format!("must be in [0,1], got {eta}")
    })?;
    ensure(
        (0.0..=1.0).contains(&t1) && (0.0..=1.0).contains(&r1),
        "t1",
        || "coefficients must be in [0,1]".into(),
    )?;
    ensure((t1 + r1 - 1.0).abs() < 1e-9, "r1", || {
        "t1 + r1 must equal 1".into()
    })?;
    if g2.kind() != CorrelationKind::SecondOrder {
        return Err(Error::param("g2", "expects a second-order correlation"));
    }
    let a = t1 * t1 + r1 * r1;
    let b = 2.0 * r1 * t1;
    let values = g2
        .values()
        .iter()
        .map(|g| a * g.re + b * (1.0 - eta + eta * g.re))
        .collect();
    CorrelationFunction::second_order(g2.tau().to_vec(), values, g2.decay_rate())
}

/// Zero-delay to far-side-peak area ratio of a pulsed single-photon source
/// without multi-photon pulses, for arbitrary beamsplitters:
/// `T₁R₁(T₂² + R₂² − 2ηT₂R₂) / ((T₁T₂ + R₁R₂)(T₁R₂ + R₁T₂))`.
pub fn pulsed_central_ratio(t1: f64, r1: f64, t2: f64, r2: f64, eta: f64) -> f64 {
    let d = (t1 * t2 + r1 * r2) * (t1 * r2 + r1 * t2);
    t1 * r1 * (t2 * t2 + r2 * r2 - 2.0 * eta * t2 * r2) / d
}

/// Output of a simulated interferometer or HBT measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceRun {
    pub histogram: CoincidenceHistogram,
    pub detector_c: Vec<PhotonRecord>,
    pub detector_d: Vec<PhotonRecord>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Arm {
    Short,
    Long,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Port {
    C,
    D,
}

fn histogram_or_empty(
    c: &[PhotonRecord],
    d: &[PhotonRecord],
    bin_width: f64,
    window: f64,
    execution: Execution,
) -> Result<CoincidenceHistogram> {
    if c.is_empty() || d.is_empty() {
        let w = (bin_width * PS_PER_S).round().max(1.0) as u64;
        let half = ((window * PS_PER_S) / w as f64).floor() as usize;
        return CoincidenceHistogram::from_counts(w, vec![0; 2 * half + 1]);
    }
    correlate_g2(c, d, bin_width, window, execution)
}

fn detect_pair(
    c: &[f64],
    d: &[f64],
    detectors: &DetectionChain,
    duration: f64,
    window: f64,
    seed: u64,
    execution: Execution,
) -> Result<CoincidenceRun> {
    let detector_c = apply_detection(c, detectors, duration, 0, seed)?;
    let detector_d = apply_detection(d, detectors, duration, 1, seed)?;
    let histogram = histogram_or_empty(
        &detector_c,
        &detector_d,
        detectors.bin_width,
        window,
        execution,
    )?;
    Ok(CoincidenceRun {
        histogram,
        detector_c,
        detector_d,
    })
}

fn check_run(photons: &[PhotonRecord], duration: f64, window: f64, bin_width: f64) -> Result<()> {
    ensure(window >= bin_width, "window", || {
        "must cover at least one bin".into()
    })?;
    if !(duration > 2.0 * window) {
        return Err(Error::StreamTooShort(format!(
            "record of {duration:.3e} s cannot fill a ±{window:.3e} s histogram"
        )));
    }
    if let Some(i) = photons
        .windows(2)
        .position(|w| w[1].timestamp_ps < w[0].timestamp_ps)
    {
        return Err(Error::param(
            "records",
            format!("not sorted at index {}", i + 1),
        ));
    }
    Ok(())
}

/// Hanbury Brown-Twiss reference: photons split at a beamsplitter of
/// transmission `split` onto detectors C and D.
pub fn simulate_hbt(
    photons: &[PhotonRecord],
    split: f64,
    detectors: &DetectionChain,
    window: f64,
    duration: f64,
    seed: u64,
    execution: Execution,
) -> Result<CoincidenceRun> {
    ensure((0.0..=1.0).contains(&split), "split", || {
        "must be in [0,1]".into()
    })?;
    detectors.validate()?;
    check_run(photons, duration, window, detectors.bin_width)?;
    let mut rng = stream_rng(seed, 0);
    let (mut c, mut d) = (Vec::new(), Vec::new());
    for p in photons {
        if rng.random::<f64>() < split {
            c.push(p.time());
        } else {
            d.push(p.time());
        }
    }
    detect_pair(&c, &d, detectors, duration, window, seed, execution)
}

/// Monte Carlo of the interferometer for emitted photons `photons`
/// (timestamps in ps, channel ignored) recorded over `duration` seconds.
///
/// Photons take the short arm with probability `t1`, otherwise arrive at BS2
/// `delay` later. Consecutive arrivals from opposite arms within the overlap
/// window form a pair; with probability `η` the pair is indistinguishable and
/// leaves through separate ports with probability `(t2 − r2)²`, otherwise
/// both photons are routed independently. Unpaired photons are always routed
/// independently: short-arm photons reach C with probability `t2`, long-arm
/// photons reach D with probability `t2`. Each output then passes through
/// `detectors`, and C-D coincidences are histogrammed within ±`window`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_hom(
    photons: &[PhotonRecord],
    config: &InterferometerConfig,
    polarization: Polarization,
    detectors: &DetectionChain,
    window: f64,
    duration: f64,
    seed: u64,
    execution: Execution,
) -> Result<CoincidenceRun> {
    config.validate()?;
    detectors.validate()?;
    check_run(photons, duration, window, detectors.bin_width)?;
    if duration < 10.0 * config.delay {
        return Err(Error::StreamTooShort(format!(
            "record of {duration:.3e} s is not much longer than the {:.3e} s delay",
            config.delay
        )));
    }
    let eta = config.eta(polarization);
    let delay_ps = (config.delay * PS_PER_S).round() as u64;
    let overlap_ps = (config.overlap_window() * PS_PER_S).round() as u64;
    let mut rng = stream_rng(seed, 0);

    let (mut short, mut long) = (Vec::new(), Vec::new());
    for p in photons {
        if rng.random::<f64>() < config.t1 {
            short.push(p.timestamp_ps);
        } else {
            long.push(p.timestamp_ps + delay_ps);
        }
    }
    let mut arrivals = Vec::with_capacity(photons.len());
    let (mut i, mut j) = (0, 0);
    while i < short.len() || j < long.len() {
        if j == long.len() || (i < short.len() && short[i] <= long[j]) {
            arrivals.push((short[i], Arm::Short));
            i += 1;
        } else {
            arrivals.push((long[j], Arm::Long));
            j += 1;
        }
    }

    let bunch_free = (config.t2 - config.r2).powi(2);
    let route = |arm: Arm, rng: &mut rand_chacha::ChaCha8Rng| {
        let transmitted = rng.random::<f64>() < config.t2;
        match (arm, transmitted) {
            (Arm::Short, true) | (Arm::Long, false) => Port::C,
            _ => Port::D,
        }
    };
    let (mut c, mut d) = (Vec::new(), Vec::new());
    let mut push = |port: Port, t: u64| {
        let s = t as f64 / PS_PER_S;
        match port {
            Port::C => c.push(s),
            Port::D => d.push(s),
        }
    };
    let mut k = 0;
    while k < arrivals.len() {
        let (t, arm) = arrivals[k];
        let paired = k + 1 < arrivals.len()
            && arrivals[k + 1].1 != arm
            && arrivals[k + 1].0 - t <= overlap_ps;
        if !paired {
            push(route(arm, &mut rng), t);
            k += 1;
            continue;
        }
        let (t2, arm2) = arrivals[k + 1];
        if rng.random::<f64>() < eta {
            let u = rng.random::<f64>();
            if u < bunch_free {
                let swap = rng.random::<bool>();
                push(if swap { Port::D } else { Port::C }, t);
                push(if swap { Port::C } else { Port::D }, t2);
            } else {
                let port = if rng.random::<bool>() {
                    Port::C
                } else {
                    Port::D
                };
                push(port, t);
                push(port, t2);
            }
        } else {
            push(route(arm, &mut rng), t);
            push(route(arm2, &mut rng), t2);
        }
        k += 2;
    }
    c.sort_by(f64::total_cmp);
    d.sort_by(f64::total_cmp);
    detect_pair(
        &c,
        &d,
        detectors,
        duration,
        window,
        seed.wrapping_add(1),
        execution,
    )
}

/// Value with a one-sigma uncertainty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub sigma: f64,
}

impl Measured {
    pub fn new(value: f64, sigma: f64) -> Self {
        Measured { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Measured { value, sigma: 0.0 }
    }
}

/// `g_HOM/g² − 1` per bin; `None` where the normalized g² is below
/// [`MASK_LEVEL`].
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedDifference {
    pub tau: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub sigma: Vec<f64>,
    bin_width: f64,
}

impl NormalizedDifference {
    /// Integral over `[lo, hi)` (s), with masked bins contributing zero and
    /// partially covered bins weighted by their overlap.
    pub fn area(&self, lo: f64, hi: f64) -> Measured {
        let w = self.bin_width;
        let mut value = 0.0;
        let mut var = 0.0;
        for (i, &c) in self.tau.iter().enumerate() {
            let overlap = (hi.min(c + 0.5 * w) - lo.max(c - 0.5 * w)).max(0.0);
            if overlap == 0.0 {
                continue;
            }
            if let Some(v) = self.values[i] {
                value += v * overlap;
                var += (self.sigma[i] * overlap).powi(2);
            }
        }
        Measured::new(value, var.sqrt())
    }

    /// Area over one period centred on zero delay.
    pub fn central_area(&self, period: f64) -> Measured {
        self.area(-0.5 * period, 0.5 * period)
    }
}

pub fn normalized_difference(
    g_hom: &CoincidenceHistogram,
    g2: &CoincidenceHistogram,
) -> Result<NormalizedDifference> {
    if !g_hom.same_grid(g2) {
        return Err(Error::GridMismatch(format!(
            "{} bins of {} ps vs {} bins of {} ps",
            g_hom.len(),
            g_hom.bin_width_ps(),
            g2.len(),
            g2.bin_width_ps()
        )));
    }
    let h = g_hom.normalized();
    let g = g2.normalized();
    let (hc, gc) = (g_hom.counts(), g2.counts());
    let mut values = Vec::with_capacity(h.len());
    let mut sigma = Vec::with_capacity(h.len());
    for i in 0..h.len() {
        if g[i] < MASK_LEVEL || gc[i] == 0 {
            values.push(None);
            sigma.push(0.0);
            continue;
        }
        let r = h[i] / g[i];
        let rel = (1.0 / gc[i] as f64 + if hc[i] > 0 { 1.0 / hc[i] as f64 } else { 0.0 }).sqrt();
        values.push(Some(r - 1.0));
        sigma.push(r * rel);
    }
    Ok(NormalizedDifference {
        tau: g2.centers(),
        values,
        sigma,
        bin_width: g2.bin_width(),
    })
}

/// Raw interference contrast `1 − A_pa/A_or` with propagated uncertainty.
pub fn contrast(a_parallel: Measured, a_orthogonal: Measured) -> Result<Measured> {
    if !(a_orthogonal.value > 0.0) {
        return Err(Error::param("a_orthogonal", "area must be positive"));
    }
    let q = a_parallel.value / a_orthogonal.value;
    let sigma =
        (a_parallel.sigma / a_orthogonal.value).hypot(q * a_orthogonal.sigma / a_orthogonal.value);
    Ok(Measured::new(1.0 - q, sigma))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrectionMode {
    PolarizationOnly,
    /// Polarization plus first-beamsplitter imbalance.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectedContrast {
    pub value: f64,
    pub sigma: f64,
    /// `1/p_pa`.
    pub polarization_factor: f64,
    /// `(t1² + r1²)/(2 t1 r1)` in full mode, otherwise 1.
    pub beamsplitter_factor: f64,
}

/// Correct a raw contrast for imperfect polarization and, in full mode, for
/// the BS1 imbalance. Interference effects beyond the arm delay are not
/// modelled, so the full correction is approximate.
#[allow(clippy::too_many_arguments)]
pub fn corrected_contrast(
    raw: Measured,
    p_pa: f64,
    p_or: f64,
    t1: f64,
    r1: f64,
    t2: f64,
    r2: f64,
    mode: CorrectionMode,
) -> Result<CorrectedContrast> {
    for (name, v) in [
        ("p_pa", p_pa),
        ("p_or", p_or),
        ("t1", t1),
        ("r1", r1),
        ("t2", t2),
        ("r2", r2),
    ] {
        ensure((0.0..=1.0).contains(&v), name, || {
            format!("must be in [0,1], got {v}")
        })?;
    }
    ensure((t1 + r1 - 1.0).abs() < 1e-9, "r1", || {
        "t1 + r1 must equal 1".into()
    })?;
    ensure((t2 + r2 - 1.0).abs() < 1e-9, "r2", || {
        "t2 + r2 must equal 1".into()
    })?;
    if !(p_pa > p_or) {
        return Err(Error::param(
            "p_pa",
            "must exceed p_or for the polarization settings to differ",
        ));
    }
    let polarization_factor = 1.0 / p_pa;
    let beamsplitter_factor = match mode {
        CorrectionMode::PolarizationOnly => 1.0,
        CorrectionMode::Full => {
            ensure(t1 > 0.0 && r1 > 0.0, "t1", || {
                "both arms must be used".into()
            })?;
            (t1 * t1 + r1 * r1) / (2.0 * t1 * r1)
        }
    };
    Ok(CorrectedContrast {
        value: raw.value / p_pa * beamsplitter_factor,
        sigma: raw.sigma / p_pa * beamsplitter_factor,
        polarization_factor,
        beamsplitter_factor,
    })
}
