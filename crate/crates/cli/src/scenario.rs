//! Scenario files: TOML with unit-suffixed keys, parsed strictly.
//!
//! Every section is a table whose keys carry their unit (`lifetime_ps`,
//! `rep_rate_mhz`, ...). Unknown keys, missing sections and sections that no
//! requested output uses are all rejected.

use crate::error::{CliError, Result};
use heitler_core::emitter::{EmitterParams, SpectralDiffusion};
use heitler_core::heterodyne::{HeterodyneConfig, PhaseNoiseModel, PhaseTone, Window};
use heitler_core::hom::InterferometerConfig;
use heitler_core::photon::{DetectionChain, McConfig};
use heitler_core::waveform::{ModulationKind, ModulationSpec, PulseShape};
use heitler_core::Execution;
use serde::Deserialize;
use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    /// Bloch excited-state population under the drive.
    Population,
    /// CW resonance-fluorescence spectrum from g1.
    EmissionSpectrum,
    /// CW intensity correlation from the regression theorem.
    G2Qrt,
    /// Laser and weak-drive scattered-field spectra.
    HeitlerSpectrum,
    /// Monte Carlo HBT coincidence histogram.
    G2Histogram,
    /// Detected HBT time tags as a PTT1 file.
    TimeTags,
    /// HOM histograms, normalized differences and contrast.
    Hom,
    /// Heterodyne beat spectrum and Gaussian line fit.
    BeatSpectrum,
}

impl Output {
    fn needs(self) -> &'static [Section] {
        use Section::*;
        match self {
            Output::Population
            | Output::EmissionSpectrum
            | Output::G2Qrt
            | Output::HeitlerSpectrum => &[Emitter, Waveform],
            Output::G2Histogram | Output::TimeTags => &[Emitter, Waveform, Stream, Detection],
            Output::Hom => &[Emitter, Waveform, Stream, Detection, Interferometer],
            Output::BeatSpectrum => &[Heterodyne],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Emitter,
    Waveform,
    Stream,
    Detection,
    Interferometer,
    Heterodyne,
}

impl Section {
    fn key(self) -> &'static str {
        match self {
            Section::Emitter => "emitter",
            Section::Waveform => "waveform",
            Section::Stream => "stream",
            Section::Detection => "detection",
            Section::Interferometer => "interferometer",
            Section::Heterodyne => "heterodyne",
        }
    }
}

/// Random-number consumers, in the order they take seeds from the list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SeedStage {
    Trajectories,
    Hbt,
    Hom,
    Heterodyne,
}

impl SeedStage {
    pub fn name(self) -> &'static str {
        match self {
            SeedStage::Trajectories => "trajectories",
            SeedStage::Hbt => "hbt",
            SeedStage::Hom => "hom",
            SeedStage::Heterodyne => "heterodyne",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    seeds: Vec<u64>,
    outputs: Vec<Output>,
    emitter: Option<RawEmitter>,
    waveform: Option<RawWaveform>,
    stream: Option<RawStream>,
    detection: Option<RawDetection>,
    interferometer: Option<RawInterferometer>,
    heterodyne: Option<RawHeterodyne>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEmitter {
    lifetime_ps: f64,
    #[serde(default)]
    pure_dephasing_per_ns: f64,
    #[serde(default)]
    detuning_mhz: f64,
    diffusion_rms_mhz: Option<f64>,
    diffusion_correlation_us: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawKind {
    Cw,
    SineAm,
    CarrierSuppressed,
    PulseTrain,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWaveform {
    kind: RawKind,
    mod_freq_mhz: Option<f64>,
    depth: Option<f64>,
    pulse_width_ps: Option<f64>,
    rep_rate_mhz: Option<f64>,
    rise_time_ps: Option<f64>,
    #[serde(default = "default_sample_rate_ghz")]
    sample_rate_ghz: f64,
    duration_ns: Option<f64>,
    saturation: Option<f64>,
    rabi_over_gamma: Option<f64>,
    coherent_fraction: Option<f64>,
    emissions_per_pulse: Option<f64>,
}

fn default_sample_rate_ghz() -> f64 {
    20.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStream {
    duration_ms: f64,
    #[serde(default = "default_block_us")]
    block_duration_us: f64,
}

fn default_block_us() -> f64 {
    100.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetection {
    efficiency: f64,
    background_cps: f64,
    jitter_fwhm_ps: f64,
    bin_width_ps: f64,
    sideband_loss: f64,
    window_ns: f64,
    #[serde(default = "half")]
    hbt_split: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInterferometer {
    t1: f64,
    t2: f64,
    delay_ns: f64,
    pol_overlap_parallel: f64,
    pol_overlap_orthogonal: f64,
    #[serde(default = "one")]
    mode_overlap: f64,
    overlap_window_ns: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawWindow {
    Rectangular,
    Hann,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTone {
    freq_hz: f64,
    amplitude_rad: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeterodyne {
    delta_nu_khz: f64,
    lo_amplitude: f64,
    signal_amplitude: f64,
    sample_rate_mhz: f64,
    acquisition_time_s: f64,
    aom1_mhz: f64,
    aom2_mhz: f64,
    #[serde(default = "default_chunk")]
    chunk_size: usize,
    #[serde(default = "default_averages")]
    averages: usize,
    window: RawWindow,
    random_walk_diffusion_rad2_per_s: f64,
    #[serde(default)]
    common_mode_diffusion_rad2_per_s: f64,
    #[serde(default)]
    tones: Vec<RawTone>,
}

fn default_chunk() -> usize {
    heitler_core::heterodyne::DEFAULT_CHUNK
}

fn default_averages() -> usize {
    1
}

/// How the drive amplitude is fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Amplitude {
    /// Saturation parameter at the synthesis amplitude.
    Saturation(f64),
    /// Synthesis amplitude in units of Γ.
    RabiOverGamma(f64),
    /// Pulse trains: calibrate to this time-integrated coherent fraction.
    CoherentFraction(f64),
    /// Pulse trains: calibrate to this mean emission per pulse.
    EmissionsPerPulse(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveformPlan {
    pub spec: ModulationSpec,
    pub sample_rate: f64,
    /// Synthesis length for deterministic outputs, s.
    pub duration: Option<f64>,
    pub amplitude: Amplitude,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StreamPlan {
    pub duration: f64,
    pub mc: McConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionPlan {
    pub chain: DetectionChain,
    pub window: f64,
    pub hbt_split: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeterodynePlan {
    pub config: HeterodyneConfig,
    pub noise: PhaseNoiseModel,
    pub window: Window,
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub outputs: BTreeSet<Output>,
    pub seeds: Vec<(SeedStage, u64)>,
    pub emitter: Option<EmitterParams>,
    pub waveform: Option<WaveformPlan>,
    pub stream: Option<StreamPlan>,
    pub detection: Option<DetectionPlan>,
    pub interferometer: Option<InterferometerConfig>,
    pub heterodyne: Option<HeterodynePlan>,
}

impl Scenario {
    pub fn seed(&self, stage: SeedStage) -> u64 {
        self.seeds
            .iter()
            .find(|(s, _)| *s == stage)
            .map(|(_, v)| *v)
            .expect("seed presence checked at validation")
    }

    pub fn wants(&self, output: Output) -> bool {
        self.outputs.contains(&output)
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn core_check(section: &str, r: heitler_core::Result<()>) -> Result<()> {
    r.map_err(|e| invalid(format!("[{section}] {e}")))
}

fn finite(section: &str, key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("[{section}] `{key}` must be finite")))
    }
}

pub fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
    build(raw)
}

fn build(raw: RawScenario) -> Result<Scenario> {
    if raw.name.is_empty()
        || !raw
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        return Err(invalid(
            "`name` must be non-empty and use only [A-Za-z0-9_-]",
        ));
    }
    if raw.outputs.is_empty() {
        return Err(invalid("`outputs` must list at least one artifact"));
    }
    let outputs: BTreeSet<Output> = raw.outputs.iter().copied().collect();
    if outputs.len() != raw.outputs.len() {
        return Err(invalid("`outputs` lists an artifact twice"));
    }

    let needed: BTreeSet<Section> = outputs
        .iter()
        .flat_map(|o| o.needs().iter().copied())
        .collect();
    let present = [
        (Section::Emitter, raw.emitter.is_some()),
        (Section::Waveform, raw.waveform.is_some()),
        (Section::Stream, raw.stream.is_some()),
        (Section::Detection, raw.detection.is_some()),
        (Section::Interferometer, raw.interferometer.is_some()),
        (Section::Heterodyne, raw.heterodyne.is_some()),
    ];
    for (section, is_present) in present {
        match (needed.contains(&section), is_present) {
            (true, false) => {
                return Err(invalid(format!(
                    "missing section [{}] required by the requested outputs",
                    section.key()
                )))
            }
            (false, true) => {
                return Err(invalid(format!(
                    "section [{}] is not used by any requested output",
                    section.key()
                )))
            }
            _ => {}
        }
    }

    let mut stages = BTreeSet::new();
    for o in &outputs {
        match o {
            Output::G2Histogram | Output::TimeTags => {
                stages.insert(SeedStage::Trajectories);
                stages.insert(SeedStage::Hbt);
            }
            Output::Hom => {
                stages.insert(SeedStage::Trajectories);
                stages.insert(SeedStage::Hbt);
                stages.insert(SeedStage::Hom);
            }
            Output::BeatSpectrum => {
                stages.insert(SeedStage::Heterodyne);
            }
            _ => {}
        }
    }
    if raw.seeds.len() != stages.len() {
        let names: Vec<&str> = stages.iter().map(|s| s.name()).collect();
        return Err(invalid(format!(
            "`seeds` must list exactly {} seed(s), one per stochastic stage in order [{}]; found {}",
            stages.len(),
            names.join(", "),
            raw.seeds.len()
        )));
    }
    let seeds = stages.into_iter().zip(raw.seeds).collect();

    let emitter = raw.emitter.map(build_emitter).transpose()?;
    let waveform = raw.waveform.map(build_waveform).transpose()?;
    if let Some(w) = &waveform {
        let cw = w.spec.kind == ModulationKind::Cw;
        for (o, needs_cw) in [
            (Output::EmissionSpectrum, true),
            (Output::G2Qrt, true),
            (Output::HeitlerSpectrum, false),
        ] {
            if outputs.contains(&o) && cw != needs_cw {
                let want = if needs_cw { "a cw" } else { "a modulated" };
                return Err(invalid(format!(
                    "[waveform] output `{o:?}` needs {want} waveform"
                )));
            }
        }
        let needs_duration =
            outputs.contains(&Output::Population) || outputs.contains(&Output::HeitlerSpectrum);
        if needs_duration && w.duration.is_none() {
            return Err(invalid(
                "[waveform] `duration_ns` is required for population and heitler_spectrum outputs",
            ));
        }
    }
    let stream = raw.stream.map(build_stream).transpose()?;
    let detection = raw.detection.map(build_detection).transpose()?;
    let interferometer = raw.interferometer.map(build_interferometer).transpose()?;
    if interferometer.is_some()
        && waveform.as_ref().map(|w| w.spec.kind) != Some(ModulationKind::PulseTrain)
    {
        return Err(invalid(
            "[waveform] the hom output needs a pulse_train waveform",
        ));
    }
    let heterodyne = raw.heterodyne.map(build_heterodyne).transpose()?;

    Ok(Scenario {
        name: raw.name,
        outputs,
        seeds,
        emitter,
        waveform,
        stream,
        detection,
        interferometer,
        heterodyne,
    })
}

fn build_emitter(r: RawEmitter) -> Result<EmitterParams> {
    let s = "emitter";
    let t1 = finite(s, "lifetime_ps", r.lifetime_ps)? * 1e-12;
    let mut p = EmitterParams::from_lifetime(t1).map_err(|e| invalid(format!("[{s}] {e}")))?;
    p = p
        .with_pure_dephasing(finite(s, "pure_dephasing_per_ns", r.pure_dephasing_per_ns)? * 1e9)
        .map_err(|e| invalid(format!("[{s}] {e}")))?
        .with_detuning(TAU * finite(s, "detuning_mhz", r.detuning_mhz)? * 1e6)
        .map_err(|e| invalid(format!("[{s}] {e}")))?;
    match (r.diffusion_rms_mhz, r.diffusion_correlation_us) {
        (None, None) => {}
        (Some(rms), Some(tc)) => {
            let d =
                SpectralDiffusion::new(TAU * finite(s, "diffusion_rms_mhz", rms)? * 1e6, tc * 1e-6)
                    .map_err(|e| invalid(format!("[{s}] {e}")))?;
            p = p
                .with_diffusion(d)
                .map_err(|e| invalid(format!("[{s}] {e}")))?;
        }
        _ => {
            return Err(invalid(format!(
                "[{s}] `diffusion_rms_mhz` and `diffusion_correlation_us` must be given together"
            )))
        }
    }
    core_check(s, p.validate())?;
    Ok(p)
}

fn forbid(section: &str, kind: &str, keys: &[(&str, bool)]) -> Result<()> {
    for (key, present) in keys {
        if *present {
            return Err(invalid(format!(
                "[{section}] `{key}` does not apply to kind = \"{kind}\""
            )));
        }
    }
    Ok(())
}

fn require(section: &str, kind: &str, key: &str, v: Option<f64>) -> Result<f64> {
    let v = v.ok_or_else(|| invalid(format!("[{section}] kind = \"{kind}\" requires `{key}`")))?;
    finite(section, key, v)
}

fn build_waveform(r: RawWaveform) -> Result<WaveformPlan> {
    let s = "waveform";
    let spec = match r.kind {
        RawKind::Cw => {
            forbid(
                s,
                "cw",
                &[
                    ("mod_freq_mhz", r.mod_freq_mhz.is_some()),
                    ("depth", r.depth.is_some()),
                    ("pulse_width_ps", r.pulse_width_ps.is_some()),
                    ("rep_rate_mhz", r.rep_rate_mhz.is_some()),
                    ("rise_time_ps", r.rise_time_ps.is_some()),
                ],
            )?;
            ModulationSpec::cw()
        }
        RawKind::SineAm => {
            forbid(
                s,
                "sine_am",
                &[
                    ("pulse_width_ps", r.pulse_width_ps.is_some()),
                    ("rep_rate_mhz", r.rep_rate_mhz.is_some()),
                    ("rise_time_ps", r.rise_time_ps.is_some()),
                ],
            )?;
            ModulationSpec::sine_am(
                require(s, "sine_am", "mod_freq_mhz", r.mod_freq_mhz)? * 1e6,
                require(s, "sine_am", "depth", r.depth)?,
            )
        }
        RawKind::CarrierSuppressed => {
            forbid(
                s,
                "carrier_suppressed",
                &[
                    ("depth", r.depth.is_some()),
                    ("pulse_width_ps", r.pulse_width_ps.is_some()),
                    ("rep_rate_mhz", r.rep_rate_mhz.is_some()),
                    ("rise_time_ps", r.rise_time_ps.is_some()),
                ],
            )?;
            ModulationSpec::carrier_suppressed(
                require(s, "carrier_suppressed", "mod_freq_mhz", r.mod_freq_mhz)? * 1e6,
            )
        }
        RawKind::PulseTrain => {
            forbid(
                s,
                "pulse_train",
                &[
                    ("mod_freq_mhz", r.mod_freq_mhz.is_some()),
                    ("depth", r.depth.is_some()),
                ],
            )?;
            let mut spec = ModulationSpec::pulse_train(
                require(s, "pulse_train", "pulse_width_ps", r.pulse_width_ps)? * 1e-12,
                require(s, "pulse_train", "rep_rate_mhz", r.rep_rate_mhz)? * 1e6,
            );
            if let Some(rise) = r.rise_time_ps {
                spec.shape = PulseShape::RaisedCosine {
                    rise_time: finite(s, "rise_time_ps", rise)? * 1e-12,
                };
            }
            spec
        }
    };
    core_check(s, spec.validate())?;

    let choices = [
        r.saturation.map(Amplitude::Saturation),
        r.rabi_over_gamma.map(Amplitude::RabiOverGamma),
        r.coherent_fraction.map(Amplitude::CoherentFraction),
        r.emissions_per_pulse.map(Amplitude::EmissionsPerPulse),
    ];
    let set: Vec<Amplitude> = choices.into_iter().flatten().collect();
    let amplitude = match set.as_slice() {
        [a] => *a,
        _ => {
            return Err(invalid(format!(
                "[{s}] give exactly one of `saturation`, `rabi_over_gamma`, `coherent_fraction`, `emissions_per_pulse`"
            )))
        }
    };
    match amplitude {
        Amplitude::Saturation(v) | Amplitude::RabiOverGamma(v) if !(v >= 0.0 && v.is_finite()) => {
            return Err(invalid(format!(
                "[{s}] drive amplitude must be non-negative and finite"
            )))
        }
        Amplitude::CoherentFraction(_) | Amplitude::EmissionsPerPulse(_)
            if spec.kind != ModulationKind::PulseTrain =>
        {
            return Err(invalid(format!(
                "[{s}] calibrated amplitudes apply to pulse trains only"
            )))
        }
        _ => {}
    }
    if !(r.sample_rate_ghz > 0.0 && r.sample_rate_ghz.is_finite()) {
        return Err(invalid(format!("[{s}] `sample_rate_ghz` must be positive")));
    }
    let duration = match r.duration_ns {
        Some(d) if !(d > 0.0 && d.is_finite()) => {
            return Err(invalid(format!("[{s}] `duration_ns` must be positive")))
        }
        d => d.map(|d| d * 1e-9),
    };
    Ok(WaveformPlan {
        spec,
        sample_rate: r.sample_rate_ghz * 1e9,
        duration,
        amplitude,
    })
}

fn build_stream(r: RawStream) -> Result<StreamPlan> {
    let s = "stream";
    let duration = finite(s, "duration_ms", r.duration_ms)? * 1e-3;
    let block = finite(s, "block_duration_us", r.block_duration_us)? * 1e-6;
    if !(duration > 0.0 && block > 0.0) {
        return Err(invalid(format!("[{s}] durations must be positive")));
    }
    Ok(StreamPlan {
        duration,
        mc: McConfig {
            block_duration: block,
            execution: Execution::Parallel,
        },
    })
}

fn build_detection(r: RawDetection) -> Result<DetectionPlan> {
    let s = "detection";
    let chain = DetectionChain {
        efficiency: finite(s, "efficiency", r.efficiency)?,
        background_rate: finite(s, "background_cps", r.background_cps)?,
        jitter_fwhm: finite(s, "jitter_fwhm_ps", r.jitter_fwhm_ps)? * 1e-12,
        bin_width: finite(s, "bin_width_ps", r.bin_width_ps)? * 1e-12,
        sideband_loss: finite(s, "sideband_loss", r.sideband_loss)?,
    };
    core_check(s, chain.validate())?;
    let window = finite(s, "window_ns", r.window_ns)? * 1e-9;
    if window < chain.bin_width {
        return Err(invalid(format!(
            "[{s}] `window_ns` must cover at least one bin"
        )));
    }
    if !(0.0..=1.0).contains(&r.hbt_split) {
        return Err(invalid(format!("[{s}] `hbt_split` must be in [0,1]")));
    }
    Ok(DetectionPlan {
        chain,
        window,
        hbt_split: r.hbt_split,
    })
}

fn build_interferometer(r: RawInterferometer) -> Result<InterferometerConfig> {
    let s = "interferometer";
    let c = InterferometerConfig {
        t1: finite(s, "t1", r.t1)?,
        r1: 1.0 - r.t1,
        t2: finite(s, "t2", r.t2)?,
        r2: 1.0 - r.t2,
        delay: finite(s, "delay_ns", r.delay_ns)? * 1e-9,
        pol_overlap_parallel: finite(s, "pol_overlap_parallel", r.pol_overlap_parallel)?,
        pol_overlap_orthogonal: finite(s, "pol_overlap_orthogonal", r.pol_overlap_orthogonal)?,
        mode_overlap: finite(s, "mode_overlap", r.mode_overlap)?,
        overlap_window: r.overlap_window_ns.map(|w| w * 1e-9),
    };
    core_check(s, c.validate())?;
    Ok(c)
}

fn build_heterodyne(r: RawHeterodyne) -> Result<HeterodynePlan> {
    let s = "heterodyne";
    let config = HeterodyneConfig {
        delta_nu: finite(s, "delta_nu_khz", r.delta_nu_khz)? * 1e3,
        lo_amplitude: finite(s, "lo_amplitude", r.lo_amplitude)?,
        signal_amplitude: finite(s, "signal_amplitude", r.signal_amplitude)?,
        sample_rate: finite(s, "sample_rate_mhz", r.sample_rate_mhz)? * 1e6,
        acquisition_time: finite(s, "acquisition_time_s", r.acquisition_time_s)?,
        aom_freqs: (
            finite(s, "aom1_mhz", r.aom1_mhz)? * 1e6,
            finite(s, "aom2_mhz", r.aom2_mhz)? * 1e6,
        ),
        chunk_size: r.chunk_size,
        averages: r.averages,
    };
    core_check(s, config.validate())?;
    let noise = PhaseNoiseModel {
        random_walk_diffusion: finite(
            s,
            "random_walk_diffusion_rad2_per_s",
            r.random_walk_diffusion_rad2_per_s,
        )?,
        sinusoidal_components: r
            .tones
            .iter()
            .map(|t| PhaseTone {
                freq: t.freq_hz,
                amplitude: t.amplitude_rad,
            })
            .collect(),
        common_mode_diffusion: finite(
            s,
            "common_mode_diffusion_rad2_per_s",
            r.common_mode_diffusion_rad2_per_s,
        )?,
    };
    core_check(s, noise.validate(config.sample_rate))?;
    let window = match r.window {
        RawWindow::Rectangular => Window::Rectangular,
        RawWindow::Hann => Window::Hann,
    };
    Ok(HeterodynePlan {
        config,
        noise,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
seeds = []
outputs = ["population"]

[emitter]
lifetime_ps = 650

[waveform]
kind = "cw"
saturation = 0.5
duration_ns = 5
"#;

    #[test]
    fn minimal_scenario_parses() {
        let s = parse(MINIMAL).unwrap();
        assert!(s.wants(Output::Population));
        assert!((s.emitter.unwrap().t1_lifetime() - 650e-12).abs() < 1e-24);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = MINIMAL.replace("lifetime_ps", "lifetime_ps = 1\nlifetim_ps");
        let e = parse(&text).unwrap_err().to_string();
        assert!(e.contains("lifetim_ps"), "{e}");
    }

    #[test]
    fn unused_section_is_rejected() {
        let text = format!("{MINIMAL}\n[stream]\nduration_ms = 1\n");
        assert!(parse(&text).unwrap_err().to_string().contains("[stream]"));
    }

    #[test]
    fn seeds_must_match_stages() {
        let text = MINIMAL.replace("seeds = []", "seeds = [1]");
        assert!(parse(&text)
            .unwrap_err()
            .to_string()
            .contains("exactly 0 seed"));
    }

    #[test]
    fn kind_specific_keys_are_checked() {
        let text = MINIMAL.replace("kind = \"cw\"", "kind = \"cw\"\ndepth = 0.5");
        assert!(parse(&text).unwrap_err().to_string().contains("depth"));
        let text = MINIMAL.replace("saturation = 0.5", "saturation = 0.5\nrabi_over_gamma = 1");
        assert!(parse(&text)
            .unwrap_err()
            .to_string()
            .contains("exactly one"));
    }

    #[test]
    fn bad_physics_values_are_validation_errors() {
        let text = MINIMAL.replace("lifetime_ps = 650", "lifetime_ps = -1");
        assert_eq!(parse(&text).unwrap_err().exit_code(), 2);
    }
}
