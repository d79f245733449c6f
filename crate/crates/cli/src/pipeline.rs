//! Scenario execution: calls into `heitler-core` and collects tables, plots
//! and summary quantities. Apart from unit conversion for display, every
//! number comes from a core operation.

use crate::error::{Result, Stage};
use crate::export::{Column, Report, Table};
use crate::scenario::{Amplitude, Output, Scenario, SeedStage, WaveformPlan};
use crate::svg::{Curve, Plot};
use heitler_core::correlation::{pulsed_peak_areas, CoincidenceHistogram};
use heitler_core::emitter::{
    coherent_fraction, emission_spectrum, g1_qrt, g2_qrt, max_grid_step, periodic_steady_state,
    solve_bloch, steady_state, BlochState, EmitterParams,
};
use heitler_core::heterodyne::{averaged_line_spectrum, fit_gaussian_line, mutual_coherence};
use heitler_core::hom::{
    contrast, corrected_contrast, normalized_difference, simulate_hbt, simulate_hom,
    CoincidenceRun, CorrectionMode, NormalizedDifference, Polarization,
};
use heitler_core::io::{write_ptt1, TagStreams};
use heitler_core::photon::{calibrate_peak_rabi, mc_stream, records_from_times, PulseTarget};
use heitler_core::waveform::{
    carrier_suppression_db, heitler_response, sideband_transfer, waveform_spectrum, DriveWaveform,
    ModulationKind,
};
use heitler_core::Execution;

/// Length of the synthesized segment that is repeated for CW trajectories, s.
const CW_SEGMENT: f64 = 1e-6;

pub fn run(s: &Scenario) -> Result<Report> {
    let mut report = Report::default();
    if let (Some(params), Some(plan)) = (&s.emitter, &s.waveform) {
        let amplitude = resolve_amplitude(params, plan)?;
        drive_quantities(&mut report, params, plan, amplitude)?;
        if s.wants(Output::Population) {
            population(&mut report, params, plan, amplitude)?;
        }
        if s.wants(Output::EmissionSpectrum) {
            cw_spectrum(&mut report, params, amplitude)?;
        }
        if s.wants(Output::G2Qrt) {
            cw_g2(&mut report, params, amplitude)?;
        }
        if s.wants(Output::HeitlerSpectrum) {
            heitler(&mut report, params, plan, amplitude)?;
        }
        if s.stream.is_some() {
            photons(&mut report, s, params, plan, amplitude)?;
        }
    }
    if s.wants(Output::BeatSpectrum) {
        beat(&mut report, s)?;
    }
    Ok(report)
}

fn resolve_amplitude(params: &EmitterParams, plan: &WaveformPlan) -> Result<f64> {
    Ok(match plan.amplitude {
        Amplitude::Saturation(v) => params.rabi_for_saturation(v),
        Amplitude::RabiOverGamma(v) => v * params.gamma,
        Amplitude::CoherentFraction(f) => calibrate_peak_rabi(
            params,
            &plan.spec,
            plan.sample_rate,
            PulseTarget::CoherentFraction(f),
        )
        .stage("calibration")?,
        Amplitude::EmissionsPerPulse(n) => calibrate_peak_rabi(
            params,
            &plan.spec,
            plan.sample_rate,
            PulseTarget::EmissionsPerPulse(n),
        )
        .stage("calibration")?,
    })
}

fn drive_quantities(
    r: &mut Report,
    params: &EmitterParams,
    plan: &WaveformPlan,
    amplitude: f64,
) -> Result<()> {
    r.quantity(
        "drive_amplitude_over_gamma",
        amplitude / params.gamma,
        None,
        "1",
    );
    match plan.spec.period() {
        Some(period) => {
            let drive = plan
                .spec
                .synthesize(amplitude, period, plan.sample_rate)
                .stage("waveform")?;
            r.quantity(
                "peak_saturation",
                params.saturation(drive.max_rabi(), drive.carrier_detuning()),
                None,
                "1",
            );
            let p = periodic_steady_state(params, &drive, period).stage("bloch")?;
            r.quantity(
                "emissions_per_period",
                p.emissions_per_period,
                None,
                "photons",
            );
            r.quantity("coherent_fraction", p.coherent_fraction, None, "1");
        }
        None => {
            r.quantity(
                "peak_saturation",
                params.saturation(amplitude, 0.0),
                None,
                "1",
            );
            let st = steady_state(params, amplitude, 0.0);
            r.quantity("excited_population", st.rho_ee, None, "1");
            r.quantity(
                "coherent_fraction",
                coherent_fraction(&st).stage("bloch")?,
                None,
                "1",
            );
        }
    }
    Ok(())
}

fn synthesize(plan: &WaveformPlan, amplitude: f64) -> Result<DriveWaveform> {
    let duration = plan.duration.expect("duration checked at validation");
    plan.spec
        .synthesize(amplitude, duration, plan.sample_rate)
        .stage("waveform")
}

fn population(
    r: &mut Report,
    params: &EmitterParams,
    plan: &WaveformPlan,
    amplitude: f64,
) -> Result<()> {
    let drive = synthesize(plan, amplitude)?;
    let duration = drive.duration();
    let n = (duration / max_grid_step(params, &drive)).ceil() as usize;
    let grid: Vec<f64> = (1..=n).map(|k| duration * k as f64 / n as f64).collect();
    let states = solve_bloch(params, &drive, &grid, BlochState::GROUND).stage("bloch")?;
    let rho: Vec<f64> = states.iter().map(|s| s.rho_ee).collect();
    r.quantity(
        "max_excited_population",
        rho.iter().cloned().fold(0.0, f64::max),
        None,
        "1",
    );
    r.tables.push(Table::new(
        "population.csv",
        vec![
            Column::new("time_s", grid.iter().copied()),
            Column::new("rho_ee", rho.iter().copied()),
            Column::new("re_coherence", states.iter().map(|s| s.rho_ge.re)),
            Column::new("im_coherence", states.iter().map(|s| s.rho_ge.im)),
        ],
    ));
    r.plots.push(
        Plot::new(
            "population.svg",
            "Excited-state population",
            "time (ns)",
            "rho_ee",
        )
        .curve(Curve::new("rho_ee", ns(&grid), rho)),
    );
    Ok(())
}

fn cw_spectrum(r: &mut Report, params: &EmitterParams, amplitude: f64) -> Result<()> {
    let t_max = 80.0 * params.t1_lifetime();
    let n = 8192;
    let tau: Vec<f64> = (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect();
    let g1 = g1_qrt(params, amplitude, 0.0, &tau).stage("qrt")?;
    let spec = emission_spectrum(&g1).stage("spectrum")?;
    r.quantity("elastic_weight", spec.elastic_weight(), None, "1");
    r.tables.push(Table::new(
        "emission_spectrum.csv",
        vec![
            Column::new("freq_hz", spec.freq().iter().copied()),
            Column::new("power", spec.power().iter().copied()),
        ],
    ));
    r.plots.push(
        Plot::new(
            "emission_spectrum.svg",
            "Inelastic emission spectrum",
            "detuning (GHz)",
            "power (1/Hz)",
        )
        .log_y()
        .curve(Curve::new(
            "inelastic",
            ghz(spec.freq()),
            spec.power().to_vec(),
        )),
    );
    Ok(())
}

fn cw_g2(r: &mut Report, params: &EmitterParams, amplitude: f64) -> Result<()> {
    let t_max = 20.0 * params.t1_lifetime();
    let n = 2001;
    let tau: Vec<f64> = (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect();
    let g2 = g2_qrt(params, amplitude, 0.0, &tau).stage("qrt")?;
    let v = g2.real();
    r.quantity("g2_qrt_zero", v[0], None, "1");
    r.tables.push(Table::new(
        "g2_qrt.csv",
        vec![
            Column::new("tau_s", tau.iter().copied()),
            Column::new("g2", v.iter().copied()),
        ],
    ));
    r.plots.push(
        Plot::new(
            "g2_qrt.svg",
            "Intensity correlation (regression theorem)",
            "delay (ns)",
            "g2",
        )
        .curve(Curve::new("g2", ns(&tau), v)),
    );
    Ok(())
}

fn heitler(
    r: &mut Report,
    params: &EmitterParams,
    plan: &WaveformPlan,
    amplitude: f64,
) -> Result<()> {
    let drive = synthesize(plan, amplitude)?;
    let laser = waveform_spectrum(&drive).stage("spectrum")?;
    let field = heitler_response(&drive, params).stage("linear response")?;
    let qd = waveform_spectrum(&field).stage("spectrum")?;
    let spec = &plan.spec;
    match spec.kind {
        ModulationKind::SineAm => {
            r.quantity(
                "sideband_transfer_upper",
                sideband_transfer(&laser, &qd, spec.mod_freq).stage("spectrum")?,
                None,
                "1",
            );
            r.quantity(
                "sideband_transfer_lower",
                sideband_transfer(&laser, &qd, -spec.mod_freq).stage("spectrum")?,
                None,
                "1",
            );
        }
        ModulationKind::CarrierSuppressed => {
            r.quantity(
                "laser_carrier_suppression",
                carrier_suppression_db(&laser, spec.mod_freq).stage("spectrum")?,
                None,
                "dB",
            );
            r.quantity(
                "qd_carrier_suppression",
                carrier_suppression_db(&qd, spec.mod_freq).stage("spectrum")?,
                None,
                "dB",
            );
        }
        _ => {}
    }
    for (file, s) in [("laser_spectrum.csv", &laser), ("qd_spectrum.csv", &qd)] {
        r.tables.push(Table::new(
            file,
            vec![
                Column::new("freq_hz", s.freq().iter().copied()),
                Column::new("power", s.power().iter().copied()),
            ],
        ));
    }
    let span = match spec.period() {
        Some(p) => 4.0 / p,
        None => 1e9,
    };
    let clip = |s: &heitler_core::spectrum::Spectrum| -> (Vec<f64>, Vec<f64>) {
        s.freq()
            .iter()
            .zip(s.power())
            .filter(|(f, _)| f.abs() <= span)
            .map(|(f, p)| (f * 1e-6, *p))
            .unzip()
    };
    let (lx, ly) = clip(&laser);
    let (qx, qy) = clip(&qd);
    r.plots.push(
        Plot::new(
            "heitler_spectrum.svg",
            "Laser and scattered-field spectra",
            "offset from carrier (MHz)",
            "energy density",
        )
        .log_y()
        .curve(Curve::new("laser", lx, ly))
        .curve(Curve::new("emitter", qx, qy)),
    );
    Ok(())
}

fn photons(
    r: &mut Report,
    s: &Scenario,
    params: &EmitterParams,
    plan: &WaveformPlan,
    amplitude: f64,
) -> Result<()> {
    let stream = s.stream.as_ref().expect("checked by caller");
    let det = s.detection.as_ref().expect("stream outputs need detection");
    let period = plan.spec.period();
    let drive = plan
        .spec
        .synthesize(amplitude, period.unwrap_or(CW_SEGMENT), plan.sample_rate)
        .stage("waveform")?;
    let emissions = mc_stream(
        params,
        &drive,
        period,
        stream.duration,
        s.seed(SeedStage::Trajectories),
        &stream.mc,
    )
    .stage("trajectories")?;
    r.quantity("emitted_photons", emissions.len() as f64, None, "photons");
    let records = records_from_times(&emissions, 0);
    let hbt = simulate_hbt(
        &records,
        det.hbt_split,
        &det.chain,
        det.window,
        stream.duration,
        s.seed(SeedStage::Hbt),
        Execution::Parallel,
    )
    .stage("hbt")?;
    r.quantity(
        "detected_photons",
        (hbt.detector_c.len() + hbt.detector_d.len()) as f64,
        None,
        "photons",
    );

    if s.wants(Output::G2Histogram) {
        let h = &hbt.histogram;
        r.tables.push(histogram_table("g2_histogram.csv", h));
        r.plots.push(
            Plot::new(
                "g2_histogram.svg",
                "HBT coincidences",
                "delay (ns)",
                "normalized coincidences",
            )
            .curve(Curve::new("g2", ns(&h.centers()), h.normalized())),
        );
        match (plan.spec.kind, period) {
            (ModulationKind::PulseTrain, Some(p)) => {
                let a = pulsed_peak_areas(h, p).stage("peak areas")?;
                r.quantity("central_peak_ratio", a.ratio, Some(a.ratio_sigma), "1");
                r.quantity("central_peak_area", a.central, None, "counts");
                r.quantity("side_peak_mean_area", a.side_mean, None, "counts");
                r.quantity("neighbour_peak_mean_area", a.neighbour_mean, None, "counts");
            }
            _ => {
                let mid = h.len() / 2;
                r.quantity(
                    "g2_zero_bin",
                    h.normalized()[mid],
                    Some(h.normalized_sigma()[mid]),
                    "1",
                );
            }
        }
    }

    if s.wants(Output::TimeTags) {
        let mut all: Vec<_> = hbt
            .detector_c
            .iter()
            .chain(&hbt.detector_d)
            .copied()
            .collect();
        all.sort_unstable();
        let streams = TagStreams::new(all).stage("time tags")?;
        let mut bytes = Vec::new();
        write_ptt1(&mut bytes, &streams).stage("time tags")?;
        r.binaries.push(("time_tags.ptt1".into(), bytes));
    }

    if s.wants(Output::Hom) {
        hom(
            r,
            s,
            &records,
            &hbt,
            period.expect("hom needs a pulse train"),
        )?;
    }
    Ok(())
}

fn histogram_table(file: &str, h: &CoincidenceHistogram) -> Table {
    Table::new(
        file,
        vec![
            Column::new("tau_s", h.centers()),
            Column::new("counts", h.counts().iter().map(|&c| c as f64)),
            Column::new("normalized", h.normalized()),
        ],
    )
}

fn hom(
    r: &mut Report,
    s: &Scenario,
    records: &[heitler_core::photon::PhotonRecord],
    hbt: &CoincidenceRun,
    period: f64,
) -> Result<()> {
    let cfg = s
        .interferometer
        .as_ref()
        .expect("hom needs an interferometer");
    let det = s.detection.as_ref().expect("hom needs detection");
    let duration = s.stream.as_ref().expect("hom needs a stream").duration;
    let seed = s.seed(SeedStage::Hom);
    let mut runs = Vec::new();
    // simulate_hom draws from `seed` and `seed + 1`.
    for (pol, seed) in [
        (Polarization::Parallel, seed),
        (Polarization::Orthogonal, seed.wrapping_add(2)),
    ] {
        let run = simulate_hom(
            records,
            cfg,
            pol,
            &det.chain,
            det.window,
            duration,
            seed,
            Execution::Parallel,
        )
        .stage("hom")?;
        let nd = normalized_difference(&run.histogram, &hbt.histogram).stage("hom")?;
        runs.push((pol, run, nd));
    }
    let name = |p: Polarization| match p {
        Polarization::Parallel => "parallel",
        Polarization::Orthogonal => "orthogonal",
    };
    let mut areas = Vec::new();
    for (pol, run, nd) in &runs {
        let a = nd.central_area(period);
        r.quantity(
            &format!("difference_area_{}", name(*pol)),
            a.value * 1e9,
            Some(a.sigma * 1e9),
            "ns",
        );
        let pa = pulsed_peak_areas(&run.histogram, period).stage("peak areas")?;
        r.quantity(
            &format!("hom_central_peak_ratio_{}", name(*pol)),
            pa.ratio,
            Some(pa.ratio_sigma),
            "1",
        );
        areas.push(a);
    }
    let raw = contrast(areas[0], areas[1]).stage("contrast")?;
    r.quantity("raw_contrast", raw.value, Some(raw.sigma), "1");
    for (mode, label) in [
        (
            CorrectionMode::PolarizationOnly,
            "corrected_contrast_polarization",
        ),
        (CorrectionMode::Full, "corrected_contrast_full"),
    ] {
        let c = corrected_contrast(
            raw,
            cfg.pol_overlap_parallel,
            cfg.pol_overlap_orthogonal,
            cfg.t1,
            cfg.r1,
            cfg.t2,
            cfg.r2,
            mode,
        )
        .stage("contrast")?;
        r.quantity(label, c.value, Some(c.sigma), "1");
    }

    let h0 = &hbt.histogram;
    let (pa_run, or_run) = (&runs[0].1, &runs[1].1);
    r.tables.push(Table::new(
        "hom_histograms.csv",
        vec![
            Column::new("tau_s", h0.centers()),
            Column::new("counts_hbt", h0.counts().iter().map(|&c| c as f64)),
            Column::new(
                "counts_parallel",
                pa_run.histogram.counts().iter().map(|&c| c as f64),
            ),
            Column::new(
                "counts_orthogonal",
                or_run.histogram.counts().iter().map(|&c| c as f64),
            ),
            Column::new("normalized_hbt", h0.normalized()),
            Column::new("normalized_parallel", pa_run.histogram.normalized()),
            Column::new("normalized_orthogonal", or_run.histogram.normalized()),
        ],
    ));
    let diff = |nd: &NormalizedDifference| nd.values.clone();
    let (nd_pa, nd_or) = (&runs[0].2, &runs[1].2);
    r.tables.push(Table::new(
        "normalized_difference.csv",
        vec![
            Column::new("tau_s", nd_pa.tau.iter().copied()),
            Column::sparse("difference_parallel", diff(nd_pa)),
            Column::new("sigma_parallel", nd_pa.sigma.iter().copied()),
            Column::sparse("difference_orthogonal", diff(nd_or)),
            Column::new("sigma_orthogonal", nd_or.sigma.iter().copied()),
        ],
    ));
    let t = ns(&h0.centers());
    r.plots.push(
        Plot::new(
            "hom_histograms.svg",
            "HOM and HBT coincidences",
            "delay (ns)",
            "normalized coincidences",
        )
        .curve(Curve::new("HBT", t.clone(), h0.normalized()))
        .curve(Curve::new(
            "HOM parallel",
            t.clone(),
            pa_run.histogram.normalized(),
        ))
        .curve(Curve::new(
            "HOM orthogonal",
            t.clone(),
            or_run.histogram.normalized(),
        )),
    );
    let masked = |nd: &NormalizedDifference| {
        nd.values
            .iter()
            .map(|v| v.unwrap_or(f64::NAN))
            .collect::<Vec<_>>()
    };
    r.plots.push(
        Plot::new(
            "normalized_difference.svg",
            "Normalized difference g_HOM/g2 - 1",
            "delay (ns)",
            "difference",
        )
        .curve(Curve::new("parallel", t.clone(), masked(nd_pa)))
        .curve(Curve::new("orthogonal", t, masked(nd_or))),
    );
    Ok(())
}

fn beat(r: &mut Report, s: &Scenario) -> Result<()> {
    let plan = s.heterodyne.as_ref().expect("beat output needs heterodyne");
    let c = &plan.config;
    let spec = averaged_line_spectrum(
        c,
        &plan.noise,
        s.seed(SeedStage::Heterodyne),
        plan.window,
        8,
        Execution::Parallel,
    )
    .stage("heterodyne")?;
    let fit = fit_gaussian_line(&spec, c.delta_nu).stage("line fit")?;
    let coh = mutual_coherence(fit.fwhm).stage("coherence")?;
    r.quantity("beat_fwhm", fit.fwhm, Some(fit.uncertainty), "Hz");
    r.quantity("beat_center", fit.center, None, "Hz");
    r.quantity(
        "resolution_bandwidth",
        spec.resolution_bandwidth,
        None,
        "Hz",
    );
    r.quantity("aom_difference", c.aom_difference(), None, "Hz");
    r.quantity("coherence_time", coh.tau_c, None, "s");
    r.quantity("coherence_length", coh.length, None, "m");
    let model: Vec<f64> = spec.freq.iter().map(|&f| fit.value_at(f)).collect();
    r.tables.push(Table::new(
        "beat_spectrum.csv",
        vec![
            Column::new("freq_hz", spec.freq.iter().copied()),
            Column::new("power", spec.power.iter().copied()),
            Column::new("gaussian_fit", model.iter().copied()),
        ],
    ));
    let offset: Vec<f64> = spec.freq.iter().map(|f| f - c.delta_nu).collect();
    r.plots.push(
        Plot::new(
            "beat_spectrum.svg",
            "Heterodyne beat note",
            "offset from beat frequency (Hz)",
            "power",
        )
        .curve(Curve::new("measured", offset.clone(), spec.power.clone()))
        .curve(Curve::new("Gaussian fit", offset, model)),
    );
    Ok(())
}

fn ns(t: &[f64]) -> Vec<f64> {
    t.iter().map(|t| t * 1e9).collect()
}

fn ghz(f: &[f64]) -> Vec<f64> {
    f.iter().map(|f| f * 1e-9).collect()
}
