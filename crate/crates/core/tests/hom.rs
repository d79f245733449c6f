use heitler_core::correlation::{pulsed_peak_areas, CoincidenceHistogram};
use heitler_core::emitter::*;
use heitler_core::hom::*;
use heitler_core::photon::*;
use heitler_core::waveform::ModulationSpec;
use heitler_core::Execution;
use proptest::prelude::*;

const T1: f64 = 0.65e-9;
const PERIOD: f64 = 1.0 / 300e6;

fn qd() -> EmitterParams {
    EmitterParams::from_lifetime(T1).unwrap()
}

fn qrt_g2(s: f64) -> CorrelationFunction {
    let p = qd();
    let tau: Vec<f64> = (0..1000).map(|k| k as f64 * 20e-12).collect();
    g2_qrt(&p, p.rabi_for_saturation(s), 0.0, &tau).unwrap()
}

#[test]
fn model_limits_are_exact() {
    let (t1, r1) = (1.3 / 2.3, 1.0 / 2.3);
    for s in [0.05, 0.5, 5.0] {
        let g = qrt_g2(s);
        assert_eq!(g.tau().len(), 1000);
        let one = hom_model(&g, t1, r1, 1.0).unwrap();
        let zero = hom_model(&g, t1, r1, 0.0).unwrap();
        for k in 0..1000 {
            let gk = g.values()[k].re;
            assert!((one.values()[k].re - gk).abs() <= 1e-12);
            assert!(
                (zero.values()[k].re - ((t1 * t1 + r1 * r1) * gk + 2.0 * r1 * t1)).abs() <= 1e-12
            );
        }
    }
}

#[test]
fn model_rejects_first_order_input() {
    let p = qd();
    let tau: Vec<f64> = (0..100).map(|k| k as f64 * 1e-10).collect();
    let g1 = g1_qrt(&p, p.gamma, 0.0, &tau).unwrap();
    assert!(hom_model(&g1, 0.5, 0.5, 1.0).is_err());
    assert!(hom_model(&qrt_g2(1.0), 0.6, 0.6, 1.0).is_err());
}

#[test]
fn balanced_central_ratio_matches_model_at_zero_delay() {
    // With a balanced BS2 and g²(0) = 0 the pulsed ratio equals the model at
    // τ = 0 over its uncorrelated level, which is 1.
    for t1 in [0.3, 0.5, 0.565] {
        let r1 = 1.0 - t1;
        for eta in [0.0, 0.4, 1.0] {
            let from_model = 2.0 * r1 * t1 * (1.0 - eta);
            let pulsed = pulsed_central_ratio(t1, r1, 0.5, 0.5, eta);
            assert!((pulsed - from_model).abs() < 1e-12);
        }
    }
}

#[test]
fn contrast_is_scale_invariant() {
    let a = Measured::new(0.1, 0.01);
    let b = Measured::new(0.6, 0.02);
    let c = contrast(a, b).unwrap();
    for k in [1e-3, 2.0, 1e6] {
        let s = contrast(
            Measured::new(a.value * k, a.sigma * k),
            Measured::new(b.value * k, b.sigma * k),
        )
        .unwrap();
        assert!((s.value - c.value).abs() < 1e-12);
        assert!((s.sigma - c.sigma).abs() < 1e-12);
    }
    assert!(contrast(a, Measured::exact(0.0)).is_err());
}

#[test]
fn polarization_correction_is_plain_division() {
    let raw = Measured::new(0.926, 0.016);
    let c = corrected_contrast(
        raw,
        0.97,
        0.05,
        0.565,
        0.435,
        0.41,
        0.59,
        CorrectionMode::PolarizationOnly,
    )
    .unwrap();
    assert_eq!(c.value, raw.value / 0.97);
    assert_eq!(c.beamsplitter_factor, 1.0);
    let f = corrected_contrast(
        raw,
        0.97,
        0.05,
        0.565,
        0.435,
        0.41,
        0.59,
        CorrectionMode::Full,
    )
    .unwrap();
    let bs = (0.565f64.powi(2) + 0.435f64.powi(2)) / (2.0 * 0.565 * 0.435);
    assert!((f.value - raw.value / 0.97 * bs).abs() < 1e-12);
    assert!(corrected_contrast(raw, 0.05, 0.97, 0.5, 0.5, 0.5, 0.5, CorrectionMode::Full).is_err());
}

#[test]
fn normalized_difference_masks_and_checks_grids() {
    let g = CoincidenceHistogram::from_counts(100, vec![100, 100, 1, 100, 100, 100, 100, 100, 100])
        .unwrap();
    let h = CoincidenceHistogram::from_counts(100, vec![100, 100, 1, 50, 100, 100, 100, 100, 100])
        .unwrap();
    let nd = normalized_difference(&h, &g).unwrap();
    assert_eq!(nd.values[2], None);
    assert!(nd.values[3].unwrap() < -0.4);
    let other = CoincidenceHistogram::from_counts(50, vec![1; 9]).unwrap();
    assert!(matches!(
        normalized_difference(&h, &other),
        Err(heitler_core::Error::GridMismatch(_))
    ));
}

struct Source {
    records: Vec<PhotonRecord>,
    duration: f64,
}

fn pulsed_source(duration: f64, seed: u64) -> Source {
    let p = qd();
    let spec = ModulationSpec::pulse_train(500e-12, 300e6);
    let rabi = calibrate_peak_rabi(&p, &spec, 20e9, PulseTarget::CoherentFraction(0.9)).unwrap();
    let drive = spec.synthesize(rabi, PERIOD, 20e9).unwrap();
    let em = mc_stream(
        &p,
        &drive,
        Some(PERIOD),
        duration,
        seed,
        &McConfig::default(),
    )
    .unwrap();
    Source {
        records: records_from_times(&em, 0),
        duration,
    }
}

#[test]
fn monte_carlo_central_ratio_matches_beamsplitter_oracle() {
    let src = pulsed_source(0.02, 31);
    let ideal = DetectionChain::ideal();
    let hbt = simulate_hbt(
        &src.records,
        0.5,
        &ideal,
        25e-9,
        src.duration,
        1,
        Execution::Parallel,
    )
    .unwrap();
    let a = pulsed_peak_areas(&hbt.histogram, PERIOD).unwrap();
    let (g, w1) = (a.ratio, a.neighbour_mean / a.side_mean);
    let cfg = InterferometerConfig::default();
    let (t1, r1, t2, r2) = (cfg.t1, cfg.r1, cfg.t2, cfg.r2);
    let d = (t1 * t2 + r1 * r2) * (t1 * r2 + r1 * t2);
    for (i, pol) in [Polarization::Parallel, Polarization::Orthogonal]
        .into_iter()
        .enumerate()
    {
        let run = simulate_hom(
            &src.records,
            &cfg,
            pol,
            &ideal,
            25e-9,
            src.duration,
            5 + i as u64,
            Execution::Parallel,
        )
        .unwrap();
        let h = pulsed_peak_areas(&run.histogram, PERIOD).unwrap();
        // Single photons meeting a photon of the neighbouring pulse, plus
        // two-photon pulses split at BS1 that never overlap in time.
        let predicted = w1 * pulsed_central_ratio(t1, r1, t2, r2, cfg.eta(pol))
            + g * (t1 * t1 + r1 * r1) * t2 * r2 / d;
        assert!(
            (h.ratio - predicted).abs() < 4.0 * h.ratio_sigma + 0.01,
            "{pol:?}: {} ± {} vs {predicted}",
            h.ratio,
            h.ratio_sigma
        );
    }
}

#[test]
fn distinguishable_photons_show_no_contrast() {
    let src = pulsed_source(0.01, 41);
    let ideal = DetectionChain::ideal();
    let cfg = InterferometerConfig {
        pol_overlap_parallel: 0.05,
        ..InterferometerConfig::default()
    };
    let areas: Vec<Measured> = [(Polarization::Parallel, 7), (Polarization::Orthogonal, 8)]
        .into_iter()
        .map(|(pol, seed)| {
            let run = simulate_hom(
                &src.records,
                &cfg,
                pol,
                &ideal,
                25e-9,
                src.duration,
                seed,
                Execution::Parallel,
            )
            .unwrap();
            let h = pulsed_peak_areas(&run.histogram, PERIOD).unwrap();
            Measured::new(h.ratio, h.ratio_sigma)
        })
        .collect();
    let c = contrast(areas[0], areas[1]).unwrap();
    assert!(c.value.abs() < 4.0 * c.sigma, "{c:?}");
}

#[test]
fn hom_is_deterministic_and_execution_independent() {
    let src = pulsed_source(0.002, 3);
    let cfg = InterferometerConfig::default();
    let chain = DetectionChain {
        jitter_fwhm: 600e-12,
        background_rate: 1e4,
        ..DetectionChain::ideal()
    };
    let run = |exec| {
        simulate_hom(
            &src.records,
            &cfg,
            Polarization::Parallel,
            &chain,
            10e-9,
            src.duration,
            9,
            exec,
        )
        .unwrap()
    };
    assert_eq!(run(Execution::Parallel), run(Execution::Sequential));
}

#[test]
fn short_records_are_rejected() {
    let cfg = InterferometerConfig::default();
    let recs = records_from_times(&[1e-9, 2e-9], 0);
    let r = simulate_hom(
        &recs,
        &cfg,
        Polarization::Parallel,
        &DetectionChain::ideal(),
        10e-9,
        15e-9,
        1,
        Execution::Parallel,
    );
    assert!(matches!(r, Err(heitler_core::Error::StreamTooShort(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_is_bounded_and_monotone_in_eta(
        t1 in 0.0f64..=1.0,
        eta_a in 0.0f64..=1.0,
        eta_b in 0.0f64..=1.0,
        s in 0.01f64..10.0,
    ) {
        let r1 = 1.0 - t1;
        let g = qrt_g2(s);
        let (lo, hi) = if eta_a < eta_b { (eta_a, eta_b) } else { (eta_b, eta_a) };
        let a = hom_model(&g, t1, r1, lo).unwrap();
        let b = hom_model(&g, t1, r1, hi).unwrap();
        for k in 0..g.tau().len() {
            let gk = g.values()[k].re;
            let (va, vb) = (a.values()[k].re, b.values()[k].re);
            // Lies between g² (η = 1) and the distinguishable limit (η = 0).
            let d = (t1 * t1 + r1 * r1) * gk + 2.0 * r1 * t1;
            prop_assert!(va >= gk.min(d) - 1e-12 && va <= gk.max(d) + 1e-12);
            // Where g² < 1 more indistinguishability means fewer coincidences.
            if gk < 1.0 {
                prop_assert!(vb <= va + 1e-12);
            }
        }
    }
}
