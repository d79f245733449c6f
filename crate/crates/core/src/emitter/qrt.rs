use super::{steady_state, EmitterParams};
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Share of the τ grid (at its long-delay end) averaged to estimate the
/// elastic plateau of g¹.
pub const PLATEAU_FRACTION: f64 = 0.1;

/// Minimum correlation range, in units of `1/Γ`, for [`emission_spectrum`].
pub const MIN_TAU_RANGE: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrelationKind {
    FirstOrder,
    SecondOrder,
}

/// Normalized two-time correlation sampled on a τ grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationFunction {
    tau: Vec<f64>,
    values: Vec<Complex64>,
    kind: CorrelationKind,
    decay_rate: f64,
}

impl CorrelationFunction {
    /// `decay_rate` is the emitter's Γ; it sets the range check of
    /// [`emission_spectrum`].
    pub fn first_order(tau: Vec<f64>, values: Vec<Complex64>, decay_rate: f64) -> Result<Self> {
        check_grid(&tau, values.len())?;
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::param("values", "must be finite"));
        }
        Ok(CorrelationFunction {
            tau,
            values,
            kind: CorrelationKind::FirstOrder,
            decay_rate,
        })
    }

    pub fn second_order(tau: Vec<f64>, values: Vec<f64>, decay_rate: f64) -> Result<Self> {
        check_grid(&tau, values.len())?;
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::param(
                "values",
                "second-order correlations must be finite and non-negative",
            ));
        }
        Ok(CorrelationFunction {
            tau,
            values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
            kind: CorrelationKind::SecondOrder,
            decay_rate,
        })
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Real parts of the values (the values themselves for g²).
    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn kind(&self) -> CorrelationKind {
        self.kind
    }

    pub fn decay_rate(&self) -> f64 {
        self.decay_rate
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// Mean over the last [`PLATEAU_FRACTION`] of the grid.
    pub fn plateau(&self) -> Complex64 {
        let n = self.values.len();
        let m = ((n as f64 * PLATEAU_FRACTION).ceil() as usize).clamp(1, n);
        self.values[n - m..].iter().sum::<Complex64>() / m as f64
    }
}

fn check_grid(tau: &[f64], n_values: usize) -> Result<()> {
    if tau.is_empty() {
        return Err(Error::Empty("tau grid"));
    }
    if tau.len() != n_values {
        return Err(Error::GridMismatch(format!(
            "{} delays vs {} values",
            tau.len(),
            n_values
        )));
    }
    if !(tau[0] >= 0.0) || tau.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param(
            "tau_grid",
            "delays must be non-negative and strictly increasing",
        ));
    }
    Ok(())
}

/// Regression generator on `(⟨σ⟩, ⟨σ†⟩, ⟨σ†σ⟩, 1)`; the last column carries
/// the inhomogeneous drive term scaled by `source`.
fn generator(
    params: &EmitterParams,
    rabi: f64,
    delta: f64,
    source: Complex64,
) -> Matrix4<Complex64> {
    let i = Complex64::i();
    let om = Complex64::new(rabi, 0.0);
    let g2 = params.coherence_decay();
    let z = Complex64::new(0.0, 0.0);
    let p = Complex64::new(g2, -delta);
    Matrix4::new(
        -p,
        z,
        i * om,
        -i * om * 0.5 * source,
        z,
        -p.conj(),
        -i * om.conj(),
        i * om.conj() * 0.5 * source,
        i * om.conj() * 0.5,
        -i * om * 0.5,
        Complex64::new(-params.gamma, 0.0),
        z,
        z,
        z,
        z,
        z,
    )
}

fn regress(
    generator: &Matrix4<Complex64>,
    y0: Vector4<Complex64>,
    tau: &[f64],
) -> Vec<Vector4<Complex64>> {
    let mut out = Vec::with_capacity(tau.len());
    let mut y = y0;
    let mut t = 0.0;
    let mut cached: Option<(f64, Matrix4<Complex64>)> = None;
    for &target in tau {
        let h = target - t;
        if h > 0.0 {
            let prop = match cached {
                Some((hc, ref m)) if ((hc - h) / h).abs() < 1e-12 => *m,
                _ => {
                    let m = (generator * Complex64::new(h, 0.0)).exp();
                    cached = Some((h, m));
                    m
                }
            };
            y = prop * y;
        }
        t = target;
        out.push(y);
    }
    out
}

fn validate_inputs(params: &EmitterParams, rabi: f64, tau: &[f64]) -> Result<()> {
    params.validate()?;
    if !(rabi >= 0.0 && rabi.is_finite()) {
        return Err(Error::param("rabi", "must be non-negative and finite"));
    }
    check_grid(tau, tau.len())
}

/// Normalized first-order correlation `⟨σ†(0)σ(τ)⟩/ρ_ee` of the CW steady
/// state at Rabi frequency `rabi` and extra detuning `detuning`.
pub fn g1_qrt(
    params: &EmitterParams,
    rabi: f64,
    detuning: f64,
    tau: &[f64],
) -> Result<CorrelationFunction> {
    validate_inputs(params, rabi, tau)?;
    let delta = params.detuning_offset + detuning;
    let ss = steady_state(params, rabi, detuning);
    let values = if ss.rho_ee > 0.0 {
        let gen = generator(params, rabi, delta, ss.rho_ge.conj());
        let y0 = Vector4::new(
            Complex64::new(ss.rho_ee, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        );
        regress(&gen, y0, tau)
            .into_iter()
            .map(|y| y[0] / ss.rho_ee)
            .collect()
    } else {
        // Undriven limit: free decay of the coherence.
        let p = Complex64::new(params.coherence_decay(), -delta);
        tau.iter().map(|&t| (-p * t).exp()).collect()
    };
    CorrelationFunction::first_order(tau.to_vec(), values, params.gamma)
}

/// Normalized intensity correlation `⟨σ†(0)σ†σ(τ)σ(0)⟩/ρ_ee²` of the CW
/// steady state.
pub fn g2_qrt(
    params: &EmitterParams,
    rabi: f64,
    detuning: f64,
    tau: &[f64],
) -> Result<CorrelationFunction> {
    validate_inputs(params, rabi, tau)?;
    let delta = params.detuning_offset + detuning;
    let ss = steady_state(params, rabi, detuning);
    if !(ss.rho_ee > 0.0) {
        return Err(Error::Undefined("g2 of an undriven emitter"));
    }
    let gen = generator(params, rabi, delta, Complex64::new(ss.rho_ee, 0.0));
    let zero = Complex64::new(0.0, 0.0);
    let y0 = Vector4::new(zero, zero, zero, Complex64::new(1.0, 0.0));
    let norm = ss.rho_ee * ss.rho_ee;
    let values = regress(&gen, y0, tau)
        .into_iter()
        .map(|y| (y[2].re / norm).max(0.0))
        .collect();
    CorrelationFunction::second_order(tau.to_vec(), values, params.gamma)
}

/// Emission spectrum from a first-order correlation on a uniform grid
/// starting at τ = 0.
///
/// The plateau of g¹ becomes the elastic weight and the remainder
/// `g¹ − plateau` is transformed as `S(ν) = 2 Re ∫₀^∞ c(τ) e^{i2πντ} dτ`
/// (trapezoid weights, zero padded). Frequencies are relative to the laser
/// carrier; elastic weight plus continuum integral equals `g¹(0) = 1`.
pub fn emission_spectrum(g1: &CorrelationFunction) -> Result<Spectrum> {
    if g1.kind() != CorrelationKind::FirstOrder {
        return Err(Error::param(
            "g1",
            "emission spectrum needs a first-order correlation",
        ));
    }
    let tau = g1.tau();
    let n = tau.len();
    if n < 4 {
        return Err(Error::Empty("g1 needs at least four delays"));
    }
    if tau[0] != 0.0 {
        return Err(Error::param("g1", "tau grid must start at zero"));
    }
    let dt = tau[1] - tau[0];
    if tau
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt)
    {
        return Err(Error::param("g1", "tau grid must be uniform"));
    }
    let required = MIN_TAU_RANGE / g1.decay_rate();
    let actual = tau[n - 1];
    if actual < required * (1.0 - 1e-9) {
        return Err(Error::TauRangeTooShort { required, actual });
    }
    let plateau = g1.plateau();
    let len = (4 * n).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (k, v) in g1.values().iter().enumerate() {
        let w = if k == 0 { 0.5 } else { 1.0 };
        buf[k] = (*v - plateau) * (w * dt);
    }
    FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
    let df = 1.0 / (len as f64 * dt);
    let half = len / 2;
    let mut freq = Vec::with_capacity(len);
    let mut power = Vec::with_capacity(len);
    for j in 0..len {
        let k = (j + half) % len;
        let signed = if k >= half {
            k as f64 - len as f64
        } else {
            k as f64
        };
        freq.push(signed * df);
        power.push((2.0 * buf[k].re).max(0.0));
    }
    Spectrum::new(freq, power, plateau.norm().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qd() -> EmitterParams {
        EmitterParams::from_lifetime(0.65e-9).unwrap()
    }

    fn uniform(step: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 * step).collect()
    }

    #[test]
    fn g2_starts_at_zero_and_ends_at_one() {
        let p = qd();
        let tau = uniform(20e-12, 2000);
        let g2 = g2_qrt(&p, p.rabi_for_saturation(1.0), 0.0, &tau).unwrap();
        assert_eq!(g2.real()[0], 0.0);
        assert!((g2.real()[1999] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn weak_drive_g2_closed_form() {
        let p = qd();
        let tau = uniform(10e-12, 1000);
        let g2 = g2_qrt(&p, p.rabi_for_saturation(1e-6), 0.0, &tau).unwrap();
        for (t, v) in tau.iter().zip(g2.real()) {
            let e = 1.0 - (-0.5 * p.gamma * t).exp();
            assert!((v - e * e).abs() < 1e-4, "tau {t}: {v} vs {}", e * e);
        }
    }

    #[test]
    fn g1_starts_at_one_and_plateaus_at_coherent_fraction() {
        let p = qd();
        let tau = uniform(20e-12, 2000);
        for &s in &[0.01, 0.1, 1.0] {
            let g1 = g1_qrt(&p, p.rabi_for_saturation(s), 0.0, &tau).unwrap();
            assert!((g1.values()[0] - 1.0).norm() < 1e-12);
            assert!((g1.plateau().norm() - 1.0 / (1.0 + s)).abs() < 1e-6);
            assert!(g1.values().iter().all(|v| v.norm() <= 1.0 + 1e-9));
        }
    }

    #[test]
    fn strong_drive_plateau_vanishes() {
        let p = qd();
        let tau = uniform(5e-12, 8000);
        let g1 = g1_qrt(&p, p.rabi_for_saturation(1e3), 0.0, &tau).unwrap();
        assert!(g1.plateau().norm() < 1e-3);
    }

    #[test]
    fn empty_grid_rejected() {
        let p = qd();
        assert!(matches!(g2_qrt(&p, 1e8, 0.0, &[]), Err(Error::Empty(_))));
        assert!(matches!(g1_qrt(&p, 1e8, 0.0, &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn spectrum_sum_rule_and_elastic_share() {
        let p = qd();
        let tau = uniform(10e-12, 3000);
        let s = 0.05;
        let g1 = g1_qrt(&p, p.rabi_for_saturation(s), 0.0, &tau).unwrap();
        let spec = emission_spectrum(&g1).unwrap();
        assert!((spec.total() - 1.0).abs() < 1e-4, "total {}", spec.total());
        assert!(spec.elastic_weight() >= 0.9);
    }

    #[test]
    fn short_tau_range_reports_requirement() {
        let p = qd();
        let tau = uniform(10e-12, 100);
        let g1 = g1_qrt(&p, 1e8, 0.0, &tau).unwrap();
        match emission_spectrum(&g1) {
            Err(Error::TauRangeTooShort { required, .. }) => {
                assert!((required - 20.0 * 0.65e-9).abs() < 1e-18)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mollow_sidebands_at_rabi_frequency() {
        let p = qd();
        let rabi = 50.0 * p.gamma;
        let step = 1.0 / (40.0 * rabi / std::f64::consts::TAU);
        let n = (40.0 / p.gamma / step).ceil() as usize;
        let g1 = g1_qrt(&p, rabi, 0.0, &uniform(step, n)).unwrap();
        let spec = emission_spectrum(&g1).unwrap();
        let f_rabi = rabi / std::f64::consts::TAU;
        for sign in [-1.0, 1.0] {
            let peak = spec.peak_index(sign * f_rabi, 0.3 * f_rabi);
            assert!(
                (spec.freq()[peak] - sign * f_rabi).abs() <= spec.bin_width(),
                "{} {} {}",
                spec.freq()[peak],
                f_rabi,
                spec.bin_width()
            );
        }
    }

    #[test]
    fn undriven_continuum_vanishes() {
        let p = qd();
        let tau = uniform(10e-12, 3000);
        let g1 = g1_qrt(&p, 1e-3, 0.0, &tau).unwrap();
        let spec = emission_spectrum(&g1).unwrap();
        assert!(spec.integral() < 1e-9);
    }
}
