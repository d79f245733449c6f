//! Two-level emitter: parameters, steady state, Bloch-equation dynamics and
//! quantum-regression correlation functions.
//!
//! Everything is written in the frame rotating at the laser carrier. With
//! `Δ = ω_L − ω_0` the total detuning is `detuning_offset` plus whatever the
//! drive or caller adds, and the coherence `⟨σ⟩` obeys
//!
//! ```text
//! d⟨σ⟩/dt  = −(γ₂ − iΔ)⟨σ⟩ − i(Ω/2)(1 − 2ρ_ee)
//! dρ_ee/dt = −Γρ_ee − Im(Ω*⟨σ⟩)
//! ```
//!
//! with `γ₂ = Γ/2 + γ_φ`.

mod bloch;
mod qrt;

pub use bloch::{max_grid_step, periodic_steady_state, solve_bloch, PeriodicResponse};
pub use qrt::{
    emission_spectrum, g1_qrt, g2_qrt, CorrelationFunction, CorrelationKind, PLATEAU_FRACTION,
};

use crate::error::{ensure, Error, Result};
use num_complex::Complex64;

/// Ornstein-Uhlenbeck wandering of the transition frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralDiffusion {
    /// Stationary RMS detuning, rad/s.
    pub rms_detuning: f64,
    /// Correlation time, s.
    pub correlation_time: f64,
}

impl SpectralDiffusion {
    pub fn new(rms_detuning: f64, correlation_time: f64) -> Result<Self> {
        let d = SpectralDiffusion {
            rms_detuning,
            correlation_time,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.rms_detuning >= 0.0, "rms_detuning", || {
            "must be non-negative".into()
        })?;
        ensure(
            self.correlation_time > 0.0 && self.correlation_time.is_finite(),
            "correlation_time",
            || "must be positive and finite".into(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmitterParams {
    /// Radiative decay rate Γ, rad/s.
    pub gamma: f64,
    /// Extra coherence decay γ_φ, rad/s.
    pub pure_dephasing: f64,
    /// Static laser-transition detuning, rad/s.
    pub detuning_offset: f64,
    /// Optical transition frequency in Hz. Metadata only.
    pub transition_freq: f64,
    pub diffusion: Option<SpectralDiffusion>,
}

impl EmitterParams {
    /// Transform-limited emitter with radiative rate `gamma` (rad/s).
    pub fn new(gamma: f64) -> Result<Self> {
        let p = EmitterParams {
            gamma,
            pure_dephasing: 0.0,
            detuning_offset: 0.0,
            transition_freq: 0.0,
            diffusion: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_lifetime(t1: f64) -> Result<Self> {
        ensure(t1 > 0.0 && t1.is_finite(), "t1_lifetime", || {
            format!("must be positive and finite, got {t1}")
        })?;
        Self::new(1.0 / t1)
    }

    pub fn with_pure_dephasing(mut self, rate: f64) -> Result<Self> {
        self.pure_dephasing = rate;
        self.validate()?;
        Ok(self)
    }

    pub fn with_detuning(mut self, detuning: f64) -> Result<Self> {
        self.detuning_offset = detuning;
        self.validate()?;
        Ok(self)
    }

    pub fn with_transition_freq(mut self, freq: f64) -> Self {
        self.transition_freq = freq;
        self
    }

    pub fn with_diffusion(mut self, diffusion: SpectralDiffusion) -> Result<Self> {
        diffusion.validate()?;
        self.diffusion = Some(diffusion);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.gamma > 0.0 && self.gamma.is_finite(), "gamma", || {
            format!("must be positive and finite, got {}", self.gamma)
        })?;
        ensure(
            self.pure_dephasing >= 0.0 && self.pure_dephasing.is_finite(),
            "pure_dephasing",
            || "must be non-negative and finite".into(),
        )?;
        ensure(self.detuning_offset.is_finite(), "detuning_offset", || {
            "must be finite".into()
        })?;
        if let Some(d) = &self.diffusion {
            d.validate()?;
        }
        Ok(())
    }

    /// Excited-state lifetime `1/Γ`, s.
    pub fn t1_lifetime(&self) -> f64 {
        1.0 / self.gamma
    }

    /// Coherence decay rate `γ₂ = Γ/2 + γ_φ`.
    pub fn coherence_decay(&self) -> f64 {
        0.5 * self.gamma + self.pure_dephasing
    }

    /// Decay rate of `|⟨σ⟩|²` after the drive is switched off, `Γ + 2γ_φ`.
    pub fn scattered_intensity_decay(&self) -> f64 {
        2.0 * self.coherence_decay()
    }

    /// Saturation parameter `s = |Ω|²γ₂ / (Γ(γ₂² + Δ²))` at total detuning
    /// `detuning`. Equals `2Ω²/Γ²` on resonance without dephasing.
    pub fn saturation(&self, rabi: f64, detuning: f64) -> f64 {
        let g2 = self.coherence_decay();
        rabi * rabi * g2 / (self.gamma * (g2 * g2 + detuning * detuning))
    }

    /// Resonant Rabi frequency giving saturation `s` (no dephasing assumed in
    /// the name only; the general formula is inverted).
    pub fn rabi_for_saturation(&self, s: f64) -> f64 {
        let g2 = self.coherence_decay();
        let d = self.detuning_offset;
        (s * self.gamma * (g2 * g2 + d * d) / g2).sqrt()
    }
}

/// Single-time density-matrix elements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochState {
    pub rho_ee: f64,
    /// `⟨σ⟩ = ρ_eg` in the laser frame.
    pub rho_ge: Complex64,
}

impl BlochState {
    pub const GROUND: BlochState = BlochState {
        rho_ee: 0.0,
        rho_ge: Complex64 { re: 0.0, im: 0.0 },
    };
    pub const EXCITED: BlochState = BlochState {
        rho_ee: 1.0,
        rho_ge: Complex64 { re: 0.0, im: 0.0 },
    };

    /// Population in `[0, 1]` and `|ρ_ge|² ≤ ρ_ee(1 − ρ_ee)`, both up to `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.rho_ee >= -tol
            && self.rho_ee <= 1.0 + tol
            && self.rho_ge.norm_sqr() <= self.rho_ee * (1.0 - self.rho_ee) + tol
    }
}

/// Closed-form steady state for a constant real Rabi frequency `rabi` at
/// extra detuning `detuning` (added to `params.detuning_offset`).
pub fn steady_state(params: &EmitterParams, rabi: f64, detuning: f64) -> BlochState {
    let delta = params.detuning_offset + detuning;
    let g2 = params.coherence_decay();
    let a = rabi * rabi * g2 / (2.0 * (g2 * g2 + delta * delta));
    let rho_ee = a / (params.gamma + 2.0 * a);
    let rho_ge =
        Complex64::new(0.0, -0.5 * rabi) * (1.0 - 2.0 * rho_ee) / Complex64::new(g2, -delta);
    BlochState { rho_ee, rho_ge }
}

/// Elastic share `|⟨σ⟩|²/ρ_ee` of the scattered intensity.
pub fn coherent_fraction(state: &BlochState) -> Result<f64> {
    if !(state.rho_ee > 0.0) {
        return Err(Error::Undefined(
            "coherent fraction of an unexcited emitter",
        ));
    }
    Ok((state.rho_ge.norm_sqr() / state.rho_ee).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qd() -> EmitterParams {
        EmitterParams::from_lifetime(0.65e-9).unwrap()
    }

    #[test]
    fn lifetime_and_rate_are_reciprocal() {
        let p = qd();
        assert!((p.t1_lifetime() * p.gamma - 1.0).abs() < 1e-15);
        assert!((p.t1_lifetime() - 0.65e-9).abs() < 1e-24);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(EmitterParams::new(0.0).is_err());
        assert!(EmitterParams::new(-1.0).is_err());
        assert!(qd().with_pure_dephasing(-1.0).is_err());
        assert!(SpectralDiffusion::new(1.0, 0.0).is_err());
    }

    #[test]
    fn zero_drive_is_ground_state() {
        assert_eq!(steady_state(&qd(), 0.0, 0.0), BlochState::GROUND);
    }

    #[test]
    fn unit_saturation_quarter_population() {
        let p = qd();
        let st = steady_state(&p, p.gamma / 2f64.sqrt(), 0.0);
        assert!((st.rho_ee - 0.25).abs() < 1e-12);
        assert!((coherent_fraction(&st).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn strong_drive_saturates() {
        let p = qd();
        let st = steady_state(&p, p.rabi_for_saturation(1e3), 0.0);
        assert!((st.rho_ee - 0.5).abs() < 1e-3);
    }

    #[test]
    fn ninety_percent_elastic_at_one_ninth() {
        let p = qd();
        let st = steady_state(&p, p.rabi_for_saturation(1.0 / 9.0), 0.0);
        assert!((coherent_fraction(&st).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn weak_drive_is_almost_all_elastic() {
        let p = qd();
        let st = steady_state(&p, p.rabi_for_saturation(1e-3), 0.0);
        assert!(coherent_fraction(&st).unwrap() >= 0.999);
    }

    #[test]
    fn coherent_fraction_of_ground_is_undefined() {
        assert!(matches!(
            coherent_fraction(&BlochState::GROUND),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn detuned_steady_state_is_physical() {
        let p = qd().with_pure_dephasing(3e8).unwrap();
        for &d in &[-5e9, -1e9, 0.0, 2e9] {
            for &r in &[1e7, 1e9, 1e10] {
                assert!(steady_state(&p, r, d).is_physical(1e-12));
            }
        }
    }
}
