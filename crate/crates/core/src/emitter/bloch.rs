use super::{BlochState, EmitterParams};
use crate::error::{Error, Result};
use crate::ode::{DormandPrince, Tolerance};
use crate::waveform::DriveWaveform;
use num_complex::Complex64;

/// Coarsest report-grid spacing accepted by [`solve_bloch`]: a twentieth of
/// the fastest time scale, `1/(20 max(Γ, Ω_max))`.
pub fn max_grid_step(params: &EmitterParams, drive: &DriveWaveform) -> f64 {
    1.0 / (20.0 * params.gamma.max(drive.max_rabi()))
}

/// Integrate the Bloch equations under `drive` and report the state at every
/// time in `grid` (seconds, strictly increasing, starting at or after 0).
///
/// Integration starts at `t = 0` from `initial`. The drive is piecewise
/// constant per sample and zero outside `[0, duration)`; the integrator is
/// restarted at every sample boundary so no step straddles a discontinuity.
/// Spectral diffusion is not applied here; this is the deterministic
/// evolution at the static detuning.
pub fn solve_bloch(
    params: &EmitterParams,
    drive: &DriveWaveform,
    grid: &[f64],
    initial: BlochState,
) -> Result<Vec<BlochState>> {
    params.validate()?;
    if let Some(index) = drive.first_non_finite() {
        return Err(Error::NonFiniteDrive { index });
    }
    if grid.is_empty() {
        return Err(Error::Empty("time grid"));
    }
    if !(grid[0] >= 0.0) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param(
            "grid",
            "times must be non-negative and strictly increasing",
        ));
    }
    if !initial.is_physical(1e-12) {
        return Err(Error::param(
            "initial",
            "initial state is not a physical density matrix",
        ));
    }
    let required = max_grid_step(params, drive);
    let actual = grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if actual > required {
        return Err(Error::StepTooLarge { required, actual });
    }

    let delta = params.detuning_offset + drive.carrier_detuning();
    let g2 = params.coherence_decay();
    let gamma = params.gamma;
    let fs = drive.sample_rate();
    let samples = drive.samples();
    let mut dp = DormandPrince::<3>::new(Tolerance::default());
    let mut y = [initial.rho_ge.re, initial.rho_ge.im, initial.rho_ee];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(grid.len());

    for &target in grid {
        while t < target {
            let k = (t * fs * (1.0 + 1e-12)).floor();
            let boundary = if k < samples.len() as f64 {
                (k + 1.0) / fs
            } else {
                f64::INFINITY
            };
            let end = target.min(boundary);
            let omega = if (k as usize) < samples.len() {
                samples[k as usize]
            } else {
                Complex64::new(0.0, 0.0)
            };
            let rhs = move |_t: f64, y: &[f64; 3]| bloch_rhs(y, omega, delta, g2, gamma);
            y = dp.integrate(&rhs, t, end, y);
            t = end;
        }
        out.push(BlochState {
            rho_ee: y[2],
            rho_ge: Complex64::new(y[0], y[1]),
        });
    }
    Ok(out)
}

/// Time-integrated response over one period of a periodically repeated drive,
/// once the emitter has settled into its periodic steady state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicResponse {
    /// Expected photon emissions per period, `Γ ∫ρ_ee dt`.
    pub emissions_per_period: f64,
    /// Elastic share `∫|⟨σ⟩|² dt / ∫ρ_ee dt`.
    pub coherent_fraction: f64,
    /// State at the start of each period.
    pub state: BlochState,
}

/// Periodic steady state under `drive` repeated with `period`.
///
/// Samples starting at or after `period` are ignored; if the period is longer
/// than the drive the gap is undriven.
pub fn periodic_steady_state(
    params: &EmitterParams,
    drive: &DriveWaveform,
    period: f64,
) -> Result<PeriodicResponse> {
    params.validate()?;
    if let Some(index) = drive.first_non_finite() {
        return Err(Error::NonFiniteDrive { index });
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::param("period", "must be positive and finite"));
    }
    let delta = params.detuning_offset + drive.carrier_detuning();
    let g2 = params.coherence_decay();
    let gamma = params.gamma;
    let fs = drive.sample_rate();
    let mut pieces: Vec<(f64, f64, Complex64)> = Vec::new();
    for (k, &omega) in drive.samples().iter().enumerate() {
        let a = k as f64 / fs;
        if a >= period {
            break;
        }
        pieces.push((a, ((k + 1) as f64 / fs).min(period), omega));
    }
    let covered = pieces.last().map_or(0.0, |p| p.1);
    if covered < period {
        pieces.push((covered, period, Complex64::new(0.0, 0.0)));
    }

    let mut dp = DormandPrince::<5>::new(Tolerance {
        rtol: 1e-10,
        atol: 1e-14,
    });
    let mut state = [0.0; 3];
    for _ in 0..1000 {
        let mut y = [state[0], state[1], state[2], 0.0, 0.0];
        for &(a, b, omega) in &pieces {
            let rhs = move |_t: f64, y: &[f64; 5]| {
                let d = bloch_rhs(&[y[0], y[1], y[2]], omega, delta, g2, gamma);
                [d[0], d[1], d[2], y[2], y[0] * y[0] + y[1] * y[1]]
            };
            y = dp.integrate(&rhs, a, b, y);
        }
        let change = (y[0] - state[0]).abs() + (y[1] - state[1]).abs() + (y[2] - state[2]).abs();
        state = [y[0], y[1], y[2]];
        if change < 1e-13 {
            let coherent_fraction = if y[3] > 0.0 {
                (y[4] / y[3]).clamp(0.0, 1.0)
            } else {
                1.0
            };
            return Ok(PeriodicResponse {
                emissions_per_period: gamma * y[3],
                coherent_fraction,
                state: BlochState {
                    rho_ee: state[2],
                    rho_ge: Complex64::new(state[0], state[1]),
                },
            });
        }
    }
    Err(Error::Undefined("periodic steady state did not converge"))
}

#[inline]
fn bloch_rhs(y: &[f64; 3], omega: Complex64, delta: f64, g2: f64, gamma: f64) -> [f64; 3] {
    let sigma = Complex64::new(y[0], y[1]);
    let rho = y[2];
    let d_sigma =
        -Complex64::new(g2, -delta) * sigma - Complex64::new(0.0, 0.5) * omega * (1.0 - 2.0 * rho);
    let d_rho = -gamma * rho - (omega.conj() * sigma).im;
    [d_sigma.re, d_sigma.im, d_rho]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emitter::steady_state;
    use crate::waveform::DriveWaveform;

    fn qd() -> EmitterParams {
        EmitterParams::from_lifetime(0.65e-9).unwrap()
    }

    fn grid(step: f64, end: f64) -> Vec<f64> {
        let n = (end / step).round() as usize;
        (0..=n).map(|i| i as f64 * step).collect()
    }

    #[test]
    fn free_decay_reaches_one_over_e() {
        let p = qd();
        let drive = DriveWaveform::cw(0.0, 2e-9, 20e9).unwrap();
        let out = solve_bloch(&p, &drive, &[p.t1_lifetime()], BlochState::EXCITED).unwrap();
        assert!((out[0].rho_ee - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn undriven_ground_state_stays_put() {
        let p = qd();
        let drive = DriveWaveform::cw(0.0, 2e-9, 20e9).unwrap();
        let out = solve_bloch(&p, &drive, &grid(10e-12, 2e-9), BlochState::GROUND).unwrap();
        assert!(out.iter().all(|s| *s == BlochState::GROUND));
    }

    #[test]
    fn resonant_cw_approaches_quarter() {
        let p = qd();
        let rabi = p.gamma / 2f64.sqrt();
        let drive = DriveWaveform::cw(rabi, 40e-9, 20e9).unwrap();
        let out = solve_bloch(&p, &drive, &[39e-9], BlochState::GROUND).unwrap();
        assert!((out[0].rho_ee - 0.25).abs() < 1e-6);
        let ss = steady_state(&p, rabi, 0.0);
        assert!((out[0].rho_ge - ss.rho_ge).norm() < 1e-8);
    }

    #[test]
    fn coarse_grid_is_rejected_with_required_step() {
        let p = qd();
        let drive = DriveWaveform::cw(p.gamma, 2e-9, 20e9).unwrap();
        match solve_bloch(&p, &drive, &[0.0, 1e-9], BlochState::GROUND) {
            Err(Error::StepTooLarge { required, actual }) => {
                assert!((required - 1.0 / (20.0 * p.gamma)).abs() < 1e-20);
                assert_eq!(actual, 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn periodic_cw_matches_steady_state() {
        let p = qd();
        let rabi = 0.3 * p.gamma;
        let drive = DriveWaveform::cw(rabi, 2e-9, 20e9).unwrap();
        let r = periodic_steady_state(&p, &drive, 2e-9).unwrap();
        let ss = steady_state(&p, rabi, 0.0);
        assert!((r.emissions_per_period - p.gamma * ss.rho_ee * 2e-9).abs() < 1e-8);
        let cf = ss.rho_ge.norm_sqr() / ss.rho_ee;
        assert!((r.coherent_fraction - cf).abs() < 1e-8);
    }

    #[test]
    fn non_finite_drive_is_rejected() {
        let p = qd();
        let mut s = vec![Complex64::new(1e8, 0.0); 10];
        s[4] = Complex64::new(f64::NAN, 0.0);
        let drive = DriveWaveform::new(s, 20e9, 0.0, 0.0).unwrap();
        assert!(matches!(
            solve_bloch(&p, &drive, &[1e-10], BlochState::GROUND),
            Err(Error::NonFiniteDrive { index: 4 })
        ));
    }
}
