//! Numerical laboratory for coherent (Heitler-regime) photon scattering from a
//! driven two-level emitter.
//!
//! The crate is organised by measurement chain:
//!
//! * [`emitter`]: optical Bloch equations, steady states, quantum-regression
//!   correlation functions and emission spectra.
//! * [`waveform`]: synthesized excitation fields and their weak-drive
//!   (linear response) scattered field.
//! * [`photon`]: Monte Carlo quantum trajectories, detection-chain model and
//!   coincidence correlation of time-tag streams.
//! * [`heterodyne`]: balanced beat-note simulation, FFT spectra, Gaussian line
//!   fitting and mutual-coherence extraction.
//! * [`hom`]: unbalanced Mach-Zehnder two-photon interference, normalized
//!   difference curves and contrast.
//! * [`io`]: time-tag and waveform file formats.
//!
//! Heavy loops (trajectory ensembles, correlators, zoomed DFTs, trace
//! generation) run on rayon when the `parallel` feature is enabled. Every
//! parallel path reduces in a fixed order, so results are bit-identical to the
//! sequential fallback selected with [`Execution::Sequential`].

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod emitter;
pub mod error;
pub mod exec;
pub mod heterodyne;
pub mod hom;
pub mod io;
mod ode;
pub mod photon;
pub mod spectrum;
pub mod waveform;

pub use error::{Error, Result};
pub use exec::Execution;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of a frequency given in Hz.
#[inline]
pub fn angular(freq_hz: f64) -> f64 {
    std::f64::consts::TAU * freq_hz
}
