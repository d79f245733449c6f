//! Frequency-domain intensities on a uniform grid, plus the Fabry-Perot style
//! instrument response.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Spectral density on a uniform frequency grid (Hz, relative to the laser
/// carrier), with a delta-like elastic component reported separately.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    freq: Vec<f64>,
    power: Vec<f64>,
    elastic_weight: f64,
}

impl Spectrum {
    /// `freq` must be uniform and strictly increasing; `power` non-negative.
    pub fn new(freq: Vec<f64>, power: Vec<f64>, elastic_weight: f64) -> Result<Self> {
        if freq.len() < 2 {
            return Err(Error::Empty("spectrum needs at least two grid points"));
        }
        if freq.len() != power.len() {
            return Err(Error::GridMismatch(format!(
                "{} frequencies vs {} power values",
                freq.len(),
                power.len()
            )));
        }
        let df = freq[1] - freq[0];
        if !(df > 0.0) {
            return Err(Error::param("freq", "grid must be strictly increasing"));
        }
        let uniform = freq
            .windows(2)
            .all(|w| ((w[1] - w[0]) - df).abs() <= 1e-6 * df);
        if !uniform {
            return Err(Error::param("freq", "grid must be uniform"));
        }
        if power.iter().any(|p| !(*p >= 0.0)) || !(elastic_weight >= 0.0) {
            return Err(Error::param(
                "power",
                "spectral power must be finite and non-negative",
            ));
        }
        Ok(Spectrum {
            freq,
            power,
            elastic_weight,
        })
    }

    pub fn freq(&self) -> &[f64] {
        &self.freq
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn elastic_weight(&self) -> f64 {
        self.elastic_weight
    }

    pub fn bin_width(&self) -> f64 {
        (self.freq[self.freq.len() - 1] - self.freq[0]) / (self.freq.len() - 1) as f64
    }

    pub fn span(&self) -> f64 {
        self.bin_width() * self.freq.len() as f64
    }

    /// Rectangle-rule integral of the continuum.
    pub fn integral(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.bin_width()
    }

    /// Continuum integral plus elastic weight.
    pub fn total(&self) -> f64 {
        self.integral() + self.elastic_weight
    }

    /// Grid index closest to `f`.
    pub fn index_of(&self, f: f64) -> usize {
        let i = ((f - self.freq[0]) / self.bin_width()).round();
        i.clamp(0.0, (self.freq.len() - 1) as f64) as usize
    }

    /// Index of the largest bin within `f ± half_width`.
    pub fn peak_index(&self, f: f64, half_width: f64) -> usize {
        let lo = self.index_of(f - half_width);
        let hi = self.index_of(f + half_width);
        (lo..=hi)
            .max_by(|&a, &b| self.power[a].total_cmp(&self.power[b]))
            .unwrap_or(lo)
    }

    /// Continuum integrated over the bins within `f ± half_width`.
    pub fn band_power(&self, f: f64, half_width: f64) -> f64 {
        let lo = self.index_of(f - half_width);
        let hi = self.index_of(f + half_width);
        self.power[lo..=hi].iter().sum::<f64>() * self.bin_width()
    }

    /// Full width at half maximum of the peak at bin `peak`, with linear
    /// interpolation of the half-maximum crossings.
    pub fn fwhm_at(&self, peak: usize) -> Option<f64> {
        let half = self.power[peak] / 2.0;
        let df = self.bin_width();
        let mut right = None;
        for i in peak..self.power.len() - 1 {
            if self.power[i + 1] <= half {
                let frac = (self.power[i] - half) / (self.power[i] - self.power[i + 1]);
                right = Some(self.freq[i] + frac * df);
                break;
            }
        }
        let mut left = None;
        for i in (1..=peak).rev() {
            if self.power[i - 1] <= half {
                let frac = (self.power[i] - half) / (self.power[i] - self.power[i - 1]);
                left = Some(self.freq[i] - frac * df);
                break;
            }
        }
        Some(right? - left?)
    }
}

/// Convolve with a unit-area Lorentzian of the given FWHM (Hz).
///
/// The kernel is integrated over each bin and applied circularly on the grid,
/// so total power is conserved exactly. The elastic delta becomes a Lorentzian
/// line centred on the bin nearest zero frequency and the returned spectrum has
/// zero elastic weight.
pub fn apply_instrument_response(spectrum: &Spectrum, resolution_fwhm: f64) -> Result<Spectrum> {
    if !(resolution_fwhm > 0.0) {
        return Err(Error::param("resolution_fwhm", "must be positive"));
    }
    let span = spectrum.span();
    if resolution_fwhm > span {
        return Err(Error::ResolutionTooCoarse {
            resolution: resolution_fwhm,
            span,
        });
    }
    let n = spectrum.freq.len();
    let df = spectrum.bin_width();
    let hwhm = resolution_fwhm / 2.0;

    // Circular kernel indexed by bin offset.
    let mut kernel: Vec<f64> = (0..n)
        .map(|k| {
            let offset = if k <= n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            };
            let f = offset * df;
            (((f + df / 2.0) / hwhm).atan() - ((f - df / 2.0) / hwhm).atan()) / std::f64::consts::PI
        })
        .collect();
    let norm: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= norm);

    let mut input: Vec<Complex64> = spectrum
        .power
        .iter()
        .map(|&p| Complex64::new(p, 0.0))
        .collect();
    if spectrum.elastic_weight > 0.0 {
        let i0 = spectrum.index_of(0.0);
        input[i0].re += spectrum.elastic_weight / df;
    }
    let mut kern: Vec<Complex64> = kernel.iter().map(|&k| Complex64::new(k, 0.0)).collect();

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    fwd.process(&mut input);
    fwd.process(&mut kern);
    for (a, b) in input.iter_mut().zip(&kern) {
        *a *= b;
    }
    inv.process(&mut input);
    let power = input.iter().map(|c| (c.re / n as f64).max(0.0)).collect();
    Spectrum::new(spectrum.freq.clone(), power, 0.0)
}
