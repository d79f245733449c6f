//! Start-stop coincidence histograms of picosecond time-tag streams.

use crate::error::{ensure, Error, Result};
use crate::exec::Execution;
use crate::photon::{PhotonRecord, PS_PER_S};

/// Records of `a` per parallel work item.
const CHUNK: usize = 1 << 14;

/// Histogram of delays `t_b − t_a`, with bins centred at integer multiples of
/// the bin width.
#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceHistogram {
    bin_width_ps: u64,
    half_bins: usize,
    counts: Vec<u64>,
    normalization: f64,
}

impl CoincidenceHistogram {
    /// Build from raw counts; `counts.len()` must be odd (bins `−K..=K`).
    pub fn from_counts(bin_width_ps: u64, counts: Vec<u64>) -> Result<Self> {
        ensure(bin_width_ps > 0, "bin_width", || {
            "must be at least 1 ps".into()
        })?;
        ensure(counts.len() % 2 == 1, "counts", || {
            "need an odd number of bins centred on zero".into()
        })?;
        let half_bins = counts.len() / 2;
        let normalization = long_delay_mean(&counts, half_bins);
        Ok(CoincidenceHistogram {
            bin_width_ps,
            half_bins,
            counts,
            normalization,
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width_ps as f64 / PS_PER_S
    }

    pub fn bin_width_ps(&self) -> u64 {
        self.bin_width_ps
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Bin centres, s.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|i| self.center(i)).collect()
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 - self.half_bins as f64) * self.bin_width()
    }

    /// Largest covered |τ| (outer edge of the last bin), s.
    pub fn half_span(&self) -> f64 {
        (self.half_bins as f64 + 0.5) * self.bin_width()
    }

    /// Mean count over bins with `|τ| ≥ window/2`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Counts divided by the long-delay mean.
    pub fn normalized(&self) -> Vec<f64> {
        let n = self.normalization;
        self.counts
            .iter()
            .map(|&c| if n > 0.0 { c as f64 / n } else { 0.0 })
            .collect()
    }

    /// Poisson standard error of [`normalized`](Self::normalized).
    pub fn normalized_sigma(&self) -> Vec<f64> {
        let n = self.normalization;
        self.counts
            .iter()
            .map(|&c| if n > 0.0 { (c as f64).sqrt() / n } else { 0.0 })
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Sum of `values` weighted by the overlap of each bin with `[lo, hi)`
    /// (seconds), counting partially covered bins fractionally.
    pub fn weighted_area(&self, values: &[f64], lo: f64, hi: f64) -> f64 {
        let w = self.bin_width();
        values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let c = self.center(i);
                let overlap = (hi.min(c + 0.5 * w) - lo.max(c - 0.5 * w)).max(0.0) / w;
                v * overlap
            })
            .sum()
    }

    /// Raw coincidences in `[lo, hi)` with fractional edge bins.
    pub fn area(&self, lo: f64, hi: f64) -> f64 {
        let c: Vec<f64> = self.counts.iter().map(|&c| c as f64).collect();
        self.weighted_area(&c, lo, hi)
    }

    pub fn same_grid(&self, other: &CoincidenceHistogram) -> bool {
        self.bin_width_ps == other.bin_width_ps && self.half_bins == other.half_bins
    }
}

fn long_delay_mean(counts: &[u64], half_bins: usize) -> f64 {
    let cut = half_bins as f64 / 2.0;
    let mut sum = 0u64;
    let mut n = 0u64;
    for (i, &c) in counts.iter().enumerate() {
        let k = (i as f64 - half_bins as f64).abs();
        if k >= cut {
            sum += c;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

/// Histogram all delays `t_b − t_a` with `|τ| ≤ window` into bins of
/// `bin_width` (both in seconds, rounded to whole picoseconds).
///
/// Both streams must be sorted by timestamp. Identical slices give the
/// autocorrelation including the trivial zero-delay self pairs, so for HBT
/// style measurements pass two distinct detector streams.
pub fn correlate_g2(
    a: &[PhotonRecord],
    b: &[PhotonRecord],
    bin_width: f64,
    window: f64,
    execution: Execution,
) -> Result<CoincidenceHistogram> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("photon stream"));
    }
    ensure(bin_width > 0.0, "bin_width", || "must be positive".into())?;
    ensure(window >= bin_width, "window", || {
        "must be at least one bin".into()
    })?;
    if let Some(i) = a
        .windows(2)
        .position(|w| w[1].timestamp_ps < w[0].timestamp_ps)
    {
        return Err(Error::param(
            "records_a",
            format!("not sorted at index {}", i + 1),
        ));
    }
    if let Some(i) = b
        .windows(2)
        .position(|w| w[1].timestamp_ps < w[0].timestamp_ps)
    {
        return Err(Error::param(
            "records_b",
            format!("not sorted at index {}", i + 1),
        ));
    }
    let w = (bin_width * PS_PER_S).round().max(1.0) as i64;
    let half_bins = ((window * PS_PER_S) / w as f64).floor() as i64;
    let reach = half_bins * w + w / 2;
    let n_bins = (2 * half_bins + 1) as usize;
    let chunks = a.len().div_ceil(CHUNK);
    let partial = execution.map(chunks, |c| {
        let mut counts = vec![0u64; n_bins];
        let slice = &a[c * CHUNK..((c + 1) * CHUNK).min(a.len())];
        let first = slice[0].timestamp_ps as i64;
        let mut start = b.partition_point(|r| (r.timestamp_ps as i64) < first - reach);
        for ra in slice {
            let ta = ra.timestamp_ps as i64;
            while start < b.len() && (b[start].timestamp_ps as i64) < ta - reach {
                start += 1;
            }
            for rb in &b[start..] {
                let d = rb.timestamp_ps as i64 - ta;
                if d > reach {
                    break;
                }
                let k = (d + w / 2).div_euclid(w);
                if k.abs() <= half_bins {
                    counts[(k + half_bins) as usize] += 1;
                }
            }
        }
        counts
    });
    let mut counts = vec![0u64; n_bins];
    for p in partial {
        for (t, v) in counts.iter_mut().zip(p) {
            *t += v;
        }
    }
    CoincidenceHistogram::from_counts(w as u64, counts)
}

/// Areas of the coincidence peaks of a pulsed measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakAreas {
    /// `(n, W_n)`: raw counts in `[nP − P/2, nP + P/2)`.
    pub windows: Vec<(i64, f64)>,
    /// Mean window area over `|n| ≥ 2`.
    pub side_mean: f64,
    /// Raw central window area `W_0`.
    pub central: f64,
    /// Mean of `W_{-1}` and `W_1`, reported separately because emitter
    /// memory between pulses can make it differ from the far peaks.
    pub neighbour_mean: f64,
    /// `central / side_mean`.
    pub ratio: f64,
    /// Poisson standard error of `ratio`.
    pub ratio_sigma: f64,
}

/// Integrate the central and side peaks of a pulsed coincidence histogram.
///
/// Each window spans one period centred on `nP`. The reference area is the
/// mean over `|n| ≥ 2`; the `n = ±1` windows are excluded because residual
/// emitter coherence from the previous pulse changes their weight. No spill
/// correction is applied to the central window.
pub fn pulsed_peak_areas(hist: &CoincidenceHistogram, period: f64) -> Result<PeakAreas> {
    ensure(period > 0.0, "period", || "must be positive".into())?;
    let n_max = ((hist.half_span() - 0.5 * period) / period).floor() as i64;
    if n_max < 2 {
        return Err(Error::param(
            "window",
            format!(
                "histogram covers ±{:.3e} s but needs ±{:.3e} s for two side peaks",
                hist.half_span(),
                2.5 * period
            ),
        ));
    }
    let windows: Vec<(i64, f64)> = (-n_max..=n_max)
        .map(|n| {
            let c = n as f64 * period;
            (n, hist.area(c - 0.5 * period, c + 0.5 * period))
        })
        .collect();
    let side: Vec<f64> = windows
        .iter()
        .filter(|(n, _)| n.abs() >= 2)
        .map(|w| w.1)
        .collect();
    let m = side.len() as f64;
    let side_mean = side.iter().sum::<f64>() / m;
    if !(side_mean > 0.0) {
        return Err(Error::Undefined("side peaks are empty"));
    }
    let get = |n: i64| windows.iter().find(|w| w.0 == n).map_or(0.0, |w| w.1);
    let (w0, wm, wp) = (get(0), get(-1), get(1));
    let central = w0;
    let ratio = central / side_mean;
    // Poisson counts in W_0 and in the M side windows.
    let var = w0 / (side_mean * side_mean) + w0 * w0 / side_mean.powi(4) * (side_mean / m);
    Ok(PeakAreas {
        windows,
        side_mean,
        central,
        neighbour_mean: 0.5 * (wm + wp),
        ratio,
        ratio_sigma: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recs(ts: &[u64]) -> Vec<PhotonRecord> {
        ts.iter().map(|&t| PhotonRecord::new(t, 0)).collect()
    }

    #[test]
    fn single_pair_lands_in_the_right_bin() {
        let a = recs(&[1000]);
        let b = recs(&[1000 + 330]);
        let h = correlate_g2(&a, &b, 162e-12, 1e-9, Execution::Sequential).unwrap();
        assert_eq!(h.len(), 2 * 6 + 1);
        let i = h.counts().iter().position(|&c| c == 1).unwrap();
        assert!((h.center(i) - 324e-12).abs() < 1e-15);
        assert_eq!(h.total(), 1);
    }

    #[test]
    fn negative_delays_and_bin_edges() {
        // Bins are half-open, [c - w/2, c + w/2).
        let a = recs(&[500]);
        let b = recs(&[200, 419, 581]);
        let h = correlate_g2(&a, &b, 162e-12, 500e-12, Execution::Sequential).unwrap();
        let c = h.counts();
        let mid = h.len() / 2;
        assert_eq!(c[mid], 1);
        assert_eq!(c[mid + 1], 1);
        assert_eq!(c[mid - 2], 1);
        assert_eq!(h.total(), 3);
    }

    #[test]
    fn empty_stream_rejected() {
        assert!(matches!(
            correlate_g2(&[], &recs(&[1]), 1e-12, 1e-9, Execution::Sequential),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn unsorted_stream_rejected() {
        let a = recs(&[5, 3]);
        assert!(correlate_g2(&a, &a, 1e-12, 1e-9, Execution::Sequential).is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        let a = recs(
            &(0..100_000u64)
                .map(|i| i * 977 % 1_000_003 + i * 1000)
                .collect::<Vec<_>>(),
        );
        let mut a = a;
        a.sort();
        let b: Vec<PhotonRecord> = a
            .iter()
            .map(|r| PhotonRecord::new(r.timestamp_ps + 37, 1))
            .collect();
        let s = correlate_g2(&a, &b, 162e-12, 20e-9, Execution::Sequential).unwrap();
        let p = correlate_g2(&a, &b, 162e-12, 20e-9, Execution::Parallel).unwrap();
        assert_eq!(s, p);
    }

    #[test]
    fn fractional_area() {
        let h = CoincidenceHistogram::from_counts(100, vec![10, 10, 10, 10, 10]).unwrap();
        // Bins centred at -200..200 ps, each 100 ps wide.
        assert!((h.area(-100e-12, 100e-12) - 20.0).abs() < 1e-9);
        assert!((h.area(-1e-9, 1e-9) - 50.0).abs() < 1e-9);
    }

    #[test]
    fn peak_areas_of_synthetic_comb() {
        // Period 10 bins of 100 ps; central peak 5% of side peaks.
        let half = 50usize;
        let mut counts = vec![0u64; 2 * half + 1];
        for n in -5i64..=5 {
            let centre = (half as i64 + 10 * n) as usize;
            counts[centre] = if n == 0 { 50 } else { 1000 };
        }
        let h = CoincidenceHistogram::from_counts(100, counts).unwrap();
        let a = pulsed_peak_areas(&h, 1e-9).unwrap();
        assert!((a.side_mean - 1000.0).abs() < 1e-9);
        assert!((a.ratio - 0.05).abs() < 1e-12);
        assert!(a.ratio_sigma > 0.0);
    }

    #[test]
    fn neighbour_deficit_does_not_bias_ratio() {
        let half = 50usize;
        let mut counts = vec![0u64; 2 * half + 1];
        for n in -5i64..=5 {
            let centre = (half as i64 + 10 * n) as usize;
            counts[centre] = match n.abs() {
                0 => 100,
                1 => 840,
                _ => 1000,
            };
        }
        let h = CoincidenceHistogram::from_counts(100, counts).unwrap();
        let a = pulsed_peak_areas(&h, 1e-9).unwrap();
        assert!((a.ratio - 0.1).abs() < 1e-12, "{}", a.ratio);
        assert!((a.neighbour_mean - 840.0).abs() < 1e-9);
    }
}
