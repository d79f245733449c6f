//! Time-tag and waveform file formats.
//!
//! PTT1 layout (little-endian):
//!
//! | offset | type    | field          |
//! |--------|---------|----------------|
//! | 0      | [u8; 4] | magic `PTT1`   |
//! | 4      | u16     | version (1)    |
//! | 6      | u16     | channel count  |
//! | 8      | u32     | resolution, ps (1) |
//! | 12     | u64     | record count   |
//! | 20     | ...     | records: u64 timestamp_ps, u8 channel |
//!
//! PWF1 layout: magic `PWF1`, u32 version, f64 sample rate, f64 carrier
//! detuning, f64 max modulation frequency, u64 sample count, then interleaved
//! f64 real/imaginary Rabi samples.

use crate::error::{Error, Result};
use crate::photon::{first_out_of_order, PhotonRecord};
use crate::waveform::DriveWaveform;
use num_complex::Complex64;
use std::io::{BufRead, Read, Write};

pub const PTT1_MAGIC: &[u8; 4] = b"PTT1";
pub const PTT1_VERSION: u16 = 1;
pub const PTT1_HEADER_LEN: usize = 20;
pub const PTT1_RECORD_LEN: usize = 9;
pub const PWF1_MAGIC: &[u8; 4] = b"PWF1";
pub const PWF1_VERSION: u32 = 1;

pub const TAGS_CSV_HEADER: &str = "timestamp_ps,channel";
pub const WAVEFORM_CSV_HEADER: &str = "time_s,re_field,im_field";

fn format_err(location: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Format {
        location: location.into(),
        reason: reason.into(),
    }
}

/// Records of a time-tag file, in file order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagStreams {
    pub channel_count: u16,
    pub records: Vec<PhotonRecord>,
}

impl TagStreams {
    /// Build from records, requiring per-channel monotonic timestamps.
    pub fn new(records: Vec<PhotonRecord>) -> Result<Self> {
        if let Some(i) = first_out_of_order(&records) {
            return Err(format_err(
                format!("record {i}"),
                "timestamp decreases within channel",
            ));
        }
        let channel_count = records
            .iter()
            .map(|r| r.channel as u16 + 1)
            .max()
            .unwrap_or(0);
        Ok(TagStreams {
            channel_count,
            records,
        })
    }

    /// Sorted records of one channel.
    pub fn channel(&self, channel: u8) -> Vec<PhotonRecord> {
        self.records
            .iter()
            .copied()
            .filter(|r| r.channel == channel)
            .collect()
    }
}

pub fn write_ptt1<W: Write>(mut w: W, streams: &TagStreams) -> Result<()> {
    w.write_all(PTT1_MAGIC)?;
    w.write_all(&PTT1_VERSION.to_le_bytes())?;
    w.write_all(&streams.channel_count.to_le_bytes())?;
    w.write_all(&1u32.to_le_bytes())?;
    w.write_all(&(streams.records.len() as u64).to_le_bytes())?;
    for r in &streams.records {
        w.write_all(&r.timestamp_ps.to_le_bytes())?;
        w.write_all(&[r.channel])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ptt1<R: Read>(mut r: R) -> Result<TagStreams> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    parse_ptt1(&bytes)
}

pub fn parse_ptt1(bytes: &[u8]) -> Result<TagStreams> {
    if bytes.len() < PTT1_HEADER_LEN {
        return Err(format_err(
            format!("byte {}", bytes.len()),
            format!(
                "header needs {PTT1_HEADER_LEN} bytes, file has {}",
                bytes.len()
            ),
        ));
    }
    if &bytes[0..4] != PTT1_MAGIC {
        return Err(format_err(
            "byte 0",
            format!("bad magic {:?}", &bytes[0..4]),
        ));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != PTT1_VERSION {
        return Err(format_err(
            "byte 4",
            format!("unsupported version {version}"),
        ));
    }
    let channel_count = u16::from_le_bytes([bytes[6], bytes[7]]);
    let resolution = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if resolution != 1 {
        return Err(format_err(
            "byte 8",
            format!("resolution must be 1 ps, got {resolution}"),
        ));
    }
    let expected = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let body = &bytes[PTT1_HEADER_LEN..];
    let found = (body.len() / PTT1_RECORD_LEN) as u64;
    if found < expected || (found == expected && !body.len().is_multiple_of(PTT1_RECORD_LEN)) {
        return Err(format_err(
            format!("byte {}", bytes.len()),
            format!("truncated: header declares {expected} records, found {found}"),
        ));
    }
    if body.len() != expected as usize * PTT1_RECORD_LEN {
        return Err(format_err(
            format!(
                "byte {}",
                PTT1_HEADER_LEN + expected as usize * PTT1_RECORD_LEN
            ),
            format!("trailing data after {expected} records"),
        ));
    }
    let mut records = Vec::with_capacity(expected as usize);
    let mut last = vec![None::<u64>; channel_count as usize];
    for (i, chunk) in body.chunks_exact(PTT1_RECORD_LEN).enumerate() {
        let offset = PTT1_HEADER_LEN + i * PTT1_RECORD_LEN;
        let ts = u64::from_le_bytes(chunk[0..8].try_into().unwrap());
        let ch = chunk[8];
        let slot = last.get_mut(ch as usize).ok_or_else(|| {
            format_err(
                format!("byte {}", offset + 8),
                format!("channel {ch} outside declared count {channel_count}"),
            )
        })?;
        if matches!(*slot, Some(prev) if ts < prev) {
            return Err(format_err(
                format!("byte {offset}"),
                format!("channel {ch} timestamp {ts} ps decreases"),
            ));
        }
        *slot = Some(ts);
        records.push(PhotonRecord::new(ts, ch));
    }
    Ok(TagStreams {
        channel_count,
        records,
    })
}

pub fn write_tags_csv<W: Write>(mut w: W, records: &[PhotonRecord]) -> Result<()> {
    writeln!(w, "{TAGS_CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{},{}", r.timestamp_ps, r.channel)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows are numbered from 1 with the header as row 1.
pub fn read_tags_csv<R: BufRead>(r: R) -> Result<TagStreams> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != TAGS_CSV_HEADER {
        return Err(format_err(
            "row 1",
            format!("expected header `{TAGS_CSV_HEADER}`"),
        ));
    }
    let mut records = Vec::new();
    let mut last = [None::<u64>; 256];
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(ts), Some(ch), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(format_err(format!("row {row}"), "expected two fields"));
        };
        let ts: u64 = ts
            .trim()
            .parse()
            .map_err(|e| format_err(format!("row {row}"), format!("timestamp_ps: {e}")))?;
        let ch: u8 = ch
            .trim()
            .parse()
            .map_err(|e| format_err(format!("row {row}"), format!("channel: {e}")))?;
        let slot = &mut last[ch as usize];
        if matches!(*slot, Some(prev) if ts < prev) {
            return Err(format_err(
                format!("row {row}"),
                format!("channel {ch} timestamp {ts} ps is out of order"),
            ));
        }
        *slot = Some(ts);
        records.push(PhotonRecord::new(ts, ch));
    }
    TagStreams::new(records)
}

pub fn write_waveform_binary<W: Write>(mut w: W, drive: &DriveWaveform) -> Result<()> {
    w.write_all(PWF1_MAGIC)?;
    w.write_all(&PWF1_VERSION.to_le_bytes())?;
    for v in [
        drive.sample_rate(),
        drive.carrier_detuning(),
        drive.max_modulation_freq(),
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&(drive.len() as u64).to_le_bytes())?;
    for s in drive.samples() {
        w.write_all(&s.re.to_le_bytes())?;
        w.write_all(&s.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_waveform_binary<R: Read>(mut r: R) -> Result<DriveWaveform> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    const HEADER: usize = 40;
    if bytes.len() < HEADER {
        return Err(format_err(
            format!("byte {}", bytes.len()),
            "waveform header truncated",
        ));
    }
    if &bytes[0..4] != PWF1_MAGIC {
        return Err(format_err("byte 0", "bad magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != PWF1_VERSION {
        return Err(format_err(
            "byte 4",
            format!("unsupported version {version}"),
        ));
    }
    let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (fs, carrier, fmax) = (f(8), f(16), f(24));
    let n = u64::from_le_bytes(bytes[32..40].try_into().unwrap()) as usize;
    let found = (bytes.len() - HEADER) / 16;
    if found != n || !(bytes.len() - HEADER).is_multiple_of(16) {
        return Err(format_err(
            format!("byte {}", bytes.len()),
            format!("header declares {n} samples, found {found}"),
        ));
    }
    let samples = (0..n)
        .map(|k| Complex64::new(f(HEADER + 16 * k), f(HEADER + 16 * k + 8)))
        .collect();
    DriveWaveform::new(samples, fs, carrier, fmax)
}

pub fn write_waveform_csv<W: Write>(mut w: W, drive: &DriveWaveform) -> Result<()> {
    writeln!(w, "{WAVEFORM_CSV_HEADER}")?;
    for (k, s) in drive.samples().iter().enumerate() {
        writeln!(w, "{:e},{:e},{:e}", drive.time(k), s.re, s.im)?;
    }
    w.flush()?;
    Ok(())
}

/// The sample rate is inferred from the first two rows; the time column must
/// be uniform to 1e-6 of a step.
pub fn read_waveform_csv<R: BufRead>(
    r: R,
    carrier_detuning: f64,
    max_mod_freq: f64,
) -> Result<DriveWaveform> {
    let mut lines = r.lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim() != WAVEFORM_CSV_HEADER {
        return Err(format_err(
            "row 1",
            format!("expected header `{WAVEFORM_CSV_HEADER}`"),
        ));
    }
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format_err(format!("row {row}"), e.to_string()))?;
        if v.len() != 3 {
            return Err(format_err(format!("row {row}"), "expected three fields"));
        }
        times.push(v[0]);
        samples.push(Complex64::new(v[1], v[2]));
    }
    if times.len() < 2 {
        return Err(format_err("row 2", "need at least two samples"));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(format_err("row 3", "time must increase"));
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-6 * dt {
            return Err(format_err(
                format!("row {}", i + 3),
                "non-uniform time step",
            ));
        }
    }
    DriveWaveform::new(samples, 1.0 / dt, carrier_detuning, max_mod_freq)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TagStreams {
        TagStreams::new(vec![
            PhotonRecord::new(5, 0),
            PhotonRecord::new(3, 1),
            PhotonRecord::new(9, 0),
            PhotonRecord::new(3, 1),
        ])
        .unwrap()
    }

    #[test]
    fn ptt1_round_trip() {
        let s = sample();
        let mut buf = Vec::new();
        write_ptt1(&mut buf, &s).unwrap();
        assert_eq!(buf.len(), PTT1_HEADER_LEN + 4 * PTT1_RECORD_LEN);
        assert_eq!(read_ptt1(&buf[..]).unwrap(), s);
    }

    #[test]
    fn truncated_ptt1_names_counts() {
        let mut buf = Vec::new();
        write_ptt1(&mut buf, &sample()).unwrap();
        buf.truncate(buf.len() - 5);
        let msg = read_ptt1(&buf[..]).unwrap_err().to_string();
        assert!(
            msg.contains("4 records") && msg.contains("found 3"),
            "{msg}"
        );
    }

    #[test]
    fn bad_magic_reports_offset() {
        let mut buf = Vec::new();
        write_ptt1(&mut buf, &sample()).unwrap();
        buf[0] = b'X';
        assert!(read_ptt1(&buf[..])
            .unwrap_err()
            .to_string()
            .contains("byte 0"));
    }

    #[test]
    fn non_monotonic_channel_reports_byte_offset() {
        let s = TagStreams {
            channel_count: 1,
            records: vec![PhotonRecord::new(10, 0), PhotonRecord::new(4, 0)],
        };
        let mut buf = Vec::new();
        write_ptt1(&mut buf, &s).unwrap();
        let msg = read_ptt1(&buf[..]).unwrap_err().to_string();
        assert!(
            msg.contains(&format!("byte {}", PTT1_HEADER_LEN + PTT1_RECORD_LEN)),
            "{msg}"
        );
    }

    #[test]
    fn csv_round_trip_and_row_errors() {
        let s = sample();
        let mut buf = Vec::new();
        write_tags_csv(&mut buf, &s.records).unwrap();
        assert_eq!(read_tags_csv(&buf[..]).unwrap(), s);
        let bad = "timestamp_ps,channel\n10,0\n20,0\n15,0\n";
        let msg = read_tags_csv(bad.as_bytes()).unwrap_err().to_string();
        assert!(msg.contains("row 4"), "{msg}");
    }

    #[test]
    fn waveform_round_trips() {
        let d = DriveWaveform::new(
            vec![
                Complex64::new(1e8, -2e7),
                Complex64::new(0.5, 0.25),
                Complex64::new(0.0, 3.0),
            ],
            20e9,
            1e6,
            2e8,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_waveform_binary(&mut buf, &d).unwrap();
        assert_eq!(read_waveform_binary(&buf[..]).unwrap(), d);
        let mut csv = Vec::new();
        write_waveform_csv(&mut csv, &d).unwrap();
        let back = read_waveform_csv(&csv[..], 1e6, 2e8).unwrap();
        assert_eq!(back.samples(), d.samples());
        assert!((back.sample_rate() / d.sample_rate() - 1.0).abs() < 1e-9);
    }
}
