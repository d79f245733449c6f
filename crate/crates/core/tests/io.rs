use heitler_core::io::*;
use heitler_core::photon::PhotonRecord;
use heitler_core::waveform::DriveWaveform;
use heitler_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

/// Records with per-channel non-decreasing timestamps, interleaved in time.
fn records_strategy() -> impl Strategy<Value = Vec<PhotonRecord>> {
    proptest::collection::vec((0u64..1_000_000, 0u8..4), 0..300).prop_map(|mut v| {
        v.sort_unstable();
        v.into_iter()
            .map(|(t, c)| PhotonRecord::new(t, c))
            .collect()
    })
}

fn ptt1_bytes(streams: &TagStreams) -> Vec<u8> {
    let mut buf = Vec::new();
    write_ptt1(&mut buf, streams).unwrap();
    buf
}

fn location(e: Error) -> String {
    match e {
        Error::Format { location, .. } => location,
        other => panic!("expected a format error, got {other}"),
    }
}

#[test]
fn unsorted_channel_is_located() {
    let mut buf = ptt1_bytes(
        &TagStreams::new(vec![PhotonRecord::new(5, 0), PhotonRecord::new(9, 0)]).unwrap(),
    );
    // Overwrite the second timestamp with a smaller one.
    let off = PTT1_HEADER_LEN + PTT1_RECORD_LEN;
    buf[off..off + 8].copy_from_slice(&1u64.to_le_bytes());
    assert_eq!(
        location(parse_ptt1(&buf).unwrap_err()),
        format!("byte {off}")
    );
}

#[test]
fn csv_errors_name_the_row() {
    let text = "timestamp_ps,channel\n10,0\n20,x\n";
    assert_eq!(
        location(read_tags_csv(text.as_bytes()).unwrap_err()),
        "row 3"
    );
    let text = "wrong,header\n10,0\n";
    assert_eq!(
        location(read_tags_csv(text.as_bytes()).unwrap_err()),
        "row 1"
    );
    let text = "timestamp_ps,channel\n10,0\n5,0\n";
    assert!(read_tags_csv(text.as_bytes()).is_err());
}

#[test]
fn waveform_csv_requires_uniform_time() {
    let text = "time_s,re_field,im_field\n0,1,0\n1e-10,1,0\n3e-10,1,0\n";
    assert!(read_waveform_csv(text.as_bytes(), 0.0, 1e9).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ptt1_round_trips(records in records_strategy()) {
        let streams = TagStreams::new(records).unwrap();
        let back = parse_ptt1(&ptt1_bytes(&streams)).unwrap();
        prop_assert_eq!(&back, &streams);
        let back = read_ptt1(ptt1_bytes(&streams).as_slice()).unwrap();
        prop_assert_eq!(back, streams);
    }

    #[test]
    fn truncation_is_always_reported(records in records_strategy(), cut in 1usize..64) {
        prop_assume!(!records.is_empty());
        let n = records.len();
        let bytes = ptt1_bytes(&TagStreams::new(records).unwrap());
        let keep = bytes.len().saturating_sub(cut).max(PTT1_HEADER_LEN);
        prop_assume!(keep < bytes.len());
        let err = parse_ptt1(&bytes[..keep]).unwrap_err().to_string();
        let found = (keep - PTT1_HEADER_LEN) / PTT1_RECORD_LEN;
        let expected = format!("header declares {n} records, found {found}");
        prop_assert!(err.contains(&expected), "{}", err);
    }

    #[test]
    fn tags_csv_round_trips(records in records_strategy()) {
        let mut buf = Vec::new();
        write_tags_csv(&mut buf, &records).unwrap();
        let back = read_tags_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.records, records);
    }

    #[test]
    fn waveforms_round_trip(
        amps in proptest::collection::vec((-1e10f64..1e10, -1e10f64..1e10), 2..200),
        fs in 1e9f64..1e11,
    ) {
        let samples: Vec<Complex64> = amps.iter().map(|(r, i)| Complex64::new(*r, *i)).collect();
        let d = DriveWaveform::new(samples, fs, 1e8, 2e8).unwrap();
        let mut bin = Vec::new();
        write_waveform_binary(&mut bin, &d).unwrap();
        prop_assert_eq!(read_waveform_binary(bin.as_slice()).unwrap(), d.clone());

        let mut csv = Vec::new();
        write_waveform_csv(&mut csv, &d).unwrap();
        let back = read_waveform_csv(csv.as_slice(), 1e8, 2e8).unwrap();
        prop_assert_eq!(back.samples(), d.samples());
        prop_assert!((back.sample_rate() / fs - 1.0).abs() < 1e-9);
    }
}
