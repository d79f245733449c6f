use heitler_core::io::{write_ptt1, TagStreams};
use heitler_core::photon::PhotonRecord;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_heitler-lab");

const PULSED: &str = r#"
name = "small-pulsed"
seeds = [3, 4]
outputs = ["g2_histogram", "time_tags"]

[emitter]
lifetime_ps = 650

[waveform]
kind = "pulse_train"
pulse_width_ps = 500
rep_rate_mhz = 300
coherent_fraction = 0.9

[stream]
duration_ms = 0.5

[detection]
efficiency = 0.8
background_cps = 1000
jitter_fwhm_ps = 600
bin_width_ps = 162
sideband_loss = 0.12
window_ns = 25
"#;

const WEAK: &str = r#"
name = "weak"
seeds = []
outputs = ["heitler_spectrum", "population"]

[emitter]
lifetime_ps = 650

[waveform]
kind = "sine_am"
mod_freq_mhz = 200
depth = 0.5
rabi_over_gamma = 0.05
duration_ns = 200
"#;

fn run(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut c = Command::new(BIN);
    c.args(args).env_remove("HEITLER_LAB_OUT");
    if let Some(p) = env_out {
        c.env("HEITLER_LAB_OUT", p);
    }
    c.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn malformed_scenario_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let bad = write(
        tmp.path(),
        "bad.toml",
        "name = \"x\"\nseeds = [\noutputs = 3\n",
    );
    let o = run(&["run", &bad, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn unknown_key_is_named() {
    let tmp = tempfile::tempdir().unwrap();
    let s = write(
        tmp.path(),
        "s.toml",
        &WEAK.replace("depth = 0.5", "depth = 0.5\ndepht = 0.5"),
    );
    let o = run(&["validate", &s], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("depht"), "{}", stderr(&o));
}

#[test]
fn physics_failure_exits_3_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let s = write(
        tmp.path(),
        "s.toml",
        &WEAK.replace("rabi_over_gamma = 0.05", "rabi_over_gamma = 1.0"),
    );
    let o = run(&["run", &s, "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("linear response"), "{}", stderr(&o));
    assert!(!out.join("weak").exists());
}

#[test]
fn missing_scenario_is_io_error() {
    let o = run(&["validate", "/nonexistent/scenario.toml"], None);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("/nonexistent/scenario.toml"));
}

#[test]
fn bundled_scenarios_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let o = run(&["validate", p.to_str().unwrap()], None);
        assert!(o.status.success(), "{}: {}", p.display(), stderr(&o));
    }
}

#[test]
fn reruns_are_byte_identical_and_artifacts_are_complete() {
    let tmp = tempfile::tempdir().unwrap();
    let s = write(tmp.path(), "s.toml", WEAK);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for d in [&a, &b] {
        let o = run(&["run", &s, "--out", d.to_str().unwrap()], None);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (a, b) = (a.join("weak"), b.join("weak"));
    for f in [
        "laser_spectrum.csv",
        "qd_spectrum.csv",
        "population.csv",
        "summary.json",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let csv = std::fs::read_to_string(a.join("qd_spectrum.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("freq_hz,power"));
    let svg = std::fs::read_to_string(a.join("heitler_spectrum.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains("<!-- scenario: weak -->"));
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenario"], "weak");
    let names: Vec<&str> = summary["quantities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|q| q["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"sideband_transfer_upper"));
    let files = summary["files"].as_array().unwrap();
    assert_eq!(files.len(), std::fs::read_dir(&a).unwrap().count());
}

#[test]
fn env_var_sets_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let s = write(tmp.path(), "s.toml", WEAK);
    let root = tmp.path().join("from-env");
    let o = run(&["run", &s], Some(&root));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(root.join("weak").join("summary.json").exists());
    let flag = tmp.path().join("from-flag");
    let o = run(&["run", &s, "--out", flag.to_str().unwrap()], Some(&root));
    assert!(o.status.success());
    assert!(flag.join("weak").join("summary.json").exists());
}

#[test]
fn exported_time_tags_import_and_correlate() {
    let tmp = tempfile::tempdir().unwrap();
    let s = write(tmp.path(), "s.toml", PULSED);
    let out = tmp.path().join("out");
    let o = run(&["run", &s, "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let tags = out.join("small-pulsed").join("time_tags.ptt1");
    let o = run(&["import-tags", tags.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("2 channel(s)"));

    let corr = tmp.path().join("corr");
    let o = run(
        &[
            "correlate",
            tags.to_str().unwrap(),
            "--channels",
            "0,1",
            "--out",
            corr.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let ours = std::fs::read_to_string(corr.join("time_tags-correlation").join("g2_histogram.csv"))
        .unwrap();
    let pipeline =
        std::fs::read_to_string(out.join("small-pulsed").join("g2_histogram.csv")).unwrap();
    assert_eq!(ours, pipeline);
}

fn ptt1(records: Vec<PhotonRecord>) -> Vec<u8> {
    let mut bytes = Vec::new();
    write_ptt1(&mut bytes, &TagStreams::new(records).unwrap()).unwrap();
    bytes
}

#[test]
fn truncated_ptt1_reports_record_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut bytes = ptt1(
        (0..10)
            .map(|k| PhotonRecord::new(100 * k, (k % 2) as u8))
            .collect(),
    );
    bytes.truncate(bytes.len() - 12);
    let p = tmp.path().join("t.ptt1");
    std::fs::write(&p, bytes).unwrap();
    let o = run(&["import-tags", p.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("header declares 10 records, found 8"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn csv_out_of_order_row_is_cited() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(
        tmp.path(),
        "t.csv",
        "timestamp_ps,channel\n10,0\n5,1\n20,0\n15,0\n",
    );
    let o = run(&["import-tags", &p], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("row 5"), "{}", stderr(&o));
}

#[test]
fn csv_and_ptt1_imports_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let records: Vec<PhotonRecord> = (0..50)
        .map(|k| PhotonRecord::new(37 * k, (k % 3) as u8))
        .collect();
    let bin = tmp.path().join("t.ptt1");
    std::fs::write(&bin, ptt1(records.clone())).unwrap();
    let mut text = String::from("timestamp_ps,channel\n");
    for r in &records {
        text.push_str(&format!("{},{}\n", r.timestamp_ps, r.channel));
    }
    let csv = write(tmp.path(), "t.csv", &text);
    let a = run(&["import-tags", bin.to_str().unwrap()], None);
    let b = run(&["import-tags", &csv, "--format", "csv"], None);
    let strip = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .skip(1)
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert!(a.status.success() && b.status.success());
    assert_eq!(strip(&a), strip(&b));
    assert!(strip(&a).contains("channel 2: 16"));
}

#[test]
fn version_and_reproduce_names() {
    let o = run(&["version"], None);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("heitler-lab "));
    let o = run(&["reproduce", "fig9"], None);
    assert_eq!(o.status.code(), Some(2));
}
