//! Scenario runner for `heitler-core`: strict TOML scenarios, a pipeline
//! that calls the core modules, and CSV/SVG/JSON export.

pub mod error;
pub mod export;
pub mod pipeline;
pub mod scenario;
pub mod svg;

use error::Result;
use std::path::{Path, PathBuf};

/// Scenarios shipped with the binary, by file stem.
pub const BUNDLED: &[(&str, &str)] = &[
    ("fig1b", include_str!("../scenarios/fig1b.toml")),
    ("fig2", include_str!("../scenarios/fig2.toml")),
    ("fig2-cs", include_str!("../scenarios/fig2-cs.toml")),
    ("fig3", include_str!("../scenarios/fig3.toml")),
];

/// Bundled scenarios reproducing one figure.
pub fn figure(name: &str) -> Option<Vec<&'static str>> {
    let stems: &[&str] = match name {
        "fig1b" => &["fig1b"],
        "fig2" => &["fig2", "fig2-cs"],
        "fig3" => &["fig3"],
        _ => return None,
    };
    Some(
        stems
            .iter()
            .map(|s| BUNDLED.iter().find(|(n, _)| n == s).expect("bundled").1)
            .collect(),
    )
}

/// Output root: explicit flag, then `HEITLER_LAB_OUT`, then `./out`.
pub fn output_root(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os("HEITLER_LAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Run a parsed scenario and write its artifacts to `<root>/<name>`.
pub fn run_to_dir(s: &scenario::Scenario, root: &Path) -> Result<(PathBuf, export::Report)> {
    let report = pipeline::run(s)?;
    let files = report.render(&s.name)?;
    let dir = root.join(&s.name);
    export::write_dir(&dir, &files)?;
    Ok((dir, report))
}
