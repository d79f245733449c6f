//! In-memory artifacts and their serialization to an output directory.

use crate::error::{CliError, Result};
use crate::svg;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One CSV column; the name carries the unit.
#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

impl Column {
    pub fn new(name: &str, values: impl IntoIterator<Item = f64>) -> Self {
        Column {
            name: name.into(),
            values: values.into_iter().map(Some).collect(),
        }
    }

    /// Column in which `None` marks a masked entry, written as an empty field.
    pub fn sparse(name: &str, values: Vec<Option<f64>>) -> Self {
        Column {
            name: name.into(),
            values,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file: String,
    pub columns: Vec<Column>,
}

impl Table {
    pub fn new(file: &str, columns: Vec<Column>) -> Self {
        Table {
            file: file.into(),
            columns,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        let rows = self
            .columns
            .iter()
            .map(|c| c.values.len())
            .max()
            .unwrap_or(0);
        for i in 0..rows {
            for (j, c) in self.columns.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                if let Some(Some(v)) = c.values.get(i) {
                    write_number(&mut out, *v);
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip representation; integers without exponent.
fn write_number(out: &mut String, v: f64) {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        let _ = write!(out, "{}", v as i64);
    } else {
        let _ = write!(out, "{v:e}");
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub unit: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub tool_version: String,
    pub quantities: Vec<Quantity>,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub tables: Vec<Table>,
    pub plots: Vec<svg::Plot>,
    pub binaries: Vec<(String, Vec<u8>)>,
    pub quantities: Vec<Quantity>,
}

impl Report {
    pub fn quantity(&mut self, name: &str, value: f64, sigma: Option<f64>, unit: &str) {
        self.quantities.push(Quantity {
            name: name.into(),
            value,
            sigma,
            unit: unit.into(),
        });
    }

    /// All files of the report with their contents, in a fixed order;
    /// `summary.json` comes last.
    pub fn render(&self, scenario: &str) -> Result<Vec<(String, Vec<u8>)>> {
        let mut files: Vec<(String, Vec<u8>)> = Vec::new();
        for t in &self.tables {
            files.push((t.file.clone(), t.to_csv().into_bytes()));
        }
        for p in &self.plots {
            files.push((p.file.clone(), p.render(scenario).into_bytes()));
        }
        files.extend(self.binaries.iter().cloned());
        let mut names: Vec<String> = files.iter().map(|f| f.0.clone()).collect();
        names.push("summary.json".into());
        for q in &self.quantities {
            if !q.value.is_finite() || q.sigma.is_some_and(|s| !s.is_finite()) {
                return Err(CliError::Validation(format!(
                    "summary quantity `{}` is not finite",
                    q.name
                )));
            }
        }
        let summary = Summary {
            scenario: scenario.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            quantities: self.quantities.clone(),
            files: names,
        };
        let mut json = serde_json::to_string_pretty(&summary).expect("summary is serializable");
        json.push('\n');
        files.push(("summary.json".into(), json.into_bytes()));
        Ok(files)
    }
}

/// Write `files` into `dir`, replacing it as a whole. Files are first written
/// to a sibling staging directory so a failure leaves no partial output.
pub fn write_dir(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<()> {
    if files.is_empty() {
        return Ok(());
    }
    let parent = dir
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    let leaf = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let staging: PathBuf = parent.join(format!(".{leaf}.staging-{}", std::process::id()));
    if staging.exists() {
        std::fs::remove_dir_all(&staging).map_err(|e| CliError::io(&staging, e))?;
    }
    std::fs::create_dir(&staging).map_err(|e| CliError::io(&staging, e))?;
    let result = (|| {
        for (name, bytes) in files {
            let p = staging.join(name);
            std::fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
        }
        if dir.exists() {
            std::fs::remove_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::rename(&staging, dir).map_err(|e| CliError::io(dir, e))
    })();
    if result.is_err() {
        let _ = std::fs::remove_dir_all(&staging);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_blank_masked_fields() {
        let t = Table::new(
            "x.csv",
            vec![
                Column::new("tau_s", [0.0, 1.5e-10]),
                Column::sparse("delta", vec![None, Some(-0.25)]),
            ],
        );
        assert_eq!(t.to_csv(), "tau_s,delta\n0,\n1.5e-10,-2.5e-1\n");
    }

    #[test]
    fn empty_report_writes_only_summary() {
        let files = Report::default().render("s").unwrap();
        assert_eq!(files.len(), 1);
        assert_eq!(files[0].0, "summary.json");
    }

    #[test]
    fn nothing_to_write_is_success() {
        let dir = std::env::temp_dir().join("heitler-lab-never-created");
        write_dir(&dir, &[]).unwrap();
        assert!(!dir.exists());
    }
}
