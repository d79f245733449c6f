use clap::{Parser, Subcommand, ValueEnum};
use heitler_core::correlation::correlate_g2;
use heitler_core::io::{parse_ptt1, read_tags_csv, TagStreams};
use heitler_core::Execution;
use heitler_lab::error::{CliError, Result, Stage};
use heitler_lab::export::{write_dir, Column, Report, Table};
use heitler_lab::svg::{Curve, Plot};
use heitler_lab::{figure, output_root, run_to_dir, scenario};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "heitler-lab",
    version,
    about = "Simulate coherent photon scattering scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its outputs to <out>/<name>.
    Run {
        scenario: PathBuf,
        /// Output root; overrides HEITLER_LAB_OUT.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario without running it.
    Validate { scenario: PathBuf },
    /// Read a time-tag file and report per-channel counts.
    ImportTags {
        path: PathBuf,
        /// File format; inferred from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<TagFormat>,
    },
    /// Cross-correlate two channels of a time-tag file.
    Correlate {
        tags: PathBuf,
        #[arg(long, value_enum)]
        format: Option<TagFormat>,
        /// Start and stop channels, e.g. `0,1`.
        #[arg(long, value_delimiter = ',', default_values_t = [0u8, 1u8])]
        channels: Vec<u8>,
        #[arg(long, default_value_t = 162.0)]
        bin_width_ps: f64,
        #[arg(long, default_value_t = 25.0)]
        window_ns: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the bundled scenarios for one figure.
    Reproduce {
        #[arg(value_parser = ["fig1b", "fig2", "fig3"])]
        figure: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the tool version.
    Version,
}

#[derive(Clone, Copy, ValueEnum)]
enum TagFormat {
    Ptt1,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("heitler-lab: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { scenario, out } => {
            let s = scenario::load(&scenario)?;
            run_and_print(&s, &output_root(out.as_deref()))
        }
        Command::Validate { scenario } => {
            let s = scenario::load(&scenario)?;
            println!("{}: ok ({} output(s))", s.name, s.outputs.len());
            Ok(())
        }
        Command::ImportTags { path, format } => {
            let streams = import(&path, format)?;
            println!(
                "{}: {} record(s), {} channel(s)",
                path.display(),
                streams.records.len(),
                streams.channel_count
            );
            for ch in 0..streams.channel_count {
                println!("  channel {ch}: {}", streams.channel(ch as u8).len());
            }
            Ok(())
        }
        Command::Correlate {
            tags,
            format,
            channels,
            bin_width_ps,
            window_ns,
            out,
        } => {
            if channels.len() != 2 {
                return Err(CliError::Validation(format!(
                    "--channels needs exactly two channels, got {}",
                    channels.len()
                )));
            }
            let streams = import(&tags, format)?;
            let (a, b) = (streams.channel(channels[0]), streams.channel(channels[1]));
            let h = correlate_g2(
                &a,
                &b,
                bin_width_ps * 1e-12,
                window_ns * 1e-9,
                Execution::Parallel,
            )
            .stage("correlation")?;
            let name = tags
                .file_stem()
                .map(|s| format!("{}-correlation", s.to_string_lossy()))
                .unwrap_or_else(|| "correlation".into());
            let mut report = Report::default();
            report.tables.push(Table::new(
                "g2_histogram.csv",
                vec![
                    Column::new("tau_s", h.centers()),
                    Column::new("counts", h.counts().iter().map(|&c| c as f64)),
                    Column::new("normalized", h.normalized()),
                ],
            ));
            let t: Vec<f64> = h.centers().iter().map(|t| t * 1e9).collect();
            report.plots.push(
                Plot::new(
                    "g2_histogram.svg",
                    "Coincidences",
                    "delay (ns)",
                    "normalized coincidences",
                )
                .curve(Curve::new("g2", t, h.normalized())),
            );
            report.quantity("coincidences", h.total() as f64, None, "counts");
            let dir = output_root(out.as_deref()).join(&name);
            write_dir(&dir, &report.render(&name)?)?;
            println!("wrote {}", dir.display());
            Ok(())
        }
        Command::Reproduce { figure: fig, out } => {
            let root = output_root(out.as_deref());
            for text in figure(&fig).expect("clap restricts figure names") {
                let s = scenario::parse(text)?;
                run_and_print(&s, &root)?;
            }
            Ok(())
        }
        Command::Version => {
            println!("heitler-lab {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

fn run_and_print(s: &scenario::Scenario, root: &Path) -> Result<()> {
    let (dir, report) = run_to_dir(s, root)?;
    println!("{} -> {}", s.name, dir.display());
    for q in &report.quantities {
        match q.sigma {
            Some(sig) => println!("  {} = {:.6e} ± {:.2e} {}", q.name, q.value, sig, q.unit),
            None => println!("  {} = {:.6e} {}", q.name, q.value, q.unit),
        }
    }
    Ok(())
}

fn import(path: &Path, format: Option<TagFormat>) -> Result<TagStreams> {
    let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => TagFormat::Csv,
        _ => TagFormat::Ptt1,
    });
    match format {
        TagFormat::Ptt1 => {
            let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
            parse_ptt1(&bytes).map_err(|e| CliError::from_input(path, e))
        }
        TagFormat::Csv => {
            let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            read_tags_csv(BufReader::new(f)).map_err(|e| CliError::from_input(path, e))
        }
    }
}
