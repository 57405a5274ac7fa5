//! Command-line front end: validation, eigencurve scans, bifurcation search,
//! continuation in the vorticities and wave-field export.
//!
//! Exit codes are 0 on success, 1 for invalid input, 2 for numerical
//! failures and 3 for file-system problems.

mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use strata::wavefield::FieldGrid;

use commands::{LoadedConfig, WavefieldArgs};
use manifest::{ensure_writable, manifest_path, RunManifest};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(message: String) -> Self {
        Failure { code: 1, message }
    }

    pub fn numerical(message: String) -> Self {
        Failure { code: 2, message }
    }

    pub fn io(message: String) -> Self {
        Failure { code: 3, message }
    }
}

impl From<strata::Error> for Failure {
    fn from(e: strata::Error) -> Self {
        let code = match &e {
            strata::Error::Io(_) => 3,
            e if e.is_validation() => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "strata", version, about = "Bifurcation of doubly periodic waves in stratified Beltrami flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Configuration file (JSON).
    #[arg(long, short)]
    config: PathBuf,
    /// Replace existing outputs.
    #[arg(long)]
    force: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the configuration invariants and the non-resonance condition.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Also write the report (and its manifest) to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the eigencurves of the reduced matrix at k1 and k2.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Locate, validate and list bifurcation points.
    Bifurcate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = strata::bifurcation::scan::DEFAULT_GRID)]
        grid: usize,
        /// Rescale the surface tensions when the isolation check fails.
        #[arg(long)]
        rescue: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export the first-order wave field of an accepted point.
    Wavefield {
        #[command(flatten)]
        common: Common,
        /// Output of `bifurcate` or `continue-alpha`.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 0)]
        point: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t2: f64,
        #[arg(long, default_value_t = 64)]
        na: usize,
        #[arg(long, default_value_t = 64)]
        nb: usize,
        #[arg(long, default_value_t = 33)]
        nz: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Follow a point from its vorticities to new ones.
    ContinueAlpha {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 0)]
        point: usize,
        /// Target vorticities, one per layer, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        target: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the reduction engine on model problems with known branches.
    Lsdemo {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn single_output(out: &Path, force: bool) -> Result<PathBuf, Failure> {
    let man = manifest_path(out);
    ensure_writable(&[out, &man], force)?;
    Ok(man)
}

fn load(common: &Common) -> Result<LoadedConfig, Failure> {
    commands::load(&common.config)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { common, out } => {
            let man = out.as_deref().map(|o| single_output(o, common.force)).transpose()?;
            let (report, failure) = commands::validate(&common.config);
            let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::numerical(e.to_string()))?;
            println!("{text}");
            if let (Some(out), Some(man)) = (out, man) {
                commands::write_report(&out, &report)?;
                let params = serde_json::json!({ "config": common.config });
                commands::finish(&man, RunManifest::new("validate", report.config_hash.clone(), params), &[out])?;
            }
            failure.map_or(Ok(()), Err)
        }
        Command::Scan { common, grid, out } => {
            let man = single_output(&out, common.force)?;
            let loaded = load(&common)?;
            let csv = commands::scan_csv(&loaded.config, grid)?;
            commands::write_csv(&out, &csv)?;
            let params = serde_json::json!({ "config": common.config, "grid": grid });
            commands::finish(&man, RunManifest::new("scan", Some(loaded.hash), params), &[out])
        }
        Command::Bifurcate { common, grid, rescue, out } => {
            let man = single_output(&out, common.force)?;
            let loaded = load(&common)?;
            let file = commands::bifurcate(&loaded, grid, rescue, &out)?;
            eprintln!("{} accepted, {} rejected", file.accepted.len(), file.rejected.len());
            commands::write_report(&out, &file)?;
            let params = serde_json::json!({ "config": common.config, "grid": grid, "rescue": rescue });
            commands::finish(&man, RunManifest::new("bifurcate", Some(loaded.hash), params), &[out])
        }
        Command::Wavefield { common, points, point, t1, t2, na, nb, nz, out } => {
            let loaded = load(&common)?;
            let args = WavefieldArgs {
                points: &points,
                index: point,
                t: [t1, t2],
                grid: FieldGrid { na, nb, nz },
                out: &out,
                force: common.force,
            };
            let written = commands::wavefield(&loaded, &args)?;
            let (man, data) = written.split_last().expect("manifest path present");
            let params = serde_json::json!({
                "config": common.config,
                "points": points,
                "point": point,
                "t": [t1, t2],
                "grid": [na, nb, nz],
            });
            commands::finish(man, RunManifest::new("wavefield", Some(loaded.hash), params), data)
        }
        Command::ContinueAlpha { common, points, point, target, steps, out } => {
            let man = single_output(&out, common.force)?;
            let loaded = load(&common)?;
            let file = commands::continuation(&loaded, &points, point, &target, steps, &out, common.force)?;
            commands::write_report(&out, &file)?;
            let params = serde_json::json!({
                "config": common.config,
                "points": points,
                "point": point,
                "target": target,
                "steps": steps,
            });
            commands::finish(&man, RunManifest::new("continue-alpha", Some(loaded.hash), params), &[out])
        }
        Command::Lsdemo { out, force } => {
            let man = out.as_deref().map(|o| single_output(o, force)).transpose()?;
            let cases = commands::lsdemo();
            for c in &cases {
                println!(
                    "{} {} (error {:.3e}, tolerance {:.0e})",
                    if c.ok { "PASS" } else { "FAIL" },
                    c.name,
                    c.error,
                    c.tolerance
                );
            }
            if let (Some(out), Some(man)) = (out, man) {
                commands::write_report(&out, &cases)?;
                commands::finish(&man, RunManifest::new("lsdemo", None, serde_json::json!({})), &[out])?;
            }
            if cases.iter().all(|c| c.ok) {
                Ok(())
            } else {
                Err(Failure::numerical("model problem check failed".into()))
            }
        }
    }
}
