//! Command-line front end: run scenarios, replay the built-in catalog,
//! compute deployment parameters, and validate ray files.
//!
//! Exit codes are a stable contract: 0 on success, 1 on bad input (config,
//! file, or parameter problems), 2 on a numerical failure inside the
//! pipeline. Summary lines are `key=value` pairs for easy scripting.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use losmimo::channel::validate_rays;
use losmimo::geometry::{compute_num_streams, compute_spacing, CarrierConfig};
use losmimo::plot::emit_plots;
use losmimo::scenario::{
    builtin_catalog, emit_results, load_scenario_file, run_suite, ResultFormat, Scenario,
    ScenarioError, ScenarioResult, SuiteReport,
};

#[derive(Parser)]
#[command(
    name = "losmimo",
    version,
    about = "Link-level simulator for line-of-sight massive-MIMO backhaul"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios in a JSON config file.
    Run {
        /// Scenario config file (one scenario object or an array).
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        /// Perturb each preset's true hop distance by this many meters.
        #[arg(long, default_value_t = 0.0)]
        distance_error: f64,
    },
    /// Run a built-in scenario catalog.
    Suite {
        /// Catalog name; `table2-fs` replays the reference scenario table
        /// under free-space propagation.
        #[arg(long, default_value = "table2-fs")]
        catalog: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compute deployment parameters from a mounting length and distance.
    Params {
        /// Available mounting length, m.
        #[arg(long)]
        length: f64,
        /// Estimated hop distance, m.
        #[arg(long)]
        distance: f64,
        /// Carrier frequency, Hz.
        #[arg(long, default_value_t = 26e9)]
        freq: f64,
        /// Antenna positioning step, m.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
    },
    /// Check a ray file for format and unit-vector violations.
    RaysValidate {
        /// Ray CSV file.
        file: PathBuf,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory for result files.
    #[arg(long)]
    out: PathBuf,
    /// Emit the CSV summary (default when no format flag is given).
    #[arg(long)]
    csv: bool,
    /// Emit the JSON records (default when no format flag is given).
    #[arg(long)]
    json: bool,
    /// Emit SVG charts.
    #[arg(long)]
    plots: bool,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            config,
            output,
            distance_error,
        } => match load_scenario_file(&config) {
            Ok(mut scenarios) => {
                if distance_error != 0.0 {
                    scenarios = scenarios
                        .into_iter()
                        .map(|sc| sc.with_distance_error(distance_error))
                        .collect();
                }
                execute(&scenarios, &output)
            }
            Err(e) => fail(&e),
        },
        Command::Suite { catalog, output } => match builtin_catalog(&catalog) {
            Ok(scenarios) => execute(&scenarios, &output),
            Err(e) => fail(&e),
        },
        Command::Params {
            length,
            distance,
            freq,
            step,
        } => params(length, distance, freq, step),
        Command::RaysValidate { file } => rays_validate(&file),
    }
}

fn execute(scenarios: &[Scenario], output: &OutputArgs) -> ExitCode {
    let report = run_suite(scenarios);
    for r in &report.results {
        println!("{}", summary_line(r));
    }
    for f in &report.failures {
        eprintln!("error: {}", f.error);
    }
    if let Err(e) = write_outputs(&report, output) {
        return fail(&e);
    }
    match report.failures.first() {
        None => ExitCode::SUCCESS,
        Some(first) => exit_code_for(&first.error),
    }
}

fn summary_line(r: &ScenarioResult) -> String {
    format!(
        "scenario={} scheme={} n_u={} se={:.1} phi_svd={:.1} phi_fs={:.1} mu_tx={} mu_rx={}",
        r.name,
        r.scheme,
        r.n_u,
        r.total_se,
        r.phi_svd_pct,
        r.phi_fs_pct,
        r.mu_tx.round() as i64,
        r.mu_rx.round() as i64,
    )
}

fn write_outputs(report: &SuiteReport, output: &OutputArgs) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(&output.out).map_err(|source| ScenarioError::Io {
        path: output.out.clone(),
        source,
    })?;
    let every_format = !output.csv && !output.json;
    if output.csv || every_format {
        emit_results(
            &report.results,
            ResultFormat::Csv,
            &output.out.join("results.csv"),
        )?;
    }
    if output.json || every_format {
        emit_results(
            &report.results,
            ResultFormat::Json,
            &output.out.join("results.json"),
        )?;
    }
    if output.plots && !report.results.is_empty() {
        emit_plots(&report.results, &output.out)?;
    }
    Ok(())
}

fn params(length: f64, distance: f64, freq: f64, step: f64) -> ExitCode {
    let run = || -> Result<(), ScenarioError> {
        let carrier = CarrierConfig::new(freq)?;
        let lambda = carrier.wavelength();
        let streams = compute_num_streams(length, lambda, distance)?;
        let spacing = compute_spacing(lambda, distance, streams, step)?;
        let aperture = streams as f64 * spacing;
        println!("n_u={streams}");
        println!("d_m={spacing}");
        println!("d_mm={:.4}", spacing * 1e3);
        println!("aperture_m={aperture}");
        println!("distance_over_aperture={:.4}", distance / aperture);
        Ok(())
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn rays_validate(file: &Path) -> ExitCode {
    match validate_rays(file) {
        Ok(report) => {
            println!(
                "rays={} pairs={} max_rx={} max_tx={}",
                report.total_rays, report.distinct_pairs, report.max_rx_index, report.max_tx_index
            );
            if report.total_rays == 0 && report.is_valid() {
                eprintln!("warning: 0 rays");
            }
            for v in &report.violations {
                eprintln!("line={} error={}", v.line, v.message);
            }
            if report.is_valid() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn fail(error: &ScenarioError) -> ExitCode {
    eprintln!("error: {error}");
    exit_code_for(error)
}

fn exit_code_for(error: &ScenarioError) -> ExitCode {
    if error.is_numerical() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}
