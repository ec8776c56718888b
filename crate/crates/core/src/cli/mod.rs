//! Command-line surface: `simulate`, `transfer`, `reproduce` and `portrait`.
//!
//! Exit codes: 0 on success, 1 for invalid input or configuration, 2 when a
//! numerical kernel fails.

pub mod config;
pub mod csvio;
pub mod portrait;
pub mod reproduce;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::align::{forecast_pipeline, simulate_run, ForecastResult, ModelSpec, TargetSpec};
use crate::error::{Error, Result, StageExt};
use crate::metrics::MetricsReport;
use crate::sim::TimeSeriesFrame;
use crate::thermal::{MaterialSpec, WallSpec};

pub use config::ScenarioConfig;
pub use portrait::{OperatorSource, PortraitRequest};
pub use reproduce::{CellResult, Grid, GRID_NAMES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "thermal-sda", version, about = "Physics-derived wall models aligned to measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Scenario configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `run.out`; default `out`).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Run seed; weather and noise seeds follow unless pinned in the file.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write paired source and target time series.
    Simulate(CommonArgs),
    /// Fit an alignment on the training window and forecast the rest.
    Transfer(CommonArgs),
    /// Run a named experiment grid.
    Reproduce {
        #[command(flatten)]
        common: CommonArgs,
        /// One of: calibration, training-size, cross-thickness.
        #[arg(long, value_name = "NAME")]
        grid: Option<String>,
    },
    /// Export phase portraits of the physics and DMD operators.
    Portrait(CommonArgs),
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_VALIDATION
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Output summaries go to stdout, errors to
/// stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(summary) => {
            print!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load(common: &CommonArgs) -> Result<(ScenarioConfig, PathBuf)> {
    let mut cfg = match &common.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default_config(),
    };
    if let Some(seed) = common.seed {
        cfg = cfg.with_seed(seed);
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out)?;
    Ok((cfg, out))
}

fn dispatch(cmd: &Command) -> Result<String> {
    match cmd {
        Command::Simulate(c) => {
            let (cfg, out) = load(c)?;
            let files = cmd_simulate(&cfg, &out)?;
            Ok(list_files("simulate", &files))
        }
        Command::Transfer(c) => {
            let (cfg, out) = load(c)?;
            Ok(cmd_transfer(&cfg, &out)?.text)
        }
        Command::Reproduce { common, grid } => {
            let grid = match grid.as_deref() {
                None | Some("") => {
                    return Err(Error::Config(format!(
                        "reproduce needs --grid NAME; valid grids: {}",
                        GRID_NAMES.join(", ")
                    )))
                }
                Some(name) => Grid::parse(name)?,
            };
            let (cfg, out) = load(common)?;
            let (table, _) = cmd_reproduce(grid, &cfg, &out)?;
            Ok(table)
        }
        Command::Portrait(c) => {
            let (cfg, out) = load(c)?;
            let files = cmd_portrait(&cfg, &cfg.portrait, &out)?;
            Ok(list_files("portrait", &files))
        }
    }
}

fn list_files(cmd: &str, files: &[PathBuf]) -> String {
    let mut s = format!("{cmd}: wrote {} files\n", files.len());
    for f in files {
        let _ = writeln!(s, "  {}", f.display());
    }
    s
}

fn write(path: PathBuf, frame: &TimeSeriesFrame, files: &mut Vec<PathBuf>) -> Result<()> {
    csvio::write_frame_file(frame, &path)?;
    files.push(path);
    Ok(())
}

fn write_text(path: PathBuf, text: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, text)?;
    files.push(path);
    Ok(())
}

/// Writes `inputs.csv`, `source.csv` and `target.csv` (plus
/// `target_clean.csv` when the scenario adds noise) on one time axis.
pub fn cmd_simulate(cfg: &ScenarioConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let sc = &cfg.scenario;
    let ssm = sc.source.ssm().stage("source model")?;
    let total = sc.steps(cfg.total_hours(), "run.forecast_hours").stage("configuration")?;
    let run = simulate_run(sc, &ssm, total)?;
    let mut files = Vec::new();
    write(out.join("inputs.csv"), &run.inputs, &mut files)?;
    write(out.join("source.csv"), &run.source, &mut files)?;
    write(out.join("target.csv"), &run.target, &mut files)?;
    if sc.noise.is_some() {
        write(out.join("target_clean.csv"), &run.target_clean, &mut files)?;
    }
    Ok(files)
}

pub struct TransferReport {
    pub text: String,
    pub result: ForecastResult,
    pub files: Vec<PathBuf>,
}

fn material_name(m: &MaterialSpec) -> String {
    if *m == MaterialSpec::RED_BRICK {
        "brick".into()
    } else if *m == MaterialSpec::CONCRETE {
        "concrete".into()
    } else {
        format!("k={} rho={} cp={}", m.conductivity, m.density, m.specific_heat)
    }
}

fn describe_wall(w: &WallSpec) -> String {
    format!("{} m {}", w.thickness, material_name(&w.material))
}

fn describe_model(m: &ModelSpec) -> String {
    match m {
        ModelSpec::Wall(w) => format!("lumped {}", describe_wall(w)),
        ModelSpec::Matrices { a, .. } => format!("explicit {}x{} A", a.nrows(), a.ncols()),
    }
}

fn describe_target(t: &TargetSpec) -> String {
    match t {
        TargetSpec::FiniteDifference(cfg) => format!("finite-difference {} ({} cells)", describe_wall(&cfg.wall), cfg.cells),
        TargetSpec::Lumped(m) => describe_model(m),
    }
}

fn metrics_row(s: &mut String, series: &str, r: &MetricsReport) {
    let _ = writeln!(
        s,
        "{:<9} {:<24} {:>10.3} {:>9.3}   {}",
        r.window.as_str(),
        series,
        r.cv_rmse,
        r.nmbe,
        if r.passes_ashrae { "pass" } else { "fail" }
    );
}

fn metrics_csv(result: &ForecastResult) -> String {
    let mut rows = vec![
        ("pre_aligned", &result.metrics.pre_train),
        ("post_aligned", &result.metrics.post_train),
        ("pre_aligned", &result.metrics.pre_forecast),
        ("post_aligned", &result.metrics.post_forecast),
    ];
    if let Some(n) = &result.noise {
        rows.push(("measured_vs_clean", &n.measured_vs_clean));
        rows.push(("pre_aligned_vs_clean", &n.pre_aligned_vs_clean));
        rows.push(("post_aligned_vs_clean", &n.aligned_vs_clean));
    }
    let mut s = String::from("window,series,channel,cv_rmse,nmbe,passes_ashrae\n");
    for (series, r) in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.window.as_str(),
            series,
            r.channel,
            csvio::format_g9(r.cv_rmse),
            csvio::format_g9(r.nmbe),
            r.passes_ashrae
        );
    }
    s
}

/// Runs the forecast pipeline and writes the aligned, pre-aligned and
/// target forecasts, per-step errors, the training reconstruction, the
/// fitted model and the metrics in text and CSV form.
pub fn cmd_transfer(cfg: &ScenarioConfig, out: &Path) -> Result<TransferReport> {
    let sc = &cfg.scenario;
    let result = forecast_pipeline(sc, cfg.forecast_hours)?;
    let mut files = Vec::new();
    write(out.join("aligned.csv"), &result.aligned, &mut files)?;
    write(out.join("pre_aligned.csv"), &result.pre_aligned, &mut files)?;
    write(out.join("target.csv"), &result.target, &mut files)?;
    let rename = |f: &TimeSeriesFrame, prefix: &str| {
        f.with_channels(f.channels().iter().map(|c| format!("{prefix}_{c}")).collect())
    };
    let errors = TimeSeriesFrame::hstack(&[
        &rename(&result.error_prealigned, "error_prealigned")?,
        &rename(&result.error_postaligned, "error_postaligned")?,
    ])?;
    write(out.join("errors.csv"), &errors, &mut files)?;
    write(out.join("reconstruction.csv"), &result.reconstruction, &mut files)?;
    write_text(out.join("model.toml"), &result.model.to_text()?, &mut files)?;
    write_text(out.join("metrics.csv"), &metrics_csv(&result), &mut files)?;

    let m = &result.metrics;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "transfer: {} -> {}",
        describe_model(&sc.source),
        describe_target(&sc.target)
    );
    let _ = writeln!(
        text,
        "train {} h, forecast {} h, rom {}, alignment {}, centering {}{}\n",
        sc.train_hours,
        cfg.forecast_hours,
        sc.rom.as_str(),
        sc.alignment.as_str(),
        sc.centering.as_str(),
        sc.noise
            .map(|n| format!(", noise N({}, {}²)", n.mean, n.sd))
            .unwrap_or_default()
    );
    let _ = writeln!(text, "{:<9} {:<24} {:>10} {:>9}   ASHRAE", "window", "series", "CV(RMSE)%", "NMBE%");
    metrics_row(&mut text, "pre-aligned (SSM)", &m.pre_train);
    metrics_row(&mut text, "post-aligned", &m.post_train);
    metrics_row(&mut text, "pre-aligned (SSM)", &m.pre_forecast);
    metrics_row(&mut text, "post-aligned", &m.post_forecast);
    if let Some(n) = &result.noise {
        metrics_row(&mut text, "measured vs clean", &n.measured_vs_clean);
        metrics_row(&mut text, "pre-aligned vs clean", &n.pre_aligned_vs_clean);
        metrics_row(&mut text, "post-aligned vs clean", &n.aligned_vs_clean);
    }
    let _ = writeln!(
        text,
        "\nforecast improved: {} ({:.3}% -> {:.3}% CV(RMSE), channel {})",
        if m.improved() { "yes" } else { "no" },
        m.pre_forecast.cv_rmse,
        m.post_forecast.cv_rmse,
        m.post_forecast.channel
    );
    let _ = writeln!(
        text,
        "training residuals: embedded {:.4}, lifted {:.4} (Frobenius, °C)",
        result.embedded_residual, result.lifted_residual
    );
    if result.identity_map {
        let _ = writeln!(
            text,
            "note: the fitted map is the identity on centered data (orthonormal full-rank bases), \
             so the aligned forecast is the model output re-centred on the training target mean"
        );
    }
    write_text(out.join("report.txt"), &text, &mut files)?;
    Ok(TransferReport { text, result, files })
}

/// Runs `grid` and writes `<grid>.md` and `<grid>.csv`.
pub fn cmd_reproduce(grid: Grid, cfg: &ScenarioConfig, out: &Path) -> Result<(String, Vec<CellResult>)> {
    let results = reproduce::run_grid(grid, cfg)?;
    let table = reproduce::render_table(grid, cfg, &results);
    fs::write(out.join(format!("{}.md", grid.name())), &table)?;
    fs::write(out.join(format!("{}.csv", grid.name())), reproduce::render_csv(&results))?;
    Ok((table, results))
}

/// Samples and renders the requested portraits. The DMD operator is fitted
/// to the measured target over the training window.
pub fn cmd_portrait(cfg: &ScenarioConfig, req: &PortraitRequest, out: &Path) -> Result<Vec<PathBuf>> {
    req.validate()?;
    let sc = &cfg.scenario;
    let ssm = sc.source.ssm().stage("source model")?;
    let mut portraits = Vec::new();
    for op in &req.operators {
        let p = match op {
            OperatorSource::Physics => portrait::physics_portrait(&ssm.a, sc.dt, req).stage("physics portrait")?,
            OperatorSource::Dmd => {
                let train = sc.steps(sc.train_hours, "run.train_hours").stage("configuration")?;
                let run = simulate_run(sc, &ssm, train)?;
                let phi = portrait::dmd_operator(&run.target).stage("DMD operator")?;
                portrait::discrete_portrait(&phi, sc.dt, req, OperatorSource::Dmd).stage("DMD portrait")?
            }
        };
        portraits.push(p);
    }
    let mut files = Vec::new();
    for p in &portraits {
        let name = p.operator.as_str();
        write(out.join(format!("portrait_{name}_field.csv")), &portrait::field_frame(p)?, &mut files)?;
        write(out.join(format!("portrait_{name}_trajectories.csv")), &portrait::trajectories_frame(p)?, &mut files)?;
    }
    write_text(out.join("portrait.svg"), &portrait::render_svg(&portraits, req), &mut files)?;
    Ok(files)
}
