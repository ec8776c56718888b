//! End-to-end transfer: simulate source and target over a common input
//! record, fit an alignment on the training window and forecast the rest.

use crate::error::{Error, Result, StageExt};
use crate::metrics::{MetricsReport, Window};
use crate::numerics::Matrix;
use crate::rom::{self, Subspace};
use crate::sim::{self, fd_simulate, FdWall, FdWallConfig, TimeSeriesFrame, WeatherSpec};
use crate::thermal::{self, StateSpaceModel, WallSpec};

use super::{fit, AlignmentMethod, AlignmentModel};

/// A lumped model, either derived from a wall or given as explicit matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Wall(WallSpec),
    Matrices { a: Matrix, b: Matrix },
}

impl ModelSpec {
    pub fn ssm(&self) -> Result<StateSpaceModel> {
        match self {
            ModelSpec::Wall(w) => thermal::wall_ssm(w),
            ModelSpec::Matrices { a, b } => StateSpaceModel::from_matrices(a.clone(), b.clone()),
        }
    }
}

/// What produces the "measured" data.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    FiniteDifference(FdWallConfig),
    Lumped(ModelSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Weather(WeatherSpec),
    /// Recorded inputs; must hold a `T_ext` channel and cover the run.
    Series(TimeSeriesFrame),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RomMethod {
    Pod,
    Dmd,
}

impl RomMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RomMethod::Pod => "pod",
            RomMethod::Dmd => "dmd",
        }
    }
}

impl std::str::FromStr for RomMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pod" => Ok(RomMethod::Pod),
            "dmd" => Ok(RomMethod::Dmd),
            other => Err(Error::Config(format!("rom must be `pod` or `dmd`, got `{other}`"))),
        }
    }
}

/// How the forecast window is centered before alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Centering {
    /// Training means for both source and target; a genuine forecast.
    #[default]
    Causal,
    /// Each window centered with its own means. The target forecast-window
    /// mean comes from the measurements being forecast, so this is a
    /// reconstruction protocol rather than a forecast.
    Independent,
}

impl Centering {
    pub fn as_str(&self) -> &'static str {
        match self {
            Centering::Causal => "causal",
            Centering::Independent => "independent",
        }
    }
}

impl std::str::FromStr for Centering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "causal" => Ok(Centering::Causal),
            "independent" => Ok(Centering::Independent),
            other => Err(Error::Config(format!(
                "centering must be `causal` or `independent`, got `{other}`"
            ))),
        }
    }
}

/// Additive Gaussian sensor noise on the measured target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub mean: f64,
    pub sd: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub source: ModelSpec,
    pub target: TargetSpec,
    pub inputs: InputSpec,
    /// seconds
    pub dt: f64,
    pub train_hours: usize,
    pub rom: RomMethod,
    pub alignment: AlignmentMethod,
    pub centering: Centering,
    pub noise: Option<NoiseSpec>,
    /// Subspace dimension; defaults to the number of states.
    pub modes: Option<usize>,
    /// °C, used when a model has an indoor-air input.
    pub indoor_temperature: f64,
}

impl Scenario {
    /// Brick-to-brick transfer with an FD target, POD and Procrustes.
    pub fn walls(source: WallSpec, target: WallSpec, train_hours: usize) -> Self {
        Scenario {
            source: ModelSpec::Wall(source),
            target: TargetSpec::FiniteDifference(FdWallConfig::new(target)),
            inputs: InputSpec::Weather(WeatherSpec::default()),
            dt: 3600.0,
            train_hours,
            rom: RomMethod::Pod,
            alignment: AlignmentMethod::Procrustes,
            centering: Centering::Causal,
            noise: None,
            modes: None,
            indoor_temperature: 20.0,
        }
    }

    /// Number of `dt` steps in `hours`.
    pub fn steps(&self, hours: usize, name: &str) -> Result<usize> {
        let exact = hours as f64 * 3600.0 / self.dt;
        let steps = exact.round();
        if (exact - steps).abs() > 1e-9 || steps < 1.0 {
            return Err(Error::invalid(
                name,
                format!("{hours} h is not a positive whole number of {} s steps", self.dt),
            ));
        }
        Ok(steps as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastMetrics {
    pub pre_train: MetricsReport,
    pub post_train: MetricsReport,
    pub pre_forecast: MetricsReport,
    pub post_forecast: MetricsReport,
}

impl ForecastMetrics {
    pub fn improved(&self) -> bool {
        self.post_forecast.cv_rmse < self.pre_forecast.cv_rmse
    }
}

/// Forecast-window errors against the noise-free target.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    pub measured_vs_clean: MetricsReport,
    pub aligned_vs_clean: MetricsReport,
    pub pre_aligned_vs_clean: MetricsReport,
}

#[derive(Debug, Clone)]
pub struct ForecastResult {
    /// Aligned source over the forecast window.
    pub aligned: TimeSeriesFrame,
    /// Raw source states over the forecast window, named like the target.
    pub pre_aligned: TimeSeriesFrame,
    /// Measured target over the forecast window.
    pub target: TimeSeriesFrame,
    /// `pre_aligned − target`
    pub error_prealigned: TimeSeriesFrame,
    /// `aligned − target`
    pub error_postaligned: TimeSeriesFrame,
    /// Aligned source over the training window (reconstruction).
    pub reconstruction: TimeSeriesFrame,
    pub inputs: TimeSeriesFrame,
    /// Full-length source states and measured target.
    pub source_full: TimeSeriesFrame,
    pub target_full: TimeSeriesFrame,
    pub target_clean: Option<TimeSeriesFrame>,
    pub model: AlignmentModel,
    pub metrics: ForecastMetrics,
    pub noise: Option<NoiseReport>,
    /// Training-window Frobenius residuals in embedded and lifted space.
    pub embedded_residual: f64,
    pub lifted_residual: f64,
    /// True when the fitted map reduces to re-meaning the source.
    pub identity_map: bool,
    pub train_steps: usize,
}

fn input_frame(
    names: &[String],
    base: &TimeSeriesFrame,
    indoor: f64,
) -> Result<TimeSeriesFrame> {
    let n = base.len();
    let mut cols = Vec::with_capacity(names.len());
    for name in names {
        let col = match (base.channel(name), name.as_str()) {
            (Ok(c), _) => c,
            (Err(_), "T_int") => vec![indoor; n],
            (Err(_), "Q") => vec![1.0; n],
            (Err(e), _) => return Err(e),
        };
        cols.push(col);
    }
    let values = Matrix::from_fn(n, names.len(), |r, c| cols[c][r]);
    TimeSeriesFrame::new(base.dt(), base.start_index(), names.to_vec(), values)
}

fn simulate_lumped(
    ssm: &StateSpaceModel,
    base: &TimeSeriesFrame,
    indoor: f64,
) -> Result<TimeSeriesFrame> {
    let u = input_frame(&ssm.input_names, base, indoor)?;
    let d = thermal::discretize(ssm, base.dt())?;
    let u0: Vec<f64> = u.values().row(0).iter().copied().collect();
    let x0 = d.steady_state(&u0)?;
    let out = sim::rollout(&d, x0.as_slice(), &u)?;
    let names: Vec<&str> = ssm.state_names.iter().map(String::as_str).collect();
    out.select(&names)
}

fn simulate_fd(cfg: &FdWallConfig, base: &TimeSeriesFrame, indoor: f64) -> Result<TimeSeriesFrame> {
    let mut names = vec!["T_ext".to_string()];
    if cfg.wall.indoor_branch {
        names.push("T_int".into());
    }
    let u = input_frame(&names, base, indoor)?;
    let t_ext0 = u.values()[(0, 0)];
    let t_int0 = if cfg.wall.indoor_branch { indoor } else { 0.0 };
    let mut wall = FdWall::new(&cfg.wall, cfg.cells, &vec![t_ext0; cfg.cells])?;
    if cfg.wall.indoor_branch {
        // an implicit step of effectively infinite length lands on the steady profile
        wall.step(1e15, t_ext0, t_int0)?;
    }
    fd_simulate(cfg, &u, wall.temperatures())
}

fn split(frame: &TimeSeriesFrame, train: usize) -> Result<(TimeSeriesFrame, TimeSeriesFrame)> {
    Ok((frame.slice(0..train)?, frame.slice(train..frame.len())?))
}

fn difference(a: &TimeSeriesFrame, b: &TimeSeriesFrame) -> Result<TimeSeriesFrame> {
    a.ensure_aligned(b)?;
    a.with_values(a.values() - b.values())
}

fn report(truth: &TimeSeriesFrame, pred: &TimeSeriesFrame, window: Window) -> Result<MetricsReport> {
    let channel = &truth.channels()[0];
    MetricsReport::compute(&truth.column(0), &pred.column(0), channel, window)
}

fn target_subspace(rom_method: RomMethod, target_train: &TimeSeriesFrame, d: usize) -> Result<Subspace> {
    let centered = rom::center(target_train)?;
    match rom_method {
        RomMethod::Pod => rom::pod(&centered, d),
        RomMethod::Dmd => rom::dmd(&centered, d),
    }
}

fn leading_modes(s: Subspace, d: usize) -> Result<Subspace> {
    if d == s.dim() {
        return Ok(s);
    }
    let eigenvalues = s.eigenvalues.map(|ev| ev[..d].to_vec());
    Subspace::new(s.basis.columns(0, d).into_owned(), eigenvalues, s.orthonormal, s.origin)
}

/// Inputs, source states and target measurements over a common time axis.
#[derive(Debug, Clone)]
pub struct SimulatedRun {
    pub inputs: TimeSeriesFrame,
    /// Source states, named like the target channels.
    pub source: TimeSeriesFrame,
    pub target_clean: TimeSeriesFrame,
    /// `target_clean` plus sensor noise when the scenario has any.
    pub target: TimeSeriesFrame,
}

/// Simulates source and target for `total` steps from steady states
/// matching the first input row.
pub fn simulate_run(scenario: &Scenario, source_ssm: &StateSpaceModel, total: usize) -> Result<SimulatedRun> {
    let n = source_ssm.n_states();
    let inputs = match &scenario.inputs {
        InputSpec::Weather(w) => sim::generate_weather(w, total, scenario.dt),
        InputSpec::Series(s) => {
            if s.len() < total {
                Err(Error::invalid(
                    "inputs",
                    format!("{} rows supplied, run needs {total}", s.len()),
                ))
            } else if (s.dt() - scenario.dt).abs() > 1e-9 * scenario.dt {
                Err(Error::invalid("inputs", format!("sampled at {} s, scenario dt is {} s", s.dt(), scenario.dt)))
            } else {
                s.slice(0..total)
            }
        }
    }
    .stage("inputs")?;

    let source_full = simulate_lumped(source_ssm, &inputs, scenario.indoor_temperature).stage("source simulation")?;
    let target_clean = match &scenario.target {
        TargetSpec::FiniteDifference(cfg) => simulate_fd(cfg, &inputs, scenario.indoor_temperature),
        TargetSpec::Lumped(spec) => spec
            .ssm()
            .and_then(|ssm| simulate_lumped(&ssm, &inputs, scenario.indoor_temperature)),
    }
    .stage("target simulation")?;
    if target_clean.n_channels() != n {
        return Err(Error::Dimension {
            context: "target channels vs source states",
            expected: n,
            got: target_clean.n_channels(),
        })
        .stage("target simulation");
    }
    let target_full = match scenario.noise {
        Some(nz) => sim::add_noise(&target_clean, nz.mean, nz.sd, nz.seed).stage("noise")?,
        None => target_clean.clone(),
    };
    let source_full = source_full
        .with_channels(target_full.channels().to_vec())
        .stage("source simulation")?;

    Ok(SimulatedRun {
        inputs,
        source: source_full,
        target_clean,
        target: target_full,
    })
}

/// Runs the full transfer for `scenario`, forecasting `horizon_hours` past
/// the training window. Errors are tagged with the stage that raised them.
pub fn forecast_pipeline(scenario: &Scenario, horizon_hours: usize) -> Result<ForecastResult> {
    let train = scenario.steps(scenario.train_hours, "train_hours").stage("configuration")?;
    let horizon = scenario.steps(horizon_hours, "forecast_hours").stage("configuration")?;
    let total = train + horizon;

    let source_ssm = scenario.source.ssm().stage("source model")?;
    let n = source_ssm.n_states();
    if train < 2 * n {
        return Err(Error::invalid(
            "train_hours",
            format!("need at least {} training steps for {n} states, got {train}", 2 * n),
        ))
        .stage("configuration");
    }
    let d = scenario.modes.unwrap_or(n);
    if d == 0 || d > n {
        return Err(Error::invalid("modes", format!("must lie in 1..={n}, got {d}"))).stage("configuration");
    }

    let SimulatedRun {
        inputs,
        source: source_full,
        target_clean,
        target: target_full,
    } = simulate_run(scenario, &source_ssm, total)?;

    let (source_train, source_test) = split(&source_full, train).stage("windowing")?;
    let (target_train, target_test) = split(&target_full, train).stage("windowing")?;

    let vs = thermal::source_subspace(&source_ssm)
        .and_then(|s| leading_modes(s, d))
        .stage("source subspace")?;
    let vt = target_subspace(scenario.rom, &target_train, d).stage("target subspace")?;

    let model = fit(scenario.alignment, &source_train, &target_train, &vs, &vt).stage("alignment fit")?;
    let reconstruction = model.apply(&source_train).stage("alignment apply")?;
    let aligned = match scenario.centering {
        Centering::Causal => model.apply(&source_test),
        Centering::Independent => model.apply_with_means(
            &source_test,
            &source_test.channel_means(),
            &target_test.channel_means(),
        ),
    }
    .stage("alignment apply")?;
    let (embedded_residual, lifted_residual) = model
        .residuals(&source_train, &target_train)
        .stage("alignment residuals")?;
    let identity_map = model.is_identity_map().stage("alignment apply")?;

    let metrics = (|| -> Result<ForecastMetrics> {
        Ok(ForecastMetrics {
            pre_train: report(&target_train, &source_train, Window::Train)?,
            post_train: report(&target_train, &reconstruction, Window::Train)?,
            pre_forecast: report(&target_test, &source_test, Window::Forecast)?,
            post_forecast: report(&target_test, &aligned, Window::Forecast)?,
        })
    })()
    .stage("metrics")?;

    let noise = match scenario.noise {
        Some(_) => {
            let clean_test = target_clean.slice(train..total).stage("windowing")?;
            Some(
                (|| -> Result<NoiseReport> {
                    Ok(NoiseReport {
                        measured_vs_clean: report(&clean_test, &target_test, Window::Forecast)?,
                        aligned_vs_clean: report(&clean_test, &aligned, Window::Forecast)?,
                        pre_aligned_vs_clean: report(&clean_test, &source_test, Window::Forecast)?,
                    })
                })()
                .stage("metrics")?,
            )
        }
        None => None,
    };

    Ok(ForecastResult {
        error_prealigned: difference(&source_test, &target_test).stage("metrics")?,
        error_postaligned: difference(&aligned, &target_test).stage("metrics")?,
        aligned,
        pre_aligned: source_test,
        target: target_test,
        reconstruction,
        inputs,
        source_full,
        target_clean: scenario.noise.map(|_| target_clean),
        target_full,
        model,
        metrics,
        noise,
        embedded_residual,
        lifted_residual,
        identity_map,
        train_steps: train,
    })
}
