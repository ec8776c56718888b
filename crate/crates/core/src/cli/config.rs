//! Scenario configuration files.
//!
//! A sectioned `key = value` document (TOML syntax, strings quoted):
//!
//! ```toml
//! [source]
//! thickness = 0.6
//!
//! [target]
//! kind = "fd"
//! thickness = 0.2
//!
//! [weather]
//! annual_amplitude = 5.0
//!
//! [run]
//! train_hours = 2000
//! forecast_hours = 1000
//! alignment = "procrustes"
//!
//! [noise]
//! mean = 0.5
//! sd = 0.9
//! ```
//!
//! Every section and key is optional; unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::align::{
    AlignmentMethod, Centering, InputSpec, ModelSpec, NoiseSpec, RomMethod, Scenario, TargetSpec,
};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::sim::{FdWallConfig, WeatherSpec};
use crate::thermal::{MaterialSpec, WallSpec};

use super::csvio;
use super::portrait::{OperatorSource, PortraitRequest};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    source: WallSection,
    #[serde(default)]
    target: WallSection,
    #[serde(default)]
    weather: WeatherSection,
    #[serde(default)]
    run: RunSection,
    noise: Option<NoiseSection>,
    #[serde(default)]
    portrait: PortraitSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WallSection {
    thickness: Option<f64>,
    layer_volume: Option<f64>,
    material: Option<String>,
    conductivity: Option<f64>,
    density: Option<f64>,
    specific_heat: Option<f64>,
    h_out: Option<f64>,
    h_in: Option<f64>,
    indoor_branch: Option<bool>,
    a: Option<Vec<Vec<f64>>>,
    b: Option<Vec<Vec<f64>>>,
    kind: Option<String>,
    cells: Option<usize>,
    substeps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeatherSection {
    mean: Option<f64>,
    diurnal_amplitude: Option<f64>,
    diurnal_phase: Option<f64>,
    annual_amplitude: Option<f64>,
    ar1_coefficient: Option<f64>,
    ar1_noise_sd: Option<f64>,
    seed: Option<u64>,
    input_csv: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    dt: Option<f64>,
    train_hours: Option<usize>,
    forecast_hours: Option<usize>,
    rom: Option<String>,
    alignment: Option<String>,
    centering: Option<String>,
    modes: Option<usize>,
    seed: Option<u64>,
    indoor_temperature: Option<f64>,
    out: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    mean: Option<f64>,
    sd: f64,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PortraitSection {
    operators: Option<Vec<String>>,
    t1_range: Option<[f64; 2]>,
    t2_range: Option<[f64; 2]>,
    resolution: Option<usize>,
    initial_states: Option<Vec<[f64; 2]>>,
    steps: Option<usize>,
}

/// A validated scenario plus the run-level settings around it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub forecast_hours: usize,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub portrait: PortraitRequest,
    weather_seed_explicit: bool,
    noise_seed_explicit: bool,
}

pub const DEFAULT_SEED: u64 = 7;

fn prefixed(section: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::InvalidParameter { name, reason } => Error::InvalidParameter {
            name: format!("{section}.{name}"),
            reason,
        },
        other => other,
    }
}

fn matrix(rows: &[Vec<f64>], key: &str) -> Result<Matrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid(key, "must be a non-empty rectangular array of rows"));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(rows.len(), cols, &flat))
}

impl WallSection {
    fn wall(&self, section: &str) -> Result<WallSpec> {
        let mut material = match self.material.as_deref() {
            None | Some("brick") => MaterialSpec::RED_BRICK,
            Some("concrete") => MaterialSpec::CONCRETE,
            Some(other) => {
                return Err(Error::invalid(
                    format!("{section}.material"),
                    format!("expected `brick` or `concrete`, got `{other}`"),
                ))
            }
        };
        material.conductivity = self.conductivity.unwrap_or(material.conductivity);
        material.density = self.density.unwrap_or(material.density);
        material.specific_heat = self.specific_heat.unwrap_or(material.specific_heat);
        let d = WallSpec::default();
        let wall = WallSpec {
            thickness: self.thickness.unwrap_or(d.thickness),
            layer_volume: self.layer_volume.unwrap_or(d.layer_volume),
            material,
            h_out: self.h_out.unwrap_or(d.h_out),
            h_in: self.h_in.unwrap_or(d.h_in),
            indoor_branch: self.indoor_branch.unwrap_or(d.indoor_branch),
        };
        wall.validate().map_err(prefixed(section))?;
        Ok(wall)
    }

    fn model(&self, section: &str) -> Result<ModelSpec> {
        match (&self.a, &self.b) {
            (Some(a), Some(b)) => {
                for key in ["thickness", "layer_volume", "material", "conductivity", "density", "specific_heat", "h_out", "h_in", "indoor_branch"] {
                    if self.is_set(key) {
                        return Err(Error::invalid(
                            format!("{section}.{key}"),
                            "cannot be combined with explicit `a`/`b` matrices",
                        ));
                    }
                }
                Ok(ModelSpec::Matrices {
                    a: matrix(a, &format!("{section}.a"))?,
                    b: matrix(b, &format!("{section}.b"))?,
                })
            }
            (Some(_), None) => Err(Error::invalid(format!("{section}.b"), "required when `a` is given")),
            (None, Some(_)) => Err(Error::invalid(format!("{section}.a"), "required when `b` is given")),
            (None, None) => Ok(ModelSpec::Wall(self.wall(section)?)),
        }
    }

    fn is_set(&self, key: &str) -> bool {
        match key {
            "thickness" => self.thickness.is_some(),
            "layer_volume" => self.layer_volume.is_some(),
            "material" => self.material.is_some(),
            "conductivity" => self.conductivity.is_some(),
            "density" => self.density.is_some(),
            "specific_heat" => self.specific_heat.is_some(),
            "h_out" => self.h_out.is_some(),
            "h_in" => self.h_in.is_some(),
            "indoor_branch" => self.indoor_branch.is_some(),
            "kind" => self.kind.is_some(),
            "cells" => self.cells.is_some(),
            "substeps" => self.substeps.is_some(),
            _ => false,
        }
    }

    fn source(&self) -> Result<ModelSpec> {
        for key in ["kind", "cells", "substeps"] {
            if self.is_set(key) {
                return Err(Error::invalid(format!("source.{key}"), "only valid in [target]"));
            }
        }
        self.model("source")
    }

    fn target(&self) -> Result<TargetSpec> {
        match self.kind.as_deref().unwrap_or("fd") {
            "fd" => {
                if self.a.is_some() || self.b.is_some() {
                    return Err(Error::invalid("target.a", "matrices need kind = \"lumped\""));
                }
                let mut cfg = FdWallConfig::new(self.wall("target")?);
                cfg.cells = self.cells.unwrap_or(cfg.cells);
                cfg.substeps = self.substeps.unwrap_or(cfg.substeps);
                cfg.validate().map_err(prefixed("target"))?;
                Ok(TargetSpec::FiniteDifference(cfg))
            }
            "lumped" => {
                for key in ["cells", "substeps"] {
                    if self.is_set(key) {
                        return Err(Error::invalid(format!("target.{key}"), "only valid with kind = \"fd\""));
                    }
                }
                Ok(TargetSpec::Lumped(self.model("target")?))
            }
            other => Err(Error::invalid(
                "target.kind",
                format!("expected `fd` or `lumped`, got `{other}`"),
            )),
        }
    }
}

fn parse_enum<T: std::str::FromStr<Err = Error>>(value: Option<&str>, default: T, key: &str) -> Result<T> {
    match value {
        None => Ok(default),
        Some(v) => v.parse().map_err(|e: Error| Error::invalid(key, e.to_string())),
    }
}

impl ScenarioConfig {
    /// Defaults for every key: 0.2 m brick wall to its FD oracle, 2000 h
    /// training, 1000 h forecast, POD + Procrustes.
    pub fn default_config() -> Self {
        Self::parse("", Path::new(".")).expect("empty config is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses `text`; relative paths inside it resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let run = &file.run;
        let seed = run.seed.unwrap_or(DEFAULT_SEED);
        let dt = run.dt.unwrap_or(3600.0);
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("run.dt", format!("must be positive, got {dt}")));
        }

        let w = &file.weather;
        let inputs = match &w.input_csv {
            Some(p) => {
                let weather_keys = [
                    w.mean,
                    w.diurnal_amplitude,
                    w.diurnal_phase,
                    w.annual_amplitude,
                    w.ar1_coefficient,
                    w.ar1_noise_sd,
                ];
                if weather_keys.iter().any(Option::is_some) || w.seed.is_some() {
                    return Err(Error::invalid(
                        "weather.input_csv",
                        "cannot be combined with synthetic weather keys",
                    ));
                }
                let path = base_dir.join(p);
                let frame = csvio::read_frame_file(&path).map_err(|e| {
                    Error::invalid("weather.input_csv", format!("{}: {e}", path.display()))
                })?;
                InputSpec::Series(frame)
            }
            None => {
                let d = WeatherSpec::default();
                let spec = WeatherSpec {
                    mean: w.mean.unwrap_or(d.mean),
                    diurnal_amplitude: w.diurnal_amplitude.unwrap_or(d.diurnal_amplitude),
                    diurnal_phase: w.diurnal_phase.unwrap_or(d.diurnal_phase),
                    annual_amplitude: w.annual_amplitude.unwrap_or(d.annual_amplitude),
                    ar1_coefficient: w.ar1_coefficient.unwrap_or(d.ar1_coefficient),
                    ar1_noise_sd: w.ar1_noise_sd.unwrap_or(d.ar1_noise_sd),
                    seed: w.seed.unwrap_or(seed),
                };
                spec.validate().map_err(prefixed("weather"))?;
                InputSpec::Weather(spec)
            }
        };

        let noise = match &file.noise {
            Some(n) => {
                let mean = n.mean.unwrap_or(0.0);
                if !(n.sd >= 0.0 && n.sd.is_finite()) {
                    return Err(Error::invalid("noise.sd", format!("must be finite and >= 0, got {}", n.sd)));
                }
                if !mean.is_finite() {
                    return Err(Error::invalid("noise.mean", "must be finite"));
                }
                Some(NoiseSpec {
                    mean,
                    sd: n.sd,
                    seed: n.seed.unwrap_or(seed.wrapping_add(1)),
                })
            }
            None => None,
        };

        let scenario = Scenario {
            source: file.source.source()?,
            target: file.target.target()?,
            inputs,
            dt,
            train_hours: run.train_hours.unwrap_or(2000),
            rom: parse_enum(run.rom.as_deref(), RomMethod::Pod, "run.rom")?,
            alignment: parse_enum(run.alignment.as_deref(), AlignmentMethod::Procrustes, "run.alignment")?,
            centering: parse_enum(run.centering.as_deref(), Centering::Causal, "run.centering")?,
            noise,
            modes: run.modes,
            indoor_temperature: run.indoor_temperature.unwrap_or(20.0),
        };
        let forecast_hours = run.forecast_hours.unwrap_or(1000);

        let states = scenario.source.ssm().map_err(prefixed("source"))?.n_states();
        if scenario.train_hours < 2 * states {
            return Err(Error::invalid(
                "run.train_hours",
                format!("must be at least {} (twice the state count), got {}", 2 * states, scenario.train_hours),
            ));
        }
        if forecast_hours < 1 {
            return Err(Error::invalid("run.forecast_hours", "must be at least 1"));
        }
        scenario.steps(scenario.train_hours, "run.train_hours")?;
        scenario.steps(forecast_hours, "run.forecast_hours")?;
        if let Some(m) = scenario.modes {
            if m == 0 || m > states {
                return Err(Error::invalid("run.modes", format!("must lie in 1..={states}, got {m}")));
            }
        }
        if !scenario.indoor_temperature.is_finite() {
            return Err(Error::invalid("run.indoor_temperature", "must be finite"));
        }

        let p = &file.portrait;
        let operators = match &p.operators {
            None => vec![OperatorSource::Physics, OperatorSource::Dmd],
            Some(list) => list
                .iter()
                .map(|s| match s.as_str() {
                    "physics" => Ok(OperatorSource::Physics),
                    "dmd" => Ok(OperatorSource::Dmd),
                    other => Err(Error::invalid(
                        "portrait.operators",
                        format!("expected `physics` or `dmd`, got `{other}`"),
                    )),
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let d = PortraitRequest::default();
        let portrait = PortraitRequest {
            operators,
            t1_range: p.t1_range.unwrap_or(d.t1_range),
            t2_range: p.t2_range.unwrap_or(d.t2_range),
            resolution: p.resolution.unwrap_or(d.resolution),
            initial_states: p.initial_states.clone().unwrap_or(d.initial_states),
            steps: p.steps.unwrap_or(d.steps),
        };
        portrait.validate().map_err(prefixed("portrait"))?;

        Ok(ScenarioConfig {
            scenario,
            forecast_hours,
            seed,
            output_dir: run.out.as_ref().map(|o| base_dir.join(o)),
            portrait,
            weather_seed_explicit: w.seed.is_some(),
            noise_seed_explicit: file.noise.as_ref().is_some_and(|n| n.seed.is_some()),
        })
    }

    /// Replaces the run seed. Weather and noise seeds follow it unless the
    /// file pins them explicitly.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let InputSpec::Weather(w) = &mut self.scenario.inputs {
            if !self.weather_seed_explicit {
                w.seed = seed;
            }
        }
        if let Some(n) = &mut self.scenario.noise {
            if !self.noise_seed_explicit {
                n.seed = seed.wrapping_add(1);
            }
        }
        self
    }

    pub fn total_hours(&self) -> usize {
        self.scenario.train_hours + self.forecast_hours
    }
}
