//! Time-series generation: synthetic weather, discrete state-space rollouts,
//! the finite-difference measurement oracle and additive sensor noise.

mod fd;
mod frame;

pub use fd::{fd_simulate, FdWall, FdWallConfig};
pub use frame::TimeSeriesFrame;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::thermal::DiscreteSSM;

/// Outdoor temperature drive: diurnal and annual sinusoids plus AR(1) weather noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatherSpec {
    /// °C
    pub mean: f64,
    /// °C
    pub diurnal_amplitude: f64,
    /// rad
    pub diurnal_phase: f64,
    /// °C
    pub annual_amplitude: f64,
    pub ar1_coefficient: f64,
    /// °C
    pub ar1_noise_sd: f64,
    pub seed: u64,
}

impl Default for WeatherSpec {
    fn default() -> Self {
        WeatherSpec {
            mean: 15.0,
            diurnal_amplitude: 6.0,
            diurnal_phase: 0.0,
            annual_amplitude: 5.0,
            ar1_coefficient: 0.9,
            ar1_noise_sd: 0.8,
            seed: 7,
        }
    }
}

impl WeatherSpec {
    pub fn constant(value: f64) -> Self {
        WeatherSpec {
            mean: value,
            diurnal_amplitude: 0.0,
            diurnal_phase: 0.0,
            annual_amplitude: 0.0,
            ar1_coefficient: 0.0,
            ar1_noise_sd: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.ar1_coefficient) {
            return Err(Error::invalid(
                "ar1_coefficient",
                format!("must lie in [0, 1), got {}", self.ar1_coefficient),
            ));
        }
        if !(self.ar1_noise_sd >= 0.0) {
            return Err(Error::invalid("ar1_noise_sd", "must be non-negative"));
        }
        let all = [
            self.mean,
            self.diurnal_amplitude,
            self.diurnal_phase,
            self.annual_amplitude,
            self.ar1_noise_sd,
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("weather spec"));
        }
        Ok(())
    }
}

/// Hourly-indexed `T_ext` series of `steps` rows starting at step 0.
pub fn generate_weather(spec: &WeatherSpec, steps: usize, dt: f64) -> Result<TimeSeriesFrame> {
    spec.validate()?;
    if steps == 0 {
        return Err(Error::invalid("steps", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.ar1_noise_sd)
        .map_err(|e| Error::invalid("ar1_noise_sd", e.to_string()))?;
    let tau = std::f64::consts::TAU;
    let mut residual = 0.0;
    let series: Vec<f64> = (0..steps)
        .map(|i| {
            let t = i as f64 * dt / 3600.0;
            if i > 0 {
                residual = spec.ar1_coefficient * residual + noise.sample(&mut rng);
            }
            spec.mean
                + spec.diurnal_amplitude * (tau * t / 24.0 + spec.diurnal_phase).sin()
                + spec.annual_amplitude * (tau * t / 8760.0).sin()
                + residual
        })
        .collect();
    TimeSeriesFrame::from_series(dt, 0, "T_ext", &series)
}

/// Output channel name for the model output `name`.
pub fn output_channel(name: &str) -> String {
    format!("y_{name}")
}

/// Steps `x(t) = Φ·x(t−1) + Γ·u(t−1)` and `y(t) = C·x(t−1) + D·u(t−1)`.
///
/// For `S` input rows the result has `S` rows for `t = 1..=S`; the state
/// channels come first, then one `y_<name>` channel per output. Input
/// channels are taken by position.
pub fn rollout(ssm: &DiscreteSSM, x0: &[f64], inputs: &TimeSeriesFrame) -> Result<TimeSeriesFrame> {
    let n = ssm.n_states();
    let p = ssm.n_inputs();
    if x0.len() != n {
        return Err(Error::Dimension {
            context: "rollout initial state",
            expected: n,
            got: x0.len(),
        });
    }
    if inputs.n_channels() != p {
        return Err(Error::Dimension {
            context: "rollout input channels",
            expected: p,
            got: inputs.n_channels(),
        });
    }
    if (inputs.dt() - ssm.dt).abs() > 1e-9 * ssm.dt {
        return Err(Error::invalid(
            "dt",
            format!("inputs sampled at {} s, model at {} s", inputs.dt(), ssm.dt),
        ));
    }
    let q = ssm.c.nrows();
    let steps = inputs.len();
    let u = inputs.values();
    let mut out = Matrix::zeros(steps, n + q);
    let mut x = DVector::from_column_slice(x0);
    for t in 0..steps {
        let ut = u.row(t).transpose();
        let y = &ssm.c * &x + &ssm.d * &ut;
        x = &ssm.phi * &x + &ssm.gamma * &ut;
        out.view_mut((t, 0), (1, n)).copy_from(&x.transpose());
        out.view_mut((t, n), (1, q)).copy_from(&y.transpose());
    }
    let mut channels = ssm.state_names.clone();
    channels.extend(ssm.output_names.iter().map(|s| output_channel(s)));
    TimeSeriesFrame::new(inputs.dt(), inputs.start_index() + 1, channels, out)
}

/// Adds i.i.d. Gaussian noise `N(mean, sd²)` to every value.
pub fn add_noise(frame: &TimeSeriesFrame, mean: f64, sd: f64, seed: u64) -> Result<TimeSeriesFrame> {
    if !(sd >= 0.0 && sd.is_finite() && mean.is_finite()) {
        return Err(Error::invalid("noise", format!("need finite mean and sd >= 0, got ({mean}, {sd})")));
    }
    let dist = Normal::new(mean, sd).map_err(|e| Error::invalid("noise sd", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = frame.values().clone();
    // row-major draw order so the noise does not depend on storage layout
    for r in 0..values.nrows() {
        for c in 0..values.ncols() {
            values[(r, c)] += dist.sample(&mut rng);
        }
    }
    frame.with_values(values)
}
