// Finite-difference wall against the lumped model under synthetic weather,
// with a grid-refinement check and ASHRAE verdicts.

use thermal_sda::metrics::{self, MetricsReport, Window};
use thermal_sda::sim::{self, fd_simulate, FdWallConfig, WeatherSpec};
use thermal_sda::thermal::{self, WallSpec};

pub fn run() -> thermal_sda::Result<MetricsReport> {
    let wall = WallSpec::brick(0.2);
    let weather = sim::generate_weather(&WeatherSpec::default(), 2000, 3600.0)?;
    let t0 = weather.values()[(0, 0)];

    let coarse = fd_simulate(&FdWallConfig::new(wall).with_cells(20), &weather, &[t0; 20])?;
    let fine = fd_simulate(&FdWallConfig::new(wall).with_cells(200), &weather, &[t0; 200])?;
    for c in 0..coarse.n_channels() {
        let rms = metrics::rmse(&fine.column(c), &coarse.column(c))?;
        println!("{}: 20 vs 200 cells RMS {rms:.4} °C", coarse.channels()[c]);
    }

    let disc = thermal::discretize(&thermal::wall_ssm(&wall)?, 3600.0)?;
    let x0 = disc.steady_state(&[t0])?;
    let lumped = sim::rollout(&disc, x0.as_slice(), &weather)?;
    let report = MetricsReport::compute(&coarse.column(0), &lumped.column(0), "T_ext1", Window::Train)?;
    println!(
        "lumped vs FD: CV(RMSE) {:.2}%, NMBE {:.2}%, ASHRAE {}",
        report.cv_rmse,
        report.nmbe,
        if report.passes_ashrae { "pass" } else { "fail" }
    );
    Ok(report)
}

fn main() -> thermal_sda::Result<()> {
    run().map(|_| ())
}
