// DMD as the target reduced model. Under diurnal forcing the fitted
// operator has complex modes and is refused; a lumped target driven by
// uncorrelated weather gives real modes and runs.

use thermal_sda::align::{forecast_pipeline, InputSpec, ModelSpec, RomMethod, Scenario, TargetSpec};
use thermal_sda::sim::WeatherSpec;
use thermal_sda::thermal::WallSpec;
use thermal_sda::Error;

pub fn run() -> thermal_sda::Result<(f64, Option<Error>)> {
    let mut sc = Scenario::walls(WallSpec::brick(0.2), WallSpec::brick(0.2), 2000);
    sc.rom = RomMethod::Dmd;
    let fd = forecast_pipeline(&sc, 1000).err();
    if let Some(e) = &fd {
        println!("finite-difference target: {e}");
    }

    sc.target = TargetSpec::Lumped(ModelSpec::Wall(WallSpec::brick(0.25)));
    sc.inputs = InputSpec::Weather(WeatherSpec {
        diurnal_amplitude: 0.0,
        annual_amplitude: 0.0,
        ar1_coefficient: 0.0,
        ar1_noise_sd: 3.0,
        ..WeatherSpec::default()
    });
    let r = forecast_pipeline(&sc, 1000)?;
    println!(
        "lumped 0.25 m target, uncorrelated weather: forecast CV(RMSE) {:.2}% -> {:.2}%",
        r.metrics.pre_forecast.cv_rmse, r.metrics.post_forecast.cv_rmse
    );
    Ok((r.metrics.post_forecast.cv_rmse, fd))
}

fn main() -> thermal_sda::Result<()> {
    run().map(|_| ())
}
