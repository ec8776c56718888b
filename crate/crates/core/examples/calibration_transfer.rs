// Same-thickness transfer: a 0.2 m lumped model aligned to a 0.2 m
// finite-difference wall and forecast 1000 h past the training window.

use thermal_sda::align::{forecast_pipeline, AlignmentMethod, ForecastResult, Scenario};
use thermal_sda::thermal::WallSpec;

pub fn run() -> thermal_sda::Result<Vec<ForecastResult>> {
    let mut results = Vec::new();
    for method in [AlignmentMethod::Procrustes, AlignmentMethod::Bergman] {
        let mut sc = Scenario::walls(WallSpec::brick(0.2), WallSpec::brick(0.2), 2000);
        sc.alignment = method;
        let r = forecast_pipeline(&sc, 1000)?;
        let m = &r.metrics;
        println!(
            "{:<10} forecast CV(RMSE) {:.2}% -> {:.2}%, NMBE {:.2}% -> {:.2}%, identity map: {}",
            method.as_str(),
            m.pre_forecast.cv_rmse,
            m.post_forecast.cv_rmse,
            m.pre_forecast.nmbe,
            m.post_forecast.nmbe,
            r.identity_map
        );
        results.push(r);
    }
    Ok(results)
}

fn main() -> thermal_sda::Result<()> {
    run().map(|_| ())
}
