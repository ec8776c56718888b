// Transfer across wall thicknesses, with causal and independent
// centering side by side.

use thermal_sda::align::{forecast_pipeline, Centering, Scenario};
use thermal_sda::thermal::WallSpec;

pub const PAIRS: [(f64, f64); 6] = [(0.2, 0.6), (0.2, 0.8), (0.2, 0.9), (0.6, 0.2), (0.8, 0.2), (0.9, 0.2)];

pub struct Row {
    pub source: f64,
    pub target: f64,
    pub centering: Centering,
    pub ssm_cv: f64,
    pub aligned_cv: f64,
}

pub fn run() -> thermal_sda::Result<Vec<Row>> {
    let mut rows = Vec::new();
    println!("{:<14} {:<12} {:>8} {:>8}", "pair", "centering", "SSM %", "aligned %");
    for (s, t) in PAIRS {
        for centering in [Centering::Causal, Centering::Independent] {
            let mut sc = Scenario::walls(WallSpec::brick(s), WallSpec::brick(t), 2000);
            sc.centering = centering;
            let m = forecast_pipeline(&sc, 1000)?.metrics;
            println!(
                "{:<14} {:<12} {:>8.2} {:>8.2}",
                format!("{s} -> {t}"),
                centering.as_str(),
                m.pre_forecast.cv_rmse,
                m.post_forecast.cv_rmse
            );
            rows.push(Row {
                source: s,
                target: t,
                centering,
                ssm_cv: m.pre_forecast.cv_rmse,
                aligned_cv: m.post_forecast.cv_rmse,
            });
        }
    }
    Ok(rows)
}

fn main() -> thermal_sda::Result<()> {
    run().map(|_| ())
}
