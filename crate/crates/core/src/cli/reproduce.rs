//! Named experiment grids, run cell by cell and tabulated next to the
//! reference figures.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::align::{forecast_pipeline, AlignmentMethod, ModelSpec, Scenario, TargetSpec};
use crate::error::{Error, Result};

use super::config::ScenarioConfig;
use super::csvio::format_g9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grid {
    /// Bergman alignment on same-thickness walls.
    Calibration,
    /// Procrustes on same-thickness walls over three training sizes.
    TrainingSize,
    /// Procrustes across six thickness pairs.
    CrossThickness,
}

pub const GRID_NAMES: [&str; 3] = ["calibration", "training-size", "cross-thickness"];

impl Grid {
    pub fn name(&self) -> &'static str {
        match self {
            Grid::Calibration => GRID_NAMES[0],
            Grid::TrainingSize => GRID_NAMES[1],
            Grid::CrossThickness => GRID_NAMES[2],
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "calibration" => Ok(Grid::Calibration),
            "training-size" => Ok(Grid::TrainingSize),
            "cross-thickness" => Ok(Grid::CrossThickness),
            other => Err(Error::Config(format!(
                "unknown grid `{other}`; valid grids: {}",
                GRID_NAMES.join(", ")
            ))),
        }
    }

    pub fn cells(&self) -> Vec<GridCell> {
        let cell = |source, target, train_hours, method, reference: (f64, f64)| GridCell {
            source_thickness: source,
            target_thickness: target,
            train_hours,
            method,
            reference_ssm_cv: reference.0,
            reference_aligned_cv: reference.1,
        };
        use AlignmentMethod::{Bergman, Procrustes};
        match self {
            Grid::Calibration => vec![
                cell(0.2, 0.2, 2000, Bergman, (8.74, 23.99)),
                cell(0.8, 0.8, 2000, Bergman, (6.34, 10.66)),
            ],
            Grid::TrainingSize => vec![
                cell(0.2, 0.2, 2000, Procrustes, (4.49, 2.93)),
                cell(0.8, 0.8, 2000, Procrustes, (7.53, 5.05)),
                cell(0.2, 0.2, 4000, Procrustes, (2.75, 2.25)),
                cell(0.8, 0.8, 4000, Procrustes, (3.57, 6.07)),
                cell(0.2, 0.2, 6000, Procrustes, (2.45, 1.76)),
                cell(0.8, 0.8, 6000, Procrustes, (12.00, 9.81)),
            ],
            Grid::CrossThickness => vec![
                cell(0.2, 0.6, 2000, Procrustes, (18.45, 13.38)),
                cell(0.2, 0.8, 2000, Procrustes, (23.02, 16.75)),
                cell(0.2, 0.9, 2000, Procrustes, (23.59, 16.82)),
                cell(0.6, 0.2, 2000, Procrustes, (19.88, 5.63)),
                cell(0.8, 0.2, 2000, Procrustes, (23.5, 5.99)),
                cell(0.9, 0.2, 2000, Procrustes, (25.09, 11.85)),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub source_thickness: f64,
    pub target_thickness: f64,
    pub train_hours: usize,
    pub method: AlignmentMethod,
    /// Reference CV(RMSE) of the raw model, percent.
    pub reference_ssm_cv: f64,
    /// Reference CV(RMSE) after alignment, percent.
    pub reference_aligned_cv: f64,
}

impl GridCell {
    pub fn label(&self) -> String {
        format!("{}_ssm -> {}_true", self.source_thickness, self.target_thickness)
    }

    /// The base scenario with this cell's walls, training size and method.
    pub fn scenario(&self, base: &Scenario) -> Result<Scenario> {
        let ModelSpec::Wall(source) = base.source else {
            return Err(Error::Config("grid reproduction needs a wall-based [source]".into()));
        };
        let mut sc = base.clone();
        sc.source = ModelSpec::Wall(crate::thermal::WallSpec {
            thickness: self.source_thickness,
            ..source
        });
        match &mut sc.target {
            TargetSpec::FiniteDifference(cfg) => cfg.wall.thickness = self.target_thickness,
            TargetSpec::Lumped(ModelSpec::Wall(w)) => w.thickness = self.target_thickness,
            TargetSpec::Lumped(ModelSpec::Matrices { .. }) => {
                return Err(Error::Config("grid reproduction needs a wall-based [target]".into()))
            }
        }
        sc.train_hours = self.train_hours;
        sc.alignment = self.method;
        Ok(sc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cell: GridCell,
    pub ssm_cv: f64,
    pub aligned_cv: f64,
    pub ssm_nmbe: f64,
    pub aligned_nmbe: f64,
    pub identity_map: bool,
}

impl CellResult {
    pub fn improved(&self) -> bool {
        self.aligned_cv < self.ssm_cv
    }
}

/// Runs every cell of `grid` in parallel on top of `base`; results keep the
/// grid order.
pub fn run_grid(grid: Grid, base: &ScenarioConfig) -> Result<Vec<CellResult>> {
    grid.cells()
        .into_par_iter()
        .map(|cell| {
            let sc = cell.scenario(&base.scenario)?;
            let r = forecast_pipeline(&sc, base.forecast_hours)?;
            let m = &r.metrics;
            Ok(CellResult {
                ssm_cv: m.pre_forecast.cv_rmse,
                aligned_cv: m.post_forecast.cv_rmse,
                ssm_nmbe: m.pre_forecast.nmbe,
                aligned_nmbe: m.post_forecast.nmbe,
                identity_map: r.identity_map,
                cell,
            })
        })
        .collect()
}

pub fn render_table(grid: Grid, base: &ScenarioConfig, results: &[CellResult]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Grid `{}`: CV(RMSE) of T_ext1 over a {} h forecast\n", grid.name(), base.forecast_hours);
    let _ = writeln!(
        s,
        "| cell | train (h) | method | SSM CV % | aligned CV % | SSM NMBE % | aligned NMBE % | improved | reference SSM CV % | reference aligned CV % |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|---|---|---|---|");
    for r in results {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {:.2} | {:.2} | {:.2} | {:.2} | {} | {:.2} | {:.2} |",
            r.cell.label(),
            r.cell.train_hours,
            r.cell.method.as_str(),
            r.ssm_cv,
            r.aligned_cv,
            r.ssm_nmbe,
            r.aligned_nmbe,
            if r.improved() { "yes" } else { "no" },
            r.cell.reference_ssm_cv,
            r.cell.reference_aligned_cv,
        );
    }
    let improved = results.iter().filter(|r| r.improved()).count();
    let _ = writeln!(s, "\nimproved cells: {improved} of {}", results.len());
    let _ = writeln!(
        s,
        "centering: {}; target oracle: {}",
        base.scenario.centering.as_str(),
        match base.scenario.target {
            TargetSpec::FiniteDifference(_) => "finite-difference wall",
            TargetSpec::Lumped(_) => "lumped model",
        }
    );
    match grid {
        Grid::Calibration => {
            let _ = writeln!(
                s,
                "\nThe reference table labels this training size `0`; Bergman alignment still needs a target \
                 subspace fitted to data, so the cells here train on {} h.",
                results.first().map_or(0, |r| r.cell.train_hours)
            );
            if results.iter().all(|r| r.identity_map) {
                let _ = writeln!(
                    s,
                    "With orthonormal full-rank bases the Bergman map is the identity on centered data: \
                     the aligned forecast is the raw model re-centred on the training target mean."
                );
            }
        }
        Grid::TrainingSize => {
            for pair in [(0.2, 0.2), (0.8, 0.8)] {
                let series: Vec<f64> = results
                    .iter()
                    .filter(|r| (r.cell.source_thickness, r.cell.target_thickness) == pair)
                    .map(|r| r.aligned_cv)
                    .collect();
                let steps = series.windows(2).filter(|w| w[1] <= w[0]).count();
                let _ = writeln!(
                    s,
                    "{}_ssm -> {}_true: aligned CV non-increasing in {steps} of {} training-size steps",
                    pair.0,
                    pair.1,
                    series.len().saturating_sub(1)
                );
            }
        }
        Grid::CrossThickness => {}
    }
    s
}

pub fn render_csv(results: &[CellResult]) -> String {
    let mut s = String::from(
        "source_thickness,target_thickness,train_hours,method,ssm_cv_rmse,aligned_cv_rmse,ssm_nmbe,aligned_nmbe,improved,reference_ssm_cv_rmse,reference_aligned_cv_rmse\n",
    );
    for r in results {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.cell.source_thickness,
            r.cell.target_thickness,
            r.cell.train_hours,
            r.cell.method.as_str(),
            format_g9(r.ssm_cv),
            format_g9(r.aligned_cv),
            format_g9(r.ssm_nmbe),
            format_g9(r.aligned_nmbe),
            r.improved(),
            r.cell.reference_ssm_cv,
            r.cell.reference_aligned_cv,
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_names() {
        for name in GRID_NAMES {
            assert_eq!(Grid::parse(name).unwrap().name(), name);
        }
        let err = Grid::parse("").unwrap_err().to_string();
        for name in GRID_NAMES {
            assert!(err.contains(name));
        }
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(Grid::Calibration.cells().len(), 2);
        assert_eq!(Grid::TrainingSize.cells().len(), 6);
        let cross = Grid::CrossThickness.cells();
        assert_eq!(cross.len(), 6);
        assert!(cross.iter().all(|c| c.train_hours == 2000 && c.method == AlignmentMethod::Procrustes));
    }
}
