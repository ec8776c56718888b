// Runs the three experiment grids and writes a markdown and CSV table for
// each.

use std::path::Path;

use thermal_sda::cli::{self, Grid, ScenarioConfig, GRID_NAMES};

pub fn run(out: &Path, grids: &[&str]) -> thermal_sda::Result<()> {
    std::fs::create_dir_all(out)?;
    let cfg = ScenarioConfig::default_config();
    for name in grids {
        let (table, _) = cli::cmd_reproduce(Grid::parse(name)?, &cfg, out)?;
        println!("{table}");
    }
    Ok(())
}

fn main() -> thermal_sda::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/tables".into());
    run(Path::new(&out), &GRID_NAMES)
}
