// Phase portraits of the physics operator and a DMD operator fitted to
// finite-difference wall data, written as CSV and SVG.

use std::path::{Path, PathBuf};

use thermal_sda::cli::{self, OperatorSource, PortraitRequest, ScenarioConfig};

pub fn run(out: &Path) -> thermal_sda::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let cfg = ScenarioConfig::default_config();
    let req = PortraitRequest {
        operators: vec![OperatorSource::Physics, OperatorSource::Dmd],
        initial_states: vec![[10.73, 10.82], [-8.0, 6.0], [5.0, -10.0]],
        ..PortraitRequest::default()
    };
    cli::cmd_portrait(&cfg, &req, out)
}

fn main() -> thermal_sda::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/phase_portrait".into());
    for f in run(Path::new(&out))? {
        println!("{}", f.display());
    }
    Ok(())
}
