// The 3R2C brick wall: derived parameters, continuous and one-hour
// discrete operators, and the source eigenvectors.

use thermal_sda::numerics::{self, Matrix};
use thermal_sda::thermal::{self, WallSpec};

pub fn run() -> thermal_sda::Result<()> {
    let wall = WallSpec::brick(0.2);
    let rc = thermal::derive_rc(&wall)?;
    println!("{rc:#?}");
    let ssm = thermal::build_ssm(&rc)?;
    println!("A =\n{:.4e}", ssm.a);
    println!("B =\n{:.4e}", ssm.b);

    let phi = numerics::expm_dt(&ssm.a, 3600.0)?;
    println!("Phi(1 h) =\n{phi:.6}");
    let d = thermal::discretize(&ssm, 3600.0)?;
    println!("spectral radius {:.6}", d.spectral_radius()?);

    let basis = thermal::source_subspace(&ssm)?;
    println!("source eigenvectors =\n{:.4}", basis.basis);

    let a_ref = Matrix::from_row_slice(2, 2, &[-1.2019e-5, 1.2019e-5, 1.2019e-5, -7.879e-5]);
    let v = thermal::source_subspace(&thermal::StateSpaceModel::from_matrices(a_ref, ssm.b.clone())?)?;
    println!("reference-matrix eigenvectors =\n{:.4}", v.basis);
    Ok(())
}

fn main() -> thermal_sda::Result<()> {
    run()
}
