mod common;

use thermal_sda::numerics::{EIG_RESIDUAL_TOL, ORTHO_TOL, SEMIGROUP_TOL, SVD_RECON_TOL};

#[test]
fn randomized_numerics_properties_hold() {
    let worst = common::run_property_suite(1000, 2024);
    println!("{worst:#?}");
    assert!(worst.eig_residual <= EIG_RESIDUAL_TOL);
    assert!(worst.svd_reconstruction <= SVD_RECON_TOL);
    assert!(worst.semigroup <= SEMIGROUP_TOL);
    assert!(worst.metzler_min >= 0.0);
    assert!(worst.pod_orthonormality <= ORTHO_TOL);
    assert!(worst.rollout_superposition <= 1e-9);
}
