#![allow(dead_code)]

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(reference_system_matrix);
example!(phase_portrait);
example!(calibration_transfer);
example!(cross_domain_transfer);
example!(noisy_target);
example!(dmd_target);
example!(reproduce_tables);
example!(fd_wall_simulation);

#[test]
fn reference_system_matrix_runs() {
    reference_system_matrix::run().unwrap();
}

#[test]
fn phase_portrait_runs() {
    let tmp = tempfile::TempDir::new().unwrap();
    let files = phase_portrait::run(tmp.path()).unwrap();
    assert_eq!(files.len(), 5);
}

#[test]
fn calibration_transfer_runs() {
    let results = calibration_transfer::run().unwrap();
    assert!(results[1].identity_map);
}

#[test]
fn cross_domain_transfer_runs() {
    assert_eq!(cross_domain_transfer::run().unwrap().len(), 12);
}

#[test]
fn noisy_target_runs() {
    let (measured, raw, aligned) = noisy_target::run().unwrap();
    assert!(measured.is_finite() && raw.is_finite() && aligned.is_finite());
}

#[test]
fn dmd_target_runs() {
    let (cv, fd_error) = dmd_target::run().unwrap();
    assert!(cv < 30.0);
    assert!(matches!(fd_error, Some(e) if e.is_numerical()));
}

#[test]
fn reproduce_tables_runs() {
    let tmp = tempfile::TempDir::new().unwrap();
    reproduce_tables::run(tmp.path(), &["calibration"]).unwrap();
    assert!(tmp.path().join("calibration.md").exists());
}

#[test]
fn fd_wall_simulation_runs() {
    assert!(fd_wall_simulation::run().unwrap().passes_ashrae);
}
