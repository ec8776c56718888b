#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use thermal_sda::numerics::{self, Matrix};
use thermal_sda::rom;
use thermal_sda::sim::{self, TimeSeriesFrame};
use thermal_sda::thermal::{self, StateSpaceModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Haar-distributed orthogonal matrix from the QR of a Gaussian matrix.
pub fn orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let qr = gaussian(rng, n, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Stable Metzler matrix: nonnegative off-diagonals, strictly dominant
/// negative diagonal, rates on the scale of a wall (1e-6..1e-4 per second).
pub fn stable_metzler(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let scale = 10f64.powf(rng.random_range(-6.0..-4.0));
    let mut a = Matrix::from_fn(n, n, |_, _| rng.random_range(0.0..1.0) * scale);
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)]).sum();
        a[(i, i)] = -(off + rng.random_range(0.05..1.0) * scale);
    }
    a
}

fn rel(err: f64, scale: f64) -> f64 {
    err / scale.max(1.0)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct PropertyMaxima {
    pub eig_residual: f64,
    pub svd_reconstruction: f64,
    pub semigroup: f64,
    pub metzler_min: f64,
    pub pod_orthonormality: f64,
    pub rollout_superposition: f64,
}

/// One randomized trial of every numerics property; returns the worst
/// value seen for each.
pub fn property_trial(rng: &mut ChaCha8Rng) -> PropertyMaxima {
    let n = rng.random_range(2..=6);
    let mut out = PropertyMaxima {
        metzler_min: f64::INFINITY,
        ..Default::default()
    };

    let a = gaussian(rng, n, n);
    let e = numerics::eig(&a).expect("eig");
    out.eig_residual = rel(e.max_residual(&a), numerics::norm2(&a));

    let sym = {
        let g = gaussian(rng, n, n);
        &g + g.transpose()
    };
    let es = numerics::eig(&sym).expect("eig symmetric");
    out.eig_residual = out.eig_residual.max(rel(es.max_residual(&sym), numerics::norm2(&sym)));

    let rows = rng.random_range(n..=4 * n);
    let x = gaussian(rng, rows, n);
    let d = numerics::svd(&x).expect("svd");
    out.svd_reconstruction = rel((d.reconstruct() - &x).amax(), x.amax());

    let m = stable_metzler(rng, n);
    let t1 = rng.random_range(60.0..7200.0);
    let t2 = rng.random_range(60.0..7200.0);
    let whole = numerics::expm_dt(&m, t1 + t2).expect("expm");
    let split = numerics::expm_dt(&m, t1).expect("expm") * numerics::expm_dt(&m, t2).expect("expm");
    out.semigroup = (&whole - &split).amax() / whole.amax().max(f64::MIN_POSITIVE);
    out.metzler_min = whole.min();

    let steps = rng.random_range(3 * n..=10 * n);
    let values = gaussian(rng, steps, n) + Matrix::from_fn(steps, n, |_, c| 10.0 * c as f64);
    let names = (0..n).map(|i| format!("c{i}")).collect();
    let frame = TimeSeriesFrame::new(3600.0, 0, names, values).expect("frame");
    let centered = rom::center(&frame).expect("center");
    let dim = rng.random_range(1..=n);
    let pod = rom::pod(&centered, dim).expect("pod");
    let gram = pod.basis.transpose() * &pod.basis;
    out.pod_orthonormality = (gram - Matrix::identity(dim, dim)).amax();

    let p = rng.random_range(1..=3);
    let b = gaussian(rng, n, p) * 1e-5;
    let ssm = StateSpaceModel::from_matrices(m, b).expect("ssm");
    let disc = thermal::discretize(&ssm, 3600.0).expect("discretize");
    let len = rng.random_range(5..40);
    let input = |rng: &mut ChaCha8Rng| {
        let names = (0..p).map(|i| format!("u{i}")).collect();
        TimeSeriesFrame::new(3600.0, 0, names, gaussian(rng, len, p) * 10.0).expect("inputs")
    };
    let (ua, ub) = (input(rng), input(rng));
    let xa: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
    let xb: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
    let xs: Vec<f64> = xa.iter().zip(&xb).map(|(a, b)| a + b).collect();
    let us = ua.with_values(ua.values() + ub.values()).expect("sum inputs");
    let ya = sim::rollout(&disc, &xa, &ua).expect("rollout");
    let yb = sim::rollout(&disc, &xb, &ub).expect("rollout");
    let ys = sim::rollout(&disc, &xs, &us).expect("rollout");
    let diff = ys.values() - ya.values() - yb.values();
    out.rollout_superposition = rel(diff.amax(), ys.values().amax());
    out
}

pub fn run_property_suite(trials: usize, seed: u64) -> PropertyMaxima {
    let mut rng = rng(seed);
    let mut worst = PropertyMaxima {
        metzler_min: f64::INFINITY,
        ..Default::default()
    };
    for _ in 0..trials {
        let t = property_trial(&mut rng);
        worst.eig_residual = worst.eig_residual.max(t.eig_residual);
        worst.svd_reconstruction = worst.svd_reconstruction.max(t.svd_reconstruction);
        worst.semigroup = worst.semigroup.max(t.semigroup);
        worst.metzler_min = worst.metzler_min.min(t.metzler_min);
        worst.pod_orthonormality = worst.pod_orthonormality.max(t.pod_orthonormality);
        worst.rollout_superposition = worst.rollout_superposition.max(t.rollout_superposition);
    }
    worst
}
