//! Centering and target-subspace extraction (POD and exact DMD), plus the
//! embed/lift pair that moves data in and out of a subspace.
//!
//! Data orientation is fixed throughout: rows are timesteps, columns are
//! state channels. Embedding is `X̃ = X_c · basis`.

use crate::error::{Error, Result};
use crate::numerics::{self, Matrix, ORTHO_TOL};
use crate::sim::TimeSeriesFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceOrigin {
    Physics,
    Pod,
    Dmd,
}

/// An `n × d` basis with unit-norm columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    pub basis: Matrix,
    /// Continuous-time for physics bases, discrete-time for DMD, absent for POD.
    pub eigenvalues: Option<Vec<f64>>,
    pub orthonormal: bool,
    pub origin: SubspaceOrigin,
}

impl Subspace {
    pub fn new(
        basis: Matrix,
        eigenvalues: Option<Vec<f64>>,
        orthonormal: bool,
        origin: SubspaceOrigin,
    ) -> Result<Self> {
        numerics::ensure_finite(&basis, "subspace basis")?;
        for (j, col) in basis.column_iter().enumerate() {
            if (col.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(
                    "basis",
                    format!("column {j} has norm {}", col.norm()),
                ));
            }
        }
        if let Some(ev) = &eigenvalues {
            if ev.len() != basis.ncols() {
                return Err(Error::Dimension {
                    context: "subspace eigenvalues",
                    expected: basis.ncols(),
                    got: ev.len(),
                });
            }
        }
        if orthonormal {
            let d = basis.ncols();
            let gram_err = (basis.transpose() * &basis - Matrix::identity(d, d)).amax();
            if gram_err > ORTHO_TOL {
                return Err(Error::invalid(
                    "basis",
                    format!("flagged orthonormal but Gram error is {gram_err:e}"),
                ));
            }
        }
        Ok(Subspace {
            basis,
            eigenvalues,
            orthonormal,
            origin,
        })
    }

    /// Number of channels `n`.
    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Number of modes `d`.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// The same subspace with basis `basis · q` for an orthogonal `q`.
    pub fn rotated(&self, q: &Matrix) -> Result<Self> {
        Subspace::new(&self.basis * q, None, self.orthonormal, self.origin)
    }

    /// Map from embedded coordinates back to channels: `basisᵀ` for
    /// orthonormal bases, the pseudoinverse otherwise.
    pub fn lifting_map(&self) -> Result<Matrix> {
        if self.orthonormal {
            Ok(self.basis.transpose())
        } else {
            numerics::pinv(&self.basis)
        }
    }
}

/// A frame with zero channel means and the means that were removed.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredFrame {
    pub data: TimeSeriesFrame,
    pub means: Vec<f64>,
}

pub fn center(frame: &TimeSeriesFrame) -> Result<CenteredFrame> {
    let means = frame.channel_means();
    center_with(frame, &means)
}

/// Subtracts externally supplied means, e.g. training means applied to a
/// forecast window. The result is only zero-mean when `means` are the
/// frame's own.
pub fn center_with(frame: &TimeSeriesFrame, means: &[f64]) -> Result<CenteredFrame> {
    if means.len() != frame.n_channels() {
        return Err(Error::Dimension {
            context: "centering means",
            expected: frame.n_channels(),
            got: means.len(),
        });
    }
    let mut values = frame.values().clone();
    for (mut col, m) in values.column_iter_mut().zip(means) {
        col.add_scalar_mut(-m);
    }
    Ok(CenteredFrame {
        data: frame.with_values(values)?,
        means: means.to_vec(),
    })
}

/// First `d` right singular vectors of the centered data.
pub fn pod(centered: &CenteredFrame, d: usize) -> Result<Subspace> {
    let x = centered.data.values();
    check_rank_request(d, x.ncols())?;
    let svd = numerics::svd(x)?;
    if d > svd.vt.nrows() {
        return Err(Error::invalid(
            "d",
            format!("only {} snapshots available for {d} modes", svd.vt.nrows()),
        ));
    }
    let rank = svd.rank(1e-12);
    if d > rank {
        log::warn!("POD: requested {d} modes but data has numerical rank {rank}");
    }
    let mut basis = svd.vt.rows(0, d).transpose();
    numerics::canonicalize_signs(&mut basis);
    Subspace::new(basis, None, true, SubspaceOrigin::Pod)
}

fn check_rank_request(d: usize, n: usize) -> Result<()> {
    if d == 0 || d > n {
        return Err(Error::invalid("d", format!("must be in 1..={n}, got {d}")));
    }
    Ok(())
}

/// Exact DMD on centered data.
pub fn dmd(centered: &CenteredFrame, d: usize) -> Result<Subspace> {
    dmd_snapshots(centered.data.values(), d)
}

/// Exact DMD on raw snapshots (rows = timesteps), without centering.
///
/// Fits `x(t+1) ≈ K·x(t)` through a rank-`d` SVD of the leading snapshots
/// and returns unit-norm modes with their discrete eigenvalues. Complex
/// eigenvalues are refused.
pub fn dmd_snapshots(data: &Matrix, d: usize) -> Result<Subspace> {
    let z = data.nrows();
    check_rank_request(d, data.ncols())?;
    if z < 2 {
        return Err(Error::invalid("data", "DMD needs at least 2 snapshots"));
    }
    let x1 = data.rows(0, z - 1).transpose();
    let x2 = data.rows(1, z - 1).transpose();
    let svd = numerics::svd(&x1)?;
    if svd.rank(1e-12) < d {
        return Err(Error::invalid(
            "d",
            format!("snapshot matrix has numerical rank {} < {d}", svd.rank(1e-12)),
        ));
    }
    let u = svd.u.columns(0, d);
    let v = svd.vt.rows(0, d).transpose();
    let sigma_inv = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        svd.singular_values[..d].iter().map(|s| 1.0 / s),
    ));
    let x2_v_sinv = &x2 * v * sigma_inv;
    let reduced = u.transpose() * &x2_v_sinv;
    let e = numerics::eig(&reduced)?;
    let w = e
        .real_eigenvectors()
        .ok_or(Error::ComplexModes("DMD reduced operator"))?;
    let eigenvalues = e.real_eigenvalues();
    let mut modes = x2_v_sinv * w;
    for mut col in modes.column_iter_mut() {
        let norm = col.norm();
        if !(norm > 0.0) {
            return Err(Error::Singular("DMD mode with zero norm"));
        }
        col /= norm;
    }
    numerics::canonicalize_signs(&mut modes);
    Subspace::new(modes, eigenvalues, false, SubspaceOrigin::Dmd)
}

pub fn embed(centered: &CenteredFrame, s: &Subspace) -> Result<Matrix> {
    embed_values(centered.data.values(), s)
}

/// `X_c · basis` on a raw centered matrix.
pub fn embed_values(x: &Matrix, s: &Subspace) -> Result<Matrix> {
    if x.ncols() != s.ambient_dim() {
        return Err(Error::Dimension {
            context: "embedding channels",
            expected: s.ambient_dim(),
            got: x.ncols(),
        });
    }
    Ok(x * &s.basis)
}

/// `embedded · L + means` where `L` is the subspace's lifting map.
pub fn lift_values(embedded: &Matrix, s: &Subspace, means: &[f64]) -> Result<Matrix> {
    if embedded.ncols() != s.dim() {
        return Err(Error::Dimension {
            context: "lifting modes",
            expected: s.dim(),
            got: embedded.ncols(),
        });
    }
    if means.len() != s.ambient_dim() {
        return Err(Error::Dimension {
            context: "lifting means",
            expected: s.ambient_dim(),
            got: means.len(),
        });
    }
    let mut x = embedded * s.lifting_map()?;
    for (mut col, m) in x.column_iter_mut().zip(means) {
        col.add_scalar_mut(*m);
    }
    Ok(x)
}

/// Lifts into a frame on the given time axis.
pub fn lift(
    embedded: &Matrix,
    s: &Subspace,
    means: &[f64],
    dt: f64,
    start_index: i64,
    channels: Vec<String>,
) -> Result<TimeSeriesFrame> {
    TimeSeriesFrame::new(dt, start_index, channels, lift_values(embedded, s, means)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(rows: usize, data: &[f64]) -> TimeSeriesFrame {
        let cols = data.len() / rows;
        TimeSeriesFrame::new(
            3600.0,
            0,
            (0..cols).map(|i| format!("c{i}")).collect(),
            Matrix::from_row_slice(rows, cols, data),
        )
        .unwrap()
    }

    #[test]
    fn centering_examples() {
        let c = center(&frame(3, &[1.0, 4.0, 2.0, 4.0, 3.0, 4.0])).unwrap();
        assert_eq!(c.means, vec![2.0, 4.0]);
        assert_eq!(c.data.column(0), vec![-1.0, 0.0, 1.0]);
        assert_eq!(c.data.column(1), vec![0.0, 0.0, 0.0]);
        let again = center(&c.data).unwrap();
        assert_eq!(again.data, c.data);
        assert!(again.means.iter().all(|m| m.abs() < 1e-15));
    }

    #[test]
    fn pod_on_a_line() {
        let dir = [0.6, -0.8];
        let t = [-2.0, -0.5, 0.0, 1.0, 1.5];
        let data: Vec<f64> = t.iter().flat_map(|s| [s * dir[0], s * dir[1]]).collect();
        let c = center(&frame(5, &data)).unwrap();
        let s = pod(&c, 1).unwrap();
        let cos = s.basis[(0, 0)] * dir[0] + s.basis[(1, 0)] * dir[1];
        assert!(cos.abs() > 1.0 - 1e-9);
        assert!(s.orthonormal && s.eigenvalues.is_none());
    }

    #[test]
    fn pod_full_rank_is_lossless() {
        let c = center(&frame(4, &[1.0, 2.0, 0.5, -1.0, 3.0, 0.0, 2.0, 2.5])).unwrap();
        let s = pod(&c, 2).unwrap();
        let gram = s.basis.transpose() * &s.basis;
        assert!((gram - Matrix::identity(2, 2)).amax() < 1e-12);
        let e = embed(&c, &s).unwrap();
        let back = lift_values(&e, &s, &[0.0, 0.0]).unwrap();
        assert!((back - c.data.values()).amax() < 1e-10);
    }

    #[test]
    fn pod_rejects_bad_rank() {
        let c = center(&frame(3, &[1.0, 2.0, 3.0, 4.0, 5.0, 7.0])).unwrap();
        assert!(pod(&c, 3).is_err());
        assert!(pod(&c, 0).is_err());
    }

    #[test]
    fn embed_isometry_and_hand_example() {
        let c = center(&frame(3, &[1.0, 0.0, 0.0, 2.0, 2.0, 1.0])).unwrap();
        let id = Subspace::new(Matrix::identity(2, 2), None, true, SubspaceOrigin::Pod).unwrap();
        assert_eq!(&embed(&c, &id).unwrap(), c.data.values());

        let a = std::f64::consts::FRAC_1_SQRT_2;
        let rot = Subspace::new(
            Matrix::from_row_slice(2, 2, &[a, -a, a, a]),
            None,
            true,
            SubspaceOrigin::Pod,
        )
        .unwrap();
        let e = embed(&c, &rot).unwrap();
        assert!((e.norm() - c.data.values().norm()).abs() < 1e-10);

        // centered data rows: (0,-1), (-1,1), (1,0); b = (0.6, 0.8)
        let b = Subspace::new(Matrix::from_column_slice(2, 1, &[0.6, 0.8]), None, true, SubspaceOrigin::Pod)
            .unwrap();
        let e = embed(&c, &b).unwrap();
        let expect = [-0.8, 0.2, 0.6];
        for i in 0..3 {
            assert!((e[(i, 0)] - expect[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn lift_zero_gives_means() {
        let s = Subspace::new(Matrix::identity(2, 2), None, true, SubspaceOrigin::Pod).unwrap();
        let f = lift(&Matrix::zeros(4, 2), &s, &[3.0, -1.0], 3600.0, 0, vec!["a".into(), "b".into()])
            .unwrap();
        assert_eq!(f.column(0), vec![3.0; 4]);
        assert_eq!(f.column(1), vec![-1.0; 4]);
        assert!(lift_values(&Matrix::zeros(4, 3), &s, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn dmd_recovers_generating_operator() {
        let phi = Matrix::from_row_slice(2, 2, &[0.95848, 0.03684, 0.03684, 0.75379]);
        let mut x = nalgebra::DVector::from_vec(vec![10.73, -3.2]);
        let mut rows = Vec::new();
        for _ in 0..40 {
            rows.extend_from_slice(x.as_slice());
            x = &phi * x;
        }
        let data = Matrix::from_row_slice(40, 2, &rows);
        let s = dmd_snapshots(&data, 2).unwrap();
        let truth = numerics::eig(&phi).unwrap();
        let lt = truth.real_eigenvalues().unwrap();
        let ls = s.eigenvalues.clone().unwrap();
        let vt = truth.real_eigenvectors().unwrap();
        for i in 0..2 {
            assert!((lt[i] - ls[i]).abs() < 1e-6, "{lt:?} vs {ls:?}");
            let cos = vt.column(i).dot(&s.basis.column(i));
            assert!(cos.abs() > 1.0 - 1e-9);
        }
        assert_eq!(s.origin, SubspaceOrigin::Dmd);
        assert!(!s.orthonormal);
    }

    #[test]
    fn dmd_single_mode_geometric_series() {
        let dir = [0.8, 0.6];
        let data: Vec<f64> = (0..10)
            .flat_map(|k| {
                let a = 2.0 * 0.7f64.powi(k);
                [a * dir[0], a * dir[1]]
            })
            .collect();
        let s = dmd_snapshots(&Matrix::from_row_slice(10, 2, &data), 1).unwrap();
        assert!((s.eigenvalues.unwrap()[0] - 0.7).abs() < 1e-12);
        assert!((s.basis[(0, 0)] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn dmd_refuses_complex_modes() {
        let (c, sn) = (0.9f64.cos() * 0.95, 0.9f64.sin() * 0.95);
        let rot = Matrix::from_row_slice(2, 2, &[c, -sn, sn, c]);
        let mut x = nalgebra::DVector::from_vec(vec![1.0, 0.0]);
        let mut rows = Vec::new();
        for _ in 0..20 {
            rows.extend_from_slice(x.as_slice());
            x = &rot * x;
        }
        let err = dmd_snapshots(&Matrix::from_row_slice(20, 2, &rows), 2).unwrap_err();
        assert!(matches!(err, Error::ComplexModes(_)));
        assert!(err.to_string().contains("POD"));
    }

    #[test]
    fn dmd_lift_round_trip_in_span() {
        let phi = Matrix::from_row_slice(2, 2, &[0.9, 0.05, 0.1, 0.7]);
        let mut x = nalgebra::DVector::from_vec(vec![2.0, -1.0]);
        let mut rows = Vec::new();
        for _ in 0..30 {
            rows.extend_from_slice(x.as_slice());
            x = &phi * x;
        }
        let data = Matrix::from_row_slice(30, 2, &rows);
        let s = dmd_snapshots(&data, 2).unwrap();
        assert!((s.basis.column(0).dot(&s.basis.column(1))).abs() > 1e-3);
        let e = embed_values(&data, &s).unwrap();
        let back = lift_values(&e, &s, &[0.0, 0.0]).unwrap();
        assert!((back - data).amax() < 1e-8);
    }
}
