//! Small dense-matrix kernels shared by every other module.
//!
//! All routines take [`Matrix`] (a dynamically sized `nalgebra` matrix) and
//! return owned results. The tolerance constants below are the single
//! numerical acceptance contract used across the crate.

use nalgebra::{Complex, DMatrix, SVD};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Complex64 = Complex<f64>;

/// Eigen-residual bound, relative to the 2-norm of the decomposed matrix.
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;
/// Relative reconstruction bound for [`svd`].
pub const SVD_RECON_TOL: f64 = 1e-9;
/// Orthonormality bound for bases, singular vectors and rotations.
pub const ORTHO_TOL: f64 = 1e-10;
/// Relative bound for the matrix-exponential semigroup property.
pub const SEMIGROUP_TOL: f64 = 1e-8;
/// Above this eigenvector condition number `expm_dt` abandons the spectral path.
pub const EXPM_COND_LIMIT: f64 = 1e8;

const MAX_ITER: usize = 10_000;

pub fn ensure_finite(m: &Matrix, what: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn ensure_square(m: &Matrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

pub fn is_symmetric(m: &Matrix) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= 1e-14 * scale))
}

/// Spectral 2-norm (largest singular value).
pub fn norm2(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// 2-norm condition number; infinite for singular input.
pub fn condition_number(m: &Matrix) -> f64 {
    let sv = m.clone().singular_values();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / min
    }
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Sorted by descending real part, then descending imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// Column `i` is the unit-norm eigenvector of `eigenvalues[i]`.
    pub eigenvectors: DMatrix<Complex64>,
    pub is_real: bool,
}

impl EigenDecomposition {
    pub fn real_eigenvalues(&self) -> Option<Vec<f64>> {
        self.is_real
            .then(|| self.eigenvalues.iter().map(|l| l.re).collect())
    }

    pub fn real_eigenvectors(&self) -> Option<Matrix> {
        self.is_real.then(|| self.eigenvectors.map(|c| c.re))
    }

    /// Largest `‖A·vᵢ − λᵢ·vᵢ‖₂` over all pairs.
    pub fn max_residual(&self, a: &Matrix) -> f64 {
        let ac = a.map(Complex64::from);
        (0..self.eigenvalues.len())
            .map(|i| {
                let v = self.eigenvectors.column(i);
                (&ac * v - v * self.eigenvalues[i]).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Eigendecomposition of a square matrix.
///
/// Symmetric input goes through the symmetric QR algorithm and yields an
/// orthonormal real basis. Otherwise eigenvalues come from a real Schur form
/// and each eigenvector is the right null vector of `A − λI`. For a defective
/// matrix some returned vectors of a repeated eigenvalue are not
/// eigenvectors; [`EigenDecomposition::max_residual`] exposes this.
pub fn eig(a: &Matrix) -> Result<EigenDecomposition> {
    ensure_square(a)?;
    ensure_finite(a, "eig input")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: DMatrix::zeros(0, 0),
            is_real: true,
        });
    }

    if is_symmetric(a) {
        let sym = nalgebra::SymmetricEigen::try_new(a.clone(), f64::EPSILON, MAX_ITER).ok_or(
            Error::Convergence {
                what: "symmetric eigensolver",
                max_iter: MAX_ITER,
            },
        )?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| sym.eigenvalues[j].total_cmp(&sym.eigenvalues[i]));
        let eigenvalues = order
            .iter()
            .map(|&i| Complex64::from(sym.eigenvalues[i]))
            .collect();
        let mut vectors = DMatrix::<Complex64>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = sym.eigenvectors.column(src).map(Complex64::from);
            normalize_phase(col.as_mut_slice());
            vectors.set_column(dst, &col);
        }
        return Ok(EigenDecomposition {
            eigenvalues,
            eigenvectors: vectors,
            is_real: true,
        });
    }

    let schur = nalgebra::Schur::try_new(a.clone(), f64::EPSILON, MAX_ITER).ok_or(
        Error::Convergence {
            what: "Schur eigensolver",
            max_iter: MAX_ITER,
        },
    )?;
    let mut lambdas: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    let scale = norm2(a).max(f64::MIN_POSITIVE);
    for l in &mut lambdas {
        if l.im.abs() <= 1e-14 * scale {
            l.im = 0.0;
        }
    }
    lambdas.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    let is_real = lambdas.iter().all(|l| l.im == 0.0);

    let ac = a.map(Complex64::from);
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    let cluster_tol = 1e-8 * scale;
    let mut i = 0;
    while i < n {
        // eigenvalues equal to within tolerance share one null space
        let mut j = i + 1;
        while j < n && (lambdas[j] - lambdas[i]).norm() <= cluster_tol {
            j += 1;
        }
        let null_vectors = null_space(a, &ac, lambdas[i], j - i)?;
        for (k, mut col) in null_vectors.into_iter().enumerate() {
            let norm = col.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            for c in &mut col {
                *c /= norm;
            }
            normalize_phase(&mut col);
            for (r, c) in col.into_iter().enumerate() {
                vectors[(r, i + k)] = c;
            }
        }
        i = j;
    }
    Ok(EigenDecomposition {
        eigenvalues: lambdas,
        eigenvectors: vectors,
        is_real,
    })
}

/// The `count` right singular vectors of `A − λI` with the smallest singular values.
fn null_space(
    a: &Matrix,
    ac: &DMatrix<Complex64>,
    lambda: Complex64,
    count: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let n = a.nrows();
    let err = Error::Convergence {
        what: "eigenvector null-space SVD",
        max_iter: MAX_ITER,
    };
    if lambda.im == 0.0 {
        let shifted = a - Matrix::identity(n, n) * lambda.re;
        let vt = SVD::try_new(shifted, false, true, f64::EPSILON, MAX_ITER)
            .ok_or(err)?
            .v_t
            .expect("v_t requested");
        Ok((0..count)
            .map(|k| vt.row(n - 1 - k).iter().map(|&x| Complex64::from(x)).collect())
            .collect())
    } else {
        let shifted = ac - DMatrix::<Complex64>::identity(n, n) * lambda;
        let vt = SVD::try_new(shifted, false, true, f64::EPSILON, MAX_ITER)
            .ok_or(err)?
            .v_t
            .expect("v_t requested");
        Ok((0..count)
            .map(|k| vt.row(n - 1 - k).iter().map(|c| c.conj()).collect())
            .collect())
    }
}

/// Rotates `v` so that its first non-negligible component is real and positive.
fn normalize_phase(v: &mut [Complex64]) {
    let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(first) = v.iter().find(|c| c.norm() > 1e-12 * scale).copied() {
        let phase = first.conj() / first.norm();
        for c in v.iter_mut() {
            *c *= phase;
        }
    }
}

/// Makes the first non-negligible entry of each column of a real basis positive.
pub fn canonicalize_signs(basis: &mut Matrix) {
    for mut col in basis.column_iter_mut() {
        let scale = col.amax();
        if let Some(first) = col.iter().find(|c| c.abs() > 1e-12 * scale).copied() {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvdDecomposition {
    /// `m × k` with orthonormal columns, `k = min(m, n)`.
    pub u: Matrix,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// `k × n` with orthonormal rows.
    pub vt: Matrix,
}

impl SvdDecomposition {
    pub fn reconstruct(&self) -> Matrix {
        let sigma = Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(
            &self.singular_values,
        ));
        &self.u * sigma * &self.vt
    }

    /// Number of singular values above `tol · σ_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let max = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values
            .iter()
            .filter(|&&s| s > tol * max && s > 0.0)
            .count()
    }
}

/// Thin singular value decomposition, singular values sorted descending.
pub fn svd(x: &Matrix) -> Result<SvdDecomposition> {
    ensure_finite(x, "svd input")?;
    let svd = SVD::try_new(x.clone(), true, true, f64::EPSILON, MAX_ITER).ok_or(
        Error::Convergence {
            what: "SVD",
            max_iter: MAX_ITER,
        },
    )?;
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let u_raw = svd.u.expect("u requested");
    let vt_raw = svd.v_t.expect("v_t requested");
    let u = Matrix::from_fn(u_raw.nrows(), k, |r, c| u_raw[(r, order[c])]);
    let vt = Matrix::from_fn(k, vt_raw.ncols(), |r, c| vt_raw[(order[r], c)]);
    let singular_values = order.iter().map(|&i| svd.singular_values[i]).collect();
    Ok(SvdDecomposition {
        u,
        singular_values,
        vt,
    })
}

/// Moore–Penrose pseudoinverse with relative cutoff `1e-12 · σ_max`.
pub fn pinv(m: &Matrix) -> Result<Matrix> {
    let d = svd(m)?;
    let max = d.singular_values.first().copied().unwrap_or(0.0);
    let mut out = Matrix::zeros(m.ncols(), m.nrows());
    for (i, &s) in d.singular_values.iter().enumerate() {
        if s > 1e-12 * max && s > 0.0 {
            out += d.vt.row(i).transpose() * d.u.column(i).transpose() / s;
        }
    }
    Ok(out)
}

/// `e^{dt·A}` via `V·e^{dt·λ}·V⁻¹`, falling back to Padé scaling-and-squaring
/// when `A` is defective or the eigenvector matrix is ill-conditioned.
pub fn expm_dt(a: &Matrix, dt: f64) -> Result<Matrix> {
    ensure_square(a)?;
    ensure_finite(a, "expm_dt input")?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    let n = a.nrows();
    let spectral = eig(a).ok().and_then(|e| {
        let v = &e.eigenvectors;
        // defective matrices come back with vectors that are not eigenvectors
        let defective = e.max_residual(a) > EIG_RESIDUAL_TOL * norm2(a).max(1.0);
        if defective || !(complex_condition(v) <= EXPM_COND_LIMIT) {
            return None;
        }
        let v_inv = v.clone().try_inverse()?;
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= (e.eigenvalues[j] * dt).exp();
        }
        Some((scaled * v_inv).map(|c| c.re))
    });
    let out = match spectral {
        Some(m) => m,
        None => (a * dt).exp(),
    };
    debug_assert_eq!(out.nrows(), n);
    ensure_finite(&out, "matrix exponential")?;
    Ok(out)
}

fn complex_condition(v: &DMatrix<Complex64>) -> f64 {
    let sv = v.clone().singular_values();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, data: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn identity_eigenvalues() {
        let e = eig(&Matrix::identity(2, 2)).unwrap();
        assert!(e.is_real);
        assert_eq!(e.real_eigenvalues().unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn reference_2x2_eigenvalues_match_characteristic_roots() {
        let a = m(2, 2, &[-1.2019e-5, 1.2019e-5, 1.2019e-5, -7.879e-5]);
        // roots of λ² − tr·λ + det
        let tr = a.trace();
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        let disc = (tr * tr - 4.0 * det).sqrt();
        let hi = (tr + disc) / 2.0;
        let lo = (tr - disc) / 2.0;
        let l = eig(&a).unwrap().real_eigenvalues().unwrap();
        assert!((l[0] - hi).abs() < 1e-15, "{l:?}");
        assert!((l[1] - lo).abs() < 1e-15, "{l:?}");
        assert!((hi - -9.92e-6).abs() < 5e-9);
        assert!((lo - -8.09e-5).abs() < 5e-8);
    }

    #[test]
    fn nonsymmetric_real_and_complex() {
        let a = m(3, 3, &[2.0, 1.0, 0.0, 0.5, -1.0, 3.0, 0.0, 0.2, 0.7]);
        let e = eig(&a).unwrap();
        assert!(e.max_residual(&a) <= EIG_RESIDUAL_TOL * norm2(&a));

        let rot = m(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let e = eig(&rot).unwrap();
        assert!(!e.is_real);
        assert!(e.real_eigenvectors().is_none());
        assert!((e.eigenvalues[0].im - 1.0).abs() < 1e-12);
        assert!(e.max_residual(&rot) < 1e-12);
    }

    #[test]
    fn eig_rejects_non_square() {
        assert!(matches!(
            eig(&Matrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
        let mut bad = Matrix::identity(2, 2);
        bad[(0, 1)] = f64::NAN;
        assert!(matches!(eig(&bad), Err(Error::NonFinite(_))));
    }

    #[test]
    fn eigenvector_sign_convention() {
        let a = m(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let v = eig(&a).unwrap().real_eigenvectors().unwrap();
        for c in 0..2 {
            assert!(v[(0, c)] > 0.0);
            assert!((v.column(c).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_diagonal_and_rank_one() {
        let d = svd(&m(2, 2, &[3.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((d.singular_values[0] - 3.0).abs() < 1e-14);
        assert!((d.singular_values[1] - 1.0).abs() < 1e-14);
        for i in 0..2 {
            assert!((d.u[(i, i)].abs() - 1.0).abs() < 1e-14);
            assert!((d.vt[(i, i)].abs() - 1.0).abs() < 1e-14);
        }

        let a = nalgebra::DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let b = nalgebra::DVector::from_vec(vec![0.3, 4.0]);
        let d = svd(&(&a * b.transpose())).unwrap();
        assert_eq!(d.singular_values.iter().filter(|&&s| s > 1e-12).count(), 1);
        assert_eq!(d.rank(1e-12), 1);
    }

    #[test]
    fn expm_closed_forms() {
        let z = expm_dt(&Matrix::zeros(3, 3), 17.0).unwrap();
        assert!((z - Matrix::identity(3, 3)).amax() < 1e-15);

        let (p, q, dt) = (-0.3, 0.05, 2.5);
        let e = expm_dt(&m(2, 2, &[p, 0.0, 0.0, q]), dt).unwrap();
        assert!((e[(0, 0)] - (p * dt).exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - (q * dt).exp()).abs() < 1e-14);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn expm_defective_uses_fallback() {
        // Jordan block: eigenvector matrix is singular
        let j = m(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
        let e = expm_dt(&j, 2.0).unwrap();
        let x = (-2.0f64).exp();
        assert!((e[(0, 0)] - x).abs() < 1e-12);
        assert!((e[(0, 1)] - 2.0 * x).abs() < 1e-12);
        assert!(e[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn expm_rejects_bad_dt() {
        assert!(expm_dt(&Matrix::identity(2, 2), 0.0).is_err());
        assert!(expm_dt(&Matrix::identity(2, 2), f64::NAN).is_err());
    }

    #[test]
    fn pinv_of_tall_full_rank() {
        let a = m(3, 2, &[1.0, 0.5, -0.2, 2.0, 0.3, 0.3]);
        let p = pinv(&a).unwrap();
        assert!((&p * &a - Matrix::identity(2, 2)).amax() < 1e-12);
    }
}
