//! Small dense linear-algebra helpers used by the phase-space calculus.
//!
//! Everything here operates on `nalgebra` dynamic matrices; the problem
//! sizes are tiny (2N ≤ ~12), so clarity wins over performance tricks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Builds the 2N×2N symplectic form: block-diagonal copies of
/// `[[0, 1], [-1, 0]]` in (x₁, p₁, x₂, p₂, …) ordering.
pub fn symplectic_form_matrix(modes: usize) -> DMatrix<f64> {
    let n = 2 * modes;
    let mut j = DMatrix::zeros(n, n);
    for k in 0..modes {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    j
}

/// Checks symmetry of a square matrix to within `tol` (max-abs difference).
pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let mut max = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            max = max.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    max <= tol
}

/// Eigendecomposition of a symmetric matrix, with a reconstruction check.
///
/// `nalgebra`'s QL iteration can mis-converge on matrices with exactly
/// degenerate eigenvalues, returning vectors that are orthogonal but are
/// not eigenvectors (observed on 6×6 covariance matrices with a fourfold
/// eigenvalue). The residual ‖VΛVᵀ − M‖∞ detects that; on failure we fall
/// back to a cyclic Jacobi sweep, which is slower but unconditionally
/// convergent for symmetric input.
pub fn symmetric_eigen_checked(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let recon =
        &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues) * eig.eigenvectors.transpose();
    if (recon - m).amax() <= 1e-10 * (1.0 + m.amax()) {
        return (eig.eigenvalues, eig.eigenvectors);
    }
    jacobi_eigen(m)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
fn jacobi_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        if off <= 1e-15 * (1.0 + a.amax()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    (a.diagonal(), v)
}

/// Symplectic spectrum of a covariance matrix: the absolute values of the
/// (purely imaginary) eigenvalues of Jγ, each listed once, descending.
///
/// Computed through a symmetric eigenproblem: with A = γ^{1/2} J γ^{1/2}
/// (antisymmetric), AᵀA is symmetric positive semidefinite with doubly
/// degenerate eigenvalues μᵢ². This avoids a general (non-symmetric) Schur
/// iteration, which can fail to converge on structured inputs.
pub fn symplectic_spectrum(gamma: &DMatrix<f64>) -> Result<Vec<f64>> {
    if !gamma.is_square() || !gamma.nrows().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "covariance matrix must be square with even dimension, got {}x{}",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    if !is_symmetric(gamma, 1e-9 * (1.0 + gamma.amax())) {
        return Err(Error::Numeric(
            "covariance matrix is not symmetric".to_string(),
        ));
    }
    let modes = gamma.nrows() / 2;
    let j = symplectic_form_matrix(modes);
    let w = sqrt_psd(gamma, 1e-12 * (1.0 + gamma.amax()))?;
    let a = &w * &j * &w;
    let sym = a.transpose() * &a;
    let (values, _) = symmetric_eigen_checked(&sym);
    let mut mags: Vec<f64> = values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // Pairs (μ, μ): keep one representative of each.
    Ok(mags.into_iter().step_by(2).collect())
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix via eigendecomposition,
/// zeroing eigenvalues below `rel_cutoff · max(|eigenvalue|)`.
pub fn pseudo_inverse_sym(m: &DMatrix<f64>, rel_cutoff: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension(
            "pseudo-inverse of non-square matrix".into(),
        ));
    }
    let (values, v) = symmetric_eigen_checked(m);
    let max_abs = values.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let cutoff = rel_cutoff * max_abs;
    let inv_vals: DVector<f64> = values.map(|x| if x.abs() <= cutoff { 0.0 } else { 1.0 / x });
    Ok(&v * DMatrix::from_diagonal(&inv_vals) * v.transpose())
}

/// Principal square root of a symmetric positive semidefinite matrix,
/// clamping eigenvalues below `clamp_tol` to zero (handles the degenerate
/// zero modes of pure-state inputs).
pub fn sqrt_psd(m: &DMatrix<f64>, clamp_tol: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Dimension(
            "matrix square root of non-square matrix".into(),
        ));
    }
    let (values, v) = symmetric_eigen_checked(m);
    let min = values.min();
    if min < -clamp_tol.max(1e-9 * (1.0 + m.amax())) {
        return Err(Error::Numeric(format!(
            "matrix square root of an indefinite matrix (min eigenvalue {min:.3e})"
        )));
    }
    let sqrt_vals: DVector<f64> = values.map(|x| if x <= clamp_tol { 0.0 } else { x.sqrt() });
    Ok(&v * DMatrix::from_diagonal(&sqrt_vals) * v.transpose())
}

/// Maximum absolute entry of SᵀJS − J; zero for an exact symplectic matrix.
pub fn symplectic_defect(s: &DMatrix<f64>) -> f64 {
    let modes = s.nrows() / 2;
    let j = symplectic_form_matrix(modes);
    (s.transpose() * &j * s - j).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symplectic_form_squares_to_minus_identity() {
        for modes in 1..=4 {
            let j = symplectic_form_matrix(modes);
            let id = DMatrix::<f64>::identity(2 * modes, 2 * modes);
            assert_abs_diff_eq!((&j * &j + id).amax(), 0.0, epsilon = 0.0);
            assert_abs_diff_eq!((j.transpose() + &j).amax(), 0.0, epsilon = 0.0);
            assert_abs_diff_eq!(j.determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectrum_of_identity_is_ones() {
        let gamma = DMatrix::<f64>::identity(4, 4);
        let mu = symplectic_spectrum(&gamma).unwrap();
        assert_eq!(mu.len(), 2);
        for m in mu {
            assert_abs_diff_eq!(m, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectrum_of_thermal_state() {
        // Thermal covariance (2M+1)·I with M=2 has the single symplectic
        // eigenvalue 5.
        let gamma = DMatrix::<f64>::identity(2, 2) * 5.0;
        let mu = symplectic_spectrum(&gamma).unwrap();
        assert_eq!(mu.len(), 1);
        assert_abs_diff_eq!(mu[0], 5.0, epsilon = 1e-12);
    }

    #[test]
    fn pseudo_inverse_of_rank_deficient_matrix() {
        // diag(2, 0): pseudo-inverse is diag(1/2, 0).
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0]));
        let p = pseudo_inverse_sym(&m, 1e-12).unwrap();
        assert_abs_diff_eq!(p[(0, 0)], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(p[(1, 1)], 0.0, epsilon = 0.0);
    }

    #[test]
    fn degenerate_spectrum_survives_eigen_fallback() {
        // Pure three-mode state with a collective x variance of 13 and a
        // fourfold-degenerate unit eigenvalue; the stock QL iteration
        // returns bogus eigenvectors for this matrix, which the Jacobi
        // fallback must catch. All symplectic eigenvalues are exactly 1.
        let n = 3;
        let mut gamma = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                gamma[(2 * i, 2 * j)] = if i == j { 5.0 } else { 4.0 };
                gamma[(2 * i + 1, 2 * j + 1)] = if i == j { 9.0 / 13.0 } else { -4.0 / 13.0 };
            }
        }
        let w = sqrt_psd(&gamma, 1e-12 * 14.0).unwrap();
        assert!((&w * &w - &gamma).amax() < 1e-10);
        let mu = symplectic_spectrum(&gamma).unwrap();
        assert_eq!(mu.len(), 3);
        for m in mu {
            assert_abs_diff_eq!(m, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn sqrt_psd_roundtrip() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let s = sqrt_psd(&a, 1e-12).unwrap();
        assert_abs_diff_eq!((&s * &s - a).amax(), 0.0, epsilon = 1e-12);
    }
}
