use nalgebra::{Cholesky, Matrix4, SymmetricEigen, U4};

use crate::error::{Error, Result};

use super::DIM;

/// Adds `ε·I`, `ε = 1e-10·max(1, tr/d)`, when the smallest eigenvalue is
/// below `ε`. Always returns a symmetrized copy.
pub fn regularize_spd(m: &Matrix4<f64>) -> Matrix4<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eps = 1e-10 * (sym.trace() / DIM as f64).max(1.0);
    if sym.symmetric_eigenvalues().min() < eps {
        sym + Matrix4::identity() * eps
    } else {
        sym
    }
}

pub(crate) fn cholesky(m: &Matrix4<f64>) -> Result<Cholesky<f64, U4>> {
    Cholesky::new(regularize_spd(m)).ok_or_else(|| Error::numerical("covariance is not positive definite"))
}

/// `log|Σ|` from the Cholesky factor of the regularized matrix.
pub fn log_det_spd(m: &Matrix4<f64>) -> Result<f64> {
    Ok(log_det(&cholesky(m)?))
}

pub(crate) fn log_det(chol: &Cholesky<f64, U4>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// Principal square root of a symmetric PSD matrix; negative eigenvalues
/// are clamped to zero.
pub fn sqrtm_psd(m: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let sym = (m + m.transpose()) * 0.5;
    if !sym.iter().all(|v| v.is_finite()) {
        return Err(Error::numerical("non-finite matrix in square root"));
    }
    let eig = SymmetricEigen::new(sym);
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let v = eig.eigenvectors;
    let r = v * Matrix4::from_diagonal(&roots) * v.transpose();
    Ok((r + r.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector4;

    #[test]
    fn log_det_of_diagonal() {
        let m = Matrix4::from_diagonal(&Vector4::new(2.0, 3.0, 0.5, 10.0));
        assert!((log_det_spd(&m).unwrap() - 30f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn singular_matrices_are_regularized() {
        let v = Vector4::new(1.0, 2.0, 0.0, -1.0);
        let rank_one = v * v.transpose();
        let r = regularize_spd(&rank_one);
        assert!(r.symmetric_eigenvalues().min() > 0.0);
        assert!(log_det_spd(&rank_one).unwrap().is_finite());
        let spd = Matrix4::identity() * 3.0;
        assert_eq!(regularize_spd(&spd), spd);
    }

    #[test]
    fn square_root_squares_back() {
        let a = Matrix4::new(
            4.0, 1.0, 0.0, 0.2, 1.0, 3.0, 0.5, 0.0, 0.0, 0.5, 2.0, 0.1, 0.2, 0.0, 0.1, 1.0,
        );
        let r = sqrtm_psd(&a).unwrap();
        assert!((r * r - a).amax() < 1e-12);
        let z = sqrtm_psd(&Matrix4::zeros()).unwrap();
        assert_eq!(z, Matrix4::zeros());
    }
}
