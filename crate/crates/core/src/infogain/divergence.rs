use nalgebra::Matrix4;

use crate::error::{Error, Result};

use super::linalg::{cholesky, log_det, sqrtm_psd};
use super::{check_alpha, GaussianParams, DIM};

/// `KL(pᵢ ‖ pⱼ) = ½[log(|Σⱼ|/|Σᵢ|) + tr(Σⱼ⁻¹Σᵢ) − d + δᵀΣⱼ⁻¹δ]`, `δ = μᵢ − μⱼ`.
pub fn kl_divergence(pi: &GaussianParams, pj: &GaussianParams) -> Result<f64> {
    let ci = cholesky(&pi.covariance)?;
    let cj = cholesky(&pj.covariance)?;
    let delta = pi.mean - pj.mean;
    let trace = cj.solve(&pi.covariance).trace();
    let mahalanobis = delta.dot(&cj.solve(&delta));
    Ok(0.5 * (log_det(&cj) - log_det(&ci) + trace - DIM as f64 + mahalanobis))
}

/// Gaussian Rényi divergence of order `alpha`,
/// `(α/2)δᵀ(Σ*)⁻¹δ − 1/(2(α−1))·log(|Σ*| / (|Σᵢ|^{1−α}|Σⱼ|^α))` with
/// `Σ* = αΣⱼ + (1−α)Σᵢ`.
pub fn renyi_divergence(pi: &GaussianParams, pj: &GaussianParams, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let blended = pj.covariance * alpha + pi.covariance * (1.0 - alpha);
    if alpha > 1.0 && blended.symmetric_eigenvalues().min() <= 0.0 {
        return Err(Error::numerical(format!(
            "blended covariance not positive definite at alpha {alpha}"
        )));
    }
    let cb = cholesky(&blended)?;
    let ci = cholesky(&pi.covariance)?;
    let cj = cholesky(&pj.covariance)?;
    let delta = pi.mean - pj.mean;
    let quad = delta.dot(&cb.solve(&delta));
    let log_ratio = log_det(&cb) - (1.0 - alpha) * log_det(&ci) - alpha * log_det(&cj);
    Ok(0.5 * alpha * quad - log_ratio / (2.0 * (alpha - 1.0)))
}

/// `|Σⱼ⁻¹δ|² + tr(Σⱼ⁻²Σᵢ − 2Σⱼ⁻¹ + Σᵢ⁻¹)`.
///
/// A closed-form Fisher-information score, not the Fisher-Rao geodesic
/// distance, which has no closed form for full covariances.
pub fn fisher_metric(pi: &GaussianParams, pj: &GaussianParams) -> Result<f64> {
    let ci = cholesky(&pi.covariance)?;
    let cj = cholesky(&pj.covariance)?;
    let inv_j = cj.inverse();
    let inv_i = ci.inverse();
    let delta = pi.mean - pj.mean;
    let shift = (inv_j * delta).norm_squared();
    let trace = (inv_j * inv_j * pi.covariance).trace() - 2.0 * inv_j.trace() + inv_i.trace();
    Ok(shift + trace)
}

/// `⅛δᵀΣ⁻¹δ + ½log(|Σ|/√(|Σᵢ||Σⱼ|))` with `Σ = (Σᵢ + Σⱼ)/2`.
pub fn bhattacharyya_distance(pi: &GaussianParams, pj: &GaussianParams) -> Result<f64> {
    let mid: Matrix4<f64> = (pi.covariance + pj.covariance) * 0.5;
    let cm = cholesky(&mid)?;
    let ci = cholesky(&pi.covariance)?;
    let cj = cholesky(&pj.covariance)?;
    let delta = pi.mean - pj.mean;
    let quad = delta.dot(&cm.solve(&delta));
    Ok(quad / 8.0 + 0.5 * (log_det(&cm) - 0.5 * (log_det(&ci) + log_det(&cj))))
}

/// Squared 2-Wasserstein distance,
/// `|δ|² + tr(Σᵢ + Σⱼ − 2(√Σᵢ Σⱼ √Σᵢ)^{1/2})`.
pub fn wasserstein2_squared(pi: &GaussianParams, pj: &GaussianParams) -> Result<f64> {
    let root_i = sqrtm_psd(&pi.covariance)?;
    let cross = sqrtm_psd(&(root_i * pj.covariance * root_i))?;
    let delta = pi.mean - pj.mean;
    Ok(delta.norm_squared() + (pi.covariance + pj.covariance).trace() - 2.0 * cross.trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_spd(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
        let a = Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        a * a.transpose() + Matrix4::identity() * 0.2
    }

    fn random_gaussian(rng: &mut ChaCha8Rng) -> GaussianParams {
        let mean = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        GaussianParams::new(mean, random_spd(rng)).unwrap()
    }

    fn all(pi: &GaussianParams, pj: &GaussianParams) -> [f64; 5] {
        [
            kl_divergence(pi, pj).unwrap(),
            renyi_divergence(pi, pj, 0.3).unwrap(),
            fisher_metric(pi, pj).unwrap(),
            bhattacharyya_distance(pi, pj).unwrap(),
            wasserstein2_squared(pi, pj).unwrap(),
        ]
    }

    fn iso(mean: [f64; 4], var: f64) -> GaussianParams {
        GaussianParams::new(Vector4::from(mean), Matrix4::identity() * var).unwrap()
    }

    #[test]
    fn identical_inputs_give_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = random_gaussian(&mut rng);
            for v in all(&p, &p) {
                assert!(v.abs() < 1e-9, "{v}");
            }
        }
    }

    #[test]
    fn hand_evaluated_values() {
        let a = iso([1.0, 0.0, 0.0, 0.0], 1.0);
        let b = iso([0.0; 4], 1.0);
        assert!((kl_divergence(&a, &b).unwrap() - 0.5).abs() < 1e-12);

        let delta = Vector4::new(0.3, -0.1, 0.2, 0.5);
        let cov = random_spd(&mut ChaCha8Rng::seed_from_u64(2));
        let pa = GaussianParams::new(delta, cov).unwrap();
        let pb = GaussianParams::new(Vector4::zeros(), cov).unwrap();
        let expected = 0.15 * delta.dot(&(cov.try_inverse().unwrap() * delta));
        assert!((renyi_divergence(&pa, &pb, 0.3).unwrap() - expected).abs() < 1e-12);

        let d = Vector4::new(0.5, -1.0, 2.0, 0.0);
        let pa = GaussianParams::new(d, Matrix4::identity()).unwrap();
        let pb = iso([0.0; 4], 1.0);
        assert!((fisher_metric(&pa, &pb).unwrap() - d.norm_squared()).abs() < 1e-12);
        assert!((bhattacharyya_distance(&pa, &pb).unwrap() - d.norm_squared() / 8.0).abs() < 1e-12);

        let wide = iso([0.0; 4], 2.0);
        assert!((fisher_metric(&wide, &pb).unwrap() - 2.0).abs() < 1e-12);

        let (sa, sb) = (0.7, 1.9);
        let w = wasserstein2_squared(&iso([0.0; 4], sa * sa), &iso([0.0; 4], sb * sb)).unwrap();
        assert!((w - 4.0 * (sa - sb) * (sa - sb)).abs() < 1e-12);
    }

    #[test]
    fn non_negative_and_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut asymmetric = [false; 3];
        for _ in 0..1000 {
            let (p, q) = (random_gaussian(&mut rng), random_gaussian(&mut rng));
            let fwd = all(&p, &q);
            let bwd = all(&q, &p);
            for v in fwd {
                assert!(v >= -1e-9, "{fwd:?}");
            }
            assert!((fwd[3] - bwd[3]).abs() < 1e-12);
            assert!((fwd[4] - bwd[4]).abs() < 1e-10);
            for k in 0..3 {
                asymmetric[k] |= (fwd[k] - bwd[k]).abs() > 1e-6;
            }
        }
        assert_eq!(asymmetric, [true; 3]);
    }

    /// Covariances with eigenvalues in [0.5, 2] and random orientation.
    fn moderate_gaussian(rng: &mut ChaCha8Rng) -> GaussianParams {
        let q = Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0)).qr().q();
        let d = Vector4::from_fn(|_, _| rng.random_range(0.5..2.0));
        let cov = q * Matrix4::from_diagonal(&d) * q.transpose();
        let mean = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        GaussianParams::new(mean, (cov + cov.transpose()) * 0.5).unwrap()
    }

    #[test]
    fn renyi_approaches_kl() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let (p, q) = (moderate_gaussian(&mut rng), moderate_gaussian(&mut rng));
            let kl = kl_divergence(&p, &q).unwrap();
            for alpha in [0.999, 1.001] {
                let r = renyi_divergence(&p, &q, alpha).unwrap();
                assert!((r - kl).abs() < 0.01 * kl, "alpha {alpha}: {r} vs {kl}");
            }
        }
        // Badly conditioned pairs converge too, linearly in |α − 1|.
        for _ in 0..200 {
            let (p, q) = (random_gaussian(&mut rng), random_gaussian(&mut rng));
            let kl = kl_divergence(&p, &q).unwrap();
            let coarse = (renyi_divergence(&p, &q, 1.0 - 1e-3).unwrap() - kl).abs();
            let fine = (renyi_divergence(&p, &q, 1.0 - 1e-4).unwrap() - kl).abs();
            assert!(fine < 0.2 * coarse + 1e-9, "{coarse} {fine}");
        }
        let p = iso([0.0; 4], 1.0);
        assert!(matches!(renyi_divergence(&p, &p, 1.0), Err(Error::InvalidInput(_))));
        // alpha > 1 with a much wider first argument makes Σ* indefinite.
        let wide = iso([0.0; 4], 10.0);
        assert!(matches!(renyi_divergence(&wide, &p, 3.0), Err(Error::Numerical(_))));
    }

    #[test]
    fn kl_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3 {
            let (p, q) = (random_gaussian(&mut rng), random_gaussian(&mut rng));
            let lp = p.covariance.cholesky().unwrap();
            let (ip, iq) = (p.covariance.try_inverse().unwrap(), q.covariance.try_inverse().unwrap());
            let (dp, dq) = (p.covariance.determinant().ln(), q.covariance.determinant().ln());
            let n = 200_000;
            let mut sum = 0.0;
            for _ in 0..n {
                let z = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
                let x = p.mean + lp.l() * z;
                let (ep, eq) = (x - p.mean, x - q.mean);
                sum += 0.5 * (eq.dot(&(iq * eq)) + dq - ep.dot(&(ip * ep)) - dp);
            }
            let mc = sum / n as f64;
            let kl = kl_divergence(&p, &q).unwrap();
            assert!((mc - kl).abs() < 0.02 * kl, "mc {mc} kl {kl}");
        }
    }

    #[test]
    fn shrinking_posterior_increases_kl_to_wider_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let post = random_gaussian(&mut rng);
            let prior = GaussianParams::new(
                Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0)),
                post.covariance + random_spd(&mut rng),
            )
            .unwrap();
            let c = rng.random_range(0.05..0.95);
            let shrunk = GaussianParams::new(post.mean, post.covariance * c).unwrap();
            assert!(kl_divergence(&shrunk, &prior).unwrap() > kl_divergence(&post, &prior).unwrap());
        }
    }

    #[test]
    fn rank_deficient_covariances_are_handled() {
        let v = Vector4::new(0.5, 0.5, 0.5, 0.5);
        let p = GaussianParams::new(v, v * v.transpose() * 1e4).unwrap();
        let q = GaussianParams::new(v, v * v.transpose() * 1e4 + Matrix4::identity() * 1e-3).unwrap();
        for x in all(&p, &q) {
            assert!(x.is_finite() && x >= -1e-9);
        }
    }
}
