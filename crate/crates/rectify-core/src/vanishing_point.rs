//! Post-hoc vanishing-point estimation: given the vanishing line and
//! division parameter, the translation direction's vanishing point solves
//! an equality-constrained least-squares problem.
//!
//! Eliminating the homogeneous scale from `a x' = (I + u l^T) x` leaves two
//! linear equations in u per correspondence; the incidence `l^T u = 0` is
//! enforced exactly through the KKT system.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::geom::{undistort_point, GeomError, LineH, PointH};
use crate::solver::Correspondence;
use crate::tol;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VpError {
    /// The KKT matrix is numerically singular (degenerate geometry).
    #[error("KKT system is rank deficient (condition estimate {cond:.3e})")]
    RankDeficient { cond: f64 },
    /// Fewer than two correspondences survived the dehomogenization gate.
    #[error("only {usable} usable correspondences (need at least 2)")]
    TooFewCorrespondences { usable: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Constrained least-squares estimate of the vanishing point, plus the
/// number of correspondences dropped for sitting too close to the modeled
/// horizon (undistorted |w| below tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct VpEstimate {
    pub u: PointH,
    pub excluded: usize,
}

/// Solve `min ||M u - y||^2  s.t.  l^T u = 0` over the undistorted,
/// dehomogenized correspondences.
pub fn recover_vp(
    l: &LineH,
    lambda: f64,
    corrs: &[Correspondence],
) -> Result<VpEstimate, VpError> {
    debug_assert!((l.0.z - 1.0).abs() < 1e-9, "line must be normalized to l3 = 1");

    let mut mtm = Matrix3::<f64>::zeros();
    let mut mty = Vector3::<f64>::zeros();
    let mut usable = 0usize;
    let mut excluded = 0usize;

    for corr in corrs {
        let a = undistort_point(&corr.source, lambda);
        let b = undistort_point(&corr.target, lambda);
        let (Ok(xy), Ok(xy_p)) = (a.dehomogenize(), b.dehomogenize()) else {
            excluded += 1;
            continue;
        };
        let lta = l.0.dot(&Vector3::new(xy.x, xy.y, 1.0));
        // x + u1 (l.a) = x' (1 + u3 (l.a)), same for y.
        let rows = [
            (Vector3::new(lta, 0.0, -xy_p.x * lta), xy_p.x - xy.x),
            (Vector3::new(0.0, lta, -xy_p.y * lta), xy_p.y - xy.y),
        ];
        for (r, rhs) in rows {
            mtm += r * r.transpose();
            mty += r * rhs;
        }
        usable += 1;
    }
    if usable < 2 {
        return Err(VpError::TooFewCorrespondences { usable });
    }

    let mut kkt = Matrix4::<f64>::zeros();
    kkt.fixed_view_mut::<3, 3>(0, 0).copy_from(&mtm);
    kkt.fixed_view_mut::<3, 1>(0, 3).copy_from(&l.0);
    kkt.fixed_view_mut::<1, 3>(3, 0).copy_from(&l.0.transpose());
    let rhs = Vector4::new(mty.x, mty.y, mty.z, 0.0);

    let Some(inv) = kkt.try_inverse() else {
        return Err(VpError::RankDeficient { cond: f64::INFINITY });
    };
    let norm_1 = |m: &Matrix4<f64>| {
        (0..4).map(|c| m.column(c).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    };
    let cond = norm_1(&kkt) * norm_1(&inv);
    if !cond.is_finite() || cond > tol::KKT_COND_MAX {
        return Err(VpError::RankDeficient { cond });
    }

    let sol = inv * rhs;
    let mut u = Vector3::new(sol.x, sol.y, sol.z);
    // Project out any numerical drift off the incidence constraint.
    let l2 = l.0.norm_squared();
    u -= l.0 * (l.0.dot(&u) / l2);
    Ok(VpEstimate { u: PointH(u), excluded })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::ConjugateTranslation;
    use crate::scene::{add_noise, gen_scene, LambdaMode, SceneConfig};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scene_with(seed: u64, lambda: f64) -> crate::scene::GroundTruthScene {
        let cfg = SceneConfig { lambda: LambdaMode::Fixed(lambda), frames: 1, ..SceneConfig::default() };
        gen_scene(&cfg, seed).unwrap()
    }

    #[test]
    fn noiseless_recovery_matches_rank_one_third_column() {
        for seed in 0..50u64 {
            let mut rng = StdRng::seed_from_u64(seed);
            let lambda = rng.random_range(-6.0..0.0);
            let scene = scene_with(seed, lambda);
            let est = recover_vp(&scene.line, lambda, &scene.clean).unwrap();
            assert_eq!(est.excluded, 0);

            // Under l3 = 1, the third column of H - I is exactly u.
            let ct = ConjugateTranslation::from_camera(&scene.camera, scene.translations[0]).unwrap();
            let h = ct.matrix();
            let u_expected = (h - crate::geom::Mat3::identity()).column(2).into_owned();
            let err = (est.u.0 - u_expected).norm() / u_expected.norm();
            assert!(err <= 1e-8, "seed {seed}: relative error {err}");
        }
    }

    #[test]
    fn incidence_holds_exactly_on_noisy_input() {
        for seed in 0..20u64 {
            let scene = scene_with(seed, -4.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noisy = add_noise(&scene.clean, 2.0, &scene.image, &mut rng);
            let est = recover_vp(&scene.line, -4.0, &noisy).unwrap();
            let dot = scene.line.0.dot(&est.u.0).abs();
            assert!(dot <= 1e-12 * est.u.0.norm().max(1.0), "seed {seed}: l.u = {dot}");
        }
    }

    #[test]
    fn exact_model_consistency_residual() {
        // Replace targets with exact images under the true conjugate
        // translation; the least-squares residual must vanish.
        for seed in 0..20u64 {
            let scene = scene_with(seed, -3.0);
            let ct = ConjugateTranslation::from_camera(&scene.camera, scene.translations[0]).unwrap();
            let est = recover_vp(&scene.line, -3.0, &scene.clean).unwrap();

            for corr in &scene.clean {
                let a = undistort_point(&corr.source, -3.0).dehomogenize().unwrap();
                let b = undistort_point(&corr.target, -3.0).dehomogenize().unwrap();
                let lta = scene.line.0.dot(&Vector3::new(a.x, a.y, 1.0));
                let u = est.u.0;
                let r1 = (lta * u.x - b.x * lta * u.z) - (b.x - a.x);
                let r2 = (lta * u.y - b.y * lta * u.z) - (b.y - a.y);
                assert!(r1.abs() <= 1e-10 && r2.abs() <= 1e-10, "seed {seed}: ({r1}, {r2})");
            }
            let _ = ct;
        }
    }

    #[test]
    fn invariant_under_translating_the_correspondences() {
        // Feeding (x', H x') instead of (x, x') estimates the same u.
        let scene = scene_with(33, -4.0);
        let ct = ConjugateTranslation::from_camera(&scene.camera, scene.translations[0]).unwrap();
        let h = ct.matrix();
        let moved: Vec<Correspondence> = scene
            .clean
            .iter()
            .map(|c| {
                let src_pin = undistort_point(&c.target, -4.0);
                let dst_pin = PointH(h * src_pin.0);
                let dst = crate::geom::distort_point(&dst_pin, -4.0).unwrap();
                Correspondence::new(c.target, dst, c.frame_id, c.direction_id)
            })
            .collect();
        let e1 = recover_vp(&scene.line, -4.0, &scene.clean).unwrap();
        let e2 = recover_vp(&scene.line, -4.0, &moved).unwrap();
        let err = (e1.u.0 - e2.u.0).norm() / e1.u.0.norm();
        assert!(err <= 1e-8, "relative drift {err}");
    }

    #[test]
    fn degenerate_geometry_is_rejected() {
        // All correspondences identical: M has rank <= 2 and the KKT
        // system cannot isolate u.
        let scene = scene_with(8, -4.0);
        let c = scene.clean[0];
        match recover_vp(&scene.line, -4.0, &[c, c, c]) {
            Err(VpError::RankDeficient { .. }) => {}
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }
}
