//! Constraint system of a radially-distorted conjugate translation that is
//! linear in the vanishing point.
//!
//! These evaluators exist as oracles: they score how well a parameter
//! tuple (line, division parameter, relative scale) explains a set of
//! correspondences, and expose the rank structure that a dedicated
//! vanishing-point-eliminating solver would exploit. No polynomial system
//! is solved here.

use nalgebra::{SMatrix, Vector3};

use crate::geom::{skew, undistort_point, LineH, Mat3, PointH};
use crate::solver::Correspondence;

/// Residual of `[f(x', lambda)]_x (I + s u l^T) f(x, lambda)`: zero (two
/// independent components) when the correspondence is consistent with the
/// conjugate translation.
pub fn translation_constraint_residuals(
    l: &LineH,
    u: &PointH,
    s_rel: f64,
    lambda: f64,
    corr: &Correspondence,
) -> Vector3<f64> {
    let a = undistort_point(&corr.source, lambda);
    let b = undistort_point(&corr.target, lambda);
    let h = Mat3::identity() + (u.0 * l.0.transpose()) * s_rel;
    skew(&b.0) * (h * a.0)
}

/// The 7x4 system `M(l1, l2, s3, lambda) (u1, u2, u3, 1)^T = 0` stacking
/// two independent constraint rows per correspondence (relative scales
/// 1, 1, s3) and the incidence row (l1, l2, 1, 0).
///
/// At a consistent parameter tuple the matrix has rank 3 and its null
/// vector is proportional to the vanishing point extended by 1.
pub fn vp_system_matrix(
    l1: f64,
    l2: f64,
    s3: f64,
    lambda: f64,
    corrs: &[Correspondence; 3],
) -> SMatrix<f64, 7, 4> {
    let l = Vector3::new(l1, l2, 1.0);
    let mut m = SMatrix::<f64, 7, 4>::zeros();

    // Row layout: the third-skew rows of correspondences 1, 2, then their
    // second-skew rows, then both rows of correspondence 3, then incidence.
    // This puts the structural zeros at (1,3),(2,3),(3,2),(4,2),(5,3),(6,2)
    // in 1-based indexing.
    let scales = [1.0, 1.0, s3];
    let mut fill = |row: usize, i: usize, which: usize| {
        let a = undistort_point(&corrs[i].source, lambda).0;
        let b = undistort_point(&corrs[i].target, lambda).0;
        let lta = l.dot(&a) * scales[i];
        let cross = b.cross(&a);
        match which {
            // third row of [b]_x: (-b2, b1, 0)
            2 => {
                m[(row, 0)] = -b.y * lta;
                m[(row, 1)] = b.x * lta;
                m[(row, 3)] = cross.z;
            }
            // second row of [b]_x: (b3, 0, -b1)
            _ => {
                m[(row, 0)] = b.z * lta;
                m[(row, 2)] = -b.x * lta;
                m[(row, 3)] = cross.y;
            }
        }
    };
    fill(0, 0, 2);
    fill(1, 1, 2);
    fill(2, 0, 1);
    fill(3, 1, 1);
    fill(4, 2, 2);
    fill(5, 2, 1);
    m[(6, 0)] = l1;
    m[(6, 1)] = l2;
    m[(6, 2)] = 1.0;
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::ConjugateTranslation;
    use crate::scene::{gen_scene, LambdaMode, SceneConfig};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    struct Instance {
        l: LineH,
        u: PointH,
        lambda: f64,
        corrs: [Correspondence; 3],
    }

    fn instance(seed: u64) -> Instance {
        let mut rng = StdRng::seed_from_u64(seed);
        let lambda = rng.random_range(-6.0..0.0);
        let cfg = SceneConfig { lambda: LambdaMode::Fixed(lambda), frames: 1, ..SceneConfig::default() };
        let scene = gen_scene(&cfg, seed).unwrap();
        let ct = ConjugateTranslation::from_camera(&scene.camera, scene.translations[0]).unwrap();
        Instance {
            l: ct.l,
            u: ct.u,
            lambda,
            corrs: scene.clean[..3].try_into().unwrap(),
        }
    }

    #[test]
    fn residuals_vanish_at_ground_truth() {
        for seed in 0..100u64 {
            let inst = instance(seed);
            for corr in &inst.corrs {
                let r = translation_constraint_residuals(&inst.l, &inst.u, 1.0, inst.lambda, corr);
                assert!(r.norm() <= 1e-10, "seed {seed}: residual {}", r.norm());
            }
        }
    }

    #[test]
    fn residual_is_orthogonal_to_translated_lift() {
        let inst = instance(7);
        for corr in &inst.corrs {
            // Perturb so the residual is nonzero; it stays in the image of
            // the rank-2 skew matrix, hence orthogonal to the lift.
            let r = translation_constraint_residuals(&inst.l, &inst.u, 1.3, inst.lambda + 0.2, corr);
            let b = undistort_point(&corr.target, inst.lambda + 0.2);
            assert!(r.dot(&b.0).abs() <= 1e-12 * r.norm().max(1e-300) * b.0.norm());
        }
    }

    #[test]
    fn perturbed_lambda_breaks_residual() {
        let inst = instance(9);
        let r = translation_constraint_residuals(&inst.l, &inst.u, 1.0, inst.lambda + 0.1, &inst.corrs[0]);
        assert!(r.norm() > 1e-8);
    }

    #[test]
    fn matrix_rank_drops_at_ground_truth() {
        for seed in 0..50u64 {
            let inst = instance(seed);
            let m = vp_system_matrix(inst.l.0.x, inst.l.0.y, 1.0, inst.lambda, &inst.corrs);
            let svd = m.svd(false, true);
            let sv = svd.singular_values;
            assert!(sv[3] <= 1e-8 * sv[0], "seed {seed}: s4/s1 = {}", sv[3] / sv[0]);

            let vt = svd.v_t.unwrap();
            let null = vt.row(3).transpose();
            let scaled = null / null[3];
            let err = (scaled.fixed_rows::<3>(0) - inst.u.0).norm() / inst.u.0.norm();
            assert!(err <= 1e-6, "seed {seed}: null-vector error {err}");
        }
    }

    #[test]
    fn wrong_lambda_restores_full_rank() {
        let mut rng = StdRng::seed_from_u64(31);
        for seed in 0..20u64 {
            let inst = instance(seed);
            let wrong = inst.lambda + rng.random_range(0.3..1.5);
            let m = vp_system_matrix(inst.l.0.x, inst.l.0.y, 1.0, wrong, &inst.corrs);
            let sv = m.svd(false, false).singular_values;
            assert!(sv[3] / sv[0] > 1e-6, "seed {seed}: s4/s1 = {}", sv[3] / sv[0]);
        }
    }

    #[test]
    fn sparsity_pattern_matches_row_layout() {
        let inst = instance(3);
        let m = vp_system_matrix(0.2, -0.3, 0.8, -2.0, &inst.corrs);
        for (row, col) in [(0, 2), (1, 2), (2, 1), (3, 1), (4, 2), (5, 1)] {
            assert_eq!(m[(row, col)], 0.0, "expected structural zero at ({row},{col})");
        }
        assert_eq!(m[(6, 2)], 1.0);
        assert_eq!(m[(6, 3)], 0.0);
    }
}
