//! Homogeneous 2D primitives, the one-parameter division model of radial
//! lens undistortion, rectifying homographies, and conjugate translations.
//!
//! All internal math runs in normalized, distortion-center-subtracted
//! coordinates: pixel coordinates are shifted by the image center and
//! scaled by `1 / (width + height)`. Pixel I/O converts at the boundary
//! via [`ImageFrame`].

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::tol;

pub type Mat3 = Matrix3<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeomError {
    /// The camera homography is not invertible.
    #[error("camera homography is singular")]
    SingularCamera,
    /// A vanishing line with |l3| ~ 0 cannot index an affine rectification.
    #[error("vanishing line has |l3|/||l|| = {ratio:.3e}, below tolerance")]
    DegenerateLine { ratio: f64 },
    /// The requested pinhole point lies outside the image of the distortion map.
    #[error("no real preimage under the division model (1 - 4*lambda*r^2 = {disc:.3e})")]
    NoRealPreimage { disc: f64 },
    /// Dehomogenization of a point at (numerical) infinity.
    #[error("point at infinity cannot be dehomogenized")]
    PointAtInfinity,
}

/// Homogeneous point of the real projective plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointH(pub Vector3<f64>);

/// Homogeneous line of the real projective plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineH(pub Vector3<f64>);

impl PointH {
    pub fn new(x: f64, y: f64, w: f64) -> Self {
        PointH(Vector3::new(x, y, w))
    }

    /// Finite point embedded with w = 1.
    pub fn from_xy(x: f64, y: f64) -> Self {
        PointH(Vector3::new(x, y, 1.0))
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn w(&self) -> f64 {
        self.0.z
    }

    /// Finite representative, or an error when the point is at infinity
    /// relative to its own scale.
    pub fn dehomogenize(&self) -> Result<Vector2<f64>, GeomError> {
        if self.0.z.abs() <= tol::EPS_W_REL * self.0.norm() {
            return Err(GeomError::PointAtInfinity);
        }
        Ok(Vector2::new(self.0.x / self.0.z, self.0.y / self.0.z))
    }
}

impl LineH {
    pub fn new(l1: f64, l2: f64, l3: f64) -> Self {
        LineH(Vector3::new(l1, l2, l3))
    }

    /// The line at infinity (0, 0, 1).
    pub fn at_infinity() -> Self {
        LineH(Vector3::new(0.0, 0.0, 1.0))
    }

    /// Rescale so l3 = 1. Errors when the line passes through the origin.
    pub fn normalized_l3(&self) -> Result<LineH, GeomError> {
        let ratio = self.0.z.abs() / self.0.norm();
        if ratio < tol::L3_REJECT_REL {
            return Err(GeomError::DegenerateLine { ratio });
        }
        Ok(LineH(self.0 / self.0.z))
    }
}

/// Line through two points.
///
/// The cross product of equal points is the zero vector; callers treat a
/// zero output as a degenerate configuration.
pub fn join(p: &PointH, q: &PointH) -> LineH {
    LineH(p.0.cross(&q.0))
}

/// Intersection of two lines. Zero output signals a degenerate pencil.
pub fn meet(a: &LineH, b: &LineH) -> PointH {
    PointH(a.0.cross(&b.0))
}

/// Skew-symmetric matrix such that `skew(p) * q = p x q`.
pub fn skew(p: &Vector3<f64>) -> Mat3 {
    Mat3::new(
        0.0, -p.z, p.y, //
        p.z, 0.0, -p.x, //
        -p.y, p.x, 0.0,
    )
}

/// Affine-rectifying homography indexed by a vanishing line: identity in
/// the first two rows, the line coefficients in the third.
pub fn rectify_homography(l: &LineH) -> Result<Mat3, GeomError> {
    let ratio = l.0.z.abs() / l.0.norm();
    if ratio < tol::L3_REJECT_REL {
        return Err(GeomError::DegenerateLine { ratio });
    }
    Ok(Mat3::new(
        1.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, //
        l.0.x, l.0.y, l.0.z,
    ))
}

/// Lift a distorted point (w = 1) to its undistorted homogeneous
/// representative: `(x, y, 1 + lambda * (x^2 + y^2))`.
///
/// The output may legitimately have w <= 0 for points beyond the modeled
/// field of view; callers check before dehomogenizing.
pub fn undistort_point(pd: &PointH, lambda: f64) -> PointH {
    debug_assert!((pd.w() - 1.0).abs() < 1e-9, "distorted points carry w = 1");
    let r2 = pd.x() * pd.x() + pd.y() * pd.y();
    PointH::new(pd.x(), pd.y(), 1.0 + lambda * r2)
}

/// Map a pinhole point to its distorted image (w = 1), taking the root of
/// `lambda*r*rt^2 - rt + r = 0` that is continuous at lambda = 0.
pub fn distort_point(p: &PointH, lambda: f64) -> Result<PointH, GeomError> {
    let xy = p.dehomogenize()?;
    let r = xy.norm();
    if r == 0.0 {
        return Ok(PointH::from_xy(xy.x, xy.y));
    }
    let disc = 1.0 - 4.0 * lambda * r * r;
    if disc < 0.0 {
        return Err(GeomError::NoRealPreimage { disc });
    }
    let rt = 2.0 * r / (1.0 + disc.sqrt());
    let s = rt / r;
    Ok(PointH::from_xy(xy.x * s, xy.y * s))
}

/// Pixel-space description of the image: size, distortion center, and the
/// `1 / (width + height)` normalization scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageFrame {
    pub width: f64,
    pub height: f64,
    pub center: Vector2<f64>,
    pub norm_scale: f64,
}

impl ImageFrame {
    /// Frame with the distortion center at the image center.
    pub fn new(width: f64, height: f64) -> Self {
        ImageFrame {
            width,
            height,
            center: Vector2::new(width / 2.0, height / 2.0),
            norm_scale: 1.0 / (width + height),
        }
    }

    pub fn with_center(width: f64, height: f64, cx: f64, cy: f64) -> Self {
        ImageFrame {
            width,
            height,
            center: Vector2::new(cx, cy),
            norm_scale: 1.0 / (width + height),
        }
    }

    /// Pixel point to normalized center-subtracted coordinates (w = 1).
    pub fn normalize(&self, px: Vector2<f64>) -> PointH {
        let p = (px - self.center) * self.norm_scale;
        PointH::from_xy(p.x, p.y)
    }

    /// Inverse of [`ImageFrame::normalize`].
    pub fn denormalize(&self, p: &PointH) -> Result<Vector2<f64>, GeomError> {
        let xy = p.dehomogenize()?;
        Ok(xy / self.norm_scale + self.center)
    }

    /// Half extents of the image in normalized units.
    pub fn half_extent(&self) -> Vector2<f64> {
        Vector2::new(self.width, self.height) * (0.5 * self.norm_scale)
    }

    /// True when a normalized point lies inside the image rectangle.
    pub fn contains(&self, p: &PointH) -> bool {
        match p.dehomogenize() {
            Ok(xy) => {
                let h = self.half_extent();
                xy.x.abs() <= h.x && xy.y.abs() <= h.y
            }
            Err(_) => false,
        }
    }
}

/// Plane-to-image homography standing in for the camera viewing the scene
/// plane z = 0, bundled with the ground-truth division parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPlane {
    pub matrix: Mat3,
    pub lambda: f64,
}

impl CameraPlane {
    pub fn new(matrix: Mat3, lambda: f64) -> Result<Self, GeomError> {
        if matrix.determinant().abs() < 1e-14 * matrix.norm().powi(3) {
            return Err(GeomError::SingularCamera);
        }
        Ok(CameraPlane { matrix, lambda })
    }

    pub fn inverse(&self) -> Mat3 {
        self.matrix
            .try_inverse()
            .expect("checked non-singular at construction")
    }

    /// Image of the scene plane's line at infinity: the inverse-transpose
    /// image of (0, 0, 1), rescaled to l3 = 1.
    pub fn vanishing_line(&self) -> Result<LineH, GeomError> {
        LineH(self.vanishing_line_raw()).normalized_l3()
    }

    /// Same line without the l3 normalization.
    pub fn vanishing_line_raw(&self) -> Vector3<f64> {
        self.inverse().transpose() * Vector3::new(0.0, 0.0, 1.0)
    }

    /// Conjugate translation induced by the scene translation `u_scene`:
    /// the camera-conjugated homogeneous translation matrix.
    pub fn conjugate_translation(&self, u_scene: Vector2<f64>) -> Mat3 {
        let t = Mat3::new(
            1.0, 0.0, u_scene.x, //
            0.0, 1.0, u_scene.y, //
            0.0, 0.0, 1.0,
        );
        self.matrix * t * self.inverse()
    }

    /// Project a scene-plane point to the pinhole image (homogeneous).
    pub fn project(&self, scene: Vector2<f64>) -> PointH {
        PointH(self.matrix * Vector3::new(scene.x, scene.y, 1.0))
    }

    /// Project and distort a scene-plane point, requiring a finite
    /// front-side image.
    pub fn project_distorted(&self, scene: Vector2<f64>) -> Result<PointH, GeomError> {
        let p = self.project(scene);
        if p.w() <= 0.0 {
            return Err(GeomError::PointAtInfinity);
        }
        distort_point(&p, self.lambda)
    }
}

/// Conjugate translation decomposed into its projective components:
/// `H = I + u * l^T` with `l` scaled so l3 = 1 and the translation
/// magnitude absorbed into `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateTranslation {
    pub u: PointH,
    pub l: LineH,
}

impl ConjugateTranslation {
    pub fn new(u: PointH, l: LineH) -> Self {
        debug_assert!((l.0.z - 1.0).abs() < 1e-9, "line must be normalized to l3 = 1");
        ConjugateTranslation { u, l }
    }

    /// Decompose the exact conjugation `P T(U) P^-1`: with
    /// `l = P^-T e3 / k` the vanishing point is `u = k * P * (ux, uy, 0)`.
    pub fn from_camera(camera: &CameraPlane, u_scene: Vector2<f64>) -> Result<Self, GeomError> {
        let l_raw = camera.vanishing_line_raw();
        let l = LineH(l_raw).normalized_l3()?;
        let u = camera.matrix * Vector3::new(u_scene.x, u_scene.y, 0.0) * l_raw.z;
        Ok(ConjugateTranslation { u: PointH(u), l })
    }

    pub fn matrix(&self) -> Mat3 {
        Mat3::identity() + self.u.0 * self.l.0.transpose()
    }

    /// Inverse via the rank-one update formula; exact when l^T u = 0.
    pub fn inverse_matrix(&self) -> Result<Mat3, GeomError> {
        let denom = 1.0 + self.l.0.dot(&self.u.0);
        if denom.abs() < 1e-12 {
            return Err(GeomError::SingularCamera);
        }
        Ok(Mat3::identity() - self.u.0 * self.l.0.transpose() / denom)
    }
}
