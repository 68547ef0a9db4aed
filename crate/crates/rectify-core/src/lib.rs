//! Joint estimation of one-parameter radial lens undistortion and affine
//! rectification of an imaged scene plane from conjugately-translated
//! point correspondences, with a synthetic evaluation harness.

pub mod geom;
pub mod poly;
pub mod tol;
