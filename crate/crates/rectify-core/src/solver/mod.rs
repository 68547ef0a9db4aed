//! Minimal solver: from 3 radially-distorted conjugately-translated point
//! correspondences, jointly recover the division-model parameter and the
//! vanishing line.
//!
//! Each correspondence pair contributes a "meet of joins" whose transpose
//! annihilates the vanishing line. With the division parameter kept
//! symbolic, three meets stack into a 3x3 matrix of polynomials whose
//! determinant is a univariate quartic; its feasible real roots give the
//! candidate undistortions, and the null space at each root gives the
//! line. Ten row combinations are admissible; [`solve_best`] scores all of
//! them by symmetric transfer error and returns the argmin.

pub mod vp_system;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::geom::{join, undistort_point, GeomError, LineH, Mat3, PointH};
use crate::metrics;
use crate::poly::{real_roots_quartic, Poly, PolyError};
use crate::tol;
use crate::vanishing_point::{recover_vp, VpError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    /// A selected row is the zero polynomial (collinear joins, duplicate points).
    #[error("selection has a degenerate (zero) constraint row")]
    DegenerateSelection,
    /// The determinant vanishes for every lambda: a one-parameter family of
    /// solutions exists and cannot be scored.
    #[error("determinant polynomial is identically zero")]
    IdenticallyZeroDeterminant,
    /// No real root inside the feasibility window.
    #[error("no feasible root for the division parameter")]
    NoFeasibleRoot,
    /// Every selection degenerated or was rejected.
    #[error("no valid model from any constraint selection")]
    NoValidModel,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Whether the correspondence translates with the shared unit magnitude of
/// its frame or an unknown relative one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleClass {
    Unit,
    Unknown,
}

/// A pair of distortion-center-subtracted, normalized distorted points
/// related by a conjugate translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub source: PointH,
    pub target: PointH,
    pub frame_id: u32,
    pub direction_id: u32,
    pub scale_class: ScaleClass,
}

impl Correspondence {
    pub fn new(source: PointH, target: PointH, frame_id: u32, direction_id: u32) -> Self {
        Correspondence { source, target, frame_id, direction_id, scale_class: ScaleClass::Unit }
    }
}

/// One row of the constraint matrix, identified by the pair of joins whose
/// meet it encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeetRow {
    /// Meet of the intra-frame joins (x_i, x_j) and (x'_i, x'_j): the
    /// vanishing point of an auxiliary direction of the repeated frame.
    IntraFrame { i: usize, j: usize },
    /// Meet of the correspondence joins (x_i, x'_i) and (x_j, x'_j): the
    /// vanishing point of the frame's own translation direction.
    CrossJoin { i: usize, j: usize },
}

/// Three meet rows; at most one may be a cross join, because nothing
/// constrains two cross-join meets to coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeetSelection {
    pub rows: [MeetRow; 3],
}

impl MeetSelection {
    pub fn label(&self) -> String {
        self.rows
            .iter()
            .map(|r| match r {
                MeetRow::IntraFrame { i, j } => format!("V{}{}", i + 1, j + 1),
                MeetRow::CrossJoin { i, j } => format!("U{}{}", i + 1, j + 1),
            })
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// The 10 admissible selections in deterministic order: the all-intra
/// selection first, then (intra pair, cross row) lexicographic.
pub fn enumerate_selections() -> Vec<MeetSelection> {
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let intra = |&(i, j): &(usize, usize)| MeetRow::IntraFrame { i, j };
    let cross = |&(i, j): &(usize, usize)| MeetRow::CrossJoin { i, j };

    let mut out = Vec::with_capacity(10);
    out.push(MeetSelection { rows: [intra(&pairs[0]), intra(&pairs[1]), intra(&pairs[2])] });
    for keep in [(0usize, 1usize), (0, 2), (1, 2)] {
        for c in &pairs {
            out.push(MeetSelection { rows: [intra(&pairs[keep.0]), intra(&pairs[keep.1]), cross(c)] });
        }
    }
    out
}

/// Where a model came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Selection(MeetSelection),
    Label(String),
}

/// A recovered vanishing point tagged with its translation direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedVp {
    pub direction_id: u32,
    pub point: PointH,
}

/// Estimated rectification: vanishing line (l3 = 1), division parameter,
/// optional vanishing point(s), and the symmetric-transfer score of the
/// minimal sample it was solved from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectifyModel {
    pub line: LineH,
    pub lambda: f64,
    pub vps: Vec<DirectedVp>,
    pub score: Option<f64>,
    pub provenance: Provenance,
}

impl RectifyModel {
    pub fn vp_for(&self, direction_id: u32) -> Option<&PointH> {
        self.vps.iter().find(|v| v.direction_id == direction_id).map(|v| &v.point)
    }

    /// `I + u l^T` for the given direction.
    pub fn conjugate_translation(&self, direction_id: u32) -> Option<Mat3> {
        self.vp_for(direction_id)
            .map(|u| Mat3::identity() + u.0 * self.line.0.transpose())
    }
}

fn lift_poly(p: &PointH) -> [Poly; 3] {
    let r2 = p.x() * p.x() + p.y() * p.y();
    [Poly::constant(p.x()), Poly::constant(p.y()), Poly::linear(1.0, r2)]
}

fn cross_poly(a: &[Poly; 3], b: &[Poly; 3]) -> [Poly; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Symbolic meet of the joins (a1, a2) and (b1, b2) of undistorted lifts,
/// with the division parameter left as the polynomial variable. Entry
/// degrees are (<=1, <=1, <=2).
pub fn meet_row(a1: &PointH, a2: &PointH, b1: &PointH, b2: &PointH) -> [Poly; 3] {
    let row = cross_poly(
        &cross_poly(&lift_poly(a1), &lift_poly(a2)),
        &cross_poly(&lift_poly(b1), &lift_poly(b2)),
    );
    debug_assert!(row[0].degree() <= 1 && row[1].degree() <= 1 && row[2].degree() <= 2);
    row
}

/// Stack the three meet rows of a selection into the polynomial
/// constraint matrix.
pub fn build_constraint_matrix(
    corrs: &[Correspondence; 3],
    sel: &MeetSelection,
) -> Result<[[Poly; 3]; 3], SolverError> {
    let mut m = [[Poly::zero(); 3]; 3];
    for (k, row) in sel.rows.iter().enumerate() {
        m[k] = match *row {
            MeetRow::IntraFrame { i, j } => meet_row(
                &corrs[i].source,
                &corrs[j].source,
                &corrs[i].target,
                &corrs[j].target,
            ),
            MeetRow::CrossJoin { i, j } => meet_row(
                &corrs[i].source,
                &corrs[i].target,
                &corrs[j].source,
                &corrs[j].target,
            ),
        };
    }
    let row_scale = |r: &[Poly; 3]| r.iter().map(Poly::max_abs_coeff).fold(0.0, f64::max);
    let scale = m.iter().map(row_scale).fold(0.0, f64::max);
    if scale == 0.0 || m.iter().any(|r| row_scale(r) <= tol::ROW_ZERO_REL * scale) {
        return Err(SolverError::DegenerateSelection);
    }
    Ok(m)
}

fn det_poly(m: &[[Poly; 3]; 3]) -> Poly {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn eval_matrix(m: &[[Poly; 3]; 3], lambda: f64) -> Mat3 {
    Mat3::from_fn(|r, c| m[r][c].eval(lambda))
}

/// Null vector of a (numerically) rank-2 matrix: the largest cross product
/// of two rows, with an SVD fallback when all three are tiny.
fn null_vector(m: &Mat3) -> Vector3<f64> {
    let rows: [Vector3<f64>; 3] =
        [m.row(0).transpose(), m.row(1).transpose(), m.row(2).transpose()];
    let candidates = [
        rows[0].cross(&rows[1]),
        rows[0].cross(&rows[2]),
        rows[1].cross(&rows[2]),
    ];
    let best = candidates
        .iter()
        .max_by(|a, b| a.norm_squared().partial_cmp(&b.norm_squared()).unwrap())
        .copied()
        .unwrap();
    if best.norm() > 1e-12 * m.norm() * m.norm() {
        return best;
    }
    let svd = m.svd(false, true);
    svd.v_t.unwrap().row(2).transpose()
}

/// Solve one constraint selection: candidates are (lambda, line) pairs for
/// every feasible real root of the determinant quartic, gated on the
/// nullspace residual and the l3 magnitude of the line.
pub fn solve_one(
    corrs: &[Correspondence; 3],
    sel: &MeetSelection,
) -> Result<Vec<RectifyModel>, SolverError> {
    let m = build_constraint_matrix(corrs, sel)?;
    let det = det_poly(&m);
    debug_assert!(det.degree() <= 4);

    let m_scale = m
        .iter()
        .flatten()
        .map(Poly::max_abs_coeff)
        .fold(0.0, f64::max);
    if det.max_abs_coeff() <= tol::DET_ZERO_REL * m_scale.powi(3) {
        return Err(SolverError::IdenticallyZeroDeterminant);
    }

    let roots = match real_roots_quartic(&det, tol::LAMBDA_FEASIBLE) {
        Ok(r) => r,
        Err(PolyError::IdenticallyZero) => return Err(SolverError::IdenticallyZeroDeterminant),
    };
    if roots.is_empty() {
        return Err(SolverError::NoFeasibleRoot);
    }

    let mut out = Vec::with_capacity(roots.len());
    for lambda in roots {
        let mv = eval_matrix(&m, lambda);
        let l = null_vector(&mv);
        let ln = l.norm();
        if ln == 0.0 {
            continue;
        }
        if (mv * (l / ln)).norm() > tol::NULLSPACE_RESIDUAL_REL * mv.norm() {
            continue;
        }
        let Ok(line) = LineH(l).normalized_l3() else {
            continue; // pencil through the distortion center
        };
        out.push(RectifyModel {
            line,
            lambda,
            vps: Vec::new(),
            score: None,
            provenance: Provenance::Selection(*sel),
        });
    }
    Ok(out)
}

/// Recover the vanishing point for a candidate and score it by the
/// symmetric transfer error over the whole minimal sample.
fn complete_candidate(
    mut model: RectifyModel,
    corrs: &[Correspondence; 3],
) -> Result<RectifyModel, VpError> {
    let vp = recover_vp(&model.line, model.lambda, corrs)?;
    model.vps = vec![DirectedVp { direction_id: corrs[0].direction_id, point: vp.u }];
    let score = metrics::symm_transfer_error(&model, corrs)
        .expect("model carries the vanishing point it was just given");
    model.score = Some(score);
    Ok(model)
}

/// Candidate order: score, then |lambda| (milder distortion wins ties).
fn candidate_rank(m: &RectifyModel) -> (f64, f64) {
    (m.score.unwrap_or(f64::INFINITY), m.lambda.abs())
}

/// Solve all 10 selections and return the candidate minimizing the sum of
/// symmetric transfer errors over the sample.
pub fn solve_best(corrs: &[Correspondence; 3]) -> Result<RectifyModel, SolverError> {
    let mut best: Option<RectifyModel> = None;
    for sel in enumerate_selections() {
        let Ok(cands) = solve_one(corrs, &sel) else {
            continue;
        };
        for cand in cands {
            let Ok(done) = complete_candidate(cand, corrs) else {
                continue;
            };
            let replace = match &best {
                None => true,
                Some(b) => candidate_rank(&done) < candidate_rank(b),
            };
            if replace {
                best = Some(done);
            }
        }
    }
    best.ok_or(SolverError::NoValidModel)
}

/// Baseline that draws one of the 10 selections uniformly at random and
/// keeps the first feasible candidate by |lambda| ascending.
pub fn solve_random<R: rand::Rng>(
    corrs: &[Correspondence; 3],
    rng: &mut R,
) -> Result<RectifyModel, SolverError> {
    let sels = enumerate_selections();
    let sel = sels[rng.random_range(0..sels.len())];
    let mut cands = solve_one(corrs, &sel)?;
    cands.sort_by(|a, b| a.lambda.abs().partial_cmp(&b.lambda.abs()).unwrap());
    for cand in cands {
        if let Ok(done) = complete_candidate(cand, corrs) {
            return Ok(done);
        }
    }
    Err(SolverError::NoValidModel)
}

/// Scale invariance helper used by tests and file loading: the numeric
/// meet of joins of undistorted points at a fixed lambda.
pub fn numeric_meet(
    a1: &PointH,
    a2: &PointH,
    b1: &PointH,
    b2: &PointH,
    lambda: f64,
) -> Vector3<f64> {
    let ja = join(&undistort_point(a1, lambda), &undistort_point(a2, lambda));
    let jb = join(&undistort_point(b1, lambda), &undistort_point(b2, lambda));
    ja.0.cross(&jb.0)
}
