//! Constraint deviation scoring.
//!
//! Every constraint maps to a satisfaction score in `[0,1]`; 1 means exactly
//! satisfied. Ratio-family scores use the symmetric form `min(r, 1/r)` so
//! overshoot and undershoot are penalized alike and scores stay in range.
//! Relational constraints score 1 or 0 (a strictness margin of 1e-9 keeps
//! exact equality from flapping). The loss of a configuration is the largest
//! deviation `|1 - score|` over all constraints, so minimizing it maximizes
//! the worst constraint's satisfaction.

use crate::ast::Origin;
use crate::geometry::{self, Point, LENGTH_EPS};
use crate::scene::{AngTerm, Ang, ConstraintKind, LenTerm, RelOp, Scene, Seg};
use serde::{Deserialize, Serialize};

/// Margin for strict and non-strict inequality checks.
const REL_MARGIN: f64 = 1e-9;

/// Score family a constraint contributes to in the aggregate indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    LinRat,
    LinRel,
    AngVal,
    AngRat,
    AngRel,
    /// Containment and other indicator constraints: counted in the loss but
    /// in neither aggregate index.
    Other,
}

impl ConstraintKind {
    pub fn family(&self) -> Family {
        match self {
            ConstraintKind::LengthValue { .. }
            | ConstraintKind::LengthRatio { .. }
            | ConstraintKind::PointLineDistance { .. } => Family::LinRat,
            ConstraintKind::LengthRelation { .. } => Family::LinRel,
            ConstraintKind::AngleValue { .. }
            | ConstraintKind::Parallel { .. }
            | ConstraintKind::Perpendicular { .. } => Family::AngVal,
            ConstraintKind::AngleRatio { .. } | ConstraintKind::CentralAngleRatio { .. } => {
                Family::AngRat
            }
            ConstraintKind::AngleRelation { .. } => Family::AngRel,
            ConstraintKind::Containment { .. } => Family::Other,
        }
    }
}

/// Score of one constraint under a resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub origin: Origin,
    pub family: Family,
    pub label: String,
    pub score: f64,
}

/// All constraint scores for one configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub entries: Vec<ScoreEntry>,
    /// Origins of constraints that touched a degenerate point (scored 0).
    pub degeneracy_penalized: Vec<Origin>,
}

/// Loss of a configuration: the largest deviation from perfect satisfaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Loss {
    pub value: f64,
    /// Origin of the worst constraint (first among ties); `None` when the
    /// scene has no constraints.
    pub argmax: Option<Origin>,
}

impl Loss {
    pub fn from_scores(scores: &ScoreVector) -> Loss {
        let mut value = 0.0;
        let mut argmax = None;
        for entry in &scores.entries {
            let dev = (1.0 - entry.score).abs();
            if dev > value {
                value = dev;
                argmax = Some(entry.origin);
            }
        }
        Loss { value, argmax }
    }
}

/// Euclidean length of a segment.
pub fn segment_length(a: Point, b: Point) -> f64 {
    geometry::segment_length(a, b)
}

/// Interior angle in degrees at `vertex`, in [0, 180]; 0 for degenerate rays.
pub fn angle_at(a: Point, vertex: Point, c: Point) -> f64 {
    geometry::angle_at(a, vertex, c)
}

fn symmetric_ratio(r: f64) -> f64 {
    if r <= 0.0 || !r.is_finite() {
        0.0
    } else if r > 1.0 {
        1.0 / r
    } else {
        r
    }
}

/// Length-ratio score: generated lengths `gen_i : gen_j` against the target
/// ratio. Zero when either generated length vanishes.
pub fn score_length_ratio(gen_i: f64, gen_j: f64, target: (f64, f64)) -> f64 {
    if gen_i < LENGTH_EPS || gen_j < LENGTH_EPS {
        return 0.0;
    }
    let r = (gen_i / gen_j) / (target.0 / target.1);
    symmetric_ratio(r)
}

/// Relational score shared by lengths and angles: a symmetric ratio for
/// equality, an indicator for inequalities.
fn score_relation(left: f64, right: f64, rel: RelOp) -> f64 {
    match rel {
        RelOp::Eq => {
            if left.abs() < LENGTH_EPS && right.abs() < LENGTH_EPS {
                1.0
            } else if right.abs() < LENGTH_EPS || left * right <= 0.0 {
                0.0
            } else {
                symmetric_ratio(left / right)
            }
        }
        RelOp::Gt => ((left - right) > REL_MARGIN) as u8 as f64,
        RelOp::Ge => ((left - right) >= -REL_MARGIN) as u8 as f64,
        RelOp::Lt => ((right - left) > REL_MARGIN) as u8 as f64,
        RelOp::Le => ((right - left) >= -REL_MARGIN) as u8 as f64,
    }
}

/// Length-relation score over the summed sides of the expression.
pub fn score_length_relation(left_sum: f64, right_sum: f64, rel: RelOp) -> f64 {
    score_relation(left_sum, right_sum, rel)
}

/// Angle-value score: ratio of generated to target angle, symmetric; the
/// both-zero case scores 1, a single zero scores 0.
pub fn score_angle_value(theta: f64, theta_target: f64) -> f64 {
    let gen_zero = theta.abs() < LENGTH_EPS;
    let tgt_zero = theta_target.abs() < LENGTH_EPS;
    match (gen_zero, tgt_zero) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        (false, false) => symmetric_ratio(theta / theta_target),
    }
}

/// Angle-ratio score; same shape as [`score_length_ratio`].
pub fn score_angle_ratio(gen_i: f64, gen_j: f64, target: (f64, f64)) -> f64 {
    score_length_ratio(gen_i, gen_j, target)
}

/// Angle-relation score; same shape as [`score_length_relation`].
pub fn score_angle_relation(left_sum: f64, right_sum: f64, rel: RelOp) -> f64 {
    score_relation(left_sum, right_sum, rel)
}

fn seg_len(coords: &[Point], s: Seg) -> f64 {
    segment_length(coords[s.0], coords[s.1])
}

fn ang_deg(coords: &[Point], a: Ang) -> f64 {
    angle_at(coords[a.0], coords[a.1], coords[a.2])
}

/// Acute angle in [0, 90] between the directions of two segments; `None`
/// when either segment has (near-)zero length.
fn line_angle(coords: &[Point], a: Seg, b: Seg) -> Option<f64> {
    let u = (coords[a.1] - coords[a.0]).normalized()?;
    let v = (coords[b.1] - coords[b.0]).normalized()?;
    let theta = u.dot(v).clamp(-1.0, 1.0).acos().to_degrees();
    Some(theta.min(180.0 - theta))
}

/// Score a single constraint against resolved coordinates. Does not apply
/// the degeneracy penalty; [`evaluate`] handles that.
pub fn score_constraint(kind: &ConstraintKind, coords: &[Point]) -> f64 {
    match kind {
        ConstraintKind::LengthValue { seg, target } => {
            score_length_ratio(seg_len(coords, *seg), *target, (1.0, 1.0))
        }
        ConstraintKind::LengthRatio { a, b, target_num, target_den } => score_length_ratio(
            seg_len(coords, *a),
            seg_len(coords, *b),
            (*target_num, *target_den),
        ),
        ConstraintKind::LengthRelation { left, rel, right } => {
            let sum = |terms: &[(f64, LenTerm)]| -> f64 {
                terms
                    .iter()
                    .map(|(sign, t)| {
                        sign * match t {
                            LenTerm::Seg(s) => seg_len(coords, *s),
                            LenTerm::Const(c) => *c,
                        }
                    })
                    .sum()
            };
            score_length_relation(sum(left), sum(right), *rel)
        }
        ConstraintKind::PointLineDistance { p, line, target } => {
            match geometry::point_line_distance(coords[*p], coords[line.0], coords[line.1]) {
                Some(d) => score_length_ratio(d, *target, (1.0, 1.0)),
                None => 0.0,
            }
        }
        ConstraintKind::AngleValue { ang, target_deg } => {
            score_angle_value(ang_deg(coords, *ang), *target_deg)
        }
        ConstraintKind::AngleRatio { a, b, target_num, target_den }
        | ConstraintKind::CentralAngleRatio { a, b, target_num, target_den } => score_angle_ratio(
            ang_deg(coords, *a),
            ang_deg(coords, *b),
            (*target_num, *target_den),
        ),
        ConstraintKind::AngleRelation { left, rel, right } => {
            let sum = |terms: &[(f64, AngTerm)]| -> f64 {
                terms
                    .iter()
                    .map(|(sign, t)| {
                        sign * match t {
                            AngTerm::Ang(a) => ang_deg(coords, *a),
                            AngTerm::Const(c) => *c,
                        }
                    })
                    .sum()
            };
            score_angle_relation(sum(left), sum(right), *rel)
        }
        ConstraintKind::Parallel { a, b } => match line_angle(coords, *a, *b) {
            Some(dev) => (1.0 - dev / 90.0).clamp(0.0, 1.0),
            None => 0.0,
        },
        ConstraintKind::Perpendicular { a, b } => match line_angle(coords, *a, *b) {
            Some(theta) => score_angle_value(theta, 90.0),
            None => 0.0,
        },
        ConstraintKind::Containment { p, polygon } => {
            let poly: Vec<Point> = polygon.iter().map(|&i| coords[i]).collect();
            geometry::point_in_polygon(coords[*p], &poly) as u8 as f64
        }
    }
}

/// Evaluate every constraint of `scene` under resolved coordinates,
/// producing the score set and the loss. A constraint touching a degenerate
/// point scores 0.
pub fn evaluate(scene: &Scene, coords: &[Point], degenerate: &[bool]) -> (ScoreVector, Loss) {
    let mut scores = ScoreVector::default();
    for constraint in &scene.constraints {
        let tainted = constraint
            .kind
            .touched_points()
            .iter()
            .any(|&p| degenerate[p]);
        let score = if tainted {
            scores.degeneracy_penalized.push(constraint.origin);
            0.0
        } else {
            score_constraint(&constraint.kind, coords)
        };
        scores.entries.push(ScoreEntry {
            origin: constraint.origin,
            family: constraint.kind.family(),
            label: constraint.label.clone(),
            score,
        });
    }
    let loss = Loss::from_scores(&scores);
    (scores, loss)
}

/// Loss-only evaluation used in the solver's inner loop; shares
/// [`score_constraint`] with [`evaluate`] so the two can never disagree.
pub fn evaluate_loss(scene: &Scene, coords: &[Point], degenerate: &[bool]) -> f64 {
    let mut worst = 0.0_f64;
    for constraint in &scene.constraints {
        let tainted = constraint
            .kind
            .touched_points()
            .iter()
            .any(|&p| degenerate[p]);
        let score = if tainted {
            0.0
        } else {
            score_constraint(&constraint.kind, coords)
        };
        worst = worst.max((1.0 - score).abs());
    }
    worst
}
