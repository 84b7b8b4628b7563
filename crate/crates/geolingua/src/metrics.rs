//! Aggregate quality indicators.
//!
//! Per-constraint scores roll up into two indices: LCI (line consistency)
//! over the length families and ADI (angle deviation) over the angle
//! families. Each index is one minus the mean family score, so 0 means every
//! constraint in the family is exactly satisfied. A family with no
//! constraints yields an absent value rather than 0, so constraint-free
//! scenes don't score as perfect.

use crate::ast::Origin;
use crate::eval::{Family, ScoreVector};
use crate::scene::Scene;
use crate::solver::SolveResult;
use serde::{Deserialize, Serialize};

/// A constraint scoring below the satisfaction threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unsatisfied {
    pub origin: Origin,
    pub label: String,
    pub score: f64,
}

/// Report built by [`report`]; serializes with stable key names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub lci: Option<f64>,
    pub adi: Option<f64>,
    /// Mean of LCI and ADI when both are present.
    pub avg: Option<f64>,
    pub n_line: usize,
    pub n_angle: usize,
    pub per_constraint: ScoreVector,
    /// Constraints scoring below `1 - alpha`, worst first.
    pub unsatisfied: Vec<Unsatisfied>,
}

fn family_mean(scores: &ScoreVector, families: &[Family]) -> Option<(f64, usize)> {
    let picked: Vec<f64> = scores
        .entries
        .iter()
        .filter(|e| families.contains(&e.family))
        .map(|e| e.score)
        .collect();
    if picked.is_empty() {
        None
    } else {
        let mean = picked.iter().sum::<f64>() / picked.len() as f64;
        Some((mean, picked.len()))
    }
}

/// Line consistency index: 1 minus the mean score over the length-ratio and
/// length-relation families. Absent when the scene has no length constraints.
pub fn compute_lci(scores: &ScoreVector) -> Option<f64> {
    family_mean(scores, &[Family::LinRat, Family::LinRel]).map(|(mean, _)| 1.0 - mean)
}

/// Angle deviation index: 1 minus the mean score over the angle-value,
/// angle-ratio and angle-relation families. Absent when the scene has no
/// angle constraints.
pub fn compute_adi(scores: &ScoreVector) -> Option<f64> {
    family_mean(scores, &[Family::AngVal, Family::AngRat, Family::AngRel]).map(|(mean, _)| 1.0 - mean)
}

/// Build the evaluation report for a score set; `alpha` sets the
/// unsatisfied threshold `1 - alpha`.
pub fn report_from_scores(scores: &ScoreVector, alpha: f64) -> EvalReport {
    let lci = compute_lci(scores);
    let adi = compute_adi(scores);
    let n_line = family_mean(scores, &[Family::LinRat, Family::LinRel]).map_or(0, |(_, n)| n);
    let n_angle =
        family_mean(scores, &[Family::AngVal, Family::AngRat, Family::AngRel]).map_or(0, |(_, n)| n);
    let mut unsatisfied: Vec<Unsatisfied> = scores
        .entries
        .iter()
        .filter(|e| e.score < 1.0 - alpha)
        .map(|e| Unsatisfied { origin: e.origin, label: e.label.clone(), score: e.score })
        .collect();
    unsatisfied.sort_by(|a, b| {
        a.score
            .partial_cmp(&b.score)
            .unwrap()
            .then(a.origin.cmp(&b.origin))
    });
    EvalReport {
        lci,
        adi,
        avg: match (lci, adi) {
            (Some(l), Some(a)) => Some((l + a) / 2.0),
            _ => None,
        },
        n_line,
        n_angle,
        per_constraint: scores.clone(),
        unsatisfied,
    }
}

/// Build the evaluation report for a solve result.
pub fn report(scene: &Scene, result: &SolveResult) -> EvalReport {
    debug_assert_eq!(
        scene.constraints.len(),
        result.scores.entries.len(),
        "solve result does not belong to this scene"
    );
    report_from_scores(&result.scores, result.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Origin, Section};
    use crate::eval::ScoreEntry;

    fn vector(entries: &[(Family, f64)]) -> ScoreVector {
        ScoreVector {
            entries: entries
                .iter()
                .enumerate()
                .map(|(index, &(family, score))| ScoreEntry {
                    origin: Origin { section: Section::LengthConstraint, index },
                    family,
                    label: format!("c{index}"),
                    score,
                })
                .collect(),
            degeneracy_penalized: Vec::new(),
        }
    }

    #[test]
    fn lci_examples() {
        let perfect = vector(&[(Family::LinRat, 1.0), (Family::LinRel, 1.0)]);
        assert_eq!(compute_lci(&perfect), Some(0.0));

        let mixed = vector(&[(Family::LinRat, 0.9), (Family::LinRel, 0.8)]);
        assert!((compute_lci(&mixed).unwrap() - 0.15).abs() < 1e-12);

        let none = vector(&[(Family::AngVal, 0.5)]);
        assert_eq!(compute_lci(&none), None);
    }

    #[test]
    fn adi_examples() {
        let perfect = vector(&[
            (Family::AngVal, 1.0),
            (Family::AngRat, 1.0),
            (Family::AngRel, 1.0),
        ]);
        assert_eq!(compute_adi(&perfect), Some(0.0));
        let half = vector(&[(Family::AngVal, 0.5)]);
        assert!((compute_adi(&half).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(compute_adi(&vector(&[(Family::LinRat, 1.0)])), None);
    }

    #[test]
    fn zero_iff_perfect() {
        let almost = vector(&[(Family::LinRat, 1.0), (Family::LinRel, 0.999)]);
        assert!(compute_lci(&almost).unwrap() > 0.0);
        let indicator_only = vector(&[(Family::Other, 0.0)]);
        assert_eq!(compute_lci(&indicator_only), None);
        assert_eq!(compute_adi(&indicator_only), None);
    }
}
