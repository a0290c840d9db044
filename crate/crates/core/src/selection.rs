//! Trading information loss against token cost.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("no candidates to select from")]
    EmptyInput,
    #[error("alpha must be a non-negative number, got {0}")]
    InvalidAlpha(f64),
    #[error("alphas must be sorted ascending")]
    UnsortedAlphas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePoint {
    pub summary_id: String,
    pub visil: f64,
    pub token_cost: u64,
}

impl CandidatePoint {
    pub fn new(summary_id: impl Into<String>, visil: f64, token_cost: u64) -> Self {
        Self {
            summary_id: summary_id.into(),
            visil,
            token_cost,
        }
    }

    pub fn objective(&self, alpha: f64) -> f64 {
        self.visil + alpha * self.token_cost as f64
    }

    /// No worse on both axes and strictly better on one.
    pub fn dominates(&self, other: &CandidatePoint) -> bool {
        self.visil <= other.visil
            && self.token_cost <= other.token_cost
            && (self.visil < other.visil || self.token_cost < other.token_cost)
    }
}

/// Tie-break order: lower visil, then lower cost, then summary id.
fn tie_break(a: &CandidatePoint, b: &CandidatePoint) -> Ordering {
    a.visil
        .total_cmp(&b.visil)
        .then(a.token_cost.cmp(&b.token_cost))
        .then_with(|| a.summary_id.cmp(&b.summary_id))
}

fn check_alpha(alpha: f64) -> Result<(), SelectionError> {
    if alpha.is_nan() || alpha < 0.0 {
        return Err(SelectionError::InvalidAlpha(alpha));
    }
    Ok(())
}

/// `argmin visil + alpha * token_cost`, deterministic under ties.
pub fn select_summary(candidates: &[CandidatePoint], alpha: f64) -> Result<&CandidatePoint, SelectionError> {
    check_alpha(alpha)?;
    candidates
        .iter()
        .min_by(|a, b| {
            a.objective(alpha)
                .total_cmp(&b.objective(alpha))
                .then_with(|| tie_break(a, b))
        })
        .ok_or(SelectionError::EmptyInput)
}

/// All non-dominated points (duplicates included), sorted by cost, then
/// visil, then id.
pub fn pareto_frontier(candidates: &[CandidatePoint]) -> Vec<CandidatePoint> {
    let mut sorted: Vec<&CandidatePoint> = candidates.iter().collect();
    sorted.sort_by(|a, b| {
        a.token_cost
            .cmp(&b.token_cost)
            .then(a.visil.total_cmp(&b.visil))
            .then_with(|| a.summary_id.cmp(&b.summary_id))
    });
    // Sweep by cost; a point survives iff its visil is below every strictly
    // cheaper point's visil and minimal within its own cost group.
    let mut frontier = Vec::new();
    let mut best_cheaper = f64::INFINITY;
    let mut i = 0;
    while i < sorted.len() {
        let cost = sorted[i].token_cost;
        let group_end = sorted[i..]
            .iter()
            .position(|p| p.token_cost != cost)
            .map_or(sorted.len(), |k| i + k);
        let group_min = sorted[i].visil;
        if group_min < best_cheaper {
            frontier.extend(
                sorted[i..group_end]
                    .iter()
                    .filter(|p| p.visil == group_min)
                    .map(|p| (*p).clone()),
            );
            best_cheaper = group_min;
        }
        i = group_end;
    }
    frontier
}

/// [`select_summary`] at each alpha.
pub fn alpha_sweep<'a>(
    candidates: &'a [CandidatePoint],
    alphas: &[f64],
) -> Result<Vec<(f64, &'a CandidatePoint)>, SelectionError> {
    if alphas
        .windows(2)
        .any(|w| matches!(w[0].partial_cmp(&w[1]), None | Some(Ordering::Greater)))
    {
        return Err(SelectionError::UnsortedAlphas);
    }
    alphas
        .iter()
        .map(|&a| select_summary(candidates, a).map(|p| (a, p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts() -> Vec<CandidatePoint> {
        vec![CandidatePoint::new("A", 1.0, 10), CandidatePoint::new("B", 2.0, 5)]
    }

    #[test]
    fn lagrangian_examples() {
        assert_eq!(select_summary(&pts(), 0.0).unwrap().summary_id, "A");
        assert_eq!(select_summary(&pts(), 1.0).unwrap().summary_id, "B");
        assert_eq!(select_summary(&pts(), 0.1).unwrap().summary_id, "A");
        assert_eq!(select_summary(&[], 0.0), Err(SelectionError::EmptyInput));
        assert!(select_summary(&pts(), -1.0).is_err());
    }

    #[test]
    fn ties_are_deterministic() {
        // objective 3.0 for both at alpha=1
        let c = vec![CandidatePoint::new("z", 1.0, 2), CandidatePoint::new("a", 2.0, 1)];
        assert_eq!(select_summary(&c, 1.0).unwrap().summary_id, "z");
        let c = vec![CandidatePoint::new("z", 1.0, 2), CandidatePoint::new("a", 1.0, 2)];
        assert_eq!(select_summary(&c, 1.0).unwrap().summary_id, "a");
    }

    #[test]
    fn frontier_examples() {
        let c = vec![
            CandidatePoint::new("a", 1.0, 10),
            CandidatePoint::new("b", 2.0, 5),
            CandidatePoint::new("c", 3.0, 20),
        ];
        let f = pareto_frontier(&c);
        let ids: Vec<&str> = f.iter().map(|p| p.summary_id.as_str()).collect();
        assert_eq!(ids, vec!["b", "a"]);
        assert_eq!(pareto_frontier(&c[..1]), c[..1].to_vec());
        assert!(pareto_frontier(&[]).is_empty());
    }

    #[test]
    fn duplicates_retained() {
        let c = vec![
            CandidatePoint::new("a", 1.0, 10),
            CandidatePoint::new("b", 1.0, 10),
            CandidatePoint::new("c", 1.0, 11),
        ];
        assert_eq!(pareto_frontier(&c).len(), 2);
    }

    #[test]
    fn sweep_limits() {
        let c = vec![
            CandidatePoint::new("a", 1.0, 100),
            CandidatePoint::new("b", 3.0, 50),
            CandidatePoint::new("c", 9.0, 10),
        ];
        let sweep = alpha_sweep(&c, &[0.0, 1e3]).unwrap();
        assert_eq!(sweep[0].1.summary_id, "a");
        assert_eq!(sweep[1].1.summary_id, "c");
        assert_eq!(alpha_sweep(&c, &[1.0, 0.5]), Err(SelectionError::UnsortedAlphas));
    }

    fn brute(c: &[CandidatePoint]) -> Vec<CandidatePoint> {
        let mut out: Vec<CandidatePoint> = c
            .iter()
            .filter(|p| !c.iter().any(|q| q.dominates(p)))
            .cloned()
            .collect();
        out.sort_by(|a, b| {
            a.token_cost
                .cmp(&b.token_cost)
                .then(a.visil.total_cmp(&b.visil))
                .then_with(|| a.summary_id.cmp(&b.summary_id))
        });
        out
    }

    fn arb_points() -> impl Strategy<Value = Vec<CandidatePoint>> {
        proptest::collection::vec((0u32..20, 0u64..20), 0..50).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (vi, c))| CandidatePoint::new(format!("s{i:02}"), vi as f64 * 0.25, c))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn frontier_matches_brute_force(c in arb_points()) {
            prop_assert_eq!(pareto_frontier(&c), brute(&c));
        }

        #[test]
        fn scalarization_is_sound(c in arb_points(), alpha in 0.0f64..5.0) {
            if let Ok(p) = select_summary(&c, alpha) {
                prop_assert!(!c.iter().any(|q| q.dominates(p)));
            }
        }
    }
}
