//! Iterated neighborhood search: re-anchor the search on every strictly
//! shorter plan until a fixpoint is reached.

use std::fmt;

use crate::digraph::Digraph;
use crate::dynprog::{dynprog_with, SearchOptions, SearchStats};
use crate::error::{DegenerateInstance, SearchError};
use crate::mapf::{normalize_plan, Configuration, Plan};
use crate::metrics::{plan_distance, DistanceKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImproveResult {
    pub final_plan: Plan,
    pub initial_length: usize,
    pub final_length: usize,
    /// Number of neighborhood searches run, the final confirming one included.
    pub outer_iterations: usize,
    /// Length returned by each neighborhood search.
    pub per_iteration_lengths: Vec<usize>,
    /// The initial plan followed by every strictly shorter incumbent.
    pub incumbents: Vec<Plan>,
    pub stats: SearchStats,
    pub distance_kind: DistanceKind,
    /// Distance of the final plan from the initial one under `distance_kind`,
    /// when defined.
    pub distance_from_initial: Option<u64>,
}

/// Shortens `f0` by repeated radius-`radius` neighborhood searches.
///
/// The search itself always bounds the sum-min distance; `kind` only selects
/// the distance reported in [`ImproveResult::distance_from_initial`].
pub fn improve(
    g: &Digraph,
    start: &Configuration,
    target: &Configuration,
    f0: &Plan,
    radius: u64,
    kind: DistanceKind,
) -> Result<ImproveResult, SearchError> {
    improve_with(g, start, target, f0, radius, kind, SearchOptions::default())
}

pub fn improve_with(
    g: &Digraph,
    start: &Configuration,
    target: &Configuration,
    f0: &Plan,
    radius: u64,
    kind: DistanceKind,
    options: SearchOptions,
) -> Result<ImproveResult, SearchError> {
    let mut incumbent = f0.clone();
    let mut incumbents = vec![f0.clone()];
    let mut lengths = Vec::new();
    let mut stats = SearchStats::default();
    loop {
        let outcome = dynprog_with(g, start, target, &incumbent, radius, options)?;
        lengths.push(outcome.plan.len());
        stats += outcome.stats;
        if outcome.plan.len() < incumbent.len() {
            incumbent = outcome.plan;
            incumbents.push(incumbent.clone());
        } else {
            break;
        }
    }
    let final_plan = normalize_plan(&incumbent);
    let distance_from_initial = plan_distance(g, start, &final_plan, f0, kind).ok();
    Ok(ImproveResult {
        initial_length: f0.len(),
        final_length: final_plan.len(),
        outer_iterations: lengths.len(),
        per_iteration_lengths: lengths,
        incumbents,
        stats,
        distance_kind: kind,
        distance_from_initial,
        final_plan,
    })
}

/// `100 (initial - final) / initial`, kept as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PercentDecrease {
    removed: i64,
    initial: u64,
}

impl PercentDecrease {
    pub fn value(self) -> f64 {
        100.0 * self.removed as f64 / self.initial as f64
    }

    /// Value in hundredths of a percent, rounded half away from zero.
    pub fn hundredths(self) -> i64 {
        let num = 10_000 * i128::from(self.removed);
        let den = i128::from(self.initial);
        let rounded = (2 * num.abs() + den) / (2 * den);
        (num.signum() * rounded) as i64
    }
}

impl fmt::Display for PercentDecrease {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hundredths();
        let sign = if h < 0 { "-" } else { "" };
        write!(f, "{sign}{}.{:02}", h.abs() / 100, h.abs() % 100)
    }
}

pub fn percentage_decrease(initial_len: usize, final_len: usize) -> Result<PercentDecrease, DegenerateInstance> {
    if initial_len == 0 {
        return Err(DegenerateInstance);
    }
    Ok(PercentDecrease {
        removed: initial_len as i64 - final_len as i64,
        initial: initial_len as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapf::{validate_solution, AgentAction, JointAction};

    fn c3() -> Digraph {
        Digraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    fn single(steps: &[Option<(u32, u32)>]) -> Plan {
        Plan::new(
            steps
                .iter()
                .map(|s| {
                    JointAction::new(vec![match *s {
                        None => AgentAction::Wait,
                        Some((from, to)) => AgentAction::Move { from, to },
                    }])
                })
                .collect(),
        )
    }

    #[test]
    fn removes_interior_wait() {
        let g = c3();
        let (s, t) = (Configuration::new(vec![0]), Configuration::new(vec![2]));
        let f0 = single(&[Some((0, 1)), None, Some((1, 2))]);
        let r = improve(&g, &s, &t, &f0, 5, DistanceKind::SumMin).unwrap();
        assert_eq!(r.initial_length, 3);
        assert_eq!(r.final_length, 2);
        assert_eq!(r.outer_iterations, 2);
        assert_eq!(r.per_iteration_lengths, vec![2, 2]);
        assert_eq!(r.incumbents.len(), 2);
        assert!(validate_solution(&g, &s, &t, &r.final_plan));
    }

    #[test]
    fn optimal_plan_is_a_fixpoint() {
        let g = c3();
        let (s, t) = (Configuration::new(vec![0]), Configuration::new(vec![2]));
        let f0 = single(&[Some((0, 1)), Some((1, 2))]);
        let r = improve(&g, &s, &t, &f0, 5, DistanceKind::SumMin).unwrap();
        assert_eq!(r.final_plan, f0);
        assert_eq!(r.outer_iterations, 1);
        assert_eq!(r.distance_from_initial, Some(0));
    }

    #[test]
    fn infeasible_reference_is_rejected() {
        let g = c3();
        let (s, t) = (Configuration::new(vec![0]), Configuration::new(vec![2]));
        assert!(matches!(
            improve(&g, &s, &t, &Plan::empty(), 5, DistanceKind::SumMin),
            Err(SearchError::InfeasibleReference(_))
        ));
    }

    #[test]
    fn percentages() {
        assert_eq!(percentage_decrease(40, 30).unwrap().to_string(), "25.00");
        assert_eq!(percentage_decrease(7, 7).unwrap().to_string(), "0.00");
        assert_eq!(percentage_decrease(3, 0).unwrap().to_string(), "100.00");
        assert_eq!(percentage_decrease(3, 2).unwrap().to_string(), "33.33");
        assert_eq!(percentage_decrease(3, 1).unwrap().to_string(), "66.67");
        assert_eq!(percentage_decrease(0, 0), Err(DegenerateInstance));
        assert!((percentage_decrease(8, 6).unwrap().value() - 25.0).abs() < 1e-12);
    }
}
