//! Initial plans from sequential prioritized planning, and an exhaustive
//! breadth-first makespan oracle for small instances.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::digraph::{Digraph, Vertex};
use crate::error::OracleError;
use crate::mapf::{apply_joint, AgentAction, Configuration, JointAction, Plan};

/// Default number of random agent orders tried after the identity order fails.
pub const DEFAULT_ORDER_RETRIES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlannerOutcome {
    Success(Plan),
    Failure {
        reason: String,
        /// Agent that could not be routed; `None` when the input was rejected.
        blocked_agent: Option<usize>,
    },
}

impl PlannerOutcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            PlannerOutcome::Success(p) => Some(p),
            PlannerOutcome::Failure { .. } => None,
        }
    }

    pub fn into_plan(self) -> Option<Plan> {
        match self {
            PlannerOutcome::Success(p) => Some(p),
            PlannerOutcome::Failure { .. } => None,
        }
    }
}

/// Shortest path from `from` to `to` avoiding `blocked` vertices, as a vertex
/// sequence including both ends.
fn shortest_path(g: &Digraph, from: Vertex, to: Vertex, blocked: &[bool]) -> Option<Vec<Vertex>> {
    let n = g.node_count();
    let mut pred: Vec<Option<Vertex>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[from as usize] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            let mut cur = to;
            while let Some(p) = pred[cur as usize] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for &w in g.successors(u) {
            if !seen[w as usize] && !blocked[w as usize] {
                seen[w as usize] = true;
                pred[w as usize] = Some(u);
                queue.push_back(w);
            }
        }
    }
    None
}

/// Routes agents one at a time, in `order`, along shortest paths that avoid
/// the current positions of all other agents. Only one agent moves per step.
pub fn prioritized_initial(
    g: &Digraph,
    start: &Configuration,
    target: &Configuration,
    order: &[usize],
) -> PlannerOutcome {
    let reject = |reason: String| PlannerOutcome::Failure {
        reason,
        blocked_agent: None,
    };
    if let Err(e) = start.validate(g) {
        return reject(format!("start: {e}"));
    }
    if let Err(e) = target.validate(g) {
        return reject(format!("target: {e}"));
    }
    let agents = start.agent_count();
    if target.agent_count() != agents {
        return reject("start and target have different agent counts".into());
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..agents).collect::<Vec<_>>() {
        return reject(format!("{order:?} is not a permutation of the agents"));
    }

    let mut current = start.positions().to_vec();
    let mut occupied = vec![false; g.node_count()];
    for &v in &current {
        occupied[v as usize] = true;
    }
    let mut steps = Vec::new();
    for &agent in order {
        let (from, to) = (current[agent], target[agent]);
        occupied[from as usize] = false;
        let Some(path) = shortest_path(g, from, to, &occupied) else {
            return PlannerOutcome::Failure {
                reason: format!("no path for agent {agent} from {from} to {to} around the other agents"),
                blocked_agent: Some(agent),
            };
        };
        for hop in path.windows(2) {
            let mut actions = vec![AgentAction::Wait; agents];
            actions[agent] = AgentAction::Move {
                from: hop[0],
                to: hop[1],
            };
            steps.push(JointAction::new(actions));
        }
        current[agent] = to;
        occupied[to as usize] = true;
    }
    PlannerOutcome::Success(Plan::new(steps))
}

/// Result of [`prioritized_with_retries`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannerAttempt {
    pub outcome: PlannerOutcome,
    /// Order of the successful (or last failed) attempt.
    pub order: Vec<usize>,
    pub attempts: usize,
}

/// Tries the identity order, then up to `min(retries, |P|!)` random orders.
pub fn prioritized_with_retries<R: Rng + ?Sized>(
    g: &Digraph,
    start: &Configuration,
    target: &Configuration,
    retries: usize,
    rng: &mut R,
) -> PlannerAttempt {
    let agents = start.agent_count();
    let mut order: Vec<usize> = (0..agents).collect();
    let mut outcome = prioritized_initial(g, start, target, &order);
    let mut attempts = 1;
    let permutations = (1..=agents).try_fold(1usize, |acc, k| acc.checked_mul(k)).unwrap_or(usize::MAX);
    let extra = retries.min(permutations);
    while attempts <= extra {
        if let PlannerOutcome::Success(_) = outcome {
            break;
        }
        if let PlannerOutcome::Failure { blocked_agent: None, .. } = outcome {
            break;
        }
        order.shuffle(rng);
        outcome = prioritized_initial(g, start, target, &order);
        attempts += 1;
    }
    PlannerAttempt {
        outcome,
        order,
        attempts,
    }
}

/// Minimum makespan from `start` to `target` by breadth-first search over
/// configurations, enumerating every joint action and keeping those
/// [`apply_joint`] accepts.
///
/// Returns `Ok(None)` when the target is unreachable.
pub fn joint_bfs_oracle(
    g: &Digraph,
    start: &Configuration,
    target: &Configuration,
    state_cap: usize,
) -> Result<Option<usize>, OracleError> {
    start.validate(g)?;
    target.validate(g)?;
    if start == target {
        return Ok(Some(0));
    }
    let mut visited: HashSet<Configuration> = HashSet::from([start.clone()]);
    let mut frontier = vec![start.clone()];
    let mut depth = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for cfg in &frontier {
            for act in all_joint_actions(g, cfg) {
                let Ok(succ) = apply_joint(g, cfg, &act) else {
                    continue;
                };
                if &succ == target {
                    return Ok(Some(depth));
                }
                if visited.insert(succ.clone()) {
                    if visited.len() > state_cap {
                        return Err(OracleError::CapExceeded { cap: state_cap });
                    }
                    next.push(succ);
                }
            }
        }
        frontier = next;
    }
    Ok(None)
}

/// Cartesian product of each agent's wait and out-edge moves.
fn all_joint_actions(g: &Digraph, cfg: &Configuration) -> Vec<JointAction> {
    let per_agent: Vec<Vec<AgentAction>> = cfg
        .iter()
        .map(|&v| {
            std::iter::once(AgentAction::Wait)
                .chain(g.successors(v).iter().map(|&to| AgentAction::Move { from: v, to }))
                .collect()
        })
        .collect();
    let mut out: Vec<Vec<AgentAction>> = vec![Vec::new()];
    for options in &per_agent {
        out = out
            .iter()
            .flat_map(|prefix| {
                options.iter().map(move |&a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(JointAction::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapf::validate_solution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use AgentAction::{Move, Wait};

    fn c3() -> Digraph {
        Digraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    fn cfg(v: &[Vertex]) -> Configuration {
        Configuration::new(v.to_vec())
    }

    #[test]
    fn order_matters_on_cycle() {
        let g = c3();
        let (s, t) = (cfg(&[0, 1]), cfg(&[1, 2]));
        let ok = prioritized_initial(&g, &s, &t, &[1, 0]);
        let expected = Plan::new(vec![
            JointAction::new(vec![Wait, Move { from: 1, to: 2 }]),
            JointAction::new(vec![Move { from: 0, to: 1 }, Wait]),
        ]);
        assert_eq!(ok, PlannerOutcome::Success(expected));
        assert!(matches!(
            prioritized_initial(&g, &s, &t, &[0, 1]),
            PlannerOutcome::Failure { blocked_agent: Some(0), .. }
        ));
    }

    #[test]
    fn already_at_target() {
        let g = c3();
        let s = cfg(&[2, 0]);
        assert_eq!(prioritized_initial(&g, &s, &s, &[0, 1]), PlannerOutcome::Success(Plan::empty()));
    }

    #[test]
    fn rejects_bad_order() {
        let g = c3();
        assert!(matches!(
            prioritized_initial(&g, &cfg(&[0, 1]), &cfg(&[1, 2]), &[0, 0]),
            PlannerOutcome::Failure { blocked_agent: None, .. }
        ));
    }

    #[test]
    fn retries_recover_from_bad_identity_order() {
        let g = c3();
        let (s, t) = (cfg(&[0, 1]), cfg(&[1, 2]));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let attempt = prioritized_with_retries(&g, &s, &t, DEFAULT_ORDER_RETRIES, &mut rng);
        let plan = attempt.outcome.plan().expect("some order succeeds");
        assert!(validate_solution(&g, &s, &t, plan));
        assert_eq!(attempt.order, vec![1, 0]);
        assert!(attempt.attempts >= 2);
    }

    #[test]
    fn oracle_on_cycle() {
        let g = c3();
        assert_eq!(joint_bfs_oracle(&g, &cfg(&[0]), &cfg(&[2]), 1000).unwrap(), Some(2));
        assert_eq!(joint_bfs_oracle(&g, &cfg(&[0]), &cfg(&[0]), 1000).unwrap(), Some(0));
        assert_eq!(
            joint_bfs_oracle(&g, &cfg(&[0, 1, 2]), &cfg(&[1, 2, 0]), 1000).unwrap(),
            Some(1)
        );
        // A full cycle can only rotate: [0,1,2] never becomes [1,0,2].
        assert_eq!(joint_bfs_oracle(&g, &cfg(&[0, 1, 2]), &cfg(&[1, 0, 2]), 1000).unwrap(), None);
    }

    #[test]
    fn oracle_respects_cap() {
        let g = c3();
        assert!(matches!(
            joint_bfs_oracle(&g, &cfg(&[0]), &cfg(&[2]), 1),
            Err(OracleError::CapExceeded { cap: 1 })
        ));
    }

    #[test]
    fn oracle_matches_single_agent_distance() {
        for seed in 0..20 {
            let g = crate::digraph::random_strongly_connected(7, 14, seed).unwrap();
            for s in 0..7 {
                for t in 0..7 {
                    let opt = joint_bfs_oracle(&g, &cfg(&[s]), &cfg(&[t]), 10_000).unwrap();
                    assert_eq!(opt, g.dist(t, s).map(|d| d as usize));
                }
            }
        }
    }
}
