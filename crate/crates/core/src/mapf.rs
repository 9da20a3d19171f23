//! Configurations, joint actions, plans and their execution semantics.
//!
//! A joint action is legal from a configuration when every mover stands on
//! the source of an existing edge, no two agents swap along one edge, and the
//! resulting configuration is injective. Agents may follow each other into a
//! vertex vacated in the same step.

use std::fmt;

use crate::digraph::{Digraph, Vertex};
use crate::error::{ConfigError, PlanError, SolutionError, StepError};

/// Vertex occupied by each agent, indexed by agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(Vec<Vertex>);

impl Configuration {
    pub fn new(positions: Vec<Vertex>) -> Self {
        Self(positions)
    }

    pub fn positions(&self) -> &[Vertex] {
        &self.0
    }

    pub fn agent_count(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<Vertex> {
        self.0
    }

    /// Checks that every position lies in `g` and no vertex is shared.
    pub fn validate(&self, g: &Digraph) -> Result<(), ConfigError> {
        for (agent, &vertex) in self.0.iter().enumerate() {
            if !g.contains(vertex) {
                return Err(ConfigError::OutOfRange { agent, vertex });
            }
        }
        match first_collision(&self.0) {
            Some((first, second)) => Err(ConfigError::NotInjective {
                vertex: self.0[first],
                first,
                second,
            }),
            None => Ok(()),
        }
    }
}

impl From<Vec<Vertex>> for Configuration {
    fn from(v: Vec<Vertex>) -> Self {
        Self(v)
    }
}

impl std::ops::Deref for Configuration {
    type Target = [Vertex];

    fn deref(&self) -> &[Vertex] {
        &self.0
    }
}

fn first_collision(positions: &[Vertex]) -> Option<(usize, usize)> {
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            if positions[i] == positions[j] {
                return Some((i, j));
            }
        }
    }
    None
}

/// What a single agent does during one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentAction {
    Wait,
    Move { from: Vertex, to: Vertex },
}

impl AgentAction {
    /// Position after the action, given the current one.
    #[inline]
    pub fn target(self, current: Vertex) -> Vertex {
        match self {
            AgentAction::Wait => current,
            AgentAction::Move { to, .. } => to,
        }
    }

    pub fn is_wait(self) -> bool {
        matches!(self, AgentAction::Wait)
    }
}

impl fmt::Display for AgentAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentAction::Wait => f.write_str("wait"),
            AgentAction::Move { from, to } => write!(f, "{from}->{to}"),
        }
    }
}

/// One action per agent, executed simultaneously.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointAction(Vec<AgentAction>);

impl JointAction {
    pub fn new(actions: Vec<AgentAction>) -> Self {
        Self(actions)
    }

    pub fn wait(agent_count: usize) -> Self {
        Self(vec![AgentAction::Wait; agent_count])
    }

    pub fn actions(&self) -> &[AgentAction] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_all_wait(&self) -> bool {
        self.0.iter().all(|a| a.is_wait())
    }
}

impl From<Vec<AgentAction>> for JointAction {
    fn from(v: Vec<AgentAction>) -> Self {
        Self(v)
    }
}

/// A sequence of joint actions. Its length is the makespan.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Plan {
    steps: Vec<JointAction>,
}

impl Plan {
    pub fn new(steps: Vec<JointAction>) -> Self {
        Self { steps }
    }

    /// The empty plan, which leaves every agent in place.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn steps(&self) -> &[JointAction] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The first `k` steps (the whole plan if `k >= len`).
    pub fn prefix(&self, k: usize) -> Plan {
        Plan::new(self.steps[..k.min(self.steps.len())].to_vec())
    }

    pub fn concat(&self, other: &Plan) -> Plan {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(&other.steps);
        Plan::new(steps)
    }

    pub fn into_steps(self) -> Vec<JointAction> {
        self.steps
    }
}

impl From<Vec<JointAction>> for Plan {
    fn from(steps: Vec<JointAction>) -> Self {
        Self::new(steps)
    }
}

/// Applies one joint action.
pub fn apply_joint(
    g: &Digraph,
    cfg: &Configuration,
    act: &JointAction,
) -> Result<Configuration, StepError> {
    let positions = cfg.positions();
    let actions = act.actions();
    if actions.len() != positions.len() {
        return Err(StepError::Arity {
            expected: positions.len(),
            found: actions.len(),
        });
    }
    for (agent, (&a, &at)) in actions.iter().zip(positions).enumerate() {
        if let AgentAction::Move { from, to } = a {
            if at != from {
                return Err(StepError::WrongSource {
                    agent,
                    expected: from,
                    actual: at,
                });
            }
            if !g.has_edge(from, to) {
                return Err(StepError::EdgeMissing { agent, from, to });
            }
        }
    }
    for i in 0..actions.len() {
        let AgentAction::Move { from, to } = actions[i] else {
            continue;
        };
        for (j, &other) in actions.iter().enumerate().skip(i + 1) {
            if other == (AgentAction::Move { from: to, to: from }) {
                return Err(StepError::SwapConflict {
                    first: i,
                    second: j,
                });
            }
        }
    }
    let next: Vec<Vertex> = actions
        .iter()
        .zip(positions)
        .map(|(a, &at)| a.target(at))
        .collect();
    if let Some((first, second)) = first_collision(&next) {
        return Err(StepError::VertexConflict {
            vertex: next[first],
            first,
            second,
        });
    }
    Ok(Configuration(next))
}

/// Applies a plan step by step; the first failing step is reported.
pub fn apply_plan(g: &Digraph, cfg: &Configuration, plan: &Plan) -> Result<Configuration, PlanError> {
    plan.steps()
        .iter()
        .enumerate()
        .try_fold(cfg.clone(), |current, (step, act)| {
            apply_joint(g, &current, act).map_err(|source| PlanError { step, source })
        })
}

/// Configuration after the first `k` steps, clamped to the plan's end.
pub fn trajectory(
    g: &Digraph,
    cfg: &Configuration,
    plan: &Plan,
    k: usize,
) -> Result<Configuration, PlanError> {
    apply_plan(g, cfg, &plan.prefix(k))
}

/// Every configuration the plan visits: entry `k` is the configuration after
/// `k` steps, for `k` in `0..=plan.len()`.
pub fn trajectory_states(
    g: &Digraph,
    cfg: &Configuration,
    plan: &Plan,
) -> Result<Vec<Configuration>, PlanError> {
    let mut states = Vec::with_capacity(plan.len() + 1);
    states.push(cfg.clone());
    for (step, act) in plan.steps().iter().enumerate() {
        let next = apply_joint(g, states.last().unwrap(), act)
            .map_err(|source| PlanError { step, source })?;
        states.push(next);
    }
    Ok(states)
}

/// Drops the trailing run of all-wait steps.
pub fn normalize_plan(plan: &Plan) -> Plan {
    let keep = plan
        .steps()
        .iter()
        .rposition(|s| !s.is_all_wait())
        .map_or(0, |i| i + 1);
    plan.prefix(keep)
}

/// Checks that `plan` drives `start` to `target`.
pub fn check_solution(
    g: &Digraph,
    start: &Configuration,
    target: &Configuration,
    plan: &Plan,
) -> Result<(), SolutionError> {
    start.validate(g)?;
    target.validate(g)?;
    if start.agent_count() != target.agent_count() {
        return Err(ConfigError::AgentCount {
            expected: start.agent_count(),
            found: target.agent_count(),
        }
        .into());
    }
    let reached = apply_plan(g, start, plan)?;
    if &reached != target {
        return Err(SolutionError::WrongFinal {
            reached: reached.into_inner(),
            target: target.positions().to_vec(),
        });
    }
    Ok(())
}

pub fn validate_solution(
    g: &Digraph,
    start: &Configuration,
    target: &Configuration,
    plan: &Plan,
) -> bool {
    check_solution(g, start, target, plan).is_ok()
}
