//! Dominance-pruned dynamic programming over plan classes.
//!
//! A class of plans is summarised by a [`State`] `(beta, gamma, sigma)`: plan
//! length, reached configuration and accumulated sum-min distance from the
//! reference plan. Starting from `(0, start, 0)`, states are expanded in
//! order of increasing length (FIFO within a length), only successors with
//! `sigma <= radius` and `beta <= |reference|` are kept, and a state is
//! discarded as soon as another state with the same configuration is no
//! longer and no farther. The first configuration equal to the target that
//! leaves the queue yields a shortest plan of the neighborhood.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::digraph::{Digraph, Vertex};
use crate::error::{PlanError, SearchError, StepError};
use crate::mapf::{
    apply_joint, check_solution, normalize_plan, trajectory_states, AgentAction, Configuration,
    JointAction, Plan,
};
use crate::metrics::{neighborhood_bound, saturating_u64};

/// Equivalence class of plans: length, reached configuration and distance
/// from the reference plan.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct State {
    pub beta: usize,
    pub gamma: Configuration,
    pub sigma: u64,
}

impl State {
    pub fn initial(start: &Configuration) -> Self {
        Self {
            beta: 0,
            gamma: start.clone(),
            sigma: 0,
        }
    }
}

/// `s1` dominates `s2` when it reaches the same configuration no later and
/// no farther from the reference. Reflexive.
pub fn dominates(s1: &State, s2: &State) -> bool {
    s1.beta <= s2.beta && s1.sigma <= s2.sigma && s1.gamma == s2.gamma
}

/// The reference plan's trajectory, prepared for repeated distance queries.
#[derive(Debug, Clone)]
pub struct Reference {
    len: usize,
    /// Distinct configurations on the trajectory, start included.
    points: Vec<Vec<Vertex>>,
    /// `floor[agent][v]`: minimum over the trajectory of the distance of `v`
    /// from the agent's reference vertex. Summing over agents gives a lower
    /// bound on the configuration-to-trajectory distance.
    floor: Vec<Vec<Option<u32>>>,
}

impl Reference {
    pub fn new(g: &Digraph, start: &Configuration, plan: &Plan) -> Result<Self, PlanError> {
        let states = trajectory_states(g, start, plan)?;
        let mut points: Vec<Vec<Vertex>> = Vec::new();
        let mut seen = HashSet::new();
        for s in &states {
            if seen.insert(s.positions()) {
                points.push(s.positions().to_vec());
            }
        }
        let agents = start.agent_count();
        let floor = (0..agents)
            .map(|agent| {
                (0..g.node_count() as Vertex)
                    .map(|v| points.iter().filter_map(|p| g.dist(v, p[agent])).min())
                    .collect()
            })
            .collect();
        Ok(Self {
            len: plan.len(),
            points,
            floor,
        })
    }

    /// Length of the reference plan.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn agent_count(&self) -> usize {
        self.floor.len()
    }

    /// Minimum distance of `positions` from the trajectory, or `None` when
    /// no trajectory point is reachable.
    pub fn distance(&self, g: &Digraph, positions: &[Vertex]) -> Option<u64> {
        self.distance_within(g, positions, u64::MAX)
    }

    /// Like [`Reference::distance`], but gives up (returns `None`) as soon as
    /// the answer is known to exceed `budget`.
    pub fn distance_within(&self, g: &Digraph, positions: &[Vertex], budget: u64) -> Option<u64> {
        let mut best: Option<u64> = None;
        for point in &self.points {
            let limit = best.map_or(budget, |b| b.saturating_sub(1).min(budget));
            let mut total = 0u64;
            let mut within = true;
            for (&v, &anchor) in positions.iter().zip(point) {
                match g.dist(v, anchor) {
                    Some(d) => total += u64::from(d),
                    None => {
                        within = false;
                        break;
                    }
                }
                if total > limit {
                    within = false;
                    break;
                }
            }
            if within {
                best = Some(total);
                if total == 0 {
                    break;
                }
            }
        }
        best
    }

    #[inline]
    fn agent_floor(&self, agent: usize, v: Vertex) -> Option<u32> {
        self.floor[agent][v as usize]
    }
}

/// Successor of `s` under joint action `e`.
///
/// A configuration from which the reference trajectory is unreachable is
/// infinitely far: its `sigma` saturates.
pub fn transition(
    g: &Digraph,
    s: &State,
    e: &JointAction,
    reference: &Reference,
) -> Result<State, StepError> {
    let gamma = apply_joint(g, &s.gamma, e)?;
    let step = reference.distance(g, gamma.positions()).unwrap_or(u64::MAX);
    Ok(State {
        beta: s.beta + 1,
        gamma,
        sigma: s.sigma.saturating_add(step),
    })
}

/// Enumerates legal joint actions from `positions` whose successor stays
/// within `radius`, agent by agent.
///
/// Partial assignments are cut on vertex and swap conflicts with agents
/// already assigned, and on the per-agent distance floor. The exact
/// trajectory distance is only evaluated for complete joint actions.
struct Successors<'a> {
    g: &'a Digraph,
    reference: &'a Reference,
    radius: u64,
    next: Vec<Vertex>,
    moves: Vec<AgentAction>,
}

impl<'a> Successors<'a> {
    fn new(g: &'a Digraph, reference: &'a Reference, radius: u64) -> Self {
        let agents = reference.agent_count();
        Self {
            g,
            reference,
            radius,
            next: vec![0; agents],
            moves: vec![AgentAction::Wait; agents],
        }
    }

    /// Calls `emit(next_positions, next_sigma)` once per surviving joint action.
    fn for_each(&mut self, positions: &[Vertex], sigma: u64, emit: &mut dyn FnMut(&[Vertex], u64)) {
        if sigma > self.radius {
            return;
        }
        self.assign(positions, 0, sigma, sigma, emit);
    }

    /// `bound` is `sigma` plus the distance floors of agents `0..agent`.
    fn assign(
        &mut self,
        positions: &[Vertex],
        agent: usize,
        sigma: u64,
        bound: u64,
        emit: &mut dyn FnMut(&[Vertex], u64),
    ) {
        if agent == positions.len() {
            let budget = self.radius - sigma;
            if let Some(d) = self.reference.distance_within(self.g, &self.next, budget) {
                emit(&self.next, sigma + d);
            }
            return;
        }
        let here = positions[agent];
        let g = self.g;
        let options = std::iter::once(AgentAction::Wait).chain(
            g.successors(here)
                .iter()
                .map(|&to| AgentAction::Move { from: here, to }),
        );
        for action in options {
            let to = action.target(here);
            let Some(floor) = self.reference.agent_floor(agent, to) else {
                continue;
            };
            let next_bound = bound + u64::from(floor);
            if next_bound > self.radius {
                continue;
            }
            let reverse = AgentAction::Move { from: to, to: here };
            let clash = (0..agent).any(|j| self.next[j] == to || (!action.is_wait() && self.moves[j] == reverse));
            if clash {
                continue;
            }
            self.next[agent] = to;
            self.moves[agent] = action;
            self.assign(positions, agent + 1, sigma, next_bound, emit);
        }
    }
}

/// All successors of `s` with `sigma <= radius` and `beta <= len_cap`, with
/// duplicate `(gamma, sigma)` pairs collapsed. Illegal joint actions are
/// skipped. Sorted by configuration, then distance.
pub fn expand(g: &Digraph, s: &State, reference: &Reference, radius: u64, len_cap: usize) -> Vec<State> {
    if s.beta + 1 > len_cap {
        return Vec::new();
    }
    let mut out = HashSet::new();
    let mut successors = Successors::new(g, reference, radius);
    successors.for_each(s.gamma.positions(), s.sigma, &mut |next, sigma| {
        out.insert((next.to_vec(), sigma));
    });
    let mut out: Vec<State> = out
        .into_iter()
        .map(|(gamma, sigma)| State {
            beta: s.beta + 1,
            gamma: Configuration::new(gamma),
            sigma,
        })
        .collect();
    out.sort_by(|a, b| a.gamma.cmp(&b.gamma).then(a.sigma.cmp(&b.sigma)));
    out
}

/// Counters collected during one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SearchStats {
    /// States added to the queue by expansion (the initial state is not counted).
    pub states_inserted: u64,
    /// Generated states rejected as dominated, plus queued states evicted by
    /// a dominating newcomer.
    pub states_dominated_discarded: u64,
    pub states_expanded: u64,
    pub peak_queue_size: u64,
}

impl std::ops::AddAssign for SearchStats {
    fn add_assign(&mut self, rhs: Self) {
        self.states_inserted += rhs.states_inserted;
        self.states_dominated_discarded += rhs.states_dominated_discarded;
        self.states_expanded += rhs.states_expanded;
        self.peak_queue_size = self.peak_queue_size.max(rhs.peak_queue_size);
    }
}

/// Limit on inserted states before a search is abandoned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StateCap {
    /// Fifty times the neighborhood cardinality bound, saturating.
    #[default]
    Default,
    Limit(u64),
    Unlimited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// With `false`, only exact duplicates `(beta, gamma, sigma)` are merged.
    pub dominance: bool,
    pub state_cap: StateCap,
    /// Assert after every insertion that no two queued states dominate each other.
    pub check_invariants: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            dominance: true,
            state_cap: StateCap::Default,
            check_invariants: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    /// A shortest plan of the neighborhood, normalized.
    pub plan: Plan,
    /// Sum-min distance of `plan` from the reference.
    pub sigma: u64,
    pub stats: SearchStats,
}

/// Shortest plan from `start` to `target` among plans no longer than `f0`
/// whose sum-min distance from `f0` is at most `radius`.
pub fn dynprog(
    g: &Digraph,
    start: &Configuration,
    target: &Configuration,
    f0: &Plan,
    radius: u64,
) -> Result<SearchOutcome, SearchError> {
    dynprog_with(g, start, target, f0, radius, SearchOptions::default())
}

pub fn dynprog_with(
    g: &Digraph,
    start: &Configuration,
    target: &Configuration,
    f0: &Plan,
    radius: u64,
    options: SearchOptions,
) -> Result<SearchOutcome, SearchError> {
    check_solution(g, start, target, f0)?;
    let reference = Reference::new(g, start, f0).expect("validated reference plan executes");
    let cap = match options.state_cap {
        StateCap::Default => {
            let agents = start.agent_count() as u64;
            let r = u32::try_from(radius).unwrap_or(u32::MAX);
            // Huge radii make the bound astronomically large; skip evaluating it.
            if r > 64 {
                u64::MAX
            } else {
                let bound = neighborhood_bound(f0.len() as u64, g.max_out_degree() as u64, agents, r);
                saturating_u64(&bound).saturating_mul(50)
            }
        }
        StateCap::Limit(n) => n,
        StateCap::Unlimited => u64::MAX,
    };
    let mut search = Search::new(g, &reference, radius, cap, options);
    search.run(start, target)
}

struct Node {
    beta: u32,
    config: u32,
    sigma: u64,
    parent: Option<u32>,
    queued: bool,
}

#[derive(Default)]
struct ConfigSlot {
    /// Nodes with this configuration currently in the queue.
    open: Vec<u32>,
    /// Smallest sigma among expanded (popped) nodes with this configuration.
    closed_sigma: Option<u64>,
}

struct Search<'a> {
    g: &'a Digraph,
    reference: &'a Reference,
    radius: u64,
    cap: u64,
    options: SearchOptions,
    nodes: Vec<Node>,
    configs: Vec<Box<[Vertex]>>,
    index: HashMap<Box<[Vertex]>, u32>,
    slots: Vec<ConfigSlot>,
    exact: HashSet<(u32, u32, u64)>,
    queue: VecDeque<u32>,
    live: u64,
    stats: SearchStats,
}

impl<'a> Search<'a> {
    fn new(g: &'a Digraph, reference: &'a Reference, radius: u64, cap: u64, options: SearchOptions) -> Self {
        Self {
            g,
            reference,
            radius,
            cap,
            options,
            nodes: Vec::new(),
            configs: Vec::new(),
            index: HashMap::new(),
            slots: Vec::new(),
            exact: HashSet::new(),
            queue: VecDeque::new(),
            live: 0,
            stats: SearchStats::default(),
        }
    }

    fn intern(&mut self, positions: &[Vertex]) -> u32 {
        if let Some(&id) = self.index.get(positions) {
            return id;
        }
        let id = self.configs.len() as u32;
        let key: Box<[Vertex]> = positions.into();
        self.configs.push(key.clone());
        self.index.insert(key, id);
        self.slots.push(ConfigSlot::default());
        id
    }

    fn push(&mut self, beta: u32, config: u32, sigma: u64, parent: Option<u32>) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node {
            beta,
            config,
            sigma,
            parent,
            queued: true,
        });
        self.slots[config as usize].open.push(id);
        self.queue.push_back(id);
        self.live += 1;
        self.stats.peak_queue_size = self.stats.peak_queue_size.max(self.live);
        id
    }

    fn run(&mut self, start: &Configuration, target: &Configuration) -> Result<SearchOutcome, SearchError> {
        let root_config = self.intern(start.positions());
        let target_config = self.intern(target.positions());
        self.push(0, root_config, 0, None);
        if !self.options.dominance {
            self.exact.insert((0, root_config, 0));
        }
        let len_cap = self.reference.len() as u32;
        let mut generated: Vec<(Vec<Vertex>, u64)> = Vec::new();

        while let Some(id) = self.queue.pop_front() {
            let node = &self.nodes[id as usize];
            if !node.queued {
                continue;
            }
            let (beta, config, sigma) = (node.beta, node.config, node.sigma);
            self.nodes[id as usize].queued = false;
            self.live -= 1;
            let slot = &mut self.slots[config as usize];
            slot.open.retain(|&n| n != id);
            slot.closed_sigma = Some(slot.closed_sigma.map_or(sigma, |c| c.min(sigma)));

            if config == target_config {
                return Ok(self.finish(id));
            }
            if beta >= len_cap {
                continue;
            }
            self.stats.states_expanded += 1;

            generated.clear();
            let positions = self.configs[config as usize].clone();
            let mut successors = Successors::new(self.g, self.reference, self.radius);
            successors.for_each(&positions, sigma, &mut |next, s| generated.push((next.to_vec(), s)));

            for (next, next_sigma) in generated.drain(..) {
                let next_config = self.intern(&next);
                if self.offer(beta + 1, next_config, next_sigma, id) && self.stats.states_inserted > self.cap {
                    return Err(SearchError::StateBudgetExceeded { cap: self.cap });
                }
            }
        }
        unreachable!("the reference plan's own states always reach the target")
    }

    /// Queues a generated state unless it is dominated. Returns whether it was queued.
    fn offer(&mut self, beta: u32, config: u32, sigma: u64, parent: u32) -> bool {
        if !self.options.dominance {
            if !self.exact.insert((beta, config, sigma)) {
                return false;
            }
            self.push(beta, config, sigma, Some(parent));
            self.stats.states_inserted += 1;
            return true;
        }

        let slot = &self.slots[config as usize];
        let closed_dominates = slot.closed_sigma.is_some_and(|c| c <= sigma);
        let open_dominates = slot.open.iter().any(|&n| {
            let other = &self.nodes[n as usize];
            other.beta <= beta && other.sigma <= sigma
        });
        if closed_dominates || open_dominates {
            self.stats.states_dominated_discarded += 1;
            return false;
        }

        let mut evicted = Vec::new();
        self.slots[config as usize].open.retain(|&n| {
            let other = &self.nodes[n as usize];
            let dominated = beta <= other.beta && sigma <= other.sigma;
            if dominated {
                evicted.push(n);
            }
            !dominated
        });
        for n in evicted {
            self.nodes[n as usize].queued = false;
            self.live -= 1;
            self.stats.states_dominated_discarded += 1;
        }
        self.push(beta, config, sigma, Some(parent));
        self.stats.states_inserted += 1;

        if self.options.check_invariants {
            let open = &self.slots[config as usize].open;
            for (i, &a) in open.iter().enumerate() {
                for &b in &open[i + 1..] {
                    let (na, nb) = (&self.nodes[a as usize], &self.nodes[b as usize]);
                    let a_over_b = na.beta <= nb.beta && na.sigma <= nb.sigma;
                    let b_over_a = nb.beta <= na.beta && nb.sigma <= na.sigma;
                    assert!(!a_over_b && !b_over_a, "queue holds comparable states");
                }
            }
        }
        true
    }

    fn finish(&self, goal: u32) -> SearchOutcome {
        let mut chain = vec![goal];
        while let Some(parent) = self.nodes[*chain.last().unwrap() as usize].parent {
            chain.push(parent);
        }
        chain.reverse();
        let steps = chain
            .windows(2)
            .map(|pair| {
                let from = &self.configs[self.nodes[pair[0] as usize].config as usize];
                let to = &self.configs[self.nodes[pair[1] as usize].config as usize];
                JointAction::new(
                    from.iter()
                        .zip(to.iter())
                        .map(|(&u, &v)| {
                            if u == v {
                                AgentAction::Wait
                            } else {
                                AgentAction::Move { from: u, to: v }
                            }
                        })
                        .collect(),
                )
            })
            .collect();
        SearchOutcome {
            plan: normalize_plan(&Plan::new(steps)),
            sigma: self.nodes[goal as usize].sigma,
            stats: self.stats,
        }
    }
}

/// Exhaustively enumerates every state `(beta, gamma, sigma)` reachable with
/// `sigma <= radius` and `beta <= |f0|`, without any pruning beyond those
/// limits. Intended for verification on tiny instances.
pub fn enumerate_states(
    g: &Digraph,
    start: &Configuration,
    f0: &Plan,
    radius: u64,
) -> Result<Vec<State>, PlanError> {
    let reference = Reference::new(g, start, f0)?;
    let mut all: HashSet<State> = HashSet::new();
    let mut layer: HashSet<State> = HashSet::from([State::initial(start)]);
    all.extend(layer.iter().cloned());
    for _ in 0..reference.len() {
        let mut next_layer = HashSet::new();
        for s in &layer {
            for succ in expand(g, s, &reference, radius, reference.len()) {
                next_layer.insert(succ);
            }
        }
        all.extend(next_layer.iter().cloned());
        layer = next_layer;
    }
    let mut all: Vec<State> = all.into_iter().collect();
    all.sort_by(|a, b| (a.beta, &a.gamma, a.sigma).cmp(&(b.beta, &b.gamma, b.sigma)));
    Ok(all)
}
