//! JSON instance and plan files.
//!
//! Instance:
//! `{"nodes":3,"edges":[[0,1],[1,2],[2,0]],"agents":[{"start":0,"target":2}]}`
//! with optional `"seed"` (integer) and `"generator"` (string). Plan:
//! `{"steps":[[null,[0,1]], ...]}` with one entry per agent and step, `null`
//! for a wait and `[u, v]` for a move along edge `(u, v)`. Unknown fields are
//! rejected in both.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::digraph::{Digraph, Vertex};
use crate::error::{ConfigError, FormatError, SolutionError};
use crate::mapf::{check_solution, AgentAction, Configuration, JointAction, Plan};

/// A MAPF problem: graph plus start and target configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: Digraph,
    pub start: Configuration,
    pub target: Configuration,
    pub seed: Option<u64>,
    pub generator: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    nodes: usize,
    edges: Vec<[Vertex; 2]>,
    agents: Vec<AgentFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentFile {
    start: Vertex,
    target: Vertex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    steps: Vec<Vec<Option<[Vertex; 2]>>>,
}

impl Instance {
    /// Validates both configurations against the graph.
    pub fn new(graph: Digraph, start: Configuration, target: Configuration) -> Result<Self, ConfigError> {
        start.validate(&graph)?;
        target.validate(&graph)?;
        if start.agent_count() != target.agent_count() {
            return Err(ConfigError::AgentCount {
                expected: start.agent_count(),
                found: target.agent_count(),
            });
        }
        Ok(Self {
            graph,
            start,
            target,
            seed: None,
            generator: None,
        })
    }

    pub fn agent_count(&self) -> usize {
        self.start.agent_count()
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| FormatError::MalformedInstance(e.to_string()))?;
        let edges: Vec<(Vertex, Vertex)> = file.edges.iter().map(|&[u, v]| (u, v)).collect();
        let graph = Digraph::new(file.nodes, &edges)?;
        let start = Configuration::new(file.agents.iter().map(|a| a.start).collect());
        let target = Configuration::new(file.agents.iter().map(|a| a.target).collect());
        let mut instance = Instance::new(graph, start, target)?;
        instance.seed = file.seed;
        instance.generator = file.generator;
        Ok(instance)
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            nodes: self.graph.node_count(),
            edges: self.graph.edges().iter().map(|&(u, v)| [u, v]).collect(),
            agents: self
                .start
                .iter()
                .zip(self.target.iter())
                .map(|(&start, &target)| AgentFile { start, target })
                .collect(),
            seed: self.seed,
            generator: self.generator.clone(),
        };
        serde_json::to_string(&file).expect("instance serializes")
    }
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, mut text: String) -> Result<(), FormatError> {
    text.push('\n');
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, FormatError> {
    Instance::from_json(&read(path.as_ref())?)
}

pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write(path.as_ref(), instance.to_json())
}

/// Parses a plan for `agent_count` agents. Only the shape is checked here.
pub fn plan_from_json(text: &str, agent_count: usize) -> Result<Plan, FormatError> {
    let file: PlanFile = serde_json::from_str(text).map_err(|e| FormatError::MalformedPlan(e.to_string()))?;
    let steps = file
        .steps
        .into_iter()
        .enumerate()
        .map(|(i, step)| {
            if step.len() != agent_count {
                return Err(FormatError::MalformedPlan(format!(
                    "step {i} has {} entries, instance has {agent_count} agents",
                    step.len()
                )));
            }
            Ok(JointAction::new(
                step.into_iter()
                    .map(|a| match a {
                        None => AgentAction::Wait,
                        Some([from, to]) => AgentAction::Move { from, to },
                    })
                    .collect(),
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Plan::new(steps))
}

pub fn plan_to_json(plan: &Plan) -> String {
    let file = PlanFile {
        steps: plan
            .steps()
            .iter()
            .map(|step| {
                step.actions()
                    .iter()
                    .map(|a| match *a {
                        AgentAction::Wait => None,
                        AgentAction::Move { from, to } => Some([from, to]),
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("plan serializes")
}

/// A plan read from disk, with the reason it does not solve the instance,
/// if any. Infeasible plans are still returned so tools can inspect them.
#[derive(Debug, Clone)]
pub struct LoadedPlan {
    pub plan: Plan,
    pub problem: Option<SolutionError>,
}

pub fn load_plan(path: impl AsRef<Path>, instance: &Instance) -> Result<LoadedPlan, FormatError> {
    let plan = plan_from_json(&read(path.as_ref())?, instance.agent_count())?;
    let problem = check_solution(&instance.graph, &instance.start, &instance.target, &plan).err();
    Ok(LoadedPlan { plan, problem })
}

pub fn save_plan(plan: &Plan, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write(path.as_ref(), plan_to_json(plan))
}
