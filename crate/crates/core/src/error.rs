use thiserror::Error;

use crate::digraph::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("no strongly connected graph found after {attempts} attempts")]
    GenerationFailed { attempts: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("agent {agent} is placed on vertex {vertex}, which is not in the graph")]
    OutOfRange { agent: usize, vertex: Vertex },
    #[error("agents {first} and {second} share vertex {vertex}")]
    NotInjective {
        vertex: Vertex,
        first: usize,
        second: usize,
    },
    #[error("expected {expected} agents, found {found}")]
    AgentCount { expected: usize, found: usize },
}

/// Why a joint action cannot be applied to a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("joint action has {found} entries for {expected} agents")]
    Arity { expected: usize, found: usize },
    #[error("agent {agent} is at {actual}, not at move source {expected}")]
    WrongSource {
        agent: usize,
        expected: Vertex,
        actual: Vertex,
    },
    #[error("agent {agent} moves along missing edge ({from}, {to})")]
    EdgeMissing {
        agent: usize,
        from: Vertex,
        to: Vertex,
    },
    #[error("vertex conflict: agents {first} and {second} end on vertex {vertex}")]
    VertexConflict {
        vertex: Vertex,
        first: usize,
        second: usize,
    },
    #[error("swap conflict between agents {first} and {second}")]
    SwapConflict { first: usize, second: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("step {step}: {source}")]
pub struct PlanError {
    pub step: usize,
    #[source]
    pub source: StepError,
}

/// Reason a plan does not solve an instance.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolutionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("plan is not executable: {0}")]
    Step(#[from] PlanError),
    #[error("plan ends in {reached:?}, target is {target:?}")]
    WrongFinal {
        reached: Vec<Vertex>,
        target: Vec<Vertex>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("vertex {to} is unreachable from {from}")]
    Unreachable { from: Vertex, to: Vertex },
    #[error("configurations have {0} and {1} agents")]
    AgentCount(usize, usize),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("reference plan is not a solution: {0}")]
    InfeasibleReference(#[from] SolutionError),
    #[error("search inserted more than {cap} states")]
    StateBudgetExceeded { cap: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle visited more than {cap} configurations")]
    CapExceeded { cap: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("percentage decrease is undefined for an initial length of zero")]
pub struct DegenerateInstance;

/// Errors raised while reading or writing instance and plan files.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("malformed plan: {0}")]
    MalformedPlan(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid configuration: {0}")]
    Configuration(#[from] ConfigError),
}
