//! Python bindings.
//!
//! Configurations are lists of vertex ids (one per agent). Plans are lists
//! of steps, each a list with one entry per agent: `None` for a wait or a
//! `(u, v)` tuple for a move along edge `(u, v)`. Invalid input raises
//! `ValueError`.

use std::fmt::Display;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mapf_local::digraph::Vertex;
use mapf_local::dynprog::SearchStats;
use mapf_local::{
    io, metrics, planners, AgentAction, Configuration, Digraph, DistanceKind, JointAction, Plan,
};

type PyPlan = Vec<Vec<Option<(Vertex, Vertex)>>>;

fn value_error(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_plan(steps: PyPlan) -> Plan {
    Plan::new(
        steps
            .into_iter()
            .map(|step| {
                JointAction::new(
                    step.into_iter()
                        .map(|a| match a {
                            None => AgentAction::Wait,
                            Some((from, to)) => AgentAction::Move { from, to },
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn from_plan(plan: &Plan) -> PyPlan {
    plan.steps()
        .iter()
        .map(|step| {
            step.actions()
                .iter()
                .map(|a| match *a {
                    AgentAction::Wait => None,
                    AgentAction::Move { from, to } => Some((from, to)),
                })
                .collect()
        })
        .collect()
}

fn config(positions: Vec<Vertex>) -> Configuration {
    Configuration::new(positions)
}

fn kind(name: &str) -> PyResult<DistanceKind> {
    name.parse().map_err(value_error)
}

fn stats_dict<'py>(py: Python<'py>, stats: &SearchStats) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("states_inserted", stats.states_inserted)?;
    d.set_item("states_dominated_discarded", stats.states_dominated_discarded)?;
    d.set_item("states_expanded", stats.states_expanded)?;
    d.set_item("peak_queue_size", stats.peak_queue_size)?;
    Ok(d)
}

/// Directed graph with precomputed hop distances.
#[pyclass(name = "Digraph", module = "mapf_local", frozen)]
struct PyDigraph {
    inner: Digraph,
}

#[pymethods]
impl PyDigraph {
    #[new]
    fn new(nodes: usize, edges: Vec<(Vertex, Vertex)>) -> PyResult<Self> {
        Digraph::new(nodes, &edges)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    /// Seeded random strongly connected digraph with exactly `edges` edges.
    #[staticmethod]
    #[pyo3(signature = (nodes, edges, seed = 0))]
    fn random(nodes: usize, edges: usize, seed: u64) -> PyResult<Self> {
        mapf_local::random_strongly_connected(nodes, edges, seed)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn edges(&self) -> Vec<(Vertex, Vertex)> {
        self.inner.edges().to_vec()
    }

    fn successors(&self, v: Vertex) -> PyResult<Vec<Vertex>> {
        if !self.inner.contains(v) {
            return Err(value_error(format!("vertex {v} out of range")));
        }
        Ok(self.inner.successors(v).to_vec())
    }

    /// Hop count of a shortest path from `src` to `dst`, or `None`.
    fn path_len(&self, src: Vertex, dst: Vertex) -> PyResult<Option<u32>> {
        if !self.inner.contains(src) || !self.inner.contains(dst) {
            return Err(value_error("vertex out of range"));
        }
        Ok(self.inner.path_len(src, dst))
    }

    fn is_strongly_connected(&self) -> bool {
        self.inner.is_strongly_connected()
    }

    fn max_out_degree(&self) -> usize {
        self.inner.max_out_degree()
    }

    fn __repr__(&self) -> String {
        format!("Digraph(nodes={}, edges={})", self.inner.node_count(), self.inner.edge_count())
    }
}

/// Final configuration reached by `plan`, or raises on an illegal step.
#[pyfunction]
fn apply_plan(g: &PyDigraph, start: Vec<Vertex>, plan: PyPlan) -> PyResult<Vec<Vertex>> {
    mapf_local::apply_plan(&g.inner, &config(start), &to_plan(plan))
        .map(Configuration::into_inner)
        .map_err(value_error)
}

/// `None` if `plan` solves the instance, otherwise the reason it does not.
#[pyfunction]
fn check_solution(g: &PyDigraph, start: Vec<Vertex>, target: Vec<Vertex>, plan: PyPlan) -> Option<String> {
    mapf_local::check_solution(&g.inner, &config(start), &config(target), &to_plan(plan))
        .err()
        .map(|e| e.to_string())
}

#[pyfunction]
fn validate_solution(g: &PyDigraph, start: Vec<Vertex>, target: Vec<Vertex>, plan: PyPlan) -> bool {
    mapf_local::validate_solution(&g.inner, &config(start), &config(target), &to_plan(plan))
}

#[pyfunction]
fn normalize_plan(plan: PyPlan) -> PyPlan {
    from_plan(&mapf_local::normalize_plan(&to_plan(plan)))
}

/// Distance of `plan` from `reference`; `kind` is inf, one, maxmin or summin.
#[pyfunction]
#[pyo3(signature = (g, start, plan, reference, kind = "summin"))]
fn plan_distance(g: &PyDigraph, start: Vec<Vertex>, plan: PyPlan, reference: PyPlan, kind: &str) -> PyResult<u64> {
    metrics::plan_distance(&g.inner, &config(start), &to_plan(plan), &to_plan(reference), self::kind(kind)?)
        .map_err(value_error)
}

/// Prioritized plan for the given agent order (identity by default), or `None`.
#[pyfunction]
#[pyo3(signature = (g, start, target, order = None))]
fn prioritized_initial(
    g: &PyDigraph,
    start: Vec<Vertex>,
    target: Vec<Vertex>,
    order: Option<Vec<usize>>,
) -> Option<PyPlan> {
    let order = order.unwrap_or_else(|| (0..start.len()).collect());
    planners::prioritized_initial(&g.inner, &config(start), &config(target), &order)
        .plan()
        .map(from_plan)
}

/// Optimal makespan, or `None` when the target is unreachable.
#[pyfunction]
#[pyo3(signature = (g, start, target, max_states = 5_000_000))]
fn joint_bfs_oracle(g: &PyDigraph, start: Vec<Vertex>, target: Vec<Vertex>, max_states: usize) -> PyResult<Option<usize>> {
    planners::joint_bfs_oracle(&g.inner, &config(start), &config(target), max_states).map_err(value_error)
}

/// One neighborhood search. Returns `(plan, sigma, stats)`.
#[pyfunction]
#[pyo3(signature = (g, start, target, reference, radius = 5))]
fn dynprog<'py>(
    py: Python<'py>,
    g: &PyDigraph,
    start: Vec<Vertex>,
    target: Vec<Vertex>,
    reference: PyPlan,
    radius: u64,
) -> PyResult<(PyPlan, u64, Bound<'py, PyDict>)> {
    let out = mapf_local::dynprog(&g.inner, &config(start), &config(target), &to_plan(reference), radius)
        .map_err(value_error)?;
    Ok((from_plan(&out.plan), out.sigma, stats_dict(py, &out.stats)?))
}

/// Repeated neighborhood search until no shorter plan is found.
#[pyfunction]
#[pyo3(signature = (g, start, target, plan, radius = 5, distance = "summin"))]
fn improve<'py>(
    py: Python<'py>,
    g: &PyDigraph,
    start: Vec<Vertex>,
    target: Vec<Vertex>,
    plan: PyPlan,
    radius: u64,
    distance: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let r = mapf_local::improve(&g.inner, &config(start), &config(target), &to_plan(plan), radius, kind(distance)?)
        .map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("final_plan", from_plan(&r.final_plan))?;
    d.set_item("initial_length", r.initial_length)?;
    d.set_item("final_length", r.final_length)?;
    d.set_item("outer_iterations", r.outer_iterations)?;
    d.set_item("per_iteration_lengths", r.per_iteration_lengths)?;
    d.set_item("distance", r.distance_kind.name())?;
    d.set_item("distance_from_initial", r.distance_from_initial)?;
    d.set_item("stats", stats_dict(py, &r.stats)?)?;
    Ok(d)
}

#[pyfunction]
fn percentage_decrease(initial_len: usize, final_len: usize) -> PyResult<f64> {
    mapf_local::percentage_decrease(initial_len, final_len)
        .map(|p| p.value())
        .map_err(value_error)
}

#[pyfunction]
fn ball_border_bound(phi: u64, r: u32) -> num_bigint::BigUint {
    metrics::ball_border_bound(phi, r)
}

#[pyfunction]
fn config_ball_bound(phi: u64, agents: u64, r: u32) -> num_bigint::BigUint {
    metrics::config_ball_bound(phi, agents, r)
}

#[pyfunction]
fn neighborhood_bound(reference_len: u64, phi: u64, agents: u64, r: u32) -> num_bigint::BigUint {
    metrics::neighborhood_bound(reference_len, phi, agents, r)
}

/// Reads an instance file. Returns `(graph, start, target)`.
#[pyfunction]
fn load_instance(path: &str) -> PyResult<(PyDigraph, Vec<Vertex>, Vec<Vertex>)> {
    let inst = io::load_instance(path).map_err(value_error)?;
    Ok((PyDigraph { inner: inst.graph }, inst.start.into_inner(), inst.target.into_inner()))
}

#[pyfunction]
fn save_instance(path: &str, g: &PyDigraph, start: Vec<Vertex>, target: Vec<Vertex>) -> PyResult<()> {
    let inst = io::Instance::new(g.inner.clone(), config(start), config(target)).map_err(value_error)?;
    io::save_instance(&inst, path).map_err(value_error)
}

#[pyfunction]
fn load_plan(path: &str, agent_count: usize) -> PyResult<PyPlan> {
    let text = std::fs::read_to_string(path).map_err(value_error)?;
    io::plan_from_json(&text, agent_count).map(|p| from_plan(&p)).map_err(value_error)
}

#[pyfunction]
fn save_plan(path: &str, plan: PyPlan) -> PyResult<()> {
    io::save_plan(&to_plan(plan), path).map_err(value_error)
}

#[pymodule]
#[pyo3(name = "mapf_local")]
fn mapf_local_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDigraph>()?;
    m.add_function(wrap_pyfunction!(apply_plan, m)?)?;
    m.add_function(wrap_pyfunction!(check_solution, m)?)?;
    m.add_function(wrap_pyfunction!(validate_solution, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_plan, m)?)?;
    m.add_function(wrap_pyfunction!(plan_distance, m)?)?;
    m.add_function(wrap_pyfunction!(prioritized_initial, m)?)?;
    m.add_function(wrap_pyfunction!(joint_bfs_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(dynprog, m)?)?;
    m.add_function(wrap_pyfunction!(improve, m)?)?;
    m.add_function(wrap_pyfunction!(percentage_decrease, m)?)?;
    m.add_function(wrap_pyfunction!(ball_border_bound, m)?)?;
    m.add_function(wrap_pyfunction!(config_ball_bound, m)?)?;
    m.add_function(wrap_pyfunction!(neighborhood_bound, m)?)?;
    m.add_function(wrap_pyfunction!(load_instance, m)?)?;
    m.add_function(wrap_pyfunction!(save_instance, m)?)?;
    m.add_function(wrap_pyfunction!(load_plan, m)?)?;
    m.add_function(wrap_pyfunction!(save_plan, m)?)?;
    Ok(())
}
