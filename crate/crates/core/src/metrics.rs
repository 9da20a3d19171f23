//! Distances between configurations and plans, and closed-form upper bounds
//! on the size of balls and plan neighborhoods.
//!
//! All distances are exact integers built on [`Digraph::dist`], so they are
//! asymmetric: `config_distance(a, b)` measures how far `a` lies from `b`.
//! Trajectories are clamped, i.e. a plan keeps reporting its final
//! configuration after its last step.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::digraph::{Digraph, Vertex};
use crate::error::MetricError;
use crate::mapf::{trajectory_states, Configuration, Plan};

/// How per-step configuration distances are aggregated into a plan distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    /// Largest step-aligned distance.
    Inf,
    /// Sum of step-aligned distances.
    One,
    /// Largest distance of any visited configuration to the reference trajectory.
    MaxMin,
    /// Sum of distances of visited configurations to the reference trajectory.
    SumMin,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 4] = [
        DistanceKind::Inf,
        DistanceKind::One,
        DistanceKind::MaxMin,
        DistanceKind::SumMin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Inf => "inf",
            DistanceKind::One => "one",
            DistanceKind::MaxMin => "maxmin",
            DistanceKind::SumMin => "summin",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DistanceKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown distance kind `{s}` (expected inf, one, maxmin or summin)"))
    }
}

fn vertex_distance(g: &Digraph, u: Vertex, v: Vertex) -> Result<u64, MetricError> {
    g.dist(u, v)
        .map(u64::from)
        .ok_or(MetricError::Unreachable { from: v, to: u })
}

/// Sum over agents of the distance of `a`'s vertex from `b`'s vertex.
pub fn config_distance(g: &Digraph, a: &Configuration, b: &Configuration) -> Result<u64, MetricError> {
    if a.agent_count() != b.agent_count() {
        return Err(MetricError::AgentCount(a.agent_count(), b.agent_count()));
    }
    a.iter()
        .zip(b.iter())
        .map(|(&u, &v)| vertex_distance(g, u, v))
        .sum()
}

fn min_distance_to(
    g: &Digraph,
    cfg: &Configuration,
    trajectory: &[Configuration],
) -> Result<u64, MetricError> {
    let mut best: Option<u64> = None;
    let mut first_err = None;
    for point in trajectory {
        match config_distance(g, cfg, point) {
            Ok(d) => best = Some(best.map_or(d, |b| b.min(d))),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("trajectory always holds its start configuration"))
}

/// Minimum distance of `cfg` from any configuration on `f0`'s trajectory,
/// including the start.
///
/// Unreachable trajectory points are skipped; the error is only reported
/// when no point is reachable.
pub fn point_to_trajectory(
    g: &Digraph,
    start: &Configuration,
    cfg: &Configuration,
    f0: &Plan,
) -> Result<u64, MetricError> {
    let states = trajectory_states(g, start, f0)?;
    min_distance_to(g, cfg, &states)
}

/// Distance of plan `f` from plan `f0`, both executed from `start`.
pub fn plan_distance(
    g: &Digraph,
    start: &Configuration,
    f: &Plan,
    f0: &Plan,
    kind: DistanceKind,
) -> Result<u64, MetricError> {
    let ours = trajectory_states(g, start, f)?;
    let reference = trajectory_states(g, start, f0)?;
    let common = f.len().min(f0.len());
    let aligned = || (1..=common).map(|k| config_distance(g, &ours[k], &reference[k]));
    let to_reference = |range: std::ops::RangeInclusive<usize>| {
        range
            .map(|k| min_distance_to(g, &ours[k], &reference))
            .collect::<Result<Vec<u64>, _>>()
    };
    Ok(match kind {
        DistanceKind::Inf => aligned()
            .collect::<Result<Vec<u64>, _>>()?
            .into_iter()
            .max()
            .unwrap_or(0),
        DistanceKind::One => aligned().sum::<Result<u64, _>>()?,
        DistanceKind::MaxMin => to_reference(1..=f.len())?.into_iter().max().unwrap_or(0),
        DistanceKind::SumMin => to_reference(1..=common)?.into_iter().sum(),
    })
}

/// Upper bound `phi^r` on the number of vertices at distance exactly `r`.
pub fn ball_border_bound(phi: u64, r: u32) -> BigUint {
    BigUint::from(phi).pow(r)
}

fn binomial(n: u64, k: u64) -> BigUint {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Upper bound on the number of valid configurations within distance `r` of
/// a configuration of `agents` agents:
/// `1 + (r + agents - 1)! / ((r - 1)! (agents - 1)!) * phi^r`.
///
/// Radius zero (and zero agents) admit only the centre, giving 1.
pub fn config_ball_bound(phi: u64, agents: u64, r: u32) -> BigUint {
    if r == 0 || agents == 0 {
        return BigUint::one();
    }
    let r64 = u64::from(r);
    // (r+k-1)! / ((r-1)! (k-1)!) = r * C(r+k-1, k-1)
    let coefficient = binomial(r64 + agents - 1, agents - 1) * r64;
    BigUint::one() + coefficient * ball_border_bound(phi, r)
}

/// Upper bound on the number of plan classes in the radius-`r` neighborhood
/// of a reference plan of length `reference_len`.
pub fn neighborhood_bound(reference_len: u64, phi: u64, agents: u64, r: u32) -> BigUint {
    BigUint::from(reference_len).pow(2) * config_ball_bound(phi, agents, r)
}

/// Looser polynomial form of [`neighborhood_bound`]:
/// `len^2 (1 + (r + agents)^r phi^r / (r - 1)!)`. Defined for `r >= 1`.
pub fn relaxed_neighborhood_bound(reference_len: u64, phi: u64, agents: u64, r: u32) -> Option<BigRational> {
    if r == 0 {
        return None;
    }
    let factorial: BigUint = (1..u64::from(r)).map(BigUint::from).product();
    let growth = BigUint::from(u64::from(r) + agents).pow(r) * ball_border_bound(phi, r);
    let len_sq = BigUint::from(reference_len).pow(2);
    let value = BigRational::from_integer(len_sq.into())
        * (BigRational::one() + BigRational::new(growth.into(), factorial.into()));
    Some(value)
}

/// Converts a bound to `u64`, saturating.
pub fn saturating_u64(value: &BigUint) -> u64 {
    u64::try_from(value).unwrap_or(u64::MAX)
}
