//! The four centrality measures over an interaction network: out-degree,
//! betweenness, closeness, eigenvector.
//!
//! Each function returns a [`CentralityVector`] with raw values plus a
//! max-scaled `normalized` map in `[0,1]` (the form the influence score
//! consumes). Shortest-path measures accept a distance transform: with
//! `reciprocal` (the default) a heavier edge means a closer tie, `literal`
//! takes the weight itself as the distance.
//!
//! Single-source passes are independent and merged by addition, so callers
//! may parallelize per source; the implementation here runs them in
//! deterministic lexicographic node order.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::network::{EdgeMode, InteractionNetwork};
use crate::{Error, Result};

/// Tolerance for shortest-path tie detection. Genuinely equal path sums
/// may differ by a few ulps depending on summation order; anything closer
/// than this counts as the same length.
const TIE_EPS: f64 = 1e-9;

pub const DEFAULT_EIGENVECTOR_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_EIGENVECTOR_MAX_ITERATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    OutDegree,
    Betweenness,
    Closeness,
    Eigenvector,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::OutDegree => "out_degree",
            Measure::Betweenness => "betweenness",
            Measure::Closeness => "closeness",
            Measure::Eigenvector => "eigenvector",
        }
    }

    pub const ALL: [Measure; 4] = [
        Measure::OutDegree,
        Measure::Betweenness,
        Measure::Closeness,
        Measure::Eigenvector,
    ];
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "out_degree" | "odc" => Ok(Measure::OutDegree),
            "betweenness" | "bc" => Ok(Measure::Betweenness),
            "closeness" | "cc" => Ok(Measure::Closeness),
            "eigenvector" | "ec" => Ok(Measure::Eigenvector),
            other => Err(Error::Config(format!("unknown measure '{other}'"))),
        }
    }
}

/// How an edge weight becomes a path distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceTransform {
    /// `d = 1/w`: weight denotes interaction strength, stronger is closer.
    #[default]
    Reciprocal,
    /// `d = w`: the weight itself is the distance.
    Literal,
}

impl std::str::FromStr for DistanceTransform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reciprocal" => Ok(DistanceTransform::Reciprocal),
            "literal" => Ok(DistanceTransform::Literal),
            other => Err(Error::Config(format!("unknown distance transform '{other}'"))),
        }
    }
}

impl DistanceTransform {
    fn apply(self, w: f64) -> f64 {
        match self {
            DistanceTransform::Reciprocal => 1.0 / w,
            DistanceTransform::Literal => w,
        }
    }
}

/// Which edges feed a node's eigenvector score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeOrientation {
    /// Prestige convention: a node's score sums its in-neighbors' scores.
    #[default]
    InEdges,
    OutEdges,
}

impl std::str::FromStr for EdgeOrientation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in_edges" => Ok(EdgeOrientation::InEdges),
            "out_edges" => Ok(EdgeOrientation::OutEdges),
            other => Err(Error::Config(format!("unknown edge orientation '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Power-iteration count (eigenvector only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Nodes that reach no other node (closeness only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unreachable_nodes: Vec<String>,
    /// The directed pair count `(n-1)(n-2)` used as the conventional
    /// betweenness normalization; a uniform scaling, so it cancels in the
    /// max-scaled `normalized` map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_normalization: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityVector {
    pub measure: Measure,
    pub mode: EdgeMode,
    /// Raw value per stakeholder, defined for every node of the network.
    pub values: BTreeMap<String, f64>,
    /// `values` scaled by the maximum: in `[0,1]`, max exactly 1 when any
    /// raw value is positive.
    pub normalized: BTreeMap<String, f64>,
    pub diagnostics: Diagnostics,
}

fn max_scale(values: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    let max = values.values().cloned().fold(0.0_f64, f64::max);
    values
        .iter()
        .map(|(k, v)| (k.clone(), if max > 0.0 { v / max } else { 0.0 }))
        .collect()
}

/// Compact adjacency view with nodes as indices in sorted-id order.
struct Adjacency {
    nodes: Vec<String>,
    /// Outgoing `(target, weight)` lists, targets in ascending index order.
    out: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    fn build(network: &InteractionNetwork, require_positive: bool) -> Result<Self> {
        let nodes = network.nodes.clone();
        let index: BTreeMap<&str, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut out = vec![Vec::new(); nodes.len()];
        for ((s, t), w) in &network.edges {
            let w = w.to_f64().ok_or_else(|| {
                Error::Contract(format!("edge ({s},{t}) weight not representable"))
            })?;
            if require_positive && w <= 0.0 {
                return Err(Error::Contract(format!(
                    "edge ({s},{t}) has non-positive weight {w}; weighted shortest paths require positive weights"
                )));
            }
            out[index[s.as_str()]].push((index[t.as_str()], w));
        }
        // BTreeMap iteration already yields (source, target) sorted.
        Ok(Adjacency { nodes, out })
    }
}

/// Out-degree centrality: sum of outgoing weights (weighted mode) or
/// outgoing edge count (binary mode).
pub fn out_degree(network: &InteractionNetwork) -> Result<CentralityVector> {
    let mut values = BTreeMap::new();
    for node in &network.nodes {
        let v = match network.mode {
            EdgeMode::Weighted => network
                .weighted_out_degree(node)
                .to_f64()
                .unwrap_or(f64::NAN),
            EdgeMode::Binary => network.binary_out_degree(node) as f64,
        };
        values.insert(node.clone(), v);
    }
    Ok(CentralityVector {
        measure: Measure::OutDegree,
        mode: network.mode,
        normalized: max_scale(&values),
        values,
        diagnostics: Diagnostics::default(),
    })
}

/// Single-source shortest paths (non-negative weights, binary heap),
/// returning distances and a deterministic settle order.
fn shortest_paths(adj: &Adjacency, source: usize, transform: DistanceTransform) -> Vec<f64> {
    let n = adj.nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(std::cmp::Reverse((ordered(0.0), source)));
    while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
        let d = d.0;
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj.out[u] {
            let nd = d + transform.apply(w);
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(std::cmp::Reverse((ordered(nd), v)));
            }
        }
    }
    dist
}

#[derive(PartialEq, PartialOrd)]
struct OrderedF64(f64);
impl Eq for OrderedF64 {}
#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).expect("no NaN distances")
    }
}
fn ordered(x: f64) -> OrderedF64 {
    OrderedF64(x)
}

/// Nodes in nondecreasing distance order, index as tie-break; unreachable
/// nodes excluded.
fn settle_order(dist: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dist.len()).filter(|&v| dist[v].is_finite()).collect();
    order.sort_by(|&a, &b| {
        dist[a]
            .partial_cmp(&dist[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    order
}

/// Betweenness centrality: pair-dependency accumulation over single-source
/// shortest paths, ties split equally among all shortest paths.
///
/// `values` holds the raw accumulated dependency (a node on the only path
/// of its pair scores 1); `normalized` is the max-scaled form, with the
/// directed `(n-1)(n-2)` pair count recorded in diagnostics.
pub fn betweenness(
    network: &InteractionNetwork,
    transform: DistanceTransform,
) -> Result<CentralityVector> {
    let adj = Adjacency::build(network, network.mode == EdgeMode::Weighted)?;
    let n = adj.nodes.len();
    let mut accum = vec![0.0_f64; n];

    for s in 0..n {
        let dist = shortest_paths(&adj, s, transform);
        let order = settle_order(&dist);

        // Shortest-path counts and predecessor lists from fixed distances.
        let mut sigma = vec![0.0_f64; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        sigma[s] = 1.0;
        for &u in &order {
            for &(v, w) in &adj.out[u] {
                if (dist[u] + transform.apply(w) - dist[v]).abs() <= TIE_EPS {
                    sigma[v] += sigma[u];
                    preds[v].push(u);
                }
            }
        }

        // Dependency accumulation in reverse settle order.
        let mut delta = vec![0.0_f64; n];
        for &v in order.iter().rev() {
            for &u in &preds[v] {
                if sigma[v] > 0.0 {
                    delta[u] += sigma[u] / sigma[v] * (1.0 + delta[v]);
                }
            }
            if v != s {
                accum[v] += delta[v];
            }
        }
    }

    let values: BTreeMap<String, f64> = adj
        .nodes
        .iter()
        .enumerate()
        .map(|(i, node)| (node.clone(), accum[i]))
        .collect();
    let pair_normalization = if n >= 3 {
        Some(((n - 1) * (n - 2)) as f64)
    } else {
        None
    };
    Ok(CentralityVector {
        measure: Measure::Betweenness,
        mode: network.mode,
        normalized: max_scale(&values),
        values,
        diagnostics: Diagnostics {
            pair_normalization,
            ..Default::default()
        },
    })
}

/// Closeness centrality over the reachable set: for node `v` reaching `r`
/// others at total distance `D`, raw closeness is `(r/D) * (r/(n-1))`.
/// Nodes reaching nobody score 0 and are flagged in diagnostics.
pub fn closeness(
    network: &InteractionNetwork,
    transform: DistanceTransform,
) -> Result<CentralityVector> {
    let adj = Adjacency::build(network, network.mode == EdgeMode::Weighted)?;
    let n = adj.nodes.len();
    let mut values = BTreeMap::new();
    let mut unreachable_nodes = Vec::new();

    for s in 0..n {
        let dist = shortest_paths(&adj, s, transform);
        let mut reachable = 0usize;
        let mut total = 0.0_f64;
        for (v, &d) in dist.iter().enumerate() {
            if v != s && d.is_finite() {
                reachable += 1;
                total += d;
            }
        }
        let value = if reachable == 0 {
            unreachable_nodes.push(adj.nodes[s].clone());
            0.0
        } else {
            let r = reachable as f64;
            (r / total) * (r / (n - 1) as f64)
        };
        values.insert(adj.nodes[s].clone(), value);
    }

    Ok(CentralityVector {
        measure: Measure::Closeness,
        mode: network.mode,
        normalized: max_scale(&values),
        values,
        diagnostics: Diagnostics {
            unreachable_nodes,
            ..Default::default()
        },
    })
}

/// Eigenvector centrality by power iteration with Euclidean
/// renormalization, started from the uniform positive vector.
///
/// With the default in-edge orientation a node's score sums
/// `w(j, i) * score(j)` over in-neighbors `j`. Fails with the last iterate
/// attached when the iteration does not settle within `max_iterations`.
pub fn eigenvector(
    network: &InteractionNetwork,
    tolerance: f64,
    max_iterations: usize,
    orientation: EdgeOrientation,
) -> Result<CentralityVector> {
    if network.edges.is_empty() {
        return Err(Error::Contract(
            "eigenvector centrality requires a network with at least one edge".into(),
        ));
    }
    if tolerance <= 0.0 {
        return Err(Error::Contract("tolerance must be positive".into()));
    }
    let adj = Adjacency::build(network, false)?;
    let n = adj.nodes.len();

    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut iterations = 0usize;
    loop {
        let mut y = vec![0.0_f64; n];
        for u in 0..n {
            for &(v, w) in &adj.out[u] {
                match orientation {
                    EdgeOrientation::InEdges => y[v] += w * x[u],
                    EdgeOrientation::OutEdges => y[u] += w * x[v],
                }
            }
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        iterations += 1;
        let last = |vec: &[f64]| -> BTreeMap<String, f64> {
            adj.nodes
                .iter()
                .cloned()
                .zip(vec.iter().cloned())
                .collect()
        };
        if norm == 0.0 {
            // All mass flowed out of the graph; no dominant direction.
            return Err(Error::NonConvergence {
                iterations,
                last: last(&x),
            });
        }
        for v in &mut y {
            *v /= norm;
        }
        let diff = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        x = y;
        if diff < tolerance {
            break;
        }
        if iterations >= max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                last: last(&x),
            });
        }
    }

    let values: BTreeMap<String, f64> = adj.nodes.iter().cloned().zip(x).collect();
    Ok(CentralityVector {
        measure: Measure::Eigenvector,
        mode: network.mode,
        normalized: max_scale(&values),
        values,
        diagnostics: Diagnostics {
            iterations: Some(iterations),
            ..Default::default()
        },
    })
}

/// Convenience dispatcher used by the CLI.
pub fn compute(
    network: &InteractionNetwork,
    measure: Measure,
    transform: DistanceTransform,
    tolerance: f64,
    max_iterations: usize,
    orientation: EdgeOrientation,
) -> Result<CentralityVector> {
    match measure {
        Measure::OutDegree => out_degree(network),
        Measure::Betweenness => betweenness(network, transform),
        Measure::Closeness => closeness(network, transform),
        Measure::Eigenvector => eigenvector(network, tolerance, max_iterations, orientation),
    }
}
