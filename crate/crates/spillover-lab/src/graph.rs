//! Interference graphs: storage, random generators, and path/distance queries.
//!
//! The interference graph `Z` is a simple undirected graph on `n` units,
//! stored densely (targets of a few thousand units; the downstream Gaussian
//! solves are dense anyway). Graphs are immutable after construction, with
//! degrees and neighbor lists cached, so they can be shared read-only across
//! parallel workers.
//!
//! Two random generators are provided:
//! * a random dot product graph (RDPG): edge `{i,j}` present with probability
//!   `ρ·α_i·α_j` for latent positions `α_i ∈ R^k` and sparsity `ρ`;
//! * a β-model: edge `{i,j}` present with probability
//!   `logistic(β_i + β_j)`, where extreme weights create "superstar" units
//!   connected to almost everyone.
//!
//! Both validate all pair probabilities strictly at construction — no silent
//! clipping, since clipped probabilities would bias closed-form effect checks.

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::seed::Rng;

/// Simple undirected graph with dense adjacency, cached degrees, and cached
/// neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterferenceGraph {
    n: usize,
    /// Row-major dense adjacency; `adjacency[i * n + j] ∈ {0, 1}`.
    adjacency: Vec<u8>,
    degrees: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
}

impl InterferenceGraph {
    /// Builds a graph on `n` units from an edge list with `i < j` per edge.
    ///
    /// Duplicate edges are idempotent. Errors on out-of-range indices,
    /// self-loops, or reversed pairs (`i ≥ j`).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("graph needs n >= 1 units".into()));
        }
        let mut adjacency = vec![0u8; n * n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {j}) out of range for n = {n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop at unit {i}")));
            }
            if i > j {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {j}) must be listed with i < j"
                )));
            }
            adjacency[i * n + j] = 1;
            adjacency[j * n + i] = 1;
        }
        Ok(Self::from_dense_unchecked(n, adjacency))
    }

    /// Builds a graph from a dense 0/1 adjacency matrix.
    ///
    /// Errors unless the matrix is square, symmetric, binary, and has a zero
    /// diagonal.
    pub fn from_adjacency(adjacency: &DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if n == 0 || adjacency.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "adjacency must be square and nonempty, got {}x{}",
                adjacency.nrows(),
                adjacency.ncols()
            )));
        }
        let mut dense = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = adjacency[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency[{i}][{j}] = {v} is not binary"
                    )));
                }
                if i == j && v != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency[{i}][{i}] must be zero"
                    )));
                }
                if adjacency[(j, i)] != v {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency is asymmetric at ({i}, {j})"
                    )));
                }
                dense[i * n + j] = v as u8;
            }
        }
        Ok(Self::from_dense_unchecked(n, dense))
    }

    /// Internal constructor: assumes `adjacency` is already valid.
    fn from_dense_unchecked(n: usize, adjacency: Vec<u8>) -> Self {
        let mut degrees = vec![0usize; n];
        let mut neighbors = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if adjacency[i * n + j] == 1 {
                    degrees[i] += 1;
                    neighbors[i].push(j);
                }
            }
        }
        Self { n, adjacency, degrees, neighbors }
    }

    /// Number of units.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether units `i` and `j` are linked.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j] == 1
    }

    /// Cached degree of unit `i`.
    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    /// Cached degrees of all units.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    /// Sorted neighbor list of unit `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Total edge count.
    pub fn edge_count(&self) -> usize {
        self.degrees.iter().sum::<usize>() / 2
    }

    /// Edges as `(i, j)` pairs with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for &j in &self.neighbors[i] {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Dense adjacency as a float matrix (for the Gaussian solvers).
    pub fn adjacency_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| f64::from(self.adjacency[i * self.n + j]))
    }
}

/// Parameters of a random dot product graph.
///
/// Edge `{i,j}` is present independently with probability `ρ·α_i·α_j`. All
/// pair probabilities — including the (unused) diagonal `ρ·α_i·α_i` — must lie
/// in `[0, 1]`; construction rejects anything else.
#[derive(Debug, Clone)]
pub struct RdpgParams {
    positions: DMatrix<f64>,
    rho: f64,
}

impl RdpgParams {
    /// Validates latent positions (`n×k`) and sparsity `ρ ∈ [0, 1]`.
    pub fn new(positions: DMatrix<f64>, rho: f64) -> Result<Self> {
        if positions.ncols() == 0 {
            return Err(Error::InvalidParameter("latent rank k must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::ProbabilityOutOfRange(format!("sparsity rho = {rho}")));
        }
        let n = positions.nrows();
        for i in 0..n {
            for j in i..n {
                let p = rho * positions.row(i).dot(&positions.row(j));
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::ProbabilityOutOfRange(format!(
                        "rho * alpha_{i} . alpha_{j} = {p}"
                    )));
                }
            }
        }
        Ok(Self { positions, rho })
    }

    /// Latent rank `k`.
    pub fn rank(&self) -> usize {
        self.positions.ncols()
    }

    /// Latent positions (`n×k`).
    pub fn positions(&self) -> &DMatrix<f64> {
        &self.positions
    }

    /// Sparsity factor `ρ`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Edge probability for the pair `{i, j}`.
    pub fn edge_probability(&self, i: usize, j: usize) -> f64 {
        self.rho * self.positions.row(i).dot(&self.positions.row(j))
    }
}

/// Parameters of a β-model graph: edge `{i,j}` with probability
/// `logistic(β_i + β_j)`.
#[derive(Debug, Clone)]
pub struct BetaModelParams {
    weights: Vec<f64>,
}

impl BetaModelParams {
    /// Validates connection propensities (finite reals).
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("beta-model needs n >= 1 weights".into()));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta-model weight {i} is not finite"
            )));
        }
        Ok(Self { weights })
    }

    /// Connection propensities.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Edge probability for the pair `{i, j}`.
    pub fn edge_probability(&self, i: usize, j: usize) -> f64 {
        logistic(self.weights[i] + self.weights[j])
    }
}

/// Numerically safe logistic function.
pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Samples an RDPG graph: independent upper-triangle Bernoulli draws, mirrored.
pub fn sample_rdpg(params: &RdpgParams, rng: &mut Rng) -> InterferenceGraph {
    let n = params.positions.nrows();
    let mut adjacency = vec![0u8; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < params.edge_probability(i, j) {
                adjacency[i * n + j] = 1;
                adjacency[j * n + i] = 1;
            }
        }
    }
    InterferenceGraph::from_dense_unchecked(n, adjacency)
}

/// Draws i.i.d. `Beta(a, b)` latent positions as an `n×1` matrix.
pub fn sample_latent_beta(n: usize, a: f64, b: f64, rng: &mut Rng) -> Result<DMatrix<f64>> {
    let beta = Beta::new(a, b)
        .map_err(|e| Error::InvalidParameter(format!("Beta({a}, {b}): {e}")))?;
    Ok(DMatrix::from_iterator(n, 1, (0..n).map(|_| beta.sample(rng))))
}

/// Samples a β-model graph: independent edges with logistic probabilities.
pub fn sample_beta_model(params: &BetaModelParams, rng: &mut Rng) -> InterferenceGraph {
    let n = params.weights.len();
    let mut adjacency = vec![0u8; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < params.edge_probability(i, j) {
                adjacency[i * n + j] = 1;
                adjacency[j * n + i] = 1;
            }
        }
    }
    InterferenceGraph::from_dense_unchecked(n, adjacency)
}

/// `d`-th power of the adjacency matrix: entry `(i, j)` counts length-`d`
/// walks from `i` to `j`. Errors on integer overflow instead of wrapping.
pub fn path_count_matrix(graph: &InterferenceGraph, d: usize) -> Result<DMatrix<u64>> {
    let n = graph.n();
    let adj = DMatrix::<u64>::from_fn(n, n, |i, j| u64::from(graph.adjacency[i * n + j]));
    let mut power = DMatrix::<u64>::identity(n, n);
    for _ in 0..d {
        let mut next = DMatrix::<u64>::zeros(n, n);
        for i in 0..n {
            for l in 0..n {
                let a = power[(i, l)];
                if a == 0 {
                    continue;
                }
                // Walk counts grow like degree^d; detect overflow explicitly.
                for &j in graph.neighbors(l) {
                    let add = a
                        .checked_mul(adj[(l, j)])
                        .and_then(|p| next[(i, j)].checked_add(p))
                        .ok_or_else(|| {
                            Error::Overflow(format!("path counts at power {d} exceed u64"))
                        })?;
                    next[(i, j)] = add;
                }
            }
        }
        power = next;
    }
    Ok(power)
}

/// Geodesic distance with an explicit "unreachable" sentinel that sorts after
/// every finite distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Distance {
    /// Finite hop count.
    Finite(usize),
    /// No marked unit is reachable.
    Infinite,
}

impl Distance {
    /// Finite value, if any.
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

/// Breadth-first distance from each source to its nearest marked unit.
///
/// A source that is itself marked has distance 0; sources with no reachable
/// marked unit get [`Distance::Infinite`]. An empty marked set yields all
/// infinite (not an error). Errors on an empty source set or out-of-range
/// indices.
pub fn distance_to_nearest(
    graph: &InterferenceGraph,
    sources: &[usize],
    marked: &[usize],
) -> Result<Vec<Distance>> {
    let n = graph.n();
    if sources.is_empty() {
        return Err(Error::InvalidParameter("distance_to_nearest needs at least one source".into()));
    }
    for &u in sources.iter().chain(marked.iter()) {
        if u >= n {
            return Err(Error::InvalidParameter(format!("unit {u} out of range for n = {n}")));
        }
    }
    // Multi-source BFS from the marked set computes every unit's distance to
    // the nearest marked unit in one pass.
    let mut dist = vec![Distance::Infinite; n];
    let mut queue = VecDeque::new();
    for &m in marked {
        if dist[m] == Distance::Infinite {
            dist[m] = Distance::Finite(0);
            queue.push_back(m);
        }
    }
    while let Some(u) = queue.pop_front() {
        let d = match dist[u] {
            Distance::Finite(d) => d,
            Distance::Infinite => unreachable!(),
        };
        for &v in graph.neighbors(u) {
            if dist[v] == Distance::Infinite {
                dist[v] = Distance::Finite(d + 1);
                queue.push_back(v);
            }
        }
    }
    Ok(sources.iter().map(|&s| dist[s]).collect())
}

/// Writes a graph in the edge-list text format.
///
/// First line `n <count>`, then one `<i> <j>` line per edge with `i < j`,
/// 0-based, newline-terminated.
pub fn write_edge_list<W: Write>(graph: &InterferenceGraph, writer: &mut W) -> Result<()> {
    writeln!(writer, "n {}", graph.n())?;
    for (i, j) in graph.edges() {
        writeln!(writer, "{i} {j}")?;
    }
    Ok(())
}

/// Reads a graph from the edge-list text format, rejecting malformed lines,
/// out-of-range indices, self-loops, and reversed pairs with their 1-based
/// line number.
pub fn read_edge_list<R: BufRead>(reader: R) -> Result<InterferenceGraph> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => {
            return Err(Error::EdgeList { line: 1, message: "missing `n <count>` header".into() })
        }
    };
    let mut parts = header.split_whitespace();
    let n = match (parts.next(), parts.next(), parts.next()) {
        (Some("n"), Some(count), None) => count.parse::<usize>().map_err(|_| Error::EdgeList {
            line: 1,
            message: format!("unit count `{count}` is not a nonnegative integer"),
        })?,
        _ => {
            return Err(Error::EdgeList {
                line: 1,
                message: format!("expected header `n <count>`, got `{header}`"),
            })
        }
    };
    if n == 0 {
        return Err(Error::EdgeList { line: 1, message: "unit count must be >= 1".into() });
    }
    let mut adjacency = vec![0u8; n * n];
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (i, j) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => {
                let parse = |tok: &str| {
                    tok.parse::<usize>().map_err(|_| Error::EdgeList {
                        line: line_no,
                        message: format!("index `{tok}` is not a nonnegative integer"),
                    })
                };
                (parse(a)?, parse(b)?)
            }
            _ => {
                return Err(Error::EdgeList {
                    line: line_no,
                    message: format!("expected `<i> <j>`, got `{line}`"),
                })
            }
        };
        if i >= n || j >= n {
            return Err(Error::EdgeList {
                line: line_no,
                message: format!("edge ({i}, {j}) out of range for n = {n}"),
            });
        }
        if i == j {
            return Err(Error::EdgeList { line: line_no, message: format!("self-loop at unit {i}") });
        }
        if i > j {
            return Err(Error::EdgeList {
                line: line_no,
                message: format!("edge ({i}, {j}) must be listed with i < j"),
            });
        }
        adjacency[i * n + j] = 1;
        adjacency[j * n + i] = 1;
    }
    Ok(InterferenceGraph::from_dense_unchecked(n, adjacency))
}
