//! Connected interaction topologies for small spin sensors.
//!
//! A [`Graph`] is a simple undirected connected graph with canonicalized
//! edges, so two graphs compare equal exactly when their edge sets match.
//! The six four-vertex topologies studied for thermometry and magnetometry
//! are available through [`catalog_graph`].

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

/// Largest vertex count accepted by the brute-force and dense routines.
pub const MAX_VERTICES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("graph has {0} vertices, more than the supported maximum {MAX_VERTICES}")]
    TooLarge(usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    EndpointOutOfRange { u: usize, v: usize, n: usize },
    #[error("graph is disconnected: vertex {0} is unreachable from vertex 0")]
    Disconnected(usize),
    #[error("unknown catalog graph `{0}` (expected one of P4, C4, Sd4, K4, PAN, S3)")]
    UnknownName(String),
    #[error("graph file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("failed to read graph file {path}: {msg}")]
    Io { path: String, msg: String },
}

/// Validated simple connected graph on vertices `0..n_vertices`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Validates the edge list and canonicalizes it into sorted `(u, v)`
    /// pairs with `u < v`.
    ///
    /// Duplicates are rejected rather than merged, so a caller that repeats an
    /// edge (in either orientation) learns about it.
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n_vertices == 0 {
            return Err(GraphError::Empty);
        }
        if n_vertices > MAX_VERTICES {
            return Err(GraphError::TooLarge(n_vertices));
        }
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u >= n_vertices || v >= n_vertices {
                return Err(GraphError::EndpointOutOfRange { u, v, n: n_vertices });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let pair = (u.min(v), u.max(v));
            if !set.insert(pair) {
                return Err(GraphError::DuplicateEdge(pair.0, pair.1));
            }
        }
        let graph = Graph {
            n_vertices,
            edges: set.into_iter().collect(),
        };
        if let Some(v) = graph.first_unreachable() {
            return Err(GraphError::Disconnected(v));
        }
        Ok(graph)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Canonical edges, sorted, each with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Applies the vertex map `i -> perm[i]`. `perm` must be a permutation of
    /// `0..n_vertices`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph, GraphError> {
        assert_eq!(perm.len(), self.n_vertices, "permutation length mismatch");
        let edges: Vec<_> = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Graph::new(self.n_vertices, &edges)
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().position(|s| !s)
    }

    /// Parses the plain-text graph format:
    ///
    /// ```text
    /// n 4
    /// e 0 1
    /// e 1 2
    /// ```
    ///
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Graph, GraphError> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |msg: &str| GraphError::Parse {
                line,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            match fields.as_slice() {
                ["n", count] => {
                    if n.is_some() {
                        return Err(err("vertex count declared twice"));
                    }
                    n = Some(count.parse::<usize>().map_err(|_| err("invalid vertex count"))?);
                }
                ["e", u, v] => {
                    if n.is_none() {
                        return Err(err("edge before `n` line"));
                    }
                    let u = u.parse::<usize>().map_err(|_| err("invalid vertex index"))?;
                    let v = v.parse::<usize>().map_err(|_| err("invalid vertex index"))?;
                    edges.push((u, v));
                }
                _ => return Err(err("expected `n <count>` or `e <u> <v>`")),
            }
        }
        let n = n.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing `n <count>` line".into(),
        })?;
        Graph::new(n, &edges)
    }

    pub fn from_file(path: &Path) -> Result<Graph, GraphError> {
        let text = std::fs::read_to_string(path).map_err(|e| GraphError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Graph::parse(&text)
    }

    /// Serializes to the format accepted by [`Graph::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n_vertices);
        for &(u, v) in &self.edges {
            out.push_str(&format!("e {u} {v}\n"));
        }
        out
    }
}

/// The six connected four-vertex topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CatalogName {
    P4,
    C4,
    Sd4,
    K4,
    Pan,
    S3,
}

impl CatalogName {
    /// Catalog order, which is also the legend order used in plots.
    pub const ALL: [CatalogName; 6] = [
        CatalogName::P4,
        CatalogName::C4,
        CatalogName::Pan,
        CatalogName::Sd4,
        CatalogName::K4,
        CatalogName::S3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CatalogName::P4 => "P4",
            CatalogName::C4 => "C4",
            CatalogName::Sd4 => "Sd4",
            CatalogName::K4 => "K4",
            CatalogName::Pan => "PAN",
            CatalogName::S3 => "S3",
        }
    }

    fn edges(self) -> &'static [(usize, usize)] {
        match self {
            CatalogName::P4 => &[(0, 1), (1, 2), (2, 3)],
            CatalogName::C4 => &[(0, 1), (1, 2), (2, 3), (3, 0)],
            CatalogName::Sd4 => &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)],
            CatalogName::K4 => &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            // triangle 0-1-2, pendant 3 hangs off vertex 2
            CatalogName::Pan => &[(0, 1), (1, 2), (0, 2), (2, 3)],
            CatalogName::S3 => &[(0, 1), (0, 2), (0, 3)],
        }
    }

    pub fn graph(self) -> Graph {
        Graph::new(4, self.edges()).expect("catalog graphs are valid")
    }
}

impl fmt::Display for CatalogName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CatalogName {
    type Err = GraphError;

    /// Case-insensitive; `PAN` and `Pan` both work.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "P4" => Ok(CatalogName::P4),
            "C4" => Ok(CatalogName::C4),
            "SD4" => Ok(CatalogName::Sd4),
            "K4" => Ok(CatalogName::K4),
            "PAN" => Ok(CatalogName::Pan),
            "S3" => Ok(CatalogName::S3),
            _ => Err(GraphError::UnknownName(s.to_string())),
        }
    }
}

pub fn catalog_graph(name: &str) -> Result<Graph, GraphError> {
    name.parse::<CatalogName>().map(CatalogName::graph)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphProperties {
    pub edge_count: usize,
    pub total_degree: usize,
    pub ground_degeneracy: usize,
}

/// Energy of a classical spin configuration under `-J Σ s_i s_j`, with bit
/// `i` of `config` set meaning `s_i = -1`.
pub fn classical_energy(graph: &Graph, coupling: f64, config: usize) -> f64 {
    let spin = |i: usize| if config >> i & 1 == 0 { 1.0 } else { -1.0 };
    -coupling
        * graph
            .edges()
            .iter()
            .map(|&(u, v)| spin(u) * spin(v))
            .sum::<f64>()
}

/// Counts zero-field ground states by enumerating all `2^N` classical
/// configurations.
pub fn brute_force_ground_degeneracy(graph: &Graph, coupling: f64) -> usize {
    let energies: Vec<f64> = (0..1usize << graph.n_vertices())
        .map(|c| classical_energy(graph, coupling, c))
        .collect();
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    // energies are sums of ±J, so a loose tolerance is exact in practice
    energies.iter().filter(|&&e| (e - min).abs() <= 1e-9).count()
}

pub fn graph_properties(graph: &Graph, coupling: f64) -> GraphProperties {
    GraphProperties {
        edge_count: graph.edge_count(),
        total_degree: graph.degrees().iter().sum(),
        ground_degeneracy: brute_force_ground_degeneracy(graph, coupling),
    }
}
