//! Undirected communication graphs.
//!
//! A [`Graph`] is a simple undirected graph on `m` vertices: no self-loops,
//! no parallel edges. Edges are stored in a canonical order (lexicographic by
//! `(min, max)` endpoint), which also fixes the edge numbering used by the
//! optimizer's weight vector. Graphs are immutable after construction.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::Matrix;
use crate::{Error, Result};

/// Intra-cluster wiring for [`Graph::clustered`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterShape {
    /// Every pair of vertices inside a cluster is connected.
    Complete,
    /// Cluster vertices form a star around the cluster's gateway.
    Star,
}

/// Simple undirected graph on `m` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    m: usize,
    /// Canonical edge list: each pair is `(min, max)`, sorted ascending.
    /// The position of an edge in this list is its edge index.
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
    connected: bool,
    labels: Option<Vec<String>>,
}

impl Graph {
    /// Builds a graph from an edge list.
    ///
    /// Rejects out-of-range endpoints, self-loops, and duplicate edges
    /// (including duplicates given with swapped endpoints).
    pub fn new(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidParameter {
                name: "m",
                message: "vertex count must be at least 1".to_string(),
            });
        }
        let mut canonical: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= m {
                return Err(Error::VertexOutOfRange { vertex: a, vertex_count: m });
            }
            if b >= m {
                return Err(Error::VertexOutOfRange { vertex: b, vertex_count: m });
            }
            if a == b {
                return Err(Error::SelfLoop { vertex: a });
            }
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge { a: w[0].0, b: w[0].1 });
        }
        let mut degrees = vec![0usize; m];
        for &(a, b) in &canonical {
            degrees[a] += 1;
            degrees[b] += 1;
        }
        let connected = is_connected(m, &canonical);
        Ok(Graph { m, edges: canonical, degrees, connected, labels: None })
    }

    /// Attaches vertex names; `labels.len()` must equal the vertex count.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: format!("{} labels", self.m),
                got: format!("{}", labels.len()),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.m
    }

    /// Canonical edge list; position in the slice is the edge index.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[v].as_str())
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).is_ok()
    }

    /// Graph Laplacian `L = D - A`. Entries are exact small integers.
    pub fn laplacian(&self) -> Matrix {
        let mut l = Matrix::zeros(self.m, self.m);
        for i in 0..self.m {
            l[(i, i)] = self.degrees[i] as f64;
        }
        for &(a, b) in &self.edges {
            l[(a, b)] = -1.0;
            l[(b, a)] = -1.0;
        }
        l
    }

    /// Vertex-edge incidence matrix `B` (m x |E|).
    ///
    /// The column for edge `l = (i, j)` with `i < j` has `+1` at row `i` and
    /// `-1` at row `j`, so `B B^T = L` exactly.
    pub fn incidence(&self) -> Matrix {
        let mut b = Matrix::zeros(self.m, self.edges.len());
        for (l, &(i, j)) in self.edges.iter().enumerate() {
            b[(i, l)] = 1.0;
            b[(j, l)] = -1.0;
        }
        b
    }

    /// Complete graph on `m` vertices.
    pub fn complete(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter {
                name: "m",
                message: "complete graph needs at least 2 vertices".to_string(),
            });
        }
        let mut edges = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in (i + 1)..m {
                edges.push((i, j));
            }
        }
        Graph::new(m, &edges)
    }

    /// Star on `m` vertices with hub 0.
    pub fn star(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter {
                name: "m",
                message: "star graph needs at least 2 vertices".to_string(),
            });
        }
        let edges: Vec<_> = (1..m).map(|leaf| (0, leaf)).collect();
        Graph::new(m, &edges)
    }

    /// `k` disjoint clusters of `c` vertices joined through a shared parent.
    ///
    /// Cluster `j` occupies vertices `[j*c, (j+1)*c)`; its first vertex is the
    /// gateway. The parent is the last vertex (`k*c`) and is adjacent to
    /// exactly the `k` gateways, so removing it disconnects the graph and the
    /// total vertex count is `k*c + 1`.
    pub fn clustered(k: usize, c: usize, shape: ClusterShape) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter {
                name: "k",
                message: "need at least 2 clusters".to_string(),
            });
        }
        if c < 2 {
            return Err(Error::InvalidParameter {
                name: "c",
                message: "cluster size must be at least 2".to_string(),
            });
        }
        let m = k * c + 1;
        let parent = k * c;
        let mut edges = Vec::new();
        for j in 0..k {
            let base = j * c;
            match shape {
                ClusterShape::Complete => {
                    for a in 0..c {
                        for b in (a + 1)..c {
                            edges.push((base + a, base + b));
                        }
                    }
                }
                ClusterShape::Star => {
                    for leaf in 1..c {
                        edges.push((base, base + leaf));
                    }
                }
            }
            edges.push((base, parent));
        }
        Graph::new(m, &edges)
    }
}

fn is_connected(m: usize, edges: &[(usize, usize)]) -> bool {
    if m == 1 {
        return true;
    }
    let mut adj = vec![Vec::new(); m];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; m];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == m
}

/// Parses the edge-list text format.
///
/// One `m <int>` line and one `e <i> <j>` line per edge, whitespace separated;
/// `#` starts a comment; line order does not matter.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut m: Option<usize> = None;
    let mut raw_edges: Vec<(usize, usize, usize)> = Vec::new(); // (a, b, line)
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        let mut tokens = line.split_whitespace();
        let Some(head) = tokens.next() else { continue };
        match head {
            "m" => {
                let value = parse_token(tokens.next(), line_no, "vertex count")?;
                if m.replace(value).is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "repeated `m` line".to_string(),
                    });
                }
            }
            "e" => {
                let a = parse_token(tokens.next(), line_no, "edge endpoint")?;
                let b = parse_token(tokens.next(), line_no, "edge endpoint")?;
                raw_edges.push((a, b, line_no));
            }
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unknown directive `{other}` (expected `m` or `e`)"),
                });
            }
        }
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unexpected trailing token `{extra}`"),
            });
        }
    }
    let Some(m) = m else {
        return Err(Error::Parse { line: 1, message: "missing `m <count>` line".to_string() });
    };
    // Validate each edge with its own line number before handing the whole
    // batch to the constructor.
    let mut edges = Vec::with_capacity(raw_edges.len());
    for &(a, b, line) in &raw_edges {
        if let Err(e) = Graph::new(m, &[(a, b)]) {
            return Err(Error::Parse { line, message: e.to_string() });
        }
        edges.push((a, b));
    }
    Graph::new(m, &edges).map_err(|e| match e {
        Error::DuplicateEdge { a, b } => {
            let line = raw_edges
                .iter()
                .rev()
                .find(|&&(x, y, _)| (x.min(y), x.max(y)) == (a, b))
                .map(|&(_, _, l)| l)
                .unwrap_or(1);
            Error::Parse { line, message: format!("duplicate edge ({a}, {b})") }
        }
        other => other,
    })
}

fn parse_token(token: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{token}`"),
    })
}

/// Formats a graph in the edge-list text format; inverse of
/// [`parse_edge_list`] up to canonical edge ordering.
pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("m {}\n", g.vertex_count());
    for &(a, b) in g.edges() {
        out.push_str(&format!("e {a} {b}\n"));
    }
    out
}
