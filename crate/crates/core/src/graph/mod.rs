//! Undirected, unweighted, connected graphs: all-pairs hop distances, the
//! weighted median and the sets of vertices consistent with a reply.

mod generate;

pub use generate::{GeneratorSpec, GraphGenerator};

use std::collections::VecDeque;
use std::path::Path;

use crate::error::{Error, Result};
use crate::oracle::AnswerKind;
use crate::weights::{CompatibleSet, WeightState};

/// Coordinates known from construction; lets the median be computed from
/// row and column marginals instead of the full distance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    General,
    /// Vertex `r * cols + c` sits at row `r`, column `c`.
    Grid { rows: usize, cols: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
    layout: Layout,
}

impl Graph {
    /// Builds a graph on vertices `0..n`. Duplicate edges are merged; self
    /// loops, out-of-range ids and disconnected inputs are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structural("graph has no vertices".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Structural(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::Structural(format!("self-loop at vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut edge_count = 0;
        for list in adjacency.iter_mut() {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        let graph = Graph {
            adjacency,
            edge_count: edge_count / 2,
            layout: Layout::General,
        };
        if let Some(v) = graph.first_unreachable() {
            return Err(Error::Structural(format!(
                "graph is disconnected: vertex {v} is unreachable from vertex 0"
            )));
        }
        Ok(graph)
    }

    pub(crate) fn with_layout(mut self, layout: Layout) -> Self {
        self.layout = layout;
        self
    }

    /// Parses the plain-text edge-list format: a header `n m`, then `m`
    /// lines `u v`. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            origin: origin.to_string(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (header_line, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing header line \"n m\"".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (n, m) = match fields.as_slice() {
            [n, m] => (
                n.parse::<usize>()
                    .map_err(|e| parse_err(header_line, format!("bad vertex count {n:?}: {e}")))?,
                m.parse::<usize>()
                    .map_err(|e| parse_err(header_line, format!("bad edge count {m:?}: {e}")))?,
            ),
            _ => return Err(parse_err(header_line, "expected header \"n m\"".into())),
        };
        if n == 0 {
            return Err(parse_err(header_line, "graph has no vertices".into()));
        }

        let mut edges = Vec::with_capacity(m);
        for (line_no, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [u, v] = fields.as_slice() else {
                return Err(parse_err(line_no, format!("expected \"u v\", got {line:?}")));
            };
            let id = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| parse_err(line_no, format!("bad vertex id {s:?}: {e}")))
            };
            let (u, v) = (id(u)?, id(v)?);
            if u >= n || v >= n {
                return Err(parse_err(
                    line_no,
                    format!("edge ({u}, {v}) references a vertex outside 0..{n}"),
                ));
            }
            if u == v {
                return Err(parse_err(line_no, format!("self-loop at vertex {u}")));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(parse_err(
                header_line,
                format!("header declares {m} edges but {} were listed", edges.len()),
            ));
        }
        Graph::from_edges(n, &edges).map_err(|e| match e {
            Error::Structural(msg) => parse_err(header_line, msg),
            other => other,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Graph::parse(&text, &path.display().to_string())
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighbor ids.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn is_tree(&self) -> bool {
        self.edge_count + 1 == self.n()
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Serializes to the edge-list format accepted by [`Graph::parse`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.edge_count);
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    fn bfs(&self, source: usize, dist: &mut [u32]) {
        dist.fill(u32::MAX);
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }

    fn first_unreachable(&self) -> Option<usize> {
        let mut dist = vec![0; self.n()];
        self.bfs(0, &mut dist);
        dist.iter().position(|&d| d == u32::MAX)
    }
}

/// Hop distances between every pair of vertices, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<u32>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> u32 {
        self.dist[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[u32] {
        &self.dist[u * self.n..(u + 1) * self.n]
    }
}

/// Breadth-first search from every vertex.
pub fn all_pairs_distances(g: &Graph) -> DistanceMatrix {
    let n = g.n();
    let mut dist = vec![0u32; n * n];
    for (u, row) in dist.chunks_mut(n).enumerate() {
        g.bfs(u, row);
    }
    debug_assert!(!dist.contains(&u32::MAX), "graphs are connected by construction");
    DistanceMatrix { n, dist }
}

/// `sum_u d(u, v) w(u)` for every `v`, straight from the distance matrix.
pub fn potentials_dense(d: &DistanceMatrix, w: &[f64]) -> Vec<f64> {
    (0..d.n()).map(|v| dot(d.row(v), w)).collect()
}

fn dot(row: &[u32], w: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut rc = row.chunks_exact(4);
    let mut wc = w.chunks_exact(4);
    for (r, x) in (&mut rc).zip(&mut wc) {
        for k in 0..4 {
            acc[k] += r[k] as f64 * x[k];
        }
    }
    let tail: f64 = rc
        .remainder()
        .iter()
        .zip(wc.remainder())
        .map(|(&r, &x)| r as f64 * x)
        .sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Potentials on a tree by rerooting: moving from a parent to child `c`
/// brings the subtree of `c` one step closer and everything else one step
/// further away.
fn potentials_tree(g: &Graph, d: &DistanceMatrix, w: &[f64]) -> Vec<f64> {
    let n = g.n();
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![usize::MAX; n];
    parent[0] = 0;
    order.push(0);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &v in g.neighbors(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                order.push(v);
            }
        }
    }
    let mut subtree = w.to_vec();
    for &v in order.iter().skip(1).rev() {
        subtree[parent[v]] += subtree[v];
    }
    let total = subtree[0];
    let mut phi = vec![0.0; n];
    phi[0] = dot(d.row(0), w);
    for &v in order.iter().skip(1) {
        phi[v] = phi[parent[v]] + total - 2.0 * subtree[v];
    }
    phi
}

/// Potentials on a grid: hop distance is the L1 distance, so the potential
/// separates into row and column terms.
fn potentials_grid(rows: usize, cols: usize, w: &[f64]) -> Vec<f64> {
    let mut row_mass = vec![0.0; rows];
    let mut col_mass = vec![0.0; cols];
    for (v, &x) in w.iter().enumerate() {
        row_mass[v / cols] += x;
        col_mass[v % cols] += x;
    }
    let line = |mass: &[f64]| -> Vec<f64> {
        (0..mass.len())
            .map(|i| {
                mass.iter()
                    .enumerate()
                    .map(|(j, &m)| i.abs_diff(j) as f64 * m)
                    .sum()
            })
            .collect()
    };
    let (pr, pc) = (line(&row_mass), line(&col_mass));
    (0..rows * cols).map(|v| pr[v / cols] + pc[v % cols]).collect()
}

/// `sum_u d(u, v) w(u)` for every `v`, using the cheapest exact method the
/// graph's structure allows.
pub fn potentials(g: &Graph, d: &DistanceMatrix, w: &[f64]) -> Vec<f64> {
    match g.layout() {
        Layout::Grid { rows, cols } => potentials_grid(rows, cols, w),
        Layout::General if g.is_tree() && g.n() > 2 => potentials_tree(g, d, w),
        Layout::General => potentials_dense(d, w),
    }
}

/// Index of the smallest potential. Values within accumulated rounding
/// error of the minimum count as ties and go to the smallest id.
pub fn argmin_potential(phi: &[f64]) -> usize {
    let min = phi.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 64.0 * f64::EPSILON * phi.len() as f64 * min.max(1.0);
    phi.iter().position(|&x| x <= min + tol).unwrap_or(0)
}

/// A vertex minimizing `sum_u d(u, v) w(u)`; ties go to the smallest id.
pub fn weighted_median(g: &Graph, d: &DistanceMatrix, w: &WeightState) -> usize {
    argmin_potential(&potentials(g, d, w.relative()))
}

/// Vertices for which `reply` to a query at `q` is truthful: `{q}` for a
/// yes-answer, and for a neighbor `u` every `x` with a shortest `q`-`x`
/// path through `u`.
pub fn consistent_set(
    g: &Graph,
    d: &DistanceMatrix,
    q: usize,
    reply: &AnswerKind,
) -> Result<CompatibleSet> {
    match *reply {
        AnswerKind::Yes => Ok(CompatibleSet::singleton(g.n(), q)),
        AnswerKind::Neighbor(u) => {
            if !g.is_adjacent(q, u) {
                return Err(Error::Protocol(format!(
                    "reply {u} is not a neighbor of queried vertex {q}"
                )));
            }
            let (from_q, from_u) = (d.row(q), d.row(u));
            let mask = from_q
                .iter()
                .zip(from_u)
                .map(|(&dq, &du)| du + 1 == dq)
                .collect();
            Ok(CompatibleSet::from_mask(mask))
        }
        AnswerKind::Less | AnswerKind::Greater => Err(Error::Protocol(format!(
            "comparison reply {reply:?} to a graph query"
        ))),
    }
}
