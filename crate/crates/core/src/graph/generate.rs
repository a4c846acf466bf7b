use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Graph, Layout};
use crate::error::{Error, Result};

/// Built-in graph families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GraphGenerator {
    Path,
    Cycle,
    Star,
    Complete,
    /// Square grid when no shape is given.
    Grid { rows: Option<usize>, cols: Option<usize> },
    Hypercube,
    RandomTree,
    /// Uniform G(n, m) conditioned on being connected.
    Gnm { edges: usize },
    /// Random spanning tree plus roughly `n / 2` extra random edges.
    RandomConnected,
}

/// A generator plus the size it should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub generator: GraphGenerator,
    pub n: usize,
}

impl FromStr for GraphGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((name, arg)) => (name, Some(arg)),
            None => (s, None),
        };
        let bad = |msg: String| Error::config("gen", msg);
        let gen = match (name, arg) {
            ("path", None) => GraphGenerator::Path,
            ("cycle", None) => GraphGenerator::Cycle,
            ("star", None) => GraphGenerator::Star,
            ("complete", None) => GraphGenerator::Complete,
            ("hypercube", None) => GraphGenerator::Hypercube,
            ("random-tree", None) => GraphGenerator::RandomTree,
            ("random-connected", None) => GraphGenerator::RandomConnected,
            ("grid", None) => GraphGenerator::Grid { rows: None, cols: None },
            ("grid", Some(shape)) => {
                let (r, c) = shape
                    .split_once('x')
                    .ok_or_else(|| bad(format!("grid shape must be RxC, got {shape:?}")))?;
                let dim = |x: &str| {
                    x.parse::<usize>()
                        .map_err(|e| bad(format!("bad grid dimension {x:?}: {e}")))
                };
                GraphGenerator::Grid {
                    rows: Some(dim(r)?),
                    cols: Some(dim(c)?),
                }
            }
            ("gnm", Some(m)) => GraphGenerator::Gnm {
                edges: m
                    .parse()
                    .map_err(|e| bad(format!("bad edge count {m:?}: {e}")))?,
            },
            _ => {
                return Err(bad(format!(
                    "unknown generator {s:?}; expected path, cycle, star, complete, grid[:RxC], \
                     hypercube, random-tree, gnm:M or random-connected"
                )))
            }
        };
        Ok(gen)
    }
}

impl fmt::Display for GraphGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphGenerator::Path => write!(f, "path"),
            GraphGenerator::Cycle => write!(f, "cycle"),
            GraphGenerator::Star => write!(f, "star"),
            GraphGenerator::Complete => write!(f, "complete"),
            GraphGenerator::Grid {
                rows: Some(r),
                cols: Some(c),
            } => write!(f, "grid:{r}x{c}"),
            GraphGenerator::Grid { .. } => write!(f, "grid"),
            GraphGenerator::Hypercube => write!(f, "hypercube"),
            GraphGenerator::RandomTree => write!(f, "random-tree"),
            GraphGenerator::Gnm { edges } => write!(f, "gnm:{edges}"),
            GraphGenerator::RandomConnected => write!(f, "random-connected"),
        }
    }
}

impl GraphGenerator {
    /// Vertex count implied by the generator alone, if any.
    pub fn implied_size(&self) -> Option<usize> {
        match self {
            GraphGenerator::Grid {
                rows: Some(r),
                cols: Some(c),
            } => Some(r * c),
            _ => None,
        }
    }

    /// Builds an `n`-vertex member of the family. Random families draw from
    /// a stream derived from `seed` that no trial uses.
    pub fn build(&self, n: usize, seed: u64) -> Result<Graph> {
        if n == 0 {
            return Err(Error::config("n", "graph needs at least one vertex"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        let g = match *self {
            GraphGenerator::Path => path(n),
            GraphGenerator::Cycle => cycle(n),
            GraphGenerator::Star => star(n),
            GraphGenerator::Complete => complete(n),
            GraphGenerator::Grid { rows, cols } => {
                let (r, c) = match (rows, cols) {
                    (Some(r), Some(c)) => (r, c),
                    _ => {
                        let side = (n as f64).sqrt().round() as usize;
                        if side * side != n {
                            return Err(Error::config(
                                "gen",
                                format!("grid needs a square vertex count or an explicit RxC shape, got n = {n}"),
                            ));
                        }
                        (side, side)
                    }
                };
                if r * c != n {
                    return Err(Error::config("n", format!("grid {r}x{c} has {} vertices, not {n}", r * c)));
                }
                grid(r, c)
            }
            GraphGenerator::Hypercube => {
                if !n.is_power_of_two() {
                    return Err(Error::config("n", format!("hypercube needs a power of two, got {n}")));
                }
                hypercube(n.trailing_zeros())
            }
            GraphGenerator::RandomTree => random_tree(n, &mut rng),
            GraphGenerator::Gnm { edges } => gnm_connected(n, edges, &mut rng)?,
            GraphGenerator::RandomConnected => random_connected(n, &mut rng),
        };
        Ok(g)
    }
}

fn must(n: usize, edges: &[(usize, usize)]) -> Graph {
    Graph::from_edges(n, edges).expect("generator produced an invalid graph")
}

pub fn path(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    must(n, &edges)
}

pub fn cycle(n: usize) -> Graph {
    if n < 3 {
        return path(n);
    }
    let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    must(n, &edges)
}

/// Vertex 0 is the center.
pub fn star(n: usize) -> Graph {
    let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
    must(n, &edges)
}

pub fn complete(n: usize) -> Graph {
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    must(n, &edges)
}

pub fn grid(rows: usize, cols: usize) -> Graph {
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    must(rows * cols, &edges).with_layout(Layout::Grid { rows, cols })
}

pub fn hypercube(dim: u32) -> Graph {
    let n = 1usize << dim;
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (0..dim).map(move |b| (u, u ^ (1 << b))))
        .filter(|&(u, v)| u < v)
        .collect();
    must(n, &edges)
}

/// Random recursive tree under a random labeling.
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Graph {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let edges: Vec<_> = (1..n)
        .map(|i| (labels[rng.random_range(0..i)], labels[i]))
        .collect();
    must(n, &edges)
}

pub fn random_connected<R: Rng>(n: usize, rng: &mut R) -> Graph {
    let mut edges: Vec<_> = random_tree(n, rng).edges().collect();
    if n > 2 {
        for _ in 0..n / 2 {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v {
                edges.push((u, v));
            }
        }
    }
    must(n, &edges)
}

/// Rejection sampling of G(n, m) until the sample is connected.
pub fn gnm_connected<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    const ATTEMPTS: usize = 10_000;
    let max_edges = n * (n - 1) / 2;
    if m > max_edges || m + 1 < n {
        return Err(Error::config(
            "gen",
            format!("G(n, m) with n = {n} needs {} <= m <= {max_edges}, got {m}", n - 1),
        ));
    }
    let all: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    for _ in 0..ATTEMPTS {
        let edges: Vec<_> = all.choose_multiple(rng, m).copied().collect();
        if let Ok(g) = Graph::from_edges(n, &edges) {
            return Ok(g);
        }
    }
    Err(Error::config(
        "gen",
        format!("no connected G({n}, {m}) in {ATTEMPTS} samples; use more edges or random-connected"),
    ))
}
