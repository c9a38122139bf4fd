//! Simple undirected graphs, lattice and random generators, and independent
//! sets.
//!
//! Edge-list text format: the first non-blank line holds the vertex count
//! `N`; every further non-blank line holds one edge `i j` (0-indexed,
//! whitespace-separated). Anything else is rejected.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::BufRead;

use rand::Rng;

use crate::ensembles::rng_from_seed;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates (in either
    /// orientation) and out-of-range endpoints.
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::InvalidGraph("graph needs at least one vertex".into()));
        }
        let mut set = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); num_vertices];
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if a >= num_vertices || b >= num_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {num_vertices} vertices"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        adjacency.iter_mut().for_each(|v| v.sort_unstable());
        Ok(Self { num_vertices, edges: set, adjacency })
    }

    pub fn edgeless(num_vertices: usize) -> Result<Self> {
        Self::new(num_vertices, [])
    }

    pub fn complete(num_vertices: usize) -> Result<Self> {
        Self::new(
            num_vertices,
            (0..num_vertices).flat_map(|i| (i + 1..num_vertices).map(move |j| (i, j))),
        )
    }

    pub fn path(num_vertices: usize) -> Result<Self> {
        Self::new(num_vertices, (1..num_vertices).map(|i| (i - 1, i)))
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_vertices).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.num_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &self.adjacency[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut num_vertices = None;
        let mut edges = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("expected a non-negative integer, got {s:?}"),
                })
            };
            match (num_vertices, fields.as_slice()) {
                (None, [n]) => num_vertices = Some(parse(n)?),
                (None, _) => {
                    return Err(Error::Parse { line: lineno, msg: "expected vertex count".into() })
                }
                (Some(_), [a, b]) => edges.push((parse(a)?, parse(b)?)),
                (Some(_), _) => {
                    return Err(Error::Parse { line: lineno, msg: "expected \"i j\"".into() })
                }
            }
        }
        let n = num_vertices.ok_or(Error::Parse { line: 0, msg: "empty edge list".into() })?;
        Self::new(n, edges)
    }

    pub fn from_edge_list_str(text: &str) -> Result<Self> {
        Self::read_edge_list(text.as_bytes())
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut s = format!("{}\n", self.num_vertices);
        for (a, b) in self.edges() {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }
}

/// Strictly upper-triangular 0/1 adjacency matrix, row-major.
pub fn adjacency_upper(g: &Graph) -> Vec<Vec<u8>> {
    let n = g.num_vertices();
    let mut a = vec![vec![0u8; n]; n];
    for (i, j) in g.edges() {
        a[i][j] = 1;
    }
    a
}

/// Uniformly random graph: each possible edge present with probability 1/2,
/// drawn in lexicographic pair order.
pub fn gen_random_graph(n: usize, seed: u64) -> Result<Graph> {
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.5) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    /// `dims = [n]`, n ≥ 3; degree 2.
    Cycle,
    /// `dims = [rows, cols]`, both ≥ 3; degree 4.
    SquareTorus,
    /// `dims = [rows, cols]`, both ≥ 3; degree 6.
    TriangularTorus,
    /// Brick-wall honeycomb on a torus, `dims = [rows, cols]` with rows even
    /// and ≥ 2, cols even and ≥ 4; degree 3.
    Hexagonal,
}

impl LatticeKind {
    pub fn degree(self) -> usize {
        match self {
            Self::Cycle => 2,
            Self::SquareTorus => 4,
            Self::TriangularTorus => 6,
            Self::Hexagonal => 3,
        }
    }
}

pub fn gen_lattice(kind: LatticeKind, dims: &[usize]) -> Result<Graph> {
    let bad = |msg: String| Err(Error::IncompatibleLattice(msg));
    match (kind, dims) {
        (LatticeKind::Cycle, &[n]) => {
            if n < 3 {
                return bad(format!("cycle needs at least 3 vertices, got {n}"));
            }
            Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
        }
        (LatticeKind::SquareTorus | LatticeKind::TriangularTorus, &[rows, cols]) => {
            if rows < 3 || cols < 3 {
                return bad(format!("torus sides must be at least 3, got {rows}x{cols}"));
            }
            let id = |r: usize, c: usize| (r % rows) * cols + (c % cols);
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    edges.push((id(r, c), id(r, c + 1)));
                    edges.push((id(r, c), id(r + 1, c)));
                    if kind == LatticeKind::TriangularTorus {
                        edges.push((id(r, c), id(r + 1, c + 1)));
                    }
                }
            }
            Graph::new(rows * cols, edges)
        }
        (LatticeKind::Hexagonal, &[rows, cols]) => {
            if rows < 2 || rows % 2 != 0 || cols < 4 || cols % 2 != 0 {
                return bad(format!(
                    "hexagonal torus needs even rows >= 2 and even cols >= 4, got {rows}x{cols}"
                ));
            }
            let id = |r: usize, c: usize| (r % rows) * cols + (c % cols);
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    edges.push((id(r, c), id(r, c + 1)));
                    // one vertical bond per vertex, alternating up/down
                    if (r + c) % 2 == 0 {
                        edges.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            Graph::new(rows * cols, edges)
        }
        (kind, dims) => bad(format!("{kind:?} does not accept dims {dims:?}")),
    }
}

/// A vertex set with no internal edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependentSet {
    vertices: Vec<usize>,
}

impl IndependentSet {
    /// Checks every pair for adjacency.
    pub fn new(g: &Graph, vertices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = vertices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if let Some(&x) = v.iter().find(|&&x| x >= g.num_vertices()) {
            return Err(Error::InvalidGraph(format!("vertex {x} out of range")));
        }
        for (k, &a) in v.iter().enumerate() {
            for &b in &v[k + 1..] {
                if g.has_edge(a, b) {
                    return Err(Error::InvalidGraph(format!("vertices {a} and {b} are adjacent")));
                }
            }
        }
        Ok(Self { vertices: v })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// `Σ_v 1/(deg(v)+1)`.
pub fn caro_wei_bound(g: &Graph) -> f64 {
    (0..g.num_vertices()).map(|v| 1.0 / (g.degree(v) + 1) as f64).sum()
}

/// Repeatedly takes a minimum-residual-degree vertex (lowest index on ties)
/// and deletes its closed neighborhood.
pub fn greedy_independent_set(g: &Graph) -> IndependentSet {
    let n = g.num_vertices();
    let mut alive = vec![true; n];
    let mut residual: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut chosen = Vec::new();
    while let Some(v) = (0..n).filter(|&v| alive[v]).min_by_key(|&v| (residual[v], v)) {
        chosen.push(v);
        let mut removed = vec![v];
        removed.extend(g.neighbors(v).iter().copied().filter(|&u| alive[u]));
        for &u in &removed {
            alive[u] = false;
        }
        for &u in &removed {
            for &w in g.neighbors(u) {
                if alive[w] {
                    residual[w] -= 1;
                }
            }
        }
    }
    IndependentSet::new(g, chosen).expect("greedy selection is independent")
}

pub const BRUTEFORCE_MAX_VERTICES: usize = 20;

/// Exact maximum independent set by branch and bound over bitmasks.
pub fn max_independent_set_bruteforce(g: &Graph) -> Result<IndependentSet> {
    let n = g.num_vertices();
    if n > BRUTEFORCE_MAX_VERTICES {
        return Err(Error::TooLarge(format!(
            "brute-force independent set limited to {BRUTEFORCE_MAX_VERTICES} vertices, got {n}"
        )));
    }
    let closed: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(1u32 << v, |m, &u| m | (1 << u)))
        .collect();

    fn search(cand: u32, cur: u32, best: &mut u32, closed: &[u32]) {
        if cand == 0 {
            if cur.count_ones() > best.count_ones() {
                *best = cur;
            }
            return;
        }
        if cur.count_ones() + cand.count_ones() <= best.count_ones() {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        search(cand & !closed[v], cur | (1 << v), best, closed);
        search(cand & !(1 << v), cur, best, closed);
    }

    let mut best = 0u32;
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    search(all, 0, &mut best, &closed);
    IndependentSet::new(g, (0..n).filter(|v| best >> v & 1 == 1))
}
