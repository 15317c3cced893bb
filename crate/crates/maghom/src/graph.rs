//! Simple undirected graphs, hop distances and induced-subgraph counts.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

/// Distance value for pairs in different components.
pub const UNREACHABLE: u32 = u32::MAX;

/// Largest pattern accepted by [`count_full_subgraphs`].
pub const MAX_PATTERN_VERTICES: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("cycle graph needs at least 3 vertices, got {0}")]
    CycleTooShort(usize),
    #[error("pattern graph has {0} vertices, at most {MAX_PATTERN_VERTICES} supported")]
    PatternTooLarge(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Immutable simple graph on vertices `0..n`.
///
/// Adjacency is kept as packed bit rows so that edge queries are a single
/// word lookup; sorted neighbor lists are kept alongside for enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, normalizing every pair to `(min, max)` and dropping duplicates.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { v: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        norm.dedup();

        let words = n.div_ceil(64).max(1);
        let mut rows = vec![0u64; n * words];
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &norm {
            rows[u * words + v / 64] |= 1 << (v % 64);
            rows[v * words + u / 64] |= 1 << (u % 64);
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            words,
            rows,
            edges: norm,
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as sorted `(min, max)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u * self.words + v / 64] >> (v % 64) & 1 == 1
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Full subgraph on `vertices`, relabeled to `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut edges = Vec::new();
        for (i, &u) in vertices.iter().enumerate() {
            for (j, &v) in vertices.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    edges.push((i, j));
                }
            }
        }
        Graph::new(vertices.len(), &edges).expect("induced subgraph is simple")
    }

    /// Image of the graph under `v -> perm[v]`; `perm` must be a permutation of `0..n`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        let edges: Vec<_> = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Graph::new(self.n, &edges).expect("relabeling preserves simplicity")
    }

    /// Text form: `n m` header followed by one `u v` line per edge.
    pub fn to_text(&self) -> String {
        self.to_text_with_header(&[])
    }

    /// Text form preceded by `# `-prefixed comment lines.
    pub fn to_text_with_header(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the text form; `#` starts a comment that runs to end of line.
    pub fn from_text(text: &str) -> Result<Graph, GraphError> {
        let mut header: Option<(usize, usize)> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<usize> = line
                .split_whitespace()
                .map(|tok| tok.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| GraphError::Parse {
                    line: idx + 1,
                    msg: e.to_string(),
                })?;
            if nums.len() != 2 {
                return Err(GraphError::Parse {
                    line: idx + 1,
                    msg: format!("expected two integers, found {}", nums.len()),
                });
            }
            match header {
                None => header = Some((nums[0], nums[1])),
                Some(_) => edges.push((nums[0], nums[1])),
            }
        }
        let (n, m) = header.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing `n m` header".into(),
        })?;
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: 0,
                msg: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, &edges)
    }
}

/// All-pairs hop distances with [`UNREACHABLE`] across components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Raw entry, possibly [`UNREACHABLE`].
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u32 {
        self.d[u * self.n + v]
    }

    #[inline]
    pub fn finite(&self, u: usize, v: usize) -> Option<u32> {
        let x = self.get(u, v);
        (x != UNREACHABLE).then_some(x)
    }
}

/// Breadth-first search from every vertex.
pub fn all_pairs_distances(g: &Graph) -> DistanceMatrix {
    let n = g.n();
    let mut d = vec![UNREACHABLE; n * n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        let row = &mut d[s * n..(s + 1) * n];
        row[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let du = row[u];
            for &w in g.neighbors(u) {
                if row[w] == UNREACHABLE {
                    row[w] = du + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    DistanceMatrix { n, d }
}

pub fn complete_graph(m: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..m {
        for v in u + 1..m {
            edges.push((u, v));
        }
    }
    Graph::new(m, &edges).unwrap()
}

pub fn cycle_graph(m: usize) -> Result<Graph, GraphError> {
    if m < 3 {
        return Err(GraphError::CycleTooShort(m));
    }
    let edges: Vec<_> = (0..m).map(|i| (i, (i + 1) % m)).collect();
    Graph::new(m, &edges)
}

pub fn path_graph(m: usize) -> Graph {
    let edges: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
    Graph::new(m, &edges).unwrap()
}

/// The 4-cycle 0-1-2-3 with the chord {0,2}.
pub fn f4_graph() -> Graph {
    Graph::new(4, &[(0, 1), (0, 3), (0, 2), (1, 2), (2, 3)]).unwrap()
}

/// Number of vertex subsets `W` with `G|W` isomorphic to `H`.
pub fn count_full_subgraphs(g: &Graph, h: &Graph) -> Result<u64, GraphError> {
    let k = h.n();
    if k > MAX_PATTERN_VERTICES {
        return Err(GraphError::PatternTooLarge(k));
    }
    if k > g.n() {
        return Ok(0);
    }
    // every labeled copy of H, as a bitmask over the pairs of positions
    let forms = labeled_forms(h);
    let target_edges = h.edge_count();

    let mut count = 0u64;
    let mut subset = Vec::with_capacity(k);
    for_each_subset(g.n(), k, 0, &mut subset, &mut |w| {
        if induced_mask_matches(g, w, target_edges, &forms) {
            count += 1;
        }
    });
    Ok(count)
}

fn for_each_subset(n: usize, k: usize, from: usize, subset: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if subset.len() == k {
        visit(subset);
        return;
    }
    for v in from..=n - (k - subset.len()) {
        subset.push(v);
        for_each_subset(n, k, v + 1, subset, visit);
        subset.pop();
    }
}

fn pair_bit(i: usize, j: usize) -> u32 {
    let (a, b) = (i.min(j), i.max(j));
    (b * (b - 1) / 2 + a) as u32
}

fn labeled_forms(h: &Graph) -> HashSet<u32> {
    let k = h.n();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut forms = HashSet::new();
    permute(&mut perm, 0, &mut |p| {
        let mut mask = 0u32;
        for &(u, v) in h.edges() {
            mask |= 1 << pair_bit(p[u], p[v]);
        }
        forms.insert(mask);
    });
    forms
}

fn permute(perm: &mut [usize], at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == perm.len() {
        visit(perm);
        return;
    }
    for i in at..perm.len() {
        perm.swap(at, i);
        permute(perm, at + 1, visit);
        perm.swap(at, i);
    }
}

fn induced_mask_matches(g: &Graph, subset: &[usize], target_edges: usize, forms: &HashSet<u32>) -> bool {
    let mut mask = 0u32;
    let mut m = 0;
    for (j, &v) in subset.iter().enumerate() {
        for (i, &u) in subset[..j].iter().enumerate() {
            if g.has_edge(u, v) {
                mask |= 1 << pair_bit(i, j);
                m += 1;
            }
        }
    }
    m == target_edges && forms.contains(&mask)
}
