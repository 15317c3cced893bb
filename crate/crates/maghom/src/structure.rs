//! Combinatorics of diagonal eulerian trails: fans, the closed form for
//! `EMH_{2,2}`, clique bounds, local collections and their structure graphs,
//! class graphs, cycle decomposition and restricted Y-class certificates.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::graph::{count_full_subgraphs, complete_graph, cycle_graph, f4_graph, DistanceMatrix, Graph, GraphError};
use crate::linalg::{matrix_rank_exact, SparseMatrix};
use crate::trail::{enumerate_trails, Theory};

pub type Pair = (usize, usize);

fn pair(a: usize, b: usize) -> Pair {
    (a.min(b), a.max(b))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("solid and dashed edge sets share {0:?}")]
    NotDisjoint(Pair),
    #[error("edge {0:?} has an endpoint outside the vertex set")]
    EdgeOutsideVertexSet(Pair),
    #[error("labeling does not match the class graph: {0}")]
    LabelMismatch(String),
    #[error("pair {0:?} is an edge")]
    PairIsEdge(Pair),
    #[error("contraction parts overlap at vertex {0}")]
    OverlappingParts(usize),
    #[error("vertex {0} is not in the class graph")]
    UnknownVertex(usize),
    #[error("malformed recipe: {0}")]
    MalformedRecipe(String),
    #[error("chain is not a cycle")]
    NotACycle,
    #[error("coefficient index {0} is outside the collection")]
    OutsideCollection(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

// ---------------------------------------------------------------- class graphs

/// Vertex set with mandatory (solid) and optional (dashed) edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassGraph {
    vertices: Vec<usize>,
    solid: BTreeSet<Pair>,
    dashed: BTreeSet<Pair>,
}

impl ClassGraph {
    pub fn new(
        vertices: impl IntoIterator<Item = usize>,
        solid: impl IntoIterator<Item = Pair>,
        dashed: impl IntoIterator<Item = Pair>,
    ) -> Result<Self, StructureError> {
        let vertices: BTreeSet<usize> = vertices.into_iter().collect();
        let solid: BTreeSet<Pair> = solid.into_iter().map(|(a, b)| pair(a, b)).collect();
        let dashed: BTreeSet<Pair> = dashed.into_iter().map(|(a, b)| pair(a, b)).collect();
        for &e in solid.iter().chain(&dashed) {
            if e.0 == e.1 || !vertices.contains(&e.0) || !vertices.contains(&e.1) {
                return Err(StructureError::EdgeOutsideVertexSet(e));
            }
        }
        if let Some(&e) = solid.intersection(&dashed).next() {
            return Err(StructureError::NotDisjoint(e));
        }
        Ok(ClassGraph {
            vertices: vertices.into_iter().collect(),
            solid,
            dashed,
        })
    }

    /// Sorted vertex labels.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn solid(&self) -> &BTreeSet<Pair> {
        &self.solid
    }

    pub fn dashed(&self) -> &BTreeSet<Pair> {
        &self.dashed
    }

    fn positions(&self) -> HashMap<usize, usize> {
        self.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect()
    }

    fn as_graph<'a>(&self, edges: impl Iterator<Item = &'a Pair>) -> Graph {
        let pos = self.positions();
        let e: Vec<_> = edges.map(|&(a, b)| (pos[&a], pos[&b])).collect();
        Graph::new(self.vertices.len(), &e).expect("class graph edges are simple")
    }

    /// Minimal member `(V, E_S)`, vertices renumbered in sorted label order.
    pub fn alpha(&self) -> Graph {
        self.as_graph(self.solid.iter())
    }

    /// Maximal member `(V, E_S ∪ E_B)`, vertices renumbered in sorted label order.
    pub fn omega(&self) -> Graph {
        self.as_graph(self.solid.iter().chain(&self.dashed))
    }

    /// Every pair of vertices is solid or dashed.
    pub fn is_complete(&self) -> bool {
        let n = self.vertices.len();
        self.solid.len() + self.dashed.len() == n * n.saturating_sub(1) / 2
    }

    pub fn restrict(&self, keep: &[usize]) -> Result<ClassGraph, StructureError> {
        let set: BTreeSet<usize> = keep.iter().copied().collect();
        if let Some(&v) = set.iter().find(|v| self.vertices.binary_search(v).is_err()) {
            return Err(StructureError::UnknownVertex(v));
        }
        let inside = |e: &&Pair| set.contains(&e.0) && set.contains(&e.1);
        ClassGraph::new(
            set.iter().copied(),
            self.solid.iter().filter(inside).copied(),
            self.dashed.iter().filter(inside).copied(),
        )
    }
}

/// Whether `g`, restricted to the image of `labeling`, lies in the class:
/// `labeling[i]` is the vertex of `g` playing the role of `h.vertices()[i]`.
pub fn graph_in_class(g: &Graph, h: &ClassGraph, labeling: &[usize]) -> Result<bool, StructureError> {
    if labeling.len() != h.vertices.len() {
        return Err(StructureError::LabelMismatch(format!(
            "{} labels for {} vertices",
            labeling.len(),
            h.vertices.len()
        )));
    }
    let distinct: BTreeSet<_> = labeling.iter().collect();
    if distinct.len() != labeling.len() || labeling.iter().any(|&v| v >= g.n()) {
        return Err(StructureError::LabelMismatch("labels must be distinct vertices of the graph".into()));
    }
    for i in 0..labeling.len() {
        for j in i + 1..labeling.len() {
            let e = pair(h.vertices[i], h.vertices[j]);
            let present = g.has_edge(labeling[i], labeling[j]);
            if h.solid.contains(&e) && !present {
                return Ok(false);
            }
            if present && !h.solid.contains(&e) && !h.dashed.contains(&e) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Contracts each part to a single vertex, named by the smallest label in the part.
/// A merged edge is solid if any of its preimages is solid, otherwise dashed if
/// any preimage is dashed; edges inside a part disappear.
pub fn contract_class_graph(h: &ClassGraph, parts: &[Vec<usize>]) -> Result<ClassGraph, StructureError> {
    let mut rep: HashMap<usize, usize> = h.vertices.iter().map(|&v| (v, v)).collect();
    let mut used = BTreeSet::new();
    for part in parts {
        let Some(&min) = part.iter().min() else { continue };
        for &v in part {
            if !rep.contains_key(&v) {
                return Err(StructureError::UnknownVertex(v));
            }
            if !used.insert(v) {
                return Err(StructureError::OverlappingParts(v));
            }
            rep.insert(v, min);
        }
    }
    let vertices: BTreeSet<usize> = rep.values().copied().collect();
    let mut solid = BTreeSet::new();
    let mut dashed = BTreeSet::new();
    for &(a, b) in &h.solid {
        let (ra, rb) = (rep[&a], rep[&b]);
        if ra != rb {
            solid.insert(pair(ra, rb));
        }
    }
    for &(a, b) in &h.dashed {
        let (ra, rb) = (rep[&a], rep[&b]);
        if ra != rb && !solid.contains(&pair(ra, rb)) {
            dashed.insert(pair(ra, rb));
        }
    }
    ClassGraph::new(vertices, solid, dashed)
}

// ---------------------------------------------------------------- fans and EMH_{2,2}

/// Common neighbors of a non-adjacent pair and the full subgraph on the pair plus
/// those vertices (pair first, then the fan vertices in increasing order).
pub fn fan_subgraph(g: &Graph, d: &DistanceMatrix, a: usize, b: usize) -> Result<(Vec<usize>, Graph), StructureError> {
    if g.has_edge(a, b) {
        return Err(StructureError::PairIsEdge(pair(a, b)));
    }
    let fan: Vec<usize> = (0..g.n())
        .filter(|&v| v != a && v != b && d.get(a, v) == 1 && d.get(v, b) == 1)
        .collect();
    let mut order = vec![a, b];
    order.extend(&fan);
    Ok((fan, g.induced(&order)))
}

/// Closed form for the rank of `EMH_{2,2}`.
pub fn emh22_rank(g: &Graph, d: &DistanceMatrix) -> usize {
    let triangles = count_full_subgraphs(g, &complete_graph(3)).expect("pattern fits") as usize;
    let mut fans = 0;
    for a in 0..g.n() {
        for b in a + 1..g.n() {
            if g.has_edge(a, b) {
                continue;
            }
            let size = (0..g.n()).filter(|&v| d.get(a, v) == 1 && d.get(v, b) == 1).count();
            if size >= 1 {
                fans += 2 * (size - 1);
            }
        }
    }
    6 * triangles + fans
}

/// `6 c(G,C3) + 4 c(G,C4) + 2 c(G,F4)`.
pub fn emh22_upper_bound(g: &Graph) -> u64 {
    let c3 = count_full_subgraphs(g, &complete_graph(3)).unwrap();
    let c4 = count_full_subgraphs(g, &cycle_graph(4).unwrap()).unwrap();
    let f4 = count_full_subgraphs(g, &f4_graph()).unwrap();
    6 * c3 + 4 * c4 + 2 * f4
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueBound {
    /// Diagonal eulerian trails with vanishing differential.
    pub zero_differential: usize,
    pub bound: u64,
    pub cliques: u64,
}

impl CliqueBound {
    pub fn holds(&self) -> bool {
        self.cliques <= self.bound
    }
}

/// Bounds the number of `(k+1)`-cliques by trails whose every face vanishes.
pub fn clique_lower_bound(g: &Graph, d: &DistanceMatrix, k: usize) -> Result<CliqueBound, StructureError> {
    let trails = enumerate_trails(g, d, k, k as u32, Theory::Emc);
    let zero = trails
        .generators()
        .iter()
        .filter(|t| (1..k).all(|i| g.has_edge(t.landmarks[i - 1], t.landmarks[i + 1])))
        .count();
    let fact: u64 = (1..=k as u64 + 1).product();
    let cliques = count_full_subgraphs(g, &complete_graph(k + 1))?;
    Ok(CliqueBound {
        zero_differential: zero,
        bound: zero as u64 / fact,
        cliques,
    })
}

// ---------------------------------------------------------------- local collections

/// Diagonal eulerian k-trails with common endpoints, connected by single-landmark changes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalCollection {
    pub k: usize,
    /// Landmark tuples in lexicographic order.
    pub trails: Vec<Vec<usize>>,
}

impl LocalCollection {
    pub fn new(k: usize, mut trails: Vec<Vec<usize>>) -> Self {
        trails.sort();
        trails.dedup();
        LocalCollection { k, trails }
    }

    pub fn len(&self) -> usize {
        self.trails.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trails.is_empty()
    }

    pub fn endpoints(&self) -> (usize, usize) {
        let t = &self.trails[0];
        (t[0], t[self.k])
    }

    pub fn position(&self, landmarks: &[usize]) -> Option<usize> {
        self.trails.binary_search_by(|t| t.as_slice().cmp(landmarks)).ok()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Groups trails that agree everywhere except at interior position `r`.
fn wildcard_key(t: &[usize], r: usize) -> (usize, Vec<usize>) {
    let mut key = t.to_vec();
    key.remove(r);
    (r, key)
}

fn components_by<F>(trails: &[Vec<usize>], k: usize, linked: F) -> Vec<Vec<usize>>
where
    F: Fn(&[usize], usize) -> bool,
{
    let mut uf = UnionFind::new(trails.len());
    let mut first: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    for (i, t) in trails.iter().enumerate() {
        for r in 1..k {
            if !linked(t, r) {
                continue;
            }
            match first.entry(wildcard_key(t, r)) {
                std::collections::hash_map::Entry::Occupied(e) => uf.union(*e.get(), i),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(i);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..trails.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Partitions `ET_{k,k}` into local collections, singletons included.
pub fn local_collections(g: &Graph, d: &DistanceMatrix, k: usize) -> Vec<LocalCollection> {
    let trails: Vec<Vec<usize>> = enumerate_trails(g, d, k, k as u32, Theory::Emc)
        .generators()
        .iter()
        .map(|t| t.landmarks.clone())
        .collect();
    // the wildcard key keeps both endpoints, so components never mix endpoints
    let mut out: Vec<LocalCollection> = components_by(&trails, k, |_, _| true)
        .into_iter()
        .map(|idx| LocalCollection::new(k, idx.into_iter().map(|i| trails[i].clone()).collect()))
        .collect();
    out.sort_by(|a, b| a.trails[0].cmp(&b.trails[0]));
    out
}

// ---------------------------------------------------------------- structure graphs

/// Trails joined when they differ in exactly one interior landmark.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureGraph {
    n: usize,
    /// `(i, j, r)` with `i < j` differing at position `r`.
    edges: Vec<(usize, usize, usize)>,
    adj: Vec<Vec<usize>>,
}

fn single_difference(a: &[usize], b: &[usize]) -> Option<usize> {
    let mut diff = None;
    for r in 0..a.len() {
        if a[r] != b[r] {
            if diff.is_some() {
                return None;
            }
            diff = Some(r);
        }
    }
    diff.filter(|&r| r > 0 && r + 1 < a.len())
}

impl StructureGraph {
    fn build(trails: &[Vec<usize>], keep: impl Fn(&[usize], usize) -> bool) -> Self {
        let n = trails.len();
        let mut edges = Vec::new();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                if let Some(r) = single_difference(&trails[i], &trails[j]) {
                    if keep(&trails[i], r) {
                        edges.push((i, j, r));
                        adj[i].push(j);
                        adj[j].push(i);
                    }
                }
            }
        }
        StructureGraph { n, edges, adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Maximal cliques by Bron–Kerbosch with pivoting, each sorted, listed in order.
    pub fn maximal_cliques(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let all: BTreeSet<usize> = (0..self.n).collect();
        self.bron_kerbosch(&mut Vec::new(), all, BTreeSet::new(), &mut out);
        for c in &mut out {
            c.sort_unstable();
        }
        out.sort();
        out
    }

    fn bron_kerbosch(&self, r: &mut Vec<usize>, mut p: BTreeSet<usize>, mut x: BTreeSet<usize>, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() && x.is_empty() {
            out.push(r.clone());
            return;
        }
        let pivot = p
            .iter()
            .chain(&x)
            .copied()
            .max_by_key(|&u| self.adj[u].iter().filter(|v| p.contains(v)).count())
            .unwrap();
        let candidates: Vec<usize> = p.iter().copied().filter(|&v| !self.adjacent(pivot, v)).collect();
        for v in candidates {
            let nbrs: BTreeSet<usize> = self.adj[v].iter().copied().collect();
            r.push(v);
            self.bron_kerbosch(
                r,
                p.intersection(&nbrs).copied().collect(),
                x.intersection(&nbrs).copied().collect(),
                out,
            );
            r.pop();
            p.remove(&v);
            x.insert(v);
        }
    }

    fn component_count(&self) -> usize {
        let mut uf = UnionFind::new(self.n);
        for &(a, b, _) in &self.edges {
            uf.union(a, b);
        }
        (0..self.n).filter(|&v| uf.find(v) == v).count()
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.n);
        for &(a, b, _) in &self.edges {
            uf.union(a, b);
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..self.n {
            groups.entry(uf.find(v)).or_default().push(v);
        }
        groups.into_values().collect()
    }

    /// Whether contracting every maximal clique leaves a forest, i.e. the
    /// vertex–clique incidence graph has no cycle. Also returns the cliques.
    pub fn is_clique_forest(&self) -> (bool, Vec<Vec<usize>>) {
        let cliques = self.maximal_cliques();
        let incidences: usize = cliques.iter().map(Vec::len).sum();
        let forest = incidences + self.component_count() == self.n + cliques.len();
        (forest, cliques)
    }

    /// Connected, 2-regular, with at least four vertices, an even number of them.
    pub fn is_even_circuit(&self) -> bool {
        self.n >= 4
            && self.n.is_multiple_of(2)
            && self.adj.iter().all(|a| a.len() == 2)
            && self.component_count() == 1
    }

    /// All chordless cycles of length at least four found by anchoring at each vertex:
    /// for every non-adjacent neighbor pair of the anchor, the shortest connecting
    /// path avoiding the anchor's closed neighborhood. Sorted by length, then anchor.
    pub fn chordless_cycles(&self) -> Vec<Vec<usize>> {
        let mut found = Vec::new();
        for s in 0..self.n {
            let nb = &self.adj[s];
            for (ai, &u) in nb.iter().enumerate() {
                for &w in &nb[ai + 1..] {
                    if self.adjacent(u, w) {
                        continue;
                    }
                    let blocked = |v: usize| v == s || (v != u && v != w && self.adjacent(s, v));
                    if let Some(path) = self.shortest_path(u, w, blocked) {
                        let mut cycle = vec![s];
                        cycle.extend(path);
                        found.push(cycle);
                    }
                }
            }
        }
        found.sort_by_key(|c| c.len());
        found
    }

    fn shortest_path(&self, from: usize, to: usize, blocked: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.n];
        prev[from] = from;
        let mut q = VecDeque::from([from]);
        while let Some(u) = q.pop_front() {
            if u == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &v in &self.adj[u] {
                if prev[v] == usize::MAX && !blocked(v) {
                    prev[v] = u;
                    q.push_back(v);
                }
            }
        }
        None
    }
}

/// Structure graph of a collection.
pub fn structure_graph(x: &LocalCollection) -> StructureGraph {
    StructureGraph::build(&x.trails, |_, _| true)
}

/// Structure graph restricted to differences at positions whose face survives in `g`,
/// i.e. whose skip pair `{x_{r-1}, x_{r+1}}` is not an edge.
pub fn active_structure_graph(x: &LocalCollection, g: &Graph) -> StructureGraph {
    StructureGraph::build(&x.trails, |t, r| !g.has_edge(t[r - 1], t[r + 1]))
}

// ---------------------------------------------------------------- minimal class graph

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalClassGraph {
    pub w: Vec<usize>,
    pub e_supp: BTreeSet<Pair>,
    pub e_diff: BTreeSet<Pair>,
    pub e_rem: BTreeSet<Pair>,
    pub compatible: bool,
    /// Solid edges `E_supp ∪ (E_diff \ E_rem)`; dashed edges are the remaining
    /// pairs of `W` outside `E_rem`.
    pub class: ClassGraph,
}

pub fn minimal_class_graph(x: &LocalCollection) -> MinimalClassGraph {
    let k = x.k;
    let mut w = BTreeSet::new();
    let mut e_supp = BTreeSet::new();
    let mut e_diff = BTreeSet::new();
    for t in &x.trails {
        w.extend(t.iter().copied());
        for a in 0..k {
            e_supp.insert(pair(t[a], t[a + 1]));
        }
        for a in 0..k.saturating_sub(1) {
            e_diff.insert(pair(t[a], t[a + 2]));
        }
    }
    let s = structure_graph(x);
    let position_of: HashMap<Pair, usize> = s.edges.iter().map(|&(i, j, r)| ((i, j), r)).collect();
    let mut e_rem = BTreeSet::new();
    for clique in s.maximal_cliques() {
        if clique.len() < 2 {
            continue;
        }
        let b = position_of[&(clique[0], clique[1])];
        let t = &x.trails[clique[0]];
        e_rem.insert(pair(t[b - 1], t[b + 1]));
    }
    let compatible = e_supp.is_disjoint(&e_rem);
    let solid: BTreeSet<Pair> = e_supp.iter().chain(e_diff.difference(&e_rem)).copied().collect();
    let wv: Vec<usize> = w.iter().copied().collect();
    let mut dashed = BTreeSet::new();
    for (i, &a) in wv.iter().enumerate() {
        for &b in &wv[i + 1..] {
            let e = pair(a, b);
            if !e_rem.contains(&e) && !solid.contains(&e) {
                dashed.insert(e);
            }
        }
    }
    let class = ClassGraph::new(wv.iter().copied(), solid, dashed).expect("solid and dashed are disjoint by construction");
    MinimalClassGraph {
        w: wv,
        e_supp,
        e_diff,
        e_rem,
        compatible,
        class,
    }
}

// ---------------------------------------------------------------- cycle decomposition

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComponentKind {
    /// Alternating coefficients on a chordless circuit of the given even length.
    EvenCircuit(usize),
    /// Support whose structure graph is a clique-forest.
    CliqueTree,
    /// Support still containing chordless circuits, none of which can be split off
    /// as a cycle on its own.
    Irreducible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleComponent {
    pub kind: ComponentKind,
    /// `(index into the collection, coefficient)`, sorted by index.
    pub terms: Vec<(usize, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub components: Vec<CycleComponent>,
    /// The support of the input was connected through shared nonzero faces.
    pub connected_support: bool,
}

/// Nonzero faces of diagonal eulerian trails, keyed by position and face tuple.
struct FaceIndex<'a> {
    g: &'a Graph,
    x: &'a LocalCollection,
}

impl FaceIndex<'_> {
    fn live_positions(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let t = &self.x.trails[i];
        (1..self.x.k).filter(move |&r| !self.g.has_edge(t[r - 1], t[r + 1]))
    }

    fn boundary(&self, terms: &BTreeMap<usize, i64>) -> BTreeMap<(usize, Vec<usize>), i64> {
        let mut acc: BTreeMap<(usize, Vec<usize>), i64> = BTreeMap::new();
        for (&i, &a) in terms {
            for r in self.live_positions(i) {
                *acc.entry(wildcard_key(&self.x.trails[i], r)).or_default() += a;
            }
        }
        acc.retain(|_, v| *v != 0);
        acc
    }

    fn is_cycle(&self, terms: &BTreeMap<usize, i64>) -> bool {
        self.boundary(terms).is_empty()
    }

    fn sub_collection(&self, support: &[usize]) -> LocalCollection {
        LocalCollection {
            k: self.x.k,
            trails: support.iter().map(|&i| self.x.trails[i].clone()).collect(),
        }
    }
}

/// Splits a diagonal cycle over `x` into even-circuit and clique-tree cycles.
///
/// Circuits are extracted shortest first with the anchor's coefficient; a circuit
/// qualifies only when each of its trails has exactly two nonzero faces, so that the
/// alternating chain on it is itself a cycle. What remains after no circuit
/// qualifies is split into connected pieces.
pub fn decompose_cycle(g: &Graph, x: &LocalCollection, gamma: &[(usize, i64)]) -> Result<Decomposition, StructureError> {
    let mut terms: BTreeMap<usize, i64> = BTreeMap::new();
    for &(i, a) in gamma {
        if i >= x.len() {
            return Err(StructureError::OutsideCollection(i));
        }
        *terms.entry(i).or_default() += a;
    }
    terms.retain(|_, a| *a != 0);
    let faces = FaceIndex { g, x };
    if !faces.is_cycle(&terms) {
        return Err(StructureError::NotACycle);
    }
    let support: Vec<usize> = terms.keys().copied().collect();
    let connected_support = active_structure_graph(&faces.sub_collection(&support), g).component_count() <= 1;
    let mut components = Vec::new();
    split(&faces, terms, &mut components);
    Ok(Decomposition {
        components,
        connected_support,
    })
}

fn split(faces: &FaceIndex<'_>, terms: BTreeMap<usize, i64>, out: &mut Vec<CycleComponent>) {
    let support: Vec<usize> = terms.keys().copied().collect();
    let s = active_structure_graph(&faces.sub_collection(&support), faces.g);
    for comp in s.components() {
        let members: Vec<usize> = comp.iter().map(|&v| support[v]).collect();
        let part: BTreeMap<usize, i64> = members.iter().map(|&i| (i, terms[&i])).collect();
        let local = active_structure_graph(&faces.sub_collection(&members), faces.g);
        let cycles = local.chordless_cycles();
        if cycles.is_empty() {
            out.push(CycleComponent {
                kind: ComponentKind::CliqueTree,
                terms: part.into_iter().collect(),
            });
            continue;
        }
        let chosen = cycles.iter().find(|c| {
            c.len() % 2 == 0 && c.iter().all(|&v| faces.live_positions(members[v]).count() == 2)
        });
        let Some(cycle) = chosen else {
            out.push(CycleComponent {
                kind: ComponentKind::Irreducible,
                terms: part.into_iter().collect(),
            });
            continue;
        };
        let anchor = part[&members[cycle[0]]];
        let mut circuit = BTreeMap::new();
        for (j, &v) in cycle.iter().enumerate() {
            circuit.insert(members[v], if j % 2 == 0 { anchor } else { -anchor });
        }
        debug_assert!(faces.is_cycle(&circuit));
        let mut rest = part;
        for (&i, &a) in &circuit {
            *rest.get_mut(&i).unwrap() -= a;
        }
        rest.retain(|_, a| *a != 0);
        out.push(CycleComponent {
            kind: ComponentKind::EvenCircuit(cycle.len()),
            terms: circuit.into_iter().collect(),
        });
        if !rest.is_empty() {
            split(faces, rest, out);
        }
    }
}

/// Re-indexes a chain given by landmark tuples onto `x`; `None` if any term lies outside.
pub fn collection_terms(x: &LocalCollection, chain: &[(&[usize], i64)]) -> Option<Vec<(usize, i64)>> {
    let mut out: Vec<(usize, i64)> = chain.iter().map(|&(t, a)| x.position(t).map(|i| (i, a))).collect::<Option<_>>()?;
    out.sort_unstable();
    Some(out)
}

/// Per-clique coefficient sums over the active structure graph of a component's support;
/// a clique-tree cycle has every sum equal to zero.
pub fn clique_sums(g: &Graph, x: &LocalCollection, terms: &[(usize, i64)]) -> Vec<i64> {
    let support: Vec<usize> = terms.iter().map(|t| t.0).collect();
    let sub = LocalCollection {
        k: x.k,
        trails: support.iter().map(|&i| x.trails[i].clone()).collect(),
    };
    let s = active_structure_graph(&sub, g);
    s.maximal_cliques()
        .into_iter()
        .filter(|c| c.len() >= 2)
        .map(|c| c.iter().map(|&v| terms[v].1).sum())
        .collect()
}

/// Whether the chain is a cycle of the eulerian diagonal differential.
pub fn is_cycle(g: &Graph, x: &LocalCollection, terms: &[(usize, i64)]) -> bool {
    let faces = FaceIndex { g, x };
    faces.is_cycle(&terms.iter().copied().collect())
}

// ---------------------------------------------------------------- analysis records

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureType {
    Singleton,
    CliqueTree,
    EvenCircuit,
    Mixed,
}

impl StructureType {
    pub fn name(self) -> &'static str {
        match self {
            StructureType::Singleton => "singleton",
            StructureType::CliqueTree => "clique_tree",
            StructureType::EvenCircuit => "even_circuit",
            StructureType::Mixed => "mixed",
        }
    }
}

pub fn classify(s: &StructureGraph) -> StructureType {
    if s.vertex_count() == 1 {
        StructureType::Singleton
    } else if s.is_even_circuit() {
        StructureType::EvenCircuit
    } else if s.is_clique_forest().0 {
        StructureType::CliqueTree
    } else {
        StructureType::Mixed
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollectionRecord {
    pub start: usize,
    pub end: usize,
    pub k: usize,
    pub size: usize,
    pub structure: StructureType,
    pub kernel_dim: usize,
}

/// Dimension of the space of diagonal cycles supported on `x`.
pub fn collection_kernel_dim(g: &Graph, x: &LocalCollection) -> usize {
    let faces = FaceIndex { g, x };
    let mut rows: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    let mut cols = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let mut col = Vec::new();
        for r in faces.live_positions(i) {
            let key = wildcard_key(&x.trails[i], r);
            let next = rows.len();
            let row = *rows.entry(key).or_insert(next);
            col.push((row, if r % 2 == 0 { 1 } else { -1 }));
        }
        cols.push(col);
    }
    let m = SparseMatrix::new(rows.len(), cols);
    x.len() - matrix_rank_exact(&m)
}

/// One record per local collection of `ET_{k,k}`.
pub fn analyze(g: &Graph, d: &DistanceMatrix, k: usize) -> Vec<CollectionRecord> {
    local_collections(g, d, k)
        .into_iter()
        .map(|x| {
            let (start, end) = x.endpoints();
            CollectionRecord {
                start,
                end,
                k,
                size: x.len(),
                structure: classify(&structure_graph(&x)),
                kernel_dim: collection_kernel_dim(g, &x),
            }
        })
        .collect()
}

// ---------------------------------------------------------------- restricted Y-class

/// Four-vertex base classes, as solid pairs over positions 0..4; every other pair is dashed.
/// Positions: 0 top left, 1 bottom left, 2 top right, 3 bottom right.
pub const FOUR_VERTEX_BASES: [(&str, &[Pair]); 9] = [
    ("G1", &[(0, 1), (0, 3), (1, 3)]),
    ("G2", &[(0, 3), (1, 3)]),
    ("G3", &[(1, 3)]),
    ("G4", &[]),
    ("G5", &[(0, 2), (1, 3)]),
    ("G6", &[(0, 3), (1, 2), (1, 3)]),
    ("G7", &[(0, 1), (1, 2), (1, 3)]),
    ("G8", &[(0, 1), (0, 2), (1, 2), (2, 3)]),
    ("G10", &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]),
];

/// Certificate for membership in the restricted Y-class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum YRecipe {
    /// Base case on three vertices, or four vertices listed in template position order.
    Base(Vec<usize>),
    /// Contract each part (verified recursively) inside the class graph on `vertices`.
    Contract { vertices: Vec<usize>, parts: Vec<YRecipe> },
}

impl YRecipe {
    fn vertex_set(&self) -> BTreeSet<usize> {
        match self {
            YRecipe::Base(v) => v.iter().copied().collect(),
            YRecipe::Contract { vertices, .. } => vertices.iter().copied().collect(),
        }
    }
}

fn matches_four_vertex_base(h: &ClassGraph, order: &[usize]) -> bool {
    if !h.is_complete() {
        return false;
    }
    FOUR_VERTEX_BASES.iter().any(|(_, solid)| {
        (0..4).all(|i| {
            (i + 1..4).all(|j| {
                let want = solid.contains(&(i, j));
                h.solid.contains(&pair(order[i], order[j])) == want
            })
        })
    })
}

fn is_tree(g: &Graph) -> bool {
    if g.n() == 0 {
        return true;
    }
    if g.edge_count() + 1 != g.n() {
        return false;
    }
    let mut seen = vec![false; g.n()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in g.neighbors(u) {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Checks a nested-partition certificate against the rules of the restricted Y-class.
pub fn verify_restricted_y_class(h: &ClassGraph, recipe: &YRecipe) -> Result<bool, StructureError> {
    let top = recipe.vertex_set();
    if top != h.vertices.iter().copied().collect() {
        return Err(StructureError::MalformedRecipe("recipe must cover exactly the class graph's vertices".into()));
    }
    verify_node(h, recipe)
}

fn verify_node(h: &ClassGraph, recipe: &YRecipe) -> Result<bool, StructureError> {
    match recipe {
        YRecipe::Base(order) => {
            let set: BTreeSet<usize> = order.iter().copied().collect();
            if set.len() != order.len() {
                return Err(StructureError::MalformedRecipe("repeated vertex in base case".into()));
            }
            let sub = h.restrict(order)?;
            match order.len() {
                3 => Ok(true),
                4 => Ok(matches_four_vertex_base(&sub, order)),
                n => Err(StructureError::MalformedRecipe(format!("base case on {n} vertices"))),
            }
        }
        YRecipe::Contract { vertices, parts } => {
            if parts.is_empty() {
                return Err(StructureError::MalformedRecipe("contraction without parts".into()));
            }
            let outer: BTreeSet<usize> = vertices.iter().copied().collect();
            let sub = h.restrict(vertices)?;
            let mut part_sets = Vec::new();
            let mut used = BTreeSet::new();
            for p in parts {
                let set = p.vertex_set();
                if !set.is_subset(&outer) {
                    return Err(StructureError::MalformedRecipe("part leaves its parent".into()));
                }
                if let Some(&v) = set.iter().find(|v| used.contains(*v)) {
                    return Err(StructureError::OverlappingParts(v));
                }
                used.extend(set.iter().copied());
                if !verify_node(&sub, p)? {
                    return Ok(false);
                }
                part_sets.push(set.into_iter().collect::<Vec<_>>());
            }
            let phi = contract_class_graph(&sub, &part_sets)?;
            Ok(is_tree(&phi.alpha()) && phi.is_complete())
        }
    }
}
