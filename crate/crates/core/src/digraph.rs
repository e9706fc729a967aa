//! Loopless multidigraphs, excess arithmetic and vertex partitions.
//!
//! Vertices are dense indices `0..n`. Every inserted edge gets an [`EdgeId`]
//! that stays valid after other edges are removed, so parallel edges can be
//! removed individually.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::GraphError;

pub type Vertex = usize;

/// An ordered vertex pair `tail -> head`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub tail: Vertex,
    pub head: Vertex,
}

impl Edge {
    pub const fn new(tail: Vertex, head: Vertex) -> Self {
        Edge { tail, head }
    }

    /// The endpoint that is not `v`, if `v` is an endpoint.
    pub fn other(&self, v: Vertex) -> Option<Vertex> {
        if self.tail == v {
            Some(self.head)
        } else if self.head == v {
            Some(self.tail)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.tail, self.head)
    }
}

impl From<(Vertex, Vertex)> for Edge {
    fn from((tail, head): (Vertex, Vertex)) -> Self {
        Edge { tail, head }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

/// Loopless multidigraph with per-vertex in/out adjacency.
///
/// Removal marks the edge dead and updates degrees and the multiplicity map in
/// O(1) amortized time; adjacency lists skip dead entries lazily.
#[derive(Clone, Debug, Default)]
pub struct Digraph {
    n: usize,
    simple: bool,
    endpoints: Vec<Edge>,
    alive: Vec<bool>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    out_deg: Vec<usize>,
    in_deg: Vec<usize>,
    live: usize,
    instances: HashMap<Edge, Vec<EdgeId>>,
}

impl Digraph {
    /// Empty multidigraph on `n` vertices.
    pub fn new(n: usize) -> Self {
        Digraph {
            n,
            simple: false,
            endpoints: Vec::new(),
            alive: Vec::new(),
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
            out_deg: vec![0; n],
            in_deg: vec![0; n],
            live: 0,
            instances: HashMap::new(),
        }
    }

    /// Empty digraph that rejects parallel edges.
    pub fn new_simple(n: usize) -> Self {
        Digraph {
            simple: true,
            ..Digraph::new(n)
        }
    }

    pub fn from_edges<I, E>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = E>,
        E: Into<Edge>,
    {
        let mut d = Digraph::new(n);
        for e in edges {
            d.add_edge(e)?;
        }
        Ok(d)
    }

    pub fn from_edges_simple<I, E>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = E>,
        E: Into<Edge>,
    {
        let mut d = Digraph::new_simple(n);
        for e in edges {
            d.add_edge(e)?;
        }
        Ok(d)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.live
    }

    pub fn is_simple_mode(&self) -> bool {
        self.simple
    }

    /// True when no ordered pair currently has multiplicity above one.
    pub fn has_parallel_edges(&self) -> bool {
        self.instances.values().any(|ids| ids.len() > 1)
    }

    fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    pub fn add_edge(&mut self, e: impl Into<Edge>) -> Result<EdgeId, GraphError> {
        let e = e.into();
        self.check_vertex(e.tail)?;
        self.check_vertex(e.head)?;
        if e.tail == e.head {
            return Err(GraphError::Loop(e.tail));
        }
        let ids = self.instances.entry(e).or_default();
        if self.simple && !ids.is_empty() {
            return Err(GraphError::ParallelEdge(e));
        }
        let id = EdgeId(self.endpoints.len());
        ids.push(id);
        self.endpoints.push(e);
        self.alive.push(true);
        self.out_adj[e.tail].push(id);
        self.in_adj[e.head].push(id);
        self.out_deg[e.tail] += 1;
        self.in_deg[e.head] += 1;
        self.live += 1;
        Ok(id)
    }

    /// Removes the edge with the given id. Returns false if it was already gone.
    pub fn remove_edge(&mut self, id: EdgeId) -> bool {
        if id.0 >= self.alive.len() || !self.alive[id.0] {
            return false;
        }
        let e = self.endpoints[id.0];
        self.alive[id.0] = false;
        self.out_deg[e.tail] -= 1;
        self.in_deg[e.head] -= 1;
        self.live -= 1;
        if let Some(ids) = self.instances.get_mut(&e) {
            if let Some(pos) = ids.iter().position(|&x| x == id) {
                ids.swap_remove(pos);
            }
            if ids.is_empty() {
                self.instances.remove(&e);
            }
        }
        true
    }

    /// Removes one live instance of `tail -> head`, the earliest inserted one.
    pub fn remove_pair(&mut self, e: impl Into<Edge>) -> Option<EdgeId> {
        let e = e.into();
        let id = *self.instances.get(&e)?.iter().min()?;
        self.remove_edge(id);
        Some(id)
    }

    /// Number of edge ids ever issued (live or removed).
    pub fn endpoints_len(&self) -> usize {
        self.endpoints.len()
    }

    pub fn endpoints(&self, id: EdgeId) -> Edge {
        self.endpoints[id.0]
    }

    pub fn is_alive(&self, id: EdgeId) -> bool {
        self.alive.get(id.0).copied().unwrap_or(false)
    }

    pub fn multiplicity(&self, e: impl Into<Edge>) -> usize {
        self.instances.get(&e.into()).map_or(0, Vec::len)
    }

    pub fn has_edge(&self, e: impl Into<Edge>) -> bool {
        self.multiplicity(e) > 0
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out_deg[v]
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.in_deg[v]
    }

    /// Live edges in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, Edge)> + '_ {
        self.endpoints
            .iter()
            .enumerate()
            .filter(|(i, _)| self.alive[*i])
            .map(|(i, &e)| (EdgeId(i), e))
    }

    pub fn out_edges(&self, v: Vertex) -> impl Iterator<Item = (EdgeId, Edge)> + '_ {
        self.out_adj[v]
            .iter()
            .filter(|id| self.alive[id.0])
            .map(|&id| (id, self.endpoints[id.0]))
    }

    pub fn in_edges(&self, v: Vertex) -> impl Iterator<Item = (EdgeId, Edge)> + '_ {
        self.in_adj[v]
            .iter()
            .filter(|id| self.alive[id.0])
            .map(|&id| (id, self.endpoints[id.0]))
    }

    /// Out-neighbours with multiplicity, in insertion order.
    pub fn out_neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.out_edges(v).map(|(_, e)| e.head)
    }

    pub fn in_neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.in_edges(v).map(|(_, e)| e.tail)
    }

    /// `d⁺(v) − d⁻(v)`.
    pub fn excess(&self, v: Vertex) -> Result<i64, GraphError> {
        self.check_vertex(v)?;
        Ok(self.out_deg[v] as i64 - self.in_deg[v] as i64)
    }

    /// Excess of every vertex, indexed by vertex.
    pub fn excesses(&self) -> Vec<i64> {
        (0..self.n)
            .map(|v| self.out_deg[v] as i64 - self.in_deg[v] as i64)
            .collect()
    }

    /// Half the sum of absolute excesses; equals the sum of positive excesses.
    pub fn total_excess(&self) -> u64 {
        let abs_sum: u64 = self.excesses().iter().map(|x| x.unsigned_abs()).sum();
        abs_sum / 2
    }

    /// Every vertex has equal in- and out-degree. Connectivity is not required.
    pub fn is_eulerian(&self) -> bool {
        (0..self.n).all(|v| self.out_deg[v] == self.in_deg[v])
    }

    /// Number of edges from `a` to `b`, counted with multiplicity.
    ///
    /// The two sets must be disjoint.
    pub fn edges_between(&self, a: &[Vertex], b: &[Vertex]) -> Result<usize, GraphError> {
        let mut side = vec![0u8; self.n];
        for &v in a {
            self.check_vertex(v)?;
            side[v] |= 1;
        }
        for &v in b {
            self.check_vertex(v)?;
            if side[v] & 1 == 1 {
                return Err(GraphError::OverlappingSets(v));
            }
            side[v] |= 2;
        }
        Ok(a
            .iter()
            .filter(|&&v| side[v] == 1)
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .map(|&v| self.out_edges(v).filter(|(_, e)| side[e.head] == 2).count())
            .sum())
    }

    /// Number of edges with both endpoints in `a`.
    pub fn edges_within(&self, a: &[Vertex]) -> Result<usize, GraphError> {
        let mut inside = vec![false; self.n];
        for &v in a {
            self.check_vertex(v)?;
            inside[v] = true;
        }
        Ok((0..self.n)
            .filter(|&v| inside[v])
            .map(|v| self.out_edges(v).filter(|(_, e)| inside[e.head]).count())
            .sum())
    }

    /// Live edges as a multiset.
    pub fn edge_multiset(&self) -> BTreeMap<Edge, usize> {
        let mut m = BTreeMap::new();
        for (_, e) in self.edges() {
            *m.entry(e).or_insert(0) += 1;
        }
        m
    }

    /// Kahn's algorithm over live edges.
    pub fn is_acyclic(&self) -> bool {
        let mut indeg = self.in_deg.clone();
        let mut stack: Vec<Vertex> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = stack.pop() {
            seen += 1;
            for (_, e) in self.out_edges(v) {
                indeg[e.head] -= 1;
                if indeg[e.head] == 0 {
                    stack.push(e.head);
                }
            }
        }
        seen == self.n
    }

    /// Copy containing only live edges, with fresh ids in the same order.
    pub fn compacted(&self) -> Digraph {
        let mut d = Digraph::new(self.n);
        d.simple = self.simple;
        for (_, e) in self.edges() {
            d.add_edge(e).expect("edges of a valid digraph");
        }
        d
    }
}

/// Which part of a vertex partition a vertex lies in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Plus,
    Minus,
    Zero,
}

/// Split of the vertex set into high positive excess, high negative excess
/// and the rest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexPartition {
    sides: Vec<Side>,
}

impl VertexPartition {
    /// Builds a partition from three explicit sets, checking that they are
    /// pairwise disjoint and cover `0..n`.
    pub fn from_sets(
        n: usize,
        a_plus: &[Vertex],
        a_minus: &[Vertex],
        a_zero: &[Vertex],
    ) -> Result<Self, GraphError> {
        let mut sides: Vec<Option<Side>> = vec![None; n];
        for (set, side) in [(a_plus, Side::Plus), (a_minus, Side::Minus), (a_zero, Side::Zero)] {
            for &v in set {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
                if sides[v].is_some() {
                    return Err(GraphError::OverlappingSets(v));
                }
                sides[v] = Some(side);
            }
        }
        let sides = sides
            .into_iter()
            .enumerate()
            .map(|(v, s)| s.ok_or_else(|| GraphError::InvalidPartition(format!("vertex {v} not covered"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VertexPartition { sides })
    }

    pub fn from_sides(sides: Vec<Side>) -> Self {
        VertexPartition { sides }
    }

    /// Everything in the zero part.
    pub fn all_zero(n: usize) -> Self {
        VertexPartition {
            sides: vec![Side::Zero; n],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.sides.len()
    }

    pub fn side(&self, v: Vertex) -> Side {
        self.sides[v]
    }

    pub fn is_plus(&self, v: Vertex) -> bool {
        self.sides[v] == Side::Plus
    }

    pub fn is_minus(&self, v: Vertex) -> bool {
        self.sides[v] == Side::Minus
    }

    pub fn is_zero(&self, v: Vertex) -> bool {
        self.sides[v] == Side::Zero
    }

    /// Member of `A⁺ ∪ A⁻`.
    pub fn is_dot(&self, v: Vertex) -> bool {
        self.sides[v] != Side::Zero
    }

    fn collect(&self, side: Side) -> Vec<Vertex> {
        (0..self.sides.len()).filter(|&v| self.sides[v] == side).collect()
    }

    pub fn a_plus(&self) -> Vec<Vertex> {
        self.collect(Side::Plus)
    }

    pub fn a_minus(&self) -> Vec<Vertex> {
        self.collect(Side::Minus)
    }

    pub fn a_zero(&self) -> Vec<Vertex> {
        self.collect(Side::Zero)
    }

    pub fn a_dot(&self) -> Vec<Vertex> {
        (0..self.sides.len()).filter(|&v| self.is_dot(v)).collect()
    }

    /// An edge is an `(A⁺, A⁻)` one-edge path.
    pub fn is_plus_minus(&self, e: Edge) -> bool {
        self.is_plus(e.tail) && self.is_minus(e.head)
    }
}

/// `A⁺ = {ex ≥ t}`, `A⁻ = {ex ≤ −t}`, `A⁰` the rest.
pub fn partition_by_excess(d: &Digraph, threshold: u64) -> Result<VertexPartition, GraphError> {
    if threshold == 0 {
        return Err(GraphError::InvalidArgument("threshold must be at least 1".into()));
    }
    let t = threshold as i64;
    let sides = d
        .excesses()
        .into_iter()
        .map(|x| {
            if x >= t {
                Side::Plus
            } else if x <= -t {
                Side::Minus
            } else {
                Side::Zero
            }
        })
        .collect();
    Ok(VertexPartition { sides })
}

/// A directed path given by its vertex sequence. A single vertex is a
/// degenerate path with no edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathSeq(Vec<Vertex>);

impl PathSeq {
    pub fn new(vertices: Vec<Vertex>) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::InvalidPath("empty vertex sequence".into()));
        }
        if let Some(v) = first_repeat(&vertices) {
            return Err(GraphError::InvalidPath(format!("vertex {v} repeats")));
        }
        Ok(PathSeq(vertices))
    }

    pub fn single_edge(e: Edge) -> Self {
        PathSeq(vec![e.tail, e.head])
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn into_vertices(self) -> Vec<Vertex> {
        self.0
    }

    pub fn start(&self) -> Vertex {
        self.0[0]
    }

    pub fn end(&self) -> Vertex {
        *self.0.last().expect("non-empty")
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 1
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.0.windows(2).map(|w| Edge::new(w[0], w[1]))
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.contains(&v)
    }
}

impl fmt::Display for PathSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_seq(f, &self.0)
    }
}

/// A directed cycle `v₀ v₁ … v_{k−1} v₀`. Stored without the repeated closing
/// vertex; [`CycleSeq::closed`] gives the sequence with it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycleSeq(Vec<Vertex>);

impl CycleSeq {
    /// Accepts either an open (`v₀ … v_{k−1}`) or closed (`v₀ … v₀`) sequence.
    pub fn new(mut vertices: Vec<Vertex>) -> Result<Self, GraphError> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 2 {
            return Err(GraphError::InvalidCycle("a cycle needs at least two edges".into()));
        }
        if let Some(v) = first_repeat(&vertices) {
            return Err(GraphError::InvalidCycle(format!("vertex {v} repeats")));
        }
        Ok(CycleSeq(vertices))
    }

    /// Open vertex order, starting at the stored first vertex.
    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn closed(&self) -> Vec<Vertex> {
        let mut v = self.0.clone();
        v.push(self.0[0]);
        v
    }

    /// Number of edges (equals number of vertices).
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let k = self.0.len();
        (0..k).map(move |i| Edge::new(self.0[i], self.0[(i + 1) % k]))
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.contains(&v)
    }

    pub fn position(&self, v: Vertex) -> Option<usize> {
        self.0.iter().position(|&x| x == v)
    }

    /// The vertex after position `i` in cyclic order.
    pub fn succ_index(&self, i: usize) -> usize {
        (i + 1) % self.0.len()
    }

    /// The subpath `from C to` following the cycle's orientation. When
    /// `from == to` this is the single vertex.
    pub fn segment(&self, from: Vertex, to: Vertex) -> Option<PathSeq> {
        let i = self.position(from)?;
        let j = self.position(to)?;
        Some(PathSeq(self.segment_by_index(i, j)))
    }

    pub(crate) fn segment_by_index(&self, i: usize, j: usize) -> Vec<Vertex> {
        let k = self.0.len();
        let steps = (j + k - i) % k;
        (0..=steps).map(|s| self.0[(i + s) % k]).collect()
    }

    /// Number of vertices in `A⁺ ∪ A⁻`.
    pub fn dot_count(&self, part: &VertexPartition) -> usize {
        self.0.iter().filter(|&&v| part.is_dot(v)).count()
    }
}

impl fmt::Display for CycleSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_seq(f, &self.closed())
    }
}

fn write_seq(f: &mut fmt::Formatter<'_>, seq: &[Vertex]) -> fmt::Result {
    for (i, v) in seq.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

fn first_repeat(vertices: &[Vertex]) -> Option<Vertex> {
    let mut seen = std::collections::HashSet::with_capacity(vertices.len());
    vertices.iter().copied().find(|&v| !seen.insert(v))
}

/// Multiset of edges used for conservation checks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeBag(BTreeMap<Edge, usize>);

impl EdgeBag {
    pub fn new() -> Self {
        EdgeBag(BTreeMap::new())
    }

    pub fn insert(&mut self, e: Edge) {
        *self.0.entry(e).or_insert(0) += 1;
    }

    pub fn extend<I: IntoIterator<Item = Edge>>(&mut self, edges: I) {
        for e in edges {
            self.insert(e);
        }
    }

    /// Removes one copy; false if absent.
    pub fn remove(&mut self, e: Edge) -> bool {
        match self.0.get_mut(&e) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.0.remove(&e);
                true
            }
            None => false,
        }
    }

    pub fn count(&self, e: Edge) -> usize {
        self.0.get(&e).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, usize)> + '_ {
        self.0.iter().map(|(&e, &c)| (e, c))
    }

    pub fn from_digraph(d: &Digraph) -> Self {
        EdgeBag(d.edge_multiset())
    }
}

impl FromIterator<Edge> for EdgeBag {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        let mut b = EdgeBag::new();
        b.extend(iter);
        b
    }
}
