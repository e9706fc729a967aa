//! Integer maximum flow and the cycle-to-vertex assignment networks.
//!
//! The solver is Dinic's algorithm: BFS layering followed by blocking flows
//! along shortest augmenting paths. Capacities are any unsigned primitive
//! integer, so flows stay integral.

use std::collections::{BTreeMap, VecDeque};

use num_traits::{PrimInt, Unsigned};

use crate::digraph::{CycleSeq, Vertex};
use crate::error::GraphError;

/// Capacity scalar.
pub trait Capacity: PrimInt + Unsigned + std::fmt::Debug {}
impl<T: PrimInt + Unsigned + std::fmt::Debug> Capacity for T {}

pub type NodeId = usize;
pub type ArcId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc<C> {
    pub tail: NodeId,
    pub head: NodeId,
    pub capacity: C,
}

/// Directed network with a distinguished source and sink. The source never
/// receives arcs and the sink never emits them.
#[derive(Clone, Debug)]
pub struct Network<C> {
    nodes: usize,
    source: NodeId,
    sink: NodeId,
    arcs: Vec<Arc<C>>,
}

/// Flow value on every arc, indexed by [`ArcId`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flow<C> {
    pub arc_flow: Vec<C>,
    pub value: C,
}

impl<C: Capacity> Network<C> {
    pub fn new(nodes: usize, source: NodeId, sink: NodeId) -> Result<Self, GraphError> {
        if source >= nodes || sink >= nodes || source == sink {
            return Err(GraphError::InvalidArgument(format!(
                "source {source} and sink {sink} must be distinct nodes below {nodes}"
            )));
        }
        Ok(Network {
            nodes,
            source,
            sink,
            arcs: Vec::new(),
        })
    }

    pub fn add_arc(&mut self, tail: NodeId, head: NodeId, capacity: C) -> Result<ArcId, GraphError> {
        if tail >= self.nodes || head >= self.nodes {
            return Err(GraphError::InvalidArgument(format!("arc {tail}->{head} leaves the network")));
        }
        if head == self.source || tail == self.sink || tail == head {
            return Err(GraphError::InvalidArgument(format!(
                "arc {tail}->{head} enters the source, leaves the sink or is a loop"
            )));
        }
        self.arcs.push(Arc { tail, head, capacity });
        Ok(self.arcs.len() - 1)
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn arcs(&self) -> &[Arc<C>] {
        &self.arcs
    }

    /// Capacity of the cut whose source side is `source_side`.
    pub fn cut_capacity(&self, source_side: &[bool]) -> C {
        self.arcs
            .iter()
            .filter(|a| source_side[a.tail] && !source_side[a.head])
            .fold(C::zero(), |acc, a| acc + a.capacity)
    }

    /// Residual adjacency: entries `(arc, forward)` sorted by the node they
    /// lead to, then by arc id, so iteration order is fixed.
    fn residual_adjacency(&self) -> Vec<Vec<(ArcId, bool)>> {
        let mut adj: Vec<Vec<(NodeId, ArcId, bool)>> = vec![Vec::new(); self.nodes];
        for (id, a) in self.arcs.iter().enumerate() {
            adj[a.tail].push((a.head, id, true));
            adj[a.head].push((a.tail, id, false));
        }
        adj.into_iter()
            .map(|mut l| {
                l.sort_unstable();
                l.into_iter().map(|(_, id, fwd)| (id, fwd)).collect()
            })
            .collect()
    }

    fn residual(&self, flow: &[C], id: ArcId, forward: bool) -> C {
        if forward {
            self.arcs[id].capacity - flow[id]
        } else {
            flow[id]
        }
    }

    fn other_end(&self, id: ArcId, forward: bool) -> NodeId {
        if forward {
            self.arcs[id].head
        } else {
            self.arcs[id].tail
        }
    }

    /// Maximum integer flow.
    pub fn max_flow(&self) -> Flow<C> {
        let adj = self.residual_adjacency();
        let mut flow = vec![C::zero(); self.arcs.len()];
        let mut value = C::zero();
        loop {
            let level = self.levels(&adj, &flow);
            if level[self.sink] == usize::MAX {
                break;
            }
            let mut next = vec![0usize; self.nodes];
            loop {
                let pushed = self.augment(&adj, &level, &mut next, &mut flow);
                if pushed.is_zero() {
                    break;
                }
                value = value + pushed;
            }
        }
        Flow { arc_flow: flow, value }
    }

    fn levels(&self, adj: &[Vec<(ArcId, bool)>], flow: &[C]) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.nodes];
        level[self.source] = 0;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for &(id, fwd) in &adj[u] {
                let w = self.other_end(id, fwd);
                if level[w] == usize::MAX && !self.residual(flow, id, fwd).is_zero() {
                    level[w] = level[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        level
    }

    /// Finds one augmenting path in the level graph and pushes its bottleneck.
    fn augment(
        &self,
        adj: &[Vec<(ArcId, bool)>],
        level: &[usize],
        next: &mut [usize],
        flow: &mut [C],
    ) -> C {
        let mut stack: Vec<(ArcId, bool)> = Vec::new();
        let mut u = self.source;
        loop {
            if u == self.sink {
                let bottleneck = stack
                    .iter()
                    .map(|&(id, fwd)| self.residual(flow, id, fwd))
                    .min()
                    .expect("path to sink has arcs");
                for &(id, fwd) in &stack {
                    if fwd {
                        flow[id] = flow[id] + bottleneck;
                    } else {
                        flow[id] = flow[id] - bottleneck;
                    }
                }
                return bottleneck;
            }
            let mut advanced = false;
            while next[u] < adj[u].len() {
                let (id, fwd) = adj[u][next[u]];
                let w = self.other_end(id, fwd);
                if level[w] == level[u] + 1 && !self.residual(flow, id, fwd).is_zero() {
                    stack.push((id, fwd));
                    u = w;
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if !advanced {
                // dead end: retreat and skip the arc that led here
                match stack.pop() {
                    None => return C::zero(),
                    Some((id, fwd)) => {
                        u = if fwd { self.arcs[id].tail } else { self.arcs[id].head };
                        next[u] += 1;
                    }
                }
            }
        }
    }

    /// Nodes reachable from the source in the residual network of `flow`.
    pub fn residual_reachable(&self, flow: &Flow<C>) -> Vec<bool> {
        let adj = self.residual_adjacency();
        let mut seen = vec![false; self.nodes];
        seen[self.source] = true;
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            for &(id, fwd) in &adj[u] {
                let w = self.other_end(id, fwd);
                if !seen[w] && !self.residual(&flow.arc_flow, id, fwd).is_zero() {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Capacity bounds and conservation.
    pub fn is_feasible(&self, flow: &Flow<C>) -> bool {
        if flow.arc_flow.len() != self.arcs.len() {
            return false;
        }
        let mut net_out: Vec<i128> = vec![0; self.nodes];
        for (a, &f) in self.arcs.iter().zip(&flow.arc_flow) {
            if f > a.capacity {
                return false;
            }
            let f = f.to_i128().unwrap_or(i128::MAX);
            net_out[a.tail] += f;
            net_out[a.head] -= f;
        }
        (0..self.nodes)
            .filter(|&v| v != self.source && v != self.sink)
            .all(|v| net_out[v] == 0)
            && Some(net_out[self.source]) == flow.value.to_i128()
    }
}

/// The assignment network on a family of cycles: source to each cycle with
/// capacity `g(C)`, cycle to each of its vertices with capacity 1, vertex to
/// sink with capacity `h(b)`.
#[derive(Clone, Debug)]
pub struct AssignmentNetwork<C> {
    pub network: Network<C>,
    cycle_count: usize,
    vertices: Vec<Vertex>,
    node_of_vertex: BTreeMap<Vertex, NodeId>,
    /// Arcs `C -> b` as `(cycle index, vertex, arc id)`.
    membership: Vec<(usize, Vertex, ArcId)>,
}

pub const SOURCE: NodeId = 0;
pub const SINK: NodeId = 1;

impl<C: Capacity> AssignmentNetwork<C> {
    /// Builds the network. `g` has one entry per cycle; `h` is queried once per
    /// vertex of the union of the cycles.
    pub fn build(cycles: &[CycleSeq], g: &[C], h: impl Fn(Vertex) -> C) -> Result<Self, GraphError> {
        if g.len() != cycles.len() {
            return Err(GraphError::InvalidArgument(format!(
                "{} cycle capacities for {} cycles",
                g.len(),
                cycles.len()
            )));
        }
        let mut vertices: Vec<Vertex> = cycles.iter().flat_map(|c| c.vertices().iter().copied()).collect();
        vertices.sort_unstable();
        vertices.dedup();
        let first_vertex_node = 2 + cycles.len();
        let node_of_vertex: BTreeMap<Vertex, NodeId> = vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, first_vertex_node + i))
            .collect();
        let mut network = Network::new(first_vertex_node + vertices.len(), SOURCE, SINK)?;
        for (i, &cap) in g.iter().enumerate() {
            network.add_arc(SOURCE, 2 + i, cap)?;
        }
        let mut membership = Vec::new();
        for (i, c) in cycles.iter().enumerate() {
            let mut vs = c.vertices().to_vec();
            vs.sort_unstable();
            for v in vs {
                let id = network.add_arc(2 + i, node_of_vertex[&v], C::one())?;
                membership.push((i, v, id));
            }
        }
        for &v in &vertices {
            network.add_arc(node_of_vertex[&v], SINK, h(v))?;
        }
        Ok(AssignmentNetwork {
            network,
            cycle_count: cycles.len(),
            vertices,
            node_of_vertex,
            membership,
        })
    }

    pub fn cycle_node(&self, i: usize) -> NodeId {
        2 + i
    }

    pub fn vertex_node(&self, v: Vertex) -> Option<NodeId> {
        self.node_of_vertex.get(&v).copied()
    }

    pub fn cycle_count(&self) -> usize {
        self.cycle_count
    }

    /// Vertices of the union of the cycles, ascending.
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn max_flow(&self) -> Flow<C> {
        self.network.max_flow()
    }

    /// Vertices whose node is reachable from the source in the residual network.
    pub fn residual_reachable_vertices(&self, flow: &Flow<C>) -> Vec<Vertex> {
        let seen = self.network.residual_reachable(flow);
        self.vertices
            .iter()
            .copied()
            .filter(|v| seen[self.node_of_vertex[v]])
            .collect()
    }

    /// One `(cycle index, vertex)` pair per unit of flow, ordered by cycle then
    /// vertex.
    pub fn unit_assignments(&self, flow: &Flow<C>) -> Vec<(usize, Vertex)> {
        self.membership
            .iter()
            .filter(|&&(_, _, id)| !flow.arc_flow[id].is_zero())
            .map(|&(c, v, _)| (c, v))
            .collect()
    }
}
