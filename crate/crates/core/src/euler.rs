//! Cycle decompositions of Eulerian digraphs and length classes of cycles.

use crate::digraph::{CycleSeq, Digraph, Vertex, VertexPartition};
use crate::error::GraphError;

/// Edge-disjoint cycles covering a digraph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleBundle {
    pub cycles: Vec<CycleSeq>,
    pub source_edge_count: usize,
}

impl CycleBundle {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

/// Splits the edges of an Eulerian digraph into cycles.
///
/// Walks from the lowest vertex with unused out-edges, always taking the
/// unused out-edge with the smallest head, and cuts a cycle off whenever the
/// walk returns to a vertex already on it.
pub fn peel_cycles(d: &Digraph) -> Result<CycleBundle, GraphError> {
    let n = d.vertex_count();
    if let Some(v) = (0..n).find(|&v| d.out_degree(v) != d.in_degree(v)) {
        return Err(GraphError::NotEulerian {
            vertex: v,
            excess: d.out_degree(v) as i64 - d.in_degree(v) as i64,
        });
    }
    let out: Vec<Vec<Vertex>> = (0..n)
        .map(|v| {
            let mut heads: Vec<Vertex> = d.out_neighbors(v).collect();
            heads.sort_unstable();
            heads
        })
        .collect();
    let mut next = vec![0usize; n];
    let mut pos = vec![usize::MAX; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if next[start] == out[start].len() {
            continue;
        }
        let mut stack = vec![start];
        pos[start] = 0;
        while let Some(&u) = stack.last() {
            if next[u] == out[u].len() {
                // only the start vertex can run dry in a balanced digraph
                debug_assert_eq!(stack.len(), 1);
                pos[u] = usize::MAX;
                stack.pop();
                continue;
            }
            let w = out[u][next[u]];
            next[u] += 1;
            if pos[w] == usize::MAX {
                pos[w] = stack.len();
                stack.push(w);
            } else {
                let cut = pos[w];
                let cycle: Vec<Vertex> = stack.drain(cut + 1..).collect();
                for &x in &cycle {
                    pos[x] = usize::MAX;
                }
                let mut seq = Vec::with_capacity(cycle.len() + 1);
                seq.push(w);
                seq.extend(cycle);
                cycles.push(CycleSeq::new(seq).expect("walk segments are cycles"));
            }
        }
    }
    Ok(CycleBundle {
        cycles,
        source_edge_count: d.edge_count(),
    })
}

/// Cycles grouped by how many high-excess vertices they meet.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleClasses {
    pub short: Vec<CycleSeq>,
    pub medium: Vec<CycleSeq>,
    pub long: Vec<CycleSeq>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleClass {
    Short,
    Medium,
    Long,
}

/// Short if at most `kappa` vertices of the cycle lie in `A⁺ ∪ A⁻`, long if
/// at least `n_cycles / kappa` do, medium otherwise. Short wins when the two
/// thresholds overlap.
pub fn cycle_class(c: &CycleSeq, part: &VertexPartition, kappa: usize, n_cycles: f64) -> CycleClass {
    let l = c.dot_count(part);
    if l <= kappa {
        CycleClass::Short
    } else if (l as f64) * (kappa as f64) >= n_cycles {
        CycleClass::Long
    } else {
        CycleClass::Medium
    }
}

pub fn classify_cycles(
    cycles: Vec<CycleSeq>,
    part: &VertexPartition,
    kappa: usize,
    n_cycles: f64,
) -> CycleClasses {
    let mut out = CycleClasses::default();
    for c in cycles {
        match cycle_class(&c, part, kappa, n_cycles) {
            CycleClass::Short => out.short.push(c),
            CycleClass::Medium => out.medium.push(c),
            CycleClass::Long => out.long.push(c),
        }
    }
    out
}

/// Working bound on the number of cycles: the observed count or
/// `c' · n · ln n`, whichever is larger.
pub fn working_cycle_bound(observed: usize, n: usize, c_prime: f64) -> f64 {
    let n = n.max(2) as f64;
    (observed as f64).max(c_prime * n * n.ln())
}
