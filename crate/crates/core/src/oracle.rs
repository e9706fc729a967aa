//! Exact path number of tiny digraphs by exhaustive search.
//!
//! `feasible(S, k)` asks whether the edge set `S` splits into at most `k`
//! paths. The lowest edge of `S` must lie on some path, so the search tries
//! every path through that edge and recurses on the rest. Budgets proven
//! insufficient are memoized per edge set, and a budget below
//! `Σ_components max(ex, 1)` is rejected immediately.

use std::collections::HashMap;

use thiserror::Error;

use crate::digraph::{Digraph, Edge, Vertex};

pub const DEFAULT_EDGE_CAP: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("digraph has {edges} edges, above the exhaustive-search cap of {cap}")]
    CapExceeded { edges: usize, cap: usize },
}

struct Search {
    n: usize,
    edges: Vec<Edge>,
    /// Edge ids leaving / entering each vertex.
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    failed: HashMap<u64, u64>,
}

impl Search {
    fn new(d: &Digraph) -> Self {
        let n = d.vertex_count();
        let edges: Vec<Edge> = d.edges().map(|(_, e)| e).collect();
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out[e.tail].push(i);
            inc[e.head].push(i);
        }
        Search {
            n,
            edges,
            out,
            inc,
            failed: HashMap::new(),
        }
    }

    /// `Σ max(ex(K), 1)` over the weakly connected pieces `K` of `mask`.
    fn lower_bound(&self, mask: u64) -> u64 {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut ex = vec![0i64; self.n];
        let mut touched = vec![false; self.n];
        for i in bits(mask) {
            let e = self.edges[i];
            ex[e.tail] += 1;
            ex[e.head] -= 1;
            touched[e.tail] = true;
            touched[e.head] = true;
            let (a, b) = (find(&mut parent, e.tail), find(&mut parent, e.head));
            parent[a] = b;
        }
        let mut comp_pos = vec![0u64; self.n];
        let mut is_root = vec![false; self.n];
        for v in 0..self.n {
            if touched[v] {
                let r = find(&mut parent, v);
                is_root[r] = true;
                if ex[v] > 0 {
                    comp_pos[r] += ex[v] as u64;
                }
            }
        }
        (0..self.n).filter(|&r| is_root[r]).map(|r| comp_pos[r].max(1)).sum()
    }

    fn feasible(&mut self, mask: u64, budget: u64) -> bool {
        if mask == 0 {
            return true;
        }
        if budget == 0 || self.lower_bound(mask) > budget {
            return false;
        }
        if self.failed.get(&mask).is_some_and(|&b| b >= budget) {
            return false;
        }
        let first = mask.trailing_zeros() as usize;
        let mut paths = Vec::new();
        self.paths_through(mask, first, &mut paths);
        // long paths first tends to find a witness sooner
        paths.sort_by_key(|p: &u64| std::cmp::Reverse(p.count_ones()));
        for p in paths {
            if self.feasible(mask & !p, budget - 1) {
                return true;
            }
        }
        let entry = self.failed.entry(mask).or_insert(0);
        *entry = (*entry).max(budget);
        false
    }

    /// Every vertex-simple path inside `mask` that uses edge `e`, as edge masks.
    fn paths_through(&self, mask: u64, e: usize, acc: &mut Vec<u64>) {
        let Edge { tail, head } = self.edges[e];
        let mut on = vec![false; self.n];
        on[tail] = true;
        on[head] = true;
        let mut backs = Vec::new();
        self.extend(mask & !(1 << e), tail, false, &mut on, 0, &mut |m, vs| backs.push((m, vs.to_vec())));
        on.fill(false);
        for (bm, bverts) in backs {
            for &v in &bverts {
                on[v] = true;
            }
            on[tail] = true;
            on[head] = true;
            self.extend(mask & !(1 << e) & !bm, head, true, &mut on, 0, &mut |fm, _| {
                acc.push(bm | fm | (1 << e))
            });
            on.fill(false);
        }
    }

    /// Enumerates simple extensions from `v` (forward along out-edges or
    /// backward along in-edges), including the empty extension. The callback
    /// receives the extension's edge mask and the vertices it added.
    fn extend(&self, mask: u64, v: Vertex, forward: bool, on: &mut Vec<bool>, used: u64, f: &mut dyn FnMut(u64, &[Vertex])) {
        let mut added = Vec::new();
        self.extend_rec(mask, v, forward, on, used, &mut added, f);
    }

    #[allow(clippy::too_many_arguments)]
    fn extend_rec(
        &self,
        mask: u64,
        v: Vertex,
        forward: bool,
        on: &mut Vec<bool>,
        used: u64,
        added: &mut Vec<Vertex>,
        f: &mut dyn FnMut(u64, &[Vertex]),
    ) {
        f(used, added);
        let list = if forward { &self.out[v] } else { &self.inc[v] };
        for &i in list {
            if mask & (1 << i) == 0 {
                continue;
            }
            let w = if forward { self.edges[i].head } else { self.edges[i].tail };
            if on[w] {
                continue;
            }
            on[w] = true;
            added.push(w);
            self.extend_rec(mask, w, forward, on, used | (1 << i), added, f);
            added.pop();
            on[w] = false;
        }
    }
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// Minimum number of paths partitioning the edges, for at most `cap` edges
/// (and never more than 64).
pub fn brute_force_pn_capped(d: &Digraph, cap: usize) -> Result<u64, OracleError> {
    let m = d.edge_count();
    let cap = cap.min(64);
    if m > cap {
        return Err(OracleError::CapExceeded { edges: m, cap });
    }
    if m == 0 {
        return Ok(0);
    }
    let mut s = Search::new(d);
    let all = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let mut k = s.lower_bound(all);
    while !s.feasible(all, k) {
        k += 1;
    }
    Ok(k)
}

pub fn brute_force_pn(d: &Digraph) -> Result<u64, OracleError> {
    brute_force_pn_capped(d, DEFAULT_EDGE_CAP)
}

/// Whether `pn(D) = ex(D)`. Edgeless, nonempty Eulerian and acyclic inputs
/// are answered directly, whatever their size.
pub fn is_consistent_capped(d: &Digraph, cap: usize) -> Result<bool, OracleError> {
    if d.edge_count() == 0 {
        return Ok(true);
    }
    if d.is_eulerian() {
        return Ok(false);
    }
    if d.is_acyclic() {
        return Ok(true);
    }
    Ok(brute_force_pn_capped(d, cap)? == d.total_excess())
}

pub fn is_consistent(d: &Digraph) -> Result<bool, OracleError> {
    is_consistent_capped(d, DEFAULT_EDGE_CAP)
}
