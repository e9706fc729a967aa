//! Independent reference computations and instance builders for tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use pathdec_core::generator::gen_example_class;
use pathdec_core::rng::rng_for;
use pathdec_core::{CycleSeq, Digraph, Edge, Vertex};
use rand::seq::SliceRandom;
use rand::Rng;

/// Minimum `s`–`t` cut by trying every vertex bipartition.
pub fn brute_min_cut(nodes: usize, s: usize, t: usize, arcs: &[(usize, usize, u64)]) -> u64 {
    let others: Vec<usize> = (0..nodes).filter(|&v| v != s && v != t).collect();
    let mut best = u64::MAX;
    for mask in 0u64..(1 << others.len()) {
        let mut side = vec![false; nodes];
        side[s] = true;
        for (i, &v) in others.iter().enumerate() {
            if mask >> i & 1 == 1 {
                side[v] = true;
            }
        }
        let cut: u64 = arcs.iter().filter(|(a, b, _)| side[*a] && !side[*b]).map(|a| a.2).sum();
        best = best.min(cut);
    }
    best
}

/// Every simple path (as an edge-index set) inside `mask`.
fn all_paths(edges: &[Edge], mask: u32, n: usize) -> Vec<u32> {
    let mut out = Vec::new();
    fn walk(edges: &[Edge], mask: u32, v: Vertex, seen: &mut Vec<bool>, used: u32, out: &mut Vec<u32>) {
        if used != 0 {
            out.push(used);
        }
        for (i, e) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 && used >> i & 1 == 0 && e.tail == v && !seen[e.head] {
                seen[e.head] = true;
                walk(edges, mask, e.head, seen, used | 1 << i, out);
                seen[e.head] = false;
            }
        }
    }
    for v in 0..n {
        let mut seen = vec![false; n];
        seen[v] = true;
        walk(edges, mask, v, &mut seen, 0, &mut out);
    }
    out
}

/// Path number by memoized recursion over edge subsets, for up to ~10 edges.
pub fn naive_path_number(d: &Digraph) -> u64 {
    let edges: Vec<Edge> = d.edges().map(|(_, e)| e).collect();
    assert!(edges.len() <= 16);
    let n = d.vertex_count();
    let paths = all_paths(&edges, (1u32 << edges.len()) - 1, n);
    let mut memo: HashMap<u32, u64> = HashMap::new();
    fn go(mask: u32, paths: &[u32], memo: &mut HashMap<u32, u64>) -> u64 {
        if mask == 0 {
            return 0;
        }
        if let Some(&v) = memo.get(&mask) {
            return v;
        }
        let low = mask & mask.wrapping_neg();
        let best = paths
            .iter()
            .filter(|&&p| p & low != 0 && p & !mask == 0)
            .map(|&p| 1 + go(mask & !p, paths, memo))
            .min()
            .expect("a single edge is a path");
        memo.insert(mask, best);
        best
    }
    go((1u32 << edges.len()) - 1, &paths, &mut memo)
}

/// Union of `k` random cycles on `n` vertices; may repeat edges.
pub fn random_eulerian(n: usize, k: usize, max_len: usize, seed: u64) -> (Digraph, Vec<CycleSeq>) {
    let mut rng = rng_for(seed, 100);
    let mut d = Digraph::new(n);
    let mut cycles = Vec::new();
    let verts: Vec<Vertex> = (0..n).collect();
    for _ in 0..k {
        let len = rng.gen_range(2..=max_len.min(n));
        let vs: Vec<Vertex> = verts.choose_multiple(&mut rng, len).copied().collect();
        let c = CycleSeq::new(vs).unwrap();
        for e in c.edges() {
            d.add_edge(e).unwrap();
        }
        cycles.push(c);
    }
    (d, cycles)
}

/// An example-class digraph on `2h` vertices plus `z` balanced vertices, each
/// fed by `k` edges from the left half and feeding `k` edges into the right
/// half, with extra random cycles through the balanced vertices.
pub fn mixed_instance(h: usize, t: usize, euler_deg: usize, z: usize, k: usize, seed: u64) -> Digraph {
    let base = gen_example_class(2 * h, t, euler_deg, seed).unwrap();
    let n = 2 * h + z;
    let mut d = Digraph::new_simple(n);
    for (_, e) in base.edges() {
        d.add_edge(e).unwrap();
    }
    let mut rng = rng_for(seed, 101);
    let left: Vec<Vertex> = (0..h).collect();
    let right: Vec<Vertex> = (h..2 * h).collect();
    for zv in 2 * h..n {
        for &u in left.choose_multiple(&mut rng, k) {
            d.add_edge((u, zv)).unwrap();
        }
        for &w in right.choose_multiple(&mut rng, k) {
            d.add_edge((zv, w)).unwrap();
        }
    }
    // Short cycles among balanced vertices.
    let zs: Vec<Vertex> = (2 * h..n).collect();
    let mut added = 0;
    let mut tries = 0;
    while added < z * 2 && tries < z * 50 {
        tries += 1;
        let len = rng.gen_range(2..=4.min(zs.len()));
        let vs: Vec<Vertex> = zs.choose_multiple(&mut rng, len).copied().collect();
        let es: Vec<Edge> = (0..len).map(|i| Edge::new(vs[i], vs[(i + 1) % len])).collect();
        let distinct: BTreeSet<Edge> = es.iter().copied().collect();
        if distinct.len() == es.len() && es.iter().all(|&e| !d.has_edge(e)) {
            for e in es {
                d.add_edge(e).unwrap();
            }
            added += 1;
        }
    }
    d
}
