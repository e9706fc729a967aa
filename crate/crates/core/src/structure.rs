//! Absorbing structures: reserved one- and two-edge paths from `A⁺` to `A⁻`,
//! assigned to individual vertices.
//!
//! For `z` in `A⁺` (resp. `A⁻`) the assignment `f(z)` holds `t` edges from
//! `z` into `A⁻` (resp. from `A⁺` into `z`). For `z` in `A⁰` it holds `t`
//! edges from `A⁺` into `z` and `t` edges from `z` into `A⁻`, read as `t`
//! paths of length two. The sets `f(z)` are pairwise disjoint.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rand::Rng as _;
use thiserror::Error;

use crate::digraph::{Digraph, Edge, EdgeBag, EdgeId, PathSeq, Side, Vertex, VertexPartition};
use crate::rng::{derive_seed, rng_for, streams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error(
        "vertex {vertex} obtained {found} of {needed} reserved {direction}-edges from {candidates} candidates after {attempts} attempts"
    )]
    Starved {
        vertex: Vertex,
        direction: &'static str,
        needed: usize,
        found: usize,
        candidates: usize,
        attempts: usize,
    },
    #[error("vertex {vertex} holds {found} reserved edges, expected {expected}")]
    WrongMultiplicity { vertex: Vertex, expected: usize, found: usize },
    #[error("structures overlap: {0}")]
    Overlap(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AbsorbingStructure {
    t: usize,
    f: BTreeMap<Vertex, Vec<Edge>>,
}

impl AbsorbingStructure {
    pub fn empty(t: usize) -> Self {
        AbsorbingStructure { t, f: BTreeMap::new() }
    }

    /// Builds from an explicit assignment. Lists are stored sorted.
    pub fn from_assignment(t: usize, f: BTreeMap<Vertex, Vec<Edge>>) -> Self {
        let f = f
            .into_iter()
            .map(|(z, mut es)| {
                es.sort_unstable();
                (z, es)
            })
            .collect();
        AbsorbingStructure { t, f }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn domain(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.f.keys().copied()
    }

    pub fn contains(&self, z: Vertex) -> bool {
        self.f.contains_key(&z)
    }

    /// `f(z)`, sorted; empty outside the domain.
    pub fn f(&self, z: Vertex) -> &[Edge] {
        self.f.get(&z).map_or(&[], Vec::as_slice)
    }

    pub fn assignment(&self) -> &BTreeMap<Vertex, Vec<Edge>> {
        &self.f
    }

    pub fn is_empty(&self) -> bool {
        self.f.values().all(Vec::is_empty)
    }

    pub fn edge_count(&self) -> usize {
        self.f.values().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.f.values().flatten().copied()
    }

    pub fn edge_bag(&self) -> EdgeBag {
        self.edges().collect()
    }

    /// Number of structure edges at each vertex.
    pub fn incidence(&self, n: usize) -> Vec<usize> {
        let mut inc = vec![0; n];
        for e in self.edges() {
            inc[e.tail] += 1;
            inc[e.head] += 1;
        }
        inc
    }

    /// The reserved paths at `z`: single edges for `z` in `A⁺ ∪ A⁻`,
    /// in-edges paired with out-edges in sorted order for `z` in `A⁰`.
    pub fn paths_at(&self, z: Vertex, part: &VertexPartition) -> Vec<PathSeq> {
        paths_from_edges(z, self.f(z), part)
    }

    pub fn all_paths(&self, part: &VertexPartition) -> Vec<PathSeq> {
        self.f.keys().flat_map(|&z| self.paths_at(z, part)).collect()
    }

    /// Splits each `f(v)` into its first `7κ−1`, next `2κ+1` and last `3κ`
    /// edges. Every list must have exactly `12κ` single edges.
    pub fn split(&self, kappa: usize) -> Result<[AbsorbingStructure; 3], StructureError> {
        let sizes = [7 * kappa - 1, 2 * kappa + 1, 3 * kappa];
        let total = 12 * kappa;
        let mut parts = sizes.map(AbsorbingStructure::empty);
        for (&z, es) in &self.f {
            if es.len() != total {
                return Err(StructureError::WrongMultiplicity {
                    vertex: z,
                    expected: total,
                    found: es.len(),
                });
            }
            let mut rest = es.as_slice();
            for (part, &s) in parts.iter_mut().zip(&sizes) {
                let (head, tail) = rest.split_at(s);
                part.f.insert(z, head.to_vec());
                rest = tail;
            }
        }
        Ok(parts)
    }

    /// Union of two structures with disjoint domains and edge sets.
    pub fn merge(&self, other: &AbsorbingStructure) -> Result<AbsorbingStructure, StructureError> {
        if !self.is_empty() && !other.is_empty() && self.t != other.t {
            return Err(StructureError::Overlap(format!(
                "multiplicities differ: {} and {}",
                self.t, other.t
            )));
        }
        if let Some(z) = other.f.keys().find(|z| self.f.contains_key(z)) {
            return Err(StructureError::Overlap(format!("vertex {z} in both domains")));
        }
        let mine = self.edge_bag();
        if let Some(e) = other.edges().find(|&e| mine.count(e) > 0) {
            return Err(StructureError::Overlap(format!("edge {e} in both")));
        }
        let t = if self.is_empty() { other.t } else { self.t };
        let mut f = self.f.clone();
        f.extend(other.f.iter().map(|(&z, es)| (z, es.clone())));
        Ok(AbsorbingStructure { t, f })
    }

    /// Debug dump, one line `v: a->b c->d` per domain vertex.
    pub fn to_debug_lines(&self) -> String {
        let mut out = String::new();
        for (z, es) in &self.f {
            write!(out, "{z}:").unwrap();
            for e in es {
                write!(out, " {e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Reserved paths represented by `edges ⊆ f(z)`.
pub fn paths_from_edges(z: Vertex, edges: &[Edge], part: &VertexPartition) -> Vec<PathSeq> {
    if part.is_dot(z) {
        return edges.iter().map(|&e| PathSeq::single_edge(e)).collect();
    }
    let mut ins: Vec<Edge> = edges.iter().copied().filter(|e| e.head == z).collect();
    let mut outs: Vec<Edge> = edges.iter().copied().filter(|e| e.tail == z).collect();
    ins.sort_unstable();
    outs.sort_unstable();
    ins.iter()
        .zip(&outs)
        .map(|(a, b)| PathSeq::new(vec![a.tail, z, b.head]).expect("A+ and A- are disjoint"))
        .collect()
}

/// Which defining rule a violation breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// `z ∈ A⁺`: exactly `t` edges from `z` into `A⁻`.
    PlusOut,
    /// `z ∈ A⁻`: exactly `t` edges from `A⁺` into `z`.
    MinusIn,
    /// `z ∈ A⁰`: exactly `t` edges in from `A⁺` and `t` out to `A⁻`.
    ZeroThrough,
    /// The sets `f(z)` are disjoint and lie in the digraph.
    Partition,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::PlusOut => "plus-out",
            Rule::MinusIn => "minus-in",
            Rule::ZeroThrough => "zero-through",
            Rule::Partition => "partition",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub vertex: Option<Vertex>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StructureReport {
    pub violations: Vec<Violation>,
}

impl StructureReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "structure valid");
        }
        for v in &self.violations {
            match v.vertex {
                Some(z) => writeln!(f, "{} z={}: {}", v.rule, z, v.detail)?,
                None => writeln!(f, "{}: {}", v.rule, v.detail)?,
            }
        }
        Ok(())
    }
}

/// Checks all defining rules and that every structure edge is an edge of `d`
/// (with multiplicity).
pub fn validate_structure(s: &AbsorbingStructure, d: &Digraph, part: &VertexPartition) -> StructureReport {
    let mut violations = Vec::new();
    let t = s.t();
    for (&z, es) in s.assignment() {
        if z >= d.vertex_count() {
            violations.push(Violation {
                rule: Rule::Partition,
                vertex: Some(z),
                detail: "vertex outside the digraph".into(),
            });
            continue;
        }
        let side = part.side(z);
        let rule = match side {
            Side::Plus => Rule::PlusOut,
            Side::Minus => Rule::MinusIn,
            Side::Zero => Rule::ZeroThrough,
        };
        let good = |e: &Edge| match side {
            Side::Plus => e.tail == z && part.is_minus(e.head),
            Side::Minus => e.head == z && part.is_plus(e.tail),
            Side::Zero => (e.head == z && part.is_plus(e.tail)) || (e.tail == z && part.is_minus(e.head)),
        };
        if let Some(e) = es.iter().find(|e| !good(e)) {
            violations.push(Violation {
                rule,
                vertex: Some(z),
                detail: format!("edge {e} has the wrong orientation or endpoints"),
            });
            continue;
        }
        let ok = match side {
            Side::Zero => {
                let ins = es.iter().filter(|e| e.head == z).count();
                let outs = es.len() - ins;
                if ins != t || outs != t {
                    violations.push(Violation {
                        rule,
                        vertex: Some(z),
                        detail: format!("{ins} in-edges and {outs} out-edges, expected {t} each"),
                    });
                }
                true
            }
            _ => es.len() == t,
        };
        if !ok {
            violations.push(Violation {
                rule,
                vertex: Some(z),
                detail: format!("{} edges, expected {t}", es.len()),
            });
        }
    }
    let mut bag = EdgeBag::new();
    for e in s.edges() {
        bag.insert(e);
        if bag.count(e) > d.multiplicity(e) {
            let detail = if d.has_edge(e) {
                format!("edge {e} assigned more often than it occurs")
            } else {
                format!("edge {e} is not in the digraph")
            };
            violations.push(Violation {
                rule: Rule::Partition,
                vertex: None,
                detail,
            });
        }
    }
    StructureReport { violations }
}

/// How to build a structure.
#[derive(Clone, Debug, PartialEq)]
pub struct BuildSpec {
    /// Multiplicity `t`.
    pub t: usize,
    /// Maximum number of structure edges allowed at each vertex of
    /// `A⁺ ∪ A⁻`, indexed by vertex.
    pub caps: Vec<usize>,
    /// Probability of keeping each candidate edge in the initial sample.
    pub sample_rate: f64,
    /// Whole-build retries with fresh seeds before giving up.
    pub attempts: usize,
}

impl BuildSpec {
    /// The high-excess structure: `t = 12κ`, at most `150κ` edges per vertex,
    /// sampling rate `120κ / np`.
    pub fn dot(n: usize, kappa: usize, np: f64) -> Self {
        BuildSpec {
            t: 12 * kappa,
            caps: vec![150 * kappa; n],
            sample_rate: rate(120.0 * kappa as f64, np),
            attempts: 20,
        }
    }

    /// The low-excess structure: `t = 3κ`, at most `5κ` edges per
    /// high-excess vertex, sampling rate `12κ / np`.
    pub fn zero(n: usize, kappa: usize, np: f64) -> Self {
        BuildSpec {
            t: 3 * kappa,
            caps: vec![5 * kappa; n],
            sample_rate: rate(12.0 * kappa as f64, np),
            attempts: 20,
        }
    }
}

fn rate(num: f64, np: f64) -> f64 {
    if np <= 0.0 {
        1.0
    } else {
        (num / np).clamp(0.0, 1.0)
    }
}

/// Largest number of edges any high-excess vertex has to the opposite side,
/// used as an estimate of `np`.
pub fn estimate_np(d: &Digraph, part: &VertexPartition) -> f64 {
    let mut best = 0;
    for v in 0..d.vertex_count() {
        let c = match part.side(v) {
            Side::Plus => d.out_edges(v).filter(|(_, e)| part.is_minus(e.head)).count(),
            Side::Minus => d.in_edges(v).filter(|(_, e)| part.is_plus(e.tail)).count(),
            Side::Zero => 0,
        };
        best = best.max(c);
    }
    best as f64
}

fn sort_key(d: &Digraph, id: EdgeId) -> (Vertex, Vertex, EdgeId) {
    let e = d.endpoints(id);
    (e.head, e.tail, id)
}

/// Builds an `(A⁺ ∪ A⁻, t)` structure from edges `A⁺ → A⁻`.
///
/// Each candidate edge is kept with probability `sample_rate` and handed to
/// its tail or head by a fair coin. Every vertex takes the first `t` of its
/// edges in `(head, tail, id)` order, subject to the incidence caps at both
/// ends. Vertices still short are then repaired along alternating paths: a
/// short vertex takes over an edge owned by its other endpoint, which in turn
/// claims a replacement, until some vertex can claim an unused edge without
/// breaking a cap. The whole build is retried with derived seeds.
pub fn build_dot_structure(
    d: &Digraph,
    part: &VertexPartition,
    spec: &BuildSpec,
    seed: u64,
) -> Result<AbsorbingStructure, StructureError> {
    let n = d.vertex_count();
    let mut at: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
    let mut candidates: Vec<EdgeId> = Vec::new();
    for (id, e) in d.edges() {
        if part.is_plus_minus(e) {
            candidates.push(id);
            at[e.tail].push(id);
            at[e.head].push(id);
        }
    }
    candidates.sort_by_key(|&id| sort_key(d, id));
    for list in &mut at {
        list.sort_by_key(|&id| sort_key(d, id));
    }
    let dot = part.a_dot();
    let mut last_err = None;
    for attempt in 0..spec.attempts.max(1) {
        let mut rng = rng_for(derive_seed(seed, attempt as u64), streams::DOT_STRUCTURE);
        let mut owned: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
        for &id in &candidates {
            if rng.gen_bool(spec.sample_rate) {
                let e = d.endpoints(id);
                let owner = if rng.gen_bool(0.5) { e.tail } else { e.head };
                owned[owner].push(id);
            }
        }
        let mut st = DotState {
            d,
            t: spec.t,
            caps: &spec.caps,
            inc: vec![0; n],
            owner: vec![None; d.endpoints_len()],
            count: vec![0; n],
        };
        for &v in &dot {
            for &id in &owned[v] {
                if st.count[v] < st.t && st.can_add(id) {
                    st.assign(id, v);
                }
            }
        }
        for &v in &dot {
            while st.count[v] < st.t && st.augment(v, &at) {}
        }
        match dot.iter().find(|&&v| st.count[v] < spec.t) {
            None => {
                let mut f: BTreeMap<Vertex, Vec<Edge>> = dot.iter().map(|&v| (v, Vec::new())).collect();
                for (i, o) in st.owner.iter().enumerate() {
                    if let Some(v) = o {
                        f.get_mut(v).expect("owner in domain").push(d.endpoints(EdgeId(i)));
                    }
                }
                return Ok(AbsorbingStructure::from_assignment(spec.t, f));
            }
            Some(&v) => {
                last_err = Some(StructureError::Starved {
                    vertex: v,
                    direction: if part.is_plus(v) { "out" } else { "in" },
                    needed: spec.t,
                    found: st.count[v],
                    candidates: at[v].len(),
                    attempts: attempt + 1,
                });
            }
        }
    }
    Err(last_err.expect("at least one attempt"))
}

struct DotState<'a> {
    d: &'a Digraph,
    t: usize,
    caps: &'a [usize],
    inc: Vec<usize>,
    owner: Vec<Option<Vertex>>,
    count: Vec<usize>,
}

impl DotState<'_> {
    fn can_add(&self, id: EdgeId) -> bool {
        let e = self.d.endpoints(id);
        self.owner[id.0].is_none() && self.inc[e.tail] < self.caps[e.tail] && self.inc[e.head] < self.caps[e.head]
    }

    fn assign(&mut self, id: EdgeId, v: Vertex) {
        let e = self.d.endpoints(id);
        self.owner[id.0] = Some(v);
        self.inc[e.tail] += 1;
        self.inc[e.head] += 1;
        self.count[v] += 1;
    }

    /// Breadth-first search for an alternating path from `v`; on success `v`
    /// owns one more edge and every other count is unchanged.
    fn augment(&mut self, v: Vertex, at: &[Vec<EdgeId>]) -> bool {
        let n = self.count.len();
        let mut parent: Vec<Option<(Vertex, EdgeId)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[v] = true;
        let mut queue = std::collections::VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &id in &at[u] {
                match self.owner[id.0] {
                    None if self.can_add(id) => {
                        // u takes the fresh edge; pass edges back along the path
                        self.assign(id, u);
                        let mut x = u;
                        while let Some((prev, via)) = parent[x] {
                            self.owner[via.0] = Some(prev);
                            self.count[prev] += 1;
                            self.count[x] -= 1;
                            x = prev;
                        }
                        return true;
                    }
                    Some(w) if w != u && !seen[w] => {
                        seen[w] = true;
                        parent[w] = Some((u, id));
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        false
    }
}

/// Builds an `(A⁰, t)` structure from edges `A⁺ → A⁰` and `A⁰ → A⁻`,
/// never using an edge of `forbidden` (counted with multiplicity).
///
/// Candidate edges are sampled with probability `sample_rate`. For each
/// direction the choice is a capacitated matching: every `z` needs `t`
/// edges and every high-excess endpoint may carry at most its cap. It is
/// solved as a maximum flow on the sampled edges first and, if that falls
/// short, on all candidates.
pub fn build_zero_structure(
    d: &Digraph,
    part: &VertexPartition,
    spec: &BuildSpec,
    forbidden: &EdgeBag,
    seed: u64,
) -> Result<AbsorbingStructure, StructureError> {
    let zero = part.a_zero();
    if zero.is_empty() {
        return Ok(AbsorbingStructure::empty(spec.t));
    }
    let mut skip = forbidden.clone();
    let mut allowed = vec![true; d.endpoints_len()];
    for (id, e) in d.edges() {
        if skip.remove(e) {
            allowed[id.0] = false;
        }
    }
    // (z, far end, id) for each direction
    let mut ins: Vec<(Vertex, Vertex, EdgeId)> = Vec::new();
    let mut outs: Vec<(Vertex, Vertex, EdgeId)> = Vec::new();
    for &z in &zero {
        for (id, e) in d.in_edges(z) {
            if allowed[id.0] && part.is_plus(e.tail) {
                ins.push((z, e.tail, id));
            }
        }
        for (id, e) in d.out_edges(z) {
            if allowed[id.0] && part.is_minus(e.head) {
                outs.push((z, e.head, id));
            }
        }
    }
    ins.sort_unstable();
    outs.sort_unstable();
    let mut rng = rng_for(seed, streams::ZERO_STRUCTURE);
    let sampled: Vec<bool> = (0..d.endpoints_len()).map(|_| rng.gen_bool(spec.sample_rate)).collect();
    let mut f: BTreeMap<Vertex, Vec<Edge>> = zero.iter().map(|&z| (z, Vec::new())).collect();
    for (direction, list) in [("in", &ins), ("out", &outs)] {
        let sample: Vec<_> = list.iter().copied().filter(|x| sampled[x.2.0]).collect();
        let chosen = match capacitated_matching(&zero, &sample, spec) {
            Ok(c) => c,
            Err(_) => capacitated_matching(&zero, list, spec).map_err(|z| StructureError::Starved {
                vertex: z,
                direction,
                needed: spec.t,
                found: 0,
                candidates: list.iter().filter(|x| x.0 == z).count(),
                attempts: 1,
            })?,
        };
        for id in chosen {
            let e = d.endpoints(id);
            let z = if part.is_zero(e.head) { e.head } else { e.tail };
            f.get_mut(&z).expect("zero vertex").push(e);
        }
    }
    Ok(AbsorbingStructure::from_assignment(spec.t, f))
}

/// Picks `t` edges per `z` with at most `caps[x]` edges per far end `x`.
/// On failure returns a `z` left short by a maximum flow.
fn capacitated_matching(
    zero: &[Vertex],
    list: &[(Vertex, Vertex, EdgeId)],
    spec: &BuildSpec,
) -> Result<Vec<EdgeId>, Vertex> {
    use crate::flow::Network;
    let z_index: BTreeMap<Vertex, usize> = zero.iter().enumerate().map(|(i, &z)| (z, i)).collect();
    let mut fars: Vec<Vertex> = list.iter().map(|x| x.1).collect();
    fars.sort_unstable();
    fars.dedup();
    let far_index: BTreeMap<Vertex, usize> = fars.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let (s, t) = (0, 1);
    let zbase = 2;
    let xbase = zbase + zero.len();
    let mut net: Network<u64> = Network::new(xbase + fars.len(), s, t).expect("valid network");
    let src_arcs: Vec<usize> = (0..zero.len())
        .map(|i| net.add_arc(s, zbase + i, spec.t as u64).expect("arc"))
        .collect();
    let mid: Vec<usize> = list
        .iter()
        .map(|&(z, x, _)| net.add_arc(zbase + z_index[&z], xbase + far_index[&x], 1).expect("arc"))
        .collect();
    for (i, &x) in fars.iter().enumerate() {
        net.add_arc(xbase + i, t, spec.caps[x] as u64).expect("arc");
    }
    let flow = net.max_flow();
    if let Some(i) = src_arcs.iter().position(|&a| flow.arc_flow[a] < spec.t as u64) {
        return Err(zero[i]);
    }
    Ok(list
        .iter()
        .zip(&mid)
        .filter(|(_, &a)| flow.arc_flow[a] == 1)
        .map(|(x, _)| x.2)
        .collect())
}
