//! Cycles with few vertices in `A⁺ ∪ A⁻`, merged over several rounds.
//!
//! Each round assigns up to two vertices to every cycle by a flow, merges the
//! cycles whose two assigned vertices lie outside the minimum cut, merges
//! pairs of cycles that meet only inside the cut, and re-peels everything
//! else. The set of vertices still covered by cycles shrinks every round.

use std::collections::{BTreeMap, BTreeSet};

use super::{merge_pair, AbsorptionOutcome, Breach, Check, Ledger, Mode, Trace};
use crate::digraph::{CycleSeq, Digraph, Edge, EdgeBag, PathSeq, Vertex, VertexPartition};
use crate::euler::peel_cycles;
use crate::flow::AssignmentNetwork;
use crate::structure::AbsorbingStructure;

/// Counters for one round.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundStats {
    pub cycles: usize,
    pub vertices: usize,
    pub cut_vertices: usize,
    pub flow: u64,
    pub merged_single: usize,
    pub merged_pairs: usize,
    pub residual_vertices: usize,
    pub promoted: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShortOutcome {
    pub outcome: AbsorptionOutcome,
    /// Re-peeled cycles with more than `κ` vertices in `A⁺ ∪ A⁻`; they are
    /// handed back for reclassification.
    pub promoted: Vec<CycleSeq>,
    pub rounds: Vec<RoundStats>,
}

struct Round<'a> {
    part: &'a VertexPartition,
    mode: Mode,
    ledger: Ledger,
    paths: Vec<PathSeq>,
    promoted: Vec<CycleSeq>,
    warnings: Vec<Breach>,
}

impl Round<'_> {
    fn breach(&mut self, b: Breach) -> Result<(), Breach> {
        match self.mode {
            Mode::Strict => Err(b),
            Mode::Permissive => {
                self.warnings.push(b);
                Ok(())
            }
        }
    }

    fn limit(&self, k: usize) -> Option<usize> {
        match self.mode {
            Mode::Strict => Some(k + 1),
            Mode::Permissive => None,
        }
    }
}

fn vertex_set(cycles: &[CycleSeq]) -> BTreeSet<Vertex> {
    cycles.iter().flat_map(|c| c.vertices().iter().copied()).collect()
}

fn bag_of_cycles(cycles: &[CycleSeq]) -> EdgeBag {
    cycles.iter().flat_map(|c| c.edges().collect::<Vec<_>>()).collect()
}

fn seg(c: &CycleSeq, a: Vertex, b: Vertex) -> PathSeq {
    c.segment(a, b).expect("both vertices on the cycle")
}

/// Concatenates two paths sharing the last vertex of `a` and first of `b`.
fn join(a: &PathSeq, b: &PathSeq) -> Option<PathSeq> {
    let mut vs = a.vertices().to_vec();
    vs.extend_from_slice(&b.vertices()[1..]);
    PathSeq::new(vs).ok()
}

/// Merges short cycles into the reserved paths of `s`.
///
/// `c_prime` scales the bound `c' · n' · ln n'` on the number of cycles over
/// `n'` covered vertices; exceeding it is recorded as a warning.
pub fn absorb_short(
    cycles: Vec<CycleSeq>,
    s: &AbsorbingStructure,
    part: &VertexPartition,
    kappa: usize,
    c_prime: f64,
    mode: Mode,
    trace: &mut Trace,
) -> Result<ShortOutcome, Breach> {
    let kappa = kappa.max(1);
    let n = part.vertex_count();
    let mut target = bag_of_cycles(&cycles);
    target.extend(s.edges());
    let mut st = Round {
        part,
        mode,
        ledger: Ledger::new(s, part),
        paths: Vec::new(),
        promoted: Vec::new(),
        warnings: Vec::new(),
    };
    let mut rounds = Vec::new();
    let mut current = cycles;
    let mut round = 0usize;

    while !current.is_empty() {
        round += 1;
        let verts = vertex_set(&current);
        let n1 = verts.len();
        let mut stats = RoundStats {
            cycles: current.len(),
            vertices: n1,
            ..RoundStats::default()
        };

        let nf = n1.max(2) as f64;
        if current.len() as f64 > c_prime * nf * nf.ln() {
            st.warnings.push(Breach::new(
                Check::ShortCycles,
                format!("round {round}: {} cycles over {n1} vertices", current.len()),
            ));
        }
        let mut through: BTreeMap<Vertex, usize> = BTreeMap::new();
        for c in &current {
            for &v in c.vertices() {
                *through.entry(v).or_default() += 1;
            }
        }
        for (&v, &d) in &through {
            let r = st.ledger.ready(v, kappa);
            if d as i64 > r && r != kappa as i64 {
                st.breach(Breach::new(
                    Check::ShortCycles,
                    format!("round {round}: vertex {v} lies on {d} cycles with {r} spare reserved paths"),
                ))?;
            }
        }

        let h = |v: Vertex| st.ledger.ready(v, kappa).clamp(0, kappa as i64) as u64;
        let net = AssignmentNetwork::<u64>::build(&current, &vec![2; current.len()], h)
            .map_err(|e| Breach::new(Check::ShortCycles, e.to_string()))?;
        let flow = net.max_flow();
        let cut: BTreeSet<Vertex> = net.residual_reachable_vertices(&flow).into_iter().collect();
        stats.flow = flow.value;
        stats.cut_vertices = cut.len();
        if 2 * cut.len() > n1 {
            st.breach(Breach::new(
                Check::ShortCycles,
                format!("round {round}: minimum cut holds {} of {n1} vertices", cut.len()),
            ))?;
        }
        let mut assigned: Vec<Vec<Vertex>> = vec![Vec::new(); current.len()];
        for (i, v) in net.unit_assignments(&flow) {
            if !cut.contains(&v) {
                assigned[i].push(v);
            }
        }

        let mut residual: Vec<Edge> = Vec::new();
        let mut singles: Vec<(usize, Vertex)> = Vec::new();
        for (i, c) in current.iter().enumerate() {
            match assigned[i][..] {
                [v1, v2] => {
                    let p12 = seg(c, v1, v2);
                    let p21 = seg(c, v2, v1);
                    let limit = st.limit(kappa);
                    match merge_pair(&p12, &p21, format!("S{round}.{i}"), "short", part, &mut st.ledger, limit, trace) {
                        Ok(ps) => {
                            st.paths.extend(ps);
                            stats.merged_single += 1;
                        }
                        Err(e) => {
                            st.breach(Breach::new(Check::PairKernel, format!("round {round}, cycle {i}: {e}")))?;
                            residual.extend(c.edges());
                        }
                    }
                }
                [v] => singles.push((i, v)),
                _ => residual.extend(c.edges()),
            }
        }

        // Pairs of single-assigned cycles that meet only inside the cut.
        let mut by_vertex: BTreeMap<Vertex, Vec<usize>> = BTreeMap::new();
        for (k, &(i, _)) in singles.iter().enumerate() {
            for &v in current[i].vertices() {
                by_vertex.entry(v).or_default().push(k);
            }
        }
        let mut used = vec![false; singles.len()];
        for a in 0..singles.len() {
            if used[a] {
                continue;
            }
            let (ia, va) = singles[a];
            let ca = &current[ia];
            let partners: BTreeSet<usize> = ca
                .vertices()
                .iter()
                .filter_map(|v| by_vertex.get(v))
                .flatten()
                .copied()
                .filter(|&b| b > a && !used[b])
                .collect();
            let found = partners.into_iter().find(|&b| {
                let cb = &current[singles[b].0];
                ca.vertices().iter().filter(|v| cb.contains(**v)).all(|v| cut.contains(v))
            });
            let Some(b) = found else { continue };
            let (ib, vb) = singles[b];
            let cb = &current[ib];
            let start = ca.position(va).expect("on cycle");
            let v1p = (1..ca.len())
                .map(|s| ca.vertices()[(start + s) % ca.len()])
                .find(|v| cb.contains(*v))
                .expect("cycles intersect");
            let startb = cb.position(vb).expect("on cycle");
            let v2p = (1..cb.len())
                .map(|s| cb.vertices()[(startb + s) % cb.len()])
                .find(|v| ca.contains(*v))
                .expect("cycles intersect");
            let p12 = join(&seg(ca, va, v1p), &seg(cb, v1p, vb));
            let p21 = join(&seg(cb, vb, v2p), &seg(ca, v2p, va));
            let (Some(p12), Some(p21)) = (p12, p21) else {
                st.breach(Breach::new(
                    Check::ShortCycles,
                    format!("round {round}: cycles {ia} and {ib} do not splice into paths"),
                ))?;
                continue;
            };
            let limit = st.limit(2 * kappa);
            match merge_pair(&p12, &p21, format!("S{round}.{ia}+{ib}"), "short-pair", part, &mut st.ledger, limit, trace) {
                Ok(ps) => {
                    st.paths.extend(ps);
                    residual.extend(seg(ca, v1p, v2p).edges());
                    residual.extend(seg(cb, v2p, v1p).edges());
                    used[a] = true;
                    used[b] = true;
                    stats.merged_pairs += 1;
                }
                Err(e) => {
                    st.breach(Breach::new(
                        Check::PairKernel,
                        format!("round {round}, cycles {ia} and {ib}: {e}"),
                    ))?;
                }
            }
        }
        for (k, &(i, _)) in singles.iter().enumerate() {
            if !used[k] {
                residual.extend(current[i].edges());
            }
        }

        let rest = Digraph::from_edges(n, residual.iter().copied())
            .map_err(|e| Breach::new(Check::Conservation, e.to_string()))?;
        let peeled = peel_cycles(&rest).map_err(|e| Breach::new(Check::Conservation, e.to_string()))?;
        stats.residual_vertices = vertex_set(&peeled.cycles).len();
        let mut next = Vec::new();
        for c in peeled.cycles {
            if c.dot_count(part) > kappa {
                st.promoted.push(c);
                stats.promoted += 1;
            } else {
                next.push(c);
            }
        }

        let mut seen = bag_of_cycles(&next);
        seen.extend(st.promoted.iter().flat_map(|c| c.edges().collect::<Vec<_>>()));
        seen.extend(st.paths.iter().flat_map(|p| p.edges().collect::<Vec<_>>()));
        seen.extend(st.ledger.remaining_edges());
        if seen != target {
            return Err(Breach::new(Check::Conservation, format!("round {round}: edge multiset changed")));
        }

        let shrunk = stats.residual_vertices < n1;
        rounds.push(stats);
        if !next.is_empty() && !shrunk {
            st.breach(Breach::new(
                Check::ShortCycles,
                format!("round {round}: covered vertex set did not shrink"),
            ))?;
            fallback(&mut st, &next, round, trace)?;
            next.clear();
        }
        current = next;
    }

    let mut outcome = AbsorptionOutcome {
        new_paths: st.paths,
        consumed_structure_edges: s.edges().collect(),
        leftover_cycles: Vec::new(),
        warnings: st.warnings,
    };
    outcome.new_paths.extend(st.ledger.remaining_paths(part));
    Ok(ShortOutcome {
        outcome,
        promoted: st.promoted,
        rounds,
    })
}

/// Merges each remaining cycle through any two of its vertices that still
/// have reserved paths.
fn fallback(st: &mut Round<'_>, cycles: &[CycleSeq], round: usize, trace: &mut Trace) -> Result<(), Breach> {
    for (i, c) in cycles.iter().enumerate() {
        let cands: Vec<Vertex> = c
            .vertices()
            .iter()
            .copied()
            .filter(|&v| st.ledger.available(v) > 0)
            .collect();
        let mut done = false;
        'search: for (x, &v1) in cands.iter().enumerate() {
            for &v2 in &cands[x + 1..] {
                let p12 = seg(c, v1, v2);
                let p21 = seg(c, v2, v1);
                let label = format!("S{round}.{i}");
                if let Ok(ps) = merge_pair(&p12, &p21, label, "short-fallback", st.part, &mut st.ledger, None, trace) {
                    st.paths.extend(ps);
                    done = true;
                    break 'search;
                }
            }
        }
        if !done {
            return Err(Breach::new(
                Check::ShortCycles,
                format!("round {round}: cycle {c} has no two vertices with usable reserved paths"),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::Side;

    fn fixture(kappa: usize) -> (VertexPartition, AbsorbingStructure) {
        // A⁰ = {0..4}; A⁺ = {4, 5}; A⁻ = {6, 7}.
        let mut sides = vec![Side::Zero; 8];
        sides[4] = Side::Plus;
        sides[5] = Side::Plus;
        sides[6] = Side::Minus;
        sides[7] = Side::Minus;
        let part = VertexPartition::from_sides(sides);
        let mut f = BTreeMap::new();
        for z in 0..4 {
            let mut es = Vec::new();
            for k in 0..3 * kappa {
                es.push(Edge::new(4 + k % 2, z));
                es.push(Edge::new(z, 6 + k % 2));
            }
            es.sort();
            f.insert(z, es);
        }
        (part, AbsorbingStructure::from_assignment(3 * kappa, f))
    }

    #[test]
    fn balanced_cycles_are_merged() {
        let (part, s) = fixture(2);
        let cycles = vec![
            CycleSeq::new(vec![0, 1, 2]).unwrap(),
            CycleSeq::new(vec![1, 3]).unwrap(),
            CycleSeq::new(vec![2, 3]).unwrap(),
        ];
        let mut trace = Trace::on();
        let out = absorb_short(cycles.clone(), &s, &part, 2, 1.0, Mode::Strict, &mut trace).unwrap();
        assert!(out.promoted.is_empty());
        let mut expect = bag_of_cycles(&cycles);
        expect.extend(s.edges());
        assert_eq!(out.outcome.output_bag(), expect);
        for p in &out.outcome.new_paths {
            assert!(part.is_plus(p.start()) && part.is_minus(p.end()), "{p}");
        }
        assert!(!trace.events.is_empty());
    }

    #[test]
    fn no_cycles_returns_reserved_paths() {
        let (part, s) = fixture(1);
        let out = absorb_short(Vec::new(), &s, &part, 1, 1.0, Mode::Strict, &mut Trace::default()).unwrap();
        assert_eq!(out.outcome.new_paths.len(), 4 * 3);
        assert!(out.rounds.is_empty());
    }
}
