//! Cycles of intermediate length, matched to vertices by a flow.

use std::collections::BTreeSet;

use super::{merge_cycle, AbsorptionOutcome, Breach, Check, Ledger, Mode, Trace};
use crate::digraph::{CycleSeq, Edge, Vertex, VertexPartition};
use crate::flow::AssignmentNetwork;
use crate::structure::AbsorbingStructure;

/// Number of vertices a cycle with `l` vertices in `A⁺ ∪ A⁻` asks for.
pub fn demand(l: usize, kappa: usize) -> usize {
    l.div_ceil(kappa.max(1)) + 1
}

/// The cycle restricted to its vertices in `A⁺ ∪ A⁻`, in cyclic order.
fn projection(c: &CycleSeq, part: &VertexPartition) -> Option<CycleSeq> {
    let vs: Vec<Vertex> = c.vertices().iter().copied().filter(|&v| part.is_dot(v)).collect();
    CycleSeq::new(vs).ok()
}

/// Assigns each cycle `⌈ℓ/κ⌉ + 1` of its vertices in `A⁺ ∪ A⁻`, each vertex
/// serving at most `κ` cycles, and merges every cycle using only reserved
/// edges at its assigned vertices. Strict mode requires the assignment to
/// cover every demand and reports a minimum cut otherwise.
pub fn absorb_medium(
    cycles: &[CycleSeq],
    s: &AbsorbingStructure,
    part: &VertexPartition,
    kappa: usize,
    mode: Mode,
    trace: &mut Trace,
) -> Result<AbsorptionOutcome, Breach> {
    let kappa = kappa.max(1);
    let mut ledger = Ledger::new(s, part);
    let mut out = AbsorptionOutcome::default();

    let mut projected = Vec::with_capacity(cycles.len());
    for (i, c) in cycles.iter().enumerate() {
        projected.push(projection(c, part).ok_or_else(|| {
            Breach::new(Check::MediumCycles, format!("cycle {i} has fewer than two vertices in A+ or A-"))
        })?);
    }
    let demands: Vec<u64> = projected
        .iter()
        .map(|p| {
            let g = demand(p.len(), kappa);
            match mode {
                Mode::Strict => g as u64,
                Mode::Permissive => g.min(p.len()) as u64,
            }
        })
        .collect();
    let net = AssignmentNetwork::<u64>::build(&projected, &demands, |_| kappa as u64)
        .map_err(|e| Breach::new(Check::MediumCycles, e.to_string()))?;
    let flow = net.max_flow();
    let total: u64 = demands.iter().sum();
    if flow.value < total {
        let t = net.residual_reachable_vertices(&flow);
        let b = Breach::new(
            Check::MediumCycles,
            format!(
                "assignment covers {} of {total}; minimum cut has {} vertices on the source side",
                flow.value,
                t.len()
            ),
        );
        match mode {
            Mode::Strict => return Err(b),
            Mode::Permissive => out.warnings.push(b),
        }
    }
    let mut assigned: Vec<Vec<Vertex>> = vec![Vec::new(); cycles.len()];
    for (i, v) in net.unit_assignments(&flow) {
        assigned[i].push(v);
    }

    for (i, c) in cycles.iter().enumerate() {
        let label = format!("M{i}");
        let result = match mode {
            Mode::Strict => {
                let offers: Vec<(Vertex, Vec<Edge>)> =
                    assigned[i].iter().map(|&v| (v, ledger.offers(v, Some(kappa + 2)))).collect();
                merge_cycle(c, label, "medium", part, &mut ledger, &offers, trace)
            }
            Mode::Permissive => {
                let first: BTreeSet<Vertex> = assigned[i].iter().copied().collect();
                let offers: Vec<(Vertex, Vec<Edge>)> = first.iter().map(|&v| (v, ledger.offers(v, None))).collect();
                merge_cycle(c, label.clone(), "medium", part, &mut ledger, &offers, trace).or_else(|_| {
                    let wide: Vec<(Vertex, Vec<Edge>)> = projected[i]
                        .vertices()
                        .iter()
                        .map(|&v| (v, ledger.offers(v, None)))
                        .filter(|(_, es)| !es.is_empty())
                        .collect();
                    merge_cycle(c, label, "medium", part, &mut ledger, &wide, trace)
                })
            }
        };
        let paths = result.map_err(|e| Breach::new(Check::MediumCycles, format!("cycle {i}: {e}")))?;
        out.new_paths.extend(paths);
    }
    out.new_paths.extend(ledger.remaining_paths(part));
    out.consumed_structure_edges = s.edges().collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{EdgeBag, Side};
    use std::collections::BTreeMap;

    #[test]
    fn demand_uses_integer_ceiling() {
        assert_eq!(demand(10, 4), 4);
        assert_eq!(demand(8, 4), 3);
        assert_eq!(demand(1, 1), 2);
    }

    #[test]
    fn projection_keeps_cyclic_order() {
        let part = VertexPartition::from_sides(vec![Side::Plus, Side::Zero, Side::Minus, Side::Plus]);
        let c = CycleSeq::new(vec![1, 2, 3, 0]).unwrap();
        assert_eq!(projection(&c, &part).unwrap().vertices(), &[2, 3, 0]);
    }

    fn fixture() -> (VertexPartition, Vec<CycleSeq>, AbsorbingStructure) {
        // Two cycles on the alternating vertices 0..6; 6 ∈ A⁺ and 7 ∈ A⁻
        // take the far ends of reserved edges.
        let mut sides = vec![Side::Zero; 8];
        for v in [0, 2, 4, 6] {
            sides[v] = Side::Plus;
        }
        for v in [1, 3, 5, 7] {
            sides[v] = Side::Minus;
        }
        let part = VertexPartition::from_sides(sides);
        let cycles = vec![
            CycleSeq::new(vec![0, 1, 2, 3, 4, 5]).unwrap(),
            CycleSeq::new(vec![0, 3, 2, 5, 4, 1]).unwrap(),
        ];
        let mut f = BTreeMap::new();
        for v in [0, 2, 4] {
            f.insert(v, vec![Edge::new(v, 7); 5]);
        }
        for v in [1, 3, 5] {
            f.insert(v, vec![Edge::new(6, v); 5]);
        }
        (part, cycles, AbsorbingStructure::from_assignment(5, f))
    }

    #[test]
    fn medium_cycles_conserve_edges() {
        let (part, cycles, s) = fixture();
        let out = absorb_medium(&cycles, &s, &part, 3, Mode::Strict, &mut Trace::default()).unwrap();
        let mut expect: EdgeBag = cycles.iter().flat_map(|c| c.edges().collect::<Vec<_>>()).collect();
        expect.extend(s.edges());
        assert_eq!(out.output_bag(), expect);
        assert!(out.new_paths.iter().all(|p| part.is_plus(p.start()) && part.is_minus(p.end())));
    }

    #[test]
    fn unsaturated_assignment_is_reported() {
        let (part, cycles, s) = fixture();
        // κ = 1 asks for 7 vertices from a cycle with 6.
        let err = absorb_medium(&cycles, &s, &part, 1, Mode::Strict, &mut Trace::default()).unwrap_err();
        assert_eq!(err.check, Check::MediumCycles);
        assert!(err.witness.contains("minimum cut"));
        let ok = absorb_medium(&cycles, &s, &part, 1, Mode::Permissive, &mut Trace::default()).unwrap();
        assert!(!ok.warnings.is_empty());
    }
}
