//! Cycles with many vertices in `A⁺ ∪ A⁻`.

use super::{merge_cycle, AbsorptionOutcome, Breach, Check, Ledger, Mode, Trace};
use crate::digraph::{CycleSeq, Edge, Vertex, VertexPartition};
use crate::structure::AbsorbingStructure;

/// Merges every cycle into the reserved edges of `s`, one cycle at a time.
///
/// A vertex may serve a cycle while it has at least `κ + 2` unused reserved
/// edges; strict mode requires more than `ℓ/κ` such vertices on each cycle,
/// where `ℓ` counts the cycle's vertices in `A⁺ ∪ A⁻`. Unused reserved edges
/// become single-edge paths.
pub fn absorb_long(
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
    for (i, c) in cycles.iter().enumerate() {
        let l = c.dot_count(part);
        let (min_avail, limit) = match mode {
            Mode::Strict => (kappa + 2, Some(kappa + 2)),
            Mode::Permissive => (1, None),
        };
        let offers: Vec<(Vertex, Vec<Edge>)> = c
            .vertices()
            .iter()
            .filter(|&&v| part.is_dot(v) && ledger.available(v) >= min_avail)
            .map(|&v| (v, ledger.offers(v, limit)))
            .collect();
        if (offers.len() as f64) < l as f64 / kappa as f64 + 1.0 {
            let b = Breach::new(
                Check::LongCycles,
                format!("cycle {i} has {} usable vertices, needs more than {l}/{kappa}", offers.len()),
            );
            match mode {
                Mode::Strict => return Err(b),
                Mode::Permissive => out.warnings.push(b),
            }
        }
        let paths = merge_cycle(c, format!("L{i}"), "long", part, &mut ledger, &offers, trace)
            .map_err(|e| Breach::new(Check::LongCycles, format!("cycle {i}: {e}")))?;
        out.new_paths.extend(paths);
    }
    out.new_paths.extend(ledger.remaining_paths(part));
    out.consumed_structure_edges = s.edges().collect();
    Ok(out)
}
