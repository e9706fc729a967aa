//! Merging leftover cycles into reserved paths.
//!
//! The kernels turn one cycle (or two paths closing a circuit) plus one or two
//! reserved paths into two paths from `A⁺` to `A⁻`. The drivers decide which
//! reserved paths each cycle may use: long cycles take them greedily, medium
//! cycles by a flow assignment, short cycles by repeated flow rounds that
//! shrink the set of vertices still covered by cycles.

use std::fmt;

use crate::digraph::{CycleSeq, Edge, EdgeBag, PathSeq, Side, Vertex, VertexPartition};
use crate::structure::{paths_from_edges, AbsorbingStructure};

pub mod kernels;
pub mod long;
pub mod medium;
pub mod short;

pub use kernels::{absorb_one_cycle, absorb_pair, CycleAbsorption, KernelCase, KernelError, PairAbsorption};
pub use long::absorb_long;
pub use medium::absorb_medium;
pub use short::{absorb_short, ShortOutcome};

/// How to react when an assumption of the construction does not hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Stop at the first violated assumption.
    #[default]
    Strict,
    /// Record the violation, widen the set of reserved paths the kernels may
    /// choose from, and stop only when no progress is possible.
    Permissive,
}

/// Named assumption checks, used in failure and warning reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    /// Nonempty input with zero excess everywhere.
    ZeroExcess,
    ClassMembership,
    DotStructure,
    ZeroStructure,
    SignPreservation,
    LongCycles,
    MediumCycles,
    ShortCycles,
    CycleKernel,
    PairKernel,
    Conservation,
    Verification,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::ZeroExcess => "zero-excess",
            Check::ClassMembership => "class-membership",
            Check::DotStructure => "dot-structure",
            Check::ZeroStructure => "zero-structure",
            Check::SignPreservation => "sign-preservation",
            Check::LongCycles => "long-cycles",
            Check::MediumCycles => "medium-cycles",
            Check::ShortCycles => "short-cycles",
            Check::CycleKernel => "cycle-kernel",
            Check::PairKernel => "pair-kernel",
            Check::Conservation => "conservation",
            Check::Verification => "verification",
        })
    }
}

/// A violated assumption with a witness description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Breach {
    pub check: Check,
    pub witness: String,
}

impl Breach {
    pub fn new(check: Check, witness: impl Into<String>) -> Self {
        Breach {
            check,
            witness: witness.into(),
        }
    }
}

impl fmt::Display for Breach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.check, self.witness)
    }
}

/// Result of one absorption driver.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AbsorptionOutcome {
    pub new_paths: Vec<PathSeq>,
    /// Structure edges that ended up in `new_paths`.
    pub consumed_structure_edges: Vec<Edge>,
    pub leftover_cycles: Vec<CycleSeq>,
    pub warnings: Vec<Breach>,
}

impl AbsorptionOutcome {
    /// Edges of the paths and leftover cycles, as a multiset.
    pub fn output_bag(&self) -> EdgeBag {
        let mut bag: EdgeBag = self.new_paths.iter().flat_map(|p| p.edges().collect::<Vec<_>>()).collect();
        for c in &self.leftover_cycles {
            bag.extend(c.edges());
        }
        bag
    }
}

/// One absorption event for the audit trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub kind: &'static str,
    pub cycle: String,
    pub v1: Vertex,
    pub v2: Vertex,
    pub edges: Vec<Edge>,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} cycle={} v1={} v2={} edges=", self.kind, self.cycle, self.v1, self.v2)?;
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Optional sink for trace events.
#[derive(Debug, Default)]
pub struct Trace {
    pub enabled: bool,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn on() -> Self {
        Trace {
            enabled: true,
            events: Vec::new(),
        }
    }

    pub(crate) fn record(&mut self, kind: &'static str, cycle: impl Into<String>, v1: Vertex, v2: Vertex, edges: &[Edge]) {
        if self.enabled {
            self.events.push(TraceEvent {
                kind,
                cycle: cycle.into(),
                v1,
                v2,
                edges: edges.to_vec(),
            });
        }
    }
}

/// Structure edges not yet used, per vertex of the domain.
///
/// For a vertex of `A⁺ ∪ A⁻` the count `a(v)` is the number of available
/// edges; for a vertex of `A⁰` it is the number of available in-edges, which
/// always equals the number of available out-edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ledger {
    available: std::collections::BTreeMap<Vertex, Vec<Edge>>,
    sides: Vec<Side>,
}

impl Ledger {
    pub fn new(s: &AbsorbingStructure, part: &VertexPartition) -> Self {
        Ledger {
            available: s.assignment().clone(),
            sides: (0..part.vertex_count()).map(|v| part.side(v)).collect(),
        }
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.available.contains_key(&v)
    }

    /// `a(v)`.
    pub fn available(&self, v: Vertex) -> usize {
        let es = self.edges(v);
        match self.sides.get(v) {
            Some(Side::Zero) => es.iter().filter(|e| e.head == v).count(),
            _ => es.len(),
        }
    }

    /// `r(v) = a(v) − 2κ`.
    pub fn ready(&self, v: Vertex, kappa: usize) -> i64 {
        self.available(v) as i64 - 2 * kappa as i64
    }

    /// Available edges at `v`, sorted.
    pub fn edges(&self, v: Vertex) -> &[Edge] {
        self.available.get(&v).map_or(&[], Vec::as_slice)
    }

    /// The first `paths` available reserved paths at `v`, as edges: single
    /// edges on `A⁺ ∪ A⁻`, in/out pairs on `A⁰`. `None` gives everything.
    pub fn offers(&self, v: Vertex, paths: Option<usize>) -> Vec<Edge> {
        let es = self.edges(v);
        let limit = paths.unwrap_or(usize::MAX);
        match self.sides.get(v) {
            Some(Side::Zero) => {
                let ins = es.iter().filter(|e| e.head == v).take(limit);
                let outs = es.iter().filter(|e| e.tail == v).take(limit);
                ins.chain(outs).copied().collect()
            }
            _ => es.iter().take(limit).copied().collect(),
        }
    }

    /// Marks edges at `v` as used. Panics if one is not available, which
    /// would be a bookkeeping bug.
    pub fn take(&mut self, v: Vertex, edges: &[Edge]) {
        let list = self.available.get_mut(&v).expect("vertex in ledger domain");
        for e in edges {
            let pos = list.iter().position(|x| x == e).expect("edge available at vertex");
            list.remove(pos);
        }
    }

    /// Remaining reserved paths, in vertex order.
    pub fn remaining_paths(&self, part: &VertexPartition) -> Vec<PathSeq> {
        self.available
            .iter()
            .flat_map(|(&z, es)| paths_from_edges(z, es, part))
            .collect()
    }

    pub fn remaining_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.available.values().flatten().copied()
    }
}

/// Runs the single-cycle kernel with `offers` and books the result.
pub(crate) fn merge_cycle(
    c: &CycleSeq,
    label: String,
    kind: &'static str,
    part: &VertexPartition,
    ledger: &mut Ledger,
    offers: &[(Vertex, Vec<Edge>)],
    trace: &mut Trace,
) -> Result<[PathSeq; 2], KernelError> {
    let r = absorb_one_cycle(c, part, offers)?;
    for (v, e) in r.used {
        ledger.take(v, &[e]);
    }
    trace.record(kind, label, r.used[0].0, r.used[1].0, &[r.used[0].1, r.used[1].1]);
    Ok(r.paths)
}

/// Runs the two-path kernel and books the result.
#[allow(clippy::too_many_arguments)]
pub(crate) fn merge_pair(
    p12: &PathSeq,
    p21: &PathSeq,
    label: String,
    kind: &'static str,
    part: &VertexPartition,
    ledger: &mut Ledger,
    limit: Option<usize>,
    trace: &mut Trace,
) -> Result<[PathSeq; 2], KernelError> {
    let (v1, v2) = (p12.start(), p12.end());
    let r = absorb_pair(p12, p21, part, &ledger.offers(v1, limit), &ledger.offers(v2, limit))?;
    ledger.take(v1, &r.used[0]);
    ledger.take(v2, &r.used[1]);
    let edges: Vec<Edge> = r.used.iter().flatten().copied().collect();
    trace.record(kind, label, v1, v2, &edges);
    Ok(r.paths)
}
