//! The two merge kernels.

use thiserror::Error;

use crate::digraph::{CycleSeq, Edge, PathSeq, Side, Vertex, VertexPartition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("edge {edge} offered at {vertex} does not fit the reserved-path rules there")]
    ForeignEdge { vertex: Vertex, edge: Edge },
    #[error("offered vertex {0} is not on the cycle")]
    OffCycle(Vertex),
    #[error("no two offered edges leave the cycle and no two cross it (cycle of length {cycle_len}, {offered} offered edges)")]
    NoConfiguration { cycle_len: usize, offered: usize },
    #[error("no usable {direction} edge at {vertex}")]
    NoLeavingEdge { vertex: Vertex, direction: &'static str },
    #[error("the two paths do not close a circuit through their endpoints")]
    NotACircuit,
    #[error("constructed sequence is not a valid path: {0}")]
    Internal(String),
}

/// Which configuration merged a single cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelCase {
    /// Two reserved edges with their far endpoint off the cycle.
    OffCycle,
    /// Two reserved chords whose endpoints alternate around the cycle.
    Crossing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleAbsorption {
    pub paths: [PathSeq; 2],
    /// Consumed reserved edges with the vertex that owned them.
    pub used: [(Vertex, Edge); 2],
    pub case: KernelCase,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairAbsorption {
    pub paths: [PathSeq; 2],
    /// Consumed reserved edges at `v1` and at `v2`.
    pub used: [Vec<Edge>; 2],
}

fn check_owned(v: Vertex, e: Edge, part: &VertexPartition) -> Result<(), KernelError> {
    let ok = match part.side(v) {
        Side::Plus => e.tail == v && part.is_minus(e.head),
        Side::Minus => e.head == v && part.is_plus(e.tail),
        Side::Zero => (e.head == v && part.is_plus(e.tail)) || (e.tail == v && part.is_minus(e.head)),
    };
    if ok {
        Ok(())
    } else {
        Err(KernelError::ForeignEdge { vertex: v, edge: e })
    }
}

fn finish(seq: Vec<Vertex>, part: &VertexPartition) -> Result<PathSeq, KernelError> {
    let p = PathSeq::new(seq).map_err(|e| KernelError::Internal(e.to_string()))?;
    if !part.is_plus(p.start()) || !part.is_minus(p.end()) {
        return Err(KernelError::Internal(format!("path {p} does not run from A+ to A-")));
    }
    Ok(p)
}

/// Merges a cycle with two reserved edges at distinct vertices of the cycle
/// into two `A⁺ → A⁻` paths.
///
/// `offers` lists, per vertex of `A⁺ ∪ A⁻` on the cycle, the reserved edges
/// that may be used there. Edges leaving the cycle are preferred; otherwise
/// two alternating chords are used.
pub fn absorb_one_cycle(
    c: &CycleSeq,
    part: &VertexPartition,
    offers: &[(Vertex, Vec<Edge>)],
) -> Result<CycleAbsorption, KernelError> {
    let mut total = 0;
    for (v, es) in offers {
        if !c.contains(*v) {
            return Err(KernelError::OffCycle(*v));
        }
        for &e in es {
            if part.is_zero(*v) {
                return Err(KernelError::ForeignEdge { vertex: *v, edge: e });
            }
            check_owned(*v, e, part)?;
        }
        total += es.len();
    }

    let mut leaving: Vec<(Vertex, Edge)> = Vec::new();
    for (v, es) in offers {
        if let Some(&e) = es.iter().find(|e| !c.contains(e.other(*v).unwrap_or(*v))) {
            leaving.push((*v, e));
            if leaving.len() == 2 {
                break;
            }
        }
    }
    if let [(v1, e1), (v2, e2)] = leaving[..] {
        let ends = |v: Vertex, e: Edge| -> (Vec<Vertex>, Vec<Vertex>) {
            if part.is_plus(v) {
                (vec![], vec![e.head])
            } else {
                (vec![e.tail], vec![])
            }
        };
        let (pre1, post1) = ends(v1, e1);
        let (pre2, post2) = ends(v2, e2);
        let seg12 = c.segment(v1, v2).expect("on cycle").into_vertices();
        let seg21 = c.segment(v2, v1).expect("on cycle").into_vertices();
        let p1 = [pre1, seg12, post2].concat();
        let p2 = [pre2, seg21, post1].concat();
        return Ok(CycleAbsorption {
            paths: [finish(p1, part)?, finish(p2, part)?],
            used: [(v1, e1), (v2, e2)],
            case: KernelCase::OffCycle,
        });
    }

    let k = c.len();
    let chords: Vec<(Vertex, Edge, usize, usize)> = offers
        .iter()
        .flat_map(|(v, es)| es.iter().map(move |&e| (*v, e)))
        .filter_map(|(v, e)| Some((v, e, c.position(e.tail)?, c.position(e.head)?)))
        .collect();
    // x lies strictly inside the arc from a to b.
    let inside = |a: usize, b: usize, x: usize| {
        let d = (x + k - a) % k;
        d > 0 && d < (b + k - a) % k
    };
    for (i, &(va, ea, ta, ha)) in chords.iter().enumerate() {
        for &(vb, eb, tb, hb) in &chords[i + 1..] {
            if va == vb || ta == tb || ta == hb || ha == tb || ha == hb {
                continue;
            }
            let head_inside = inside(ta, ha, hb);
            if head_inside == inside(ta, ha, tb) {
                continue;
            }
            // Label so the cyclic order is w, x, y, z with chords w→y, z→x.
            let (w, x, y, z) = if head_inside {
                (ea.tail, eb.head, ea.head, eb.tail)
            } else {
                (eb.tail, ea.head, eb.head, ea.tail)
            };
            let mut p1 = vec![w];
            p1.extend(c.segment(y, z).expect("on cycle").into_vertices());
            p1.push(x);
            let p2 = c.segment(z, y).expect("on cycle").into_vertices();
            return Ok(CycleAbsorption {
                paths: [finish(p1, part)?, finish(p2, part)?],
                used: [(va, ea), (vb, eb)],
                case: KernelCase::Crossing,
            });
        }
    }
    Err(KernelError::NoConfiguration {
        cycle_len: c.len(),
        offered: total,
    })
}

/// Merges two paths `p12: v1 → v2` and `p21: v2 → v1`, which together form
/// a closed walk, with reserved paths at `v1` and `v2` into two `A⁺ → A⁻`
/// paths.
///
/// At a vertex of `A⁺` an out-edge is needed, at `A⁻` an in-edge, at `A⁰`
/// one of each. The far endpoint of each chosen edge must avoid the path it
/// is glued to.
pub fn absorb_pair(
    p12: &PathSeq,
    p21: &PathSeq,
    part: &VertexPartition,
    offers1: &[Edge],
    offers2: &[Edge],
) -> Result<PairAbsorption, KernelError> {
    let (v1, v2) = (p12.start(), p12.end());
    if v1 == v2 || p21.start() != v2 || p21.end() != v1 {
        return Err(KernelError::NotACircuit);
    }
    for (v, es) in [(v1, offers1), (v2, offers2)] {
        for &e in es {
            check_owned(v, e, part)?;
        }
    }
    // Path starting at v_i is `own`, the other one is `other`.
    let pick = |v: Vertex, es: &[Edge], own: &PathSeq, other: &PathSeq| -> Result<(Option<Edge>, Option<Edge>), KernelError> {
        let side = part.side(v);
        let inn = if side != Side::Plus {
            let e = es
                .iter()
                .find(|e| e.head == v && !own.contains(e.tail))
                .ok_or(KernelError::NoLeavingEdge { vertex: v, direction: "in" })?;
            Some(*e)
        } else {
            None
        };
        let out = if side != Side::Minus {
            let e = es
                .iter()
                .find(|e| e.tail == v && !other.contains(e.head))
                .ok_or(KernelError::NoLeavingEdge { vertex: v, direction: "out" })?;
            Some(*e)
        } else {
            None
        };
        Ok((inn, out))
    };
    let (in1, out1) = pick(v1, offers1, p12, p21)?;
    let (in2, out2) = pick(v2, offers2, p21, p12)?;

    let mut a: Vec<Vertex> = in1.map(|e| e.tail).into_iter().collect();
    a.extend_from_slice(p12.vertices());
    a.extend(out2.map(|e| e.head));
    let mut b: Vec<Vertex> = in2.map(|e| e.tail).into_iter().collect();
    b.extend_from_slice(p21.vertices());
    b.extend(out1.map(|e| e.head));

    Ok(PairAbsorption {
        paths: [finish(a, part)?, finish(b, part)?],
        used: [
            in1.into_iter().chain(out1).collect(),
            in2.into_iter().chain(out2).collect(),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::EdgeBag;

    fn sides(plus: &[Vertex], minus: &[Vertex], n: usize) -> VertexPartition {
        let mut s = vec![Side::Zero; n];
        for &v in plus {
            s[v] = Side::Plus;
        }
        for &v in minus {
            s[v] = Side::Minus;
        }
        VertexPartition::from_sides(s)
    }

    fn bag_of(paths: &[PathSeq]) -> EdgeBag {
        paths.iter().flat_map(|p| p.edges().collect::<Vec<_>>()).collect()
    }

    #[test]
    fn off_cycle_edges_merge() {
        // Cycle 0→1→2→3→0, 0 ∈ A⁺ with 0→4, 2 ∈ A⁻ with 5→2.
        let part = sides(&[0, 5], &[2, 4], 6);
        let c = CycleSeq::new(vec![0, 1, 2, 3]).unwrap();
        let offers = vec![(0, vec![Edge::new(0, 4)]), (2, vec![Edge::new(5, 2)])];
        let r = absorb_one_cycle(&c, &part, &offers).unwrap();
        assert_eq!(r.case, KernelCase::OffCycle);
        assert_eq!(r.paths[0].vertices(), &[0, 1, 2]);
        assert_eq!(r.paths[1].vertices(), &[5, 2, 3, 0, 4]);
        let mut expect: EdgeBag = c.edges().collect();
        expect.insert(Edge::new(0, 4));
        expect.insert(Edge::new(5, 2));
        assert_eq!(bag_of(&r.paths), expect);
    }

    #[test]
    fn crossing_chords_merge() {
        // Cycle 0 1 2 3 4 5 with chords 0→3 and 4→1.
        let part = sides(&[0, 4], &[1, 3], 6);
        let c = CycleSeq::new(vec![0, 1, 2, 3, 4, 5]).unwrap();
        let offers = vec![(0, vec![Edge::new(0, 3)]), (1, vec![Edge::new(4, 1)])];
        let r = absorb_one_cycle(&c, &part, &offers).unwrap();
        assert_eq!(r.case, KernelCase::Crossing);
        assert_eq!(r.paths[0].vertices(), &[0, 3, 4, 1]);
        assert_eq!(r.paths[1].vertices(), &[4, 5, 0, 1, 2, 3]);
        let mut expect: EdgeBag = c.edges().collect();
        expect.insert(Edge::new(0, 3));
        expect.insert(Edge::new(4, 1));
        assert_eq!(bag_of(&r.paths), expect);
    }

    #[test]
    fn crossing_label_order_is_symmetric() {
        let part = sides(&[0, 4], &[1, 3], 6);
        let c = CycleSeq::new(vec![0, 1, 2, 3, 4, 5]).unwrap();
        let offers = vec![(1, vec![Edge::new(4, 1)]), (0, vec![Edge::new(0, 3)])];
        let r = absorb_one_cycle(&c, &part, &offers).unwrap();
        assert_eq!(r.case, KernelCase::Crossing);
    }

    #[test]
    fn nested_chords_do_not_merge() {
        let part = sides(&[0, 1], &[3, 4], 6);
        let c = CycleSeq::new(vec![0, 1, 2, 3, 4, 5]).unwrap();
        let offers = vec![(0, vec![Edge::new(0, 4)]), (1, vec![Edge::new(1, 3)])];
        assert!(matches!(
            absorb_one_cycle(&c, &part, &offers),
            Err(KernelError::NoConfiguration { .. })
        ));
    }

    #[test]
    fn foreign_edge_is_rejected() {
        let part = sides(&[0], &[2], 4);
        let c = CycleSeq::new(vec![0, 1, 2, 3]).unwrap();
        let offers = vec![(0, vec![Edge::new(1, 0)])];
        assert!(matches!(absorb_one_cycle(&c, &part, &offers), Err(KernelError::ForeignEdge { .. })));
    }

    #[test]
    fn pair_with_zero_vertex() {
        // v1 = 0 ∈ A⁰, v2 = 1 ∈ A⁺; two-cycle 0→1→0.
        let part = sides(&[1, 2], &[3, 4], 5);
        let p12 = PathSeq::new(vec![0, 1]).unwrap();
        let p21 = PathSeq::new(vec![1, 0]).unwrap();
        let r = absorb_pair(
            &p12,
            &p21,
            &part,
            &[Edge::new(2, 0), Edge::new(0, 3)],
            &[Edge::new(1, 4)],
        )
        .unwrap();
        assert_eq!(r.paths[0].vertices(), &[2, 0, 1, 4]);
        assert_eq!(r.paths[1].vertices(), &[1, 0, 3]);
        assert_eq!(r.used[0].len(), 2);
        assert_eq!(r.used[1], vec![Edge::new(1, 4)]);
    }

    #[test]
    fn pair_skips_edges_into_the_path() {
        // v1 = 0 ∈ A⁻ with in-edges from 2 (on P12) and 5 (free).
        let part = sides(&[2, 5, 3], &[0, 6], 7);
        let p12 = PathSeq::new(vec![0, 2, 3]).unwrap();
        let p21 = PathSeq::new(vec![3, 0]).unwrap();
        let r = absorb_pair(&p12, &p21, &part, &[Edge::new(2, 0), Edge::new(5, 0)], &[Edge::new(3, 6)]).unwrap();
        assert_eq!(r.paths[0].vertices(), &[5, 0, 2, 3, 6]);
        assert_eq!(r.paths[1].vertices(), &[3, 0]);
    }

    #[test]
    fn pair_reports_missing_edge() {
        let part = sides(&[0], &[1], 2);
        let p12 = PathSeq::new(vec![0, 1]).unwrap();
        let p21 = PathSeq::new(vec![1, 0]).unwrap();
        assert_eq!(
            absorb_pair(&p12, &p21, &part, &[], &[]),
            Err(KernelError::NoLeavingEdge { vertex: 0, direction: "out" })
        );
    }
}
