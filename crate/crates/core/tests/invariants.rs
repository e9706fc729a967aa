mod common;

use pathdec_core::decomposer::{greedy_excess_paths, verify_paths};
use pathdec_core::euler::peel_cycles;
use pathdec_core::flow::Network;
use pathdec_core::io::{parse_edge_list, parse_paths, write_edge_list, write_paths};
use pathdec_core::oracle::brute_force_pn;
use pathdec_core::{Digraph, EdgeBag};
use proptest::prelude::*;

fn digraph(max_n: usize, max_m: usize) -> impl Strategy<Value = Digraph> {
    (2..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n), 0..=max_m).prop_map(move |pairs| {
            let mut d = Digraph::new(n);
            for (u, v) in pairs {
                if u != v {
                    d.add_edge((u, v)).unwrap();
                }
            }
            d
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn excesses_sum_to_zero(d in digraph(12, 40)) {
        let ex = d.excesses();
        prop_assert_eq!(ex.iter().sum::<i64>(), 0);
        let half: u64 = ex.iter().map(|x| x.unsigned_abs()).sum::<u64>() / 2;
        prop_assert_eq!(d.total_excess(), half);
        prop_assert_eq!((0..d.vertex_count()).map(|v| d.out_degree(v)).sum::<usize>(), d.edge_count());
    }

    #[test]
    fn greedy_paths_leave_an_eulerian_rest(d in digraph(12, 40)) {
        let (paths, rest) = greedy_excess_paths(&d);
        prop_assert_eq!(paths.len() as u64, d.total_excess());
        prop_assert!(rest.is_eulerian());
        let ex = d.excesses();
        let mut bag = EdgeBag::from_digraph(&rest);
        for p in &paths {
            prop_assert!(ex[p.start()] > 0 && ex[p.end()] < 0);
            bag.extend(p.edges());
        }
        prop_assert_eq!(bag, EdgeBag::from_digraph(&d));
    }

    #[test]
    fn peeling_partitions_eulerian_edges(n in 2usize..30, k in 1usize..20, seed in any::<u64>()) {
        let (d, _) = common::random_eulerian(n, k, 8, seed);
        let bundle = peel_cycles(&d).unwrap();
        let bag: EdgeBag = bundle.cycles.iter().flat_map(|c| c.edges().collect::<Vec<_>>()).collect();
        prop_assert_eq!(bag, EdgeBag::from_digraph(&d));
    }

    #[test]
    fn max_flow_equals_min_cut(
        nodes in 2usize..9,
        arcs in prop::collection::vec((0usize..9, 0usize..9, 0u64..7), 0..25),
    ) {
        let arcs: Vec<(usize, usize, u64)> = arcs
            .into_iter()
            .filter(|&(a, b, _)| a < nodes && b < nodes && a != b && b != 0 && a != 1)
            .collect();
        let mut net = Network::<u64>::new(nodes, 0, 1).unwrap();
        for &(a, b, c) in &arcs {
            net.add_arc(a, b, c).unwrap();
        }
        let flow = net.max_flow();
        prop_assert!(net.is_feasible(&flow));
        prop_assert_eq!(flow.value, common::brute_min_cut(nodes, 0, 1, &arcs));
        let side = net.residual_reachable(&flow);
        prop_assert_eq!(net.cut_capacity(&side), flow.value);
    }

    #[test]
    fn exact_path_number_matches_reference(d in digraph(5, 9)) {
        let pn = brute_force_pn(&d).unwrap();
        prop_assert!(pn >= d.total_excess());
        prop_assert_eq!(pn, common::naive_path_number(&d));
    }

    #[test]
    fn text_formats_round_trip(d in digraph(10, 30)) {
        let back = parse_edge_list(&write_edge_list(&d)).unwrap();
        prop_assert_eq!(back.edge_multiset(), d.edge_multiset());
        let (paths, rest) = greedy_excess_paths(&d);
        let raw = parse_paths(&write_paths(&paths)).unwrap();
        prop_assert_eq!(raw.len(), paths.len());
        if rest.edge_count() == 0 {
            prop_assert!(verify_paths(&d, &raw).passed());
        }
    }
}
