mod common;

use pathdec_core::absorption::Check;
use pathdec_core::decomposer::{perfect_decompose, verify_decomposition, DecomposeOptions, Mode, Stage};
use pathdec_core::generator::{gen_dnp, gen_example_class};
use pathdec_core::structure::{
    build_dot_structure, build_zero_structure, estimate_np, validate_structure, BuildSpec,
};
use pathdec_core::{partition_by_excess, Digraph, EdgeBag};

fn permissive(seed: u64) -> DecomposeOptions {
    DecomposeOptions {
        mode: Mode::Permissive,
        seed,
        trace: true,
        ..DecomposeOptions::default()
    }
}

fn assert_perfect(d: &Digraph, paths: &[pathdec_core::PathSeq]) {
    assert_eq!(paths.len() as u64, d.total_excess());
    let bag: EdgeBag = paths.iter().flat_map(|p| p.edges().collect::<Vec<_>>()).collect();
    assert_eq!(bag, EdgeBag::from_digraph(d));
    let ex = d.excesses();
    for p in paths {
        assert!(ex[p.start()] > 0 && ex[p.end()] < 0, "{p}");
    }
}

#[test]
fn example_class_splits_into_excess_many_paths() {
    let d = gen_example_class(400, 150, 12, 5).unwrap();
    let run = perfect_decompose(&d, &permissive(5)).unwrap();
    assert_perfect(&d, &run.decomposition.paths);
    assert!(verify_decomposition(&d, &run.decomposition).passed());
    assert!(run.trace.iter().any(|e| e.kind == "medium"));
}

#[test]
fn balanced_vertices_are_merged_through_pairs() {
    let d = common::mixed_instance(150, 120, 10, 60, 40, 3);
    let run = perfect_decompose(&d, &permissive(3)).unwrap();
    assert_perfect(&d, &run.decomposition.paths);
    // Some merge went through a balanced vertex.
    assert!(run.trace.iter().any(|e| e.v1 >= 300 || e.v2 >= 300));
}

#[test]
fn same_seed_gives_same_paths() {
    let d = gen_example_class(200, 80, 8, 9).unwrap();
    let a = perfect_decompose(&d, &permissive(9)).unwrap();
    let b = perfect_decompose(&d, &permissive(9)).unwrap();
    assert_eq!(a.decomposition, b.decomposition);
}

#[test]
fn strict_mode_on_small_random_digraph_names_the_class_breach() {
    let d = gen_dnp(60, 0.3, 1).unwrap();
    let r = perfect_decompose(&d, &DecomposeOptions::default()).unwrap_err();
    assert_eq!(r.stage, Stage::Classify);
    assert_eq!(r.breaches[0].check, Check::ClassMembership);
    assert!(!r.breaches[0].witness.is_empty());
}

#[test]
fn acyclic_digraph_takes_the_greedy_path() {
    let mut d = gen_dnp(30, 0.2, 2).unwrap();
    let acyclic: Vec<_> = d.edges().filter(|(_, e)| e.tail > e.head).map(|(id, _)| id).collect();
    for id in acyclic {
        d.remove_edge(id);
    }
    let run = perfect_decompose(&d, &DecomposeOptions::default()).unwrap();
    assert_perfect(&d, &run.decomposition.paths);
}

#[test]
fn example_class_structures_respect_caps() {
    for seed in 0..5 {
        let d = gen_example_class(200, 60, 8, seed).unwrap();
        let kappa = 1;
        let part = partition_by_excess(&d, 36).unwrap();
        let np = estimate_np(&d, &part);
        let dot = build_dot_structure(&d, &part, &BuildSpec::dot(200, kappa, np), seed).unwrap();
        assert!(validate_structure(&dot, &d, &part).is_valid());
        assert!(dot.incidence(200).iter().all(|&i| i <= 150 * kappa));
        let zero = build_zero_structure(&d, &part, &BuildSpec::zero(200, kappa, np), &dot.edge_bag(), seed).unwrap();
        assert!(zero.is_empty());
    }
}

#[test]
fn balanced_structure_is_valid_and_capped() {
    let d = common::mixed_instance(100, 80, 8, 40, 30, 4);
    let kappa = 2;
    let part = partition_by_excess(&d, 36 * kappa as u64).unwrap();
    assert_eq!(part.a_zero().len(), 40);
    let np = estimate_np(&d, &part);
    let dot = build_dot_structure(&d, &part, &BuildSpec::dot(240, kappa, np), 4).unwrap();
    let zero = build_zero_structure(&d, &part, &BuildSpec::zero(240, kappa, np), &dot.edge_bag(), 4).unwrap();
    assert!(validate_structure(&zero, &d, &part).is_valid());
    let inc = zero.incidence(240);
    assert!(part.a_dot().iter().all(|&v| inc[v] <= 5 * kappa));
    let [_, _, third] = dot.split(kappa).unwrap();
    let merged = third.merge(&zero).unwrap();
    assert_eq!(merged.edge_count(), third.edge_count() + zero.edge_count());
    assert!(dot.merge(&zero).is_err());
}
