use mvm_core::graph::BipartiteGraph;
use mvm_core::instances::gen_random_bipartite;
use mvm_core::kernel::{kernelize, Strategy};
use mvm_core::matching::{brute_force_max, exhaustive_max, kuhn_max, maximum_matching, verify_matching};
use mvm_core::reconstruct::{reconstruct, KernelGraph};

fn solve(g: &BipartiteGraph, s: Strategy) -> usize {
    let mut r = kernelize(g, s, 0.0);
    let kg = KernelGraph::from_store(&mut r.kernel);
    let km = maximum_matching(&kg);
    let m = reconstruct(&kg, &km, &r).unwrap();
    let rep = verify_matching(g, &m);
    assert!(rep.valid, "{s:?}: {:?}", rep.violations);
    m.size()
}

#[test]
fn kuhn_agrees_with_exhaustive_on_tiny_graphs() {
    for seed in 0..400 {
        let n = 1 + (seed % 7) as usize;
        let m = ((seed / 7) as usize % (n * n + 1)).min(24);
        let g = gen_random_bipartite(n, n + (seed % 3) as usize, m, seed).unwrap();
        assert_eq!(kuhn_max(&g), exhaustive_max(&g), "seed {seed}");
    }
}

#[test]
fn hopcroft_karp_agrees_with_oracle() {
    for seed in 0..500 {
        let nl = 1 + (seed % 40) as usize;
        let nr = 1 + (seed * 7 % 40) as usize;
        let m = (seed as usize * 13) % (nl * nr + 1);
        let g = gen_random_bipartite(nl, nr, m, seed).unwrap();
        let mm = maximum_matching(&g);
        assert!(verify_matching(&g, &mm).valid);
        assert_eq!(mm.size(), brute_force_max(&g).unwrap(), "seed {seed}");
    }
}

#[test]
fn every_strategy_matches_the_oracle_on_sparse_twenties() {
    for seed in 0..1000 {
        let g = gen_random_bipartite(20, 20, 40, seed).unwrap();
        let best = brute_force_max(&g).unwrap();
        for s in [Strategy::Balanced, Strategy::Greedy, Strategy::Baseline] {
            assert_eq!(solve(&g, s), best, "seed {seed} {s:?}");
        }
    }
}

#[test]
fn small_named_graphs() {
    let c4 = BipartiteGraph::from_edges(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
    let star = BipartiteGraph::from_edges(1, 5, &[(0, 0), (0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
    let empty = BipartiteGraph::empty(3, 4);
    for (g, want) in [(&c4, 2), (&star, 1), (&empty, 0)] {
        for s in [Strategy::Balanced, Strategy::Greedy, Strategy::Baseline] {
            assert_eq!(solve(g, s), want);
        }
    }
}
