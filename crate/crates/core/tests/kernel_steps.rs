use std::collections::BTreeSet;

use mvm_core::instances::gen_random_bipartite;
use mvm_core::kernel::{Kernelizer, Strategy};

type Snapshot = (Vec<u32>, Vec<u32>, bool, BTreeSet<u32>);

/// Mergeable set, boundary set, early-exit flag and the union of the
/// boundary neighborhoods minus the vertices that will be deleted.
fn snapshot(k: &Kernelizer) -> Snapshot {
    let ws = k.working_sets();
    let deleted = if ws.early_exit { &ws.mergeable[..ws.mergeable.len() - 1] } else { &ws.mergeable[..] };
    let union: BTreeSet<u32> =
        ws.boundary.iter().flat_map(|&b| k.graph().neighbor_set(b)).filter(|x| !deleted.contains(x)).collect();
    (ws.mergeable.clone(), ws.boundary.clone(), ws.early_exit, union)
}

fn check_mergeability(k: &Kernelizer) {
    let ws = k.working_sets();
    let mut first_two = ws.boundary[..2].to_vec();
    first_two.sort_unstable();
    assert_eq!(k.graph().neighbor_set(ws.mergeable[0]), first_two);
    for (i, &h) in ws.mergeable.iter().enumerate().skip(1) {
        let prefix = &ws.boundary[..i + 1];
        let outside = k.graph().neighbor_set(h).into_iter().filter(|t| !prefix.contains(t)).count();
        assert!(outside <= 1, "mergeable {h} has {outside} neighbors outside the boundary prefix");
    }
    let tilde: BTreeSet<u32> = ws.boundary.iter().copied().collect();
    assert_eq!(tilde.len(), ws.boundary.len(), "boundary repeats a vertex");
    assert!(ws.mergeable.iter().all(|h| !tilde.contains(h)));
}

fn check_merge(k: &Kernelizer, before: &Snapshot) {
    let (mergeable, boundary, early_exit, union) = before;
    let g = k.graph();
    let alive: Vec<u32> = boundary.iter().copied().filter(|&b| g.is_alive(b)).collect();
    assert_eq!(alive.len(), 1, "exactly one boundary vertex survives");
    let s = alive[0];
    let got: BTreeSet<u32> = g.neighbor_set(s).into_iter().collect();
    assert_eq!(&got, union, "survivor neighborhood is the set union");
    assert_eq!(g.degree(s) as usize, got.len());
    let kept = usize::from(*early_exit);
    for &h in &mergeable[..mergeable.len() - kept] {
        assert!(!g.is_alive(h));
    }
    for &x in &got {
        assert_eq!(g.degree(x) as usize, g.neighbor_set(x).len(), "stale degree at {x}");
    }
    g.check_invariants().unwrap();
}

#[test]
fn stepwise_searches_respect_mergeability_and_set_union() {
    let mut searches = 0;
    for seed in 0..800u64 {
        let n = 10 + (seed % 60) as usize;
        let m = n * (2 + (seed % 3) as usize) / 2 + n / 3;
        let g = gen_random_bipartite(n, n, m, seed).unwrap();
        for s in [Strategy::Balanced, Strategy::Greedy, Strategy::Baseline] {
            let mut k = Kernelizer::new(&g, s, 0.5);
            loop {
                k.drain_rule1();
                let Some(u) = k.next_start() else { break };
                k.grow_mergeable_set(u);
                check_mergeability(&k);
                if s == Strategy::Baseline {
                    assert_eq!(k.working_sets().mergeable, vec![u]);
                }
                let before = snapshot(&k);
                k.merge_set();
                check_merge(&k, &before);
                searches += 1;
            }
            k.run();
            let r = k.finish();
            for v in r.kernel.live_vertices() {
                assert!(r.kernel.degree(v) >= 3);
            }
        }
    }
    assert!(searches > 1000, "only {searches} searches exercised");
}
