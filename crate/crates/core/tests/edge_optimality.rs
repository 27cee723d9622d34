//! Heuristic-progress search with the graph-distance heuristic evaluates
//! exactly what shortest-path search does, with no more rewiring.

use gls::analysis::build_counterexample;
use gls::instance::{random_instance, InstanceParams};
use gls::{gls_run, EventKind, Heuristic, SelectorKind};

#[test]
fn same_evaluations_fewer_rewires() {
    let params = InstanceParams::default();
    let mut strictly_fewer = 0;
    for seed in 0..300 {
        let inst = random_instance(seed, &params);
        let h = Heuristic::graph_distance(&inst.graph, inst.target);
        let run = |e| gls_run(&inst.graph, &inst.world, inst.source, inst.target, e, SelectorKind::Forward, &h).unwrap();
        let sp = run(EventKind::ShortestPath);
        let hp = run(EventKind::HeuristicProgress);
        assert_eq!(sp.evaluated, hp.evaluated, "seed {seed}");
        assert!(hp.vertex_rewires() <= sp.vertex_rewires(), "seed {seed}");
        if hp.vertex_rewires() < sp.vertex_rewires() {
            strictly_fewer += 1;
        }
    }
    assert!(strictly_fewer > 0);
}

#[test]
fn counterexample_rewire_counts() {
    for n in [1, 2, 5, 25] {
        for l in [2, 4, 8] {
            let ce = build_counterexample(n, l).unwrap();
            let h = Heuristic::graph_distance(&ce.graph, ce.target);
            let run = |e| gls_run(&ce.graph, &ce.world, ce.source, ce.target, e, SelectorKind::Forward, &h).unwrap();
            let sp = run(EventKind::ShortestPath);
            let hp = run(EventKind::HeuristicProgress);
            // Each of the l-1 failures moves the N-1 settled chain vertices
            // (the goal itself is never settled) to the other hub, and a hub
            // rewires every time it is reused: (l-1)(N-1) + (l-2).
            assert_eq!(sp.vertex_rewires(), n * (l - 1) - 1, "N={n} l={l}");
            assert_eq!(hp.vertex_rewires(), 0, "N={n} l={l}");
            assert_eq!(sp.path_cost(), hp.path_cost());
        }
    }
}
