//! Search results against independent ground truth on random instances.

use gls::instance::{random_instance, InstanceParams};
use gls::{gls_run, oracle_shortest, verify_certificate, EdgeId, EventKind, Heuristic, SelectorKind, World};
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};

fn all_events() -> [EventKind; 4] {
    [
        EventKind::ShortestPath,
        EventKind::ConstantDepth(2),
        EventKind::HeuristicProgress,
        EventKind::SubpathExistence(0.5),
    ]
}

/// Shortest valid distance computed by petgraph, sharing no code with the crate.
fn petgraph_distance(inst: &gls::instance::Instance) -> Option<f64> {
    let g = &inst.graph;
    let mut pg = UnGraph::<(), f64>::new_undirected();
    let nodes: Vec<NodeIndex> = (0..g.vertex_count()).map(|_| pg.add_node(())).collect();
    for e in g.edges() {
        if inst.world.evaluate(g, e.id).unwrap() {
            pg.add_edge(nodes[e.endpoints.0 .0], nodes[e.endpoints.1 .0], e.weight);
        }
    }
    let dist = dijkstra(&pg, nodes[inst.source.0], Some(nodes[inst.target.0]), |e| *e.weight());
    dist.get(&nodes[inst.target.0]).copied()
}

#[test]
fn oracle_agrees_with_petgraph() {
    let params = InstanceParams::default();
    for seed in 0..200 {
        let inst = random_instance(seed, &params);
        let ours = oracle_shortest(&inst.graph, &inst.world, inst.source, inst.target).unwrap();
        match (ours, petgraph_distance(&inst)) {
            (Some(p), Some(d)) => assert!((p.weight() - d).abs() < 1e-9, "seed {seed}"),
            (None, None) => {}
            (a, b) => panic!("seed {seed}: {a:?} vs {b:?}"),
        }
    }
}

#[test]
fn every_configuration_finds_the_oracle_cost() {
    let params = InstanceParams::default();
    for seed in 1000..1150 {
        let inst = random_instance(seed, &params);
        let truth = oracle_shortest(&inst.graph, &inst.world, inst.source, inst.target).unwrap();
        let heuristics = [
            Heuristic::graph_distance(&inst.graph, inst.target),
            Heuristic::euclidean(&inst.graph, inst.target),
            Heuristic::zero(&inst.graph),
        ];
        for h in &heuristics {
            for event in all_events() {
                for sel in SelectorKind::ALL {
                    let r = gls_run(&inst.graph, &inst.world, inst.source, inst.target, event, sel, h).unwrap();
                    match (&r.path, &truth) {
                        (Some(p), Some(t)) => {
                            assert!((p.weight() - t.weight()).abs() < 1e-9, "seed {seed} {event} {sel}");
                            assert!(verify_certificate(&inst.graph, &r), "seed {seed} {event} {sel}");
                        }
                        (None, None) => {}
                        _ => panic!("seed {seed} {event} {sel}: feasibility differs"),
                    }
                    let mut seen: Vec<EdgeId> = r.evaluated_edges().collect();
                    let n = seen.len();
                    seen.sort();
                    seen.dedup();
                    assert_eq!(seen.len(), n, "seed {seed}: an edge was evaluated twice");
                }
            }
        }
    }
}

#[test]
fn no_invalid_edges_means_no_rewires() {
    let params = InstanceParams {
        prior: (1.0, 1.0),
        ..InstanceParams::default()
    };
    for seed in 0..100 {
        let inst = random_instance(seed, &params);
        let h = Heuristic::euclidean(&inst.graph, inst.target);
        for event in all_events() {
            for sel in SelectorKind::ALL {
                let r = gls_run(&inst.graph, &inst.world, inst.source, inst.target, event, sel, &h).unwrap();
                assert_eq!(r.vertex_rewires(), 0, "seed {seed} {event} {sel}");
            }
        }
    }
}

#[test]
fn leaf_estimates_never_decrease_for_target_and_progress_events() {
    // Events that may halt at interior vertices after a repair (constant
    // depth, subpath existence) can revisit a cheaper leaf, so only these two
    // are checked.
    let params = InstanceParams::default();
    for seed in 0..300 {
        let inst = random_instance(seed, &params);
        let h = Heuristic::graph_distance(&inst.graph, inst.target);
        for event in [EventKind::ShortestPath, EventKind::HeuristicProgress] {
            for sel in SelectorKind::ALL {
                let r = gls_run(&inst.graph, &inst.world, inst.source, inst.target, event, sel, &h).unwrap();
                assert!(
                    r.trace.windows(2).all(|w| w[1].leaf_f >= w[0].leaf_f),
                    "seed {seed} {event} {sel}"
                );
            }
        }
    }
}

#[test]
fn leaf_estimate_is_a_lower_bound_on_the_answer() {
    let params = InstanceParams::default();
    for seed in 0..200 {
        let inst = random_instance(seed, &params);
        let Some(best) = oracle_shortest(&inst.graph, &inst.world, inst.source, inst.target).unwrap() else {
            continue;
        };
        let h = Heuristic::euclidean(&inst.graph, inst.target);
        for event in all_events() {
            let r = gls_run(&inst.graph, &inst.world, inst.source, inst.target, event, SelectorKind::FailFast, &h).unwrap();
            assert!(r.trace.iter().all(|s| s.leaf_f <= best.weight() + 1e-9), "seed {seed} {event}");
        }
    }
}

#[test]
fn admissible_but_inconsistent_heuristics_stay_optimal() {
    use rand::{Rng, SeedableRng};
    let params = InstanceParams::default();
    let mut rng = rand_xoshiro::SplitMix64::seed_from_u64(99);
    for seed in 0..200 {
        let inst = random_instance(seed, &params);
        let truth = oracle_shortest(&inst.graph, &inst.world, inst.source, inst.target).unwrap();
        let exact = Heuristic::graph_distance(&inst.graph, inst.target);
        let h = Heuristic::from_values(exact.values().iter().map(|v| v * rng.random::<f64>()).collect());
        for event in all_events() {
            for sel in SelectorKind::ALL {
                let r = gls_run(&inst.graph, &inst.world, inst.source, inst.target, event, sel, &h).unwrap();
                assert_eq!(r.path.is_some(), truth.is_some(), "seed {seed}");
                if let (Some(p), Some(t)) = (&r.path, &truth) {
                    assert!((p.weight() - t.weight()).abs() < 1e-9, "seed {seed} {event} {sel}");
                }
            }
        }
    }
}
