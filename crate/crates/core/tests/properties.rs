use gls::analysis::{expected_evals, optimal_order};
use gls::format::{parse_graph, write_graph};
use gls::instance::{random_instance, InstanceParams};
use gls::sampling::{build_rgg, default_radius, halton_point, halton_points};
use gls::Heuristic;
use proptest::prelude::*;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_text_round_trip(seed in any::<u64>()) {
        let inst = random_instance(seed, &InstanceParams::default());
        let text = write_graph(&inst.graph);
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(back.edges(), inst.graph.edges());
        prop_assert_eq!(back.vertices(), inst.graph.vertices());
        prop_assert_eq!(write_graph(&back), text);
    }

    #[test]
    fn graph_distance_heuristic_is_consistent(seed in any::<u64>()) {
        let params = InstanceParams { min_vertices: 50, max_vertices: 50, ..InstanceParams::default() };
        let inst = random_instance(seed, &params);
        let h = Heuristic::graph_distance(&inst.graph, inst.target);
        prop_assert_eq!(h.value(inst.target), 0.0);
        for e in inst.graph.edges() {
            let (u, v) = e.endpoints;
            prop_assert!(h.value(u) <= e.weight + h.value(v) + 1e-12);
            prop_assert!(h.value(v) <= e.weight + h.value(u) + 1e-12);
        }
    }

    #[test]
    fn ascending_order_minimizes_expected_evals(priors in prop::collection::vec(0.0f64..=1.0, 0..=6)) {
        let sorted: Vec<f64> = optimal_order(&priors).into_iter().map(|i| priors[i]).collect();
        let best = permutations(priors.len())
            .into_iter()
            .map(|p| expected_evals(&p.iter().map(|&i| priors[i]).collect::<Vec<_>>()))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(expected_evals(&sorted) <= best + 1e-12);
    }

    #[test]
    fn larger_prior_first_costs_strictly_more(
        prefix in prop::collection::vec(0.01f64..0.99, 0..4),
        a in 0.01f64..0.99,
        b in 0.01f64..0.99,
        suffix in prop::collection::vec(0.0f64..1.0, 0..4),
    ) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mut good = prefix.clone();
        good.extend([lo, hi]);
        good.extend(&suffix);
        let mut bad = prefix;
        bad.extend([hi, lo]);
        bad.extend(&suffix);
        prop_assert!(expected_evals(&bad) > expected_evals(&good));
    }

    #[test]
    fn equal_prior_suffix_order_is_irrelevant(prefix in prop::collection::vec(0.0f64..1.0, 0..4), p in 0.0f64..1.0, k in 1usize..4) {
        let mut v = prefix;
        v.extend(std::iter::repeat_n(p, k));
        let mut w = v.clone();
        let n = w.len();
        w[n - k..].reverse();
        prop_assert_eq!(expected_evals(&v), expected_evals(&w));
    }

    #[test]
    fn halton_is_deterministic(index in 0u64..1_000_000) {
        let a = halton_point(index, &[2, 3, 5]).unwrap();
        let b = halton_point(index, &[2, 3, 5]).unwrap();
        prop_assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn rgg_ignores_point_order(shift in 1usize..99) {
        let pts = halton_points(1, 100, &[2, 3]).unwrap();
        let mut rotated = pts.clone();
        rotated.rotate_left(shift);
        let r = default_radius(100, 2, 2.0);
        let lengths = |g: &gls::Graph| {
            let mut w: Vec<u64> = g.edges().iter().map(|e| e.weight.to_bits()).collect();
            w.sort_unstable();
            w
        };
        let a = build_rgg(&pts, r).unwrap();
        let b = build_rgg(&rotated, r).unwrap();
        prop_assert_eq!(lengths(&a), lengths(&b));
    }
}

#[test]
fn default_radius_connects_two_thousand_halton_points() {
    let pts = halton_points(1, 2000, &[2, 3]).unwrap();
    let g = build_rgg(&pts, default_radius(2000, 2, 2.0)).unwrap();
    let mut parent: Vec<usize> = (0..g.vertex_count()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in g.edges() {
        let a = find(&mut parent, e.endpoints.0 .0);
        let b = find(&mut parent, e.endpoints.1 .0);
        parent[a] = b;
    }
    let root = find(&mut parent, 0);
    assert!((0..g.vertex_count()).all(|v| find(&mut parent, v) == root));
    assert!(g.adjacency_consistent());
}
