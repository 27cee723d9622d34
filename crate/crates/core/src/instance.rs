//! Seeded random search problems on small geometric graphs.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::graph::{EdgeSpec, Graph, VertexId};
use crate::sampling::default_radius;
use crate::world::ExplicitWorld;

/// Weights are rounded to multiples of this so that every path sum is exact:
/// weights stay below 2 and paths below 2^7, which fits 51 bits. A coarser
/// grid turns nearly collinear triples into exact ties between routes.
pub const WEIGHT_QUANTUM: f64 = 1.0 / (1u64 << 44) as f64;

#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub graph: Graph,
    pub world: ExplicitWorld,
    pub source: VertexId,
    pub target: VertexId,
}

#[derive(Clone, Copy, Debug)]
pub struct InstanceParams {
    pub min_vertices: usize,
    pub max_vertices: usize,
    /// Range of the connection constant in `gamma (ln n / n)^(1/2)`.
    pub gamma: (f64, f64),
    /// Range that per-edge validity probabilities are drawn from.
    pub prior: (f64, f64),
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            min_vertices: 8,
            max_vertices: 50,
            gamma: (1.2, 2.2),
            prior: (0.3, 0.95),
        }
    }
}

/// Uniform random points in the unit square joined within the default
/// radius, with independent priors and a world drawn from those priors.
/// Source is vertex 0 and target the vertex farthest from it.
pub fn random_instance(seed: u64, params: &InstanceParams) -> Instance {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let n = rng.random_range(params.min_vertices..=params.max_vertices);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
        .collect();
    let gamma = rng.random_range(params.gamma.0..=params.gamma.1);
    let r = default_radius(n, 2, gamma);

    let mut edges = Vec::new();
    let mut validity = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = ((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2)).sqrt();
            if d > r {
                continue;
            }
            // Rounding up keeps the straight-line heuristic consistent.
            let w = ((d / WEIGHT_QUANTUM).ceil() * WEIGHT_QUANTUM).max(WEIGHT_QUANTUM);
            let p = rng.random_range(params.prior.0..=params.prior.1);
            edges.push(EdgeSpec::new(i, j, w).with_prior(p));
            validity.push(rng.random::<f64>() < p);
        }
    }
    let target = (1..n)
        .max_by(|&a, &b| {
            let da = (points[a][0] - points[0][0]).hypot(points[a][1] - points[0][1]);
            let db = (points[b][0] - points[0][0]).hypot(points[b][1] - points[0][1]);
            da.total_cmp(&db)
        })
        .unwrap_or(0);
    let graph = Graph::new(2, points, edges).expect("generated edges are well formed");
    Instance {
        seed,
        graph,
        world: ExplicitWorld::new(validity),
        source: VertexId(0),
        target: VertexId(target),
    }
}
