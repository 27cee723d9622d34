//! Roadmap construction, world sampling, prior training and batched runs.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use gls::analysis::{pareto_sweep, ParetoPoint, SweepSetup};
use gls::engine::{cost_total, gls_run, verify_certificate, CostModel};
use gls::sampling::{build_rgg, default_radius, halton_points};
use gls::world::{estimate_priors, generate_world, EnvParams, GOAL, START};
use gls::{AnyWorld, EnvKind, EventKind, Graph, Heuristic, SelectorKind, VertexId};

use crate::error::BenchError;

pub const SOURCE: VertexId = VertexId(0);
pub const TARGET: VertexId = VertexId(1);
pub const DEFAULT_GAMMA: f64 = 2.0;

/// Stream tags for [`derive_seed`].
pub const TRAIN_STREAM: u64 = 1;
pub const TEST_STREAM: u64 = 2;

/// Seed of item `index` in `stream` for a run with base seed `base`: the
/// first output of SplitMix64 seeded with `base ^ stream.rotate_left(32) ^ index`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    SplitMix64::seed_from_u64(base ^ stream.rotate_left(32) ^ index).next_u64()
}

/// Roadmap on `[0,1]^2`: vertex 0 is the start corner, vertex 1 the goal
/// corner and the rest are Halton points `1..=n-2` in bases 2 and 3.
pub fn roadmap(n: usize, gamma: f64) -> Result<Graph, BenchError> {
    if n < 2 {
        return Err(BenchError::Usage("graph needs at least 2 vertices".into()));
    }
    let mut points = vec![START.to_vec(), GOAL.to_vec()];
    points.extend(halton_points(1, n - 2, &[2, 3])?);
    Ok(build_rgg(&points, default_radius(n, 2, gamma))?)
}

/// A world tagged with the seed that generated it.
#[derive(Clone, Debug)]
pub struct SeededWorld {
    pub seed: u64,
    pub world: AnyWorld,
}

pub fn sample_worlds(env: EnvKind, base: u64, stream: u64, count: usize, params: &EnvParams) -> Vec<SeededWorld> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let g = generate_world(env, derive_seed(base, stream, i), params);
            SeededWorld {
                seed: g.seed,
                world: AnyWorld::Bitmap(g.world),
            }
        })
        .collect()
}

pub fn train_priors(graph: &Graph, worlds: &[SeededWorld]) -> Result<(Graph, f64), BenchError> {
    let plain: Vec<&AnyWorld> = worlds.iter().map(|w| &w.world).collect();
    let model = estimate_priors(graph, &plain)?;
    let p_max = model.p_max();
    Ok((graph.with_priors(model.priors())?, p_max))
}

#[derive(Clone, Debug)]
pub struct Setup {
    pub env: EnvKind,
    pub n: usize,
    pub gamma: f64,
    pub train: usize,
    pub test: usize,
    pub seed: u64,
    pub params: EnvParams,
}

impl Setup {
    pub fn desk_scale(env: EnvKind, seed: u64) -> Self {
        Setup {
            env,
            n: 1000,
            gamma: DEFAULT_GAMMA,
            train: 50,
            test: 50,
            seed,
            params: EnvParams::default(),
        }
    }
}

/// A graph with its query and the straight-line heuristic to the target.
#[derive(Clone, Debug)]
pub struct Problem {
    pub graph: Graph,
    pub heuristic: Heuristic,
    pub source: VertexId,
    pub target: VertexId,
}

impl Problem {
    pub fn new(graph: Graph, source: VertexId, target: VertexId) -> Result<Self, BenchError> {
        for v in [source, target] {
            if !graph.contains_vertex(v) {
                return Err(BenchError::Usage(format!(
                    "vertex {} is not in a graph of {} vertices",
                    v.index(),
                    graph.vertex_count()
                )));
            }
        }
        let heuristic = Heuristic::euclidean(&graph, target);
        Ok(Problem {
            graph,
            heuristic,
            source,
            target,
        })
    }
}

/// A roadmap carrying trained priors plus the training and test worlds.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub env: EnvKind,
    pub problem: Problem,
    pub p_max: f64,
    pub train: Vec<SeededWorld>,
    pub test: Vec<SeededWorld>,
}

pub fn prepare(setup: &Setup) -> Result<Prepared, BenchError> {
    let graph = roadmap(setup.n, setup.gamma)?;
    let train = sample_worlds(setup.env, setup.seed, TRAIN_STREAM, setup.train, &setup.params);
    let test = sample_worlds(setup.env, setup.seed, TEST_STREAM, setup.test, &setup.params);
    let (graph, p_max) = train_priors(&graph, &train)?;
    Ok(Prepared {
        env: setup.env,
        problem: Problem::new(graph, SOURCE, TARGET)?,
        p_max,
        train,
        test,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgoConfig {
    pub event: EventKind,
    pub selector: SelectorKind,
}

impl AlgoConfig {
    pub fn new(event: EventKind, selector: SelectorKind) -> Self {
        AlgoConfig { event, selector }
    }

    pub fn label(&self) -> String {
        format!("{}+{}", self.event, self.selector)
    }
}

/// Cartesian product of events and selectors, events outermost.
pub fn config_grid(events: &[EventKind], selectors: &[SelectorKind]) -> Vec<AlgoConfig> {
    events
        .iter()
        .flat_map(|&e| selectors.iter().map(move |&s| AlgoConfig::new(e, s)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub env: String,
    pub seed: u64,
    pub config: AlgoConfig,
    pub edges_evaluated: usize,
    pub vertex_rewires: usize,
    pub cost_total: f64,
    pub path_cost: Option<f64>,
    pub certified: bool,
    pub wall_ms: f64,
}

impl BenchRow {
    pub fn feasible(&self) -> bool {
        self.path_cost.is_some()
    }
}

/// Runs every configuration on every world. Rows come back ordered by
/// configuration, then world, whatever order the workers finish in.
pub fn run_configs(
    env: &str,
    problem: &Problem,
    worlds: &[SeededWorld],
    configs: &[AlgoConfig],
    cost: &CostModel,
) -> Result<Vec<BenchRow>, BenchError> {
    let Problem {
        graph,
        heuristic,
        source,
        target,
    } = problem;
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..worlds.len()).map(move |w| (c, w)))
        .collect();
    jobs.par_iter()
        .map(|&(c, w)| {
            let cfg = configs[c];
            let world = &worlds[w];
            let r = gls_run(graph, &world.world, *source, *target, cfg.event, cfg.selector, heuristic)?;
            let certified = r.feasible() && verify_certificate(graph, &r);
            Ok(BenchRow {
                env: env.to_string(),
                seed: world.seed,
                config: cfg,
                edges_evaluated: r.edges_evaluated(),
                vertex_rewires: r.vertex_rewires(),
                cost_total: cost_total(&r, cost),
                path_cost: r.path_cost(),
                certified,
                wall_ms: r.wall_time.as_secs_f64() * 1e3,
            })
        })
        .collect()
}

/// Log-spaced default grid for tuning subpath-existence thresholds.
pub const DELTA_GRID: [f64; 12] = [0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9];
pub const ALPHA_GRID: [usize; 6] = [1, 2, 4, 8, 16, 32];

/// Sweeps `grid` on `worlds` and returns the point with the lowest median
/// cost (first on ties) together with the whole curve.
pub fn tune_delta(
    problem: &Problem,
    worlds: &[SeededWorld],
    grid: &[f64],
    selector: SelectorKind,
    cost: &CostModel,
) -> Result<(f64, Vec<ParetoPoint>), BenchError> {
    let setup = SweepSetup {
        graph: &problem.graph,
        heuristic: &problem.heuristic,
        source: problem.source,
        target: problem.target,
        selector,
        cost: *cost,
    };
    let plain: Vec<&AnyWorld> = worlds.iter().map(|w| &w.world).collect();
    let curve = pareto_sweep(&setup, &plain, grid)?;
    let best = curve
        .iter()
        .filter(|p| p.median_cost.is_finite())
        .min_by(|a, b| a.median_cost.total_cmp(&b.median_cost))
        .map(|p| p.delta)
        .ok_or_else(|| BenchError::Internal("no feasible training run".into()))?;
    Ok((best, curve))
}

/// Picks the constant-depth alpha with the lowest median training cost.
pub fn tune_alpha(
    problem: &Problem,
    worlds: &[SeededWorld],
    alphas: &[usize],
    selector: SelectorKind,
    cost: &CostModel,
) -> Result<usize, BenchError> {
    let configs: Vec<AlgoConfig> = alphas
        .iter()
        .map(|&a| AlgoConfig::new(EventKind::ConstantDepth(a), selector))
        .collect();
    let rows = run_configs("train", problem, worlds, &configs, cost)?;
    let summary = crate::report::summarize(&rows, &configs);
    summary
        .iter()
        .zip(alphas)
        .filter(|(s, _)| s.median_cost.is_finite())
        .min_by(|(a, _), (b, _)| a.median_cost.total_cmp(&b.median_cost))
        .map(|(_, &a)| a)
        .ok_or_else(|| BenchError::Internal("no feasible training run".into()))
}

/// Median costs of `sp+ff` and `se(delta)+ff` at one point of a scaling sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingRow {
    pub axis: &'static str,
    pub value: f64,
    pub delta: f64,
    pub sp: crate::report::ConfigSummary,
    pub se: crate::report::ConfigSummary,
}

impl ScalingRow {
    /// `cost(sp) - cost(se)` in seconds.
    pub fn gap(&self) -> f64 {
        self.sp.median_cost - self.se.median_cost
    }
}

/// Prepares `setup` and runs both shortest-path and subpath-existence
/// search with the fail-fast selector on its test worlds. Without a given
/// `delta` the threshold is tuned on the training worlds.
pub fn scaling_point(
    setup: &Setup,
    axis: &'static str,
    value: f64,
    delta: Option<f64>,
    cost: &CostModel,
) -> Result<ScalingRow, BenchError> {
    let p = prepare(setup)?;
    let delta = match delta {
        Some(d) => d,
        None => tune_delta(&p.problem, &p.train, &DELTA_GRID, SelectorKind::FailFast, cost)?.0,
    };
    let configs = [
        AlgoConfig::new(EventKind::ShortestPath, SelectorKind::FailFast),
        AlgoConfig::new(EventKind::subpath_existence(delta)?, SelectorKind::FailFast),
    ];
    let rows = run_configs(setup.env.name(), &p.problem, &p.test, &configs, cost)?;
    let mut summary = crate::report::summarize(&rows, &configs).into_iter();
    let sp = summary.next().expect("two configurations");
    let se = summary.next().expect("two configurations");
    Ok(ScalingRow {
        axis,
        value,
        delta,
        sp,
        se,
    })
}
