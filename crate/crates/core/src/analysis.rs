//! Closed-form quantities for prior-guided search and the rewiring
//! counter-example construction.

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{gls_run, CostModel, EngineError};
use crate::graph::{EdgeSpec, Graph, GraphError, VertexId};
use crate::stats::median;
use crate::toggles::{EventKind, SelectorKind};
use crate::tree::Heuristic;
use crate::world::{ExplicitWorld, World};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("delta must lie strictly between 0 and 1, got {0}")]
    BadDelta(f64),
    #[error("p_max must lie strictly between 0 and 1, got {0}")]
    BadPmax(f64),
    #[error("{name} must be at least 1")]
    NonPositive { name: &'static str },
    #[error("counter-example needs an even fan size l >= 2, got {0}")]
    BadFan(usize),
    #[error("empty delta grid")]
    EmptyGrid,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Expected number of evaluations, checking edges in the given order, until
/// the first invalid one: `sum_l (prod_{m<l} p_m) (1 - p_l) l`. The all-valid
/// outcome contributes nothing.
pub fn expected_evals(priors: &[f64]) -> f64 {
    let mut survive = 1.0;
    let mut total = 0.0;
    for (i, &p) in priors.iter().enumerate() {
        total += survive * (1.0 - p) * (i + 1) as f64;
        survive *= p;
    }
    total
}

/// Like [`expected_evals`] but also charges `n` evaluations to the outcome
/// where every edge is valid.
pub fn expected_evals_with_success(priors: &[f64]) -> f64 {
    let all_valid: f64 = priors.iter().product();
    expected_evals(priors) + all_valid * priors.len() as f64
}

/// Indices sorted by ascending prior, ties kept in input order.
pub fn optimal_order(priors: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..priors.len()).collect();
    idx.sort_by(|&a, &b| priors[a].total_cmp(&priors[b]));
    idx
}

/// Inputs of the planning-time bound for subpath-existence search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams {
    /// Number of infeasible paths shorter than the optimum.
    pub k: u32,
    /// Maximum branching factor.
    pub b: u32,
    pub p_max: f64,
    pub delta: f64,
    pub cost: CostModel,
}

impl BoundParams {
    pub fn new(k: u32, b: u32, p_max: f64, delta: f64, cost: CostModel) -> Result<Self, AnalysisError> {
        let params = BoundParams {
            k,
            b,
            p_max,
            delta,
            cost,
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<(), AnalysisError> {
        if self.k == 0 {
            return Err(AnalysisError::NonPositive { name: "K" });
        }
        if self.b == 0 {
            return Err(AnalysisError::NonPositive { name: "b" });
        }
        if !(self.p_max > 0.0 && self.p_max < 1.0) {
            return Err(AnalysisError::BadPmax(self.p_max));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(AnalysisError::BadDelta(self.delta));
        }
        Ok(())
    }

    /// Longest subpath whose existence probability can still exceed delta:
    /// `L = ln(delta) / ln(p_max)`.
    pub fn subpath_length(&self) -> f64 {
        self.delta.ln() / self.p_max.ln()
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        BoundParams { delta, ..*self }
    }
}

/// `K (c_eval / (1 - delta) + c_rwr b L(delta))`.
pub fn theorem4_bound(params: &BoundParams) -> Result<f64, AnalysisError> {
    params.validate()?;
    Ok(bound_value(params))
}

fn bound_value(p: &BoundParams) -> f64 {
    p.k as f64 * (p.cost.c_eval / (1.0 - p.delta) + p.cost.c_rwr * p.b as f64 * p.subpath_length())
}

/// `d/d delta` of the bound, in closed form.
pub fn theorem4_derivative(params: &BoundParams) -> f64 {
    let p = params;
    let d = p.delta;
    p.k as f64 * (p.cost.c_eval / ((1.0 - d) * (1.0 - d)) + p.cost.c_rwr * p.b as f64 / (d * p.p_max.ln()))
}

/// `(c_eval / (b c_rwr)) ln(1 / p_max) + 2`.
pub fn eta(c_eval: f64, c_rwr: f64, b: u32, p_max: f64) -> f64 {
    c_eval / (b as f64 * c_rwr) * (1.0 / p_max).ln() + 2.0
}

/// The stationary point of the bound in delta, `(eta - sqrt(eta^2 - 4)) / 2`.
pub fn critical_delta(c_eval: f64, c_rwr: f64, b: u32, p_max: f64) -> f64 {
    delta_from_eta(eta(c_eval, c_rwr, b, p_max))
}

/// Smaller root of `delta^2 - eta delta + 1`. Written as
/// `2 / (eta + sqrt(eta^2 - 4))` to avoid cancellation for large eta.
pub fn delta_from_eta(eta: f64) -> f64 {
    let disc = (eta * eta - 4.0).max(0.0);
    2.0 / (eta + disc.sqrt())
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`,
/// stopping when the bracket is narrower than `tol`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Offset between consecutive fan edges. A power of two keeps every path
/// weight exact, so ties between routes are real ties.
pub const FAN_EPSILON: f64 = 1.0 / 1024.0;

/// A graph on which shortest-path-triggered search rewires every chain vertex
/// after each invalidation, while heuristic-progress search never rewires.
#[derive(Clone, Debug)]
pub struct CounterExample {
    pub graph: Graph,
    pub world: ExplicitWorld,
    pub source: VertexId,
    pub target: VertexId,
    pub n: usize,
    pub l: usize,
}

impl CounterExample {
    pub fn expected_edge_count(n: usize, l: usize) -> usize {
        3 * n + 2 * l - 1
    }
}

/// Start `s = 0`, fan `u_1..u_l = 1..l`, hub `A = l+1` joined to odd fan
/// vertices, hub `B = l+2` joined to even ones, chain `c_1..c_N` after that
/// with `c_N` the goal.
///
/// Weights: `s-u_i = 1 + i eps`, `u_i-hub = 1`, `hub-c_j = j`, `c_j-c_{j+1} = 1`.
/// Every chain vertex is then equally far through its hub or through the
/// chain, and the hub wins the parent tie by id. Fan edges `s-u_i` are
/// invalid for `i < l`, so each failure moves the lazy shortest path to the
/// other hub.
pub fn build_counterexample(n: usize, l: usize) -> Result<CounterExample, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::NonPositive { name: "N" });
    }
    if l < 2 || !l.is_multiple_of(2) {
        return Err(AnalysisError::BadFan(l));
    }
    let hub_a = l + 1;
    let hub_b = l + 2;
    let chain = |j: usize| l + 2 + j;

    let mut positions = vec![vec![0.0, 0.0]];
    positions.extend((1..=l).map(|i| vec![1.0, i as f64]));
    positions.push(vec![2.0, 1.0]);
    positions.push(vec![2.0, 2.0]);
    positions.extend((1..=n).map(|j| vec![2.0 + j as f64, 0.0]));

    let mut edges = Vec::with_capacity(CounterExample::expected_edge_count(n, l));
    let mut validity = Vec::with_capacity(edges.capacity());
    for i in 1..=l {
        edges.push(EdgeSpec::new(0, i, 1.0 + i as f64 * FAN_EPSILON).with_prior(0.5));
        validity.push(i == l);
    }
    for i in 1..=l {
        let hub = if i % 2 == 1 { hub_a } else { hub_b };
        edges.push(EdgeSpec::new(i, hub, 1.0).with_prior(0.5));
        validity.push(true);
    }
    for j in 1..=n {
        for hub in [hub_a, hub_b] {
            edges.push(EdgeSpec::new(hub, chain(j), j as f64).with_prior(0.5));
            validity.push(true);
        }
    }
    for j in 1..n {
        edges.push(EdgeSpec::new(chain(j), chain(j + 1), 1.0).with_prior(0.5));
        validity.push(true);
    }

    let graph = Graph::new(2, positions, edges)?;
    Ok(CounterExample {
        graph,
        world: ExplicitWorld::new(validity),
        source: VertexId(0),
        target: VertexId(chain(n)),
        n,
        l,
    })
}

/// Shared inputs of a delta sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepSetup<'a> {
    pub graph: &'a Graph,
    pub heuristic: &'a Heuristic,
    pub source: VertexId,
    pub target: VertexId,
    pub selector: SelectorKind,
    pub cost: CostModel,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParetoPoint {
    pub delta: f64,
    pub median_evals: f64,
    pub median_rewires: f64,
    pub median_cost: f64,
    pub feasible: usize,
}

/// Runs subpath-existence search for every `(delta, world)` pair and reports
/// per-delta medians over feasible runs. `graph` must carry the priors.
pub fn pareto_sweep<W: World>(setup: &SweepSetup<'_>, worlds: &[W], grid: &[f64]) -> Result<Vec<ParetoPoint>, AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    let events = grid
        .iter()
        .map(|&d| EventKind::subpath_existence(d).map_err(|_| AnalysisError::BadDelta(d)))
        .collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|i| (0..worlds.len()).map(move |w| (i, w)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(i, w)| {
            gls_run(
                setup.graph,
                &worlds[w],
                setup.source,
                setup.target,
                events[i],
                setup.selector,
                setup.heuristic,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(grid
        .iter()
        .enumerate()
        .map(|(i, &delta)| {
            let ok: Vec<_> = runs[i * worlds.len()..(i + 1) * worlds.len()]
                .iter()
                .filter(|r| r.feasible())
                .collect();
            let evals: Vec<f64> = ok.iter().map(|r| r.edges_evaluated() as f64).collect();
            let rewires: Vec<f64> = ok.iter().map(|r| r.vertex_rewires() as f64).collect();
            let costs: Vec<f64> = ok
                .iter()
                .map(|r| setup.cost.cost(r.edges_evaluated(), r.vertex_rewires()))
                .collect();
            ParetoPoint {
                delta,
                median_evals: median(&evals).unwrap_or(f64::NAN),
                median_rewires: median(&rewires).unwrap_or(f64::NAN),
                median_cost: median(&costs).unwrap_or(f64::NAN),
                feasible: ok.len(),
            }
        })
        .collect())
}

/// Sample mean and standard deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub trials: usize,
}

impl SampleSummary {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        SampleSummary {
            mean,
            std_dev: var.sqrt(),
            trials: xs.len(),
        }
    }

    pub fn std_error(&self) -> f64 {
        self.std_dev / (self.trials as f64).sqrt()
    }
}

/// Evaluations needed to eliminate one subpath when an oracle picks an
/// invalid edge whenever the subpath has one. Each round draws a fresh
/// subpath of `len` edges, each valid with probability `delta^(1/len)`, so
/// the whole subpath exists with probability `delta`. A round on a subpath
/// that turns out fully valid costs one evaluation and eliminates nothing.
pub fn simulate_oracle_eliminations<R: Rng>(delta: f64, len: usize, trials: usize, rng: &mut R) -> SampleSummary {
    let p = delta.powf(1.0 / len as f64);
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            let mut evals = 0u64;
            loop {
                evals += 1;
                let exists = (0..len).all(|_| rng.random::<f64>() < p);
                if !exists {
                    break evals as f64;
                }
            }
        })
        .collect();
    SampleSummary::from_samples(&samples)
}

/// Same setting but with edges checked front to back until the first
/// invalid one, as a non-oracular selector would under uniform priors.
pub fn simulate_sequential_eliminations<R: Rng>(delta: f64, len: usize, trials: usize, rng: &mut R) -> SampleSummary {
    let p = delta.powf(1.0 / len as f64);
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            let mut evals = 0u64;
            'outer: loop {
                for _ in 0..len {
                    evals += 1;
                    if rng.random::<f64>() >= p {
                        break 'outer evals as f64;
                    }
                }
            }
        })
        .collect();
    SampleSummary::from_samples(&samples)
}
