//! Command-line interface: argument types and one function per subcommand.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use gls::analysis::{build_counterexample, CounterExample};
use gls::engine::{gls_run, verify_certificate, CostModel};
use gls::format::{load_graph, parse_priors, parse_world, save_graph, write_priors, write_world};
use gls::sampling::default_radius;
use gls::stats::fit_through_origin;
use gls::world::estimate_priors;
use gls::{preset, AnyWorld, EnvKind, EventKind, Graph, Heuristic, SelectorKind, VertexId};

use crate::error::BenchError;
use crate::experiment::{
    config_grid, prepare, roadmap, run_configs, sample_worlds, scaling_point, tune_delta, Problem, ScalingRow,
    SeededWorld, Setup, DEFAULT_GAMMA, DELTA_GRID, TEST_STREAM, TRAIN_STREAM,
};
use crate::report::{rank_table, render_summary, summarize, write_pareto, write_rows, write_scaling};

#[derive(Debug, Parser)]
#[command(name = "gls-bench", version, about = "Generalized lazy search benchmarks on 2D roadmaps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a Halton roadmap plus training and test worlds.
    Generate(GenerateArgs),
    /// Estimate edge priors from a directory of worlds.
    Train(TrainArgs),
    /// Run event/selector configurations on test worlds.
    Bench(BenchArgs),
    /// Rewire counts on the thrashing construction.
    Counterexample(CounterexampleArgs),
    /// Shortest-path vs subpath-existence cost over graph size or density.
    Scaling(ScalingArgs),
    /// Median evaluations, rewires and cost over a grid of delta values.
    Pareto(ParetoArgs),
}

/// Parameters of a generated problem.
#[derive(Clone, Debug, Args)]
pub struct ProblemArgs {
    /// square | twowall | forest | maze
    #[arg(long, default_value = "twowall")]
    pub env: EnvKind,
    /// Roadmap vertex count.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Connection constant in `r = gamma (ln n / n)^(1/2)`.
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = 50)]
    pub train: usize,
    #[arg(long, default_value_t = 50)]
    pub test: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl ProblemArgs {
    fn setup(&self) -> Result<Setup, BenchError> {
        if self.n < 2 || self.train == 0 || self.test == 0 {
            return Err(BenchError::Usage("--n must be at least 2, --train and --test at least 1".into()));
        }
        if self.gamma.is_nan() || self.gamma <= 0.0 {
            return Err(BenchError::Usage(format!("--gamma must be positive, got {}", self.gamma)));
        }
        let mut setup = Setup::desk_scale(self.env, self.seed);
        setup.n = self.n;
        setup.gamma = self.gamma;
        setup.train = self.train;
        setup.test = self.test;
        Ok(setup)
    }
}

/// Files to read instead of generating a problem.
#[derive(Clone, Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// `<edge_id> <prior>` lines overriding the priors stored in the graph.
    #[arg(long)]
    pub priors: Option<PathBuf>,
    /// Directory of `.world` files.
    #[arg(long)]
    pub worlds: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub source: usize,
    #[arg(long, default_value_t = 1)]
    pub target: usize,
}

#[derive(Clone, Debug, Args)]
pub struct CostArgs {
    /// Seconds per edge evaluation. Defaults to 29.04 times the rewire cost.
    #[arg(long)]
    pub ceval: Option<f64>,
    /// Seconds per vertex rewire.
    #[arg(long)]
    pub crwr: Option<f64>,
}

impl CostArgs {
    pub fn model(&self) -> Result<CostModel, BenchError> {
        let (ceval, crwr) = match (self.ceval, self.crwr) {
            (None, None) => return Ok(CostModel::default()),
            (Some(e), Some(r)) => (e, r),
            (Some(e), None) => (e, e / CostModel::DEFAULT_RATIO),
            (None, Some(r)) => (CostModel::DEFAULT_RATIO * r, r),
        };
        CostModel::new(ceval, crwr).map_err(|e| BenchError::Usage(e.to_string()))
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub worlds: PathBuf,
    /// Prior file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub cost: CostArgs,
    /// Comma-separated event tags: sp, cd, hp, se.
    #[arg(long, value_delimiter = ',', default_value = "sp")]
    pub event: Vec<String>,
    /// Comma-separated selector tags: f, a, ff.
    #[arg(long, value_delimiter = ',', default_value = "f,a,ff")]
    pub selector: Vec<SelectorKind>,
    /// Depth for `cd`.
    #[arg(long)]
    pub alpha: Option<usize>,
    /// Threshold for `se`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Chain lengths N.
    #[arg(long = "chain", value_delimiter = ',', default_value = "25,50,100,200")]
    pub chain: Vec<usize>,
    /// Fan sizes l (even).
    #[arg(long = "fan", value_delimiter = ',', default_value = "4,8,16,32")]
    pub fan: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub cost: CostArgs,
    /// Graph sizes to sweep.
    #[arg(long, value_delimiter = ',', conflicts_with = "densities")]
    pub sizes: Vec<usize>,
    /// Forest densities to sweep at fixed `--n`.
    #[arg(long, value_delimiter = ',')]
    pub densities: Vec<f64>,
    /// Fixed threshold; tuned per point on the training worlds when absent.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub cost: CostArgs,
    #[arg(long, default_value = "ff")]
    pub selector: SelectorKind,
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SIZES: [usize; 5] = [250, 500, 1000, 2000, 4000];

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), BenchError> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Counterexample(a) => cmd_counterexample(&a, out),
        Command::Scaling(a) => cmd_scaling(&a, out),
        Command::Pareto(a) => cmd_pareto(&a, out),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| BenchError::io(path, e))
}

fn read_text(path: &Path) -> Result<String, BenchError> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => BenchError::MissingInput(path.display().to_string()),
        _ => BenchError::io(path, e),
    })
}

fn report(out: &mut dyn Write, text: &str) -> Result<(), BenchError> {
    out.write_all(text.as_bytes()).map_err(|e| BenchError::io("<stdout>", e))
}

pub fn read_graph(path: &Path) -> Result<Graph, BenchError> {
    let text = read_text(path)?;
    load_graph(text.as_bytes()).map_err(|source| BenchError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads every `*.world` file in `dir` in file-name order. A world without a
/// recorded seed is tagged with its position.
pub fn read_worlds(dir: &Path) -> Result<Vec<SeededWorld>, BenchError> {
    let entries = fs::read_dir(dir).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => BenchError::MissingInput(dir.display().to_string()),
        _ => BenchError::io(dir, e),
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| BenchError::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "world") {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(BenchError::MissingInput(format!("no .world files in {}", dir.display())));
    }
    paths.sort();
    paths
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let file = parse_world(&read_text(path)?).map_err(|source| BenchError::Parse {
                path: path.clone(),
                source,
            })?;
            Ok(SeededWorld {
                seed: file.seed.unwrap_or(i as u64),
                world: file.world,
            })
        })
        .collect()
}

fn world_name(i: usize) -> String {
    format!("{i:04}.world")
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<(), BenchError> {
    let setup = args.problem.setup()?;
    let graph = roadmap(setup.n, setup.gamma)?;
    let mut text = Vec::new();
    save_graph(&graph, &mut text).map_err(|source| BenchError::Parse {
        path: args.out.join("graph.gls"),
        source,
    })?;
    write_file(&args.out.join("graph.gls"), &text)?;

    for (dir, stream, count) in [("train", TRAIN_STREAM, setup.train), ("test", TEST_STREAM, setup.test)] {
        let worlds = sample_worlds(setup.env, setup.seed, stream, count, &setup.params);
        for (i, w) in worlds.iter().enumerate() {
            let path = args.out.join(dir).join(world_name(i));
            write_file(&path, write_world(&w.world, Some(w.seed)).as_bytes())?;
        }
    }

    let radius = default_radius(setup.n, 2, setup.gamma);
    let meta = format!(
        "env {}\nn {}\ngamma {}\nradius {}\nedges {}\nseed {}\ntrain {}\ntest {}\n",
        setup.env,
        setup.n,
        setup.gamma,
        radius,
        graph.edge_count(),
        setup.seed,
        setup.train,
        setup.test
    );
    write_file(&args.out.join("meta.txt"), meta.as_bytes())?;
    report(
        out,
        &format!(
            "wrote {}: {} vertices, {} edges (gamma {}, radius {radius:.5}), {} train and {} test worlds\n",
            args.out.display(),
            graph.vertex_count(),
            graph.edge_count(),
            setup.gamma,
            setup.train,
            setup.test
        ),
    )
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<(), BenchError> {
    let graph = read_graph(&args.graph)?;
    let worlds = read_worlds(&args.worlds)?;
    let plain: Vec<&AnyWorld> = worlds.iter().map(|w| &w.world).collect();
    let model = estimate_priors(&graph, &plain)?;
    write_file(&args.out, write_priors(model.priors()).as_bytes())?;
    report(out, &format!("worlds {}\np_max {}\n", worlds.len(), model.p_max()))
}

/// A problem and the worlds to run it on, read from files when `--graph` is
/// given and generated otherwise. Generated problems use the test worlds
/// unless `training` is set.
fn load_problem(input: &InputArgs, problem: &ProblemArgs, training: bool) -> Result<(Problem, Vec<SeededWorld>), BenchError> {
    let Some(graph_path) = &input.graph else {
        let prepared = prepare(&problem.setup()?)?;
        let worlds = if training { prepared.train } else { prepared.test };
        return Ok((prepared.problem, worlds));
    };
    let worlds_dir = input
        .worlds
        .as_ref()
        .ok_or_else(|| BenchError::Usage("--graph needs --worlds".into()))?;
    let mut graph = read_graph(graph_path)?;
    if let Some(p) = &input.priors {
        let priors = parse_priors(&read_text(p)?).map_err(|source| BenchError::Parse {
            path: p.clone(),
            source,
        })?;
        graph = graph.with_priors(&priors)?;
    }
    let worlds = read_worlds(worlds_dir)?;
    let problem = Problem::new(graph, VertexId(input.source), VertexId(input.target))?;
    Ok((problem, worlds))
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Result<(), BenchError> {
    let cost = args.cost.model()?;
    let events = args
        .event
        .iter()
        .map(|tag| EventKind::from_tag(tag.trim(), args.alpha, args.delta))
        .collect::<Result<Vec<_>, _>>()?;
    if events.is_empty() || args.selector.is_empty() {
        return Err(BenchError::Usage("need at least one event and one selector".into()));
    }
    let configs = config_grid(&events, &args.selector);
    let (problem, worlds) = load_problem(&args.input, &args.problem, false)?;
    let rows = run_configs(args.problem.env.name(), &problem, &worlds, &configs, &cost)?;
    if let Some(bad) = rows.iter().find(|r| r.feasible() && !r.certified) {
        return Err(BenchError::Internal(format!(
            "{} on world {} returned an uncertified path",
            bad.config.label(),
            bad.seed
        )));
    }

    let summary = render_summary(&summarize(&rows, &configs), &rank_table(&rows, &configs));
    match &args.out {
        Some(path) => {
            let mut csv = Vec::new();
            write_rows(&rows, &mut csv)?;
            write_file(path, &csv)?;
            report(out, &summary)
        }
        None => {
            write_rows(&rows, &mut *out)?;
            eprint!("{summary}");
            Ok(())
        }
    }
}

/// Rewire counts of one counter-example cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CounterexampleCell {
    pub n: usize,
    pub l: usize,
    pub edges: usize,
    pub sp_rewires: usize,
    pub hp_rewires: usize,
}

pub fn counterexample_cell(n: usize, l: usize) -> Result<CounterexampleCell, BenchError> {
    let cx = build_counterexample(n, l)?;
    let expected = CounterExample::expected_edge_count(n, l);
    if cx.graph.edge_count() != expected {
        return Err(BenchError::Internal(format!(
            "counter-example (N={n}, l={l}) has {} edges, expected 3N+2l-1 = {expected}",
            cx.graph.edge_count()
        )));
    }
    let h = Heuristic::graph_distance(&cx.graph, cx.target);
    let (sp_event, sp_selector) = preset("lazysp", SelectorKind::Forward, None, None)?;
    let sp = gls_run(&cx.graph, &cx.world, cx.source, cx.target, sp_event, sp_selector, &h)?;
    let hp = gls_run(
        &cx.graph,
        &cx.world,
        cx.source,
        cx.target,
        EventKind::HeuristicProgress,
        SelectorKind::Forward,
        &h,
    )?;
    for r in [&sp, &hp] {
        if !r.feasible() || !verify_certificate(&cx.graph, r) {
            return Err(BenchError::Internal(format!(
                "counter-example (N={n}, l={l}) run did not certify a path"
            )));
        }
    }
    Ok(CounterexampleCell {
        n,
        l,
        edges: expected,
        sp_rewires: sp.vertex_rewires(),
        hp_rewires: hp.vertex_rewires(),
    })
}

/// Least-squares exponents `(a, b)` of `rewires ~ N^a l^b`, fitted on the
/// cells with at least one rewire. `None` when N or l does not vary.
pub fn growth_exponents(cells: &[CounterexampleCell]) -> Option<(f64, f64)> {
    let pts: Vec<[f64; 3]> = cells
        .iter()
        .filter(|c| c.sp_rewires > 0)
        .map(|c| [(c.n as f64).ln(), (c.l as f64).ln(), (c.sp_rewires as f64).ln()])
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let mean = |i: usize| pts.iter().map(|p| p[i]).sum::<f64>() / k;
    let m = [mean(0), mean(1), mean(2)];
    let s = |i: usize, j: usize| pts.iter().map(|p| (p[i] - m[i]) * (p[j] - m[j])).sum::<f64>();
    let (sxx, syy, sxy, sxz, syz) = (s(0, 0), s(1, 1), s(0, 1), s(0, 2), s(1, 2));
    let det = sxx * syy - sxy * sxy;
    if det.abs() < 1e-12 {
        return None;
    }
    Some(((sxz * syy - syz * sxy) / det, (syz * sxx - sxz * sxy) / det))
}

pub fn cmd_counterexample(args: &CounterexampleArgs, out: &mut dyn Write) -> Result<(), BenchError> {
    if args.chain.is_empty() || args.fan.is_empty() {
        return Err(BenchError::Usage("need at least one N and one l".into()));
    }
    let mut cells = Vec::new();
    let mut text = String::from("     N     l  edges  lazysp_rewires  hp_rewires\n");
    for &n in &args.chain {
        for &l in &args.fan {
            let c = counterexample_cell(n, l)?;
            text.push_str(&format!(
                "{:>6} {:>5} {:>6} {:>15} {:>11}\n",
                c.n, c.l, c.edges, c.sp_rewires, c.hp_rewires
            ));
            cells.push(c);
        }
    }
    text.push_str("edge count 3N+2l-1: ok\n");
    let x: Vec<f64> = cells.iter().map(|c| (c.n * c.l) as f64).collect();
    let y: Vec<f64> = cells.iter().map(|c| c.sp_rewires as f64).collect();
    if y.iter().any(|&v| v > 0.0) {
        let fit = fit_through_origin(&x, &y);
        text.push_str(&format!(
            "lazysp rewires ~ c N l: c = {:.4}, R^2 = {:.4}\n",
            fit.slope, fit.r_squared
        ));
    } else {
        text.push_str("lazysp rewires ~ c N l: no rewires to fit\n");
    }
    match growth_exponents(&cells) {
        Some((a, b)) => text.push_str(&format!("growth exponents: N^{a:.3} l^{b:.3}\n")),
        None => text.push_str("growth exponents: need varying N and l\n"),
    }
    let hp_total: usize = cells.iter().map(|c| c.hp_rewires).sum();
    text.push_str(&format!("heuristic-progress rewires over all cells: {hp_total}\n"));
    report(out, &text)
}

pub fn cmd_scaling(args: &ScalingArgs, out: &mut dyn Write) -> Result<(), BenchError> {
    let cost = args.cost.model()?;
    let base = args.problem.setup()?;
    let mut rows: Vec<ScalingRow> = Vec::new();
    if args.densities.is_empty() {
        let sizes = if args.sizes.is_empty() { DEFAULT_SIZES.to_vec() } else { args.sizes.clone() };
        for n in sizes {
            if n < 2 {
                return Err(BenchError::Usage("sizes must be at least 2".into()));
            }
            let mut setup = base.clone();
            setup.n = n;
            rows.push(scaling_point(&setup, "n", n as f64, args.delta, &cost)?);
        }
    } else {
        if base.env != EnvKind::Forest {
            return Err(BenchError::Usage("--densities applies to --env forest".into()));
        }
        for &d in &args.densities {
            let mut setup = base.clone();
            setup.params.forest_density = d;
            rows.push(scaling_point(&setup, "density", d, args.delta, &cost)?);
        }
    }
    match &args.out {
        Some(path) => {
            let mut csv = Vec::new();
            write_scaling(&rows, &mut csv)?;
            write_file(path, &csv)?;
            report(out, &format!("wrote {} points to {}\n", rows.len(), path.display()))
        }
        None => write_scaling(&rows, out),
    }
}

pub fn cmd_pareto(args: &ParetoArgs, out: &mut dyn Write) -> Result<(), BenchError> {
    let cost = args.cost.model()?;
    let grid = if args.grid.is_empty() { DELTA_GRID.to_vec() } else { args.grid.clone() };
    let (problem, worlds) = load_problem(&args.input, &args.problem, true)?;
    let (best, curve) = tune_delta(&problem, &worlds, &grid, args.selector, &cost)?;
    match &args.out {
        Some(path) => {
            let mut csv = Vec::new();
            write_pareto(&curve, &mut csv)?;
            write_file(path, &csv)?;
            report(out, &format!("best_delta {best}\n"))
        }
        None => {
            write_pareto(&curve, &mut *out)?;
            eprintln!("best_delta {best}");
            Ok(())
        }
    }
}
