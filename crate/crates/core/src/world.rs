//! Ground-truth edge validity: explicit tables, 2D occupancy bitmaps,
//! parametric obstacle generators and prior estimation.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Poisson};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{EdgeId, Graph};

/// Start corner kept free in every generated environment.
pub const START: [f64; 2] = [0.05, 0.05];
/// Goal corner kept free in every generated environment.
pub const GOAL: [f64; 2] = [0.95, 0.95];

pub const MIN_RESOLUTION: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("edge {0} is not covered by this world")]
    UnknownEdge(EdgeId),
    #[error("bitmap worlds need 2D vertex positions, graph has dimension {0}")]
    NotPlanar(usize),
    #[error("grid must be rectangular with at least {MIN_RESOLUTION} cells per side, got {rows}x{cols}")]
    BadGrid { rows: usize, cols: usize },
    #[error("no training worlds given")]
    EmptyTrainingSet,
    #[error("unknown environment '{0}' (expected square|twowall|forest|maze)")]
    UnknownEnv(String),
}

/// Oracle answering whether an edge is collision free.
pub trait World: Sync {
    fn evaluate(&self, graph: &Graph, edge: EdgeId) -> Result<bool, WorldError>;
}

/// Validity table indexed by edge id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitWorld {
    validity: Vec<bool>,
}

impl ExplicitWorld {
    pub fn new(validity: Vec<bool>) -> Self {
        ExplicitWorld { validity }
    }

    pub fn all_valid(edges: usize) -> Self {
        ExplicitWorld::new(vec![true; edges])
    }

    /// Evaluates every edge of `graph` in another world once.
    pub fn snapshot<W: World + ?Sized>(world: &W, graph: &Graph) -> Result<Self, WorldError> {
        let validity = (0..graph.edge_count())
            .into_par_iter()
            .map(|i| world.evaluate(graph, EdgeId(i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExplicitWorld { validity })
    }

    pub fn validity(&self) -> &[bool] {
        &self.validity
    }

    pub fn len(&self) -> usize {
        self.validity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.validity.is_empty()
    }
}

impl World for ExplicitWorld {
    fn evaluate(&self, _graph: &Graph, edge: EdgeId) -> Result<bool, WorldError> {
        self.validity
            .get(edge.0)
            .copied()
            .ok_or(WorldError::UnknownEdge(edge))
    }
}

/// Occupancy grid over the unit square. Row 0 covers the lowest `y` band,
/// column 0 the lowest `x` band.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitmapWorld {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl BitmapWorld {
    pub fn empty(resolution: usize) -> Result<Self, WorldError> {
        BitmapWorld::from_cells(resolution, resolution, vec![false; resolution * resolution])
    }

    pub fn from_cells(rows: usize, cols: usize, cells: Vec<bool>) -> Result<Self, WorldError> {
        if rows < MIN_RESOLUTION || cols < MIN_RESOLUTION || cells.len() != rows * cols {
            return Err(WorldError::BadGrid { rows, cols });
        }
        Ok(BitmapWorld { rows, cols, cells })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Cells per unit length along the finer axis.
    pub fn resolution(&self) -> usize {
        self.rows.max(self.cols)
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    #[inline]
    pub fn occupied_cell(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    pub fn set_cell(&mut self, row: usize, col: usize, occupied: bool) {
        self.cells[row * self.cols + col] = occupied;
    }

    #[inline]
    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let c = ((x * self.cols as f64).floor().max(0.0) as usize).min(self.cols - 1);
        let r = ((y * self.rows as f64).floor().max(0.0) as usize).min(self.rows - 1);
        (r, c)
    }

    #[inline]
    pub fn occupied_at(&self, x: f64, y: f64) -> bool {
        let (r, c) = self.cell_of(x, y);
        self.occupied_cell(r, c)
    }

    /// Cell centre in world coordinates.
    fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            (col as f64 + 0.5) / self.cols as f64,
            (row as f64 + 0.5) / self.rows as f64,
        )
    }

    /// True iff the segment touches no occupied cell when sampled at a step
    /// of at most half a cell.
    pub fn segment_free(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let step = 0.5 / self.resolution() as f64;
        let n = (len / step).ceil().max(1.0) as usize;
        (0..=n).all(|k| {
            let t = k as f64 / n as f64;
            !self.occupied_at(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        })
    }

    fn fill_where(&mut self, mut inside: impl FnMut(f64, f64) -> bool) {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let (x, y) = self.cell_center(r, c);
                if inside(x, y) {
                    self.set_cell(r, c, true);
                }
            }
        }
    }

    fn fill_rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64) {
        self.fill_where(|x, y| x >= x0 && x <= x1 && y >= y0 && y <= y1);
    }

    fn clear_disc(&mut self, center: [f64; 2], radius: f64) {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let (x, y) = self.cell_center(r, c);
                if (x - center[0]).hypot(y - center[1]) <= radius {
                    self.set_cell(r, c, false);
                }
            }
        }
    }

    /// 4-connected flood fill between the cells containing `from` and `to`.
    pub fn cells_connected(&self, from: [f64; 2], to: [f64; 2]) -> bool {
        let start = self.cell_of(from[0], from[1]);
        let goal = self.cell_of(to[0], to[1]);
        if self.occupied_cell(start.0, start.1) || self.occupied_cell(goal.0, goal.1) {
            return false;
        }
        let mut seen = vec![false; self.cells.len()];
        let mut queue = VecDeque::from([start]);
        seen[start.0 * self.cols + start.1] = true;
        while let Some((r, c)) = queue.pop_front() {
            if (r, c) == goal {
                return true;
            }
            let mut push = |r: usize, c: usize| {
                let i = r * self.cols + c;
                if !seen[i] && !self.cells[i] {
                    seen[i] = true;
                    queue.push_back((r, c));
                }
            };
            if r > 0 {
                push(r - 1, c);
            }
            if r + 1 < self.rows {
                push(r + 1, c);
            }
            if c > 0 {
                push(r, c - 1);
            }
            if c + 1 < self.cols {
                push(r, c + 1);
            }
        }
        false
    }

    /// Number of 4-connected occupied components.
    pub fn obstacle_components(&self) -> usize {
        let mut seen = vec![false; self.cells.len()];
        let mut count = 0;
        for start in 0..self.cells.len() {
            if !self.cells[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                let (r, c) = (i / self.cols, i % self.cols);
                let mut nbrs = Vec::with_capacity(4);
                if r > 0 {
                    nbrs.push(i - self.cols);
                }
                if r + 1 < self.rows {
                    nbrs.push(i + self.cols);
                }
                if c > 0 {
                    nbrs.push(i - 1);
                }
                if c + 1 < self.cols {
                    nbrs.push(i + 1);
                }
                for j in nbrs {
                    if self.cells[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        count
    }
}

impl World for BitmapWorld {
    fn evaluate(&self, graph: &Graph, edge: EdgeId) -> Result<bool, WorldError> {
        if graph.dim() != 2 {
            return Err(WorldError::NotPlanar(graph.dim()));
        }
        if edge.0 >= graph.edge_count() {
            return Err(WorldError::UnknownEdge(edge));
        }
        let (u, v) = graph.edge(edge).endpoints;
        let (a, b) = (graph.position(u), graph.position(v));
        Ok(self.segment_free([a[0], a[1]], [b[0], b[1]]))
    }
}

/// Either kind of world, as read from a world file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AnyWorld {
    Explicit(ExplicitWorld),
    Bitmap(BitmapWorld),
}

impl World for AnyWorld {
    fn evaluate(&self, graph: &Graph, edge: EdgeId) -> Result<bool, WorldError> {
        match self {
            AnyWorld::Explicit(w) => w.evaluate(graph, edge),
            AnyWorld::Bitmap(w) => w.evaluate(graph, edge),
        }
    }
}

impl<W: World + ?Sized> World for &W {
    fn evaluate(&self, graph: &Graph, edge: EdgeId) -> Result<bool, WorldError> {
        (**self).evaluate(graph, edge)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EnvKind {
    Square,
    TwoWall,
    Forest,
    Maze,
}

impl EnvKind {
    pub const ALL: [EnvKind; 4] = [EnvKind::Square, EnvKind::TwoWall, EnvKind::Forest, EnvKind::Maze];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Square => "square",
            EnvKind::TwoWall => "twowall",
            EnvKind::Forest => "forest",
            EnvKind::Maze => "maze",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(EnvKind::Square),
            "twowall" | "two_wall" | "two-wall" => Ok(EnvKind::TwoWall),
            "forest" => Ok(EnvKind::Forest),
            "maze" => Ok(EnvKind::Maze),
            other => Err(WorldError::UnknownEnv(other.to_string())),
        }
    }
}

/// Parameters of the obstacle families. Ranges are `(low, high)` for uniform
/// draws.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvParams {
    pub resolution: usize,
    /// Radius of the disc kept free around the start and goal corners.
    pub clearance: f64,
    pub square_side: (f64, f64),
    pub square_center: (f64, f64),
    pub wall_positions: [f64; 2],
    pub wall_jitter: f64,
    pub wall_thickness: f64,
    pub gap_height: (f64, f64),
    /// Expected disc count is `forest_density * 100`.
    pub forest_density: f64,
    pub disc_radius: (f64, f64),
    /// Maze cells per side; the corridor width is `1 / maze_cells`.
    pub maze_cells: usize,
    pub maze_wall_thickness: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        EnvParams {
            resolution: 256,
            clearance: 0.03,
            square_side: (0.2, 0.4),
            square_center: (0.3, 0.7),
            wall_positions: [1.0 / 3.0, 2.0 / 3.0],
            wall_jitter: 0.02,
            wall_thickness: 0.04,
            gap_height: (0.1, 0.2),
            forest_density: 0.3,
            disc_radius: (0.02, 0.05),
            maze_cells: 8,
            maze_wall_thickness: 0.02,
        }
    }
}

impl EnvParams {
    /// Clamps every parameter to its documented range.
    pub fn clamped(&self) -> EnvParams {
        fn range(r: (f64, f64), lo: f64, hi: f64) -> (f64, f64) {
            let a = r.0.clamp(lo, hi);
            let b = r.1.clamp(lo, hi);
            (a.min(b), a.max(b))
        }
        EnvParams {
            resolution: self.resolution.clamp(MIN_RESOLUTION, 4096),
            clearance: self.clearance.clamp(0.0, 0.05),
            square_side: range(self.square_side, 0.0, 0.5),
            square_center: range(self.square_center, 0.25, 0.75),
            wall_positions: [
                self.wall_positions[0].clamp(0.15, 0.85),
                self.wall_positions[1].clamp(0.15, 0.85),
            ],
            wall_jitter: self.wall_jitter.clamp(0.0, 0.05),
            wall_thickness: self.wall_thickness.clamp(0.0, 0.1),
            gap_height: range(self.gap_height, 0.02, 0.5),
            forest_density: self.forest_density.clamp(0.0, 5.0),
            disc_radius: range(self.disc_radius, 0.0, 0.1),
            maze_cells: self.maze_cells.clamp(2, 12),
            maze_wall_thickness: self.maze_wall_thickness.clamp(0.0, 0.04),
        }
    }
}

/// A generated environment and the seed that actually produced it.
#[derive(Clone, Debug)]
pub struct GeneratedWorld {
    pub world: BitmapWorld,
    pub requested_seed: u64,
    pub seed: u64,
}

/// Seeded obstacle layout. Layouts without a free start→goal corridor are
/// regenerated from `seed + 1`, `seed + 2`, ...
pub fn generate_world(env: EnvKind, seed: u64, params: &EnvParams) -> GeneratedWorld {
    let params = params.clamped();
    let mut s = seed;
    loop {
        let world = draw_world(env, s, &params);
        if world.cells_connected(START, GOAL) {
            if s != seed {
                log::warn!("{env} world seed {seed} had no free corridor; substituted seed {s}");
            }
            return GeneratedWorld {
                world,
                requested_seed: seed,
                seed: s,
            };
        }
        s = s.wrapping_add(1);
    }
}

fn draw_world(env: EnvKind, seed: u64, p: &EnvParams) -> BitmapWorld {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut w = BitmapWorld::empty(p.resolution).expect("resolution clamped");
    let uniform = |rng: &mut SplitMix64, r: (f64, f64)| {
        if r.1 > r.0 {
            rng.random_range(r.0..r.1)
        } else {
            r.0
        }
    };
    match env {
        EnvKind::Square => {
            let side = uniform(&mut rng, p.square_side);
            let cx = uniform(&mut rng, p.square_center);
            let cy = uniform(&mut rng, p.square_center);
            let h = side / 2.0;
            w.fill_rect(cx - h, cy - h, cx + h, cy + h);
        }
        EnvKind::TwoWall => {
            for &x in &p.wall_positions {
                let x = x + uniform(&mut rng, (-p.wall_jitter, p.wall_jitter));
                let gap = uniform(&mut rng, p.gap_height);
                let gy = uniform(&mut rng, (0.0, 1.0 - gap));
                let t = p.wall_thickness / 2.0;
                w.fill_where(|px, py| (px - x).abs() <= t && !(py >= gy && py <= gy + gap));
            }
        }
        EnvKind::Forest => {
            let lambda = p.forest_density * 100.0;
            let count = if lambda > 0.0 {
                Poisson::new(lambda).expect("positive rate").sample(&mut rng) as usize
            } else {
                0
            };
            let discs: Vec<(f64, f64, f64)> = (0..count)
                .map(|_| {
                    let x = rng.random::<f64>();
                    let y = rng.random::<f64>();
                    (x, y, uniform(&mut rng, p.disc_radius))
                })
                .collect();
            w.fill_where(|px, py| discs.iter().any(|&(x, y, r)| (px - x).hypot(py - y) <= r));
        }
        EnvKind::Maze => {
            let m = p.maze_cells;
            let mut walls = Vec::new();
            divide(&mut rng, 0, 0, m, m, &mut walls);
            let cell = 1.0 / m as f64;
            let t = p.maze_wall_thickness / 2.0;
            for wall in walls {
                let (x0, y0, x1, y1) = match wall {
                    MazeWall::Horizontal { y, x0, x1 } => {
                        let yy = y as f64 * cell;
                        (x0 as f64 * cell, yy - t, x1 as f64 * cell, yy + t)
                    }
                    MazeWall::Vertical { x, y0, y1 } => {
                        let xx = x as f64 * cell;
                        (xx - t, y0 as f64 * cell, xx + t, y1 as f64 * cell)
                    }
                };
                w.fill_rect(x0, y0, x1, y1);
            }
        }
    }
    w.clear_disc(START, p.clearance);
    w.clear_disc(GOAL, p.clearance);
    w
}

/// Wall segment on the maze lattice, in maze-cell units.
enum MazeWall {
    Horizontal { y: usize, x0: usize, x1: usize },
    Vertical { x: usize, y0: usize, y1: usize },
}

/// Recursive division: split the chamber with one wall containing a single
/// one-cell gap, then recurse on both halves.
fn divide(rng: &mut SplitMix64, x: usize, y: usize, w: usize, h: usize, out: &mut Vec<MazeWall>) {
    if w < 2 || h < 2 {
        return;
    }
    let horizontal = match w.cmp(&h) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => rng.random::<bool>(),
    };
    if horizontal {
        let wy = y + rng.random_range(1..h);
        let gap = x + rng.random_range(0..w);
        if gap > x {
            out.push(MazeWall::Horizontal { y: wy, x0: x, x1: gap });
        }
        if gap + 1 < x + w {
            out.push(MazeWall::Horizontal {
                y: wy,
                x0: gap + 1,
                x1: x + w,
            });
        }
        divide(rng, x, y, w, wy - y, out);
        divide(rng, x, wy, w, y + h - wy, out);
    } else {
        let wx = x + rng.random_range(1..w);
        let gap = y + rng.random_range(0..h);
        if gap > y {
            out.push(MazeWall::Vertical { x: wx, y0: y, y1: gap });
        }
        if gap + 1 < y + h {
            out.push(MazeWall::Vertical {
                x: wx,
                y0: gap + 1,
                y1: y + h,
            });
        }
        divide(rng, x, y, wx - x, h, out);
        divide(rng, wx, y, x + w - wx, h, out);
    }
}

/// Laplace smoothing pseudo-count used by [`estimate_priors`].
pub const PRIOR_SMOOTHING: f64 = 1.0;

/// Per-edge validity probabilities estimated from training worlds.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorModel {
    priors: Vec<f64>,
    p_max: f64,
}

impl PriorModel {
    pub fn new(priors: Vec<f64>) -> Self {
        let p_max = priors.iter().copied().fold(0.0, f64::max);
        PriorModel { priors, p_max }
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn into_priors(self) -> Vec<f64> {
        self.priors
    }
}

/// `prior(e) = (valid + 1) / (n + 2)` over `n` training worlds.
pub fn estimate_priors<W: World>(graph: &Graph, worlds: &[W]) -> Result<PriorModel, WorldError> {
    if worlds.is_empty() {
        return Err(WorldError::EmptyTrainingSet);
    }
    let n = worlds.len() as f64;
    let priors = (0..graph.edge_count())
        .into_par_iter()
        .map(|i| {
            let mut valid = 0usize;
            for w in worlds {
                if w.evaluate(graph, EdgeId(i))? {
                    valid += 1;
                }
            }
            Ok((valid as f64 + PRIOR_SMOOTHING) / (n + 2.0 * PRIOR_SMOOTHING))
        })
        .collect::<Result<Vec<_>, WorldError>>()?;
    Ok(PriorModel::new(priors))
}
