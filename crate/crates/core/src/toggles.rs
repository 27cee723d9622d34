//! Events decide when tree extension stops; selectors decide which edge of
//! the current subpath is evaluated next.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{EdgeId, VertexId};
use crate::tree::{EdgeStatus, Heuristic, LazyTree};

#[derive(Debug, Error, PartialEq)]
pub enum ToggleError {
    #[error("unknown event tag `{0}` (expected sp, cd, hp or se)")]
    UnknownEvent(String),
    #[error("unknown selector tag `{0}` (expected f, a or ff)")]
    UnknownSelector(String),
    #[error("unknown preset `{0}` (expected lazysp, lwa, lra or gls-se)")]
    UnknownPreset(String),
    #[error("constant-depth alpha must be at least 1, got {0}")]
    BadAlpha(usize),
    #[error("subpath-existence delta must lie in (0, 1], got {0}")]
    BadDelta(f64),
    #[error("`{0}` needs a parameter: --alpha for cd and lra, --delta for se and gls-se")]
    MissingParameter(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EventKind {
    ShortestPath,
    ConstantDepth(usize),
    HeuristicProgress,
    SubpathExistence(f64),
}

impl EventKind {
    pub fn constant_depth(alpha: usize) -> Result<Self, ToggleError> {
        if alpha == 0 {
            return Err(ToggleError::BadAlpha(alpha));
        }
        Ok(EventKind::ConstantDepth(alpha))
    }

    pub fn subpath_existence(delta: f64) -> Result<Self, ToggleError> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(ToggleError::BadDelta(delta));
        }
        Ok(EventKind::SubpathExistence(delta))
    }

    /// Builds an event from its CLI tag; `cd` needs `alpha` and `se` needs `delta`.
    pub fn from_tag(tag: &str, alpha: Option<usize>, delta: Option<f64>) -> Result<Self, ToggleError> {
        match tag {
            "sp" => Ok(EventKind::ShortestPath),
            "hp" => Ok(EventKind::HeuristicProgress),
            "cd" => EventKind::constant_depth(alpha.ok_or(ToggleError::MissingParameter("cd"))?),
            "se" => EventKind::subpath_existence(delta.ok_or(ToggleError::MissingParameter("se"))?),
            other => Err(ToggleError::UnknownEvent(other.to_string())),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            EventKind::ShortestPath => "sp",
            EventKind::ConstantDepth(_) => "cd",
            EventKind::HeuristicProgress => "hp",
            EventKind::SubpathExistence(_) => "se",
        }
    }

    pub fn alpha(&self) -> Option<usize> {
        match *self {
            EventKind::ConstantDepth(a) => Some(a),
            _ => None,
        }
    }

    pub fn delta(&self) -> Option<f64> {
        match *self {
            EventKind::SubpathExistence(d) => Some(d),
            _ => None,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::ConstantDepth(a) => write!(f, "cd({a})"),
            EventKind::SubpathExistence(d) => write!(f, "se({d})"),
            other => f.write_str(other.tag()),
        }
    }
}

/// An event plus the per-run state it needs.
#[derive(Clone, Debug)]
pub struct Event {
    kind: EventKind,
    h_min: f64,
}

impl Event {
    pub fn new(kind: EventKind) -> Self {
        if kind == EventKind::SubpathExistence(1.0) {
            log::warn!("subpath-existence with delta = 1 triggers on every unevaluated subpath");
        }
        Event {
            kind,
            h_min: f64::INFINITY,
        }
    }

    pub fn kind(&self) -> EventKind {
        self.kind
    }

    /// Smallest heuristic value over the child endpoints of evaluated edges.
    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    /// Decides whether extension halts at `leaf`, the vertex about to be settled.
    /// Never halts at a non-target leaf whose subpath is fully evaluated.
    pub fn triggered(&self, tree: &LazyTree<'_>, leaf: VertexId, target: VertexId) -> bool {
        if leaf == target {
            return true;
        }
        let stats = tree.subpath_stats(leaf);
        if stats.unknown == 0 {
            return false;
        }
        match self.kind {
            EventKind::ShortestPath => false,
            EventKind::ConstantDepth(alpha) => stats.unknown >= alpha,
            EventKind::HeuristicProgress => tree.heuristic().value(leaf) < self.h_min,
            EventKind::SubpathExistence(delta) => stats.unknown_prior_product <= delta,
        }
    }

    /// Records that the edge entering `child` on the current subpath was evaluated.
    pub fn observe(&mut self, child: VertexId, heuristic: &Heuristic) {
        self.h_min = self.h_min.min(heuristic.value(child));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SelectorKind {
    Forward,
    Alternate,
    FailFast,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 3] = [SelectorKind::Forward, SelectorKind::Alternate, SelectorKind::FailFast];

    pub fn tag(&self) -> &'static str {
        match self {
            SelectorKind::Forward => "f",
            SelectorKind::Alternate => "a",
            SelectorKind::FailFast => "ff",
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SelectorKind {
    type Err = ToggleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f" => Ok(SelectorKind::Forward),
            "a" => Ok(SelectorKind::Alternate),
            "ff" => Ok(SelectorKind::FailFast),
            other => Err(ToggleError::UnknownSelector(other.to_string())),
        }
    }
}

/// A selector plus its invocation counter.
#[derive(Clone, Debug)]
pub struct Selector {
    kind: SelectorKind,
    invocations: u64,
}

impl Selector {
    pub fn new(kind: SelectorKind) -> Self {
        Selector { kind, invocations: 0 }
    }

    pub fn kind(&self) -> SelectorKind {
        self.kind
    }

    pub fn invocations(&self) -> u64 {
        self.invocations
    }

    /// Picks one of `candidates`, the unevaluated subpath edges listed from
    /// source to leaf with their priors. Returns the index into `candidates`.
    pub fn select(&mut self, candidates: &[(EdgeId, f64)]) -> Option<usize> {
        if candidates.is_empty() {
            return None;
        }
        self.invocations += 1;
        let idx = match self.kind {
            SelectorKind::Forward => 0,
            SelectorKind::Alternate if self.invocations % 2 == 1 => 0,
            SelectorKind::Alternate => candidates.len() - 1,
            SelectorKind::FailFast => {
                let mut best = 0;
                for (i, &(_, p)) in candidates.iter().enumerate().skip(1) {
                    if p < candidates[best].1 {
                        best = i;
                    }
                }
                best
            }
        };
        Some(idx)
    }
}

/// Unevaluated edges of `path_edges` in order, paired with their priors.
pub fn candidates(tree: &LazyTree<'_>, path_edges: &[EdgeId]) -> Vec<(EdgeId, f64)> {
    path_edges
        .iter()
        .filter(|&&e| tree.status(e) == EdgeStatus::Unknown)
        .map(|&e| (e, tree.graph().edge(e).prior))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    LazySp,
    Lwa,
    Lra,
    GlsSe,
}

impl FromStr for Preset {
    type Err = ToggleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lazysp" => Ok(Preset::LazySp),
            "lwa" => Ok(Preset::Lwa),
            "lra" => Ok(Preset::Lra),
            "gls-se" => Ok(Preset::GlsSe),
            other => Err(ToggleError::UnknownPreset(other.to_string())),
        }
    }
}

/// Event and selector reproducing a named lazy search algorithm. `selector`
/// only matters for `lazysp`, `alpha` for `lra` and `delta` for `gls-se`.
pub fn preset(
    name: &str,
    selector: SelectorKind,
    alpha: Option<usize>,
    delta: Option<f64>,
) -> Result<(EventKind, SelectorKind), ToggleError> {
    match name.parse::<Preset>()? {
        Preset::LazySp => Ok((EventKind::ShortestPath, selector)),
        Preset::Lwa => Ok((EventKind::ConstantDepth(1), SelectorKind::Forward)),
        Preset::Lra => Ok((
            EventKind::constant_depth(alpha.ok_or(ToggleError::MissingParameter("lra"))?)?,
            SelectorKind::Forward,
        )),
        Preset::GlsSe => Ok((
            EventKind::subpath_existence(delta.ok_or(ToggleError::MissingParameter("gls-se"))?)?,
            SelectorKind::FailFast,
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeSpec, Graph};

    fn chain(priors: &[f64]) -> Graph {
        let n = priors.len() + 1;
        let edges = priors
            .iter()
            .enumerate()
            .map(|(i, &p)| EdgeSpec::new(i, i + 1, 1.0).with_prior(p))
            .collect();
        Graph::new(1, (0..n).map(|i| vec![i as f64]).collect(), edges).unwrap()
    }

    /// Extends the chain until `event` triggers and returns the leaf.
    fn leaf_for(graph: &Graph, event: &Event) -> VertexId {
        let h = Heuristic::zero(graph);
        let target = VertexId(graph.vertex_count() - 1);
        let mut tree = LazyTree::new(graph, &h, VertexId(0)).unwrap();
        tree.extend(|t, v| event.triggered(t, v, target)).unwrap()
    }

    #[test]
    fn shortest_path_triggers_only_at_target() {
        let g = chain(&[0.5, 0.5, 0.5]);
        assert_eq!(leaf_for(&g, &Event::new(EventKind::ShortestPath)), VertexId(3));
    }

    #[test]
    fn constant_depth_one_stops_after_one_edge() {
        let g = chain(&[0.5, 0.5, 0.5]);
        assert_eq!(leaf_for(&g, &Event::new(EventKind::ConstantDepth(1))), VertexId(1));
        assert_eq!(leaf_for(&g, &Event::new(EventKind::ConstantDepth(2))), VertexId(2));
        assert_eq!(leaf_for(&g, &Event::new(EventKind::ConstantDepth(100))), VertexId(3));
    }

    #[test]
    fn subpath_existence_products() {
        let g = chain(&[0.9, 0.6, 0.9, 0.9]);
        // 0.9 * 0.6 = 0.54 > 0.5, then 0.486 <= 0.5.
        assert_eq!(leaf_for(&g, &Event::new(EventKind::SubpathExistence(0.5))), VertexId(3));
        let ones = chain(&[1.0, 1.0, 1.0]);
        assert_eq!(leaf_for(&ones, &Event::new(EventKind::SubpathExistence(0.5))), VertexId(3));
    }

    #[test]
    fn heuristic_progress_bootstraps_at_first_vertex() {
        let g = chain(&[0.5, 0.5, 0.5]);
        let mut ev = Event::new(EventKind::HeuristicProgress);
        assert_eq!(ev.h_min(), f64::INFINITY);
        assert_eq!(leaf_for(&g, &ev), VertexId(1));
        let h = Heuristic::from_values(vec![3.0, 2.0, 1.0, 0.0]);
        ev.observe(VertexId(1), &h);
        ev.observe(VertexId(0), &h);
        assert_eq!(ev.h_min(), 2.0);
    }

    #[test]
    fn guard_refuses_fully_evaluated_subpath() {
        let g = chain(&[0.5, 0.5]);
        let h = Heuristic::zero(&g);
        let mut tree = LazyTree::new(&g, &h, VertexId(0)).unwrap();
        tree.apply_evaluation(EdgeId(0), true).unwrap();
        let ev = Event::new(EventKind::ConstantDepth(1));
        let leaf = tree.extend(|t, v| ev.triggered(t, v, VertexId(2))).unwrap();
        assert_eq!(leaf, VertexId(2));
    }

    #[test]
    fn selectors_on_examples() {
        let one = [(EdgeId(4), 0.3)];
        for kind in SelectorKind::ALL {
            assert_eq!(Selector::new(kind).select(&one), Some(0));
        }
        let three = [(EdgeId(0), 0.9), (EdgeId(1), 0.2), (EdgeId(2), 0.6)];
        assert_eq!(Selector::new(SelectorKind::FailFast).select(&three), Some(1));
        let mut alt = Selector::new(SelectorKind::Alternate);
        assert_eq!(alt.select(&three), Some(0));
        assert_eq!(alt.select(&three), Some(2));
        assert_eq!(alt.select(&three), Some(0));
        assert_eq!(alt.invocations(), 3);
        assert_eq!(Selector::new(SelectorKind::Forward).select(&[]), None);
    }

    #[test]
    fn failfast_ties_go_to_source() {
        let tied = [(EdgeId(7), 0.4), (EdgeId(3), 0.2), (EdgeId(5), 0.2)];
        assert_eq!(Selector::new(SelectorKind::FailFast).select(&tied), Some(1));
    }

    #[test]
    fn presets_match_table() {
        assert_eq!(
            preset("lwa", SelectorKind::FailFast, None, None).unwrap(),
            (EventKind::ConstantDepth(1), SelectorKind::Forward)
        );
        assert_eq!(
            preset("lazysp", SelectorKind::Forward, None, None).unwrap(),
            (EventKind::ShortestPath, SelectorKind::Forward)
        );
        assert_eq!(
            preset("gls-se", SelectorKind::Forward, None, Some(0.01)).unwrap(),
            (EventKind::SubpathExistence(0.01), SelectorKind::FailFast)
        );
        assert_eq!(
            preset("lra", SelectorKind::Forward, Some(4), None).unwrap(),
            (EventKind::ConstantDepth(4), SelectorKind::Forward)
        );
        assert!(matches!(preset("astar", SelectorKind::Forward, None, None), Err(ToggleError::UnknownPreset(_))));
        assert_eq!(
            preset("lra", SelectorKind::Forward, None, None),
            Err(ToggleError::MissingParameter("lra"))
        );
    }

    #[test]
    fn tags_round_trip() {
        for kind in SelectorKind::ALL {
            assert_eq!(kind.tag().parse::<SelectorKind>().unwrap(), kind);
        }
        assert_eq!(EventKind::from_tag("cd", Some(3), None).unwrap(), EventKind::ConstantDepth(3));
        assert_eq!(EventKind::from_tag("se", None, Some(0.2)).unwrap().tag(), "se");
        assert_eq!(EventKind::from_tag("se", None, Some(0.0)), Err(ToggleError::BadDelta(0.0)));
        assert_eq!(EventKind::from_tag("cd", Some(0), None), Err(ToggleError::BadAlpha(0)));
        assert!(EventKind::from_tag("xx", None, None).is_err());
    }
}
