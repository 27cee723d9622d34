//! The lazily extended shortest-path tree.
//!
//! The tree is grown best-first over the graph under the optimistic
//! assumption that every unevaluated edge is valid. It keeps LPA*-style
//! `g`/`rhs` values so that an invalidated edge only triggers repair of the
//! affected part of the tree: the endpoint that used the edge gets a new
//! `rhs`, becomes inconsistent and is reprocessed by the next [`LazyTree::extend`].
//!
//! Frontier keys are `(min(g, rhs) + h, min(g, rhs), vertex id)`, all
//! ascending. A vertex popped with `g > rhs` is *settled*; the vertex at the
//! top of the queue that is about to be settled is the candidate leaf offered
//! to the event.
//!
//! A rewire is one settlement of a vertex whose parent differs from the
//! parent it had at its previous settlement. First settlements are free, so
//! a run without invalidations never rewires.

use std::collections::BTreeSet;
use std::cmp::Ordering;

use thiserror::Error;

use crate::graph::{EdgeId, Graph, Path, VertexId};
use crate::search::dijkstra;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeStatus {
    Unknown,
    Valid,
    Invalid,
}

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("vertex {0} is not in the graph")]
    NoSuchVertex(VertexId),
    #[error("vertex {0} has no path from the source in the lazy tree")]
    Unreached(VertexId),
    #[error("edge {0} was already evaluated")]
    AlreadyEvaluated(EdgeId),
    #[error("heuristic covers {found} vertices, graph has {expected}")]
    HeuristicSize { expected: usize, found: usize },
}

/// Per-vertex cost-to-go estimates towards a fixed target.
#[derive(Clone, Debug, PartialEq)]
pub struct Heuristic {
    values: Vec<f64>,
}

impl Heuristic {
    pub fn from_values(values: Vec<f64>) -> Self {
        Heuristic { values }
    }

    pub fn zero(graph: &Graph) -> Self {
        Heuristic::from_values(vec![0.0; graph.vertex_count()])
    }

    /// Straight-line distance to `target` in configuration space, shrunk by
    /// a relative `1e-12` so that rounding in the distance computations
    /// cannot make it inconsistent with Euclidean edge weights.
    pub fn euclidean(graph: &Graph, target: VertexId) -> Self {
        Heuristic::from_values(
            (0..graph.vertex_count())
                .map(|v| graph.distance(VertexId(v), target) * (1.0 - 1e-12))
                .collect(),
        )
    }

    /// Shortest-path distance to `target` on the fully unevaluated graph.
    /// Removing edges can only lengthen paths, so this stays admissible and
    /// consistent for every evaluation outcome. Unreachable vertices get `+inf`.
    pub fn graph_distance(graph: &Graph, target: VertexId) -> Self {
        Heuristic::from_values(dijkstra(graph, target, |_| true).dist)
    }

    #[inline]
    pub fn value(&self, v: VertexId) -> f64 {
        self.values[v.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Multiset of rewired vertices, one entry per counted rewire.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewireLog {
    entries: Vec<VertexId>,
}

impl RewireLog {
    pub fn record(&mut self, v: VertexId) {
        self.entries.push(v);
    }

    pub fn total(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[VertexId] {
        &self.entries
    }

    pub fn count_for(&self, v: VertexId) -> usize {
        self.entries.iter().filter(|&&x| x == v).count()
    }
}

/// Unevaluated-edge summary of the tree path from the source to a vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubpathStats {
    pub edges: usize,
    pub unknown: usize,
    /// Product of priors over the unknown edges (1 when there are none).
    pub unknown_prior_product: f64,
}

#[derive(Clone, Copy, Debug)]
struct Key {
    f: f64,
    g: f64,
    v: usize,
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.f
            .total_cmp(&other.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| self.v.cmp(&other.v))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path tree over the lazily assumed-valid graph plus the per-run
/// evaluation overlay.
#[derive(Clone, Debug)]
pub struct LazyTree<'a> {
    graph: &'a Graph,
    heuristic: &'a Heuristic,
    source: VertexId,
    g: Vec<f64>,
    rhs: Vec<f64>,
    parent: Vec<Option<(VertexId, EdgeId)>>,
    settled_parent: Vec<Option<VertexId>>,
    ever_settled: Vec<bool>,
    queue: BTreeSet<Key>,
    queued: Vec<Option<Key>>,
    status: Vec<EdgeStatus>,
    rewires: RewireLog,
    settlements: usize,
}

impl<'a> LazyTree<'a> {
    /// A tree holding only the source.
    pub fn new(graph: &'a Graph, heuristic: &'a Heuristic, source: VertexId) -> Result<Self, TreeError> {
        let n = graph.vertex_count();
        if !graph.contains_vertex(source) {
            return Err(TreeError::NoSuchVertex(source));
        }
        if heuristic.len() != n {
            return Err(TreeError::HeuristicSize {
                expected: n,
                found: heuristic.len(),
            });
        }
        let mut tree = LazyTree {
            graph,
            heuristic,
            source,
            g: vec![f64::INFINITY; n],
            rhs: vec![f64::INFINITY; n],
            parent: vec![None; n],
            settled_parent: vec![None; n],
            ever_settled: vec![false; n],
            queue: BTreeSet::new(),
            queued: vec![None; n],
            status: vec![EdgeStatus::Unknown; graph.edge_count()],
            rewires: RewireLog::default(),
            settlements: 0,
        };
        tree.rhs[source.0] = 0.0;
        tree.requeue(source.0);
        Ok(tree)
    }

    pub fn graph(&self) -> &'a Graph {
        self.graph
    }

    pub fn heuristic(&self) -> &'a Heuristic {
        self.heuristic
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn g(&self, v: VertexId) -> f64 {
        self.g[v.0]
    }

    pub fn rhs(&self, v: VertexId) -> f64 {
        self.rhs[v.0]
    }

    /// Estimated total cost through `v`: `min(g, rhs) + h`.
    pub fn f_value(&self, v: VertexId) -> f64 {
        self.g[v.0].min(self.rhs[v.0]) + self.heuristic.value(v)
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v.0].map(|(p, _)| p)
    }

    pub fn status(&self, e: EdgeId) -> EdgeStatus {
        self.status[e.0]
    }

    pub fn statuses(&self) -> &[EdgeStatus] {
        &self.status
    }

    pub fn rewires(&self) -> &RewireLog {
        &self.rewires
    }

    pub fn into_rewires(self) -> RewireLog {
        self.rewires
    }

    /// Total number of settlements, including first ones.
    pub fn settlements(&self) -> usize {
        self.settlements
    }

    pub fn is_consistent(&self, v: VertexId) -> bool {
        self.g[v.0] == self.rhs[v.0]
    }

    pub fn frontier_len(&self) -> usize {
        self.queue.len()
    }

    fn key(&self, v: usize) -> Key {
        let k = self.g[v].min(self.rhs[v]);
        Key {
            f: k + self.heuristic.values[v],
            g: k,
            v,
        }
    }

    fn requeue(&mut self, v: usize) {
        if let Some(old) = self.queued[v].take() {
            self.queue.remove(&old);
        }
        if self.g[v] != self.rhs[v] {
            let key = self.key(v);
            self.queue.insert(key);
            self.queued[v] = Some(key);
        }
    }

    /// Full recomputation of `rhs(v)` and its parent from all usable
    /// neighbours. Ties go to the smaller parent id.
    fn recompute(&mut self, v: usize) {
        if v == self.source.0 {
            return;
        }
        let mut best = f64::INFINITY;
        let mut best_parent = None;
        for &(e, w) in self.graph.neighbors(VertexId(v)) {
            if self.status[e.0] == EdgeStatus::Invalid {
                continue;
            }
            let c = self.g[w.0] + self.graph.edge(e).weight;
            let better = match best_parent {
                None => c < best,
                Some((p, _)) => c < best || (c == best && w < p),
            };
            if better && c.is_finite() {
                best = c;
                best_parent = Some((w, e));
            }
        }
        self.rhs[v] = best;
        self.parent[v] = best_parent;
        self.requeue(v);
    }

    /// Offers `v` a route through its neighbour `u` whose `g` just dropped.
    fn relax(&mut self, v: usize, u: VertexId, e: EdgeId) {
        if v == self.source.0 {
            return;
        }
        let c = self.g[u.0] + self.graph.edge(e).weight;
        let better = match self.parent[v] {
            None => c < self.rhs[v],
            Some((p, _)) if p == u => true,
            Some((p, _)) => c < self.rhs[v] || (c == self.rhs[v] && u < p),
        };
        if better {
            self.rhs[v] = c;
            self.parent[v] = Some((u, e));
            self.requeue(v);
        }
    }

    /// Grows the tree best-first until `triggered` accepts the vertex about
    /// to be settled, and returns it. Returns `None` once no vertex with a
    /// finite key is left, i.e. the target is unreachable in the lazy graph.
    pub fn extend<F>(&mut self, mut triggered: F) -> Option<VertexId>
    where
        F: FnMut(&LazyTree<'a>, VertexId) -> bool,
    {
        loop {
            let top = *self.queue.first()?;
            if !top.f.is_finite() {
                return None;
            }
            let u = top.v;
            if self.g[u] > self.rhs[u] {
                // With a consistent heuristic every ancestor of the top vertex
                // is already consistent. Rounding can break that by an ulp, in
                // which case the stale ancestor is repaired first.
                if let Some(a) = self.stale_ancestor(u) {
                    self.process(a);
                    continue;
                }
                if triggered(self, VertexId(u)) {
                    return Some(VertexId(u));
                }
            }
            self.process(u);
        }
    }

    fn stale_ancestor(&self, v: usize) -> Option<usize> {
        let mut cur = self.parent[v].map(|(p, _)| p.0);
        let mut steps = 0;
        while let Some(p) = cur {
            if self.g[p] != self.rhs[p] {
                return Some(p);
            }
            cur = self.parent[p].map(|(q, _)| q.0);
            steps += 1;
            if steps > self.g.len() {
                break;
            }
        }
        None
    }

    /// Removes `u` from the frontier and makes it consistent (overconsistent)
    /// or resets it for repair (underconsistent).
    fn process(&mut self, u: usize) {
        if let Some(key) = self.queued[u].take() {
            self.queue.remove(&key);
        }
        if self.g[u] > self.rhs[u] {
            self.g[u] = self.rhs[u];
            self.settle(u);
            for i in 0..self.graph.neighbors(VertexId(u)).len() {
                let (e, w) = self.graph.neighbors(VertexId(u))[i];
                if self.status[e.0] != EdgeStatus::Invalid {
                    self.relax(w.0, VertexId(u), e);
                }
            }
        } else {
            self.g[u] = f64::INFINITY;
            self.recompute(u);
            for i in 0..self.graph.neighbors(VertexId(u)).len() {
                let (_, w) = self.graph.neighbors(VertexId(u))[i];
                if self.parent[w.0].is_some_and(|(p, _)| p.0 == u) {
                    self.recompute(w.0);
                }
            }
        }
    }

    fn settle(&mut self, u: usize) {
        self.settlements += 1;
        let p = self.parent[u].map(|(p, _)| p);
        if self.ever_settled[u] && self.settled_parent[u] != p {
            self.rewires.record(VertexId(u));
        }
        self.ever_settled[u] = true;
        self.settled_parent[u] = p;
    }

    /// Walks parent pointers from `leaf` back to the source.
    pub fn shortest_subpath(&self, leaf: VertexId) -> Result<Path, TreeError> {
        if !self.graph.contains_vertex(leaf) {
            return Err(TreeError::NoSuchVertex(leaf));
        }
        let mut vertices = vec![leaf];
        let mut edges = Vec::new();
        let mut v = leaf;
        while v != self.source {
            let (p, e) = self.parent[v.0].ok_or(TreeError::Unreached(leaf))?;
            vertices.push(p);
            edges.push(e);
            v = p;
            if edges.len() > self.graph.vertex_count() {
                return Err(TreeError::Unreached(leaf));
            }
        }
        vertices.reverse();
        edges.reverse();
        Ok(Path::from_parts(self.graph, vertices, edges))
    }

    /// Counts unevaluated edges on the tree path to `v` without building it.
    pub fn subpath_stats(&self, v: VertexId) -> SubpathStats {
        let mut stats = SubpathStats {
            edges: 0,
            unknown: 0,
            unknown_prior_product: 1.0,
        };
        let mut cur = v;
        while cur != self.source {
            let Some((p, e)) = self.parent[cur.0] else { break };
            stats.edges += 1;
            if self.status[e.0] == EdgeStatus::Unknown {
                stats.unknown += 1;
                stats.unknown_prior_product *= self.graph.edge(e).prior;
            }
            cur = p;
            if stats.edges > self.graph.vertex_count() {
                break;
            }
        }
        stats
    }

    /// Records an evaluation outcome. An invalid edge is treated as having
    /// infinite weight; any endpoint that routed through it gets a new `rhs`
    /// and is repaired by the next `extend`.
    pub fn apply_evaluation(&mut self, edge: EdgeId, valid: bool) -> Result<(), TreeError> {
        if self.status[edge.0] != EdgeStatus::Unknown {
            return Err(TreeError::AlreadyEvaluated(edge));
        }
        if valid {
            self.status[edge.0] = EdgeStatus::Valid;
            return Ok(());
        }
        self.status[edge.0] = EdgeStatus::Invalid;
        let (a, b) = self.graph.edge(edge).endpoints;
        for v in [a, b] {
            if self.parent[v.0].is_some_and(|(_, e)| e == edge) {
                self.recompute(v.0);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeSpec;

    /// s=0, a=1, b=2, t=3. Upper branch s-a-t costs 2, lower s-b-t costs 3.
    fn diamond() -> Graph {
        Graph::new(
            1,
            vec![vec![0.0]; 4],
            vec![
                EdgeSpec::new(0, 1, 1.0),
                EdgeSpec::new(1, 3, 1.0),
                EdgeSpec::new(0, 2, 1.5),
                EdgeSpec::new(2, 3, 1.5),
            ],
        )
        .unwrap()
    }

    fn run_to(tree: &mut LazyTree<'_>, target: VertexId) -> Option<VertexId> {
        tree.extend(|_, v| v == target)
    }

    #[test]
    fn single_edge_reaches_target() {
        let g = Graph::new(1, vec![vec![0.0], vec![1.0]], vec![EdgeSpec::new(0, 1, 1.0)]).unwrap();
        let h = Heuristic::zero(&g);
        let mut tree = LazyTree::new(&g, &h, VertexId(0)).unwrap();
        assert_eq!(run_to(&mut tree, VertexId(1)), Some(VertexId(1)));
        let p = tree.shortest_subpath(VertexId(1)).unwrap();
        assert_eq!(p.vertices(), &[VertexId(0), VertexId(1)]);
    }

    #[test]
    fn source_subpath_is_trivial() {
        let g = diamond();
        let h = Heuristic::zero(&g);
        let tree = LazyTree::new(&g, &h, VertexId(0)).unwrap();
        let p = tree.shortest_subpath(VertexId(0)).unwrap();
        assert_eq!((p.len(), p.weight()), (0, 0.0));
        assert_eq!(tree.shortest_subpath(VertexId(3)), Err(TreeError::Unreached(VertexId(3))));
    }

    #[test]
    fn chain_subpath_weight_matches_g() {
        let g = Graph::new(
            1,
            vec![vec![0.0]; 3],
            vec![EdgeSpec::new(0, 1, 0.5), EdgeSpec::new(1, 2, 0.25)],
        )
        .unwrap();
        let h = Heuristic::zero(&g);
        let mut tree = LazyTree::new(&g, &h, VertexId(0)).unwrap();
        let leaf = run_to(&mut tree, VertexId(2)).unwrap();
        let p = tree.shortest_subpath(leaf).unwrap();
        assert_eq!(p.vertices(), &[VertexId(0), VertexId(1), VertexId(2)]);
        assert_eq!(p.weight(), 0.75);
        assert_eq!(tree.rhs(leaf), 0.75);
    }

    #[test]
    fn equal_cost_tie_goes_to_smaller_parent_id() {
        // Two routes of cost 2 into t=3: via 1 and via 2.
        let g = Graph::new(
            1,
            vec![vec![0.0]; 4],
            vec![
                EdgeSpec::new(0, 2, 1.0),
                EdgeSpec::new(2, 3, 1.0),
                EdgeSpec::new(0, 1, 1.0),
                EdgeSpec::new(1, 3, 1.0),
            ],
        )
        .unwrap();
        let h = Heuristic::zero(&g);
        let mut tree = LazyTree::new(&g, &h, VertexId(0)).unwrap();
        let leaf = run_to(&mut tree, VertexId(3)).unwrap();
        let p = tree.shortest_subpath(leaf).unwrap();
        assert_eq!(p.vertices(), &[VertexId(0), VertexId(1), VertexId(3)]);
    }

    #[test]
    fn invalidation_moves_target_to_other_branch() {
        let g = diamond();
        let h = Heuristic::graph_distance(&g, VertexId(3));
        let mut tree = LazyTree::new(&g, &h, VertexId(0)).unwrap();
        run_to(&mut tree, VertexId(3)).unwrap();
        tree.apply_evaluation(EdgeId(1), false).unwrap();
        run_to(&mut tree, VertexId(3)).unwrap();
        let p = tree.shortest_subpath(VertexId(3)).unwrap();
        assert_eq!(p.vertices(), &[VertexId(0), VertexId(2), VertexId(3)]);
        // Only s and a were settled; neither changed parent.
        assert_eq!(tree.rewires().total(), 0);
    }

    #[test]
    fn valid_outcome_leaves_tree_alone() {
        let g = diamond();
        let h = Heuristic::zero(&g);
        let mut tree = LazyTree::new(&g, &h, VertexId(0)).unwrap();
        run_to(&mut tree, VertexId(3)).unwrap();
        let before = (tree.g.clone(), tree.rhs.clone(), tree.parent.clone());
        tree.apply_evaluation(EdgeId(0), true).unwrap();
        assert_eq!(before, (tree.g.clone(), tree.rhs.clone(), tree.parent.clone()));
        assert_eq!(tree.rewires().total(), 0);
        assert_eq!(
            tree.apply_evaluation(EdgeId(0), false),
            Err(TreeError::AlreadyEvaluated(EdgeId(0)))
        );
    }

    #[test]
    fn settled_vertex_with_alternate_parent_rewires_once() {
        // s=0, x=1, y=2, v=3, t=4. v is settled through x (cost 2) before
        // the target is reached; after s-x fails, v's best parent is y and
        // x (now at cost 3.5) stays behind the target (cost 3).
        let g = Graph::new(
            1,
            vec![vec![0.0]; 5],
            vec![
                EdgeSpec::new(0, 1, 1.0),
                EdgeSpec::new(1, 3, 1.0),
                EdgeSpec::new(0, 2, 1.5),
                EdgeSpec::new(2, 3, 1.0),
                EdgeSpec::new(3, 4, 0.5),
            ],
        )
        .unwrap();
        let h = Heuristic::zero(&g);
        let mut tree = LazyTree::new(&g, &h, VertexId(0)).unwrap();
        run_to(&mut tree, VertexId(4)).unwrap();
        assert_eq!(tree.parent(VertexId(3)), Some(VertexId(1)));
        tree.apply_evaluation(EdgeId(0), false).unwrap();
        assert_eq!(tree.rewires().total(), 0);
        run_to(&mut tree, VertexId(4)).unwrap();
        assert_eq!(tree.parent(VertexId(3)), Some(VertexId(2)));
        assert_eq!(tree.rewires().entries(), &[VertexId(3)]);
    }

    #[test]
    fn graph_distance_heuristic_on_chain() {
        let g = Graph::new(
            1,
            vec![vec![0.0]; 4],
            vec![EdgeSpec::new(0, 1, 1.0), EdgeSpec::new(1, 2, 1.0), EdgeSpec::new(2, 3, 1.0)],
        )
        .unwrap();
        let h = Heuristic::graph_distance(&g, VertexId(3));
        assert_eq!(h.value(VertexId(3)), 0.0);
        assert_eq!(h.value(VertexId(0)), 3.0);
    }

    #[test]
    fn unreachable_target_exhausts() {
        let g = Graph::new(
            1,
            vec![vec![0.0]; 3],
            vec![EdgeSpec::new(0, 1, 1.0)],
        )
        .unwrap();
        let h = Heuristic::zero(&g);
        let mut tree = LazyTree::new(&g, &h, VertexId(0)).unwrap();
        assert_eq!(run_to(&mut tree, VertexId(2)), None);
    }
}
