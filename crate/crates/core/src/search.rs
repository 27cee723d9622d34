//! Plain Dijkstra over a filtered edge set.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::graph::{EdgeId, Graph, Path, VertexId};

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    vertex: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest distances using only edges accepted by `usable`.
#[derive(Clone, Debug)]
pub struct ShortestPathTree {
    pub dist: Vec<f64>,
    pub parent: Vec<Option<(VertexId, EdgeId)>>,
    source: VertexId,
}

impl ShortestPathTree {
    pub fn path_to(&self, graph: &Graph, target: VertexId) -> Option<Path> {
        if !self.dist[target.0].is_finite() {
            return None;
        }
        let mut vertices = vec![target];
        let mut edges = Vec::new();
        let mut v = target;
        while v != self.source {
            let (p, e) = self.parent[v.0]?;
            vertices.push(p);
            edges.push(e);
            v = p;
        }
        vertices.reverse();
        edges.reverse();
        Some(Path::from_parts(graph, vertices, edges))
    }
}

pub fn dijkstra(graph: &Graph, source: VertexId, usable: impl Fn(EdgeId) -> bool) -> ShortestPathTree {
    let n = graph.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source.0] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        vertex: source.0,
    });
    while let Some(Entry { dist: d, vertex: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(e, w) in graph.neighbors(VertexId(u)) {
            if done[w.0] || !usable(e) {
                continue;
            }
            let nd = d + graph.edge(e).weight;
            if nd < dist[w.0] {
                dist[w.0] = nd;
                parent[w.0] = Some((VertexId(u), e));
                heap.push(Entry { dist: nd, vertex: w.0 });
            }
        }
    }
    ShortestPathTree { dist, parent, source }
}
