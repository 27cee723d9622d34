//! Immutable weighted roadmap graph with per-edge priors.

use std::fmt;

use thiserror::Error;

/// Dense vertex index in `[0, |V|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

/// Dense edge index in `[0, |E|)`, assigned in construction order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex {vertex} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        vertex: usize,
        expected: usize,
        found: usize,
    },
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteCoordinate { vertex: usize },
    #[error("edge {edge} references missing vertex {vertex}")]
    DanglingVertex { edge: usize, vertex: usize },
    #[error("edge {edge} is a self loop on vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("edge {edge} has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { edge: usize, weight: f64 },
    #[error("edge {edge} has prior {prior} outside [0, 1]")]
    PriorOutOfRange { edge: usize, prior: f64 },
    #[error("expected {expected} priors, got {found}")]
    PriorCount { expected: usize, found: usize },
    #[error("vertices {0} and {1} are not adjacent")]
    NotAdjacent(VertexId, VertexId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexRecord {
    pub id: VertexId,
    pub position: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub endpoints: (VertexId, VertexId),
    pub weight: f64,
    /// Probability that the edge is valid.
    pub prior: f64,
}

impl EdgeRecord {
    /// The endpoint opposite to `v`. `v` must be one of the endpoints.
    #[inline]
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.endpoints.0 == v {
            self.endpoints.1
        } else {
            debug_assert_eq!(self.endpoints.1, v);
            self.endpoints.0
        }
    }
}

/// Edge description used when building a graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub prior: f64,
}

impl EdgeSpec {
    pub fn new(u: usize, v: usize, weight: f64) -> Self {
        EdgeSpec {
            u,
            v,
            weight,
            prior: 1.0,
        }
    }

    pub fn with_prior(mut self, prior: f64) -> Self {
        self.prior = prior;
        self
    }
}

/// Undirected weighted graph. Immutable once built; per-run edge status lives
/// in the search overlay, never here.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    dim: usize,
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
    adjacency: Vec<Vec<(EdgeId, VertexId)>>,
}

impl Graph {
    /// Builds and validates a graph. Edge ids follow the order of `edges`.
    pub fn new(dim: usize, positions: Vec<Vec<f64>>, edges: Vec<EdgeSpec>) -> Result<Self, GraphError> {
        if positions.is_empty() {
            return Err(GraphError::Empty);
        }
        for (i, p) in positions.iter().enumerate() {
            if p.len() != dim {
                return Err(GraphError::DimensionMismatch {
                    vertex: i,
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(GraphError::NonFiniteCoordinate { vertex: i });
            }
        }
        let n = positions.len();
        let vertices: Vec<VertexRecord> = positions
            .into_iter()
            .enumerate()
            .map(|(i, position)| VertexRecord {
                id: VertexId(i),
                position,
            })
            .collect();

        let mut adjacency = vec![Vec::new(); n];
        let mut records = Vec::with_capacity(edges.len());
        for (i, e) in edges.into_iter().enumerate() {
            for v in [e.u, e.v] {
                if v >= n {
                    return Err(GraphError::DanglingVertex { edge: i, vertex: v });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop { edge: i, vertex: e.u });
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(GraphError::NonPositiveWeight {
                    edge: i,
                    weight: e.weight,
                });
            }
            if !(0.0..=1.0).contains(&e.prior) {
                return Err(GraphError::PriorOutOfRange {
                    edge: i,
                    prior: e.prior,
                });
            }
            let id = EdgeId(i);
            adjacency[e.u].push((id, VertexId(e.v)));
            adjacency[e.v].push((id, VertexId(e.u)));
            records.push(EdgeRecord {
                id,
                endpoints: (VertexId(e.u), VertexId(e.v)),
                weight: e.weight,
                prior: e.prior,
            });
        }
        Ok(Graph {
            dim,
            vertices,
            edges: records,
            adjacency,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[VertexRecord] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, e: EdgeId) -> &EdgeRecord {
        &self.edges[e.0]
    }

    #[inline]
    pub fn position(&self, v: VertexId) -> &[f64] {
        &self.vertices[v.0].position
    }

    /// Incident `(edge, neighbor)` pairs of `v`, in edge-id order.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[(EdgeId, VertexId)] {
        &self.adjacency[v.0]
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v.0 < self.vertices.len()
    }

    /// First edge joining `u` and `v`, if any.
    pub fn find_edge(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.adjacency
            .get(u.0)?
            .iter()
            .find(|(_, w)| *w == v)
            .map(|(e, _)| *e)
    }

    pub fn priors(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.prior).collect()
    }

    /// Copy of this graph with every edge prior replaced.
    pub fn with_priors(&self, priors: &[f64]) -> Result<Graph, GraphError> {
        if priors.len() != self.edges.len() {
            return Err(GraphError::PriorCount {
                expected: self.edges.len(),
                found: priors.len(),
            });
        }
        let mut g = self.clone();
        for (rec, &p) in g.edges.iter_mut().zip(priors) {
            if !(0.0..=1.0).contains(&p) {
                return Err(GraphError::PriorOutOfRange {
                    edge: rec.id.0,
                    prior: p,
                });
            }
            rec.prior = p;
        }
        Ok(g)
    }

    /// Checks that adjacency lists and the edge sequence describe the same
    /// incidence structure.
    pub fn adjacency_consistent(&self) -> bool {
        let mut seen = vec![0u8; self.edges.len()];
        for (v, adj) in self.adjacency.iter().enumerate() {
            for &(e, w) in adj {
                let rec = match self.edges.get(e.0) {
                    Some(r) => r,
                    None => return false,
                };
                let (a, b) = rec.endpoints;
                let ok = (a.0 == v && b == w) || (b.0 == v && a == w);
                if !ok {
                    return false;
                }
                seen[e.0] += 1;
            }
        }
        seen.iter().all(|&c| c == 2)
    }

    /// Euclidean distance between two vertex positions.
    pub fn distance(&self, u: VertexId, v: VertexId) -> f64 {
        euclidean(self.position(u), self.position(v))
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A walk through the graph, stored as both vertex and edge sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeId>,
    weight: f64,
}

impl Path {
    /// Zero-length path sitting at `v`.
    pub fn trivial(v: VertexId) -> Self {
        Path {
            vertices: vec![v],
            edges: Vec::new(),
            weight: 0.0,
        }
    }

    /// Builds a path from a vertex sequence, picking the connecting edge
    /// between each consecutive pair.
    pub fn from_vertices(graph: &Graph, vertices: Vec<VertexId>) -> Result<Self, GraphError> {
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut edges = Vec::with_capacity(vertices.len().saturating_sub(1));
        let mut weight = 0.0;
        for pair in vertices.windows(2) {
            let e = graph
                .find_edge(pair[0], pair[1])
                .ok_or(GraphError::NotAdjacent(pair[0], pair[1]))?;
            weight += graph.edge(e).weight;
            edges.push(e);
        }
        Ok(Path {
            vertices,
            edges,
            weight,
        })
    }

    /// Builds a path from parallel vertex/edge sequences without validation.
    pub(crate) fn from_parts(graph: &Graph, vertices: Vec<VertexId>, edges: Vec<EdgeId>) -> Self {
        debug_assert_eq!(vertices.len(), edges.len() + 1);
        let weight = edges.iter().map(|&e| graph.edge(e).weight).sum();
        Path {
            vertices,
            edges,
            weight,
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn source(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn target(&self) -> VertexId {
        *self.vertices.last().expect("path is never empty")
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Iterates edges together with the vertex they lead into, from the
    /// source outward.
    pub fn oriented_edges(&self) -> impl Iterator<Item = (EdgeId, VertexId)> + '_ {
        self.edges.iter().copied().zip(self.vertices[1..].iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(
            1,
            vec![vec![0.0], vec![1.0], vec![2.0]],
            vec![EdgeSpec::new(0, 1, 1.0), EdgeSpec::new(1, 2, 1.0), EdgeSpec::new(0, 2, 2.5)],
        )
        .unwrap()
    }

    #[test]
    fn adjacency_round_trips_edges() {
        let g = triangle();
        assert!(g.adjacency_consistent());
        assert_eq!(g.neighbors(VertexId(1)).len(), 2);
        assert_eq!(g.find_edge(VertexId(2), VertexId(0)), Some(EdgeId(2)));
    }

    #[test]
    fn rejects_bad_edges() {
        let pos = vec![vec![0.0], vec![1.0]];
        assert_eq!(
            Graph::new(1, pos.clone(), vec![EdgeSpec::new(0, 1, 0.0)]),
            Err(GraphError::NonPositiveWeight { edge: 0, weight: 0.0 })
        );
        assert_eq!(
            Graph::new(1, pos.clone(), vec![EdgeSpec::new(0, 0, 1.0)]),
            Err(GraphError::SelfLoop { edge: 0, vertex: 0 })
        );
        assert_eq!(
            Graph::new(1, pos.clone(), vec![EdgeSpec::new(0, 5, 1.0)]),
            Err(GraphError::DanglingVertex { edge: 0, vertex: 5 })
        );
        assert!(Graph::new(1, pos, vec![EdgeSpec::new(0, 1, f64::INFINITY)]).is_err());
        assert_eq!(Graph::new(1, vec![], vec![]), Err(GraphError::Empty));
    }

    #[test]
    fn path_weight_sums_edges() {
        let g = triangle();
        let p = Path::from_vertices(&g, vec![VertexId(0), VertexId(1), VertexId(2)]).unwrap();
        assert_eq!(p.weight(), 2.0);
        assert_eq!(p.edges(), &[EdgeId(0), EdgeId(1)]);
        assert!(Path::from_vertices(&g, vec![VertexId(0), VertexId(0)]).is_err());
        let t = Path::trivial(VertexId(1));
        assert_eq!((t.weight(), t.len()), (0.0, 0));
    }
}
