//! Undirected weighted graphs as canonical edge lists, plus the rank-1 edge
//! Laplacian atoms and the inner products the greedy sparsifier runs on.

use crate::error::{Result, UgaError};
use crate::linalg::SymMatrix;
use std::collections::HashSet;

/// One undirected edge with canonical orientation u < v and positive weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Undirected weighted graph. Edge ids are dense 0..m-1 in insertion order;
/// each vertex carries the list of its incident edge ids.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl WeightedGraph {
    /// Builds a graph from raw (u, v, w) triples. Orientation is
    /// canonicalized; self-loops, duplicate pairs, out-of-range ids and
    /// non-positive weights are rejected.
    pub fn new(n: usize, raw: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(UgaError::InvalidInput("graph needs at least one vertex".into()));
        }
        let mut edges = Vec::with_capacity(raw.len());
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(raw.len());
        for (id, (a, b, w)) in raw.into_iter().enumerate() {
            if a == b {
                return Err(UgaError::InvalidInput(format!("self-loop at vertex {a}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v >= n {
                return Err(UgaError::InvalidInput(format!("vertex id {v} out of range (n={n})")));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(UgaError::InvalidInput(format!("edge ({u},{v}) has weight {w}")));
            }
            if !seen.insert((u, v)) {
                return Err(UgaError::InvalidInput(format!("duplicate edge ({u},{v})")));
            }
            adj[u].push(id);
            adj[v].push(id);
            edges.push(Edge { u, v, w });
        }
        Ok(WeightedGraph { n, edges, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    pub fn incident_edges(&self, vertex: usize) -> &[usize] {
        &self.adj[vertex]
    }

    /// Weighted degree: sum of incident edge weights, i.e. L_G(u, u).
    pub fn weighted_degree(&self, vertex: usize) -> f64 {
        self.adj[vertex].iter().map(|&e| self.edges[e].w).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// ||L_G||_F^2 without materializing the Laplacian:
    /// sum of squared weighted degrees plus twice the squared weights.
    pub fn laplacian_frob_sq(&self) -> f64 {
        let diag: f64 = (0..self.n).map(|u| self.weighted_degree(u).powi(2)).sum();
        let off: f64 = self.edges.iter().map(|e| 2.0 * e.w * e.w).sum();
        diag + off
    }

    /// Trace of L_G = twice the total edge weight.
    pub fn laplacian_trace(&self) -> f64 {
        2.0 * self.total_weight()
    }

    /// Dense Laplacian, for verification only; refuses above `cap` vertices.
    pub fn laplacian_dense(&self, cap: usize) -> Result<SymMatrix> {
        if self.n > cap {
            return Err(UgaError::SizeCapExceeded { n: self.n, cap });
        }
        let mut l = SymMatrix::zeros(self.n);
        for e in &self.edges {
            l.set(e.u, e.u, l.get(e.u, e.u) + e.w);
            l.set(e.v, e.v, l.get(e.v, e.v) + e.w);
            l.set(e.u, e.v, l.get(e.u, e.v) - e.w);
        }
        Ok(l)
    }
}

/// Rank-1 Laplacian atom of a single unit-weight edge; never materialized
/// densely in the selection hot path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeAtom {
    pub u: usize,
    pub v: usize,
}

impl EdgeAtom {
    pub fn new(u: usize, v: usize) -> Self {
        debug_assert!(u < v);
        EdgeAtom { u, v }
    }

    /// Dense n-by-n atom, for oracle tests.
    pub fn to_dense(self, n: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(n);
        m.set(self.u, self.u, 1.0);
        m.set(self.v, self.v, 1.0);
        m.set(self.u, self.v, -1.0);
        m
    }
}

/// Frobenius inner product of two edge atoms: 4 for the same edge, 1 when
/// exactly one endpoint is shared (any of the four matchings), 0 when
/// disjoint. Equals the squared inner product of the incidence vectors.
pub fn edge_atom_inner(a: EdgeAtom, b: EdgeAtom) -> f64 {
    if a == b {
        return 4.0;
    }
    let shared = (a.u == b.u) as u8 + (a.u == b.v) as u8 + (a.v == b.u) as u8 + (a.v == b.v) as u8;
    shared as f64
}

/// <phi_e, L_G> for an edge e = (u, v) of the graph, computed from adjacency
/// sums: wdeg(u) + wdeg(v) + 2 w_(u,v).
pub fn edge_graph_inner(g: &WeightedGraph, edge_id: usize) -> f64 {
    let e = g.edge(edge_id);
    g.weighted_degree(e.u) + g.weighted_degree(e.v) + 2.0 * e.w
}
