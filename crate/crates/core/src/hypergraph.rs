//! Log-based hypergraph of ranking references.
//!
//! One hyperedge per image `i`. Vertex `j` belongs to `e_i` with incidence
//!
//! ```text
//! r(e_i, v_j) = Σ_{y ∈ N(i,k), j ∈ N(y,k)} w(τ_i(y)) · w(τ_y(j)),   w(p) = 1 - log_k p
//! ```
//!
//! and the hyperedge weight is the sum of its `k` largest incidences.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rank::{RankedList, RankerOutput};

/// Relevance of 1-based position `pos` within a `k`-neighborhood.
#[inline]
pub fn log_weight(pos: usize, k: usize) -> f64 {
    1.0 - (pos as f64).ln() / (k as f64).ln()
}

/// `1 - log_k τ(item)` when `item` is in the top `k` of `list`, else zero.
pub fn position_weight(list: &RankedList, item: usize, k: usize) -> Result<f64> {
    check_k(k)?;
    Ok(list.positions()[..k.min(list.depth())]
        .iter()
        .position(|&x| x == item)
        .map_or(0.0, |p| log_weight(p + 1, k)))
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::param("k", format!("{k} is below 2; log base must exceed 1")));
    }
    Ok(())
}

/// Sparse incidence structure of one ranker, keyed by hyperedge.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    k: usize,
    edges: Vec<Vec<(usize, f64)>>,
    edge_weights: Vec<f64>,
}

impl Hypergraph {
    /// Assemble a hypergraph from explicit incidences. Each edge is sorted by
    /// vertex; non-positive incidences are dropped. Edge weights are derived.
    pub fn from_incidence(k: usize, edges: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        check_k(k)?;
        let n = edges.len();
        let mut edges = edges;
        for (e, edge) in edges.iter_mut().enumerate() {
            edge.retain(|&(_, h)| h > 0.0);
            edge.sort_by_key(|&(v, _)| v);
            if let Some(&(v, _)) = edge.iter().find(|&&(v, _)| v >= n) {
                return Err(Error::Format(format!("edge {e}: vertex {v} out of range")));
            }
            if edge.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Format(format!("edge {e}: repeated vertex")));
            }
            if edge.iter().any(|&(_, h)| !h.is_finite()) {
                return Err(Error::Format(format!("edge {e}: non-finite incidence")));
            }
        }
        let edge_weights = edges.iter().map(|e| top_k_sum(e, k)).collect();
        Ok(Hypergraph {
            k,
            edges,
            edge_weights,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of vertices, equal to the number of hyperedges.
    pub fn size(&self) -> usize {
        self.edges.len()
    }

    /// Vertices of hyperedge `e` with their incidence, sorted by vertex.
    pub fn edge(&self, e: usize) -> &[(usize, f64)] {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Vec<(usize, f64)>] {
        &self.edges
    }

    /// `h(e, v)`, zero when `v ∉ e`.
    pub fn incidence(&self, e: usize, v: usize) -> f64 {
        let edge = &self.edges[e];
        edge.binary_search_by_key(&v, |&(x, _)| x)
            .map_or(0.0, |p| edge[p].1)
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    pub fn edge_weight(&self, e: usize) -> f64 {
        self.edge_weights[e]
    }

    /// Transposed incidence: for every vertex, the `(edge, h)` pairs that
    /// contain it, sorted by edge.
    pub fn vertex_edges(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); self.size()];
        for (e, edge) in self.edges.iter().enumerate() {
            for &(v, h) in edge {
                out[v].push((e, h));
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// `edge,vertex,incidence` rows sorted by (edge, vertex).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("edge,vertex,incidence\n");
        for (e, edge) in self.edges.iter().enumerate() {
            for &(v, h) in edge {
                let _ = writeln!(out, "{e},{v},{h}");
            }
        }
        out
    }
}

/// Sum of the `k` largest incidences (all of them if fewer than `k`).
/// Ties at the cut are resolved by ascending vertex index.
fn top_k_sum(edge: &[(usize, f64)], k: usize) -> f64 {
    let mut values: Vec<(usize, f64)> = edge.to_vec();
    values.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    values.iter().take(k).map(|&(_, h)| h).sum()
}

/// `h_p(e)` for hyperedge `edge` of `h`.
pub fn edge_weight(h: &Hypergraph, edge: usize) -> Result<f64> {
    if edge >= h.size() {
        return Err(Error::param(
            "edge",
            format!("{edge} out of range for {} hyperedges", h.size()),
        ));
    }
    Ok(h.edge_weight(edge))
}

/// Build the hypergraph of `ranker` for neighborhood size `k`.
pub fn build_hypergraph(ranker: &RankerOutput, k: usize) -> Result<Hypergraph> {
    check_k(k)?;
    if k > ranker.depth() {
        return Err(Error::param(
            "k",
            format!("{k} exceeds ranked-list depth {}", ranker.depth()),
        ));
    }
    let weights: Vec<f64> = (1..=k).map(|p| log_weight(p, k)).collect();
    let edges: Vec<Vec<(usize, f64)>> = (0..ranker.size())
        .into_par_iter()
        .map(|i| {
            let mut terms = Vec::with_capacity(k * k);
            for (a, &y) in ranker.list(i).positions()[..k].iter().enumerate() {
                for (b, &j) in ranker.list(y).positions()[..k].iter().enumerate() {
                    terms.push((j, weights[a] * weights[b]));
                }
            }
            // stable: equal vertices keep (a, b) order, so sums are reproducible
            terms.sort_by_key(|&(j, _)| j);
            let mut edge: Vec<(usize, f64)> = Vec::new();
            for (j, w) in terms {
                match edge.last_mut() {
                    Some((last, acc)) if *last == j => *acc += w,
                    _ => edge.push((j, w)),
                }
            }
            edge.retain(|&(_, h)| h > 0.0);
            edge
        })
        .collect();
    let edge_weights = edges.par_iter().map(|e| top_k_sum(e, k)).collect();
    Ok(Hypergraph {
        k,
        edges,
        edge_weights,
    })
}
