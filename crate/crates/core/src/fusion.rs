//! Hypergraph manifold rank aggregation.
//!
//! Per feature, the hypergraph of its ranked lists yields two pairwise
//! similarities: `S = (H Hᵀ) ∘ (Hᵀ H)` from hyperedge products and `C` from
//! the Cartesian product of every hyperedge with itself,
//!
//! ```text
//! C(i, j) = Σ_{e ∋ v_i, v_j} h_p(e) · h(e, v_i) · h(e, v_j)
//! ```
//!
//! Their entrywise product `W = C ∘ S` re-ranks the feature. Features are
//! then combined multiplicatively,
//!
//! ```text
//! η_f(q, i) = Π_f (1 + h_p(f, e_q)) / (1 + log_L τ_{q,f}(i))
//! ```
//!
//! and the fused lists are re-processed as a single feature.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hypergraph::{build_hypergraph, Hypergraph};
use crate::rank::{RankedList, RankerOutput};

pub const DEFAULT_DEPTH: usize = 200;
pub const DEFAULT_ITERATIONS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffinityRole {
    /// `(H Hᵀ) ∘ (Hᵀ H)`
    Similarity,
    /// Cartesian-product similarity.
    Cartesian,
    /// `C ∘ S`
    Combined,
    /// Multiplicative fusion score.
    Fused,
}

/// Row-sparse N×N matrix of non-negative affinities.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    role: AffinityRole,
    rows: Vec<Vec<(usize, f64)>>,
}

impl AffinityMatrix {
    /// Rows must be sorted by column with positive finite values.
    pub fn from_rows(role: AffinityRole, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(Error::Format(format!("affinity row {i} is not strictly sorted")));
            }
            if let Some(&(j, v)) = row
                .iter()
                .find(|&&(j, v)| j >= n || !v.is_finite() || v <= 0.0)
            {
                return Err(Error::Format(format!("affinity entry ({i}, {j}) = {v} is invalid")));
            }
        }
        Ok(AffinityMatrix { role, rows })
    }

    pub fn role(&self) -> AffinityRole {
        self.role
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let row = &self.rows[i];
        row.binary_search_by_key(&j, |&(c, _)| c).ok().map(|p| row[p].1)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Which products a row pass needs to materialize.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Product {
    Similarity,
    Cartesian,
    Combined,
}

/// Dense per-row accumulators reused across rows of one worker.
struct Scratch {
    edge_sim: Vec<f64>,
    vertex_sim: Vec<f64>,
    cartesian: Vec<f64>,
    edge_touched: Vec<usize>,
    vertex_touched: Vec<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            edge_sim: vec![0.0; n],
            vertex_sim: vec![0.0; n],
            cartesian: vec![0.0; n],
            edge_touched: Vec::new(),
            vertex_touched: Vec::new(),
        }
    }
}

/// Computes row `q` of the requested product.
///
/// Every entry is accumulated over the shared edges (or shared vertices) in
/// ascending index order, and each term is formed as a commutative product,
/// so row `i` column `j` and row `j` column `i` are bitwise equal.
fn product_row(
    h: &Hypergraph,
    transpose: &[Vec<(usize, f64)>],
    q: usize,
    product: Product,
    s: &mut Scratch,
) -> Vec<(usize, f64)> {
    let n = h.size();
    debug_assert_eq!(s.vertex_sim.len(), n);
    let weights = h.edge_weights();

    // Hᵀ H and C share their support: vertex pairs co-occurring in an edge.
    for &(e, h_eq) in &transpose[q] {
        let hp = weights[e];
        for &(v, h_ev) in h.edge(e) {
            if s.vertex_sim[v] == 0.0 && s.cartesian[v] == 0.0 {
                s.vertex_touched.push(v);
            }
            let term = h_eq * h_ev;
            s.vertex_sim[v] += term;
            s.cartesian[v] += hp * term;
        }
    }
    if product != Product::Cartesian {
        // H Hᵀ: edges sharing a vertex with e_q
        for &(v, h_qv) in h.edge(q) {
            for &(e, h_ev) in &transpose[v] {
                if s.edge_sim[e] == 0.0 {
                    s.edge_touched.push(e);
                }
                s.edge_sim[e] += h_qv * h_ev;
            }
        }
    }

    s.vertex_touched.sort_unstable();
    let mut row = Vec::with_capacity(s.vertex_touched.len());
    for &j in &s.vertex_touched {
        let value = match product {
            Product::Cartesian => s.cartesian[j],
            Product::Similarity => s.edge_sim[j] * s.vertex_sim[j],
            Product::Combined => s.cartesian[j] * (s.edge_sim[j] * s.vertex_sim[j]),
        };
        if value > 0.0 {
            row.push((j, value));
        }
    }
    for &j in &s.vertex_touched {
        s.vertex_sim[j] = 0.0;
        s.cartesian[j] = 0.0;
    }
    for &e in &s.edge_touched {
        s.edge_sim[e] = 0.0;
    }
    s.vertex_touched.clear();
    s.edge_touched.clear();
    row
}

fn product_matrix(h: &Hypergraph, product: Product) -> AffinityMatrix {
    let n = h.size();
    let transpose = h.vertex_edges();
    let rows = (0..n)
        .into_par_iter()
        .map_init(
            || Scratch::new(n),
            |scratch, q| product_row(h, &transpose, q, product, scratch),
        )
        .collect();
    let role = match product {
        Product::Similarity => AffinityRole::Similarity,
        Product::Cartesian => AffinityRole::Cartesian,
        Product::Combined => AffinityRole::Combined,
    };
    AffinityMatrix { role, rows }
}

/// `S = (H Hᵀ) ∘ (Hᵀ H)` over the sparse support.
pub fn pairwise_similarity(h: &Hypergraph) -> AffinityMatrix {
    product_matrix(h, Product::Similarity)
}

/// `C(i, j) = Σ_e h_p(e) · h(e, v_i) · h(e, v_j)`.
pub fn cartesian_similarity(h: &Hypergraph) -> AffinityMatrix {
    product_matrix(h, Product::Cartesian)
}

/// `W = C ∘ S`, computed directly from the hypergraph in one pass.
pub fn affinity(h: &Hypergraph) -> AffinityMatrix {
    product_matrix(h, Product::Combined)
}

/// Entrywise product over the intersection of supports.
pub fn combine_affinities(c: &AffinityMatrix, s: &AffinityMatrix) -> Result<AffinityMatrix> {
    if c.size() != s.size() {
        return Err(Error::Mismatch(format!(
            "affinity sizes differ: {} vs {}",
            c.size(),
            s.size()
        )));
    }
    let rows = c
        .rows
        .par_iter()
        .zip(&s.rows)
        .map(|(cr, sr)| {
            let mut out = Vec::new();
            let (mut a, mut b) = (0, 0);
            while a < cr.len() && b < sr.len() {
                match cr[a].0.cmp(&sr[b].0) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => {
                        let v = cr[a].1 * sr[b].1;
                        if v > 0.0 {
                            out.push((cr[a].0, v));
                        }
                        a += 1;
                        b += 1;
                    }
                }
            }
            out
        })
        .collect();
    Ok(AffinityMatrix {
        role: AffinityRole::Combined,
        rows,
    })
}

/// Re-rank each query by descending affinity. Ties go to the better original
/// position, then the lower index; items without affinity keep their original
/// order after all scored items.
pub fn rerank_from_affinity(
    w: &AffinityMatrix,
    original: &RankerOutput,
    depth: usize,
) -> Result<RankerOutput> {
    let n = original.size();
    if w.size() != n {
        return Err(Error::Mismatch(format!(
            "affinity covers {} items, ranker {} covers {n}",
            w.size(),
            original.id()
        )));
    }
    if depth == 0 || depth > original.depth() {
        return Err(Error::param(
            "depth",
            format!("{depth} must be in 1..={}", original.depth()),
        ));
    }
    let lists = (0..n)
        .into_par_iter()
        .map_init(
            || vec![usize::MAX; n],
            |rank_of, q| {
                let before = original.list(q).positions();
                for (p, &i) in before.iter().enumerate() {
                    rank_of[i] = p;
                }
                let mut scored: Vec<(usize, f64)> = w.row(q).to_vec();
                scored.sort_by(|a, b| {
                    b.1.total_cmp(&a.1)
                        .then(rank_of[a.0].cmp(&rank_of[b.0]))
                        .then(a.0.cmp(&b.0))
                });
                let mut positions: Vec<usize> = scored.iter().map(|&(i, _)| i).collect();
                if positions.len() < depth {
                    positions.extend(
                        before
                            .iter()
                            .copied()
                            .filter(|&i| w.get(q, i).is_none()),
                    );
                }
                positions.truncate(depth);
                for &i in before {
                    rank_of[i] = usize::MAX;
                }
                RankedList::new(q, positions).map(RankedList::with_self_first)
            },
        )
        .collect::<Result<Vec<_>>>()?;
    RankerOutput::new(original.id(), n, lists)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionConfig {
    pub k: usize,
    /// Depth `L` of the fused and re-ranked lists.
    pub depth: usize,
    /// Total hypergraph passes: one per feature, the rest on the fused lists.
    pub iterations: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            k: crate::selection::DEFAULT_K,
            depth: DEFAULT_DEPTH,
            iterations: DEFAULT_ITERATIONS,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < 2 || self.k > self.depth || self.depth > n {
            return Err(Error::param(
                "k",
                format!(
                    "need 2 <= k <= L <= N, got k = {}, L = {}, N = {n}",
                    self.k, self.depth
                ),
            ));
        }
        if self.iterations == 0 {
            return Err(Error::param("iterations", "must be at least 1"));
        }
        Ok(())
    }
}

/// One input to multiplicative fusion: a feature's hypergraph (supplying
/// `h_p`) and its re-ranked lists (supplying positions).
#[derive(Debug, Clone, Copy)]
pub struct Feature<'a> {
    pub hypergraph: &'a Hypergraph,
    pub ranking: &'a RankerOutput,
}

/// Fused scores of one query: `(item, η_f, per-feature positions)`, where an
/// item outside a feature's top `L` gets position `L + 1` and divisor 2.
fn fused_row(
    features: &[Feature<'_>],
    depth: usize,
    q: usize,
    position_maps: &mut [Vec<usize>],
    candidates: &mut Vec<usize>,
) -> Vec<(usize, f64, Vec<usize>)> {
    let absent = depth + 1;
    let log_base = (depth as f64).ln();
    candidates.clear();
    for (f, map) in features.iter().zip(position_maps.iter_mut()) {
        for (p, &i) in f.ranking.list(q).positions()[..depth].iter().enumerate() {
            map[i] = p + 1;
            candidates.push(i);
        }
    }
    candidates.sort_unstable();
    candidates.dedup();

    let numerators: Vec<f64> = features
        .iter()
        .map(|f| 1.0 + f.hypergraph.edge_weight(q))
        .collect();
    let row = candidates
        .iter()
        .map(|&i| {
            let mut score = 1.0;
            let mut positions = Vec::with_capacity(features.len());
            for (f, map) in position_maps.iter().enumerate() {
                let pos = map[i];
                let divisor = if pos == absent {
                    2.0
                } else {
                    1.0 + (pos as f64).ln() / log_base
                };
                score *= numerators[f] / divisor;
                positions.push(pos);
            }
            (i, score, positions)
        })
        .collect();
    for (f, map) in features.iter().zip(position_maps.iter_mut()) {
        for &i in &f.ranking.list(q).positions()[..depth] {
            map[i] = absent;
        }
    }
    row
}

fn check_features(features: &[Feature<'_>], depth: usize) -> Result<usize> {
    let first = features
        .first()
        .ok_or_else(|| Error::param("features", "at least one feature is required"))?;
    let n = first.ranking.size();
    if depth < 2 {
        return Err(Error::param("depth", format!("{depth} is below 2")));
    }
    for f in features {
        if f.ranking.size() != n || f.hypergraph.size() != n {
            return Err(Error::Mismatch(format!(
                "feature {} does not cover {n} items",
                f.ranking.id()
            )));
        }
        if f.ranking.depth() < depth {
            return Err(Error::param(
                "depth",
                format!(
                    "feature {} has depth {} < L = {depth}",
                    f.ranking.id(),
                    f.ranking.depth()
                ),
            ));
        }
    }
    Ok(n)
}

fn fused_rows<T: Send>(
    features: &[Feature<'_>],
    depth: usize,
    n: usize,
    finish: impl Fn(usize, Vec<(usize, f64, Vec<usize>)>) -> T + Sync + Send,
) -> Vec<T> {
    (0..n)
        .into_par_iter()
        .map_init(
            || (vec![vec![depth + 1; n]; features.len()], Vec::new()),
            |(maps, candidates), q| finish(q, fused_row(features, depth, q, maps, candidates)),
        )
        .collect()
}

/// `η_f` for every query and every item in some feature's top `L`.
pub fn fused_affinity(features: &[Feature<'_>], depth: usize) -> Result<AffinityMatrix> {
    let n = check_features(features, depth)?;
    let rows = fused_rows(features, depth, n, |_, row| {
        row.into_iter().map(|(i, s, _)| (i, s)).collect()
    });
    Ok(AffinityMatrix {
        role: AffinityRole::Fused,
        rows,
    })
}

/// Rank every query by descending `η_f`. Ties go to the lexicographically
/// better per-feature position vector, then the lower index.
pub fn rank_fused(features: &[Feature<'_>], depth: usize) -> Result<RankerOutput> {
    let n = check_features(features, depth)?;
    let lists = fused_rows(features, depth, n, |q, mut row| {
        row.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| a.2.cmp(&b.2))
                .then(a.0.cmp(&b.0))
        });
        row.truncate(depth);
        RankedList::new(q, row.into_iter().map(|(i, _, _)| i).collect())
            .map(RankedList::with_self_first)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    RankerOutput::new("fused", n, lists)
}

/// One single-feature pass: hypergraph, `W`, re-rank. Returns both the
/// hypergraph of the input lists and the re-ranked output.
pub fn lhrr_pass(
    ranker: &RankerOutput,
    k: usize,
    depth: usize,
) -> Result<(Hypergraph, RankerOutput)> {
    let h = build_hypergraph(ranker, k)?;
    let w = affinity(&h);
    let reranked = rerank_from_affinity(&w, ranker, depth)?;
    Ok((h, reranked))
}

/// Fuse features and re-process the result `iterations - 1` times.
pub fn fuse(features: &[(Hypergraph, RankerOutput)], cfg: &FusionConfig) -> Result<RankerOutput> {
    let views: Vec<Feature<'_>> = features
        .iter()
        .map(|(h, r)| Feature {
            hypergraph: h,
            ranking: r,
        })
        .collect();
    let n = check_features(&views, cfg.depth)?;
    cfg.validate(n)?;
    let mut fused = rank_fused(&views, cfg.depth)?;
    for _ in 1..cfg.iterations {
        fused = lhrr_pass(&fused, cfg.k, cfg.depth)?.1;
    }
    Ok(fused)
}

/// Summary of one feature's hyperedge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSummary {
    pub ranker_id: String,
    pub mean_edge_weight: f64,
    pub min_edge_weight: f64,
    pub max_edge_weight: f64,
}

#[derive(Debug, Clone)]
pub struct FusionRun {
    pub fused: RankerOutput,
    pub features: Vec<FeatureSummary>,
}

/// Full aggregation of `selected`: a hypergraph pass per feature, then
/// multiplicative fusion and re-processing.
pub fn lhrr_pipeline(selected: &[RankerOutput], cfg: &FusionConfig) -> Result<FusionRun> {
    let first = selected
        .first()
        .ok_or_else(|| Error::param("rankers", "at least one ranker is required"))?;
    let n = first.size();
    cfg.validate(n)?;
    for r in selected {
        if r.size() != n {
            return Err(Error::Mismatch(format!(
                "ranker {} covers {} items, expected {n}",
                r.id(),
                r.size()
            )));
        }
        if r.depth() < cfg.depth {
            return Err(Error::param(
                "depth",
                format!("ranker {} has depth {} < L = {}", r.id(), r.depth(), cfg.depth),
            ));
        }
    }
    let features = selected
        .par_iter()
        .map(|r| lhrr_pass(r, cfg.k, cfg.depth))
        .collect::<Result<Vec<_>>>()?;
    let summaries = features
        .iter()
        .zip(selected)
        .map(|((h, _), r)| {
            let w = h.edge_weights();
            FeatureSummary {
                ranker_id: r.id().to_string(),
                mean_edge_weight: crate::numeric::mean(w).unwrap_or(0.0),
                min_edge_weight: w.iter().copied().fold(f64::INFINITY, f64::min),
                max_edge_weight: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    let fused = fuse(&features, cfg)?;
    Ok(FusionRun {
        fused,
        features: summaries,
    })
}
