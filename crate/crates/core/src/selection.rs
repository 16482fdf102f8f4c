//! Unsupervised ranker selection.
//!
//! Every pair of rankers is weighted by
//!
//! ```text
//! w_p({a, b}) = γ(a) · γ(b) / (1 + λ(a, b))^β
//! ```
//!
//! where `γ` is the predicted effectiveness and `λ` the RBO correlation.
//! With `β < 0` correlated pairs are favoured, with `β > 0` diverse ones.
//! Larger combinations are grown from the top-`t` pairs: a set of rankers is
//! a candidate when the selected pairs it contains connect all of its
//! members, and it scores the mean weight of those pairs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::correlation::{rbo_rankers, CorrelationConfig, RboVariant};
use crate::error::{Error, Result};
use crate::qpp::{estimate, Aggregation, QppScores};
use crate::rank::RankerOutput;

pub const DEFAULT_K: usize = 20;
pub const DEFAULT_ALPHA: f64 = 0.9;
pub const DEFAULT_BETA: f64 = -1.0;
pub const DEFAULT_TOP_PAIRS: usize = 5;

/// Unordered pair of ranker ids, stored with `first < second`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankerPair {
    pub first: String,
    pub second: String,
}

impl RankerPair {
    pub fn new(a: impl Into<String>, b: impl Into<String>) -> Self {
        let (a, b) = (a.into(), b.into());
        if a <= b {
            RankerPair { first: a, second: b }
        } else {
            RankerPair { first: b, second: a }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    pub pair: RankerPair,
    pub effectiveness_product: f64,
    pub correlation: f64,
    pub weight: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinationScore {
    /// Sorted ranker ids.
    pub members: Vec<String>,
    pub score: f64,
    /// Selected pairs fully contained in `members`.
    pub provenance: Vec<RankerPair>,
}

pub fn pair_weight(gamma_a: f64, gamma_b: f64, correlation: f64, beta: f64) -> f64 {
    gamma_a * gamma_b / (1.0 + correlation).powf(beta)
}

fn by_weight(a: &PairScore, b: &PairScore) -> Ordering {
    b.weight.total_cmp(&a.weight).then_with(|| a.pair.cmp(&b.pair))
}

/// Score every unordered pair of the rankers in `gammas`, best first.
pub fn score_pairs(
    gammas: &BTreeMap<String, f64>,
    correlations: &HashMap<RankerPair, f64>,
    beta: f64,
) -> Result<Vec<PairScore>> {
    if let Some((id, g)) = gammas.iter().find(|(_, g)| !(**g > 0.0) || !g.is_finite()) {
        return Err(Error::Numeric(format!(
            "effectiveness of ranker {id} is {g}; a positive value is required"
        )));
    }
    let ids: Vec<(&String, f64)> = gammas.iter().map(|(k, v)| (k, *v)).collect();
    let mut pairs = Vec::with_capacity(ids.len() * ids.len().saturating_sub(1) / 2);
    for (i, &(a, ga)) in ids.iter().enumerate() {
        for &(b, gb) in &ids[i + 1..] {
            let pair = RankerPair::new(a.as_str(), b.as_str());
            let correlation = *correlations.get(&pair).ok_or_else(|| {
                Error::Format(format!("no correlation for pair ({}, {})", pair.first, pair.second))
            })?;
            pairs.push(PairScore {
                weight: pair_weight(ga, gb, correlation, beta),
                effectiveness_product: ga * gb,
                correlation,
                beta,
                pair,
            });
        }
    }
    pairs.sort_by(by_weight);
    Ok(pairs)
}

/// Grow size-`n` combinations from the best `t` pairs of `pairs`.
///
/// Returns an empty list when fewer than `n` rankers are reachable.
pub fn expand_combinations(
    pairs: &[PairScore],
    n: usize,
    t: usize,
) -> Result<Vec<CombinationScore>> {
    if n < 3 {
        return Err(Error::param("n", format!("{n}; pairs come from score_pairs")));
    }
    if t < 2 {
        return Err(Error::param("top_pairs", format!("{t} must be at least 2")));
    }
    let mut ordered = pairs.to_vec();
    ordered.sort_by(by_weight);
    ordered.truncate(t);

    let names: Vec<&String> = ordered
        .iter()
        .flat_map(|p| [&p.pair.first, &p.pair.second])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if names.len() < n {
        return Ok(Vec::new());
    }
    let index: HashMap<&String, usize> = names.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let edges: Vec<(usize, usize)> = ordered
        .iter()
        .map(|p| (index[&p.pair.first], index[&p.pair.second]))
        .collect();
    let mut adjacent = vec![BTreeSet::new(); names.len()];
    for &(a, b) in &edges {
        adjacent[a].insert(b);
        adjacent[b].insert(a);
    }

    // connected vertex sets of the selected-pair graph, grown one vertex at a time
    let mut frontier: BTreeSet<Vec<usize>> = edges
        .iter()
        .map(|&(a, b)| vec![a.min(b), a.max(b)])
        .collect();
    for _ in 2..n {
        let mut next = BTreeSet::new();
        for set in &frontier {
            for &v in set {
                for &u in &adjacent[v] {
                    if set.binary_search(&u).is_err() {
                        let mut grown = set.clone();
                        grown.insert(grown.partition_point(|&x| x < u), u);
                        next.insert(grown);
                    }
                }
            }
        }
        frontier = next;
    }

    let mut out: Vec<CombinationScore> = frontier
        .into_iter()
        .map(|set| {
            let contained: Vec<&PairScore> = ordered
                .iter()
                .zip(&edges)
                .filter(|(_, (a, b))| set.binary_search(a).is_ok() && set.binary_search(b).is_ok())
                .map(|(p, _)| p)
                .collect();
            let score =
                contained.iter().map(|p| p.weight).sum::<f64>() / contained.len() as f64;
            CombinationScore {
                members: set.iter().map(|&i| names[i].clone()).collect(),
                score,
                provenance: contained.iter().map(|p| p.pair.clone()).collect(),
            }
        })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.members.cmp(&b.members)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub top_pairs: usize,
    pub sizes: Vec<usize>,
    pub aggregation: Aggregation,
    pub rbo_variant: RboVariant,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            k: DEFAULT_K,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            top_pairs: DEFAULT_TOP_PAIRS,
            sizes: vec![2, 3, 4],
            aggregation: Aggregation::Mean,
            rbo_variant: RboVariant::Prefix,
        }
    }
}

impl SelectionConfig {
    pub fn correlation(&self) -> CorrelationConfig {
        CorrelationConfig {
            k: self.k,
            alpha: self.alpha,
            variant: self.rbo_variant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::param("k", format!("{} is below 2", self.k)));
        }
        self.correlation().validate()?;
        if !self.beta.is_finite() {
            return Err(Error::param("beta", "must be finite"));
        }
        if self.top_pairs < 1 {
            return Err(Error::param("top_pairs", "must be at least 1"));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 2) {
            return Err(Error::param("sizes", format!("combination size {n} is below 2")));
        }
        Ok(())
    }
}

/// Everything computed while selecting.
#[derive(Debug, Clone)]
pub struct Selection {
    pub qpp: Vec<QppScores>,
    /// Upper-triangular `(a, b, λ)` in ranker input order.
    pub correlations: Vec<(String, String, f64)>,
    pub pairs: Vec<PairScore>,
    pub combinations: BTreeMap<usize, Vec<CombinationScore>>,
}

impl Selection {
    pub fn gamma(&self, ranker: &str) -> Option<f64> {
        self.qpp
            .iter()
            .find(|q| q.ranker_id == ranker)
            .map(|q| q.ranker_score)
    }
}

/// Effectiveness estimates for every ranker.
pub fn estimate_all(
    rankers: &[RankerOutput],
    k: usize,
    aggregation: Aggregation,
) -> Result<Vec<QppScores>> {
    rankers
        .par_iter()
        .map(|r| estimate(r, k, aggregation))
        .collect()
}

/// Upper-triangular RBO for every ranker pair, in input order.
pub fn correlate_all(
    rankers: &[RankerOutput],
    cfg: &CorrelationConfig,
) -> Result<Vec<(String, String, f64)>> {
    let index_pairs: Vec<(usize, usize)> = (0..rankers.len())
        .flat_map(|i| (i + 1..rankers.len()).map(move |j| (i, j)))
        .collect();
    index_pairs
        .into_par_iter()
        .map(|(i, j)| {
            let v = rbo_rankers(&rankers[i], &rankers[j], cfg)?;
            Ok((rankers[i].id().to_string(), rankers[j].id().to_string(), v))
        })
        .collect()
}

pub fn select(rankers: &[RankerOutput], cfg: &SelectionConfig) -> Result<Selection> {
    cfg.validate()?;
    if rankers.len() < 2 {
        return Err(Error::param(
            "rankers",
            format!("selection needs at least 2 rankers, got {}", rankers.len()),
        ));
    }
    let mut seen = BTreeSet::new();
    if let Some(dup) = rankers.iter().find(|r| !seen.insert(r.id())) {
        return Err(Error::Format(format!("duplicate ranker id {}", dup.id())));
    }
    let qpp = estimate_all(rankers, cfg.k, cfg.aggregation)?;
    let correlations = correlate_all(rankers, &cfg.correlation())?;
    let gammas: BTreeMap<String, f64> = qpp
        .iter()
        .map(|q| (q.ranker_id.clone(), q.ranker_score))
        .collect();
    let lookup: HashMap<RankerPair, f64> = correlations
        .iter()
        .map(|(a, b, v)| (RankerPair::new(a.as_str(), b.as_str()), *v))
        .collect();
    let pairs = score_pairs(&gammas, &lookup, cfg.beta)?;

    let mut combinations = BTreeMap::new();
    for &n in &cfg.sizes {
        let list = if n == 2 {
            pairs
                .iter()
                .take(cfg.top_pairs)
                .map(|p| CombinationScore {
                    members: vec![p.pair.first.clone(), p.pair.second.clone()],
                    score: p.weight,
                    provenance: vec![p.pair.clone()],
                })
                .collect()
        } else {
            expand_combinations(&pairs, n, cfg.top_pairs.max(2))?
        };
        combinations.insert(n, list);
    }
    Ok(Selection {
        qpp,
        correlations,
        pairs,
        combinations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a: &str, b: &str, w: f64) -> PairScore {
        PairScore {
            pair: RankerPair::new(a, b),
            effectiveness_product: w,
            correlation: 0.0,
            weight: w,
            beta: -1.0,
        }
    }

    #[test]
    fn weight_formula() {
        assert_eq!(pair_weight(1.0, 1.0, 0.0, -1.0), 1.0);
        assert!((pair_weight(2.0, 3.0, 0.5, -1.0) - 9.0).abs() < 1e-12);
        assert!((pair_weight(2.0, 3.0, 0.5, 1.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn missing_correlation_is_an_error() {
        let gammas: BTreeMap<String, f64> =
            [("a".to_string(), 1.0), ("b".to_string(), 2.0)].into_iter().collect();
        assert!(score_pairs(&gammas, &HashMap::new(), -1.0).is_err());
        let bad: BTreeMap<String, f64> =
            [("a".to_string(), 0.0), ("b".to_string(), 2.0)].into_iter().collect();
        assert!(matches!(
            score_pairs(&bad, &HashMap::new(), -1.0),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn ties_break_lexicographically() {
        let gammas: BTreeMap<String, f64> = ["c", "a", "b"]
            .iter()
            .map(|s| (s.to_string(), 1.0))
            .collect();
        let corr: HashMap<RankerPair, f64> = [("a", "b"), ("a", "c"), ("b", "c")]
            .iter()
            .map(|(x, y)| (RankerPair::new(*x, *y), 0.2))
            .collect();
        let scored = score_pairs(&gammas, &corr, -1.0).unwrap();
        let order: Vec<_> = scored.iter().map(|p| (p.pair.first.as_str(), p.pair.second.as_str())).collect();
        assert_eq!(order, vec![("a", "b"), ("a", "c"), ("b", "c")]);
    }

    #[test]
    fn overlapping_pairs_expand() {
        let pairs = vec![pair("A", "B", 2.0), pair("A", "C", 1.0)];
        let combos = expand_combinations(&pairs, 3, 5).unwrap();
        assert_eq!(combos.len(), 1);
        assert_eq!(combos[0].members, vec!["A", "B", "C"]);
        assert!((combos[0].score - 1.5).abs() < 1e-12);
        assert_eq!(combos[0].provenance.len(), 2);
    }

    #[test]
    fn disjoint_pairs_do_not_expand() {
        let pairs = vec![pair("A", "B", 2.0), pair("C", "D", 1.0)];
        assert!(expand_combinations(&pairs, 3, 5).unwrap().is_empty());
        assert!(expand_combinations(&pairs, 5, 5).unwrap().is_empty());
    }

    #[test]
    fn budget_limits_pairs() {
        let pairs = vec![pair("A", "B", 3.0), pair("C", "D", 2.0), pair("B", "C", 1.0)];
        assert!(expand_combinations(&pairs, 3, 2).unwrap().is_empty());
        let four = expand_combinations(&pairs, 4, 3).unwrap();
        assert_eq!(four.len(), 1);
        assert!((four[0].score - 2.0).abs() < 1e-12);
        assert!(expand_combinations(&pairs, 2, 3).is_err());
        assert!(expand_combinations(&pairs, 3, 1).is_err());
    }
}
