//! Hypergraph query performance prediction.
//!
//! The weight of hyperedge `e_i` is used as the predicted effectiveness of
//! ranked list `τ_i`; a ranker's score aggregates those over all queries.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hypergraph::{build_hypergraph, Hypergraph};
use crate::numeric;
use crate::rank::RankerOutput;

/// How per-query scores are reduced to one ranker score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Mean,
    Median,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Aggregation::Mean),
            "median" => Ok(Aggregation::Median),
            other => Err(Error::param(
                "aggregation",
                format!("{other:?}, expected mean or median"),
            )),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Mean => "mean",
            Aggregation::Median => "median",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QppScores {
    pub ranker_id: String,
    pub per_query: Vec<f64>,
    pub ranker_score: f64,
}

/// `γ(τ_i) = h_p(e_i)` for every query.
pub fn hqpp_per_query(h: &Hypergraph) -> Vec<f64> {
    h.edge_weights().to_vec()
}

pub fn hqpp_ranker(scores: &[f64], aggregation: Aggregation) -> Result<f64> {
    let value = match aggregation {
        Aggregation::Mean => numeric::mean(scores),
        Aggregation::Median => numeric::median(scores),
    };
    value.ok_or_else(|| Error::Numeric("no per-query scores to aggregate".to_string()))
}

/// Build the hypergraph of `ranker` and score it.
pub fn estimate(ranker: &RankerOutput, k: usize, aggregation: Aggregation) -> Result<QppScores> {
    let h = build_hypergraph(ranker, k)?;
    scores_from_hypergraph(ranker.id(), &h, aggregation)
}

pub fn scores_from_hypergraph(
    ranker_id: &str,
    h: &Hypergraph,
    aggregation: Aggregation,
) -> Result<QppScores> {
    let per_query = hqpp_per_query(h);
    let ranker_score = hqpp_ranker(&per_query, aggregation)?;
    Ok(QppScores {
        ranker_id: ranker_id.to_string(),
        per_query,
        ranker_score,
    })
}
