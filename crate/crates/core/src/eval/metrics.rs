use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::rank::{Collection, RankerOutput};

/// How gallery items are masked for each query. The query itself is always
/// skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Protocol {
    /// Every item is both a query and part of the gallery.
    #[default]
    AllQueries,
    /// Items of the query's class seen by the query's camera are junk.
    SameCamera,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" | "all-queries" => Ok(Protocol::AllQueries),
            "same-camera" => Ok(Protocol::SameCamera),
            other => Err(Error::param(
                "protocol",
                format!("{other:?}, expected all or same-camera"),
            )),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::AllQueries => "all",
            Protocol::SameCamera => "same-camera",
        })
    }
}

/// Per-query exclusion sets, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JunkMask {
    excluded: Vec<Vec<usize>>,
}

impl JunkMask {
    pub fn none(n: usize) -> Self {
        JunkMask {
            excluded: vec![Vec::new(); n],
        }
    }

    pub fn from_sets(mut excluded: Vec<Vec<usize>>) -> Self {
        for set in &mut excluded {
            set.sort_unstable();
            set.dedup();
        }
        JunkMask { excluded }
    }

    /// Same class and same camera as the query.
    pub fn same_camera(collection: &Collection) -> Result<Self> {
        let labels = require_labels(collection)?;
        let cameras = collection
            .cameras()
            .ok_or_else(|| Error::Format("same-camera protocol needs camera ids".to_string()))?;
        let n = collection.len();
        let mut by_class: Vec<Vec<usize>> = Vec::new();
        for (i, &c) in labels.iter().enumerate() {
            if by_class.len() <= c {
                by_class.resize(c + 1, Vec::new());
            }
            by_class[c].push(i);
        }
        let excluded = (0..n)
            .map(|q| {
                by_class[labels[q]]
                    .iter()
                    .copied()
                    .filter(|&i| i != q && cameras[i] == cameras[q])
                    .collect()
            })
            .collect();
        Ok(JunkMask { excluded })
    }

    pub fn for_protocol(protocol: Protocol, collection: &Collection) -> Result<Self> {
        match protocol {
            Protocol::AllQueries => Ok(JunkMask::none(collection.len())),
            Protocol::SameCamera => JunkMask::same_camera(collection),
        }
    }

    pub fn is_excluded(&self, query: usize, item: usize) -> bool {
        self.excluded[query].binary_search(&item).is_ok()
    }

    fn len(&self) -> usize {
        self.excluded.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub map_score: f64,
    /// `cmc[d]`: fraction of queries whose first match is at rank `<= d + 1`.
    pub cmc: Vec<f64>,
    /// `None` for queries without any relevant item.
    pub per_query_ap: Vec<Option<f64>>,
    /// Junk entries skipped across all ranked lists.
    pub excluded: usize,
}

impl EvalReport {
    pub fn r1(&self) -> f64 {
        self.cmc.first().copied().unwrap_or(0.0)
    }

    pub fn valid_queries(&self) -> usize {
        self.per_query_ap.iter().filter(|a| a.is_some()).count()
    }
}

fn require_labels(collection: &Collection) -> Result<&[usize]> {
    collection
        .labels()
        .ok_or_else(|| Error::Format("evaluation needs a label for every item".to_string()))
}

struct QueryOutcome {
    ap: Option<f64>,
    first_match: Option<usize>,
    excluded: usize,
}

/// MAP, CMC and per-query AP with self-match and junk removed. AP is not
/// interpolated and is normalized by the number of relevant items in the
/// collection, so relevant items beyond the list depth count as misses.
pub fn evaluate(
    ranker: &RankerOutput,
    collection: &Collection,
    mask: Option<&JunkMask>,
) -> Result<EvalReport> {
    let labels = require_labels(collection)?;
    let n = collection.len();
    if ranker.size() != n {
        return Err(Error::Mismatch(format!(
            "ranker {} covers {} items, collection has {n}",
            ranker.id(),
            ranker.size()
        )));
    }
    if let Some(m) = mask {
        if m.len() != n {
            return Err(Error::Mismatch(format!(
                "junk mask covers {} queries, collection has {n}",
                m.len()
            )));
        }
    }
    let mut class_sizes = vec![0usize; labels.iter().max().map_or(0, |m| m + 1)];
    for &c in labels {
        class_sizes[c] += 1;
    }
    let outcomes: Vec<QueryOutcome> = (0..n)
        .into_par_iter()
        .map(|q| {
            let class = labels[q];
            let masked_relevant = mask.map_or(0, |m| {
                m.excluded[q]
                    .iter()
                    .filter(|&&i| i != q && labels[i] == class)
                    .count()
            });
            let relevant = class_sizes[class] - 1 - masked_relevant;
            let mut rank = 0usize;
            let mut hits = 0usize;
            let mut precision_sum = 0.0;
            let mut first_match = None;
            let mut excluded = 0;
            for &i in ranker.list(q).positions() {
                if i == q {
                    continue;
                }
                if mask.is_some_and(|m| m.is_excluded(q, i)) {
                    excluded += 1;
                    continue;
                }
                rank += 1;
                if labels[i] == class {
                    hits += 1;
                    precision_sum += hits as f64 / rank as f64;
                    first_match.get_or_insert(rank);
                }
            }
            QueryOutcome {
                ap: (relevant > 0).then(|| precision_sum / relevant as f64),
                first_match: if relevant > 0 { first_match } else { None },
                excluded,
            }
        })
        .collect();

    let valid = outcomes.iter().filter(|o| o.ap.is_some()).count();
    if valid == 0 {
        return Err(Error::Numeric("no query has a relevant item".to_string()));
    }
    let map_score = compensated_sum(outcomes.iter().filter_map(|o| o.ap)) / valid as f64;
    let mut first_counts = vec![0usize; ranker.depth()];
    for o in &outcomes {
        if let Some(r) = o.first_match {
            first_counts[r - 1] += 1;
        }
    }
    let mut cmc = Vec::with_capacity(first_counts.len());
    let mut running = 0usize;
    for c in first_counts {
        running += c;
        cmc.push(running as f64 / valid as f64);
    }
    Ok(EvalReport {
        map_score,
        cmc,
        per_query_ap: outcomes.iter().map(|o| o.ap).collect(),
        excluded: outcomes.iter().map(|o| o.excluded).sum(),
    })
}

pub fn mean_average_precision(
    ranker: &RankerOutput,
    collection: &Collection,
    mask: Option<&JunkMask>,
) -> Result<EvalReport> {
    evaluate(ranker, collection, mask)
}

pub fn cmc_curve(
    ranker: &RankerOutput,
    collection: &Collection,
    mask: Option<&JunkMask>,
) -> Result<Vec<f64>> {
    Ok(evaluate(ranker, collection, mask)?.cmc)
}

/// Pearson correlation coefficient of two equally long series.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Mismatch(format!(
            "series lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Numeric("need at least two points".to_string()));
    }
    let n = xs.len() as f64;
    let mx = compensated_sum(xs.iter().copied()) / n;
    let my = compensated_sum(ys.iter().copied()) / n;
    let sxy = compensated_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let syy = compensated_sum(ys.iter().map(|y| (y - my) * (y - my)));
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::Numeric("zero variance series".to_string()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation between predicted effectiveness and measured MAP.
pub fn qpp_correlation(gammas: &[f64], maps: &[f64]) -> Result<f64> {
    if gammas.len() < 3 {
        return Err(Error::param(
            "rankers",
            format!("need at least 3 rankers, got {}", gammas.len()),
        ));
    }
    pearson(gammas, maps)
}
