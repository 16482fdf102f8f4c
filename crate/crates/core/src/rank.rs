//! Rank model: collections, ranked lists, per-ranker outputs and distances.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default ranked-list depth for a collection of `n` items.
pub fn default_depth(n: usize) -> usize {
    n.min(1000)
}

/// An ordered set of items with opaque string ids.
///
/// Labels and camera ids are carried along for evaluation only; nothing in
/// selection or fusion reads them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collection {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    labels: Option<Vec<usize>>,
    class_names: Vec<String>,
    cameras: Option<Vec<u32>>,
}

impl Collection {
    pub fn new(ids: Vec<String>) -> Result<Self> {
        if ids.len() < 2 {
            return Err(Error::Format(format!(
                "a collection needs at least 2 items, got {}",
                ids.len()
            )));
        }
        let mut index = HashMap::with_capacity(ids.len());
        for (i, id) in ids.iter().enumerate() {
            if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c == ':') {
                return Err(Error::Format(format!("invalid item id {id:?}")));
            }
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate item id {id:?}")));
            }
        }
        Ok(Collection {
            ids,
            index,
            labels: None,
            class_names: Vec::new(),
            cameras: None,
        })
    }

    /// Items named `0`, `1`, ... `n-1`.
    pub fn anonymous(n: usize) -> Result<Self> {
        Collection::new((0..n).map(|i| i.to_string()).collect())
    }

    /// Attach one class label per item, in item order.
    pub fn with_labels<S: AsRef<str>>(mut self, labels: &[S]) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Format(format!(
                "expected {} labels, got {}",
                self.len(),
                labels.len()
            )));
        }
        let mut names: Vec<String> = Vec::new();
        let mut lookup: HashMap<&str, usize> = HashMap::new();
        let mut dense = Vec::with_capacity(labels.len());
        for label in labels {
            let label = label.as_ref();
            let next = names.len();
            let id = *lookup.entry(label).or_insert(next);
            if id == next {
                names.push(label.to_string());
            }
            dense.push(id);
        }
        self.labels = Some(dense);
        self.class_names = names;
        Ok(self)
    }

    pub fn with_cameras(mut self, cameras: Vec<u32>) -> Result<Self> {
        if cameras.len() != self.len() {
            return Err(Error::Format(format!(
                "expected {} camera ids, got {}",
                self.len(),
                cameras.len()
            )));
        }
        self.cameras = Some(cameras);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Dense class index per item.
    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn class_name(&self, class: usize) -> &str {
        &self.class_names[class]
    }

    pub fn cameras(&self) -> Option<&[u32]> {
        self.cameras.as_deref()
    }
}

/// The ranked list of one query: item indices, most similar first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankedList {
    query: usize,
    positions: Vec<usize>,
}

impl RankedList {
    pub fn new(query: usize, positions: Vec<usize>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Format(format!("ranked list of query {query} is empty")));
        }
        let mut seen = positions.clone();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Format(format!(
                "item {} appears twice in the ranked list of query {query}",
                w[0]
            )));
        }
        Ok(RankedList { query, positions })
    }

    /// Move the query to position 1, keeping the relative order of the rest.
    /// A query missing from the list is inserted and the tail entry dropped,
    /// so the depth is unchanged.
    pub fn with_self_first(mut self) -> Self {
        match self.positions.iter().position(|&x| x == self.query) {
            Some(0) => {}
            Some(p) => self.positions[..=p].rotate_right(1),
            None => {
                self.positions.pop();
                self.positions.insert(0, self.query);
            }
        }
        self
    }

    pub fn query(&self) -> usize {
        self.query
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn depth(&self) -> usize {
        self.positions.len()
    }

    /// 1-based position of `item`, if it is in the list.
    pub fn position_of(&self, item: usize) -> Option<usize> {
        self.positions.iter().position(|&x| x == item).map(|p| p + 1)
    }

    /// The first `k` entries: the k-neighborhood of the query.
    pub fn neighborhood(&self, k: usize) -> Result<&[usize]> {
        neighborhood(self, k)
    }
}

/// The k-neighborhood set of a ranked list, as its first `k` entries.
pub fn neighborhood(list: &RankedList, k: usize) -> Result<&[usize]> {
    if k == 0 || k > list.depth() {
        return Err(Error::param(
            "k",
            format!("neighborhood size {k} must be in 1..={}", list.depth()),
        ));
    }
    Ok(&list.positions[..k])
}

/// All ranked lists produced by one ranker, one per query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankerOutput {
    id: String,
    size: usize,
    depth: usize,
    lists: Vec<RankedList>,
}

impl RankerOutput {
    /// Validates that there is exactly one list per query index, in order,
    /// that every list has the same depth and only references items `< size`.
    pub fn new(id: impl Into<String>, size: usize, lists: Vec<RankedList>) -> Result<Self> {
        let id = id.into();
        if lists.len() != size {
            return Err(Error::Format(format!(
                "ranker {id}: expected {size} ranked lists, got {}",
                lists.len()
            )));
        }
        let depth = lists.first().map_or(0, RankedList::depth);
        if depth == 0 || depth > size {
            return Err(Error::Format(format!(
                "ranker {id}: depth {depth} outside 1..={size}"
            )));
        }
        for (q, list) in lists.iter().enumerate() {
            if list.query != q {
                return Err(Error::Format(format!(
                    "ranker {id}: list {q} belongs to query {}",
                    list.query
                )));
            }
            if list.depth() != depth {
                return Err(Error::Format(format!(
                    "ranker {id}: inconsistent depths ({} for query {q}, expected {depth})",
                    list.depth()
                )));
            }
            if let Some(&bad) = list.positions.iter().find(|&&i| i >= size) {
                return Err(Error::Format(format!(
                    "ranker {id}: item index {bad} out of range in query {q}"
                )));
            }
        }
        Ok(RankerOutput {
            id,
            size,
            depth,
            lists,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Collection size N.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Shared list depth L.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn lists(&self) -> &[RankedList] {
        &self.lists
    }

    pub fn list(&self, query: usize) -> &RankedList {
        &self.lists[query]
    }

    /// Keep only the first `depth` entries of every list.
    pub fn truncated(&self, depth: usize) -> Result<RankerOutput> {
        if depth == 0 || depth > self.depth {
            return Err(Error::param(
                "depth",
                format!("cannot truncate depth {} to {depth}", self.depth),
            ));
        }
        let lists = self
            .lists
            .iter()
            .map(|l| RankedList {
                query: l.query,
                positions: l.positions[..depth].to_vec(),
            })
            .collect();
        Ok(RankerOutput {
            id: self.id.clone(),
            size: self.size,
            depth,
            lists,
        })
    }
}

/// Row-major N×N matrix of non-negative distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    values: Vec<f32>,
}

impl DistanceMatrix {
    pub fn new(size: usize, values: Vec<f32>) -> Result<Self> {
        if size < 2 {
            return Err(Error::Format(format!("distance matrix of size {size}")));
        }
        if values.len() != size * size {
            return Err(Error::Format(format!(
                "distance matrix of size {size} needs {} values, got {}",
                size * size,
                values.len()
            )));
        }
        Ok(DistanceMatrix { size, values })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let size = rows.len();
        let mut values = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::Format(format!(
                    "row {i} has {} columns, expected {size}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        DistanceMatrix::new(size, values)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.size..(i + 1) * self.size]
    }

    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.values[i * self.size + j]
    }
}

/// Rank the first `depth` items of `row` by ascending distance, ties by index.
pub(crate) fn rank_row<T: Copy + PartialOrd>(row: &[T], depth: usize) -> Vec<usize> {
    let cmp = |a: &usize, b: &usize| {
        row[*a]
            .partial_cmp(&row[*b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(b))
    };
    let mut order: Vec<usize> = (0..row.len()).collect();
    if depth < order.len() {
        order.select_nth_unstable_by(depth - 1, cmp);
        order.truncate(depth);
    }
    order.sort_unstable_by(cmp);
    order
}

/// Sort every row of `distances` into a ranked list of length `depth`.
pub fn rank_from_distances(
    id: impl Into<String>,
    distances: &DistanceMatrix,
    depth: usize,
) -> Result<RankerOutput> {
    let n = distances.size();
    if depth == 0 || depth > n {
        return Err(Error::param("depth", format!("{depth} must be in 1..={n}")));
    }
    for (idx, &v) in distances.values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Format(format!(
                "distance at row {}, column {} is {v}; distances must be finite and non-negative",
                idx / n,
                idx % n
            )));
        }
    }
    let lists = (0..n)
        .into_par_iter()
        .map(|q| {
            RankedList {
                query: q,
                positions: rank_row(distances.row(q), depth),
            }
            .with_self_first()
        })
        .collect();
    RankerOutput::new(id, n, lists)
}
