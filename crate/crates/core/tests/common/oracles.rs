//! Naive reference implementations on plain vectors. Deliberately dense and
//! loop-based; no code is shared with the library.

#![allow(dead_code)]

use std::collections::BTreeSet;

/// `lists[q]` is the ranked list of query `q`, best first.
pub type Lists = Vec<Vec<usize>>;

fn position(list: &[usize], item: usize) -> Option<usize> {
    for (p, &x) in list.iter().enumerate() {
        if x == item {
            return Some(p + 1);
        }
    }
    None
}

fn log_weight(pos: usize, k: usize) -> f64 {
    1.0 - (pos as f64).ln() / (k as f64).ln()
}

/// Dense incidence matrix, `h[e][v]`.
pub fn incidence(lists: &Lists, k: usize) -> Vec<Vec<f64>> {
    let n = lists.len();
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut total = 0.0;
            for y in 0..n {
                let Some(py) = position(&lists[i][..k], y) else { continue };
                let Some(pj) = position(&lists[y][..k], j) else { continue };
                total += log_weight(py, k) * log_weight(pj, k);
            }
            h[i][j] = total;
        }
    }
    h
}

pub fn edge_weights(h: &[Vec<f64>], k: usize) -> Vec<f64> {
    h.iter()
        .map(|row| {
            let mut sorted = row.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            sorted.iter().take(k).sum()
        })
        .collect()
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            for t in 0..n {
                out[i][j] += a[i][t] * b[t][j];
            }
        }
    }
    out
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

/// `(H Hᵀ) ∘ (Hᵀ H)`.
pub fn similarity(h: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let ht = transpose(h);
    let edges = mat_mul(h, &ht);
    let vertices = mat_mul(&ht, h);
    let n = h.len();
    (0..n)
        .map(|i| (0..n).map(|j| edges[i][j] * vertices[i][j]).collect())
        .collect()
}

pub fn cartesian(h: &[Vec<f64>], weights: &[f64]) -> Vec<Vec<f64>> {
    let n = h.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            for e in 0..n {
                c[i][j] += weights[e] * h[e][i] * h[e][j];
            }
        }
    }
    c
}

pub fn combined(c: &[Vec<f64>], s: &[Vec<f64>]) -> Vec<Vec<f64>> {
    c.iter()
        .zip(s)
        .map(|(cr, sr)| cr.iter().zip(sr).map(|(a, b)| a * b).collect())
        .collect()
}

/// Fused scores of every (query, item) pair, `None` outside every top-`depth` list.
pub fn fused(features: &[(Lists, Vec<f64>)], depth: usize) -> Vec<Vec<Option<f64>>> {
    let n = features[0].0.len();
    let mut out = vec![vec![None; n]; n];
    for q in 0..n {
        for i in 0..n {
            let listed = features
                .iter()
                .any(|(lists, _)| position(&lists[q][..depth], i).is_some());
            if !listed {
                continue;
            }
            let mut score = 1.0;
            for (lists, weights) in features {
                let divisor = match position(&lists[q][..depth], i) {
                    Some(p) => 1.0 + (p as f64).log(depth as f64),
                    None => 2.0,
                };
                score *= (1.0 + weights[q]) / divisor;
            }
            out[q][i] = Some(score);
        }
    }
    out
}

/// Rank by ascending distance with ties by index, then put the query first.
pub fn rank_distances(rows: &[Vec<f32>], depth: usize) -> Lists {
    rows.iter()
        .enumerate()
        .map(|(q, row)| {
            let mut idx: Vec<usize> = (0..row.len()).collect();
            idx.sort_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap().then(a.cmp(&b)));
            idx.retain(|&i| i != q);
            idx.insert(0, q);
            idx.truncate(depth);
            idx
        })
        .collect()
}

/// Stable sort by descending affinity, ties by original position; then the
/// unscored remainder of the original list; query moved first.
pub fn rerank(w: &[Vec<f64>], lists: &Lists, depth: usize) -> Lists {
    let n = lists.len();
    (0..n)
        .map(|q| {
            let original = &lists[q];
            let mut order: Vec<usize> = original.clone();
            let mut rest: Vec<usize> = (0..n).filter(|i| !original.contains(i)).collect();
            order.append(&mut rest);
            let mut scored: Vec<usize> = order.iter().copied().filter(|&i| w[q][i] > 0.0).collect();
            scored.sort_by(|&a, &b| w[q][b].partial_cmp(&w[q][a]).unwrap());
            let mut out = scored;
            out.extend(original.iter().copied().filter(|&i| w[q][i] <= 0.0));
            out.truncate(depth);
            if let Some(p) = out.iter().position(|&x| x == q) {
                out.remove(p);
            } else {
                out.pop();
            }
            out.insert(0, q);
            out
        })
        .collect()
}

/// Truncated RBO with depth-d prefix overlaps.
pub fn rbo(a: &[usize], b: &[usize], k: usize, alpha: f64) -> f64 {
    let mut total = 0.0;
    for d in 1..=k {
        let sa: BTreeSet<usize> = a[..d].iter().copied().collect();
        let sb: BTreeSet<usize> = b[..d].iter().copied().collect();
        let overlap = sa.intersection(&sb).count();
        total += alpha.powi(d as i32 - 1) * overlap as f64 / d as f64;
    }
    (1.0 - alpha) * total
}

/// Average precision of one query; `relevant` is the collection-wide count.
pub fn average_precision(list: &[usize], query: usize, labels: &[usize], junk: &[usize]) -> Option<f64> {
    let relevant = (0..labels.len())
        .filter(|&i| i != query && labels[i] == labels[query] && !junk.contains(&i))
        .count();
    if relevant == 0 {
        return None;
    }
    let kept: Vec<usize> = list
        .iter()
        .copied()
        .filter(|&i| i != query && !junk.contains(&i))
        .collect();
    let mut ap = 0.0;
    for (r, &i) in kept.iter().enumerate() {
        if labels[i] == labels[query] {
            let hits_so_far = kept[..=r].iter().filter(|&&x| labels[x] == labels[query]).count();
            ap += hits_so_far as f64 / (r + 1) as f64;
        }
    }
    Some(ap / relevant as f64)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Every size-`n` union of a subset of `pairs` whose pair graph is connected,
/// scored by the mean weight of the listed pairs inside it.
pub fn combinations(pairs: &[((String, String), f64)], n: usize) -> Vec<(Vec<String>, f64)> {
    let t = pairs.len();
    let mut found: BTreeSet<Vec<String>> = BTreeSet::new();
    for mask in 1u32..(1 << t) {
        let chosen: Vec<usize> = (0..t).filter(|b| mask & (1 << b) != 0).collect();
        let mut members: BTreeSet<String> = BTreeSet::new();
        for &c in &chosen {
            members.insert(pairs[c].0 .0.clone());
            members.insert(pairs[c].0 .1.clone());
        }
        if members.len() != n {
            continue;
        }
        // connectivity by repeated relaxation
        let mut reached: BTreeSet<String> = BTreeSet::new();
        reached.insert(pairs[chosen[0]].0 .0.clone());
        loop {
            let before = reached.len();
            for &c in &chosen {
                let (a, b) = &pairs[c].0;
                if reached.contains(a) || reached.contains(b) {
                    reached.insert(a.clone());
                    reached.insert(b.clone());
                }
            }
            if reached.len() == before {
                break;
            }
        }
        if reached.len() == n {
            found.insert(members.into_iter().collect());
        }
    }
    let mut out: Vec<(Vec<String>, f64)> = found
        .into_iter()
        .map(|m| {
            let inside: Vec<f64> = pairs
                .iter()
                .filter(|((a, b), _)| m.contains(a) && m.contains(b))
                .map(|(_, w)| *w)
                .collect();
            let score = inside.iter().sum::<f64>() / inside.len() as f64;
            (m, score)
        })
        .collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    out
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
