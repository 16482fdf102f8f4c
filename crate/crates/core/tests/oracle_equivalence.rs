mod common;

use std::collections::{BTreeMap, HashMap};

use common::oracles::{self, close, Lists};
use hyperrank::correlation::{rbo_pair, CorrelationConfig};
use hyperrank::eval::{evaluate, pearson, JunkMask};
use hyperrank::fusion::{
    affinity, cartesian_similarity, fused_affinity, pairwise_similarity, rerank_from_affinity,
    Feature,
};
use hyperrank::hypergraph::build_hypergraph;
use hyperrank::rank::{rank_from_distances, Collection, DistanceMatrix, RankedList, RankerOutput};
use hyperrank::selection::{expand_combinations, score_pairs, PairScore, RankerPair};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_lists(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> Lists {
    (0..n)
        .map(|q| {
            let mut rest: Vec<usize> = (0..n).filter(|&i| i != q).collect();
            rest.shuffle(rng);
            let mut l = vec![q];
            l.extend(rest);
            l.truncate(depth);
            l
        })
        .collect()
}

fn output(id: &str, lists: &Lists) -> RankerOutput {
    let ranked = lists
        .iter()
        .enumerate()
        .map(|(q, l)| RankedList::new(q, l.clone()).unwrap())
        .collect();
    RankerOutput::new(id, lists.len(), ranked).unwrap()
}

fn dense(m: &hyperrank::fusion::AffinityMatrix, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j).unwrap_or(0.0)).collect())
        .collect()
}

fn assert_dense_close(got: &[Vec<f64>], want: &[Vec<f64>], what: &str) {
    for (i, (g, w)) in got.iter().zip(want).enumerate() {
        for (j, (a, b)) in g.iter().zip(w).enumerate() {
            assert!(close(*a, *b, 1e-9), "{what}({i},{j}): {a} vs {b}");
        }
    }
}

#[test]
fn hypergraph_products_match_dense_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let n = rng.gen_range(4..=30);
        let k = rng.gen_range(2..=n.min(8));
        let lists = random_lists(&mut rng, n, n);
        let h = build_hypergraph(&output("r", &lists), k).unwrap();

        let inc = oracles::incidence(&lists, k);
        for e in 0..n {
            for v in 0..n {
                assert!(close(h.incidence(e, v), inc[e][v], 1e-9));
            }
        }
        let hp = oracles::edge_weights(&inc, k);
        for e in 0..n {
            assert!(close(h.edge_weight(e), hp[e], 1e-9));
        }
        let s = oracles::similarity(&inc);
        let c = oracles::cartesian(&inc, &hp);
        let w = oracles::combined(&c, &s);
        assert_dense_close(&dense(&pairwise_similarity(&h), n), &s, "S");
        assert_dense_close(&dense(&cartesian_similarity(&h), n), &c, "C");
        assert_dense_close(&dense(&affinity(&h), n), &w, "W");
    }
}

#[test]
fn fused_scores_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..30 {
        let n = rng.gen_range(5..=30);
        let depth = rng.gen_range(3..=n);
        let k = rng.gen_range(2..=depth.min(8));
        let m = rng.gen_range(1..=3);
        let all: Vec<Lists> = (0..m).map(|_| random_lists(&mut rng, n, depth)).collect();
        let outs: Vec<RankerOutput> = all.iter().map(|l| output("f", l)).collect();
        let hs: Vec<_> = outs.iter().map(|o| build_hypergraph(o, k).unwrap()).collect();
        let features: Vec<Feature> = hs
            .iter()
            .zip(&outs)
            .map(|(h, r)| Feature { hypergraph: h, ranking: r })
            .collect();
        let got = fused_affinity(&features, depth).unwrap();
        let want = oracles::fused(
            &all.iter()
                .zip(&hs)
                .map(|(l, h)| (l.clone(), h.edge_weights().to_vec()))
                .collect::<Vec<_>>(),
            depth,
        );
        for q in 0..n {
            for i in 0..n {
                match (got.get(q, i), want[q][i]) {
                    (Some(a), Some(b)) => assert!(close(a, b, 1e-9), "({q},{i}) {a} vs {b}"),
                    (None, None) => {}
                    other => panic!("support differs at ({q},{i}): {other:?}"),
                }
            }
        }
    }
}

#[test]
fn ranking_matches_sort_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let n = rng.gen_range(2..=25);
        let depth = rng.gen_range(1..=n);
        // coarse values force ties, including with the query itself
        let rows: Vec<Vec<f32>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(0..4) as f32).collect())
            .collect();
        let got = rank_from_distances("d", &DistanceMatrix::from_rows(&rows).unwrap(), depth).unwrap();
        let want = oracles::rank_distances(&rows, depth);
        for q in 0..n {
            assert_eq!(got.list(q).positions(), want[q].as_slice());
        }
    }
}

#[test]
fn rerank_matches_stable_sort_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..30 {
        let n = rng.gen_range(4..=25);
        let k = rng.gen_range(2..=n.min(6));
        let depth = rng.gen_range(k..=n);
        let lists = random_lists(&mut rng, n, depth);
        let r = output("r", &lists);
        let h = build_hypergraph(&r, k).unwrap();
        let w = affinity(&h);
        let got = rerank_from_affinity(&w, &r, depth).unwrap();
        let want = oracles::rerank(&dense(&w, n), &lists, depth);
        for q in 0..n {
            assert_eq!(got.list(q).positions(), want[q].as_slice(), "query {q}");
        }
    }
}

#[test]
fn rbo_matches_naive_intersection() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..1000 {
        let n = rng.gen_range(2..=40);
        let k = rng.gen_range(1..=n);
        let alpha = rng.gen_range(0.05..0.99);
        let a = random_lists(&mut rng, n, n);
        let b = random_lists(&mut rng, n, n);
        let cfg = CorrelationConfig::new(k, alpha).unwrap();
        let la = RankedList::new(0, a[0].clone()).unwrap();
        let lb = RankedList::new(0, b[0].clone()).unwrap();
        let got = rbo_pair(&la, &lb, &cfg).unwrap();
        let want = oracles::rbo(&a[0], &b[0], k, alpha);
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
}

#[test]
fn average_precision_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..40 {
        let n = rng.gen_range(4..=40);
        let depth = rng.gen_range(2..=n);
        let classes = rng.gen_range(2..=4);
        let labels: Vec<String> = (0..n).map(|_| format!("c{}", rng.gen_range(0..classes))).collect();
        let collection = Collection::anonymous(n).unwrap().with_labels(&labels).unwrap();
        let dense_labels = collection.labels().unwrap().to_vec();
        let junk: Vec<Vec<usize>> = (0..n)
            .map(|q| (0..n).filter(|&i| i != q && rng.gen_bool(0.1)).collect())
            .collect();
        let lists = random_lists(&mut rng, n, depth);
        let mask = JunkMask::from_sets(junk.clone());
        let Ok(report) = evaluate(&output("r", &lists), &collection, Some(&mask)) else {
            continue;
        };
        let mut sum = 0.0;
        let mut valid = 0;
        for q in 0..n {
            let want = oracles::average_precision(&lists[q], q, &dense_labels, &junk[q]);
            match (report.per_query_ap[q], want) {
                (Some(a), Some(b)) => {
                    assert!((a - b).abs() <= 1e-10);
                    sum += b;
                    valid += 1;
                }
                (None, None) => {}
                other => panic!("query {q}: {other:?}"),
            }
        }
        assert!((report.map_score - sum / valid as f64).abs() <= 1e-10);
    }
}

#[test]
fn pearson_matches_textbook_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..200 {
        let n = rng.gen_range(3..=30);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * 0.3 + rng.gen_range(-5.0..5.0)).collect();
        assert!((pearson(&xs, &ys).unwrap() - oracles::pearson(&xs, &ys)).abs() <= 1e-12);
    }
}

fn random_pairs(rng: &mut ChaCha8Rng, m: usize) -> Vec<PairScore> {
    let names: Vec<String> = (0..m).map(|i| format!("r{i}")).collect();
    let gammas: BTreeMap<String, f64> =
        names.iter().map(|n| (n.clone(), rng.gen_range(0.5..3.0))).collect();
    let mut corr = HashMap::new();
    for a in 0..m {
        for b in a + 1..m {
            corr.insert(RankerPair::new(names[a].clone(), names[b].clone()), rng.gen_range(0.0..0.6));
        }
    }
    score_pairs(&gammas, &corr, -1.0).unwrap()
}

#[test]
fn pair_scores_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..20 {
        let m = rng.gen_range(2..=9);
        let pairs = random_pairs(&mut rng, m);
        assert_eq!(pairs.len(), m * (m - 1) / 2);
        let mut want: Vec<(f64, String, String)> = pairs
            .iter()
            .map(|p| {
                (
                    p.effectiveness_product * (1.0 + p.correlation),
                    p.pair.first.clone(),
                    p.pair.second.clone(),
                )
            })
            .collect();
        want.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then((&a.1, &a.2).cmp(&(&b.1, &b.2))));
        for (p, w) in pairs.iter().zip(&want) {
            assert_eq!((&p.pair.first, &p.pair.second), (&w.1, &w.2));
            assert!(close(p.weight, w.0, 1e-12));
        }
    }
}

#[test]
fn expansion_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..60 {
        let m = rng.gen_range(3..=7);
        let pairs = random_pairs(&mut rng, m);
        let top: Vec<((String, String), f64)> = pairs
            .iter()
            .take(5)
            .map(|p| ((p.pair.first.clone(), p.pair.second.clone()), p.weight))
            .collect();
        for n in [3, 4] {
            let got = expand_combinations(&pairs, n, 5).unwrap();
            let want = oracles::combinations(&top, n);
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                assert_eq!(g.members, w.0);
                assert!(close(g.score, w.1, 1e-12));
            }
        }
    }
}
