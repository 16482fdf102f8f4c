use rand::{Rng, SeedableRng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rank::{default_depth, rank_row, Collection, RankedList, RankerOutput};

/// Noise of the complementary rankers on their reliable half.
pub const COMPLEMENTARY_NOISE: f64 = 0.05;
/// Noise of the complementary rankers on the other half.
pub const COMPLEMENTARY_UNRELIABLE_NOISE: f64 = 0.3;

/// One synthetic ranker.
///
/// For a query whose class is reliable, each (query, item) distance is
/// replaced by a uniform draw with probability `noise`; otherwise it keeps
/// the class-perfect value (same class in `[0, 1)`, other classes in
/// `[1, 2)`). Queries of unreliable classes use `unreliable_noise` instead.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthRanker {
    pub id: String,
    pub noise: f64,
    /// Classes this ranker is accurate on; `None` means all of them.
    pub reliable_classes: Option<Vec<usize>>,
    pub unreliable_noise: f64,
}

impl SynthRanker {
    pub fn new(id: impl Into<String>, noise: f64) -> Self {
        SynthRanker {
            id: id.into(),
            noise,
            reliable_classes: None,
            unreliable_noise: 1.0,
        }
    }

    pub fn with_unreliable_noise(mut self, noise: f64) -> Self {
        self.unreliable_noise = noise;
        self
    }

    pub fn reliable_on(mut self, classes: Vec<usize>) -> Self {
        self.reliable_classes = Some(classes);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub items_per_class: usize,
    pub rankers: Vec<SynthRanker>,
    pub seed: u64,
    /// Ranked-list depth; defaults to `min(N, 1000)`.
    pub depth: Option<usize>,
}

impl SynthSpec {
    pub fn size(&self) -> usize {
        self.num_classes * self.items_per_class
    }

    /// Rankers `r0 .. r{m-1}` with noise evenly spaced from `low` to `high`.
    pub fn graded(
        num_classes: usize,
        items_per_class: usize,
        noise: &[f64],
        seed: u64,
    ) -> Self {
        SynthSpec {
            num_classes,
            items_per_class,
            rankers: noise
                .iter()
                .enumerate()
                .map(|(i, &p)| SynthRanker::new(format!("r{i}"), p))
                .collect(),
            seed,
            depth: None,
        }
    }

    /// Two rankers, each nearly clean on one half of the classes and heavily
    /// corrupted on the other.
    pub fn complementary(num_classes: usize, items_per_class: usize, seed: u64) -> Self {
        let half = num_classes / 2;
        SynthSpec {
            num_classes,
            items_per_class,
            rankers: vec![
                SynthRanker::new("low", COMPLEMENTARY_NOISE)
                    .reliable_on((0..half).collect())
                    .with_unreliable_noise(COMPLEMENTARY_UNRELIABLE_NOISE),
                SynthRanker::new("high", COMPLEMENTARY_NOISE)
                    .reliable_on((half..num_classes).collect())
                    .with_unreliable_noise(COMPLEMENTARY_UNRELIABLE_NOISE),
            ],
            seed,
            depth: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::param(
                "num_classes",
                format!("{}; at least two classes are needed", self.num_classes),
            ));
        }
        if self.items_per_class < 2 {
            return Err(Error::param(
                "items_per_class",
                format!("{}; at least two items per class are needed", self.items_per_class),
            ));
        }
        if self.rankers.is_empty() {
            return Err(Error::param("rankers", "no rankers requested"));
        }
        for r in &self.rankers {
            for p in [r.noise, r.unreliable_noise] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::param("noise", format!("{p} for ranker {}", r.id)));
                }
            }
            if let Some(bad) = r
                .reliable_classes
                .iter()
                .flatten()
                .find(|&&c| c >= self.num_classes)
            {
                return Err(Error::param(
                    "reliable_classes",
                    format!("class {bad} of ranker {} does not exist", r.id),
                ));
            }
        }
        if let Some(d) = self.depth {
            if d == 0 || d > self.size() {
                return Err(Error::param("depth", format!("{d} outside 1..={}", self.size())));
            }
        }
        Ok(())
    }
}

/// Build a labeled collection and one ranker output per synthetic ranker.
/// Class membership is shuffled over item indices so index order carries no
/// label information. Output depends only on the spec.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<(Collection, Vec<RankerOutput>)> {
    spec.validate()?;
    let n = spec.size();
    let depth = spec.depth.unwrap_or_else(|| default_depth(n));

    let mut layout_rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut labels: Vec<usize> = (0..n).map(|i| i / spec.items_per_class).collect();
    labels.shuffle(&mut layout_rng);
    let width = (n - 1).to_string().len();
    let ids = (0..n).map(|i| format!("x{i:0width$}")).collect();
    let class_width = (spec.num_classes - 1).to_string().len();
    let names: Vec<String> = labels.iter().map(|c| format!("c{c:0class_width$}")).collect();
    let collection = Collection::new(ids)?.with_labels(&names)?;

    let rankers = spec
        .rankers
        .par_iter()
        .enumerate()
        .map(|(index, r)| {
            let mut reliable = vec![r.reliable_classes.is_none(); spec.num_classes];
            for &c in r.reliable_classes.iter().flatten() {
                reliable[c] = true;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(index as u64 + 1);
            let mut row = vec![0.0f64; n];
            let mut lists = Vec::with_capacity(n);
            for q in 0..n {
                let class = labels[q];
                let noise = if reliable[class] { r.noise } else { r.unreliable_noise };
                for (i, d) in row.iter_mut().enumerate() {
                    let corrupt = rng.gen::<f64>() < noise;
                    let u: f64 = rng.gen();
                    *d = if i == q {
                        -1.0
                    } else if corrupt {
                        2.0 * u
                    } else if labels[i] == class {
                        u
                    } else {
                        1.0 + u
                    };
                }
                lists.push(RankedList::new(q, rank_row(&row, depth))?);
            }
            RankerOutput::new(r.id.clone(), n, lists)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((collection, rankers))
}
