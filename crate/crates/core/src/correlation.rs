//! Truncated rank-biased overlap between rankers.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::rank::{RankedList, RankerOutput};

/// Which overlap enters the depth-`d` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RboVariant {
    /// `|A_d ∩ B_d| / d` with depth-`d` prefixes (standard RBO).
    #[default]
    Prefix,
    /// `|A_k ∩ B_k| / d` at every depth, the fixed-k reading. Can exceed 1.
    FixedK,
}

impl FromStr for RboVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prefix" => Ok(RboVariant::Prefix),
            "fixed-k" | "fixed_k" => Ok(RboVariant::FixedK),
            other => Err(Error::param("rbo", format!("{other:?}, expected prefix or fixed-k"))),
        }
    }
}

impl fmt::Display for RboVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RboVariant::Prefix => "prefix",
            RboVariant::FixedK => "fixed-k",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationConfig {
    pub k: usize,
    pub alpha: f64,
    pub variant: RboVariant,
}

impl CorrelationConfig {
    pub fn new(k: usize, alpha: f64) -> Result<Self> {
        let cfg = CorrelationConfig {
            k,
            alpha,
            variant: RboVariant::Prefix,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_variant(mut self, variant: RboVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("k", "must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", format!("{} not in (0, 1)", self.alpha)));
        }
        Ok(())
    }

    /// Largest value `rbo_pair` can return with the prefix variant.
    pub fn upper_bound(&self) -> f64 {
        1.0 - self.alpha.powi(self.k as i32)
    }
}

impl Default for CorrelationConfig {
    fn default() -> Self {
        CorrelationConfig {
            k: 20,
            alpha: 0.9,
            variant: RboVariant::Prefix,
        }
    }
}

/// RBO of two ranked lists truncated at depth `cfg.k`.
pub fn rbo_pair(a: &RankedList, b: &RankedList, cfg: &CorrelationConfig) -> Result<f64> {
    cfg.validate()?;
    let k = cfg.k;
    if a.depth() < k || b.depth() < k {
        return Err(Error::param(
            "k",
            format!(
                "{k} exceeds list depth ({} / {})",
                a.depth(),
                b.depth()
            ),
        ));
    }
    let a = &a.positions()[..k];
    let b = &b.positions()[..k];
    let mut total = 0.0;
    let mut discount = 1.0;
    match cfg.variant {
        RboVariant::Prefix => {
            let mut seen_a = HashSet::with_capacity(k);
            let mut seen_b = HashSet::with_capacity(k);
            let mut overlap = 0usize;
            for d in 0..k {
                let (x, y) = (a[d], b[d]);
                if x == y {
                    overlap += 1;
                } else {
                    overlap += usize::from(seen_b.contains(&x)) + usize::from(seen_a.contains(&y));
                }
                seen_a.insert(x);
                seen_b.insert(y);
                total += discount * overlap as f64 / (d + 1) as f64;
                discount *= cfg.alpha;
            }
        }
        RboVariant::FixedK => {
            let set_a: HashSet<usize> = a.iter().copied().collect();
            let overlap = b.iter().filter(|x| set_a.contains(x)).count() as f64;
            for d in 0..k {
                total += discount * overlap / (d + 1) as f64;
                discount *= cfg.alpha;
            }
        }
    }
    Ok((1.0 - cfg.alpha) * total)
}

/// Mean per-query RBO between two rankers over the same collection.
pub fn rbo_rankers(a: &RankerOutput, b: &RankerOutput, cfg: &CorrelationConfig) -> Result<f64> {
    if a.size() != b.size() {
        return Err(Error::Mismatch(format!(
            "rankers {} and {} cover {} and {} items",
            a.id(),
            b.id(),
            a.size(),
            b.size()
        )));
    }
    let per_query = (0..a.size())
        .into_par_iter()
        .map(|q| rbo_pair(a.list(q), b.list(q), cfg))
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(per_query) / a.size() as f64)
}
