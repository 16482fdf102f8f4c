//! Labeled evaluation and synthetic benchmarks. This is the only module that
//! reads class labels.

mod metrics;
mod synth;

pub use metrics::{
    cmc_curve, evaluate, mean_average_precision, pearson, qpp_correlation, EvalReport, JunkMask,
    Protocol,
};
pub use synth::{generate_synthetic, SynthRanker, SynthSpec};
