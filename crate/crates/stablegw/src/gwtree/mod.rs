//! Finite rooted trees and Galton-Watson samplers.

mod backward;
mod sample;
mod tree;

pub use backward::{sample_backward, sample_marked_levels, BackwardMode, BackwardTree};
pub use sample::{
    sample_conditioned, sample_gw, sample_gw_truncated, sample_reduced_conditioned,
    sample_size_biased, sample_size_biased_reduced, SizeBiased, TreeModel,
    binomial as binomial_draw,
};
pub use tree::{reduce, Tree, TreeBuilder, DEFAULT_CAP, NONE};
