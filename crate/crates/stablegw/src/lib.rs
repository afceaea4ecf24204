//! Harmonic measure of simple random walk on critical Galton-Watson trees
//! whose offspring law lies in the domain of attraction of a stable law.
//!
//! The crate bundles the pieces needed to study the typical-mass exponent
//! λ_α numerically:
//!
//! * [`offspring`]: exact stable-family offspring laws, size-biasing, survival
//!   probabilities and samplers with unbounded heavy tails;
//! * [`gwtree`]: arena trees and exact samplers for conditioned, size-biased and
//!   backward trees, plus tree reduction;
//! * [`electric`]: conductances and harmonic measure by flow splitting, and the
//!   backward-spine statistics;
//! * [`rde`]: population dynamics for the conductance fixed-point equations and
//!   three estimators of λ_α;
//! * [`contree`]: truncated continuous trees, conductance bounds and spine
//!   ergodic averages;
//! * [`experiments`]: the reproducible experiments behind the command line tool.
//!
//! Runnable walkthroughs live in the `examples/` directory.

pub mod contree;
pub mod electric;
pub mod error;
pub mod experiments;
pub mod gwtree;
pub mod offspring;
pub mod rde;
pub mod record;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
