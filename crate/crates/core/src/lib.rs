//! Local empirical-likelihood independence screening for ultra-high
//! dimensional regression.
//!
//! The central statistic, for each predictor `X_j`, is the maximum over
//! evaluation points `x` of the empirical likelihood ratio for the local
//! moment condition `E[K_h(X_j - x) Y] = 0`. Features are ranked by this
//! statistic and the top ones retained. Alongside it the crate provides a
//! varying-coefficient variant, an iterative variant, three comparator
//! statistics and the simulation designs used to evaluate them.

pub mod baselines;
pub mod dataset;
pub mod el;
pub mod error;
pub mod iterative;
pub mod kernel;
pub mod report;
pub mod rng;
pub mod screening;
pub mod simgen;
pub mod vc;

pub use dataset::{load_csv, rescale_column, rescale_features, CsvOptions, Dataset, RescaleMode};
pub use el::{el_logratio, el_logratio_bruteforce, ElOutcome, ElStatus};
pub use error::{Result, ScreenError};
pub use kernel::{Bandwidth, KernelConfig, KernelFamily};
pub use report::{Method, ScreeningReport, Selection};
pub use screening::{screen, EvalPolicy, ScreeningConfig};
pub use vc::{vc_screen, VcConfig};
