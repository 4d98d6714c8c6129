//! Group-wise reliability of binary risk classifiers under controlled input noise.
//!
//! A fitted classifier is compared against itself: once on clean test rows,
//! once on a noise-injected copy of the same rows. The two prediction sets act
//! as two raters of the same subjects, and their agreement is summarized with
//! chance-corrected statistics (Cohen's kappa, PABAK, bias and prevalence
//! indices, ICC(A,1)). Computed per demographic group across a grid of noise
//! levels, the fold-averaged curves expose reliability gaps between groups and
//! show how much of each gap is a prevalence artifact.
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --example agreement_stats      # kappa, PABAK and the two indices
//! cargo run --example icc_scores           # ICC(A,1) on raw scores
//! cargo run --example prevalence_mechanism # equal agreement, unequal kappa
//! cargo run --example noise_raters         # building a synthetic second rater
//! cargo run --example fit_risk_model       # folds, scaling, logistic fit
//! cargo run --example sweep_synthetic      # end-to-end sweep on synthetic data
//! cargo run --example plot_curves          # deterministic SVG rendering
//! ```
//!
//! The same pipeline is scriptable through the thin `reliagap` binary with the
//! subcommands `stats`, `fit`, `simulate`, `plot` and `manifest`.

pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod irr;
pub mod model;
pub mod noise;
pub mod report;
pub mod seed;

pub use error::{Error, Result};
