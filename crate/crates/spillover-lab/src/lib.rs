//! Simulation and estimation toolkit for causal inference when treatments
//! spill over a network.
//!
//! The crate covers the full pipeline for studying treatment effects under
//! interference:
//!
//! * [`graph`] — interference graphs, random graph generators (random dot
//!   product graphs, β-models with superstars), path counts, distances, and
//!   edge-list I/O;
//! * [`design`] — Bernoulli, complete, and cluster randomization with exact
//!   assignment probabilities and exhaustive enumeration;
//! * [`outcome`] — potential-outcome models: a fixed linear exposure model
//!   and a Gaussian Markov random field with treatment and outcome spillover;
//! * [`estimand`] — direct/indirect/total effects, exposure means, welfare,
//!   closed-form large-graph effects, and brute-force oracles;
//! * [`estimator`] — Horvitz-Thompson, Hájek, and doubly robust exposure-mean
//!   estimators plus profile maximum likelihood for the random-field model;
//! * [`crt`] — conditional randomization tests for interference with focal
//!   units;
//! * [`harness`] — replicated simulation studies with deterministic seeding,
//!   CSV/JSON emission, and the scenario presets used by the command-line
//!   tool.
//!
//! Everything randomized takes an explicit seeded RNG ([`seed::Rng`]);
//! replicated computations derive one RNG per replicate from a master seed so
//! results are identical regardless of thread count or scheduling.

pub mod crt;
pub mod design;
pub mod error;
pub mod estimand;
pub mod estimator;
pub mod graph;
pub mod harness;
pub mod outcome;
pub mod seed;

pub use error::{Error, Result};
