//! Statistical validation of visibility-graph links against a GJR-GARCH
//! null ensemble.
//!
//! The pipeline maps a volatility series onto its visibility graph (VG) and
//! invisibility graph (IVG), simulates an ensemble of series from a fitted
//! GJR-GARCH model, and keeps only the links whose occurrence frequency in
//! the ensemble is at most a threshold `rho`. Over sliding windows this
//! yields the validated-link count `n_t` and the validated visibility
//! `V_t = (n_t / <d>_t) / (n̄_t / <d̄>_t)`.
//!
//! Each capability has a runnable program under `examples/`:
//!
//! ```bash
//! cargo run --release --example visibility_graphs
//! cargo run --release --example fit_garch
//! cargo run --release --example null_ensemble
//! cargo run --release --example validate_window
//! cargo run --release --example indicator_bubble
//! cargo run --release --example degree_comparison
//! cargo run --release --example ensemble_stability
//! ```
//!
//! The `vgval` binary wraps the same pipeline for CSV input.

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod garch;
pub mod simplex;
pub mod stats;
pub mod timeseries;
pub mod validation;
pub mod visibility;

pub use error::{Error, Result};
