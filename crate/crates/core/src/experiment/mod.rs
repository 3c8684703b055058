//! Experiment driver: configuration, runs, decay fits and report output.

pub mod config;
pub mod fit;
pub mod report;
pub mod runs;

pub use config::{BandConfig, ChiConfig, ExperimentConfig, ModelChoice, SymbolChoice, Tolerances, OUT_DIR_ENV};
pub use fit::{DecayFit, Verdict};
pub use report::{emit_report, CriterionOutcome, DecaySeries, ExperimentReport, Table};
pub use runs::{
    chi_fixture, run_all, run_band_agreement, run_basis_check, run_g_identity, run_low_band_decay, run_scaling_limit,
    run_smoothed_decay, run_spectrum, run_weyl_law, Level, DEFAULT_G_OFFSETS,
};
