//! Reproducible experiment pipelines and the command-line front end.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod output;

pub use config::{ExperimentConfig, NoisePreset, StateSpec};
pub use experiments::{run_fig2, run_fig3, run_fig4, Fig2Row, Fig3Row, Fig4Row};
