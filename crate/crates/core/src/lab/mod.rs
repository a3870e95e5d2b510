//! Experiment harness: ensemble sweeps, summary statistics and fits, image
//! rendering, and the `qta` command line.

pub mod cli;
mod render;
mod stats;
mod sweep;

pub use render::{
    amplitude_grid, domain_color, render_amplitude_grid, render_legend, write_ppm, PpmImage,
    LEGEND_ANCHORS,
};
pub use stats::{
    fit_operator_means, loglog_fit, summarize, write_summary_csv, FitReport, GroupBy, GroupSummary,
    Stat, TableFits,
};
pub use sweep::{
    read_sweep_csv, run_cell, run_sweep, sweep_with, thread_count, write_sweep_csv,
    ExperimentConfig, SweepResult, SweepRow, DEFAULT_MASTER_SEED,
};
