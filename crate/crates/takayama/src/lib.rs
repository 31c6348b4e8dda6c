//! Monte Carlo studies, survey ingestion, reports and the `takayama`
//! command-line tool, built on `takayama-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
mod error;
pub mod io;
pub mod montecarlo;
pub mod report;

pub use error::{Error, Result};
pub use io::{ingest_csv, parse_model, RunConfig, SurveyRow, SurveyTable};
pub use montecarlo::{
    bootstrap_variance, draw_mixture_sample, ks_normality, run_replicates, KsOutcome, ReplicateRecord,
    ReplicateStudy, StudySummary, Target, Truth,
};
pub use report::{emit_report, plot_data, Format, Results};
