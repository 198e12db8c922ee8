//! One-sided Shewhart charts for the ratio `Z = X/Y` of two correlated normal
//! variables, designed for a finite run of `I` inspections.
//!
//! The crate covers the approximate ratio distribution, limit design for a
//! target truncated in-control ARL, TARL under shifts, a Monte-Carlo oracle,
//! table regeneration and a stateful monitoring engine with JSON persistence.

// Guards are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod monitor;
pub mod normal;
pub mod ratio_dist;
pub mod run_length;
pub mod samples;
pub mod simulation;
pub mod store;
pub mod tables;

pub use design::{design_chart, sampling_frequency, ChartConfig, DesignRequest, RunPlan, Side};
pub use error::{Error, Result};
pub use monitor::{
    chart_status, create_chart, ingest_inspection, reset_chart, ChartState, ChartSummary,
    InspectionInput, InspectionRecord, RunStatus,
};
pub use ratio_dist::{ratio_cdf, ratio_idf, ratio_pdf, RatioParams, SampleRatioParams};
pub use run_length::{tarl, tarl1, ShiftScenario, TrlDistribution};
pub use simulation::{estimate_tarl, SimulationSpec, TarlEstimate};
pub use store::JsonStore;
pub use tables::{gen_limits_table, gen_tarl_table, GridSpec, Rho1Rule};
