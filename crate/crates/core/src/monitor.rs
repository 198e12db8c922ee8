//! Live monitoring of one designed chart over a short production run.

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::design::{ChartConfig, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Active,
    /// At least one signal so far; samples are still accepted.
    SignaledActive,
    /// All `I` inspections recorded. Only a reset leaves this state.
    Completed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectionRecord {
    /// 1-based inspection number.
    pub index: u32,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    pub x_bar: f64,
    pub y_bar: f64,
    pub z_hat: f64,
    pub signal: bool,
    #[serde(default)]
    pub timestamp: Option<String>,
    #[serde(default)]
    pub label: Option<String>,
}

/// One inspection as submitted by the operator.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InspectionInput {
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    #[serde(default)]
    pub label: Option<String>,
    /// ISO-8601; kept as given after validation.
    #[serde(default)]
    pub timestamp: Option<String>,
}

impl InspectionInput {
    pub fn new(x_values: Vec<f64>, y_values: Vec<f64>) -> Self {
        InspectionInput {
            x_values,
            y_values,
            ..InspectionInput::default()
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartState {
    pub id: String,
    /// The run this one was reset from.
    #[serde(default)]
    pub parent_id: Option<String>,
    pub cfg: ChartConfig,
    pub records: Vec<InspectionRecord>,
    pub status: RunStatus,
    pub created_at: String,
    pub updated_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSummary {
    pub id: String,
    pub status: RunStatus,
    pub side: Side,
    pub inspections: u32,
    pub remaining: u32,
    pub signal_count: u32,
    pub signals: Vec<u32>,
    pub last_z_hat: Option<f64>,
    pub lcl: f64,
    /// `None` when unbounded.
    pub ucl: Option<f64>,
}

/// Current UTC time as RFC 3339 with microseconds.
pub fn now_utc() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn new_run(cfg: ChartConfig, parent_id: Option<String>) -> ChartState {
    let now = now_utc();
    ChartState {
        id: Uuid::new_v4().to_string(),
        parent_id,
        cfg,
        records: Vec::new(),
        status: RunStatus::Active,
        created_at: now.clone(),
        updated_at: now,
    }
}

pub fn create_chart(cfg: ChartConfig) -> Result<ChartState> {
    cfg.validate()?;
    Ok(new_run(cfg, None))
}

fn check_values(name: &str, values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidSample(format!("{name} contains a non-finite value ({v})")));
    }
    Ok(())
}

/// Validates an inspection and computes its record without touching the state.
pub fn evaluate_inspection(state: &ChartState, input: &InspectionInput) -> Result<InspectionRecord> {
    let cfg = &state.cfg;
    let done = state.records.len() as u32;
    if state.status == RunStatus::Completed || done >= cfg.horizon_inspections {
        return Err(Error::RunCompleted(cfg.horizon_inspections));
    }
    let index = done + 1;
    let n = cfg.n as usize;
    if input.x_values.len() != n || input.y_values.len() != n {
        return Err(Error::LengthMismatch {
            index,
            expected: n,
            x: input.x_values.len(),
            y: input.y_values.len(),
        });
    }
    check_values("x_values", &input.x_values)?;
    check_values("y_values", &input.y_values)?;
    if let Some(ts) = &input.timestamp {
        DateTime::parse_from_rfc3339(ts)
            .map_err(|e| Error::InvalidSample(format!("timestamp `{ts}`: {e}")))?;
    }
    let sum_x: f64 = input.x_values.iter().sum();
    let sum_y: f64 = input.y_values.iter().sum();
    if !(sum_y > 0.0) {
        return Err(Error::InvalidSample(format!("inspection {index}: mean of y must be positive")));
    }
    if !(sum_x > 0.0) {
        return Err(Error::InvalidSample(format!("inspection {index}: mean of x must be positive")));
    }
    // The ratio of sums equals the ratio of means and does not depend on n.
    let z_hat = sum_x / sum_y;
    Ok(InspectionRecord {
        index,
        x_values: input.x_values.clone(),
        y_values: input.y_values.clone(),
        x_bar: sum_x / n as f64,
        y_bar: sum_y / n as f64,
        z_hat,
        signal: cfg.signals(z_hat),
        timestamp: input.timestamp.clone(),
        label: input.label.clone(),
    })
}

/// Appends one inspection. On error the state is left unchanged.
pub fn ingest_inspection(state: &mut ChartState, input: &InspectionInput) -> Result<InspectionRecord> {
    let record = evaluate_inspection(state, input)?;
    state.records.push(record.clone());
    state.status = if record.index == state.cfg.horizon_inspections {
        RunStatus::Completed
    } else if record.signal || state.status == RunStatus::SignaledActive {
        RunStatus::SignaledActive
    } else {
        RunStatus::Active
    };
    state.updated_at = now_utc();
    Ok(record)
}

/// Ingests a sequence of inspections, stopping at the first error.
pub fn replay<'a, I>(state: &mut ChartState, inputs: I) -> Result<Vec<InspectionRecord>>
where
    I: IntoIterator<Item = &'a InspectionInput>,
{
    inputs
        .into_iter()
        .map(|input| ingest_inspection(state, input))
        .collect()
}

pub fn chart_status(state: &ChartState) -> ChartSummary {
    let signals: Vec<u32> = state
        .records
        .iter()
        .filter(|r| r.signal)
        .map(|r| r.index)
        .collect();
    let done = state.records.len() as u32;
    ChartSummary {
        id: state.id.clone(),
        status: state.status,
        side: state.cfg.side,
        inspections: done,
        remaining: state.cfg.horizon_inspections.saturating_sub(done),
        signal_count: signals.len() as u32,
        signals,
        last_z_hat: state.records.last().map(|r| r.z_hat),
        lcl: state.cfg.lcl,
        ucl: state.cfg.ucl.is_finite().then_some(state.cfg.ucl),
    }
}

/// Starts a fresh run with the same design, linked to the old one.
pub fn reset_chart(state: &ChartState) -> ChartState {
    new_run(state.cfg.clone(), Some(state.id.clone()))
}
