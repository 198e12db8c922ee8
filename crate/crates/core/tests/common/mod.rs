//! Fixture loaders shared by the integration suites (also included by the
//! acceptance target of the cli crate).
#![allow(dead_code)]

use std::path::PathBuf;

use rzchart::design::{design_chart, ChartConfig, DesignRequest, Side};
use rzchart::run_length::{tarl1, ShiftScenario};
use serde::Deserialize;

pub fn data_path(name: &str) -> PathBuf {
    // Works from both crates/core and crates/cli.
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/data")
        .join(name)
}

fn load<T: for<'de> Deserialize<'de>>(name: &str) -> Vec<T> {
    let path = data_path(name);
    csv::Reader::from_path(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Deserialize)]
pub struct LimitRef {
    #[serde(rename = "I")]
    pub horizon: u32,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub rho0: f64,
    pub n: u32,
    pub lcl: f64,
    pub ucl: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TarlRef {
    pub block: u32,
    #[serde(rename = "I")]
    pub horizon: u32,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub n: u32,
    pub tau: f64,
    pub tarl1: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MuesliRef {
    pub inspection: u32,
    pub x_bar: f64,
    pub y_bar: f64,
    pub z_hat: f64,
}

pub fn limits_reference() -> Vec<LimitRef> {
    load("limits_reference.csv")
}

pub fn tarl_reference() -> Vec<TarlRef> {
    load("tarl_reference.csv")
}

pub fn muesli_reference() -> Vec<MuesliRef> {
    load("muesli_reference.csv")
}

pub fn design(side: Side, n: u32, gx: f64, gy: f64, z0: f64, rho0: f64, horizon: u32) -> ChartConfig {
    design_chart(&DesignRequest {
        side,
        n,
        gamma_x: gx,
        gamma_y: gy,
        z0,
        rho0,
        horizon_inspections: horizon,
        tarl0_target: None,
    })
    .unwrap()
}

/// Analytic TARL₁ for a printed cell: one value for τ ≠ 1, both charts at τ = 1.
pub fn analytic_tarl(cell: &TarlRef) -> Vec<f64> {
    let sides: &[Side] = if cell.tau < 1.0 {
        &[Side::Lower]
    } else if cell.tau > 1.0 {
        &[Side::Upper]
    } else {
        &[Side::Lower, Side::Upper]
    };
    let sc = ShiftScenario::new(cell.tau, cell.rho1).unwrap();
    sides
        .iter()
        .map(|&side| {
            let cfg = design(side, cell.n, cell.gamma_x, cell.gamma_y, 1.0, cell.rho0, cell.horizon);
            tarl1(&cfg, &sc).unwrap()
        })
        .collect()
}

/// Distance from `v` to the nearest 1-decimal rounding boundary (x.x5).
pub fn boundary_distance(v: f64) -> f64 {
    let frac = (v * 10.0 - (v * 10.0).floor()) - 0.5;
    frac.abs() / 10.0
}

/// Equal after 1-decimal rounding, or within 0.1 when the analytic value sits
/// so close to a rounding boundary (< 0.005) that the printed digit is a coin toss.
pub fn tarl_matches(analytic: f64, printed: f64) -> bool {
    let rendered: f64 = format!("{analytic:.1}").parse().unwrap();
    (rendered - printed).abs() < 1e-9
        || (boundary_distance(analytic) < 0.005 && (analytic - printed).abs() <= 0.1 + 1e-9)
}

/// Stratified pick: `per_block` cells from each listed block, spread evenly.
pub fn stratified(cells: &[TarlRef], blocks: &[u32], per_block: usize) -> Vec<TarlRef> {
    let mut out = Vec::new();
    for &b in blocks {
        let block: Vec<&TarlRef> = cells.iter().filter(|c| c.block == b).collect();
        let step = block.len() / per_block;
        // Odd stride offsets walk across γ, ρ, n and τ instead of one column.
        out.extend((0..per_block).map(|k| block[(k * step + 7 * k) % block.len()].clone()));
    }
    out
}
