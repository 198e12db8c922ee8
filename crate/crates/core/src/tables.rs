//! Regeneration of the control-limit and TARL₁ tables over a parameter grid,
//! with CSV and aligned-text rendering.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::design::{design_chart, ChartConfig, DesignRequest, Side};
use crate::error::{Error, Result};
use crate::ratio_dist::{check_rho, MAX_CV};
use crate::run_length::{tarl1, ShiftScenario};

pub const LIMITS_HEADER: &str = "gamma_x,gamma_y,rho0,n,I,lcl,ucl";
pub const TARL_HEADER: &str = "gamma_x,gamma_y,rho0,rho1,n,I,tau,chart,tarl1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rho1Rule {
    /// The shift leaves the correlation unchanged.
    EqualRho0,
    /// Explicit `(ρ0, ρ1)` pairs; replaces `rhos` for the TARL table.
    Explicit(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub gammas: Vec<(f64, f64)>,
    pub rhos: Vec<f64>,
    pub ns: Vec<u32>,
    pub horizons: Vec<u32>,
    pub taus: Vec<f64>,
    pub rho1_rule: Rho1Rule,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            gammas: vec![(0.01, 0.01), (0.2, 0.2), (0.01, 0.2), (0.2, 0.01)],
            rhos: vec![-0.8, -0.4, 0.0, 0.4, 0.8],
            ns: vec![1, 5, 7, 10, 15],
            horizons: vec![10, 30, 50],
            taus: vec![0.9, 0.95, 0.98, 0.99, 1.01, 1.02, 1.05, 1.1],
            rho1_rule: Rho1Rule::EqualRho0,
        }
    }
}

impl GridSpec {
    /// The grid in which the shift also moves the correlation, including τ = 1.
    pub fn correlation_shift() -> Self {
        GridSpec {
            taus: vec![0.9, 0.95, 0.98, 0.99, 1.0, 1.01, 1.02, 1.05, 1.1],
            rho1_rule: Rho1Rule::Explicit(vec![(-0.4, -0.8), (-0.4, -0.2), (0.4, 0.2), (0.4, 0.8)]),
            ..GridSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() || self.ns.is_empty() || self.horizons.is_empty() {
            return Err(Error::param("grid", "gammas, ns and horizons must be non-empty"));
        }
        for &(gx, gy) in &self.gammas {
            for (name, g) in [("gamma_x", gx), ("gamma_y", gy)] {
                if !(g > 0.0 && g <= MAX_CV) {
                    return Err(Error::param(name, format!("must lie in (0, {MAX_CV}], got {g}")));
                }
            }
        }
        for &rho in &self.rhos {
            check_rho("rho0", rho)?;
        }
        if let Rho1Rule::Explicit(pairs) = &self.rho1_rule {
            for &(r0, r1) in pairs {
                check_rho("rho0", r0)?;
                check_rho("rho1", r1)?;
            }
        }
        if let Some(n) = self.ns.iter().find(|&&n| n == 0) {
            return Err(Error::param("n", format!("must be at least 1, got {n}")));
        }
        if let Some(i) = self.horizons.iter().find(|&&i| i < 2) {
            return Err(Error::param("I", format!("a TARL₀ target of I needs I ≥ 2, got {i}")));
        }
        if let Some(t) = self.taus.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::param("tau", format!("must be finite and > 0, got {t}")));
        }
        Ok(())
    }

    fn rho_pairs(&self) -> Vec<(f64, f64)> {
        match &self.rho1_rule {
            Rho1Rule::EqualRho0 => self.rhos.iter().map(|&r| (r, r)).collect(),
            Rho1Rule::Explicit(pairs) => pairs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub rho0: f64,
    pub n: u32,
    #[serde(rename = "I")]
    pub horizon: u32,
    pub lcl: f64,
    pub ucl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TarlRow {
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub n: u32,
    #[serde(rename = "I")]
    pub horizon: u32,
    pub tau: f64,
    pub chart: Side,
    pub tarl1: f64,
}

/// A row that renders to a fixed header and parses back through serde.
pub trait TableRow: DeserializeOwned {
    const HEADER: &'static str;

    /// Cells as rendered, in header order.
    fn cells(&self) -> Vec<String>;

    /// The row with numeric cells rounded to their rendered precision.
    fn rounded(&self) -> Self;
}

fn round_to(v: f64, places: i32) -> f64 {
    format!("{v:.*}", places as usize).parse().unwrap_or(v)
}

impl TableRow for LimitRow {
    const HEADER: &'static str = LIMITS_HEADER;

    fn cells(&self) -> Vec<String> {
        vec![
            self.gamma_x.to_string(),
            self.gamma_y.to_string(),
            self.rho0.to_string(),
            self.n.to_string(),
            self.horizon.to_string(),
            format!("{:.4}", self.lcl),
            format!("{:.4}", self.ucl),
        ]
    }

    fn rounded(&self) -> Self {
        LimitRow {
            lcl: round_to(self.lcl, 4),
            ucl: round_to(self.ucl, 4),
            ..self.clone()
        }
    }
}

impl TableRow for TarlRow {
    const HEADER: &'static str = TARL_HEADER;

    fn cells(&self) -> Vec<String> {
        vec![
            self.gamma_x.to_string(),
            self.gamma_y.to_string(),
            self.rho0.to_string(),
            self.rho1.to_string(),
            self.n.to_string(),
            self.horizon.to_string(),
            self.tau.to_string(),
            self.chart.to_string(),
            format!("{:.1}", self.tarl1),
        ]
    }

    fn rounded(&self) -> Self {
        TarlRow {
            tarl1: round_to(self.tarl1, 1),
            ..self.clone()
        }
    }
}

fn design(side: Side, n: u32, (gx, gy): (f64, f64), rho0: f64, horizon: u32) -> Result<ChartConfig> {
    design_chart(&DesignRequest {
        side,
        n,
        gamma_x: gx,
        gamma_y: gy,
        z0: 1.0,
        rho0,
        horizon_inspections: horizon,
        tarl0_target: None,
    })
}

/// One row per `(I, γ pair, ρ0, n)` cell, in that nesting order.
pub fn gen_limits_table(grid: &GridSpec) -> Result<Vec<LimitRow>> {
    grid.validate()?;
    if grid.rhos.is_empty() {
        return Err(Error::param("rhos", "must be non-empty"));
    }
    let mut cells = Vec::new();
    for &horizon in &grid.horizons {
        for &gammas in &grid.gammas {
            for &rho0 in &grid.rhos {
                for &n in &grid.ns {
                    cells.push((horizon, gammas, rho0, n));
                }
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(horizon, gammas, rho0, n)| {
            let lower = design(Side::Lower, n, gammas, rho0, horizon)?;
            let upper = design(Side::Upper, n, gammas, rho0, horizon)?;
            Ok(LimitRow {
                gamma_x: gammas.0,
                gamma_y: gammas.1,
                rho0,
                n,
                horizon,
                lcl: lower.lcl,
                ucl: upper.ucl,
            })
        })
        .collect()
}

/// TARL₁ over `(I, γ pair, (ρ0, ρ1), n, τ)`. The lower chart answers τ < 1,
/// the upper chart τ > 1, and τ = 1 yields one row per chart.
pub fn gen_tarl_table(grid: &GridSpec) -> Result<Vec<TarlRow>> {
    grid.validate()?;
    let pairs = grid.rho_pairs();
    if pairs.is_empty() || grid.taus.is_empty() {
        return Err(Error::param("grid", "rho pairs and taus must be non-empty"));
    }
    let mut cells = Vec::new();
    for &horizon in &grid.horizons {
        for &gammas in &grid.gammas {
            for &(rho0, rho1) in &pairs {
                for &n in &grid.ns {
                    cells.push((horizon, gammas, rho0, rho1, n));
                }
            }
        }
    }
    let blocks: Vec<Vec<TarlRow>> = cells
        .into_par_iter()
        .map(|(horizon, gammas, rho0, rho1, n)| {
            let lower = design(Side::Lower, n, gammas, rho0, horizon)?;
            let upper = design(Side::Upper, n, gammas, rho0, horizon)?;
            let mut rows = Vec::with_capacity(grid.taus.len() + 1);
            for &tau in &grid.taus {
                let sc = ShiftScenario::new(tau, rho1)?;
                let charts: &[&ChartConfig] = if tau < 1.0 {
                    &[&lower]
                } else if tau > 1.0 {
                    &[&upper]
                } else {
                    &[&lower, &upper]
                };
                for cfg in charts {
                    rows.push(TarlRow {
                        gamma_x: gammas.0,
                        gamma_y: gammas.1,
                        rho0,
                        rho1,
                        n,
                        horizon,
                        tau,
                        chart: cfg.side,
                        tarl1: tarl1(cfg, &sc)?,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    AlignedText,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "text" | "aligned" | "aligned-text" => Ok(Format::AlignedText),
            _ => Err(Error::param("format", format!("expected `csv` or `text`, got `{s}`"))),
        }
    }
}

pub fn render<R: TableRow, W: Write>(rows: &[R], format: Format, out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::param("rows", "nothing to render"));
    }
    let header: Vec<&str> = R::HEADER.split(',').collect();
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            w.write_record(&header)?;
            for row in rows {
                w.write_record(row.cells())?;
            }
            w.flush()?;
        }
        Format::AlignedText => {
            let body: Vec<Vec<String>> = rows.iter().map(TableRow::cells).collect();
            let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
            for cells in &body {
                for (w, c) in widths.iter_mut().zip(cells) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let mut out = out;
            let head: Vec<String> = header.iter().map(|h| h.to_string()).collect();
            for cells in std::iter::once(&head).chain(&body) {
                let line: Vec<String> = cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, &w)| format!("{c:>w$}"))
                    .collect();
                writeln!(out, "{}", line.join("  "))?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn render_to_string<R: TableRow>(rows: &[R], format: Format) -> Result<String> {
    let mut buf = Vec::new();
    render(rows, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("rendered tables are UTF-8"))
}

/// Parses CSV produced by [`render`]; the header must match exactly.
pub fn parse_csv<R: TableRow, In: Read>(input: In) -> Result<Vec<R>> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != R::HEADER {
        return Err(Error::InvalidSample(format!(
            "expected header `{}`, got `{header}`",
            R::HEADER
        )));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
