//! Probability-limit design of the one-sided ratio charts.
//!
//! The per-inspection false-alarm probability `α₀` is chosen so that the
//! truncated in-control ARL over `I` inspections hits a target (by default `I`).
//! The lower chart places its limit at the `α₀` quantile of the sample-ratio
//! law and has no upper limit; the upper chart places its limit at the
//! `1 − α₀` quantile and keeps a lower limit of 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratio_dist::{sample_ratio_idf, SampleRatioParams};
use crate::run_length::tarl;

const ALPHA_LO: f64 = 1e-12;
const ALPHA_HI: f64 = 1.0 - 1e-12;
const MAX_BISECTIONS: usize = 200;
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Signals a decrease of the ratio (`Ẑ < LCL`).
    Lower,
    /// Signals an increase of the ratio (`Ẑ > UCL`).
    Upper,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        })
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lower" | "down" | "-" => Ok(Side::Lower),
            "upper" | "up" | "+" => Ok(Side::Upper),
            _ => Err(Error::param("side", format!("expected `lower` or `upper`, got `{s}`"))),
        }
    }
}

/// A designed one-sided chart.
///
/// The inactive limit is a sentinel: `ucl = +∞` on a lower chart and
/// `lcl = 0` on an upper chart. In JSON an infinite limit is written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartConfig {
    pub side: Side,
    pub n: u32,
    pub horizon_inspections: u32,
    pub z0: f64,
    pub rho0: f64,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub tarl0_target: f64,
    pub alpha0: f64,
    pub lcl: f64,
    #[serde(with = "unbounded")]
    pub ucl: f64,
}

impl ChartConfig {
    pub fn sample_params(&self) -> SampleRatioParams {
        SampleRatioParams {
            n: self.n,
            gamma_x: self.gamma_x,
            gamma_y: self.gamma_y,
            z0: self.z0,
            rho0: self.rho0,
        }
    }

    /// The finite limit the chart actually compares against.
    pub fn active_limit(&self) -> f64 {
        match self.side {
            Side::Lower => self.lcl,
            Side::Upper => self.ucl,
        }
    }

    /// Strict comparison against the active limit; the sentinel never triggers.
    pub fn signals(&self, z_hat: f64) -> bool {
        match self.side {
            Side::Lower => z_hat < self.lcl,
            Side::Upper => z_hat > self.ucl,
        }
    }

    /// Structural checks for a config that arrived from outside (JSON, API).
    pub fn validate(&self) -> Result<()> {
        self.sample_params().validate()?;
        if self.horizon_inspections == 0 {
            return Err(Error::param("horizon_inspections", "must be at least 1"));
        }
        check_target(self.tarl0_target, self.horizon_inspections)?;
        if !(self.alpha0 > 0.0 && self.alpha0 < 1.0) {
            return Err(Error::param("alpha0", format!("must lie in (0, 1), got {}", self.alpha0)));
        }
        match self.side {
            Side::Lower => {
                if !(self.lcl.is_finite() && self.ucl == f64::INFINITY) {
                    return Err(Error::param("lcl", "lower chart needs a finite lcl and an unbounded ucl"));
                }
            }
            Side::Upper => {
                if !(self.lcl == 0.0 && self.ucl.is_finite()) {
                    return Err(Error::param("ucl", "upper chart needs lcl = 0 and a finite ucl"));
                }
            }
        }
        if !(self.lcl < self.z0 && self.z0 < self.ucl) {
            return Err(Error::param(
                "z0",
                format!("limits ({}, {}) must bracket z0 = {}", self.lcl, self.ucl, self.z0),
            ));
        }
        Ok(())
    }
}

/// Inputs of [`design_chart`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignRequest {
    pub side: Side,
    pub n: u32,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub z0: f64,
    pub rho0: f64,
    pub horizon_inspections: u32,
    /// Defaults to `horizon_inspections`.
    #[serde(default)]
    pub tarl0_target: Option<f64>,
}

/// `H / (I + 1)`: the spacing between inspections, with none at the end of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub horizon_hours: f64,
    pub inspections: u32,
    pub lot_size: u32,
}

pub fn sampling_frequency(plan: &RunPlan) -> Result<f64> {
    if !(plan.horizon_hours.is_finite() && plan.horizon_hours > 0.0) {
        return Err(Error::param("horizon_hours", "must be finite and > 0"));
    }
    if plan.inspections == 0 {
        return Err(Error::param("inspections", "must be at least 1"));
    }
    Ok(plan.horizon_hours / f64::from(plan.inspections + 1))
}

fn check_target(target: f64, horizon: u32) -> Result<()> {
    let cap = f64::from(horizon) + 1.0;
    if target.is_finite() && target > 1.0 && target < cap {
        Ok(())
    } else {
        Err(Error::param(
            "tarl0_target",
            format!("must lie in (1, {cap}) for {horizon} inspections, got {target}"),
        ))
    }
}

/// Solves `(1 − (1 − α)^{I+1}) / α = target` for α by bisection.
///
/// The truncated ARL falls strictly from `I + 1` at α → 0 to 1 at α = 1, so
/// any target in `(1, I + 1)` has exactly one root.
pub fn solve_alpha_for_target(target: f64, horizon: u32) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::param("horizon_inspections", "must be at least 1"));
    }
    check_target(target, horizon)?;
    let residual = |alpha: f64| tarl(alpha, horizon) - target;

    let (mut lo, mut hi) = (ALPHA_LO, ALPHA_HI);
    if residual(lo) < 0.0 || residual(hi) > 0.0 {
        return Err(Error::Domain(format!(
            "target {target} is not bracketed by α ∈ [{ALPHA_LO}, {ALPHA_HI}]"
        )));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() <= RESIDUAL_TOL || mid == lo || mid == hi {
            break;
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// α₀ such that the truncated in-control ARL equals `I`.
pub fn solve_alpha_for_tarl0(horizon: u32) -> Result<f64> {
    if horizon < 2 {
        return Err(Error::param(
            "horizon_inspections",
            "a target of I needs I ≥ 2; pass an explicit target for I = 1",
        ));
    }
    solve_alpha_for_target(f64::from(horizon), horizon)
}

pub fn design_chart(req: &DesignRequest) -> Result<ChartConfig> {
    let sp = SampleRatioParams::new(req.n, req.gamma_x, req.gamma_y, req.z0, req.rho0)?;
    if req.horizon_inspections == 0 {
        return Err(Error::param("horizon_inspections", "must be at least 1"));
    }
    let target = req
        .tarl0_target
        .unwrap_or_else(|| f64::from(req.horizon_inspections));
    let alpha0 = solve_alpha_for_target(target, req.horizon_inspections)?;
    let (lcl, ucl) = match req.side {
        Side::Lower => (sample_ratio_idf(alpha0, &sp)?, f64::INFINITY),
        Side::Upper => (0.0, sample_ratio_idf(1.0 - alpha0, &sp)?),
    };
    let cfg = ChartConfig {
        side: req.side,
        n: req.n,
        horizon_inspections: req.horizon_inspections,
        z0: req.z0,
        rho0: req.rho0,
        gamma_x: req.gamma_x,
        gamma_y: req.gamma_y,
        tarl0_target: target,
        alpha0,
        lcl,
        ucl,
    };
    if !(cfg.lcl < cfg.z0 && cfg.z0 < cfg.ucl) {
        return Err(Error::Domain(format!(
            "designed limits ({lcl}, {ucl}) do not bracket z0 = {}",
            cfg.z0
        )));
    }
    Ok(cfg)
}

/// Serde adapter writing `±∞` as `null` (JSON has no infinities).
mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
