//! Truncated run length (TRL) over a finite run of `I` inspections and its
//! expectation, the truncated average run length (TARL).
//!
//! `TRL = l ≤ I` means the first signal came at inspection `l`; `TRL = I + 1`
//! means the run finished without a signal.

use serde::{Deserialize, Serialize};

use crate::design::{ChartConfig, Side};
use crate::error::{Error, Result};
use crate::ratio_dist::{check_rho, sample_ratio_cdf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftScenario {
    /// Multiplier of the in-control ratio, `z1 = tau * z0`.
    pub tau: f64,
    pub rho1: f64,
}

impl ShiftScenario {
    pub fn new(tau: f64, rho1: f64) -> Result<Self> {
        let sc = ShiftScenario { tau, rho1 };
        sc.validate()?;
        Ok(sc)
    }

    pub fn in_control(cfg: &ChartConfig) -> Self {
        ShiftScenario {
            tau: 1.0,
            rho1: cfg.rho0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::param("tau", format!("must be finite and > 0, got {}", self.tau)));
        }
        check_rho("rho1", self.rho1)
    }
}

/// How the standard-deviation ratio ω follows a shift of the ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaUnderShift {
    /// Dispersion stays proportional to the mean: `ω1 = z1·γX/γY`.
    #[default]
    Proportional,
    /// ω stays at its in-control value `z0·γX/γY`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrlDistribution {
    /// Per-inspection signal probability.
    pub p: f64,
    pub horizon: u32,
}

impl TrlDistribution {
    pub fn new(p: f64, horizon: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("p", format!("must lie in [0, 1], got {p}")));
        }
        if horizon == 0 {
            return Err(Error::param("horizon", "must be at least 1"));
        }
        Ok(TrlDistribution { p, horizon })
    }

    fn check_support(&self, l: u32) -> Result<()> {
        if l == 0 || l > self.horizon + 1 {
            return Err(Error::Domain(format!(
                "run length {l} outside support 1..={}",
                self.horizon + 1
            )));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        tarl(self.p, self.horizon)
    }
}

/// `(1 − p)^k` through `log1p`, exact at the endpoints.
fn survival(p: f64, k: u32) -> f64 {
    if k == 0 {
        1.0
    } else if p >= 1.0 {
        0.0
    } else {
        (f64::from(k) * (-p).ln_1p()).exp()
    }
}

pub fn trl_pmf(l: u32, d: &TrlDistribution) -> Result<f64> {
    d.check_support(l)?;
    Ok(if l <= d.horizon {
        d.p * survival(d.p, l - 1)
    } else {
        survival(d.p, d.horizon)
    })
}

pub fn trl_cdf(l: u32, d: &TrlDistribution) -> Result<f64> {
    d.check_support(l)?;
    Ok(if l <= d.horizon {
        -(f64::from(l) * (-d.p).ln_1p()).exp_m1()
    } else {
        1.0
    })
}

/// Truncated ARL `(1 − (1 − p)^{I+1}) / p`, with the `p → 0` limit `I + 1`.
pub fn tarl(p: f64, horizon: u32) -> f64 {
    let cap = f64::from(horizon) + 1.0;
    if p <= 0.0 {
        return cap;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let value = -(cap * (-p).ln_1p()).exp_m1() / p;
    value.clamp(1.0, cap)
}

/// Type I and type II error probabilities of a designed chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorProbabilities {
    pub alpha: f64,
    pub beta: f64,
}

pub fn error_probabilities(cfg: &ChartConfig, sc: &ShiftScenario) -> Result<ErrorProbabilities> {
    error_probabilities_with(cfg, sc, OmegaUnderShift::default())
}

pub fn error_probabilities_with(
    cfg: &ChartConfig,
    sc: &ShiftScenario,
    omega: OmegaUnderShift,
) -> Result<ErrorProbabilities> {
    sc.validate()?;
    let in_control = cfg.sample_params();
    let z1 = sc.tau * cfg.z0;
    let mut shifted = in_control.shifted(z1, sc.rho1).aggregated();
    if omega == OmegaUnderShift::Fixed {
        shifted.omega = in_control.omega0();
    }
    let limit = cfg.active_limit();
    let f0 = sample_ratio_cdf(limit, &in_control)?;
    let f1 = crate::ratio_dist::ratio_cdf(limit, &shifted)?;
    Ok(match cfg.side {
        Side::Lower => ErrorProbabilities {
            alpha: f0,
            beta: 1.0 - f1,
        },
        Side::Upper => ErrorProbabilities {
            alpha: 1.0 - f0,
            beta: f1,
        },
    })
}

/// Out-of-control TARL: [`tarl`] at signal probability `1 − β`.
pub fn tarl1(cfg: &ChartConfig, sc: &ShiftScenario) -> Result<f64> {
    tarl1_with(cfg, sc, OmegaUnderShift::default())
}

pub fn tarl1_with(cfg: &ChartConfig, sc: &ShiftScenario, omega: OmegaUnderShift) -> Result<f64> {
    let probs = error_probabilities_with(cfg, sc, omega)?;
    Ok(tarl(1.0 - probs.beta, cfg.horizon_inspections))
}
