//! Approximate distribution of the ratio `Z = X / Y` of two correlated normal
//! variables, parameterised by coefficients of variation.
//!
//! With `γX = σX/μX`, `γY = σY/μY`, `ω = σX/σY` and correlation `ρ`:
//!
//! ```text
//! F(z) ≈ Φ(A / B),   A = z/γY − ω/γX,   B = sqrt(ω² − 2ρωz + z²)
//! ```
//!
//! The density and the inverse follow from this closed form. The inverse solves
//! the quadratic `C1·z² + C2·z + C3 = 0` that results from `A/B = Φ⁻¹(p)`.
//!
//! [`SampleRatioParams`] reparameterises the law for the ratio of two sample
//! means of size `n`, for which the CVs shrink by `√n` and `ω` becomes
//! `z0·γX/γY`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile};

/// CVs above this raise a warning; above [`MAX_CV`] they are rejected.
pub const WARN_CV: f64 = 0.2;
pub const MAX_CV: f64 = 0.5;

const MIN_B_SQUARED: f64 = 1e-300;
const DEGENERATE_C1: f64 = 1e-14;
const DISCRIMINANT_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioParams {
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub omega: f64,
    pub rho: f64,
}

impl RatioParams {
    pub fn new(gamma_x: f64, gamma_y: f64, omega: f64, rho: f64) -> Result<Self> {
        let params = RatioParams {
            gamma_x,
            gamma_y,
            omega,
            rho,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_cv("gamma_x", self.gamma_x)?;
        check_cv("gamma_y", self.gamma_y)?;
        check_positive("omega", self.omega)?;
        check_rho("rho", self.rho)
    }
}

/// In-control description of the sample-ratio statistic `X̄ / Ȳ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRatioParams {
    pub n: u32,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub z0: f64,
    pub rho0: f64,
}

impl SampleRatioParams {
    pub fn new(n: u32, gamma_x: f64, gamma_y: f64, z0: f64, rho0: f64) -> Result<Self> {
        let sp = SampleRatioParams {
            n,
            gamma_x,
            gamma_y,
            z0,
            rho0,
        };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "sample size must be at least 1"));
        }
        check_cv("gamma_x", self.gamma_x)?;
        check_cv("gamma_y", self.gamma_y)?;
        if self.gamma_x > WARN_CV || self.gamma_y > WARN_CV {
            log::warn!(
                "coefficients of variation ({}, {}) exceed {WARN_CV}; the normal-ratio approximation degrades",
                self.gamma_x,
                self.gamma_y
            );
        }
        check_positive("z0", self.z0)?;
        check_rho("rho0", self.rho0)
    }

    /// The standard-deviation ratio `z0·γX/γY` implied by proportional dispersion.
    pub fn omega0(&self) -> f64 {
        self.z0 * self.gamma_x / self.gamma_y
    }

    /// Parameters of the sample-mean ratio: CVs scaled by `1/√n`.
    pub fn aggregated(&self) -> RatioParams {
        let root_n = f64::from(self.n).sqrt();
        RatioParams {
            gamma_x: self.gamma_x / root_n,
            gamma_y: self.gamma_y / root_n,
            omega: self.omega0(),
            rho: self.rho0,
        }
    }

    /// Same design, with the ratio and correlation moved to a shifted state.
    pub fn shifted(&self, z1: f64, rho1: f64) -> SampleRatioParams {
        SampleRatioParams {
            z0: z1,
            rho0: rho1,
            ..*self
        }
    }
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and > 0, got {v}")))
    }
}

fn check_cv(name: &'static str, v: f64) -> Result<()> {
    check_positive(name, v)?;
    if v > MAX_CV {
        return Err(Error::param(
            name,
            format!("coefficient of variation {v} exceeds {MAX_CV}"),
        ));
    }
    Ok(())
}

pub(crate) fn check_rho(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > -1.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie in (-1, 1), got {v}")))
    }
}

/// `(A, B)` of the closed form.
fn a_b(z: f64, params: &RatioParams) -> Result<(f64, f64)> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("ratio argument must be finite, got {z}")));
    }
    let RatioParams {
        gamma_x,
        gamma_y,
        omega,
        rho,
    } = *params;
    let a = z / gamma_y - omega / gamma_x;
    let b2 = omega * omega - 2.0 * rho * omega * z + z * z;
    if !(b2 >= MIN_B_SQUARED) {
        return Err(Error::Domain(format!(
            "B² = {b2:e} at z = {z} is not positive"
        )));
    }
    Ok((a, b2.sqrt()))
}

pub fn ratio_cdf(z: f64, params: &RatioParams) -> Result<f64> {
    let (a, b) = a_b(z, params)?;
    Ok(std_normal_cdf(a / b))
}

pub fn ratio_pdf(z: f64, params: &RatioParams) -> Result<f64> {
    let (a, b) = a_b(z, params)?;
    let jacobian =
        1.0 / (b * params.gamma_y) - (z - params.rho * params.omega) * a / (b * b * b);
    Ok(jacobian * std_normal_pdf(a / b))
}

/// Inverse of [`ratio_cdf`]: the root of `C1·z² + C2·z + C3 = 0` on the
/// minus branch for `p ≤ 0.5` and the plus branch for `p ≥ 0.5`.
pub fn ratio_idf(p: f64, params: &RatioParams) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("ratio idf needs 0 < p < 1, got {p}")));
    }
    let RatioParams {
        gamma_x,
        gamma_y,
        omega,
        rho,
    } = *params;
    let q = std_normal_quantile(p)?;
    let q2 = q * q;
    let c1 = 1.0 / (gamma_y * gamma_y) - q2;
    let c2 = 2.0 * omega * (rho * q2 - 1.0 / (gamma_x * gamma_y));
    let c3 = omega * omega * (1.0 / (gamma_x * gamma_x) - q2);

    if c1.abs() <= DEGENERATE_C1 / (gamma_y * gamma_y) {
        if c2 == 0.0 {
            return Err(Error::Domain("ratio idf: quadratic degenerates entirely".into()));
        }
        return Ok(-c3 / c2);
    }

    // C2² − 4·C1·C3 factors as 4ω²q²·D, which avoids the cancellation of the
    // expanded form near p = 0.5 where the two roots merge.
    let inv_x2 = 1.0 / (gamma_x * gamma_x);
    let inv_y2 = 1.0 / (gamma_y * gamma_y);
    let mut d = inv_x2 + inv_y2 - 2.0 * rho / (gamma_x * gamma_y) - q2 * (1.0 - rho * rho);
    if d < 0.0 {
        if d >= -DISCRIMINANT_SLACK * (inv_x2 + inv_y2) {
            d = 0.0;
        } else {
            return Err(Error::Domain(format!(
                "ratio idf: negative discriminant at p = {p} (no quantile for these parameters)"
            )));
        }
    }
    let root = 2.0 * omega * q.abs() * d.sqrt();

    // Citardauq pairing: one root from the textbook formula, the other from
    // the product of roots, so neither branch subtracts nearly equal numbers.
    let (plus, minus) = if c2 <= 0.0 {
        let big = 0.5 * (-c2 + root);
        (big / c1, if big != 0.0 { c3 / big } else { 0.0 })
    } else {
        let big = 0.5 * (-c2 - root);
        (if big != 0.0 { c3 / big } else { 0.0 }, big / c1)
    };
    let z = if p <= 0.5 { minus } else { plus };
    if !z.is_finite() {
        return Err(Error::Domain(format!("ratio idf is not finite at p = {p}")));
    }
    Ok(z)
}

pub fn sample_ratio_cdf(z: f64, sp: &SampleRatioParams) -> Result<f64> {
    ratio_cdf(z, &sp.aggregated())
}

pub fn sample_ratio_idf(p: f64, sp: &SampleRatioParams) -> Result<f64> {
    ratio_idf(p, &sp.aggregated())
}
