//! Material coefficients, stabilization constants and the MBP radius.

use std::fmt;

use crate::error::{Error, Result};

/// Landau–de Gennes coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub l1: f64,
    pub l4: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(l1: f64, l4: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let p = ModelParams { l1, l4, alpha, beta, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| Err(Error::InvalidParameter { name, reason: reason.into() });
        for (name, v) in
            [("L1", self.l1), ("L4", self.l4), ("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)]
        {
            if !v.is_finite() {
                return bad(name, "must be finite");
            }
        }
        if self.l1 <= 0.0 {
            return bad("L1", "must be positive");
        }
        if self.gamma <= 0.0 {
            return bad("gamma", "must be positive");
        }
        if self.l1 + self.l4 <= 0.0 {
            return bad("L4", "L1 + L4 must be positive");
        }
        Ok(())
    }

    /// Coefficients of the convergence and MBP test problem on `(0, 2π)³`.
    pub fn mbp_test() -> Self {
        ModelParams { l1: 1.0, l4: 0.25, alpha: -1.0, beta: 1.0, gamma: 2.25 }
    }
}

/// Model coefficients plus the stabilization data used by the schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizedParams {
    pub model: ModelParams,
    pub kappa1: f64,
    pub kappa2: f64,
    /// MBP radius.
    pub a: f64,
    pub b: f64,
    pub c_f: f64,
}

impl StabilizedParams {
    /// `κ₁ + κ₂`, the identity shift moved into the linear operator.
    #[inline]
    pub fn kappa(&self) -> f64 {
        self.kappa1 + self.kappa2
    }

    /// Builds the record without checking any bound (oracles and tests).
    pub fn unchecked(model: ModelParams, kappa1: f64, kappa2: f64, a: f64) -> Self {
        let b = b_value(&model, kappa2);
        StabilizedParams { model, kappa1, kappa2, a, b, c_f: c_f_value(&model, a, b) }
    }

    /// Checks every sufficient condition for MBP and energy stability.
    pub fn report(&self) -> ValidationReport {
        let m = &self.model;
        let a2 = self.a * self.a;
        let (mbp, lip) = kappa1_bounds(m, self.kappa2, self.a);
        ValidationReport {
            checks: vec![
                BoundCheck::new("L1 + L4 > 0", 0.0, m.l1 + m.l4, m.l1 + m.l4 > 0.0),
                BoundCheck::new("kappa2 >= L4^2/(2 L1)", kappa2_min(m), self.kappa2, self.kappa2 >= kappa2_min(m)),
                BoundCheck::new("b < a^2", self.b, a2, self.b < a2),
                BoundCheck::new("kappa1 >= (kappa2 + C_f)^2/(gamma (a^2 - b))", mbp, self.kappa1, self.kappa1 >= mbp),
                BoundCheck::new("kappa1 >= |alpha| + |beta| a^2 + 2 gamma a^2", lip, self.kappa1, self.kappa1 >= lip),
            ],
        }
    }
}

/// One named sufficient condition.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub required: f64,
    pub actual: f64,
    pub pass: bool,
}

impl BoundCheck {
    fn new(name: &'static str, required: f64, actual: f64, pass: bool) -> Self {
        BoundCheck { name, required, actual, pass }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<BoundCheck>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<48} required {:>14.6e}  actual {:>14.6e}  {}",
                c.name,
                c.required,
                c.actual,
                if c.pass { "pass" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Optional user choices for [`select_stabilization`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    /// Accept overrides that violate the bounds.
    pub force: bool,
}

/// `L4² / (2 L1)`.
pub fn kappa2_min(p: &ModelParams) -> f64 {
    p.l4 * p.l4 / (2.0 * p.l1)
}

pub fn b_value(p: &ModelParams, kappa2: f64) -> f64 {
    p.beta * p.beta / (p.gamma * p.gamma) - 2.0 * (p.alpha - kappa2) / p.gamma
}

pub fn c_f_value(p: &ModelParams, a: f64, b: f64) -> f64 {
    p.alpha.abs() + p.beta.abs() * a + p.gamma * a * a + p.gamma * b.abs()
}

/// Lower bounds on κ₁ from the MBP and energy-stability conditions.
pub fn kappa1_bounds(p: &ModelParams, kappa2: f64, a: f64) -> (f64, f64) {
    let b = b_value(p, kappa2);
    let c_f = c_f_value(p, a, b);
    let a2 = a * a;
    let mbp = (kappa2 + c_f).powi(2) / (p.gamma * (a2 - b));
    let lip = p.alpha.abs() + p.beta.abs() * a2 + 2.0 * p.gamma * a2;
    (mbp, lip)
}

/// Default MBP radius for an initial sup norm.
pub fn default_radius(p: &ModelParams, kappa2: f64, sup_q0: f64) -> f64 {
    let b = b_value(p, kappa2);
    (2.0 * sup_q0).max((2.0 * b.abs() + 1.0).sqrt())
}

/// Picks κ₂, the radius `a`, and κ₁ from the sufficient conditions.
///
/// Overrides that violate a bound are rejected unless `force` is set;
/// the returned report always lists every condition.
pub fn select_stabilization(
    p: &ModelParams,
    sup_q0: f64,
    ov: Overrides,
) -> Result<(StabilizedParams, ValidationReport)> {
    p.validate()?;
    let k2_min = kappa2_min(p);
    let kappa2 = ov.kappa2.unwrap_or(k2_min);
    if !(kappa2.is_finite() && kappa2 >= 0.0) {
        return Err(Error::InvalidParameter { name: "kappa2", reason: format!("{kappa2}") });
    }
    let a = default_radius(p, kappa2, sup_q0);
    select_with_radius(p, a, kappa2, ov)
}

/// As [`select_stabilization`] with the radius given explicitly.
pub fn select_with_radius(
    p: &ModelParams,
    a: f64,
    kappa2: f64,
    ov: Overrides,
) -> Result<(StabilizedParams, ValidationReport)> {
    let b = b_value(p, kappa2);
    if !(a.is_finite() && a * a > b) {
        return Err(Error::Stabilization(format!("no admissible radius: a = {a}, b = {b}")));
    }
    let (mbp, lip) = kappa1_bounds(p, kappa2, a);
    let kappa1 = ov.kappa1.unwrap_or(mbp.max(lip));
    if !kappa1.is_finite() {
        return Err(Error::InvalidParameter { name: "kappa1", reason: format!("{kappa1}") });
    }
    let sp = StabilizedParams::unchecked(*p, kappa1, kappa2, a);
    let report = sp.report();
    if !report.all_pass() && !ov.force {
        return Err(Error::Stabilization(report.to_string()));
    }
    Ok((sp, report))
}

/// Reduced temperature and chirality with the normalizing coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessParams {
    pub tau_c: f64,
    pub kappa_chir: f64,
    pub l1: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Returns the model coefficients and the chiral wavenumber `q0`.
pub fn from_dimensionless(d: &DimensionlessParams) -> Result<(ModelParams, f64)> {
    for (name, v) in [("L1", d.l1), ("beta", d.beta), ("gamma", d.gamma)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter { name, reason: format!("must be positive, got {v}") });
        }
    }
    if !(d.kappa_chir.is_finite() && d.kappa_chir >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: format!("must be non-negative, got {}", d.kappa_chir),
        });
    }
    if !d.tau_c.is_finite() {
        return Err(Error::InvalidParameter { name: "tau_c", reason: "must be finite".into() });
    }
    let alpha = d.tau_c * d.beta * d.beta / (24.0 * d.gamma);
    let q0 = (d.kappa_chir.powi(2) * d.beta.powi(2) / (108.0 * d.l1 * d.gamma)).sqrt();
    let l4 = 2.0 * d.l1 * q0;
    Ok((ModelParams::new(d.l1, l4, alpha, d.beta, d.gamma)?, q0))
}

/// Inverse of [`from_dimensionless`]: `(τ_c, κ)`.
pub fn to_dimensionless(p: &ModelParams) -> (f64, f64) {
    let tau_c = 24.0 * p.alpha * p.gamma / (p.beta * p.beta);
    let q0 = p.l4 / (2.0 * p.l1);
    let kappa = (108.0 * p.l1 * p.gamma * q0 * q0 / (p.beta * p.beta)).sqrt();
    (tau_c, kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    SubBpI,
    BpI,
    BpII,
    BpIII,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::SubBpI => "sub-BPI",
            Phase::BpI => "BPI",
            Phase::BpII => "BPII",
            Phase::BpIII => "BPIII",
        })
    }
}

/// Approximate blue-phase label for a chirality strength.
pub fn classify_phase(kappa_chir: f64) -> Phase {
    if kappa_chir < 0.6 {
        Phase::SubBpI
    } else if kappa_chir < 1.2 {
        Phase::BpI
    } else if kappa_chir < 1.8 {
        Phase::BpII
    } else {
        Phase::BpIII
    }
}
