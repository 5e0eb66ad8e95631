//! Lifespan upper bounds and best-bound classification.
//!
//! Power-type bounds read `T_ε ≤ C ε^{-e}` and exp-type bounds read
//! `T_ε ≤ exp(C ε^{-e})`; in both cases `e` is stored as `eps_exponent`.
//! A smaller power exponent is a sharper bound as `ε → 0`, and any applicable
//! power bound beats every exp-type bound.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponents::{self, ModelParams};

/// Tolerance for deciding that `p` sits on a critical curve.
pub const CRITICAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    HeatlikeSub,
    WavelikeSub,
    IntermediateSub,
    CriticalFujitaMuLow,
    CriticalFujitaMuHigh,
    CriticalPc,
    NoneKnown,
}

impl BoundKind {
    pub fn form(self) -> BoundForm {
        match self {
            BoundKind::CriticalFujitaMuLow | BoundKind::CriticalFujitaMuHigh | BoundKind::CriticalPc => {
                BoundForm::ExpPower
            }
            _ => BoundForm::Power,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    Power,
    ExpPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifespanBound {
    pub kind: BoundKind,
    pub form: BoundForm,
    pub eps_exponent: f64,
    pub applicable: bool,
}

impl LifespanBound {
    fn new(kind: BoundKind, exponent: Option<f64>) -> Self {
        Self {
            kind,
            form: kind.form(),
            eps_exponent: exponent.unwrap_or(f64::NAN),
            applicable: exponent.is_some(),
        }
    }

    pub fn none_known() -> Self {
        Self::new(BoundKind::NoneKnown, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    A,
    B,
    C,
    CriticalFujita,
    CriticalPc,
    Unclassified,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 6] = [
        RegionLabel::A,
        RegionLabel::B,
        RegionLabel::C,
        RegionLabel::CriticalFujita,
        RegionLabel::CriticalPc,
        RegionLabel::Unclassified,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::A => "A",
            RegionLabel::B => "B",
            RegionLabel::C => "C",
            RegionLabel::CriticalFujita => "CriticalFujita",
            RegionLabel::CriticalPc => "CriticalPc",
            RegionLabel::Unclassified => "Unclassified",
        }
    }
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(p-1)/(2 - k(p-1))` when `p > 1` and the denominator is positive.
fn power_exponent(k: f64, p: f64) -> Option<f64> {
    let denom = 2.0 - k * (p - 1.0);
    (p > 1.0 && denom > 0.0).then(|| (p - 1.0) / denom)
}

/// Heatlike exponent `(p-1)/(2 - n(1-α)(p-1))`, applicable for `1 < p < p_F(n(1-α))`.
pub fn heatlike_exponent(params: &ModelParams, p: f64) -> Option<f64> {
    power_exponent(params.effective_dim(), p)
}

/// Wavelike exponent `2p(p-1)/((1-α)γ(n,p,α,μ))`, applicable while `γ > 0`.
pub fn wavelike_exponent(params: &ModelParams, p: f64) -> Option<f64> {
    if !(p > 1.0) {
        return None;
    }
    let g = exponents::gamma(params, p).ok()?;
    (g > 0.0).then(|| 2.0 * p * (p - 1.0) / ((1.0 - params.alpha) * g))
}

/// Bracket `n(1-α) + μ - 1` of the intermediate bound.
pub fn intermediate_bracket(params: &ModelParams) -> f64 {
    params.effective_dim() + params.mu - 1.0
}

/// Intermediate exponent `(p-1)/(2 - {n(1-α)+μ-1}(p-1))`.
pub fn intermediate_exponent(params: &ModelParams, p: f64) -> Option<f64> {
    power_exponent(intermediate_bracket(params), p)
}

fn positive_fraction(num: f64, denom: f64) -> f64 {
    if denom > 0.0 {
        num / denom
    } else {
        f64::INFINITY
    }
}

/// `2(1-α)/(n(1-α)+μ-1)`: below it the intermediate bound beats the wavelike one.
/// A nonpositive denominator gives `+∞`.
pub fn threshold_a(params: &ModelParams) -> f64 {
    positive_fraction(2.0 * (1.0 - params.alpha), intermediate_bracket(params))
}

/// `2(1-α)/(n(1-α)-μ+1)`: below it the heatlike bound beats the wavelike one.
/// A nonpositive denominator gives `+∞`.
pub fn threshold_c(params: &ModelParams) -> f64 {
    positive_fraction(2.0 * (1.0 - params.alpha), params.effective_dim() - params.mu + 1.0)
}

/// The three power-type bounds, applicable or not.
pub fn power_bounds(params: &ModelParams, p: f64) -> [LifespanBound; 3] {
    [
        LifespanBound::new(BoundKind::IntermediateSub, intermediate_exponent(params, p)),
        LifespanBound::new(BoundKind::WavelikeSub, wavelike_exponent(params, p)),
        LifespanBound::new(BoundKind::HeatlikeSub, heatlike_exponent(params, p)),
    ]
}

/// Exp-type bounds that hold when `p` lies on a critical curve.
pub fn critical_bounds(params: &ModelParams, p: f64) -> Result<Vec<LifespanBound>> {
    params.validate()?;
    let pf = params.fujita();
    let pc = exponents::p_c(params)?.or_infinity();
    let mut out = Vec::new();
    if (p - pf).abs() <= CRITICAL_TOL {
        out.push(if params.mu <= 1.0 {
            LifespanBound::new(BoundKind::CriticalFujitaMuLow, Some(p * (p - 1.0) / (p + 1.0)))
        } else {
            LifespanBound::new(BoundKind::CriticalFujitaMuHigh, Some(p - 1.0))
        });
    }
    if pc.is_finite() && (p - pc).abs() <= CRITICAL_TOL && pc > pf + CRITICAL_TOL {
        out.push(LifespanBound::new(BoundKind::CriticalPc, Some(p * (p - 1.0))));
    }
    Ok(out)
}

/// All bounds at `(params, p)`: the three power bounds followed by any critical ones.
pub fn all_bounds(params: &ModelParams, p: f64) -> Result<Vec<LifespanBound>> {
    let mut out = power_bounds(params, p).to_vec();
    out.extend(critical_bounds(params, p)?);
    Ok(out)
}

/// Sharpest applicable bound: smallest power exponent, else smallest exp exponent.
pub fn best_bound(params: &ModelParams, p: f64) -> Result<LifespanBound> {
    let bounds = all_bounds(params, p)?;
    let pick = |form: BoundForm| {
        bounds
            .iter()
            .filter(|b| b.applicable && b.form == form)
            .min_by(|a, b| a.eps_exponent.total_cmp(&b.eps_exponent))
            .copied()
    };
    Ok(pick(BoundForm::Power)
        .or_else(|| pick(BoundForm::ExpPower))
        .unwrap_or_else(LifespanBound::none_known))
}

/// Region of the `(μ, p)` plane: which bound is the sharpest at this point.
///
/// Critical curves take precedence; between A, B and C the first matching label
/// in that order wins, which settles points lying exactly on a threshold.
pub fn classify(params: &ModelParams, p: f64) -> Result<RegionLabel> {
    params.validate()?;
    let pf = params.fujita();
    let pc = exponents::p_c(params)?.or_infinity();
    if (p - pf).abs() <= CRITICAL_TOL {
        return Ok(RegionLabel::CriticalFujita);
    }
    if pc.is_finite() && (p - pc).abs() <= CRITICAL_TOL && pc > pf + CRITICAL_TOL {
        return Ok(RegionLabel::CriticalPc);
    }
    if !(p > 1.0) {
        return Ok(RegionLabel::Unclassified);
    }
    let th_a = threshold_a(params);
    let th_c = threshold_c(params);
    let label = if p <= th_a {
        RegionLabel::A
    } else if th_a.max(th_c).max(1.0) < p && p < pc {
        RegionLabel::B
    } else if p <= th_c && p < pf {
        RegionLabel::C
    } else {
        RegionLabel::Unclassified
    };
    Ok(label)
}

/// The bound a region label stands for.
pub fn labeled_bound(params: &ModelParams, p: f64, label: RegionLabel) -> Result<LifespanBound> {
    let [inter, wave, heat] = power_bounds(params, p);
    Ok(match label {
        RegionLabel::A => inter,
        RegionLabel::B => wave,
        RegionLabel::C => heat,
        RegionLabel::CriticalFujita => critical_bounds(params, p)?
            .into_iter()
            .find(|b| b.kind != BoundKind::CriticalPc)
            .unwrap_or_else(LifespanBound::none_known),
        RegionLabel::CriticalPc => critical_bounds(params, p)?
            .into_iter()
            .find(|b| b.kind == BoundKind::CriticalPc)
            .unwrap_or_else(LifespanBound::none_known),
        RegionLabel::Unclassified => LifespanBound::none_known(),
    })
}
