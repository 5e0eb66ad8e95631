//! Kato-type blow-up lemmas as executable objects.
//!
//! The subcritical lemma turns a polynomial lower bound `F ≥ A₀ t^{-a}(t-T₁)^b` plus
//! the differential inequality `F'' + μF'/t ≥ A₁(t+R)^{-q}|F|^p` into a lifespan
//! bound `T < C A₀^{-(p-1)/M}`. The critical lemma starts from a logarithmic lower
//! bound `F ≥ A₀ (ln t/T₁)^b` and iterates it; the sequences `b_j`, `C_j` (and
//! `a_j` when `μ > 1`) are reproduced here with `C_j` kept in log-space because it
//! grows doubly exponentially.
//!
//! Absolute constants are not reproducible: `C` is set to 1 in every threshold
//! and `C_R` is a caller-supplied constant (default 1).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::ModelParams;

/// Default divergence margin δ.
pub const DEFAULT_DELTA: f64 = 1e-3;
/// Logarithmic search grid density for the divergence time.
pub const POINTS_PER_DECADE: u32 = 64;
/// Default search horizon, in decades above the envelope base time.
pub const DEFAULT_HORIZON_DECADES: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KatoSubcriticalParams {
    pub p: f64,
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub mu: f64,
    pub a0: f64,
    pub a1: f64,
    pub r: f64,
    pub t0: f64,
    pub t1: f64,
}

impl KatoSubcriticalParams {
    /// `M = (p-1)(b-a) - q + 2`.
    pub fn m(&self) -> f64 {
        (self.p - 1.0) * (self.b - self.a) - self.q + 2.0
    }

    pub fn validate(&self) -> Result<()> {
        let s = self;
        if !(s.p > 1.0) {
            return Err(Error::Domain(format!("p = {} but p > 1 is required", s.p)));
        }
        if !(s.a >= 0.0 && s.b > 0.0 && s.q > 0.0 && s.mu >= 0.0) {
            return Err(Error::Domain("need a >= 0, b > 0, q > 0, mu >= 0".into()));
        }
        if !(s.a0 > 0.0 && s.a1 > 0.0 && s.r > 0.0) {
            return Err(Error::Domain("A0, A1 and R must be positive".into()));
        }
        if !(s.t1 > s.t0 && s.t0 >= 1.0) {
            return Err(Error::Domain("need T1 > T0 >= 1".into()));
        }
        if !(self.m() > 0.0) {
            return Err(Error::Inapplicable(format!("M = {} must be positive", self.m())));
        }
        Ok(())
    }

    /// Parameters obtained from problem `(n, α, μ)` with `A₀ = ε^p`:
    /// `q = n(1-α)(p-1)`, `a = μ + q`, `b = μ + 2`.
    pub fn from_model(params: &ModelParams, p: f64, eps: f64) -> Self {
        let q = params.effective_dim() * (p - 1.0);
        Self {
            p,
            a: params.mu + q,
            b: params.mu + 2.0,
            q,
            mu: params.mu,
            a0: eps.powf(p),
            a1: 1.0,
            r: 1.0,
            t0: 1.0,
            t1: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubcriticalThreshold {
    pub m: f64,
    /// `-(p-1)/M`, the power of `A₀`.
    pub a0_exponent: f64,
    /// `A₀^{-(p-1)/M}` with the unknown constant set to 1.
    pub threshold: f64,
    pub normalized: bool,
}

pub fn subcritical_threshold(kp: &KatoSubcriticalParams) -> Result<SubcriticalThreshold> {
    kp.validate()?;
    let m = kp.m();
    let a0_exponent = -(kp.p - 1.0) / m;
    Ok(SubcriticalThreshold { m, a0_exponent, threshold: kp.a0.powf(a0_exponent), normalized: false })
}

/// Power of `ε` in the subcritical threshold when `A₀ = ε^p`: `-p(p-1)/M`.
pub fn subcritical_eps_exponent(kp: &KatoSubcriticalParams) -> Result<f64> {
    kp.validate()?;
    Ok(-kp.p * (kp.p - 1.0) / kp.m())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuCase {
    LeOne,
    GtOne,
}

impl MuCase {
    pub fn of(mu: f64) -> Self {
        if mu <= 1.0 {
            MuCase::LeOne
        } else {
            MuCase::GtOne
        }
    }

    /// Additive constant of the `b_j` recursion: 2 for `μ ≤ 1`, 1 for `μ > 1`.
    pub fn shift(self) -> f64 {
        match self {
            MuCase::LeOne => 2.0,
            MuCase::GtOne => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KatoCriticalParams {
    pub p: f64,
    pub b: f64,
    pub mu: f64,
    pub a0: f64,
    pub a1: f64,
    pub r: f64,
    pub t0: f64,
    pub t1: f64,
    /// Constant absorbed together with `A₁` in the iteration; not derivable here.
    pub c_r: f64,
}

impl KatoCriticalParams {
    pub fn new(p: f64, b: f64, mu: f64, a0: f64) -> Self {
        Self { p, b, mu, a0, a1: 1.0, r: 1.0, t0: 1.0, t1: 2.0, c_r: 1.0 }
    }

    pub fn mu_case(&self) -> MuCase {
        MuCase::of(self.mu)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) {
            return Err(Error::Domain(format!("p = {} but p > 1 is required", self.p)));
        }
        if !(self.b > 0.0 && self.mu >= 0.0) {
            return Err(Error::Domain("need b > 0 and mu >= 0".into()));
        }
        if !(self.a0 > 0.0 && self.a1 > 0.0 && self.r > 0.0 && self.c_r > 0.0) {
            return Err(Error::Domain("A0, A1, R and C_R must be positive".into()));
        }
        if !(self.t1 > self.t0 && self.t0 >= 1.0) {
            return Err(Error::Domain("need T1 > T0 >= 1".into()));
        }
        Ok(())
    }

    fn shift_over(&self) -> f64 {
        self.mu_case().shift() / (self.p - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KatoState {
    pub j: u32,
    pub b_j: f64,
    pub log_c_j: f64,
    /// Only used when `μ > 1`.
    pub a_j: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceTable {
    pub mu_case: MuCase,
    pub states: Vec<KatoState>,
    /// Set when `b_j` left the representable range and the table was cut short.
    pub truncated: bool,
}

impl SequenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,b_j,log_C_j,a_j\n");
        for s in &self.states {
            let a = s.a_j.map(|a| a.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{a}", s.j, s.b_j, s.log_c_j);
        }
        out
    }
}

/// `a_j = 1 + 1/2 + ... + (1/2)^j`, summed term by term.
pub fn a_seq(j: u32) -> f64 {
    (0..=j).map(|k| 0.5f64.powi(k as i32)).sum()
}

/// Runs the `b_j`, `C_j` recursions from `b₀ = b`, `C₀ = A₀`.
pub fn iterate_sequences(kc: &KatoCriticalParams, j_max: u32) -> Result<SequenceTable> {
    kc.validate()?;
    let case = kc.mu_case();
    let p = kc.p;
    let ln_a1cr = (kc.a1 * kc.c_r).ln();
    let mut states = Vec::with_capacity(j_max as usize + 1);
    let mut b = kc.b;
    let mut log_c = kc.a0.ln();
    let mut truncated = false;
    for j in 0..=j_max {
        states.push(KatoState {
            j,
            b_j: b,
            log_c_j: log_c,
            a_j: (case == MuCase::GtOne).then(|| a_seq(j)),
        });
        let b_next = p * b + case.shift();
        log_c = match case {
            MuCase::LeOne => ln_a1cr + p * log_c - 2.0 * b_next.ln(),
            MuCase::GtOne => {
                ln_a1cr + kc.mu * (2.0f64 / 3.0).ln() + p * log_c
                    - 2.0f64.ln()
                    - b_next.ln()
                    - (j + 1) as f64 * 2.0f64.ln()
            }
        };
        b = b_next;
        if j < j_max && !(b.is_finite() && log_c.is_finite()) {
            truncated = true;
            break;
        }
    }
    Ok(SequenceTable { mu_case: case, states, truncated })
}

/// `b_j = p^j (b + s/(p-1)) - s/(p-1)` with `s = 2` (`μ ≤ 1`) or `s = 1` (`μ > 1`).
pub fn closed_form_b(kc: &KatoCriticalParams, j: u32) -> f64 {
    let s = kc.shift_over();
    kc.p.powi(j as i32) * (kc.b + s) - s
}

/// `Σ_{k≥0} k/p^k = p/(p-1)²`.
pub fn weighted_geometric_sum(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("sum diverges for p = {p}")));
    }
    Ok(p / ((p - 1.0) * (p - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub b_const: f64,
    pub e: f64,
}

/// Constants `B` and `E` with `C_j ≥ exp(E p^j)`.
pub fn compute_e(kc: &KatoCriticalParams) -> Result<GrowthConstants> {
    kc.validate()?;
    let p = kc.p;
    let sum = weighted_geometric_sum(p)?;
    let base = kc.b + kc.shift_over();
    let (b_const, log_factor) = match kc.mu_case() {
        MuCase::LeOne => (kc.a1 * kc.c_r / (base * base), 2.0 * p.ln()),
        MuCase::GtOne => (
            kc.a1 * kc.c_r * (2.0f64 / 3.0).powf(kc.mu) / (2.0 * base),
            (2.0 * p).ln(),
        ),
    };
    let e = b_const.ln().min(0.0) / (p - 1.0) - sum * log_factor + kc.a0.ln();
    Ok(GrowthConstants { b_const, e })
}

/// First index from which `ln C_j ≥ E p^j - tol·p^j` holds through the end of the table.
pub fn growth_onset(table: &SequenceTable, e: f64, p: f64, tol: f64) -> Option<u32> {
    let holds = |s: &KatoState| s.log_c_j - e * p.powi(s.j as i32) >= -tol * p.powi(s.j as i32);
    let mut onset = None;
    for s in table.states.iter().rev() {
        if holds(s) {
            onset = Some(s.j);
        } else {
            break;
        }
    }
    onset
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalThreshold {
    /// `-(p-1)/(b(p-1)+2)` for `μ ≤ 1`, `-(p-1)/(b(p-1)+1)` for `μ > 1`.
    pub a0_exponent: f64,
    /// `ln T` of the threshold `exp(A₀^exponent)` with the unknown constant set to 1.
    pub log_threshold: f64,
    pub threshold: f64,
}

pub fn critical_threshold(kc: &KatoCriticalParams) -> Result<CriticalThreshold> {
    kc.validate()?;
    let p = kc.p;
    let a0_exponent = -(p - 1.0) / (kc.b * (p - 1.0) + kc.mu_case().shift());
    let log_threshold = kc.a0.powf(a0_exponent);
    Ok(CriticalThreshold { a0_exponent, log_threshold, threshold: log_threshold.exp() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub mu_case: MuCase,
    pub b_const: f64,
    pub e: f64,
    pub delta_margin: f64,
    /// `T₁` for `μ ≤ 1`, `2T₁` for `μ > 1`.
    pub base_time: f64,
    pub horizon_decades: f64,
    pub found: bool,
    pub t_star: Option<f64>,
    pub log10_t_star: Option<f64>,
    /// Bracket value at `t_star`.
    pub bracket: Option<f64>,
}

impl EnvelopeReport {
    pub fn to_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }
}

/// Bracket `E + (b + s/(p-1)) ln ln(t/base)` evaluated from `ln(t/base)`.
pub fn bracket(e: f64, b: f64, p: f64, case: MuCase, ln_ratio: f64) -> f64 {
    e + (b + case.shift() / (p - 1.0)) * ln_ratio.ln()
}

/// Logarithm of the iterated lower bound on `F(t)` at step `j`.
pub fn log_envelope(kc: &KatoCriticalParams, e: f64, t: f64, j: u32) -> f64 {
    let case = kc.mu_case();
    let base = match case {
        MuCase::LeOne => kc.t1,
        MuCase::GtOne => 2.0 * kc.t1,
    };
    let s = kc.shift_over();
    -s * (t / kc.t1).ln().ln() + bracket(e, kc.b, kc.p, case, (t / base).ln()) * kc.p.powi(j as i32)
}

/// Searches the first grid time where the bracket exceeds `delta`.
pub fn divergence_time(
    e: f64,
    b: f64,
    p: f64,
    case: MuCase,
    base_time: f64,
    delta: f64,
    horizon_decades: f64,
) -> (Option<f64>, Option<f64>, Option<f64>) {
    let n = (horizon_decades * POINTS_PER_DECADE as f64).floor() as u64;
    for k in 1..=n {
        let decades = k as f64 / POINTS_PER_DECADE as f64;
        let value = bracket(e, b, p, case, decades * std::f64::consts::LN_10);
        if value >= delta {
            let log10_t = base_time.log10() + decades;
            return (Some(10f64.powf(log10_t)), Some(log10_t), Some(value));
        }
    }
    (None, None, None)
}

pub fn envelope_divergence(kc: &KatoCriticalParams, delta: f64, horizon_decades: f64) -> Result<EnvelopeReport> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta = {delta} must be positive")));
    }
    let GrowthConstants { b_const, e } = compute_e(kc)?;
    let case = kc.mu_case();
    let base_time = match case {
        MuCase::LeOne => kc.t1,
        MuCase::GtOne => 2.0 * kc.t1,
    };
    let (t_star, log10_t_star, value) = divergence_time(e, kc.b, kc.p, case, base_time, delta, horizon_decades);
    Ok(EnvelopeReport {
        mu_case: case,
        b_const,
        e,
        delta_margin: delta,
        base_time,
        horizon_decades,
        found: t_star.is_some(),
        t_star,
        log10_t_star,
        bracket: value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn kc(p: f64, b: f64, mu: f64) -> KatoCriticalParams {
        KatoCriticalParams::new(p, b, mu, 1.0)
    }

    #[test]
    fn subcritical_threshold_hand_value() {
        let kp = KatoSubcriticalParams {
            p: 2.0, a: 2.0, b: 3.0, q: 1.0, mu: 0.0, a0: 1.0, a1: 1.0, r: 1.0, t0: 1.0, t1: 2.0,
        };
        let th = subcritical_threshold(&kp).unwrap();
        assert_eq!(th.m, 2.0);
        assert_eq!(th.a0_exponent, -0.5);
        assert_eq!(th.threshold, 1.0);
        assert!(!th.normalized);
        let th = subcritical_threshold(&KatoSubcriticalParams { a0: 0.01, ..kp }).unwrap();
        assert_relative_eq!(th.threshold, 10.0, max_relative = 1e-14);

        let bad = KatoSubcriticalParams { q: 5.0, ..kp };
        assert!(matches!(subcritical_threshold(&bad), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn threshold_wiring_reproduces_heatlike_exponent() {
        let params = ModelParams::new(2, 0.5, 2.0).unwrap();
        let p = 1.8;
        let kp = KatoSubcriticalParams::from_model(&params, p, 0.1);
        let k = params.effective_dim() * (p - 1.0);
        assert_relative_eq!(kp.m(), p * (2.0 - k), max_relative = 1e-14);
        assert_relative_eq!(
            subcritical_eps_exponent(&kp).unwrap(),
            -(p - 1.0) / (2.0 - k),
            max_relative = 1e-12
        );
    }

    #[test]
    fn b_sequences() {
        let t = iterate_sequences(&kc(2.0, 1.0, 0.5), 2).unwrap();
        let b: Vec<f64> = t.states.iter().map(|s| s.b_j).collect();
        assert_eq!(b, vec![1.0, 4.0, 10.0]);
        assert!(t.states.iter().all(|s| s.a_j.is_none()));

        let t = iterate_sequences(&kc(2.0, 1.0, 2.0), 2).unwrap();
        let b: Vec<f64> = t.states.iter().map(|s| s.b_j).collect();
        assert_eq!(b, vec![1.0, 3.0, 7.0]);
        let a: Vec<f64> = t.states.iter().map(|s| s.a_j.unwrap()).collect();
        assert_eq!(a, vec![1.0, 1.5, 1.75]);

        assert_eq!(closed_form_b(&kc(3.0, 2.0, 0.0), 2), 26.0);
        assert_relative_eq!(closed_form_b(&kc(1.7, 0.3, 3.0), 0), 0.3, max_relative = 1e-14);
        assert!(iterate_sequences(&kc(1.0, 1.0, 0.0), 5).is_err());
    }

    #[test]
    fn c_sequence_matches_direct_recursion() {
        // non-log recursion for a few steps as an oracle
        let k = KatoCriticalParams { a1: 0.7, c_r: 1.3, ..kc(2.0, 1.0, 0.5) };
        let t = iterate_sequences(&k, 3).unwrap();
        let (mut b, mut c) = (1.0f64, 1.0f64);
        for s in &t.states {
            assert_relative_eq!(s.log_c_j, c.ln(), epsilon = 1e-12);
            c = 0.7 * 1.3 * c.powf(2.0) / (2.0 * b + 2.0).powi(2);
            b = 2.0 * b + 2.0;
        }
        let k = KatoCriticalParams { a1: 0.7, c_r: 1.3, ..kc(2.0, 1.0, 1.5) };
        let t = iterate_sequences(&k, 3).unwrap();
        let (mut b, mut c) = (1.0f64, 1.0f64);
        for s in &t.states {
            assert_relative_eq!(s.log_c_j, c.ln(), epsilon = 1e-12);
            let j = s.j as i32;
            c = 0.7 * 1.3 * (2.0f64 / 3.0).powf(1.5) * c.powf(2.0) / (2.0 * (2.0 * b + 1.0) * 2f64.powi(j + 1));
            b = 2.0 * b + 1.0;
        }
    }

    #[test]
    fn overflow_truncates() {
        let t = iterate_sequences(&kc(50.0, 1.0, 0.0), 400).unwrap();
        assert!(t.truncated);
        assert!(t.states.len() < 401);
        assert!(t.states.iter().all(|s| s.b_j.is_finite()));
    }

    #[test]
    fn weighted_sum_closed_form() {
        let partial: f64 = (0..=60).map(|k| k as f64 / 2f64.powi(k)).sum();
        assert_relative_eq!(weighted_geometric_sum(2.0).unwrap(), 2.0);
        assert_relative_eq!(partial, 2.0, max_relative = 1e-15);
        assert!(weighted_geometric_sum(1.0).is_err());
    }

    #[test]
    fn b_constant_and_e_shift() {
        let g = compute_e(&kc(2.0, 1.0, 0.5)).unwrap();
        assert_relative_eq!(g.b_const, 1.0 / 9.0, max_relative = 1e-15);
        let lambda: f64 = 0.37;
        let g2 = compute_e(&KatoCriticalParams { a0: lambda, ..kc(2.0, 1.0, 0.5) }).unwrap();
        assert_relative_eq!(g2.e - g.e, lambda.ln(), max_relative = 1e-14);
    }

    #[test]
    fn critical_threshold_exponents() {
        let p = 2.5;
        for (mu, expected) in [(2.0, -(p - 1.0)), (0.5, -p * (p - 1.0) / (p + 1.0))] {
            let th = critical_threshold(&KatoCriticalParams::new(p, 1.0, mu, 0.5)).unwrap();
            // A₀ = ε^p turns the A₀ power into p times itself
            assert_relative_eq!(p * th.a0_exponent, expected, max_relative = 1e-14);
        }
        let a0 = 0.01;
        let low = critical_threshold(&KatoCriticalParams::new(p, 1.0, 0.5, a0)).unwrap();
        let high = critical_threshold(&KatoCriticalParams::new(p, 1.0, 2.0, a0)).unwrap();
        assert!(low.log_threshold < high.log_threshold);
    }

    #[test]
    fn divergence_at_e_for_zero_e() {
        let delta = 1e-3;
        let (t, _, v) = divergence_time(0.0, 1.0, 2.0, MuCase::LeOne, 1.0, delta, 10.0);
        let t = t.unwrap();
        let exact = (delta / 3.0).exp().exp();
        assert!(t >= exact && t <= exact * 10f64.powf(1.0 / 64.0) * (1.0 + 1e-12));
        assert!(v.unwrap() >= delta);
    }

    #[test]
    fn envelope_grows_in_j_past_t_star() {
        let k = KatoCriticalParams::new(2.0, 1.0, 0.5, 0.3);
        let rep = envelope_divergence(&k, DEFAULT_DELTA, DEFAULT_HORIZON_DECADES).unwrap();
        assert!(rep.found);
        let t = rep.t_star.unwrap();
        assert!(t > k.t1);
        let logs: Vec<f64> = (0..20).map(|j| log_envelope(&k, rep.e, t, j)).collect();
        assert!(logs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn no_divergence_within_short_horizon() {
        let k = KatoCriticalParams::new(2.0, 1.0, 0.5, 1e-30);
        let rep = envelope_divergence(&k, DEFAULT_DELTA, 2.0).unwrap();
        assert!(!rep.found);
        assert_eq!(rep.t_star, None);
    }

    #[test]
    fn sequence_csv_shape() {
        let t = iterate_sequences(&kc(2.0, 1.0, 2.0), 1).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("j,b_j,log_C_j,a_j"));
        assert_eq!(lines.next(), Some("0,1,0,1"));
    }
}
