//! Critical exponents and the quadratics that define them.
//!
//! Everything here is closed-form arithmetic. The one place that needs care is
//! root extraction: the leading coefficient of `γ(n, p, α, μ)` can be tiny or even
//! change sign, so roots are taken with the cancellation-safe quadratic formula and
//! degenerate cases are reported instead of producing garbage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters `(n, α, μ)` of the damped wave equation with decaying speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: u32,
    pub alpha: f64,
    pub mu: f64,
}

impl ModelParams {
    pub fn new(n: u32, alpha: f64, mu: f64) -> Result<Self> {
        let params = Self { n, alpha, mu };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("n = {} but n >= 2 is required", self.n)));
        }
        if self.alpha == 1.0 {
            return Err(Error::Singular("alpha = 1 makes 1 - alpha vanish".into()));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::Domain(format!(
                "alpha = {} outside [0, 1)",
                self.alpha
            )));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(Error::Domain(format!("mu = {} but mu >= 0 is required", self.mu)));
        }
        Ok(())
    }

    /// Effective dimension `n(1 - α)` that enters the Fujita exponent.
    pub fn effective_dim(&self) -> f64 {
        self.n as f64 * (1.0 - self.alpha)
    }

    /// `p_F(n(1 - α))`.
    pub fn fujita(&self) -> f64 {
        1.0 + 2.0 / self.effective_dim()
    }

    /// Light-cone radius growth `A(t) = ∫_1^t s^{-α} ds`.
    pub fn light_cone(&self, t: f64) -> f64 {
        light_cone(self.alpha, t)
    }
}

/// `A(t) = (t^{1-α} - 1)/(1 - α)`.
pub fn light_cone(alpha: f64, t: f64) -> f64 {
    (t.powf(1.0 - alpha) - 1.0) / (1.0 - alpha)
}

/// Spatial dimension and equation-of-state constant of a flat FLRW universe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlrwParams {
    pub n: u32,
    pub w: f64,
}

impl FlrwParams {
    pub fn new(n: u32, w: f64) -> Result<Self> {
        let params = Self { n, w };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("n = {} but n >= 2 is required", self.n)));
        }
        let lower = (2.0 - self.n as f64) / self.n as f64;
        if !(self.w > lower && self.w <= 1.0) {
            return Err(Error::Domain(format!(
                "w = {} outside the decelerating range ({lower}, 1]",
                self.w
            )));
        }
        Ok(())
    }

    /// Exponent of the scale factor `a(t) = c t^{2/(n(1+w))}`.
    pub fn scale_factor_exponent(&self) -> f64 {
        2.0 / (self.n as f64 * (1.0 + self.w))
    }
}

/// `c2 p² + c1 p + c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Quadratic {
    pub const fn new(c2: f64, c1: f64, c0: f64) -> Self {
        Self { c2, c1, c0 }
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.c2 * p * p + self.c1 * p + self.c0
    }

    pub fn max_coefficient(&self) -> f64 {
        self.c2.abs().max(self.c1.abs()).max(self.c0.abs())
    }

    /// Real roots in ascending order, computed without catastrophic cancellation.
    pub fn real_roots(&self) -> Result<Vec<f64>> {
        let Quadratic { c2, c1, c0 } = *self;
        if c2 == 0.0 && c1 == 0.0 && c0 == 0.0 {
            return Err(Error::Degenerate("all quadratic coefficients vanish".into()));
        }
        if c2 == 0.0 {
            return Ok(if c1 == 0.0 { vec![] } else { vec![-c0 / c1] });
        }
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc < 0.0 {
            return Ok(vec![]);
        }
        let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
        let mut roots = if q == 0.0 {
            // c1 = 0 and c0 = 0: double root at zero
            vec![0.0, 0.0]
        } else {
            vec![q / c2, c0 / q]
        };
        roots.sort_by(f64::total_cmp);
        Ok(roots)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootNote {
    TwoRealOnePositive,
    /// Both real roots are positive; the smaller one is reported.
    TwoPositive,
    DegenerateLinear,
    NoPositiveRoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub root: Option<f64>,
    pub note: RootNote,
}

impl RootReport {
    /// The root, or `+∞` when none exists (no upper restriction on `p`).
    pub fn or_infinity(&self) -> f64 {
        self.root.unwrap_or(f64::INFINITY)
    }
}

/// Fujita exponent `1 + 2/d` for a real effective dimension `d`.
pub fn fujita(d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("fujita dimension must be positive, got {d}")));
    }
    Ok(1.0 + 2.0 / d)
}

/// `γ_S(n, p) = -(n-1)p² + (n+1)p + 2`.
pub fn strauss_quadratic(n: u32) -> Result<Quadratic> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} but n >= 2 is required")));
    }
    let n = n as f64;
    Ok(Quadratic::new(-(n - 1.0), n + 1.0, 2.0))
}

/// Strauss exponent `p_S(n)`.
pub fn strauss(n: u32) -> Result<f64> {
    positive_root(&strauss_quadratic(n)?)?
        .root
        .ok_or_else(|| Error::Degenerate("Strauss quadratic without positive root".into()))
}

/// Smallest positive root of `q`, i.e. the first sign change of `q` on `(0, ∞)`.
pub fn positive_root(q: &Quadratic) -> Result<RootReport> {
    let roots = q.real_roots()?;
    let positive: Vec<f64> = roots.into_iter().filter(|&r| r > 0.0).collect();
    let report = match (q.c2 == 0.0, positive.as_slice()) {
        (_, []) => RootReport { root: None, note: RootNote::NoPositiveRoot },
        (true, [r]) => RootReport { root: Some(*r), note: RootNote::DegenerateLinear },
        (false, [r]) => RootReport { root: Some(*r), note: RootNote::TwoRealOnePositive },
        (_, [r, ..]) => RootReport { root: Some(*r), note: RootNote::TwoPositive },
    };
    Ok(report)
}

/// Coefficients of `γ(n, ·, α, μ)`.
pub fn gamma_quadratic(params: &ModelParams) -> Result<Quadratic> {
    params.validate()?;
    let n = params.n as f64;
    let ModelParams { alpha, mu, .. } = *params;
    let one_minus = 1.0 - alpha;
    Ok(Quadratic::new(
        -(n - 1.0 + (mu - alpha) / one_minus),
        n + 1.0 + (mu + 3.0 * alpha) / one_minus,
        2.0,
    ))
}

/// `γ(n, p, α, μ)`.
pub fn gamma(params: &ModelParams, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("p = {p} must be positive")));
    }
    Ok(gamma_quadratic(params)?.eval(p))
}

/// `p_c(n, α, μ)`: positive root of `γ`. No root means the wavelike criterion
/// does not restrict `p` from above.
pub fn p_c(params: &ModelParams) -> Result<RootReport> {
    positive_root(&gamma_quadratic(params)?)
}

/// Coefficients of `γ₀(n, ·, w)`.
pub fn gamma0_quadratic(n: u32, w: f64) -> Result<Quadratic> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} but n >= 2 is required")));
    }
    if !(w > -1.0) {
        return Err(Error::Domain(format!("w = {w} but w > -1 is required")));
    }
    let n = n as f64;
    let k = 4.0 / (n * (1.0 + w));
    Ok(Quadratic::new(-(n - 1.0), n + 1.0 + k, 2.0 - k))
}

/// `γ₀(n, p, w) = (1 - 2/(n(1+w))) γ(n, p, 2/(n(1+w)), 2/(1+w))`.
pub fn gamma0(n: u32, p: f64, w: f64) -> Result<f64> {
    Ok(gamma0_quadratic(n, w)?.eval(p))
}

/// `p_c(n, w)`: positive root of `γ₀(n, ·, w)`.
pub fn p_c_flrw(f: &FlrwParams) -> Result<RootReport> {
    f.validate()?;
    positive_root(&gamma0_quadratic(f.n, f.w)?)
}

/// Damping coefficient at which `p_c(n, α, μ) = p_F(n(1 - α))`.
pub fn mu_star(n: u32, alpha: f64) -> Result<f64> {
    ModelParams::new(n, alpha, 0.0)?;
    let n = n as f64;
    let k = 1.0 - alpha;
    Ok((k * k * n * n + k * (1.0 + 2.0 * alpha) * n + 2.0) / (n * k + 2.0))
}

/// `n(n²+n+2) w² + 2n(n-1)² w + n³ - 5n² + 8n - 8`, whose larger root is `w*`.
pub fn w_star_quadratic(n: u32) -> Result<Quadratic> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} but n >= 2 is required")));
    }
    let n = n as f64;
    Ok(Quadratic::new(
        n * (n * n + n + 2.0),
        2.0 * n * (n - 1.0).powi(2),
        n * n * n - 5.0 * n * n + 8.0 * n - 8.0,
    ))
}

/// Equation-of-state value at which `p_F(n - 2/(1+w)) = p_c(n, w)`, or `None`
/// when the defining quadratic has complex roots (no crossing).
pub fn w_star(n: u32) -> Result<Option<f64>> {
    Ok(w_star_quadratic(n)?.real_roots()?.last().copied())
}

/// Maps FLRW parameters onto `(n, α, μ) = (n, 2/(n(1+w)), 2/(1+w))`.
pub fn flrw_to_model(f: &FlrwParams) -> Result<ModelParams> {
    f.validate()?;
    ModelParams::new(f.n, f.scale_factor_exponent(), 2.0 / (1.0 + f.w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn mp(n: u32, alpha: f64, mu: f64) -> ModelParams {
        ModelParams::new(n, alpha, mu).unwrap()
    }

    #[test]
    fn fujita_values() {
        assert_eq!(fujita(2.0).unwrap(), 2.0);
        assert_eq!(fujita(0.8).unwrap(), 3.5);
        assert_eq!(fujita(1.0).unwrap(), 3.0);
        assert!(matches!(fujita(0.0), Err(Error::Domain(_))));
        assert!(matches!(fujita(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn strauss_coefficients() {
        assert_eq!(strauss_quadratic(2).unwrap(), Quadratic::new(-1.0, 3.0, 2.0));
        assert_eq!(strauss_quadratic(3).unwrap(), Quadratic::new(-2.0, 4.0, 2.0));
        assert_eq!(strauss_quadratic(2).unwrap().eval(1.0), 4.0);
        assert!(strauss_quadratic(1).is_err());
    }

    #[test]
    fn positive_root_cases() {
        let r = positive_root(&Quadratic::new(-2.0, 4.0, 2.0)).unwrap();
        assert_relative_eq!(r.root.unwrap(), 1.0 + 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(r.note, RootNote::TwoRealOnePositive);

        let r = positive_root(&Quadratic::new(-1.0, 3.0, 2.0)).unwrap();
        assert_relative_eq!(r.root.unwrap(), 3.5615528128088303, max_relative = 1e-14);

        let r = positive_root(&Quadratic::new(0.5, 7.5, 2.0)).unwrap();
        assert_eq!(r, RootReport { root: None, note: RootNote::NoPositiveRoot });

        let r = positive_root(&Quadratic::new(0.0, -2.0, 3.0)).unwrap();
        assert_eq!(r, RootReport { root: Some(1.5), note: RootNote::DegenerateLinear });

        let r = positive_root(&Quadratic::new(1.0, -3.0, 2.0)).unwrap();
        assert_eq!(r.note, RootNote::TwoPositive);
        assert_relative_eq!(r.root.unwrap(), 1.0);

        assert!(matches!(
            positive_root(&Quadratic::new(0.0, 0.0, 0.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn no_positive_root_matches_sign_scan() {
        // brute-force scan of γ(2, p, 0.6, 0) on (0, 100]
        let params = mp(2, 0.6, 0.0);
        let q = gamma_quadratic(&params).unwrap();
        assert!((1..=100_000).all(|i| q.eval(i as f64 * 1e-3) > 0.0));
        assert_eq!(p_c(&params).unwrap().note, RootNote::NoPositiveRoot);
    }

    #[test]
    fn small_leading_coefficient_keeps_precision() {
        let q = Quadratic::new(-1e-12, 5.0, 2.0);
        let r = positive_root(&q).unwrap().root.unwrap();
        assert!(q.eval(r).abs() / q.max_coefficient() < 1e-10);
        assert_relative_eq!(r, 5e12, max_relative = 1e-6);
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(&mp(3, 0.0, 0.0), 2.0).unwrap(), 2.0);
        assert_relative_eq!(gamma(&mp(2, 0.6, 0.0), 1.0).unwrap(), 10.0, max_relative = 1e-14);
        let gy = gamma_quadratic(&mp(3, 2.0 / 3.0, 2.0)).unwrap();
        assert_relative_eq!(gy.c2, -6.0, max_relative = 1e-15);
        assert_relative_eq!(gy.c1, 16.0, max_relative = 1e-15);
        assert_eq!(gy.c0, 2.0);
        assert!(gamma(&mp(3, 0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn alpha_one_is_singular() {
        assert!(matches!(ModelParams::new(3, 1.0, 0.0), Err(Error::Singular(_))));
        assert!(matches!(ModelParams::new(3, 1.2, 0.0), Err(Error::Domain(_))));
        assert!(matches!(ModelParams::new(1, 0.2, 0.0), Err(Error::Domain(_))));
        assert!(matches!(ModelParams::new(2, 0.2, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn p_c_values() {
        let r = p_c(&mp(3, 0.0, 0.0)).unwrap().root.unwrap();
        assert_relative_eq!(r, 1.0 + 2f64.sqrt(), max_relative = 1e-14);
        let r = p_c(&mp(3, 2.0 / 3.0, 2.0)).unwrap().root.unwrap();
        assert_relative_eq!(r, 2.786299647846891, max_relative = 1e-12);
        assert!(p_c(&mp(2, 0.6, 0.0)).unwrap().root.is_none());
    }

    #[test]
    fn gamma0_values() {
        assert_relative_eq!(gamma0(3, 2.0, 1.0).unwrap(), 8.0 / 3.0, max_relative = 1e-14);
        let f = FlrwParams::new(3, 1.0).unwrap();
        assert_relative_eq!(
            p_c_flrw(&f).unwrap().root.unwrap(),
            2.5906672908862554,
            max_relative = 1e-12
        );
        assert!(gamma0(3, 2.0, -1.0).is_err());
    }

    #[test]
    fn mu_star_values() {
        let m = mu_star(2, 0.6).unwrap();
        assert_relative_eq!(m, 11.0 / 7.0, max_relative = 1e-14);
        let g = gamma(&mp(2, 0.6, m), 3.5).unwrap();
        assert!(g.abs() < 1e-12, "γ at (μ*, p_F) = {g}");
    }

    #[test]
    fn w_star_values() {
        let w3 = w_star(3).unwrap().unwrap();
        assert_relative_eq!(w3, 0.07380163977479762, max_relative = 1e-12);
        let f = FlrwParams::new(3, w3).unwrap();
        let pf = fujita(3.0 - 2.0 / (1.0 + w3)).unwrap();
        let pc = p_c_flrw(&f).unwrap().root.unwrap();
        assert!((pf - pc).abs() < 1e-8);

        // independent oracle: bisection on p_F(n - 2/(1+w)) - p_c(n, w) over w
        let gap = |w: f64| {
            let pf = fujita(2.0 - 2.0 / (1.0 + w)).unwrap();
            pf - p_c_flrw(&FlrwParams::new(2, w).unwrap()).unwrap().root.unwrap()
        };
        let (mut lo, mut hi) = (1e-6, 1.0);
        assert!(gap(lo) > 0.0 && gap(hi) < 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w2 = w_star(2).unwrap().unwrap();
        assert_relative_eq!(w2, lo, max_relative = 1e-12);
        assert_relative_eq!(w2, 0.3903882032022076, max_relative = 1e-12);
    }

    #[test]
    fn flrw_map() {
        let m = flrw_to_model(&FlrwParams::new(3, 1.0 / 3.0).unwrap()).unwrap();
        assert_relative_eq!(m.alpha, 0.5, max_relative = 1e-15);
        assert_relative_eq!(m.mu, 1.5, max_relative = 1e-15);
        let m = flrw_to_model(&FlrwParams::new(3, 1.0).unwrap()).unwrap();
        assert_relative_eq!(m.alpha, 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(m.mu, 1.0);
        assert!(FlrwParams::new(3, -1.0 / 3.0).is_err());
        assert!(FlrwParams::new(3, 1.01).is_err());
    }

    #[test]
    fn light_cone_is_zero_at_start_and_slower_for_larger_alpha() {
        assert_eq!(light_cone(0.3, 1.0), 0.0);
        assert!(light_cone(0.8, 10.0) < light_cone(0.5, 10.0));
        assert_relative_eq!(light_cone(0.0, 10.0), 9.0, max_relative = 1e-15);
    }
}
