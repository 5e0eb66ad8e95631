use approx::assert_relative_eq;
use flrw_core::bounds::{heatlike_exponent, intermediate_exponent, threshold_a, threshold_c, wavelike_exponent};
use flrw_core::exponents::*;
use flrw_core::kato::*;
use proptest::prelude::*;

// direct transcription of the two coefficient formulas, kept apart from the library
fn gamma_oracle(n: f64, p: f64, a: f64, m: f64) -> f64 {
    -p * p * (n - 1.0 + (m - a) / (1.0 - a)) + p * (n + 1.0 + (m + 3.0 * a) / (1.0 - a)) + 2.0
}

proptest! {
    #[test]
    fn gamma_matches_transcription(n in 2u32..7, p in 1.0f64..5.0, alpha in 0.0f64..0.95, mu in 0.0f64..4.0) {
        let params = ModelParams::new(n, alpha, mu).unwrap();
        let g = gamma(&params, p).unwrap();
        let o = gamma_oracle(n as f64, p, alpha, mu);
        prop_assert!((g - o).abs() <= 1e-12 * o.abs().max(1.0));
    }

    #[test]
    fn gamma0_is_scaled_gamma(n in 2u32..7, p in 0.5f64..5.0, t in 0.01f64..0.99) {
        let lower = 2.0 / n as f64 - 1.0;
        let w = lower + t * (1.0 - lower);
        let f = FlrwParams::new(n, w).unwrap();
        let m = flrw_to_model(&f).unwrap();
        let lhs = gamma0(n, p, w).unwrap();
        let rhs = (1.0 - m.alpha) * gamma(&m, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        let d = n as f64;
        prop_assert!((m.effective_dim() - (d - 2.0 / (1.0 + w))).abs() <= 1e-12 * d);
    }

    #[test]
    fn positive_root_is_a_root(n in 2u32..7, alpha in 0.0f64..0.95, mu in 0.0f64..4.0) {
        let params = ModelParams::new(n, alpha, mu).unwrap();
        let q = gamma_quadratic(&params).unwrap();
        if let Some(r) = p_c(&params).unwrap().root {
            prop_assert!(r > 0.0);
            prop_assert!(q.eval(r).abs() <= 1e-9 * q.max_coefficient() * r.max(1.0).powi(2));
            // γ changes sign across p_c
            prop_assert!(q.eval(r * (1.0 - 1e-6)) * q.eval(r * (1.0 + 1e-6)) <= 0.0);
        }
    }

    #[test]
    fn crossings_agree(n in 2u32..7, alpha in 0.0f64..0.9, mu in 0.0f64..3.0) {
        let params = ModelParams::new(n, alpha, mu).unwrap();
        let pa = threshold_a(&params);
        if pa.is_finite() && pa > 1.0 {
            if let (Some(w), Some(i)) = (wavelike_exponent(&params, pa), intermediate_exponent(&params, pa)) {
                prop_assert!((w - i).abs() <= 1e-9 * w.abs().max(1.0));
            }
        }
        let pc = threshold_c(&params);
        if pc.is_finite() && pc > 1.0 {
            if let (Some(w), Some(h)) = (wavelike_exponent(&params, pc), heatlike_exponent(&params, pc)) {
                prop_assert!((w - h).abs() <= 1e-9 * w.abs().max(1.0));
            }
        }
    }

    #[test]
    fn b_recursion_matches_closed_form(p in 1.05f64..4.0, b in 0.1f64..5.0, mu in 0.0f64..3.0) {
        let kc = KatoCriticalParams::new(p, b, mu, 0.01);
        let table = iterate_sequences(&kc, 30).unwrap();
        for s in &table.states {
            let c = closed_form_b(&kc, s.j);
            prop_assert!((s.b_j - c).abs() <= 1e-10 * c.abs());
        }
    }

    #[test]
    fn threshold_wiring_gives_heatlike_exponent(n in 2u32..6, alpha in 0.0f64..0.9, mu in 0.0f64..3.0, s in 0.05f64..0.95) {
        let params = ModelParams::new(n, alpha, mu).unwrap();
        let p = 1.0 + s * (params.fujita() - 1.0);
        let kp = KatoSubcriticalParams::from_model(&params, p, 0.1);
        let e = subcritical_eps_exponent(&kp).unwrap();
        let h = heatlike_exponent(&params, p).unwrap();
        prop_assert!((e + h).abs() <= 1e-12 * h.abs().max(1.0));
    }
}

#[test]
fn w_star_balances_fujita_and_critical_exponents() {
    // bisection on p_F(n - 2/(1+w)) - p_c(n, w) over the admissible w range
    let diff = |w: f64| {
        let f = FlrwParams::new(3, w).unwrap();
        let m = flrw_to_model(&f).unwrap();
        m.fujita() - p_c_flrw(&f).unwrap().or_infinity()
    };
    let (mut lo, mut hi) = (-1.0 / 3.0 + 1e-9, 1.0);
    assert!(diff(lo).signum() != diff(hi).signum());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if diff(mid).signum() == diff(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert_relative_eq!(w_star(3).unwrap().unwrap(), 0.5 * (lo + hi), max_relative = 1e-10);
}

#[test]
fn strauss_exponents_from_quadratic_formula() {
    for n in 2..7u32 {
        let d = n as f64;
        let oracle = ((d + 1.0) + ((d + 1.0).powi(2) + 8.0 * (d - 1.0)).sqrt()) / (2.0 * (d - 1.0));
        assert_relative_eq!(strauss(n).unwrap(), oracle, max_relative = 1e-13);
    }
}
