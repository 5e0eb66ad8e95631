//! Numerical laboratory for the semilinear wave equation
//!
//! ```text
//! u_tt - t^{-2α} Δu + (μ/t) u_t = |u|^p,   t > 1, x ∈ R^n
//! ```
//!
//! which is the flat FLRW wave equation with scale factor `a(t) = c t^{2/(n(1+w))}`
//! once `α = 2/(n(1+w))` and `μ = 2/(1+w)`.
//!
//! * [`exponents`]: Fujita/Strauss-type critical exponents and the quadratics behind them.
//! * [`bounds`]: lifespan upper bounds, best-bound classification and region maps.
//! * [`kato`]: threshold times and iteration sequences of the Kato-type lemmas.
//! * [`blowup_ode`]: the comparison ODE for `F(t) = ∫u dx`, with ε sweeps.
//! * [`pde`]: a radial finite-difference solver with propagation and Hölder diagnostics.

// `!(x > 0.0)` is used on purpose: it rejects NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup_ode;
pub mod bounds;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod kato;
pub mod pde;
pub mod region_map;

pub use error::{Error, Result};
