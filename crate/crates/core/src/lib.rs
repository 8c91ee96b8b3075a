//! Exact combinatorics and arbitrary-precision evaluation of an absolutely
//! convergent series for `∫₁^∞ e^{-up} u^s du`, the upper incomplete gamma
//! function `Γ(s, z)` (z ≥ 1) and the Riemann xi function.
//!
//! The series terms are the polynomials
//!
//! ```text
//! g_n(s, p) = Σ_{i=1}^{n} [n, i] (s)_i / p^i
//! ```
//!
//! built from unsigned Stirling numbers of the first kind `[n, i]` and the
//! falling factorial `(s)_i`, and
//!
//! ```text
//! ∫₁^∞ e^{-up} u^s du = e^{-p}/p · (1 + Σ_{n≥1} g_n(s, p) / (n+1)!)
//! ```
//!
//! for every `p ≥ 1` and every complex `s`. Absolute convergence rests on
//! `(1+x)^n g_n(s, 1+x)` having nonnegative coefficients; the crate proves
//! that claim instance by instance with explicit positivity certificates
//! built from a three-index family of Newton coefficients `A_{m,i}^k` and
//! four level-shifting operators.
//!
//! Module map:
//!
//! * [`exact_core`]: Stirling triangle, falling factorials, binomials.
//! * [`newton_table`]: the `A_{m,i}^k` table and its forward-difference oracle.
//! * [`operator_calculus`]: the operators `B1, C1, B2, C2`, the polynomials
//!   `𝒜_{m,i}^k(t)` and positivity certificates.
//! * [`g_polynomials`]: `g_n`, its exact bivariate expansion and positivity.
//! * [`gamma_series`]: the integral series, `Γ(s, z)` and tail extrapolation.
//! * [`riemann_xi`]: `b_k` constants, `Λ(s)` and `ξ(s)`.
//! * [`oracle`]: quadrature, closed forms and the log-derivative check.

pub mod error;
pub mod exact_core;
pub mod g_polynomials;
pub mod gamma_series;
pub mod newton_table;
pub mod numeric;
pub mod operator_calculus;
pub mod oracle;
pub mod riemann_xi;

pub use error::{Error, Result};
pub use numeric::{BigComplex, BigReal};
