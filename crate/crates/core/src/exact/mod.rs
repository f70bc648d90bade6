//! Exact arithmetic: rationals, polynomials in `E`, and truncated series in
//! `x = 1/n` with polynomial coefficients.

pub mod poly;
pub mod rational;
pub mod series;

pub use poly::{psi_polynomial, psi_polynomials, PolynomialE};
pub use rational::{format_rational, parse_rational, Rational};
pub use series::{Elementary, PowerSeriesX};
