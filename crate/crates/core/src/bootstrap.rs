//! Order-by-order derivation of the `1/n` corrections to the amplitude and
//! phase of `psi_n(E)`.
//!
//! Writing `psi_n = A_n/sqrt(n) cos(Phi_n)` with
//!
//! ```text
//! A_n   = A(E) (1 + delta(x)),      delta(x) = sum_j delta_j(E) x^j
//! phi_n = phi(E) + eps(x),          eps(x)   = sum_j eps_j(E)   x^j,    x = 1/n
//! ```
//!
//! and substituting into the recurrence, the coefficients of `cos Phi_n` and
//! `sin Phi_n` must vanish separately. After multiplying by
//! `x (1 + delta(x)) sqrt(n) / A_n` both conditions become formal series in
//! `x` whose coefficients are polynomials in `E`:
//!
//! ```text
//! C1 = sqrt(1+x) (1+delta(x+)) sin(a+) + (1-x)^(-1/2) (1+delta(x-)) sin(a-) - E x (1+delta(x))
//! C2 = sqrt(1+x) (1+delta(x+)) cos(a+) - (1-x)^(-1/2) (1+delta(x-)) cos(a-)
//! ```
//!
//! where `x+ = x/(1+x)` (that is `1/(n+1)`), `x- = x/(1-x)` and
//!
//! ```text
//! a+ = (E/2) log(1+x)       + eps(x+) - eps(x)
//! a- = (E/2) log(1/(1-x))   + eps(x)  - eps(x-)
//! ```
//!
//! The unknowns `delta_k`, `eps_k` first enter both series at `x^(k+1)`,
//! linearly, so each order is a 2x2 linear solve.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::rat;
use crate::exact::{Elementary, PolynomialE, PowerSeriesX, Rational};

/// Exact correction polynomials `delta_1..delta_J` and `eps_1..eps_J`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTables")]
pub struct CorrectionTables {
    order: usize,
    delta: Vec<PolynomialE>,
    epsilon: Vec<PolynomialE>,
}

#[derive(Deserialize)]
struct RawTables {
    order: usize,
    delta: Vec<PolynomialE>,
    epsilon: Vec<PolynomialE>,
}

impl TryFrom<RawTables> for CorrectionTables {
    type Error = Error;

    fn try_from(raw: RawTables) -> Result<Self> {
        CorrectionTables::new(raw.delta, raw.epsilon).and_then(|t| {
            if t.order == raw.order {
                Ok(t)
            } else {
                Err(Error::MalformedTable(format!(
                    "order {} but {} terms",
                    raw.order, t.order
                )))
            }
        })
    }
}

impl CorrectionTables {
    pub fn new(delta: Vec<PolynomialE>, epsilon: Vec<PolynomialE>) -> Result<Self> {
        if delta.len() != epsilon.len() {
            return Err(Error::MalformedTable(format!(
                "{} delta terms vs {} epsilon terms",
                delta.len(),
                epsilon.len()
            )));
        }
        Ok(CorrectionTables {
            order: delta.len(),
            delta,
            epsilon,
        })
    }

    /// Tables with no correction terms; evaluation yields zero.
    pub fn empty() -> Self {
        CorrectionTables {
            order: 0,
            delta: Vec::new(),
            epsilon: Vec::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `delta_1, ..., delta_J` (index 0 holds `delta_1`).
    pub fn delta(&self) -> &[PolynomialE] {
        &self.delta
    }

    pub fn epsilon(&self) -> &[PolynomialE] {
        &self.epsilon
    }

    /// First `order` terms.
    pub fn truncated(&self, order: usize) -> Self {
        let order = order.min(self.order);
        CorrectionTables {
            order,
            delta: self.delta[..order].to_vec(),
            epsilon: self.epsilon[..order].to_vec(),
        }
    }

    /// Copy with `delta_j` replaced.
    pub fn with_delta(&self, j: usize, poly: PolynomialE) -> Self {
        let mut out = self.clone();
        out.delta[j - 1] = poly;
        out
    }

    /// Copy with `eps_j` replaced.
    pub fn with_epsilon(&self, j: usize, poly: PolynomialE) -> Self {
        let mut out = self.clone();
        out.epsilon[j - 1] = poly;
        out
    }

    /// Partial sums `(delta(n, E), eps(n, E))` in floating point.
    pub fn eval(&self, n: f64, e: f64) -> (f64, f64) {
        self.evaluator(e).at(n)
    }

    /// Pre-evaluates every coefficient at a fixed energy.
    pub fn evaluator(&self, e: f64) -> CorrectionEvaluator {
        CorrectionEvaluator {
            energy: e,
            delta: self.delta.iter().map(|p| p.eval(e)).collect(),
            epsilon: self.epsilon.iter().map(|p| p.eval(e)).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedTable(e.to_string()))
    }
}

impl fmt::Debug for CorrectionTables {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CorrectionTables(order {})", self.order)?;
        for (j, (d, e)) in self.delta.iter().zip(&self.epsilon).enumerate() {
            writeln!(f, "  delta_{} = {d}", j + 1)?;
            writeln!(f, "  eps_{} = {e}", j + 1)?;
        }
        Ok(())
    }
}

/// Correction series with coefficients fixed at one energy.
#[derive(Debug, Clone)]
pub struct CorrectionEvaluator {
    energy: f64,
    delta: Vec<f64>,
    epsilon: Vec<f64>,
}

impl CorrectionEvaluator {
    pub fn energy(&self) -> f64 {
        self.energy
    }

    fn sum(coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| (acc + c) * x)
    }

    /// `(delta(n, E), eps(n, E))`.
    #[inline]
    pub fn at(&self, n: f64) -> (f64, f64) {
        let x = 1.0 / n;
        (Self::sum(&self.delta, x), Self::sum(&self.epsilon, x))
    }

    pub fn delta_at(&self, n: f64) -> f64 {
        Self::sum(&self.delta, 1.0 / n)
    }

    pub fn epsilon_at(&self, n: f64) -> f64 {
        Self::sum(&self.epsilon, 1.0 / n)
    }

    /// Phase advance `alpha_n = Phi_{n+1} - Phi_n + pi/2`.
    pub fn alpha(&self, n: f64) -> f64 {
        0.5 * self.energy * (1.0 / n).ln_1p() + self.epsilon_at(n + 1.0) - self.epsilon_at(n)
    }

    /// `A_{n+1} / A_n` implied by the amplitude corrections.
    pub fn amplitude_ratio(&self, n: f64) -> f64 {
        (1.0 + self.delta_at(n + 1.0)) / (1.0 + self.delta_at(n))
    }
}

/// `(delta(n, E), eps(n, E))` for the given tables.
pub fn correction_eval(tables: &CorrectionTables, n: usize, e: f64) -> (f64, f64) {
    tables.eval(n as f64, e)
}

fn series_from_terms(terms: &[PolynomialE], order: usize) -> PowerSeriesX {
    let mut coeffs = Vec::with_capacity(terms.len() + 1);
    coeffs.push(PolynomialE::zero());
    coeffs.extend(terms.iter().cloned());
    PowerSeriesX::from_coeffs(coeffs, order)
}

/// Substitutions shared by every residual evaluation at a given order.
struct Frame {
    order: usize,
    x: PowerSeriesX,
    x_plus: PowerSeriesX,
    x_minus: PowerSeriesX,
    log_plus: PowerSeriesX,
    log_minus: PowerSeriesX,
    root_plus: PowerSeriesX,
    root_minus: PowerSeriesX,
    half_e: PolynomialE,
    e: PolynomialE,
}

impl Frame {
    fn new(order: usize) -> Self {
        let x = PowerSeriesX::x(order);
        let neg_x = x.neg();
        let geom = |s: &PowerSeriesX| s.compose_elementary(Elementary::Geom).expect("x has no constant term");
        let x_plus = geom(&x);
        let x_minus = geom(&neg_x).neg();
        let log_plus = x.compose_elementary(Elementary::Log1p).expect("valuation 1");
        let log_minus = neg_x.compose_elementary(Elementary::Log1p).expect("valuation 1").neg();
        let root_plus = x.compose_elementary(Elementary::Sqrt1p).expect("valuation 1");
        let root_minus = neg_x.compose_elementary(Elementary::InvSqrt1p).expect("valuation 1");
        Frame {
            order,
            x,
            x_plus,
            x_minus,
            log_plus,
            log_minus,
            root_plus,
            root_minus,
            half_e: PolynomialE::e().scale(&rat(1, 2)),
            e: PolynomialE::e(),
        }
    }

    fn residuals(&self, delta: &[PolynomialE], epsilon: &[PolynomialE]) -> Result<(PowerSeriesX, PowerSeriesX)> {
        let w = self.order;
        let one = PowerSeriesX::one(w);
        let d = series_from_terms(delta, w);
        let eps = series_from_terms(epsilon, w);

        let d_plus = d.substitute(&self.x_plus)?;
        let d_minus = d.substitute(&self.x_minus)?;
        let eps_plus = eps.substitute(&self.x_plus)?;
        let eps_minus = eps.substitute(&self.x_minus)?;

        let alpha = self.log_plus.scale(&self.half_e).add(&eps_plus)?.sub(&eps)?;
        let alpha_prime = self.log_minus.scale(&self.half_e).add(&eps)?.sub(&eps_minus)?;

        let amp_plus = self.root_plus.mul(&one.add(&d_plus)?)?;
        let amp_minus = self.root_minus.mul(&one.add(&d_minus)?)?;
        let centre = self.x.scale(&self.e).mul(&one.add(&d)?)?;

        let cos_cond = amp_plus
            .mul(&alpha.compose_elementary(Elementary::Sin)?)?
            .add(&amp_minus.mul(&alpha_prime.compose_elementary(Elementary::Sin)?)?)?
            .sub(&centre)?;
        let sin_cond = amp_plus
            .mul(&alpha.compose_elementary(Elementary::Cos)?)?
            .sub(&amp_minus.mul(&alpha_prime.compose_elementary(Elementary::Cos)?)?)?;
        Ok((cos_cond, sin_cond))
    }
}

/// The two bracket-condition series for arbitrary (possibly wrong)
/// correction terms, truncated at `order`.
pub fn bracket_residuals(
    delta: &[PolynomialE],
    epsilon: &[PolynomialE],
    order: usize,
) -> Result<(PowerSeriesX, PowerSeriesX)> {
    Frame::new(order).residuals(delta, epsilon)
}

/// Solves for `delta_1..delta_J`, `eps_1..eps_J` exactly.
pub fn derive_corrections(order: usize) -> Result<CorrectionTables> {
    if order == 0 {
        return Err(Error::ZeroOrder);
    }
    let frame = Frame::new(order + 2);
    let mut delta: Vec<PolynomialE> = Vec::with_capacity(order);
    let mut epsilon: Vec<PolynomialE> = Vec::with_capacity(order);

    for k in 1..=order {
        let p = k + 1;
        delta.push(PolynomialE::zero());
        epsilon.push(PolynomialE::zero());
        let (c1, c2) = frame.residuals(&delta, &epsilon)?;
        let r = [c1.coeff(p), c2.coeff(p)];

        // Columns of the Jacobian, probed with unit unknowns.
        let column = |set: &mut dyn FnMut(&mut Vec<PolynomialE>, &mut Vec<PolynomialE>)| -> Result<[Rational; 2]> {
            let mut d = delta.clone();
            let mut e = epsilon.clone();
            set(&mut d, &mut e);
            let (p1, p2) = frame.residuals(&d, &e)?;
            let mut out = [Rational::zero(), Rational::zero()];
            for (slot, (probe, base)) in out.iter_mut().zip([(p1.coeff(p), &r[0]), (p2.coeff(p), &r[1])]) {
                *slot = (&probe - base).as_constant().ok_or_else(|| Error::InconsistentSystem {
                    order: k,
                    reason: "coefficient of an unknown depends on E".into(),
                })?;
            }
            Ok(out)
        };
        let col_d = column(&mut |d, _| d[k - 1] = PolynomialE::one())?;
        let col_e = column(&mut |_, e| e[k - 1] = PolynomialE::one())?;

        // [col_d col_e] (delta_k, eps_k)^T = -r
        let det = &col_d[0] * &col_e[1] - &col_e[0] * &col_d[1];
        if det.is_zero() {
            return Err(Error::InconsistentSystem {
                order: k,
                reason: format!(
                    "singular 2x2 system [[{}, {}], [{}, {}]]",
                    col_d[0], col_e[0], col_d[1], col_e[1]
                ),
            });
        }
        let inv = det.recip();
        let d_k = (&r[1].scale(&col_e[0]) - &r[0].scale(&col_e[1])).scale(&inv);
        let e_k = (&r[0].scale(&col_d[1]) - &r[1].scale(&col_d[0])).scale(&inv);
        delta[k - 1] = d_k;
        epsilon[k - 1] = e_k;

        let (c1, c2) = frame.residuals(&delta, &epsilon)?;
        if !c1.coeff(p).is_zero() || !c2.coeff(p).is_zero() {
            return Err(Error::InconsistentSystem {
                order: k,
                reason: format!("residual survives the solve: {} / {}", c1.coeff(p), c2.coeff(p)),
            });
        }
    }
    CorrectionTables::new(delta, epsilon)
}

/// Both bracket-condition series for the given tables, through `x^(J+1)`.
///
/// For correctly derived tables every coefficient is the zero polynomial;
/// `x^(J+2)` would involve the next, unknown, terms and is not included.
pub fn residual_check(tables: &CorrectionTables) -> Result<(PowerSeriesX, PowerSeriesX)> {
    bracket_residuals(&tables.delta, &tables.epsilon, tables.order + 1)
}

/// The twelve correction polynomials through order six, as tabulated in
/// the literature, used as a fixed regression target.
pub fn reference_tables() -> CorrectionTables {
    let delta = vec![
        PolynomialE::from_ratios(&[(-1, 4)]),
        PolynomialE::from_ratios(&[(1, 32), (0, 1), (2, 32)]),
        PolynomialE::from_ratios(&[(5, 128), (0, 1), (-10, 128)]),
        PolynomialE::from_ratios(&[(-21, 2048), (0, 1), (-60, 2048), (0, 1), (20, 2048)]),
        PolynomialE::from_ratios(&[(-399, 8192), (0, 1), (1380, 8192), (0, 1), (-180, 8192)]),
        PolynomialE::from_ratios(&[
            (869, 65536),
            (0, 1),
            (2518, 65536),
            (0, 1),
            (-2540, 65536),
            (0, 1),
            (120, 65536),
        ]),
    ];
    let epsilon = vec![
        PolynomialE::from_ratios(&[(0, 1), (1, 4)]),
        PolynomialE::from_ratios(&[(0, 1), (5, 96), (0, 1), (-1, 96)]),
        PolynomialE::from_ratios(&[(0, 1), (-9, 96), (0, 1), (1, 96)]),
        PolynomialE::from_ratios(&[(0, 1), (-341, 15360), (0, 1), (490, 15360), (0, 1), (-9, 15360)]),
        PolynomialE::from_ratios(&[(0, 1), (375, 2560), (0, 1), (-190, 2560), (0, 1), (3, 2560)]),
        PolynomialE::from_ratios(&[
            (0, 1),
            (7615, 258048),
            (0, 1),
            (-22169, 258048),
            (0, 1),
            (2793, 258048),
            (0, 1),
            (-15, 258048),
        ]),
    ];
    CorrectionTables::new(delta, epsilon).expect("equal lengths")
}

/// Which series a polynomial belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Delta,
    Epsilon,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Delta => "delta",
            Family::Epsilon => "epsilon",
        })
    }
}

/// One polynomial of a table comparison.
#[derive(Debug, Clone)]
pub struct TermComparison {
    pub family: Family,
    pub index: usize,
    pub expected: PolynomialE,
    pub actual: Option<PolynomialE>,
}

impl TermComparison {
    pub fn passed(&self) -> bool {
        self.actual.as_ref() == Some(&self.expected)
    }

    /// Powers of `E` whose coefficients differ.
    pub fn mismatched_powers(&self) -> Vec<usize> {
        let Some(actual) = &self.actual else {
            return (0..=self.expected.degree().unwrap_or(0)).collect();
        };
        let top = actual.coeffs().len().max(self.expected.coeffs().len());
        (0..top).filter(|&k| actual.coeff(k) != self.expected.coeff(k)).collect()
    }
}

/// Term-by-term comparison of `actual` against every polynomial in `expected`.
pub fn compare_tables(actual: &CorrectionTables, expected: &CorrectionTables) -> Vec<TermComparison> {
    let mut out = Vec::with_capacity(2 * expected.order);
    for (family, exp, act) in [
        (Family::Delta, &expected.delta, &actual.delta),
        (Family::Epsilon, &expected.epsilon, &actual.epsilon),
    ] {
        for (j, e) in exp.iter().enumerate() {
            out.push(TermComparison {
                family,
                index: j + 1,
                expected: e.clone(),
                actual: act.get(j).cloned(),
            });
        }
    }
    out
}
