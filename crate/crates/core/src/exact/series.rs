use std::fmt;

use num_traits::{One, Zero};

use super::poly::PolynomialE;
use super::rational::{int, Rational};
use crate::error::{Error, Result};

/// Truncated power series in `x = 1/n` whose coefficients are polynomials
/// in `E`. Every value carries its truncation order `J`: terms `x^k` with
/// `k > J` are dropped, and binary operations require equal orders.
#[derive(Clone, PartialEq, Eq)]
pub struct PowerSeriesX {
    order: usize,
    coeffs: Vec<PolynomialE>,
}

/// Elementary functions available for composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elementary {
    Sin,
    Cos,
    /// `log(1 + s)`
    Log1p,
    /// `(1 + s)^(1/2)`
    Sqrt1p,
    /// `(1 + s)^(-1/2)`
    InvSqrt1p,
    /// `s / (1 + s)`
    Geom,
}

impl Elementary {
    fn name(self) -> &'static str {
        match self {
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Log1p => "log1p",
            Elementary::Sqrt1p => "sqrt1p",
            Elementary::InvSqrt1p => "inv_sqrt1p",
            Elementary::Geom => "geom",
        }
    }

    /// Taylor coefficients about 0 up to `t^order`.
    pub fn taylor(self, order: usize) -> Vec<Rational> {
        let mut out = Vec::with_capacity(order + 1);
        match self {
            Elementary::Sin | Elementary::Cos => {
                let parity = usize::from(self == Elementary::Sin);
                let mut fact = Rational::one();
                for k in 0..=order {
                    if k > 0 {
                        fact *= int(k as i64);
                    }
                    if k % 2 == parity {
                        let sign = if (k / 2) % 2 == 0 { 1 } else { -1 };
                        out.push(int(sign) / &fact);
                    } else {
                        out.push(Rational::zero());
                    }
                }
            }
            Elementary::Log1p => {
                out.push(Rational::zero());
                for k in 1..=order {
                    let sign = if k % 2 == 1 { 1 } else { -1 };
                    out.push(Rational::new(sign.into(), (k as i64).into()));
                }
            }
            Elementary::Sqrt1p | Elementary::InvSqrt1p => {
                let a = if self == Elementary::Sqrt1p {
                    Rational::new(1.into(), 2.into())
                } else {
                    Rational::new((-1).into(), 2.into())
                };
                // binomial(a, k)
                let mut c = Rational::one();
                for k in 0..=order {
                    if k > 0 {
                        c = c * (&a - int(k as i64 - 1)) / int(k as i64);
                    }
                    out.push(c.clone());
                }
            }
            Elementary::Geom => {
                out.push(Rational::zero());
                for k in 1..=order {
                    out.push(int(if k % 2 == 1 { 1 } else { -1 }));
                }
            }
        }
        out
    }
}

impl PowerSeriesX {
    pub fn zero(order: usize) -> Self {
        PowerSeriesX {
            order,
            coeffs: Vec::new(),
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(PolynomialE::one(), order)
    }

    pub fn constant(c: PolynomialE, order: usize) -> Self {
        Self::from_coeffs(vec![c], order)
    }

    /// The expansion variable `x` itself.
    pub fn x(order: usize) -> Self {
        Self::monomial(PolynomialE::one(), 1, order)
    }

    /// `c x^k`
    pub fn monomial(c: PolynomialE, k: usize, order: usize) -> Self {
        let mut coeffs = vec![PolynomialE::zero(); k + 1];
        coeffs[k] = c;
        Self::from_coeffs(coeffs, order)
    }

    /// Builds a series, dropping terms beyond `order` and trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<PolynomialE>, order: usize) -> Self {
        coeffs.truncate(order + 1);
        while coeffs.last().is_some_and(PolynomialE::is_zero) {
            coeffs.pop();
        }
        PowerSeriesX { order, coeffs }
    }

    /// Series with rational (E-independent) coefficients.
    pub fn from_rationals(coeffs: Vec<Rational>, order: usize) -> Self {
        Self::from_coeffs(coeffs.into_iter().map(PolynomialE::constant).collect(), order)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[PolynomialE] {
        &self.coeffs
    }

    /// Coefficient of `x^k`.
    pub fn coeff(&self, k: usize) -> PolynomialE {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest power with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Re-truncates (or widens) to a new order. Widening does not invent
    /// information: the dropped terms are simply absent.
    pub fn with_order(&self, order: usize) -> Self {
        Self::from_coeffs(self.coeffs.clone(), order)
    }

    fn check(&self, rhs: &Self) -> Result<()> {
        if self.order != rhs.order {
            Err(Error::OrderMismatch(self.order, rhs.order))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len)
            .map(|k| match (self.coeffs.get(k), rhs.coeffs.get(k)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) | (None, Some(a)) => a.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Ok(Self::from_coeffs(coeffs, self.order))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        PowerSeriesX {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs)?;
        if self.is_zero() || rhs.is_zero() {
            return Ok(Self::zero(self.order));
        }
        let len = (self.coeffs.len() + rhs.coeffs.len() - 1).min(self.order + 1);
        let mut out = vec![PolynomialE::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(len.saturating_sub(i)) {
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        Ok(Self::from_coeffs(out, self.order))
    }

    /// Multiplies every coefficient by a polynomial in `E`.
    pub fn scale(&self, c: &PolynomialE) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect(), self.order)
    }

    pub fn scale_rational(&self, c: &Rational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a.scale(c)).collect(), self.order)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::one(self.order);
        for _ in 0..k {
            out = out.mul(self).expect("same order");
        }
        out
    }

    /// `sum_k c_k s^k` for rational `c_k`, by Horner. `s` must have zero
    /// constant term unless `coeffs` is a polynomial (finite), which it
    /// always is here; the check is left to callers that need formal
    /// well-definedness.
    fn horner_rational(coeffs: &[Rational], s: &Self) -> Self {
        let mut acc = Self::zero(s.order);
        for c in coeffs.iter().rev() {
            acc = acc
                .mul(s)
                .expect("same order")
                .add(&Self::constant(PolynomialE::constant(c.clone()), s.order))
                .expect("same order");
        }
        acc
    }

    /// `f(s)` for an elementary `f`, truncated at `s`'s order. `s` must have
    /// zero constant term.
    pub fn compose_elementary(&self, kind: Elementary) -> Result<Self> {
        if !self.coeff(0).is_zero() {
            return Err(Error::NonzeroConstantTerm(kind.name()));
        }
        Ok(Self::horner_rational(&kind.taylor(self.order), self))
    }

    /// `self(inner)`: substitutes a series with zero constant term for `x`.
    pub fn substitute(&self, inner: &Self) -> Result<Self> {
        self.check(inner)?;
        if !inner.coeff(0).is_zero() {
            return Err(Error::NonzeroConstantTerm("substitute"));
        }
        let mut acc = Self::zero(self.order);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(inner)?.add(&Self::constant(c.clone(), self.order))?;
        }
        Ok(acc)
    }

    /// Floating-point partial sum at `x` and `E`.
    pub fn eval(&self, x: f64, e: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.eval(e))
    }
}

impl fmt::Display for PowerSeriesX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if any {
                write!(f, " + ")?;
            }
            any = true;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*x")?,
                _ => write!(f, "({c})*x^{k}")?,
            }
        }
        if any {
            write!(f, " + ")?;
        }
        write!(f, "O(x^{})", self.order + 1)
    }
}

impl fmt::Debug for PowerSeriesX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PowerSeriesX[{self}]")
    }
}
