use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::rational::{format_rational, int, parse_rational, rat, to_f64, Rational};
use crate::error::Result;

/// Polynomial in `E` with exact rational coefficients, stored densely by
/// power. Trailing zeros are always trimmed, so equality is structural.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PolynomialE {
    coeffs: Vec<Rational>,
}

impl PolynomialE {
    pub fn zero() -> Self {
        PolynomialE { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `c E^k`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = c;
        Self::from_coeffs(coeffs)
    }

    /// `E` itself.
    pub fn e() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        PolynomialE { coeffs }
    }

    /// Convenience constructor from `(numerator, denominator)` pairs.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Self {
        Self::from_coeffs(pairs.iter().map(|&(p, q)| rat(p, q)).collect())
    }

    pub fn parse_coeffs<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        let coeffs = items
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_coeffs(coeffs))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `E^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Constant polynomial's value, if it is one.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.coeffs.len() {
            0 => Some(Rational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(Zero::is_zero)
    }

    pub fn is_odd(&self) -> bool {
        self.coeffs.iter().step_by(2).all(Zero::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Horner evaluation in `f64`.
    pub fn eval(&self, e: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * e + to_f64(c))
    }

    /// Horner evaluation with pre-converted coefficients; see [`Self::to_f64_coeffs`].
    pub fn eval_f64_coeffs(coeffs: &[f64], e: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| acc * e + c)
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(to_f64).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(format_rational).collect()
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..len)
            .map(|k| match (self.coeffs.get(k), rhs.coeffs.get(k)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) | (None, Some(a)) => a.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Self::from_coeffs(coeffs)
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self::from_coeffs(out)
    }
}

/// Exact `psi_n(E)`: degree `n`, parity `(-1)^n`, leading coefficient `1/n!`.
pub fn psi_polynomial(n: usize) -> PolynomialE {
    psi_polynomials(n).pop().expect("at least psi_0")
}

/// `[psi_0, ..., psi_n]` as exact polynomials.
pub fn psi_polynomials(n: usize) -> Vec<PolynomialE> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(PolynomialE::one());
    if n == 0 {
        return out;
    }
    out.push(PolynomialE::e());
    let e = PolynomialE::e();
    for k in 1..n {
        // psi_{k+1} = (E psi_k - k psi_{k-1}) / (k+1)
        let next = (&(&e * &out[k]) - &out[k - 1].scale(&int(k as i64)))
            .scale(&rat(1, k as i64 + 1));
        out.push(next);
    }
    out
}

impl Add for &PolynomialE {
    type Output = PolynomialE;
    fn add(self, rhs: Self) -> PolynomialE {
        self.add_ref(rhs)
    }
}

impl Add for PolynomialE {
    type Output = PolynomialE;
    fn add(self, rhs: Self) -> PolynomialE {
        self.add_ref(&rhs)
    }
}

impl Neg for &PolynomialE {
    type Output = PolynomialE;
    fn neg(self) -> PolynomialE {
        PolynomialE {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Neg for PolynomialE {
    type Output = PolynomialE;
    fn neg(self) -> PolynomialE {
        -&self
    }
}

impl Sub for &PolynomialE {
    type Output = PolynomialE;
    fn sub(self, rhs: Self) -> PolynomialE {
        self.add_ref(&-rhs)
    }
}

impl Sub for PolynomialE {
    type Output = PolynomialE;
    fn sub(self, rhs: Self) -> PolynomialE {
        &self - &rhs
    }
}

impl Mul for &PolynomialE {
    type Output = PolynomialE;
    fn mul(self, rhs: Self) -> PolynomialE {
        self.mul_ref(rhs)
    }
}

impl Mul for PolynomialE {
    type Output = PolynomialE;
    fn mul(self, rhs: Self) -> PolynomialE {
        self.mul_ref(&rhs)
    }
}

impl fmt::Display for PolynomialE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = k == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{}", format_rational(&mag))?;
            }
            match k {
                0 => {}
                1 if show_coeff => write!(f, "*E")?,
                1 => write!(f, "E")?,
                _ if show_coeff => write!(f, "*E^{k}")?,
                _ => write!(f, "E^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for PolynomialE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolynomialE({self})")
    }
}

impl serde::Serialize for PolynomialE {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.coeffs.iter().map(format_rational))
    }
}

impl<'de> serde::Deserialize<'de> for PolynomialE {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        // Accept strings or bare integers, so `[0, "1/4"]` parses.
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Item {
            Text(String),
            Int(i64),
        }
        let items = Vec::<Item>::deserialize(d)?;
        let coeffs = items
            .into_iter()
            .map(|it| match it {
                Item::Text(s) => parse_rational(&s),
                Item::Int(i) => Ok(int(i)),
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(Self::from_coeffs(coeffs))
    }
}
