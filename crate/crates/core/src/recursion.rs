//! Floating-point solution of the three-term recurrence
//!
//! ```text
//! (n+1) psi[n+1] + n psi[n-1] = E psi[n],    psi[0] = 1
//! ```
//!
//! computed two ways: directly by forward recursion, and as the row vector
//! `(0, 1) L_1 L_2 ... L_N` of 2x2 transfer matrices. Both fundamental
//! solutions decay like `n^{-1/2}`, so the forward direction is stable and
//! plain `f64` is enough.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Spectral parameter of the eigenvalue problem. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Energy(f64);

impl Energy {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Energy(value))
        } else {
            Err(Error::NonFiniteEnergy(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Energy {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Energy::new(value)
    }
}

impl std::ops::Neg for Energy {
    type Output = Energy;

    fn neg(self) -> Energy {
        Energy(-self.0)
    }
}

impl std::fmt::Display for Energy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// How a [`WaveSequence`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Recursion,
    TransferProduct,
}

/// Prefix `(psi_0, ..., psi_N)` of the eigenvector at a fixed energy.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSequence {
    energy: Energy,
    values: Vec<f64>,
    method: Method,
}

impl WaveSequence {
    pub fn energy(&self) -> Energy {
        self.energy
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Largest index `N` held by the sequence.
    pub fn last_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Iterator over `psi_0, psi_1, ...` produced lazily by forward recursion.
///
/// Never terminates on its own; pair with `take`.
#[derive(Debug, Clone)]
pub struct PsiIter {
    energy: f64,
    n: usize,
    prev: f64,
    cur: f64,
}

impl PsiIter {
    pub fn new(energy: Energy) -> Self {
        PsiIter {
            energy: energy.value(),
            n: 0,
            prev: 0.0,
            cur: 1.0,
        }
    }
}

impl Iterator for PsiIter {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        let out = self.cur;
        let n = self.n as f64;
        let next = (self.energy * self.cur - n * self.prev) / (n + 1.0);
        self.prev = self.cur;
        self.cur = next;
        self.n += 1;
        Some(out)
    }
}

/// `(psi_0, ..., psi_N)` by forward recursion.
pub fn psi_sequence(energy: Energy, last: usize) -> WaveSequence {
    let values: Vec<f64> = PsiIter::new(energy).take(last + 1).collect();
    WaveSequence {
        energy,
        values,
        method: Method::Recursion,
    }
}

/// Same as [`psi_sequence`] but validates a raw `f64` first.
pub fn psi_sequence_checked(energy: f64, last: usize) -> Result<WaveSequence> {
    Ok(psi_sequence(Energy::new(energy)?, last))
}

/// Index of a transfer matrix: a finite `n >= 1`, or the `n -> infinity` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepIndex {
    Finite(usize),
    Infinite,
}

/// The 2x2 matrix `L_n = [[0, -1 + 1/n], [1, E/n]]` carrying
/// `(psi_{n-2}, psi_{n-1})` to `(psi_{n-1}, psi_n)` by right multiplication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub entries: [[f64; 2]; 2],
    pub index: StepIndex,
}

impl TransferMatrix {
    pub fn determinant(&self) -> f64 {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn mul(&self, rhs: &TransferMatrix) -> [[f64; 2]; 2] {
        mat_mul(&self.entries, &rhs.entries)
    }

    /// Row vector times this matrix.
    #[inline]
    pub fn apply_row(&self, row: [f64; 2]) -> [f64; 2] {
        let m = &self.entries;
        [
            row[0] * m[0][0] + row[1] * m[1][0],
            row[0] * m[0][1] + row[1] * m[1][1],
        ]
    }
}

pub fn mat_mul(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// `L_n` for finite `n >= 1`.
pub fn transfer_step(n: usize, energy: Energy) -> Result<TransferMatrix> {
    if n == 0 {
        return Err(Error::ZeroStepIndex);
    }
    let nf = n as f64;
    Ok(TransferMatrix {
        entries: [[0.0, -1.0 + 1.0 / nf], [1.0, energy.value() / nf]],
        index: StepIndex::Finite(n),
    })
}

/// `L_n` at an arbitrary index, including the limit `[[0, -1], [1, 0]]`.
pub fn transfer_step_at(index: StepIndex, energy: Energy) -> Result<TransferMatrix> {
    match index {
        StepIndex::Finite(n) => transfer_step(n, energy),
        StepIndex::Infinite => Ok(TransferMatrix {
            entries: [[0.0, -1.0], [1.0, 0.0]],
            index: StepIndex::Infinite,
        }),
    }
}

/// `(0, 1) L_1 L_2 ... L_N = (psi_{N-1}, psi_N)`.
///
/// Evaluated left to right on the row vector; the full matrix product is
/// never formed.
pub fn transfer_product(energy: Energy, last: usize) -> Result<(f64, f64)> {
    if last == 0 {
        return Err(Error::EmptyProduct);
    }
    let e = energy.value();
    let mut row = [0.0_f64, 1.0_f64];
    for n in 1..=last {
        let nf = n as f64;
        // inline of transfer_step(n).apply_row(row)
        row = [row[1], row[0] * (-1.0 + 1.0 / nf) + row[1] * (e / nf)];
    }
    Ok((row[0], row[1]))
}

/// The pair `(psi_{N-1}, psi_N)` for every `N` in `1..=last`, as a
/// transfer-product [`WaveSequence`].
pub fn transfer_sequence(energy: Energy, last: usize) -> WaveSequence {
    let e = energy.value();
    let mut values = Vec::with_capacity(last + 1);
    values.push(1.0);
    let mut row = [0.0_f64, 1.0_f64];
    for n in 1..=last {
        let nf = n as f64;
        row = [row[1], row[0] * (-1.0 + 1.0 / nf) + row[1] * (e / nf)];
        values.push(row[1]);
    }
    WaveSequence {
        energy,
        values,
        method: Method::TransferProduct,
    }
}

/// Complex-conjugate eigenvalues of `L_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub lambda: Complex64,
    pub lambda_conj: Complex64,
    pub index: usize,
}

/// Eigenvalues `lambda = E/(2n) + i sqrt(1 - 1/n - E^2/(4n^2))` and its
/// conjugate.
///
/// `L_1` is singular and is rejected. When the discriminant is negative
/// (small `n`, large `|E|`) the eigenvalues are real and distinct; that
/// regime is reported as an error.
pub fn diagonalize_step(n: usize, energy: Energy) -> Result<EigenPair> {
    if n < 2 {
        return Err(Error::SingularStep(n));
    }
    let nf = n as f64;
    let e = energy.value();
    let half_trace = e / (2.0 * nf);
    let disc = 1.0 - 1.0 / nf - half_trace * half_trace;
    if disc < 0.0 {
        return Err(Error::RealEigenvalues {
            n,
            energy: e,
            discriminant: disc,
        });
    }
    let lambda = Complex64::new(half_trace, disc.sqrt());
    Ok(EigenPair {
        lambda,
        lambda_conj: lambda.conj(),
        index: n,
    })
}
