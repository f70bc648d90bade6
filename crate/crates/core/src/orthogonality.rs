//! Finite-N signatures of the continuum normalization
//! `<psi_E'|psi_E> = pi A(E)^2 delta(E - E')`.
//!
//! * the Christoffel-Darboux identity, exact at every truncation:
//!   `sum_{n<N} psi_n(E) psi_n(E') = N/(E-E') (psi_N(E) psi_{N-1}(E') - psi_N(E') psi_{N-1}(E))`
//! * the large-N kernel `A(E) A(E') sin((E'-E)/2 log N + phi(E') - phi(E)) / (E'-E)`
//! * logarithmic growth `(A(E)^2/2) log N` of the diagonal sum.

use crate::asymptotics::AsymptoticFit;
use crate::error::{Error, Result};
use crate::recursion::{Energy, PsiIter};

/// `sum_{n=0}^{N} psi_n(E) psi_n(E')` by direct summation.
pub fn truncated_inner(e: Energy, e_prime: Energy, last: usize) -> f64 {
    PsiIter::new(e)
        .zip(PsiIter::new(e_prime))
        .take(last + 1)
        .map(|(a, b)| a * b)
        .sum()
}

/// Right-hand side of the Christoffel-Darboux identity; equals
/// `truncated_inner(e, e_prime, N - 1)`.
pub fn cd_rhs(e: Energy, e_prime: Energy, big_n: usize) -> Result<f64> {
    if e == e_prime {
        return Err(Error::CoincidentEnergies(e.value()));
    }
    if big_n == 0 {
        return Err(Error::EmptyProduct);
    }
    let (prev, last) = last_pair(e, big_n);
    let (prev_p, last_p) = last_pair(e_prime, big_n);
    Ok(cd_from_pairs(e, e_prime, big_n, (prev, last), (prev_p, last_p)))
}

fn cd_from_pairs(e: Energy, e_prime: Energy, big_n: usize, at_e: (f64, f64), at_ep: (f64, f64)) -> f64 {
    big_n as f64 / (e.value() - e_prime.value()) * (at_e.1 * at_ep.0 - at_ep.1 * at_e.0)
}

/// `(psi_{N-1}, psi_N)` by forward recursion.
fn last_pair(e: Energy, big_n: usize) -> (f64, f64) {
    let mut it = PsiIter::new(e).skip(big_n - 1);
    (it.next().unwrap(), it.next().unwrap())
}

/// Large-N model of the truncated inner product built from two fits.
pub fn sinc_model(fit_e: &AsymptoticFit, fit_ep: &AsymptoticFit, big_n: usize) -> Result<f64> {
    let de = fit_ep.energy.value() - fit_e.energy.value();
    if de == 0.0 {
        return Err(Error::CoincidentEnergies(fit_e.energy.value()));
    }
    let arg = 0.5 * de * (big_n as f64).ln() + fit_ep.phi_est - fit_e.phi_est;
    Ok(fit_e.a_est * fit_ep.a_est * arg.sin() / de)
}

/// One row of a kernel scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub e: Energy,
    pub e_prime: Energy,
    pub big_n: usize,
    /// `sum_{n<N} psi_n(E) psi_n(E')`
    pub direct_sum: f64,
    /// Christoffel-Darboux right-hand side at `N`.
    pub cd_value: f64,
    pub sinc_model_value: Option<f64>,
}

/// Direct sum and CD value for each `N` in `truncations` (any order),
/// computed in a single pass up to the largest `N`.
pub fn kernel_samples(
    e: Energy,
    e_prime: Energy,
    truncations: &[usize],
    fits: Option<(&AsymptoticFit, &AsymptoticFit)>,
) -> Result<Vec<KernelSample>> {
    if e == e_prime {
        return Err(Error::CoincidentEnergies(e.value()));
    }
    if truncations.contains(&0) {
        return Err(Error::EmptyProduct);
    }
    let Some(&max_n) = truncations.iter().max() else {
        return Ok(Vec::new());
    };
    let a: Vec<f64> = PsiIter::new(e).take(max_n + 1).collect();
    let b: Vec<f64> = PsiIter::new(e_prime).take(max_n + 1).collect();
    let mut partial = Vec::with_capacity(max_n + 1);
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(&b) {
        partial.push(acc);
        acc += x * y;
    }
    // partial[N] = sum_{n<N}
    truncations
        .iter()
        .map(|&big_n| {
            let sinc_model_value = match fits {
                Some((fe, fep)) => Some(sinc_model(fe, fep, big_n)?),
                None => None,
            };
            Ok(KernelSample {
                e,
                e_prime,
                big_n,
                direct_sum: partial[big_n],
                cd_value: cd_from_pairs(e, e_prime, big_n, (a[big_n - 1], a[big_n]), (b[big_n - 1], b[big_n])),
                sinc_model_value,
            })
        })
        .collect()
}

pub const KERNEL_HEADER: &str = "E,E_prime,N,direct,cd,sinc_model";

pub fn kernel_csv(samples: &[KernelSample]) -> String {
    let mut out = String::from(KERNEL_HEADER);
    out.push('\n');
    for s in samples {
        let model = s.sinc_model_value.map_or_else(|| "NaN".to_string(), |v| format!("{v:?}"));
        out.push_str(&format!(
            "{:?},{:?},{},{:?},{:?},{}\n",
            s.e.value(),
            s.e_prime.value(),
            s.big_n,
            s.direct_sum,
            s.cd_value,
            model
        ));
    }
    out
}

/// Least-squares fit of the diagonal sum against `log N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub energy: Energy,
    pub truncations: Vec<usize>,
    pub sums: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// `sqrt(2 slope)`
    pub a_from_slope: f64,
    /// Largest absolute deviation from the fitted line.
    pub max_residual: f64,
}

impl SlopeFit {
    /// Fit residual relative to the spread of the fitted values.
    pub fn relative_residual(&self) -> f64 {
        let lo = self.sums.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.max_residual / (hi - lo)
    }
}

/// Fits `sum_{n<=N} psi_n(E)^2 = (A^2/2) log N + c` over `truncations`.
///
/// `truncations` must be strictly increasing, start at `N >= 10` and span
/// at least one decade.
pub fn delta_norm_slope(energy: Energy, truncations: &[usize]) -> Result<SlopeFit> {
    let ok = truncations.len() >= 2
        && truncations.windows(2).all(|w| w[0] < w[1])
        && truncations[0] >= 10
        && truncations[truncations.len() - 1] >= 10 * truncations[0];
    if !ok {
        return Err(Error::BadTruncationList);
    }
    let mut sums = Vec::with_capacity(truncations.len());
    let mut targets = truncations.iter().peekable();
    let mut acc = 0.0;
    for (n, psi) in PsiIter::new(energy).enumerate() {
        acc += psi * psi;
        if targets.peek() == Some(&&n) {
            sums.push(acc);
            targets.next();
            if targets.peek().is_none() {
                break;
            }
        }
    }
    let xs: Vec<f64> = truncations.iter().map(|&n| (n as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &sums);
    let max_residual = xs
        .iter()
        .zip(&sums)
        .map(|(x, y)| (y - (slope * x + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(SlopeFit {
        energy,
        truncations: truncations.to_vec(),
        sums,
        slope,
        intercept,
        a_from_slope: (2.0 * slope).sqrt(),
        max_residual,
    })
}

/// Ordinary least squares `y = slope x + intercept`.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Zero crossings of `N -> sum_{n<N} psi_n(E) psi_n(E')` for `N` in
/// `[n_from, n_to]`, located in `log N` by linear interpolation.
pub fn log_n_zero_crossings(e: Energy, e_prime: Energy, n_from: usize, n_to: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (n, (a, b)) in PsiIter::new(e).zip(PsiIter::new(e_prime)).enumerate().take(n_to) {
        acc += a * b;
        // acc now holds sum_{k <= n} = value at truncation N = n + 1
        let big_n = n + 1;
        if big_n < n_from {
            continue;
        }
        let x = (big_n as f64).ln();
        if let Some((px, py)) = prev {
            if (py < 0.0) != (acc < 0.0) && py != 0.0 {
                out.push(px + (x - px) * py / (py - acc));
            }
        }
        prev = Some((x, acc));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recursion::psi_sequence;

    fn en(e: f64) -> Energy {
        Energy::new(e).unwrap()
    }

    #[test]
    fn truncated_inner_hand_values() {
        assert_eq!(truncated_inner(en(1.0), en(0.0), 1), 1.0);
        assert_eq!(truncated_inner(en(2.0), en(0.0), 2), 0.25);
        assert_eq!(truncated_inner(en(0.4), en(0.4), 0), 1.0);
    }

    #[test]
    fn cd_hand_values() {
        assert_eq!(cd_rhs(en(1.0), en(0.0), 2).unwrap(), 1.0);
        assert!((cd_rhs(en(2.0), en(0.0), 3).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(cd_rhs(en(1.0), en(1.0), 5), Err(Error::CoincidentEnergies(1.0)));
    }

    #[test]
    fn symmetry_is_exact() {
        for &(a, b, n) in &[(0.3, -1.7, 500usize), (4.0, 2.5, 77)] {
            assert_eq!(truncated_inner(en(a), en(b), n), truncated_inner(en(b), en(a), n));
            assert_eq!(cd_rhs(en(a), en(b), n).unwrap(), cd_rhs(en(b), en(a), n).unwrap());
        }
    }

    #[test]
    fn kernel_rows_match_scalar_functions() {
        let ns = [5usize, 1, 300, 40];
        let rows = kernel_samples(en(0.5), en(-1.25), &ns, None).unwrap();
        for (row, &n) in rows.iter().zip(&ns) {
            assert_eq!(row.big_n, n);
            assert_eq!(row.direct_sum, truncated_inner(en(0.5), en(-1.25), n - 1));
            assert_eq!(row.cd_value, cd_rhs(en(0.5), en(-1.25), n).unwrap());
            assert!(row.sinc_model_value.is_none());
        }
        assert!(kernel_samples(en(1.0), en(1.0), &ns, None).is_err());
        assert!(kernel_samples(en(1.0), en(2.0), &[0], None).is_err());
        let csv = kernel_csv(&rows);
        assert!(csv.starts_with("E,E_prime,N,direct,cd,sinc_model\n0.5,-1.25,5,"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",NaN"));
    }

    #[test]
    fn slope_preconditions() {
        assert_eq!(delta_norm_slope(en(0.0), &[10]), Err(Error::BadTruncationList));
        assert!(delta_norm_slope(en(0.0), &[100, 50, 1000]).is_err());
        assert!(delta_norm_slope(en(0.0), &[100, 500]).is_err());
        assert!(delta_norm_slope(en(0.0), &[100, 1000]).is_ok());
    }

    #[test]
    fn slope_sums_are_prefix_sums() {
        let fit = delta_norm_slope(en(0.8), &[10, 20, 100]).unwrap();
        let psi = psi_sequence(en(0.8), 100);
        for (&n, &s) in fit.truncations.iter().zip(&fit.sums) {
            let want: f64 = psi.values()[..=n].iter().map(|p| p * p).sum();
            assert!((s - want).abs() < 1e-13 * want);
        }
    }

    #[test]
    fn least_squares_exact_line() {
        let (m, c) = least_squares(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((m - 2.0).abs() < 1e-15 && (c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn crossings_are_increasing() {
        let z = log_n_zero_crossings(en(-4.0), en(6.0), 1000, 10_000);
        assert!(z.len() >= 3, "{z:?}");
        assert!(z.windows(2).all(|w| w[0] < w[1]));
        assert!(z[0] >= 1000f64.ln() && *z.last().unwrap() <= 10_000f64.ln());
    }
}
