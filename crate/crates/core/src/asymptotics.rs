//! Amplitude/phase extraction from computed `psi_n(E)`.
//!
//! For large `n`,
//!
//! ```text
//! psi_n(E) = A_n(E)/sqrt(n) cos(Phi_n),    Phi_n = (E/2) log n - pi n/2 + phi_n(E)
//! ```
//!
//! Consecutive samples `(psi_n, psi_{n+1})` fix `A_n` and `Phi_n` pointwise
//! given the phase advance `alpha_n`. Dividing out the correction series
//! `1 + delta(n, E)` and subtracting `eps(n, E)` leaves sequences that
//! are constant up to `O(n^{-(J+1)})`; their window means estimate `A(E)`
//! and `phi(E)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;

use crate::bootstrap::{CorrectionEvaluator, CorrectionTables};
use crate::error::{Error, Result};
use crate::recursion::{Energy, PsiIter};

/// Default extraction window `[10^3, 10^4]`.
pub const DEFAULT_WINDOW: Window = Window {
    n_min: 1_000,
    n_max: 10_000,
};

/// Default correction order.
pub const DEFAULT_ORDER: usize = 6;

/// Inclusive index range `[n_min, n_max]` used for a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub n_min: usize,
    pub n_max: usize,
}

impl Window {
    pub fn new(n_min: usize, n_max: usize) -> Result<Self> {
        if n_min == 0 || n_max <= n_min {
            return Err(Error::InvalidWindow(n_min, n_max));
        }
        Ok(Window { n_min, n_max })
    }

    pub fn len(&self) -> usize {
        self.n_max - self.n_min + 1
    }

    pub fn is_empty(&self) -> bool {
        self.n_max < self.n_min
    }
}

/// Solves `u_n = A cos(Phi)`, `u_{n+1} = A sin(Phi + alpha)` for `A > 0`,
/// `Phi` in `(-pi, pi]`.
pub fn local_amplitude_phase(u_n: f64, u_np1: f64, alpha: f64) -> Result<(f64, f64)> {
    if u_n == 0.0 && u_np1 == 0.0 {
        return Err(Error::DegenerateSample);
    }
    let (s, c) = alpha.sin_cos();
    if c.abs() < 0.1 {
        return Err(Error::SingularAlpha(c));
    }
    let a_sin = (u_np1 - u_n * s) / c;
    let amp = u_n.hypot(a_sin);
    let phase = a_sin.atan2(u_n);
    // atan2 yields [-pi, pi]; fold -pi onto pi
    let phase = if phase == -PI { PI } else { phase };
    Ok((amp, phase))
}

/// `x` reduced into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x - TAU * (x / TAU).round();
    if r <= -PI {
        r + TAU
    } else if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `pi n / 2` reduced mod `2 pi`, exact in the quadrant.
fn quarter_turns(n: usize) -> f64 {
    FRAC_PI_2 * (n % 4) as f64
}

/// Converts raw phases `Phi_n` to `phi_n = Phi_n - (E/2) log n + pi n/2`
/// and removes `2 pi` jumps so that consecutive values differ by as little
/// as possible. The first point is mapped into `(-pi, pi]`.
pub fn phase_unwrap(raw: &[(usize, f64)], energy: Energy) -> Result<Vec<(usize, f64)>> {
    if raw.len() < 2 {
        return Err(Error::WindowTooShort {
            needed: 2,
            got: raw.len(),
        });
    }
    for w in raw.windows(2) {
        if w[1].0 != w[0].0 + 1 {
            return Err(Error::NonConsecutive(w[1].0, w[0].0));
        }
    }
    let half_e = 0.5 * energy.value();
    let mut out = Vec::with_capacity(raw.len());
    let mut prev: Option<f64> = None;
    for &(n, big_phi) in raw {
        let local = wrap_phase(big_phi - half_e * (n as f64).ln() + quarter_turns(n));
        let value = match prev {
            None => local,
            Some(p) => local + TAU * ((p - local) / TAU).round(),
        };
        out.push((n, value));
        prev = Some(value);
    }
    Ok(out)
}

/// Result of fitting the asymptotic form over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticFit {
    pub energy: Energy,
    pub window: Window,
    pub order: usize,
    /// `A_n` for `n` in the window.
    pub amplitudes: Vec<f64>,
    /// Unwrapped `phi_n` for `n` in the window.
    pub phases: Vec<f64>,
    /// `A(E)`
    pub a_est: f64,
    /// `phi(E)` in `(-pi, pi]`
    pub phi_est: f64,
    /// Largest relative deviation of `A_n / (1 + delta)` from `a_est`.
    pub amplitude_spread: f64,
    /// Largest deviation of `phi_n - eps` from the (unwrapped) mean.
    pub phase_spread: f64,
    /// `max(amplitude_spread, phase_spread)`
    pub residual: f64,
    stripped_amplitudes: Vec<f64>,
}

impl AsymptoticFit {
    /// `A_n / (1 + delta(n, E))` over the window.
    pub fn stripped_amplitudes(&self) -> &[f64] {
        &self.stripped_amplitudes
    }

    /// Sample standard deviation of the stripped amplitudes.
    pub fn amplitude_stdev(&self) -> f64 {
        let v = &self.stripped_amplitudes;
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        var.sqrt()
    }

    /// Evaluates the fitted asymptotic form at `n`, including corrections.
    pub fn model_psi(&self, tables: &CorrectionTables, n: usize) -> f64 {
        let ev = tables.evaluator(self.energy.value());
        let (d, e) = ev.at(n as f64);
        let nf = n as f64;
        let phase = 0.5 * self.energy.value() * nf.ln() - quarter_turns(n) + self.phi_est + e;
        self.a_est * (1.0 + d) / nf.sqrt() * phase.cos()
    }
}

/// Fits `A(E)` and `phi(E)` over `window` using `tables` to strip the
/// `1/n` corrections. Empty tables fall back to the leading phase advance.
pub fn extract_constants(energy: Energy, window: Window, tables: &CorrectionTables) -> Result<AsymptoticFit> {
    if window.n_min == 0 || window.n_max <= window.n_min {
        return Err(Error::InvalidWindow(window.n_min, window.n_max));
    }
    let e = energy.value();
    let ev: CorrectionEvaluator = tables.evaluator(e);

    let psi: Vec<f64> = PsiIter::new(energy)
        .skip(window.n_min)
        .take(window.len() + 1)
        .collect();

    let mut amplitudes = Vec::with_capacity(window.len());
    let mut raw = Vec::with_capacity(window.len());
    for (i, pair) in psi.windows(2).enumerate() {
        let n = window.n_min + i;
        let nf = n as f64;
        let u_n = nf.sqrt() * pair[0];
        // remove the drift of A between n and n+1 so the 2x2 solve is exact
        let u_np1 = (nf + 1.0).sqrt() * pair[1] / ev.amplitude_ratio(nf);
        let (amp, big_phi) = local_amplitude_phase(u_n, u_np1, ev.alpha(nf))?;
        amplitudes.push(amp);
        raw.push((n, big_phi));
    }
    let phases: Vec<f64> = phase_unwrap(&raw, energy)?.into_iter().map(|(_, p)| p).collect();

    let (stripped_a, stripped_phi): (Vec<f64>, Vec<f64>) = amplitudes
        .iter()
        .zip(&phases)
        .enumerate()
        .map(|(i, (a, p))| {
            let (d, eps) = ev.at((window.n_min + i) as f64);
            (a / (1.0 + d), p - eps)
        })
        .unzip();

    let count = stripped_a.len() as f64;
    let a_est = stripped_a.iter().sum::<f64>() / count;
    let phi_mean = stripped_phi.iter().sum::<f64>() / count;
    let amplitude_spread = stripped_a
        .iter()
        .map(|a| ((a - a_est) / a_est).abs())
        .fold(0.0, f64::max);
    let phase_spread = stripped_phi
        .iter()
        .map(|p| (p - phi_mean).abs())
        .fold(0.0, f64::max);

    Ok(AsymptoticFit {
        energy,
        window,
        order: tables.order(),
        amplitudes,
        phases,
        a_est,
        phi_est: wrap_phase(phi_mean),
        amplitude_spread,
        phase_spread,
        residual: amplitude_spread.max(phase_spread),
        stripped_amplitudes: stripped_a,
    })
}

/// One grid point of a spectral scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub energy: f64,
    pub outcome: std::result::Result<ScanValues, Error>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanValues {
    pub a: f64,
    pub phi: f64,
    pub residual: f64,
}

/// `A(E)`, `phi(E)` on every grid point. Points are independent and are
/// evaluated on up to `jobs` threads (`0` lets rayon decide); rows come back
/// in grid order and a failing point does not stop the scan.
pub fn spectral_scan(grid: &[f64], window: Window, tables: &CorrectionTables, jobs: usize) -> Vec<ScanRow> {
    let run = |e: &f64| ScanRow {
        energy: *e,
        outcome: Energy::new(*e)
            .and_then(|en| extract_constants(en, window, tables))
            .map(|fit| ScanValues {
                a: fit.a_est,
                phi: fit.phi_est,
                residual: fit.residual,
            }),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build();
    match pool {
        Ok(pool) => pool.install(|| grid.par_iter().map(run).collect()),
        Err(_) => grid.iter().map(run).collect(),
    }
}

pub const SCAN_HEADER: &str = "E,A,phi,residual,n_min,n_max,J";

/// CSV rendering of a scan; failed points carry `NaN` in the value columns.
pub fn scan_csv(rows: &[ScanRow], window: Window, order: usize) -> String {
    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    for row in rows {
        let (a, phi, res) = match &row.outcome {
            Ok(v) => (v.a, v.phi, v.residual),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        };
        out.push_str(&format!(
            "{:?},{:?},{:?},{:?},{},{},{}\n",
            row.energy, a, phi, res, window.n_min, window.n_max, order
        ));
    }
    out
}

/// Evenly spaced grid with `steps` points from `lo` to `hi` inclusive.
/// Symmetric ranges produce exactly negated pairs.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let last = (steps - 1) as f64;
            (0..steps)
                .map(|i| {
                    // signed offset from the centre, so lo = -hi grids are sign-exact
                    let k = 2.0 * i as f64 - last;
                    0.5 * (lo + hi) + 0.5 * (hi - lo) * (k / last)
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bootstrap::reference_tables;

    fn en(e: f64) -> Energy {
        Energy::new(e).unwrap()
    }

    #[test]
    fn pointwise_solve() {
        let (a, p) = local_amplitude_phase(2.5, 0.0, 0.0).unwrap();
        assert_eq!((a, p), (2.5, 0.0));
        let (a, p) = local_amplitude_phase(0.0, 2.5, 0.0).unwrap();
        assert_eq!(a, 2.5);
        assert!((p - FRAC_PI_2).abs() < 1e-15);
        let (a, p) = local_amplitude_phase(3.0, 4.0, 0.0).unwrap();
        assert!((a - 5.0).abs() < 1e-15);
        assert!((p - 4f64.atan2(3.0)).abs() < 1e-15);
        assert_eq!(local_amplitude_phase(0.0, 0.0, 0.1), Err(Error::DegenerateSample));
        assert!(matches!(local_amplitude_phase(1.0, 1.0, FRAC_PI_2), Err(Error::SingularAlpha(_))));
    }

    #[test]
    fn pointwise_solve_inverts_model() {
        for &(amp, phi, alpha) in &[(1.3, 2.0, 0.01), (0.7, -3.0, -0.2), (2.0, 0.4, 0.0)] {
            let u_n = amp * f64::cos(phi);
            let u_np1 = amp * f64::sin(phi + alpha);
            let (a, p) = local_amplitude_phase(u_n, u_np1, alpha).unwrap();
            assert!((a - amp).abs() < 1e-14);
            assert!((wrap_phase(p - phi)).abs() < 1e-14);
        }
    }

    #[test]
    fn unwrap_constant_drift() {
        let e = 1.3;
        let phi0 = 0.77;
        let raw: Vec<(usize, f64)> = (50..80)
            .map(|n| {
                let nf = n as f64;
                (n, wrap_phase(0.5 * e * nf.ln() - FRAC_PI_2 * nf + phi0))
            })
            .collect();
        let out = phase_unwrap(&raw, en(e)).unwrap();
        for (_, p) in out {
            assert!((p - phi0).abs() < 1e-12);
        }
    }

    #[test]
    fn unwrap_removes_injected_jump() {
        let mut raw: Vec<(usize, f64)> = (10..20).map(|n| (n, -(FRAC_PI_2 * n as f64) + 3.1)).collect();
        raw[5].1 += TAU;
        let out = phase_unwrap(&raw, en(0.0)).unwrap();
        for w in out.windows(2) {
            assert!((w[1].1 - w[0].1).abs() < 1e-12);
        }
        assert!(out[0].1 > -PI && out[0].1 <= PI);
    }

    #[test]
    fn unwrap_rejects_short_or_gapped() {
        assert!(matches!(
            phase_unwrap(&[(3, 0.0)], en(0.0)),
            Err(Error::WindowTooShort { .. })
        ));
        assert!(matches!(
            phase_unwrap(&[(3, 0.0), (5, 0.0)], en(0.0)),
            Err(Error::NonConsecutive(5, 3))
        ));
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(0, 10).is_err());
        assert!(Window::new(10, 10).is_err());
        assert!(extract_constants(en(0.0), Window { n_min: 5, n_max: 2 }, &CorrectionTables::empty()).is_err());
    }

    #[test]
    fn fit_at_zero_energy() {
        let fit = extract_constants(en(0.0), DEFAULT_WINDOW, &reference_tables()).unwrap();
        assert!(fit.residual < 1e-8, "residual {}", fit.residual);
        assert!(fit.amplitudes.iter().all(|&a| a > 0.0));
        for w in fit.phases.windows(2) {
            assert!((w[1] - w[0]).abs() < FRAC_PI_2);
        }
        assert!(fit.phi_est > -PI && fit.phi_est <= PI);
    }

    #[test]
    fn grid_is_sign_symmetric() {
        let g = linear_grid(-2.0, 2.0, 5);
        assert_eq!(g, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        let g = linear_grid(-3.7, 3.7, 12);
        for i in 0..12 {
            assert_eq!(g[i], -g[11 - i]);
        }
        assert!(linear_grid(0.0, 1.0, 0).is_empty());
    }

    #[test]
    fn scan_basic() {
        let t = reference_tables();
        let w = Window::new(200, 2000).unwrap();
        assert!(spectral_scan(&[], w, &t, 2).is_empty());
        let rows = spectral_scan(&[0.0], w, &t, 1);
        assert_eq!(rows.len(), 1);
        let v = rows[0].outcome.as_ref().unwrap();
        let direct = extract_constants(en(0.0), w, &t).unwrap();
        assert_eq!(v.a, direct.a_est);
        assert!(v.a.is_finite() && v.phi.is_finite());

        let rows = spectral_scan(&[f64::NAN, 1.0], w, &t, 2);
        assert!(rows[0].outcome.is_err());
        assert!(rows[1].outcome.is_ok());
        let csv = scan_csv(&rows, w, 6);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SCAN_HEADER));
        assert!(lines.next().unwrap().starts_with("NaN,NaN,NaN,NaN,200,2000,6"));
    }
}
