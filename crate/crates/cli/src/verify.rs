//! Built-in invariant suite behind `fockwave verify`.

use std::time::Instant;

use fockwave_core::asymptotics::{extract_constants, linear_grid, spectral_scan, Window, DEFAULT_WINDOW};
use fockwave_core::bootstrap::{compare_tables, derive_corrections, reference_tables, CorrectionTables};
use fockwave_core::orthogonality::{cd_rhs, delta_norm_slope, truncated_inner};
use fockwave_core::recursion::{psi_sequence, transfer_product};
use fockwave_core::{exact::PolynomialE, Energy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub quick: bool,
    pub product_tol: f64,
    pub cd_tol: f64,
    pub residual_tol: f64,
    pub slope_tol: f64,
    pub symmetry_tol: f64,
    /// Replaces the derived `delta_1` before comparison; used to confirm the
    /// suite actually fails on a wrong table.
    pub perturb_delta1: Option<PolynomialE>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            quick: false,
            product_tol: 1e-10,
            cd_tol: 1e-9,
            residual_tol: 1e-8,
            slope_tol: 1e-2,
            symmetry_tol: 1e-10,
            perturb_delta1: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn en(e: f64) -> Energy {
    Energy::new(e).expect("finite literal")
}

fn check_product(cfg: &VerifyConfig) -> CheckResult {
    let (draws, max_n) = if cfg.quick { (20, 10_000) } else { (100, 100_000) };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let e = rng.gen_range(-10.0..=10.0);
        let n = rng.gen_range(1..=max_n);
        let seq = psi_sequence(en(e), n);
        let (p, q) = transfer_product(en(e), n).expect("n >= 1");
        let (rp, rq) = (seq.values()[n - 1], seq.values()[n]);
        let scale = rp.hypot(rq);
        worst = worst.max((p - rp).abs() / scale).max((q - rq).abs() / scale);
    }
    CheckResult {
        name: "recursion-vs-product",
        passed: worst <= cfg.product_tol,
        detail: format!("{draws} draws, max rel dev {worst:.3e} (tol {:.1e})", cfg.product_tol),
    }
}

fn check_parity(cfg: &VerifyConfig) -> CheckResult {
    let n = if cfg.quick { 10_000 } else { 100_000 };
    let mut bad = 0usize;
    for e in [0.3, 1.0, 2.75, 7.5] {
        let plus = psi_sequence(en(e), n);
        let minus = psi_sequence(en(-e), n);
        bad += plus
            .values()
            .iter()
            .zip(minus.values())
            .enumerate()
            .filter(|(k, (a, b))| if k % 2 == 0 { **a != **b } else { **a != -**b })
            .count();
    }
    CheckResult {
        name: "parity",
        passed: bad == 0,
        detail: format!("{bad} entries violate psi_n(-E) = (-1)^n psi_n(E) up to n = {n}"),
    }
}

fn check_cd(cfg: &VerifyConfig) -> CheckResult {
    let (triples, max_n) = if cfg.quick { (100, 2_000) } else { (1_000, 10_000) };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..triples {
        let e = rng.gen_range(-5.0..=5.0);
        let mut ep = rng.gen_range(-5.0..=5.0);
        while ep == e {
            ep = rng.gen_range(-5.0..=5.0);
        }
        let n = rng.gen_range(1..=max_n);
        let direct = truncated_inner(en(e), en(ep), n - 1);
        let cd = cd_rhs(en(e), en(ep), n).expect("distinct energies");
        worst = worst.max((direct - cd).abs() / (1.0 + direct.abs()));
    }
    CheckResult {
        name: "cd-identity",
        passed: worst <= cfg.cd_tol,
        detail: format!("{triples} triples, worst {worst:.3e} (tol {:.1e})", cfg.cd_tol),
    }
}

fn check_bootstrap(cfg: &VerifyConfig) -> (CheckResult, Option<CorrectionTables>) {
    let start = Instant::now();
    let derived = match derive_corrections(6) {
        Ok(t) => t,
        Err(e) => {
            return (
                CheckResult {
                    name: "bootstrap-vs-reference",
                    passed: false,
                    detail: format!("derivation failed: {e}"),
                },
                None,
            )
        }
    };
    let derived = match &cfg.perturb_delta1 {
        Some(p) => derived.with_delta(1, p.clone()),
        None => derived,
    };
    let cmp = compare_tables(&derived, &reference_tables());
    let bad: Vec<String> = cmp
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("{}_{}", c.family, c.index))
        .collect();
    let result = CheckResult {
        name: "bootstrap-vs-reference",
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("12/12 polynomials exact ({:.2?})", start.elapsed())
        } else {
            format!("mismatch in {}", bad.join(", "))
        },
    };
    (result, Some(derived))
}

fn check_residual(cfg: &VerifyConfig, tables: &CorrectionTables) -> CheckResult {
    let energies: &[f64] = if cfg.quick { &[0.0, 1.0] } else { &[0.0, 1.0, 2.5] };
    let mut worst: f64 = 0.0;
    for &e in energies {
        match extract_constants(en(e), DEFAULT_WINDOW, tables) {
            Ok(fit) => worst = worst.max(fit.residual),
            Err(_) => worst = f64::INFINITY,
        }
    }
    CheckResult {
        name: "asymptotic-residual",
        passed: worst < cfg.residual_tol,
        detail: format!("max residual {worst:.3e} on [1e3, 1e4] (tol {:.1e})", cfg.residual_tol),
    }
}

fn check_slope(cfg: &VerifyConfig, tables: &CorrectionTables) -> CheckResult {
    let ns: &[usize] = if cfg.quick {
        &[1_000, 10_000, 100_000]
    } else {
        &[1_000, 10_000, 100_000, 1_000_000]
    };
    let energies: &[f64] = if cfg.quick { &[0.0] } else { &[0.0, 1.0, 2.0] };
    let mut worst: f64 = 0.0;
    for &e in energies {
        let slope = delta_norm_slope(en(e), ns).expect("valid list");
        match extract_constants(en(e), DEFAULT_WINDOW, tables) {
            Ok(fit) => worst = worst.max((slope.a_from_slope - fit.a_est).abs() / fit.a_est),
            Err(_) => worst = f64::INFINITY,
        }
    }
    CheckResult {
        name: "slope-vs-fit",
        passed: worst < cfg.slope_tol,
        detail: format!("max |A_slope/A_fit - 1| = {worst:.3e} (tol {:.1e})", cfg.slope_tol),
    }
}

fn check_symmetry(cfg: &VerifyConfig, tables: &CorrectionTables) -> CheckResult {
    let steps = if cfg.quick { 5 } else { 13 };
    let window = if cfg.quick {
        Window { n_min: 500, n_max: 5_000 }
    } else {
        DEFAULT_WINDOW
    };
    let rows = spectral_scan(&linear_grid(-3.0, 3.0, steps), window, tables, 0);
    let mut worst: f64 = 0.0;
    for (a, b) in rows.iter().zip(rows.iter().rev()) {
        match (&a.outcome, &b.outcome) {
            (Ok(x), Ok(y)) => worst = worst.max((x.a - y.a).abs()),
            _ => worst = f64::INFINITY,
        }
    }
    CheckResult {
        name: "amplitude-symmetry",
        passed: worst <= cfg.symmetry_tol,
        detail: format!("max |A(E) - A(-E)| = {worst:.3e} over {steps} points (tol {:.1e})", cfg.symmetry_tol),
    }
}

/// Runs every check; the fits use the derived tables, so a broken
/// derivation shows up in the bootstrap check and downstream.
pub fn run(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let mut out = vec![check_product(cfg), check_parity(cfg), check_cd(cfg)];
    let (boot, derived) = check_bootstrap(cfg);
    out.push(boot);
    let tables = derived.unwrap_or_else(reference_tables);
    out.push(check_residual(cfg, &tables));
    out.push(check_slope(cfg, &tables));
    out.push(check_symmetry(cfg, &tables));
    out
}
