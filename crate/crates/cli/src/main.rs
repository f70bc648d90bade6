//! `fockwave`: eigenstates of the tridiagonal Hamiltonian
//! `(n+1) psi_{n+1} + n psi_{n-1} = E psi_n` from the command line.
//!
//! Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.

mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fockwave_core::asymptotics::{self, extract_constants, linear_grid, scan_csv, spectral_scan, ScanRow, ScanValues, Window};
use fockwave_core::bootstrap::{compare_tables, derive_corrections, reference_tables, CorrectionTables};
use fockwave_core::exact::{format_rational, parse_rational, PolynomialE};
use fockwave_core::orthogonality::{delta_norm_slope, kernel_csv, kernel_samples};
use fockwave_core::recursion::psi_sequence;
use fockwave_core::Energy;

use crate::output::Sink;

#[derive(Parser, Debug)]
#[command(name = "fockwave", version, about = "Eigenstates psi_n(E) of the tridiagonal sl2 Hamiltonian")]
struct Cli {
    /// Directory for relative `--output` paths.
    #[arg(long, global = true, env = "FOCKWAVE_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate psi_n(E) for n = 0..N by forward recursion.
    Psi {
        #[arg(long, allow_negative_numbers = true)]
        energy: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Derive the exact correction polynomials delta_j(E), eps_j(E).
    Bootstrap {
        #[arg(long)]
        order: usize,
        /// Compare orders 1..6 against the built-in reference tables.
        #[arg(long = "check-paper")]
        check_reference: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit A(E) and phi(E) at one energy.
    Fit {
        #[arg(long, allow_negative_numbers = true)]
        energy: f64,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit A(E) and phi(E) over an evenly spaced energy grid.
    Scan {
        #[arg(long, allow_negative_numbers = true)]
        e_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        e_max: f64,
        #[arg(long)]
        steps: usize,
        #[command(flatten)]
        fit: FitArgs,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Truncated inner products <psi_E'|psi_E> against the CD identity and
    /// the large-N kernel, or the diagonal log-N slope with `--slope`.
    Kernel {
        #[arg(long, allow_negative_numbers = true)]
        e1: f64,
        #[arg(long, allow_negative_numbers = true)]
        e2: Option<f64>,
        /// Truncation(s) N, comma separated.
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        /// Diagonal mode: fit sum_{n<=N} psi_n(E1)^2 against log N.
        #[arg(long)]
        slope: bool,
        /// Skip the asymptotic fits behind the sinc_model column.
        #[arg(long)]
        no_model: bool,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the built-in invariant suite.
    Verify {
        /// Reduced sizes, finishes in a few seconds.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 1e-10)]
        product_tol: f64,
        #[arg(long, default_value_t = 1e-9)]
        cd_tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        residual_tol: f64,
        #[arg(long, default_value_t = 1e-2)]
        slope_tol: f64,
        #[arg(long, default_value_t = 1e-10)]
        symmetry_tol: f64,
        /// Replace the derived delta_1 by this rational before checking.
        #[arg(long, hide = true, allow_hyphen_values = true)]
        perturb_delta1: Option<String>,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct FitArgs {
    #[arg(long, default_value_t = asymptotics::DEFAULT_WINDOW.n_min)]
    n_min: usize,
    #[arg(long, default_value_t = asymptotics::DEFAULT_WINDOW.n_max)]
    n_max: usize,
    #[arg(long, default_value_t = asymptotics::DEFAULT_ORDER)]
    order: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Usage(String),
    Verification,
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn energy(value: f64, flag: &str) -> Result<Energy, Failure> {
    Energy::new(value).map_err(|e| usage(format!("{flag}: {e}")))
}

impl FitArgs {
    fn window(&self) -> Result<Window, Failure> {
        Window::new(self.n_min, self.n_max).map_err(|e| usage(e.to_string()))
    }

    fn tables(&self) -> Result<CorrectionTables, Failure> {
        if self.order == 0 {
            return Ok(CorrectionTables::empty());
        }
        derive_corrections(self.order).map_err(|e| Failure::Runtime(anyhow!(e)))
    }
}

fn cmd_psi(e: f64, n: usize, format: Format, sink: &Sink) -> CmdResult {
    let seq = psi_sequence(energy(e, "--energy")?, n);
    let text = match format {
        Format::Csv => {
            let mut s = String::from("n,psi\n");
            for (k, v) in seq.values().iter().enumerate() {
                s.push_str(&format!("{k},{v:?}\n"));
            }
            s
        }
        Format::Json => {
            let doc = serde_json::json!({
                "energy": e,
                "method": "recursion",
                "values": seq.values(),
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).context("encode JSON")?)
        }
    };
    sink.write(&text)?;
    Ok(())
}

fn tables_csv(t: &CorrectionTables) -> String {
    let mut s = String::from("family,j,power,coefficient\n");
    for (family, polys) in [("delta", t.delta()), ("epsilon", t.epsilon())] {
        for (j, p) in polys.iter().enumerate() {
            for (k, c) in p.coeffs().iter().enumerate() {
                s.push_str(&format!("{family},{},{k},{}\n", j + 1, format_rational(c)));
            }
        }
    }
    s
}

fn cmd_bootstrap(order: usize, check: bool, format: Format, sink: &Sink) -> CmdResult {
    if order == 0 {
        return Err(usage("--order must be at least 1"));
    }
    let tables = derive_corrections(order).map_err(|e| Failure::Runtime(anyhow!(e)))?;
    let text = match format {
        Format::Json => format!("{}\n", tables.to_json()),
        Format::Csv => tables_csv(&tables),
    };
    sink.write(&text)?;
    if check {
        let reference = reference_tables();
        let mut all = true;
        for c in compare_tables(&tables, &reference) {
            let status = match &c.actual {
                None => "SKIP",
                Some(_) if c.passed() => "PASS",
                Some(_) => "FAIL",
            };
            if status == "FAIL" {
                all = false;
            }
            eprintln!("{status} {}_{} = {}", c.family, c.index, c.expected);
        }
        if !all {
            return Err(Failure::Verification);
        }
    }
    Ok(())
}

fn cmd_fit(e: f64, fit: FitArgs, sink: &Sink) -> CmdResult {
    let en = energy(e, "--energy")?;
    let window = fit.window()?;
    let tables = fit.tables()?;
    let result = extract_constants(en, window, &tables).map_err(|err| Failure::Runtime(anyhow!(err)))?;
    let row = ScanRow {
        energy: e,
        outcome: Ok(ScanValues {
            a: result.a_est,
            phi: result.phi_est,
            residual: result.residual,
        }),
    };
    sink.write(&scan_csv(&[row], window, fit.order))?;
    Ok(())
}

fn cmd_scan(e_min: f64, e_max: f64, steps: usize, fit: FitArgs, jobs: usize, sink: &Sink) -> CmdResult {
    energy(e_min, "--e-min")?;
    energy(e_max, "--e-max")?;
    if e_max < e_min {
        return Err(usage("--e-max must not be below --e-min"));
    }
    let window = fit.window()?;
    let tables = fit.tables()?;
    let rows = spectral_scan(&linear_grid(e_min, e_max, steps), window, &tables, jobs);
    for row in &rows {
        if let Err(err) = &row.outcome {
            eprintln!("E = {}: {err}", row.energy);
        }
    }
    sink.write(&scan_csv(&rows, window, fit.order))?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_kernel(e1: f64, e2: Option<f64>, ns: Vec<usize>, slope: bool, no_model: bool, fit: FitArgs, sink: &Sink) -> CmdResult {
    let a = energy(e1, "--e1")?;
    if slope {
        if let Some(b) = e2 {
            if b != e1 {
                return Err(usage("--slope is diagonal: --e2 must be omitted or equal --e1"));
            }
        }
        let ns = if ns.is_empty() {
            vec![1_000, 10_000, 100_000, 1_000_000]
        } else {
            ns
        };
        let s = delta_norm_slope(a, &ns).map_err(|e| usage(format!("--n: {e}")))?;
        let a_fit = match fit.tables().and_then(|t| Ok(extract_constants(a, fit.window()?, &t))) {
            Ok(Ok(f)) => f.a_est,
            Ok(Err(err)) => return Err(Failure::Runtime(anyhow!(err))),
            Err(f) => return Err(f),
        };
        let text = format!(
            "E,slope,intercept,A_from_slope,A_fit,relative_residual\n{:?},{:?},{:?},{:?},{:?},{:?}\n",
            e1,
            s.slope,
            s.intercept,
            s.a_from_slope,
            a_fit,
            s.relative_residual()
        );
        sink.write(&text)?;
        return Ok(());
    }

    let Some(e2) = e2 else {
        return Err(usage("--e2 is required unless --slope is given"));
    };
    let b = energy(e2, "--e2")?;
    if a == b {
        return Err(usage("--e1 equals --e2: the diagonal requires --slope mode"));
    }
    if ns.is_empty() {
        return Err(usage("--n is required"));
    }
    if ns.contains(&0) {
        return Err(usage("--n values must be at least 1"));
    }
    let fits = if no_model {
        None
    } else {
        let tables = fit.tables()?;
        let window = fit.window()?;
        let fa = extract_constants(a, window, &tables).map_err(|e| Failure::Runtime(anyhow!(e)))?;
        let fb = extract_constants(b, window, &tables).map_err(|e| Failure::Runtime(anyhow!(e)))?;
        Some((fa, fb))
    };
    let samples = kernel_samples(a, b, &ns, fits.as_ref().map(|(x, y)| (x, y)))
        .map_err(|e| Failure::Runtime(anyhow!(e)))?;
    sink.write(&kernel_csv(&samples))?;
    Ok(())
}

fn cmd_verify(cfg: verify::VerifyConfig) -> CmdResult {
    let results = verify::run(&cfg);
    let mut failed = Vec::new();
    for r in &results {
        println!("{} {:<24} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        if !r.passed {
            failed.push(r.name);
        }
    }
    if failed.is_empty() {
        println!("verify: all {} checks passed", results.len());
        Ok(())
    } else {
        eprintln!("verify: failed checks: {}", failed.join(", "));
        Err(Failure::Verification)
    }
}

fn run(cli: Cli) -> CmdResult {
    let out_dir = cli.output_dir.as_deref();
    match cli.command {
        Command::Psi {
            energy,
            n,
            format,
            output,
        } => cmd_psi(energy, n, format, &Sink::resolve(output.as_deref(), out_dir)),
        Command::Bootstrap {
            order,
            check_reference,
            format,
            output,
        } => cmd_bootstrap(order, check_reference, format, &Sink::resolve(output.as_deref(), out_dir)),
        Command::Fit { energy, fit, output } => cmd_fit(energy, fit, &Sink::resolve(output.as_deref(), out_dir)),
        Command::Scan {
            e_min,
            e_max,
            steps,
            fit,
            jobs,
            output,
        } => cmd_scan(e_min, e_max, steps, fit, jobs, &Sink::resolve(output.as_deref(), out_dir)),
        Command::Kernel {
            e1,
            e2,
            n,
            slope,
            no_model,
            fit,
            output,
        } => cmd_kernel(e1, e2, n, slope, no_model, fit, &Sink::resolve(output.as_deref(), out_dir)),
        Command::Verify {
            quick,
            product_tol,
            cd_tol,
            residual_tol,
            slope_tol,
            symmetry_tol,
            perturb_delta1,
        } => {
            let perturb_delta1 = match perturb_delta1 {
                Some(s) => Some(PolynomialE::constant(
                    parse_rational(&s).map_err(|e| usage(format!("--perturb-delta1: {e}")))?,
                )),
                None => None,
            };
            cmd_verify(verify::VerifyConfig {
                quick,
                product_tol,
                cd_tol,
                residual_tol,
                slope_tol,
                symmetry_tol,
                perturb_delta1,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
