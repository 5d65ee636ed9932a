//! Command-line front end. Every subcommand writes line-oriented text with a
//! fixed field order.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use thiserror::Error;

use crate::cusps::{Cusp, CuspTable};
use crate::dirichlet::char_parse;
use crate::exactnum::{complete_to_sl2, factorize, gcd, GL2QPlus, Rational};
use crate::heckering::{three_term_data, three_term_relative_residual, verify_prop75};
use crate::numeric::{
    coefficient_view, default_height, extract_coefficients, hecke_eigenvalue_numeric, parse_fixture, slash_unitary,
    EtaProductForm, NumericError,
};
use crate::supercusp::{vanishing_test, DEFAULT_THRESHOLD};
use crate::transfer::{
    eight_case_phase, factorizability_test, factorizability_test_with, multiplicativity_condition, prime_power_support,
    transfer_general, transfer_prime_power, CoefficientView, MultiplicativityDecision, TransferCertificate,
    TransferError,
};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CUSP_TRANSFER_THREADS";

/// Largest coefficient index `supercuspidal` will extract.
const EXTRACTION_LIMIT: i64 = 1 << 20;

const SMALL_PRIMES: [i64; 6] = [2, 3, 5, 7, 11, 13];

#[derive(Parser, Debug)]
#[command(name = "cusp-transfer", version, about = "Fourier coefficients of newforms at the cusps of Gamma0(N)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the cusp classes with gamma, width and cusp parameter.
    Cusps {
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        level: i64,
        #[arg(long, default_value = "trivial")]
        character: String,
    },
    /// Print the transfer certificate for A(cusp, index).
    Transfer {
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        level: i64,
        #[arg(long, default_value = "trivial")]
        character: String,
        #[arg(long)]
        cusp: Cusp,
        /// Signed index, e.g. +5 or -5.
        #[arg(long, allow_hyphen_values = true)]
        index: i64,
    },
    /// Print the three-term datum at a cusp and prime.
    ThreeTerm {
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        level: i64,
        #[arg(long, default_value = "trivial")]
        character: String,
        #[arg(long)]
        cusp: Cusp,
        #[arg(long)]
        prime: i64,
        /// Also check the group-ring identity by normal forms.
        #[arg(long)]
        check_prop75: bool,
    },
    /// Check an identity numerically against a fixture.
    Verify {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long, value_enum)]
        identity: Identity,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        prime: Option<i64>,
        #[arg(long)]
        nmax: Option<i64>,
    },
    /// Run the vanishing test for supercuspidality at a prime.
    Supercuspidal {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        prime: i64,
        #[arg(long)]
        bound: u32,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Print the extracted coefficients at one cusp.
    Extract {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        cusp: Cusp,
        #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
        nmax: i64,
        #[arg(long)]
        height: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Cusps { .. } => "cusps",
            Command::Transfer { .. } => "transfer",
            Command::ThreeTerm { .. } => "three-term",
            Command::Verify { .. } => "verify",
            Command::Supercuspidal { .. } => "supercuspidal",
            Command::Extract { .. } => "extract",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    ThreeTerm,
    Transfer,
    Multiplicativity,
    Automorphy,
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: exit status 2 with usage text.
    #[error("{0}")]
    Input(String),
    /// A computation that could not be completed: exit status 1.
    #[error("{0}")]
    Failed(String),
}

fn input(e: impl ToString) -> CliError {
    CliError::Input(e.to_string())
}

fn failed(e: impl ToString) -> CliError {
    CliError::Failed(e.to_string())
}

impl From<TransferError> for CliError {
    fn from(e: TransferError) -> Self {
        match e {
            TransferError::ZeroIndex | TransferError::BadSign(_) => input(e),
            _ => failed(e),
        }
    }
}

impl From<NumericError> for CliError {
    fn from(e: NumericError) -> Self {
        match e {
            NumericError::NotEigenform { .. } | NumericError::InsufficientTerms { .. } | NumericError::Underflow { .. } => failed(e),
            _ => input(e),
        }
    }
}

/// Text produced by a subcommand and whether its checks passed.
struct Report {
    text: String,
    pass: bool,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, pass: true }
    }
}

/// Parses `argv`, runs the subcommand and returns the exit status: 0 on
/// success, 1 when a verification fails, 2 on bad input.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return 2;
    }
    let name = cli.command.name();
    match execute(cli.command) {
        Ok(report) => {
            let _ = write!(out, "{}", report.text);
            if report.pass {
                0
            } else {
                1
            }
        }
        Err(CliError::Input(msg)) => {
            let mut cmd = Cli::command();
            cmd.build();
            let usage = cmd.find_subcommand_mut(name).map(|c| c.render_usage().to_string()).unwrap_or_default();
            let _ = writeln!(err, "error: {msg}\n\n{usage}");
            2
        }
        Err(CliError::Failed(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads = value
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| input(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // A second call in the same process finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn execute(command: Command) -> Result<Report, CliError> {
    match command {
        Command::Cusps { level, character } => cusps(&table(level, &character)?),
        Command::Transfer { level, character, cusp, index } => transfer(&table(level, &character)?, cusp, index),
        Command::ThreeTerm { level, character, cusp, prime, check_prop75 } => {
            three_term(&table(level, &character)?, cusp, prime, check_prop75)
        }
        Command::Verify { fixture, identity, tol, prime, nmax } => {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(input(format!("tolerance must be positive, got {tol}")));
            }
            if let Some(n) = nmax.filter(|&n| n < 1) {
                return Err(input(format!("--nmax must be positive, got {n}")));
            }
            let form = load_fixture(&fixture)?;
            match identity {
                Identity::ThreeTerm => verify_three_term(&form, tol, prime, nmax.unwrap_or(20)),
                Identity::Transfer => verify_transfer(&form, tol, nmax.unwrap_or(30)),
                Identity::Multiplicativity => verify_multiplicativity(&form, tol),
                Identity::Automorphy => verify_automorphy(&form, tol),
            }
        }
        Command::Supercuspidal { fixture, prime, bound, threshold } => supercuspidal(&load_fixture(&fixture)?, prime, bound, threshold),
        Command::Extract { fixture, cusp, nmax, height, samples } => extract(&load_fixture(&fixture)?, cusp, nmax, height, samples),
    }
}

fn table(level: i64, character: &str) -> Result<CuspTable, CliError> {
    let chi = char_parse(character, level).map_err(input)?;
    CuspTable::build(level, &chi).map_err(input)
}

fn load_fixture(path: &PathBuf) -> Result<EtaProductForm, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    parse_fixture(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn cusps(table: &CuspTable) -> Result<Report, CliError> {
    let mut text = format!("level={} character={} classes={}\n", table.n, table.chi, table.len());
    for cls in &table.classes {
        writeln!(text, "class={} cusp={} gamma={} m={} mu={}", cls.id, cls.cusp(), cls.gamma, cls.m, cls.mu).unwrap();
    }
    Ok(Report::ok(text))
}

/// The closed form at prime-power level, the membership scan otherwise.
fn certificate(table: &CuspTable, class_id: usize, epsilon: i64, m: i64) -> Result<TransferCertificate, TransferError> {
    if factorize(table.n).len() == 1 {
        transfer_prime_power(table, class_id, epsilon, m)
    } else {
        transfer_general(table, class_id, epsilon, m)
    }
}

fn transfer(table: &CuspTable, cusp: Cusp, index: i64) -> Result<Report, CliError> {
    if table.n == 1 {
        return Err(input("level 1 has a single cusp; there is nothing to transfer"));
    }
    let reduction = table.reduce_cusp(cusp);
    let rep = table.class(reduction.class_id).cusp();
    let mut text = String::new();
    if rep != cusp {
        writeln!(text, "A({cusp}, {index:+}) = {} * A({rep}, {index:+})", reduction.coefficient_factor(index)).unwrap();
    }
    let epsilon = if index < 0 { -1 } else { 1 };
    let cert = certificate(table, reduction.class_id, epsilon, index.abs())?;
    writeln!(text, "{cert}").unwrap();
    Ok(Report::ok(text))
}

fn three_term(table: &CuspTable, cusp: Cusp, prime: i64, check: bool) -> Result<Report, CliError> {
    let class_id = table.reduce_cusp(cusp).class_id;
    let datum = three_term_data(table, class_id, prime).map_err(input)?;
    let mut text = format!("{datum}\n");
    let mut pass = true;
    if check {
        pass = verify_prop75(&datum, table);
        writeln!(text, "prop75={}", verdict(pass)).unwrap();
    }
    Ok(Report { text, pass })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn summary(text: &mut String, name: &str, residual: f64, tol: f64) -> bool {
    let pass = residual <= tol;
    writeln!(text, "identity={name} max_residual={residual:.3e} tol={tol:e} {}", verdict(pass)).unwrap();
    pass
}

fn fixture_table(form: &EtaProductForm) -> Result<CuspTable, CliError> {
    CuspTable::build(form.level, &form.chi).map_err(input)
}

fn verify_three_term(form: &EtaProductForm, tol: f64, prime: Option<i64>, nmax: i64) -> Result<Report, CliError> {
    let table = fixture_table(form)?;
    let primes: Vec<i64> = match prime {
        Some(p) => vec![p],
        None => SMALL_PRIMES.into_iter().filter(|p| form.level % p != 0).collect(),
    };
    let pmax = primes.iter().copied().max().unwrap_or(2);
    let view = coefficient_view(form, &table, |_| pmax * (nmax + 1) + 1)?;
    let mut text = String::new();
    let mut worst = 0.0f64;
    for p in primes {
        let lambda = Complex64::new(hecke_eigenvalue_numeric(form, p)?.lambda, 0.0);
        for cls in &table.classes {
            let datum = three_term_data(&table, cls.id, p).map_err(input)?;
            let r = three_term_relative_residual(&view, &datum, lambda, 1..=nmax, &form.chi).map_err(failed)?;
            worst = worst.max(r);
            writeln!(text, "p={p} cusp={} max_residual={r:.3e}", cls.cusp()).unwrap();
        }
    }
    let pass = summary(&mut text, "three-term", worst, tol);
    Ok(Report { text, pass })
}

fn verify_transfer(form: &EtaProductForm, tol: f64, nmax: i64) -> Result<Report, CliError> {
    let table = fixture_table(form)?;
    if table.n == 1 {
        return Err(input("level 1 has a single cusp; there is nothing to transfer"));
    }
    let mut certs = Vec::new();
    let mut needed: BTreeMap<usize, i64> = BTreeMap::new();
    for cls in &table.classes {
        for eps in [1i64, -1] {
            for m in 1..=nmax {
                let cert = certificate(&table, cls.id, eps, m).map_err(failed)?;
                for (class, idx) in cert.factors().into_iter().chain([(cls.id, eps * m)]) {
                    let e = needed.entry(class).or_insert(1);
                    *e = (*e).max(idx.abs());
                }
                certs.push((cls.id, eps * m, cert));
            }
        }
    }
    let view = coefficient_view(form, &table, |c| needed.get(&c).copied().unwrap_or(0))?;
    let mut worst_by_class = vec![0.0f64; table.len()];
    for (class, idx, cert) in &certs {
        let scale = (1..=nmax).filter_map(|n| view.get(*class, n)).map(|v| v.norm()).fold(0.0, f64::max);
        let predicted = cert.evaluate(&view).ok_or_else(|| failed("missing coefficient"))?;
        let actual = view.get(*class, *idx).ok_or_else(|| failed("missing coefficient"))?;
        let r = (predicted - actual).norm() / scale;
        worst_by_class[*class] = worst_by_class[*class].max(r);
    }
    let mut text = String::new();
    for cls in &table.classes {
        writeln!(text, "cusp={} max_residual={:.3e}", cls.cusp(), worst_by_class[cls.id]).unwrap();
    }
    let worst = worst_by_class.iter().copied().fold(0.0, f64::max);
    let pass = summary(&mut text, "transfer", worst, tol);
    Ok(Report { text, pass })
}

/// Cusps without a multiplicativity theorem are reported but not judged.
fn verify_multiplicativity(form: &EtaProductForm, tol: f64) -> Result<Report, CliError> {
    let table = fixture_table(form)?;
    let view = coefficient_view(form, &table, |c| 64 * table.class(c).m + 1)?;
    let mut text = String::new();
    let mut worst = 0.0f64;
    for cls in &table.classes {
        let decision = multiplicativity_condition(table.n, cls.cusp());
        let support = prime_power_support(cls.m);
        let plain = factorizability_test(&view, cls.id, &support, tol).expect("nonempty support");
        let judged = match decision {
            MultiplicativityDecision::EightCase => {
                let weight = |a: Rational| eight_case_phase(a).expect("nonzero").to_complex();
                let weighted = factorizability_test_with(&view, cls.id, &support, tol, weight).expect("nonempty support");
                writeln!(
                    text,
                    "cusp={} decision={decision} max_residual={:.3e} unweighted={:.3e} quadruples={}",
                    cls.cusp(),
                    weighted.max_residual,
                    plain.max_residual,
                    weighted.quadruples
                )
                .unwrap();
                Some(weighted.max_residual)
            }
            _ => {
                writeln!(text, "cusp={} decision={decision} max_residual={:.3e} quadruples={}", cls.cusp(), plain.max_residual, plain.quadruples)
                    .unwrap();
                (decision == MultiplicativityDecision::MultiplicativeByTheorem).then_some(plain.max_residual)
            }
        };
        if let Some(r) = judged {
            worst = worst.max(r);
        }
    }
    let pass = summary(&mut text, "multiplicativity", worst, tol);
    Ok(Report { text, pass })
}

const SAMPLE_POINTS: [(f64, f64); 4] = [(0.13, 0.71), (-0.37, 0.52), (0.29, 1.1), (0.05, 0.43)];

/// F|gamma = chi(d) F for gamma with bottom rows (N t, d), 1 <= t <= 3,
/// |d| <= 7, at fixed sample points.
fn verify_automorphy(form: &EtaProductForm, tol: f64) -> Result<Report, CliError> {
    let n = form.level;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut count = 0;
    for t in 1..=3 {
        for d in (-7i64..=7).filter(|&d| gcd(n * t, d) == 1) {
            let g = complete_to_sl2(n * t, d).map_err(failed)?;
            let gamma = GL2QPlus::from_ints(g.a, g.b, g.c, g.d);
            let chi_d = form.chi.eval(d).to_complex();
            for (x, y) in SAMPLE_POINTS {
                let z = Complex64::new(x, y);
                let fz = form.value(z)?;
                let lhs = slash_unitary(|w| form.value(w), &gamma, form.weight, z)?;
                worst = worst.max((lhs - chi_d * fz).norm());
                scale = scale.max(fz.norm());
            }
            count += 1;
        }
    }
    let residual = if scale > 0.0 { worst / scale } else { worst };
    let mut text = format!("gammas={count} points={}\n", SAMPLE_POINTS.len());
    let pass = summary(&mut text, "automorphy", residual, tol);
    Ok(Report { text, pass })
}

fn supercuspidal(form: &EtaProductForm, prime: i64, bound: u32, threshold: f64) -> Result<Report, CliError> {
    let table = fixture_table(form)?;
    let mut limits = BTreeMap::new();
    for cls in table.classes.iter().filter(|c| c.mu.is_zero()) {
        let top = prime
            .checked_pow(bound)
            .and_then(|pm| pm.checked_mul(cls.m))
            .filter(|&x| x <= EXTRACTION_LIMIT)
            .ok_or_else(|| input(format!("m p^bound at cusp {} exceeds the extraction limit {EXTRACTION_LIMIT}", cls.cusp())))?;
        limits.insert(cls.id, top);
    }
    let view: CoefficientView = coefficient_view(form, &table, |c| limits.get(&c).copied().unwrap_or(0))?;
    let report = vanishing_test(&view, &table, prime, bound, threshold).map_err(input)?;
    Ok(Report::ok(format!("{report}\n")))
}

/// Fixed-point text with noise below 5e-11 printed as zero.
fn fixed(x: f64) -> String {
    let x = if x.abs() < 5e-11 { 0.0 } else { x };
    format!("{x:.10}")
}

fn extract(form: &EtaProductForm, cusp: Cusp, nmax: i64, height: Option<f64>, samples: Option<usize>) -> Result<Report, CliError> {
    let table = fixture_table(form)?;
    let reduction = table.reduce_cusp(cusp);
    let cls = table.class(reduction.class_id);
    let y = height.unwrap_or_else(|| default_height(nmax));
    let slice = extract_coefficients(form, &table, cls.id, y, nmax, samples)?;
    let mut text = format!(
        "cusp={cusp} class={} representative={} m={} mu={} y={y} samples={} error_estimate={:.1e}\n",
        cls.id,
        cls.cusp(),
        cls.m,
        cls.mu,
        slice.samples,
        slice.error_estimate
    );
    for (&n, &c) in slice.indices.iter().zip(&slice.coefficients) {
        let a = reduction.coefficient_factor(n).to_complex() * c;
        writeln!(text, "n={n} A={} {}", fixed(a.re), fixed(a.im)).unwrap();
    }
    Ok(Report::ok(text))
}

/// Entry point for the binary.
pub fn main() -> std::process::ExitCode {
    let code = run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::ExitCode::from(code as u8)
}
