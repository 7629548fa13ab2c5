//! Command-line front end: solves, method comparisons, convergence and
//! underflow studies, and the randomized norm-engine check.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical validity error,
//! 4 internal numerical failure.

mod output;

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use convdiff::experiments::{
    convergence_study, solve_method, BetaChoice, Method, NormSelector, SolveOptions,
};
use convdiff::mesh::{P1Function, UniformMesh};
use convdiff::norms::{discrete_star_seminorm_sq, projection_oracle, t_action, t_norm_sq};
use convdiff::{Error, Forcing};
use rand::{rngs::StdRng, Rng, SeedableRng};

use output::{write_csv, write_json, ConfigDto, OutputDto, RecordDto};

#[derive(Parser)]
#[command(
    name = "convdiff",
    about = "Variational discretizations of -eps*u'' + u' = f on (0,1)",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Linear,
    Spls,
    UpgQuad,
    UpgExp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn label(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Args)]
struct Common {
    /// Write results here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Gauss-Legendre order for dual vectors and error integrals.
    #[arg(long, default_value_t = 8)]
    quad_order: usize,
    /// Target reference mesh size for non-constant forcing.
    #[arg(long, default_value_t = 1024)]
    n_ref: usize,
    /// Accept a reference mesh that does not resolve the layer.
    #[arg(long)]
    acknowledge_layer: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one method at one parameter point.
    Solve {
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        n: usize,
        /// const1 | cos2pi | linear | comma-separated polynomial coefficients.
        #[arg(long, default_value = "const1")]
        forcing: String,
        /// Quadratic bubble parameter: a number or "special" (upg-quad only).
        #[arg(long)]
        beta: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Refine across a mesh list and fit the convergence rate.
    Convergence {
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        epsilon: f64,
        /// Comma-separated strictly increasing cell counts, e.g. 16,32,64.
        #[arg(long)]
        n_list: String,
        #[arg(long, default_value = "const1")]
        forcing: String,
        /// h1 | l2 | star | star-h
        #[arg(long, default_value = "h1")]
        norm: String,
        #[arg(long)]
        beta: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run all four methods at one parameter point (linear, spls,
    /// upg-quad with beta = 1, upg-exp).
    Compare {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "const1")]
        forcing: String,
        #[command(flatten)]
        common: Common,
    },
    /// Exponential-scheme solves across an epsilon list, tracking g0
    /// saturation as exp(-h/eps) underflows.
    Underflow {
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Comma-separated diffusion values, e.g. 0.05,1e-3,1e-4.
        #[arg(long)]
        epsilon_list: String,
        #[command(flatten)]
        common: Common,
    },
    /// Randomized checks of the norm engine (sandwich inequality, |Tu|^2
    /// identity, explicit formula vs projection oracle).
    NormsCheck {
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 20260810)]
        seed: u64,
    },
}

enum CliError {
    Usage(String),
    Numeric(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numeric(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(Error::Validity(_)) => 3,
            CliError::Numeric(_) | CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Numeric(e) => e.to_string(),
            CliError::Io(e) => format!("io error: {e}"),
        }
    }
}

fn parse_forcing(text: &str) -> Result<Forcing<f64>, CliError> {
    Forcing::parse(text).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_beta(method: MethodArg, beta: &Option<String>) -> Result<Method<f64>, CliError> {
    match (method, beta) {
        (MethodArg::Linear, None) => Ok(Method::Linear),
        (MethodArg::Spls, None) => Ok(Method::Spls),
        (MethodArg::UpgExp, None) => Ok(Method::UpgExp),
        (MethodArg::UpgQuad, None) => Ok(Method::UpgQuad(BetaChoice::Fixed(1.0))),
        (MethodArg::UpgQuad, Some(text)) => {
            if text == "special" {
                Ok(Method::UpgQuad(BetaChoice::Special))
            } else {
                let v: f64 = text
                    .parse()
                    .map_err(|_| CliError::Usage(format!("cannot parse beta '{text}'")))?;
                Ok(Method::UpgQuad(BetaChoice::Fixed(v)))
            }
        }
        (_, Some(_)) => Err(CliError::Usage(
            "--beta only applies to --method upg-quad".to_string(),
        )),
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("cannot parse {what} '{t}'")))
        })
        .collect()
}

fn method_label(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Linear => "linear",
        MethodArg::Spls => "spls",
        MethodArg::UpgQuad => "upg_quad",
        MethodArg::UpgExp => "upg_exp",
    }
}

fn solve_options(common: &Common) -> SolveOptions {
    SolveOptions {
        quad_order: common.quad_order,
        n_ref: common.n_ref,
        force_quadrature_dual: false,
        acknowledge_layer: common.acknowledge_layer,
    }
}

fn emit(common: &Common, dto: &OutputDto) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match &common.output {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    match common.format {
        Format::Json => write_json(&mut sink, dto)?,
        Format::Csv => {
            write_csv(&mut sink, &dto.records)?;
            if let Some(rate) = dto.rate {
                writeln!(sink, "# fitted_rate,{}", output::fmt_f64(rate))?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            method,
            epsilon,
            n,
            forcing,
            beta,
            common,
        } => {
            let f = parse_forcing(&forcing)?;
            let m = parse_beta(method, &beta)?;
            let record = solve_method(m, epsilon, n, &f, &solve_options(&common))?;
            let dto = OutputDto {
                config: ConfigDto {
                    command: "solve".into(),
                    method: Some(method_label(method).into()),
                    epsilon: Some(epsilon),
                    n: Some(n as u64),
                    n_list: None,
                    epsilon_list: None,
                    beta: beta.clone(),
                    forcing: Some(f.label()),
                    norm: None,
                    quad_order: common.quad_order as u64,
                    format: common.format.label().into(),
                },
                records: vec![RecordDto::from(&record)],
                rate: None,
            };
            emit(&common, &dto)
        }
        Command::Convergence {
            method,
            epsilon,
            n_list,
            forcing,
            norm,
            beta,
            common,
        } => {
            let f = parse_forcing(&forcing)?;
            let m = parse_beta(method, &beta)?;
            let ns: Vec<usize> = parse_list(&n_list, "cell count")?;
            let selector =
                NormSelector::parse(&norm).map_err(|e| CliError::Usage(e.to_string()))?;
            let study = convergence_study(m, epsilon, &ns, &f, selector, &solve_options(&common))?;
            let dto = OutputDto {
                config: ConfigDto {
                    command: "convergence".into(),
                    method: Some(method_label(method).into()),
                    epsilon: Some(epsilon),
                    n: None,
                    n_list: Some(ns.iter().map(|&v| v as u64).collect()),
                    epsilon_list: None,
                    beta: beta.clone(),
                    forcing: Some(f.label()),
                    norm: Some(norm.clone()),
                    quad_order: common.quad_order as u64,
                    format: common.format.label().into(),
                },
                records: study.records.iter().map(RecordDto::from).collect(),
                rate: study.rate,
            };
            emit(&common, &dto)
        }
        Command::Compare {
            epsilon,
            n,
            forcing,
            common,
        } => {
            let f = parse_forcing(&forcing)?;
            let methods = [
                Method::Linear,
                Method::Spls,
                Method::UpgQuad(BetaChoice::Fixed(1.0)),
                Method::UpgExp,
            ];
            let mut records = Vec::with_capacity(methods.len());
            for m in methods {
                records.push(solve_method(m, epsilon, n, &f, &solve_options(&common))?);
            }
            let dto = OutputDto {
                config: ConfigDto {
                    command: "compare".into(),
                    method: None,
                    epsilon: Some(epsilon),
                    n: Some(n as u64),
                    n_list: None,
                    epsilon_list: None,
                    beta: None,
                    forcing: Some(f.label()),
                    norm: None,
                    quad_order: common.quad_order as u64,
                    format: common.format.label().into(),
                },
                records: records.iter().map(RecordDto::from).collect(),
                rate: None,
            };
            emit(&common, &dto)
        }
        Command::Underflow {
            n,
            epsilon_list,
            common,
        } => {
            let eps_list: Vec<f64> = parse_list(&epsilon_list, "epsilon")?;
            if eps_list.is_empty() {
                return Err(CliError::Usage("empty epsilon list".into()));
            }
            let f = Forcing::Const(1.0);
            let mut records = Vec::with_capacity(eps_list.len());
            for &eps in &eps_list {
                records.push(solve_method(
                    Method::UpgExp,
                    eps,
                    n,
                    &f,
                    &solve_options(&common),
                )?);
            }
            let dto = OutputDto {
                config: ConfigDto {
                    command: "underflow".into(),
                    method: Some("upg_exp".into()),
                    epsilon: None,
                    n: Some(n as u64),
                    n_list: None,
                    epsilon_list: Some(eps_list),
                    beta: None,
                    forcing: Some(f.label()),
                    norm: None,
                    quad_order: common.quad_order as u64,
                    format: common.format.label().into(),
                },
                records: records.iter().map(RecordDto::from).collect(),
                rate: None,
            };
            emit(&common, &dto)
        }
        Command::NormsCheck { samples, seed } => norms_check(samples, seed),
    }
}

/// Randomized norm-engine properties; one line per property on stdout.
fn norms_check(samples: usize, seed: u64) -> Result<(), CliError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let pi2 = std::f64::consts::PI.powi(2);
    let random_p1 = |rng: &mut StdRng| {
        let n = rng.random_range(2..40usize);
        let coeffs: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        P1Function::new(UniformMesh::new(n).unwrap(), coeffs).unwrap()
    };

    let mut sandwich_ok = true;
    for _ in 0..samples {
        let u = random_p1(&mut rng);
        let eps = 10f64.powf(rng.random_range(-4.0..0.5));
        let h = u.mesh().h();
        let star_sq = eps * eps * u.h1_seminorm_sq() + t_norm_sq(&u);
        let semi = discrete_star_seminorm_sq(&u);
        let lower = star_sq - (eps * eps + h * h / pi2) * u.h1_seminorm_sq();
        if lower > semi + 1e-10 || semi > u.l2_norm_sq() + 1e-10 {
            sandwich_ok = false;
        }
    }

    let mut identity_worst = 0.0f64;
    for _ in 0..samples {
        let u = random_p1(&mut rng);
        let direct = t_action(&u).h1_seminorm_sq(6)?;
        let identity = t_norm_sq(&u);
        identity_worst = identity_worst.max((direct - identity).abs() / (1.0 + identity));
    }
    let identity_ok = identity_worst <= 1e-11;

    let mut oracle_worst = 0.0f64;
    for _ in 0..samples {
        let u = random_p1(&mut rng);
        let explicit = discrete_star_seminorm_sq(&u);
        let oracle = projection_oracle(&u)?;
        oracle_worst = oracle_worst.max((explicit - oracle).abs() / (1.0 + explicit));
    }
    let oracle_ok = oracle_worst <= 1e-10;

    println!(
        "sandwich inequality: {} ({samples} samples)",
        if sandwich_ok { "PASS" } else { "FAIL" }
    );
    println!(
        "|Tu|^2 identity: {} (max relative gap {identity_worst:.2e})",
        if identity_ok { "PASS" } else { "FAIL" }
    );
    println!(
        "explicit formula vs projection oracle: {} (max relative gap {oracle_worst:.2e})",
        if oracle_ok { "PASS" } else { "FAIL" }
    );
    if sandwich_ok && identity_ok && oracle_ok {
        Ok(())
    } else {
        Err(CliError::Numeric(Error::Contract(
            "norm engine property check failed".into(),
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
