mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use ineqcert::certify::prove_inequality;
use ineqcert::expr::EvalContext;
use ineqcert::gfun::{endpoint_limit, numeric_limit, taylor_limit, Endpoint};
use ineqcert::precision::{to_decimal_string, to_sci_string, Precision};
use ineqcert::quad::{find_inflection_with, kurepa_family, QuadError};
use ineqcert::remez::{absolute_floor, minimax, verify_equioscillation};
use rug::Float;
use serde_json::{json, Value};

use config::RawConfig;

const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ineqcert",
    version,
    about = "Certified proofs of f(x) >= 0 on [a, b]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full proof pipeline and write a JSON report.
    Prove(ProblemArgs),
    /// Minimax polynomial of `function` itself on the interval.
    Minimax(ProblemArgs),
    /// Kurepa function K(x) or one of its first three derivatives.
    Kurepa(KurepaArgs),
    /// Endpoint limits of f / ((x-a)^n (b-x)^m) by both methods.
    Limits(ProblemArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    function: Option<String>,
    /// `a,b` as decimals.
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    /// Working precision in decimal digits.
    #[arg(long)]
    precision: Option<String>,
    /// Remez convergence tolerance (relative spread of node residuals).
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    margin: Option<String>,
    #[arg(long)]
    grid_multiplier: Option<String>,
    /// Override the limit at a.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Override the limit at b.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// Report path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record per-stage wall-clock seconds (report is then not reproducible).
    #[arg(long)]
    wall_clock: bool,
}

impl ProblemArgs {
    fn raw(&self) -> Result<RawConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::load(path)?,
            None => RawConfig::default(),
        };
        raw.set("function", self.function.clone());
        raw.set("interval", self.interval.clone());
        raw.set("n", self.n.clone());
        raw.set("m", self.m.clone());
        raw.set("degree", self.degree.clone());
        raw.set("precision", self.precision.clone());
        raw.set("tol", self.tol.clone());
        raw.set("margin", self.margin.clone());
        raw.set("grid_multiplier", self.grid_multiplier.clone());
        raw.set("alpha", self.alpha.clone());
        raw.set("beta", self.beta.clone());
        raw.set("out", self.out.as_ref().map(|p| p.display().to_string()));
        Ok(raw)
    }
}

#[derive(Args)]
struct KurepaArgs {
    /// Non-negative decimal argument.
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "inflection"
    )]
    x: Option<String>,
    /// Derivative order, 0 to 3.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=3))]
    order: u32,
    /// Print the root of K'' in (0, 1) instead.
    #[arg(long, conflicts_with = "x")]
    inflection: bool,
    #[arg(long, default_value_t = 50)]
    precision: u32,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(code)) => ExitCode::from(code),
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(_) => ExitCode::from(EXIT_USAGE),
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Prove(args) => run_prove(&args),
        Command::Minimax(args) => run_minimax(&args),
        Command::Kurepa(args) => run_kurepa(&args),
        Command::Limits(args) => run_limits(&args),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))
            .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

fn run_prove(args: &ProblemArgs) -> Result<u8> {
    let raw = args.raw()?;
    let f = raw.function()?;
    let mut settings = raw.settings()?;
    settings.wall_clock = args.wall_clock;
    let (a, b) = raw.interval(settings.precision)?;
    let (n, m) = (raw.exponent("n")?, raw.exponent("m")?);
    let report = prove_inequality(&f, &a, &b, &n, &m, raw.degree()?, &settings)?;
    emit(&report.to_json(), raw.out().as_deref())?;
    match report.failed_stage {
        Some(stage) => eprintln!("{} at {stage}: {}", report.verdict, report.message),
        None => eprintln!("{}", report.verdict),
    }
    Ok(report.exit_code() as u8)
}

fn run_minimax(args: &ProblemArgs) -> Result<u8> {
    let raw = args.raw()?;
    let f = raw.function()?;
    let precision = raw.precision()?;
    let (a, b) = raw.interval(precision)?;
    let k = raw.degree()?;
    let remez = raw.remez()?;
    let ctx = EvalContext {
        precision,
        quad: raw.quad()?,
    };
    let digits = precision.digits();
    let dec = |x: &Float| to_decimal_string(x, digits);
    let decs = |v: &[Float]| v.iter().map(dec).collect::<Vec<_>>();
    let g = |x: &Float| f.evaluate_with(x, &ctx);
    let header = json!({
        "function": f.source_text(),
        "interval": [dec(&a), dec(&b)],
        "degree": k,
        "precision_digits": digits,
        "tol": remez.tol,
        "grid_multiplier": remez.grid_multiplier,
    });
    let (body, code) = match minimax(&g, &a, &b, k, &remez, precision) {
        Ok(r) => {
            let scale = r.polynomial.coefficients()[0].clone().abs();
            let floor = absolute_floor(precision, &scale);
            let check = verify_equioscillation(&r, &g, 1e-6, &floor)?;
            let body = json!({
                "converged": true,
                "delta_hat": dec(&r.delta_hat),
                "lower_bound": dec(&r.lower_bound),
                "upper_bound": dec(&r.upper_bound),
                "nodes": decs(&r.nodes),
                "node_residuals": decs(&r.node_residuals),
                "polynomial_coefficients": decs(r.polynomial.coefficients()),
                "monomial_coefficients": decs(&r.polynomial.to_monomial()),
                "iterations": r.iterations,
                "levelled_error_history": decs(&r.levelled_error_history),
                "equioscillation": {
                    "passed": check.passed,
                    "relative_spread": dec(&check.relative_spread),
                    "offending": check.offending,
                },
            });
            (body, if check.passed { 0 } else { 2 })
        }
        Err(e) => (json!({ "converged": false, "error": e.to_string() }), 2),
    };
    let mut doc = header;
    if let (Value::Object(h), Value::Object(b)) = (&mut doc, body) {
        h.extend(b);
    }
    emit(&serde_json::to_string_pretty(&doc)?, raw.out().as_deref())?;
    Ok(code)
}

fn run_kurepa(args: &KurepaArgs) -> Result<u8> {
    let precision = Precision::new(args.precision)?;
    let config = ineqcert::quad::QuadConfig::default();
    let digits = precision.digits();
    if args.inflection {
        return match find_inflection_with(precision, &config) {
            Ok(c) => {
                println!("inflection {}", to_decimal_string(&c, digits));
                Ok(0)
            }
            Err(e) => {
                eprintln!("error: {e}");
                Ok(2)
            }
        };
    }
    let text = args.x.as_deref().expect("clap requires x");
    let x = precision.parse_decimal(text)?;
    if x < 0 {
        bail!("x = {text} must be non-negative");
    }
    match kurepa_family(&x, args.order, precision, &config) {
        Ok(r) => {
            println!("value {}", to_decimal_string(&r.value, digits));
            println!("error_bound {}", to_sci_string(&r.error_bound));
            Ok(0)
        }
        Err(
            e @ (QuadError::NegativeArgument
            | QuadError::UnsupportedOrder(_)
            | QuadError::BadConfig(_)),
        ) => Err(e.into()),
        Err(e) => {
            eprintln!("error: {e}");
            Ok(2)
        }
    }
}

fn run_limits(args: &ProblemArgs) -> Result<u8> {
    let raw = args.raw()?;
    let f = raw.function()?;
    let precision = raw.precision()?;
    let (a, b) = raw.interval(precision)?;
    let (n, m) = (raw.exponent("n")?, raw.exponent("m")?);
    let ctx = EvalContext {
        precision,
        quad: raw.quad()?,
    };
    let digits = precision.digits();
    let dec = |x: &Float| to_decimal_string(x, digits);
    let mut ok = true;
    let mut per_endpoint = serde_json::Map::new();
    for endpoint in [Endpoint::A, Endpoint::B] {
        let exponent = if endpoint == Endpoint::A { &n } else { &m };
        let taylor = if exponent.denom() == &1u32 {
            match taylor_limit(&f, &a, &b, &n, &m, endpoint, &ctx) {
                Ok(v) => json!({ "value": dec(&v) }),
                Err(e) => json!({ "error": e.to_string() }),
            }
        } else {
            json!({ "error": "exponent is not an integer" })
        };
        let numeric = match numeric_limit(&f, &a, &b, &n, &m, endpoint, &ctx) {
            Ok(l) => json!({
                "value": dec(&l.value),
                "growth_exponent": l.growth_exponent,
                "levels_used": l.levels_used,
            }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        let chosen = match endpoint_limit(&f, &a, &b, &n, &m, endpoint, &ctx, None) {
            Ok(l) => json!({ "value": dec(&l.value), "method": l.method }),
            Err(e) => {
                ok = false;
                json!({ "error": e.to_string() })
            }
        };
        let name = if endpoint == Endpoint::A {
            "alpha"
        } else {
            "beta"
        };
        per_endpoint.insert(
            name.to_string(),
            json!({ "selected": chosen, "taylor": taylor, "numeric": numeric }),
        );
    }
    let doc = json!({
        "function": f.source_text(),
        "interval": [dec(&a), dec(&b)],
        "n": n.to_string(),
        "m": m.to_string(),
        "precision_digits": digits,
        "alpha": per_endpoint["alpha"],
        "beta": per_endpoint["beta"],
    });
    emit(&serde_json::to_string_pretty(&doc)?, raw.out().as_deref())?;
    Ok(if ok { 0 } else { 2 })
}
