use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use rayon::prelude::*;

use padic_lab::constructors::{
    build_digit_rule, build_factorial, build_lacunary, parse_mu_seq, parse_rational,
    schneider_exponent_driven, surgery_transform, DigitRule, LacunarySpec, SurgerySpec,
};
use padic_lab::exponents::report;
use padic_lab::format::{
    chain_from_csv, chain_to_csv, checks_to_json, digits_from_json, digits_to_json, ledger_to_csv,
    report_from_json, report_to_json,
};
use padic_lab::lattice::{chain, oracle_chain, BestApproxChain, Norm};
use padic_lab::verify::{
    all_passed, check_chain_bounds, check_endlich, check_korollar, check_padicle, diagnose_neu,
    neu_check, DEFAULT_TOLERANCE,
};
use padic_lab::{Error, PAdicNumber};

#[derive(Parser)]
#[command(
    name = "padic-lab",
    version,
    about = "Best approximations and irrationality exponents of p-adic numbers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a p-adic number and write it as digit JSON.
    #[command(subcommand)]
    Construct(Construct),
    /// Compute a best approximation chain (CSV).
    Approx(ApproxArgs),
    /// Estimate the four exponents from chains (JSON report).
    Estimate(EstimateArgs),
    /// Check the exponent inequalities on a report and optionally a chain.
    Verify(VerifyArgs),
    /// Estimate exponents over a parameter grid (CSV).
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Construct {
    /// Σ p^{a_k} over a growth sequence.
    Lacunary {
        #[arg(long)]
        p: u64,
        /// `pow:<d>` or `list:<a0,a1,...>`.
        #[arg(long)]
        growth: String,
        #[arg(long)]
        terms: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Σ p^{k!} for k < terms.
    Factorial {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        terms: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Digits from a rule.
    Rule {
        #[arg(long)]
        p: u64,
        /// `thue-morse` or `random`.
        #[arg(long)]
        name: String,
        /// Seed for `random`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        precision: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Schneider continued fraction driven by target exponents.
    Schneider {
        #[arg(long)]
        p: u64,
        /// `const:<r>`, `list:<r1,r2,...>` or `blocks:<eps>:<spike>`.
        #[arg(long)]
        mu_seq: String,
        #[arg(long)]
        steps: usize,
        /// Lower margin: every μ_n must be at least 2 + eps.
        #[arg(long, default_value = "1/2")]
        eps: String,
        /// First exponent g_1.
        #[arg(long, default_value_t = 1)]
        g1: u64,
        /// Also write the per-step ledger as CSV.
        #[arg(long)]
        ledger: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Digit surgery on a source number.
    Surgery {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        t: String,
        #[arg(long)]
        mu: String,
        #[arg(long, default_value_t = 1)]
        c_offset: u64,
        /// Source digit JSON.
        #[arg(long)]
        source: PathBuf,
        /// Source positions σ_1 < σ_2 < ... (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        sigma: Vec<u64>,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct ApproxArgs {
    /// Digit JSON of ξ.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "sup")]
    norm: Norm,
    /// Highest valuation level to solve; defaults to the precision.
    #[arg(long)]
    max_level: Option<u64>,
    /// Use the brute-force oracle (requires --height-bound).
    #[arg(long, requires = "height_bound")]
    oracle: bool,
    /// Keep entries with height (sup) or |xy| (mult) at most this bound.
    #[arg(long)]
    height_bound: Option<u64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct EstimateArgs {
    /// Chain CSV, read with the norm given by --norm.
    #[arg(long)]
    chain: Option<PathBuf>,
    #[arg(long, default_value = "sup")]
    norm: Norm,
    /// Multiplicative chain CSV, combined with a sup --chain.
    #[arg(long)]
    mult_chain: Option<PathBuf>,
    /// The prime of the chains.
    #[arg(long)]
    p: u32,
    /// Fraction of the exact prefix dropped before taking tail extremes.
    #[arg(long, default_value_t = 0.2)]
    burn_in: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    report: PathBuf,
    /// Chain CSV for the exact checks.
    #[arg(long)]
    chain: Option<PathBuf>,
    #[arg(long, default_value = "sup")]
    norm: Norm,
    /// The prime of the chain (required with --chain).
    #[arg(long)]
    p: Option<u32>,
    /// `all` or a comma list of bounds, endlich, neu, padicle, korollar.
    #[arg(long, default_value = "all")]
    checks: String,
    /// Include the exact chain checks in `all`.
    #[arg(long)]
    exact_checks: bool,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct SweepArgs {
    /// Only `lacunary` is supported.
    #[arg(long, default_value = "lacunary")]
    family: String,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    d_from: f64,
    #[arg(long)]
    d_to: f64,
    #[arg(long, default_value_t = 0.5)]
    d_step: f64,
    #[arg(long)]
    terms: usize,
    #[arg(long, default_value_t = 0.2)]
    burn_in: f64,
    #[command(flatten)]
    out: Output,
}

enum Failure {
    /// Bad input or a failed computation: exit 2.
    Error(Error),
    /// Verification ran and some check failed: exit 1.
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(Error::Io(e))
    }
}

type Run = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

fn write(out: &Output, text: &str) -> Run {
    match &out.output {
        Some(path) => fs::write(path, text)?,
        None => {
            // a closed pipe (e.g. `| head`) is not an error
            if let Err(e) = io::stdout().lock().write_all(text.as_bytes()) {
                if e.kind() != io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct(c) => construct(c),
        Command::Approx(a) => approx(a),
        Command::Estimate(a) => estimate(a),
        Command::Verify(a) => verify(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn construct(c: Construct) -> Run {
    let (xi, out) = match c {
        Construct::Lacunary {
            p,
            growth,
            terms,
            out,
        } => (
            build_lacunary(&LacunarySpec::from_growth(p, &growth, terms)?)?,
            out,
        ),
        Construct::Factorial { p, terms, out } => (build_factorial(p, terms)?, out),
        Construct::Rule {
            p,
            name,
            seed,
            precision,
            out,
        } => {
            let rule = match name.parse::<DigitRule>()? {
                DigitRule::Random(_) => DigitRule::Random(seed),
                r => r,
            };
            (build_digit_rule(p, &rule, precision)?, out)
        }
        Construct::Schneider {
            p,
            mu_seq,
            steps,
            eps,
            g1,
            ledger,
            out,
        } => {
            let mus = parse_mu_seq(&mu_seq, steps)?;
            let (state, xi) = schneider_exponent_driven(p, &mus, steps, parse_rational(&eps)?, g1)?;
            if let Some(path) = ledger {
                fs::write(path, ledger_to_csv(&state))?;
            }
            (xi, out)
        }
        Construct::Surgery {
            p,
            t,
            mu,
            c_offset,
            source,
            sigma,
            out,
        } => {
            let zeta = digits_from_json(&read(&source)?)?;
            if zeta.p() as u64 != p {
                return Err(Error::InvalidSpec(format!(
                    "source is {}-adic, not {p}-adic",
                    zeta.p()
                ))
                .into());
            }
            let spec = SurgerySpec {
                t: parse_rational(&t)?,
                mu: parse_rational(&mu)?,
                c: c_offset,
                sigma,
            };
            (surgery_transform(&zeta, &spec)?.xi, out)
        }
    };
    write(&out, &digits_to_json(&xi))
}

fn notices(c: &BestApproxChain) {
    if c.precision_ceiling < c.precision as u64 {
        eprintln!(
            "notice: level budget stopped the chain at valuation {} of {}",
            c.precision_ceiling, c.precision
        );
    }
    if c.is_censored() {
        eprintln!(
            "notice: last entry reaches the precision; its valuation is only a lower bound (≥ {})",
            c.entries.last().map_or(0, |e| e.val.value())
        );
    }
}

fn approx(a: ApproxArgs) -> Run {
    let xi: PAdicNumber = digits_from_json(&read(&a.input)?)?;
    let c = if a.oracle {
        oracle_chain(&xi, a.norm, a.height_bound.expect("required by clap"))?
    } else {
        let mut c = chain(&xi, a.norm, a.max_level.unwrap_or(xi.precision() as u64))?;
        if let Some(b) = a.height_bound {
            c.entries = c.restricted(&BigUint::from(b));
        }
        c
    };
    notices(&c);
    write(&a.out, &chain_to_csv(&c))
}

fn load_chain(path: &Path, norm: Norm, p: u32) -> Result<BestApproxChain, Error> {
    let text = read(path)?;
    let c = chain_from_csv(&text, norm, p, 0)?;
    let precision = c.precision_ceiling as usize;
    Ok(BestApproxChain { precision, ..c })
}

fn estimate(a: EstimateArgs) -> Run {
    let first = a
        .chain
        .as_deref()
        .map(|path| load_chain(path, a.norm, a.p))
        .transpose()?;
    let mult = a
        .mult_chain
        .as_deref()
        .map(|path| load_chain(path, Norm::Mult, a.p))
        .transpose()?;
    let (sup, mult) = match first {
        Some(c) if c.norm == Norm::Mult => {
            if mult.is_some() {
                return Err(Error::InvalidSpec(
                    "--mult-chain needs --chain read with --norm sup".into(),
                )
                .into());
            }
            (None, Some(c))
        }
        other => (other, mult),
    };
    let r = report(sup.as_ref(), mult.as_ref(), a.burn_in)?;
    if r.precision_limited {
        eprintln!("notice: chain is censored; estimates use its exact prefix");
    }
    write(&a.out, &report_to_json(&r))
}

const CHECK_GROUPS: [&str; 5] = ["bounds", "endlich", "neu", "padicle", "korollar"];

fn verify(a: VerifyArgs) -> Run {
    let r = report_from_json(&read(&a.report)?)?;
    let chain = match &a.chain {
        Some(path) => {
            let p =
                a.p.ok_or_else(|| Error::InvalidSpec("--chain needs --p".into()))?;
            Some(load_chain(path, a.norm, p)?)
        }
        None => None,
    };
    let groups: Vec<&str> = if a.checks == "all" {
        let mut g = vec!["bounds", "endlich", "neu"];
        if a.exact_checks {
            g.push("padicle");
            if a.norm == Norm::Sup {
                g.push("korollar");
            }
        }
        g
    } else {
        a.checks.split(',').map(str::trim).collect()
    };
    if let Some(bad) = groups.iter().find(|g| !CHECK_GROUPS.contains(g)) {
        return Err(Error::InvalidSpec(format!("unknown check group `{bad}`")).into());
    }
    let need_chain = |name: &str| {
        chain
            .as_ref()
            .ok_or_else(|| Error::InvalidSpec(format!("`{name}` needs --chain")))
    };
    let mut results = Vec::new();
    for g in groups {
        match g {
            "bounds" => results.extend(check_chain_bounds(&r, a.tolerance)),
            "endlich" => results.extend(check_endlich(&r, a.tolerance)),
            "neu" => match (&chain, a.norm) {
                (Some(c), Norm::Mult) => results.push(neu_check(&diagnose_neu(
                    c,
                    r.hat_mu_times,
                    r.burn_in,
                    a.tolerance,
                ))),
                _ => eprintln!("notice: `neu` needs a multiplicative --chain; skipped"),
            },
            "padicle" => {
                let c = need_chain(g)?;
                results.push(check_padicle(&c.entries, c.p));
            }
            "korollar" => results.extend(check_korollar(need_chain(g)?)?),
            _ => unreachable!("validated above"),
        }
    }
    write(&a.out, &checks_to_json(&results))?;
    if all_passed(&results) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn sweep_row(p: u64, d: f64, terms: usize, burn_in: f64) -> Result<String, Error> {
    let spec = LacunarySpec::from_growth(p, &format!("pow:{d}"), terms)?;
    let xi = build_lacunary(&spec)?;
    let level = xi.precision() as u64;
    let r = report(
        Some(&chain(&xi, Norm::Sup, level)?),
        Some(&chain(&xi, Norm::Mult, level)?),
        burn_in,
    )?;
    let f = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.6}"));
    Ok(format!(
        "{d},{},{},{},{d},{}\n",
        f(r.mu),
        f(r.mu_times),
        f(r.hat_mu_times),
        2.0 * d
    ))
}

fn sweep(a: SweepArgs) -> Run {
    if a.family != "lacunary" {
        return Err(Error::InvalidSpec(format!("unsupported family `{}`", a.family)).into());
    }
    if !(a.d_step > 0.0) || a.d_to < a.d_from {
        return Err(Error::InvalidSpec("need d-step > 0 and d-from ≤ d-to".into()).into());
    }
    let count = ((a.d_to - a.d_from) / a.d_step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| a.d_from + i as f64 * a.d_step).collect();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("PADIC_LAB_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
    {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    let rows: Vec<String> = pool.install(|| {
        grid.par_iter()
            .map(|&d| sweep_row(a.p, d, a.terms, a.burn_in))
            .collect::<Result<_, _>>()
    })?;
    let mut text =
        String::from("d,mu_est,mu_times_est,hat_mu_times_est,predicted_mu,predicted_mu_times\n");
    text.extend(rows);
    write(&a.out, &text)
}
