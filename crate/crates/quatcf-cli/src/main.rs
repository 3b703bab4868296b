//! Command-line front end: expansion, identity verification, heights,
//! quadratic certification and the non-terminating family trace, with
//! machine-readable JSON output and exact value strings throughout.
//!
//! Exit codes: 0 success (including truncated expansions and inconclusive
//! certifications), 2 input error, 3 admissibility failure, 4 internal
//! invariant alarm.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use quatcf::arith::parse_rational;
use quatcf::{
    build_periodic_quadratic, certify_no_root, convergence_profile, convergents,
    counterexample_trace, expand, height, maximal_order_pq, subfield_roots, verify_identities,
    Certification, Error, FloorFunction, Limits, Quat, SpecialType,
};

#[derive(Parser)]
#[command(name = "quatcf", version, about = "Exact p-adic continued fractions over rational quaternion algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Discriminant, ramified places and maximal-order basis of B = (q, p / Q).
    Algebra {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
    },
    /// Continued-fraction expansion of an element, with the identity report.
    Expand {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        /// Element as "x0,x1,x2,x3" in standard-basis coordinates.
        #[arg(long)]
        elem: String,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Bit budget per complete-quotient coordinate.
        #[arg(long)]
        bit_budget: Option<u64>,
    },
    /// Root-exclusion certificate for X^2 - aX - 1 with the subfield oracle.
    Certify {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        elem: String,
        /// Interval width target, e.g. "1/18446744073709551616".
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Adelic height of an element.
    Height {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        elem: String,
        #[arg(long)]
        epsilon: Option<String>,
    },
    /// Expansion of (1/q)(i + ij/p) with the Bezout replay, step by step.
    Counterexample {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Expansion plus identity suite plus convergence profile.
    Verify {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        elem: String,
        #[arg(long)]
        max_steps: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(value) => {
            match cli.output {
                Output::Json => println!("{}", serde_json::to_string_pretty(&value).expect("serializable")),
                Output::Text => println!("{}", render_text(&value)),
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::AdmissibilityFailure(_) => 3,
        Error::Mismatch(_) | Error::Internal(_) => 4,
        _ => 2,
    }
}

fn default_max_steps() -> usize {
    std::env::var("QUATCF_MAX_STEPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(64)
}

fn default_epsilon() -> String {
    // 2^-64
    "1/18446744073709551616".to_string()
}

fn limits(max_steps: Option<usize>, bit_budget: Option<u64>) -> Limits {
    let defaults = Limits::default();
    Limits {
        max_steps: max_steps.unwrap_or_else(default_max_steps),
        coeff_bit_budget: bit_budget.unwrap_or(defaults.coeff_bit_budget),
    }
}

fn run(command: &Command) -> Result<serde_json::Value, Error> {
    match command {
        Command::Algebra { p, q } => {
            let (alg, order) = maximal_order_pq(*p, *q)?;
            let mut value = order.to_json();
            let obj = value.as_object_mut().expect("object");
            obj.insert("discriminant".into(), alg.discriminant().to_string().into());
            obj.insert(
                "ramified".into(),
                alg.ramified_primes()
                    .iter()
                    .map(|r| r.to_string())
                    .collect::<Vec<_>>()
                    .into(),
            );
            Ok(value)
        }
        Command::Expand { p, q, elem, max_steps, bit_budget } => {
            let t = SpecialType::new(*p, *q)?;
            let x: Quat = elem.parse()?;
            let f = FloorFunction::special(t);
            let exp = expand(&x, &f, limits(*max_steps, *bit_budget));
            let table = convergents(&exp.partial_quotients, exp.algebra(), Some(&x))?;
            let report = verify_identities(&x, &exp, &table);
            let mut value = exp.to_json();
            value
                .as_object_mut()
                .expect("object")
                .insert("identities".into(), report.to_json());
            Ok(value)
        }
        Command::Certify { p, q, elem, epsilon } => {
            let t = SpecialType::new(*p, *q)?;
            let a: Quat = elem.parse()?;
            let eps = parse_rational(&epsilon.clone().unwrap_or_else(default_epsilon))?;
            let poly = build_periodic_quadratic(std::slice::from_ref(&a), &t, &eps)?;
            let verdict = certify_no_root(&poly);
            let oracle: serde_json::Value = if a.is_scalar() {
                serde_json::Value::Null
            } else {
                subfield_roots(&a, t.algebra())?
                    .iter()
                    .map(|r| r.to_string())
                    .collect::<Vec<_>>()
                    .into()
            };
            Ok(serde_json::json!({
                "polynomial": poly.to_json(),
                "verdict": match verdict {
                    Certification::Certified => "certified",
                    Certification::Inconclusive => "inconclusive",
                },
                "mu": poly.mu().to_json(),
                "oracle_roots": oracle,
            }))
        }
        Command::Height { p, q, elem, epsilon } => {
            let (alg, order) = maximal_order_pq(*p, *q)?;
            let x: Quat = elem.parse()?;
            let eps = parse_rational(&epsilon.clone().unwrap_or_else(default_epsilon))?;
            Ok(height(&x, &alg, &order, &eps)?.to_json())
        }
        Command::Counterexample { p, q, steps } => {
            Ok(counterexample_trace(*p, *q, *steps)?.to_json())
        }
        Command::Verify { p, q, elem, max_steps } => {
            let t = SpecialType::new(*p, *q)?;
            let x: Quat = elem.parse()?;
            let f = FloorFunction::special(t);
            let exp = expand(&x, &f, limits(*max_steps, None));
            let table = convergents(&exp.partial_quotients, exp.algebra(), Some(&x))?;
            let report = verify_identities(&x, &exp, &table);
            let profile = convergence_profile(&x, &exp)?;
            let mut value = exp.to_json();
            let obj = value.as_object_mut().expect("object");
            obj.insert("identities".into(), report.to_json());
            obj.insert(
                "convergence_profile".into(),
                profile.iter().map(|v| v.to_string()).collect::<Vec<_>>().into(),
            );
            Ok(value)
        }
    }
}

/// Minimal human-readable rendering: top-level scalars and short lists on
/// one line each, nested values as compact JSON.
fn render_text(value: &serde_json::Value) -> String {
    match value.as_object() {
        Some(map) => {
            let mut out = String::new();
            for (k, v) in map {
                let line = match v {
                    serde_json::Value::String(s) => s.clone(),
                    other => serde_json::to_string(other).expect("serializable"),
                };
                out.push_str(&format!("{k}: {line}\n"));
            }
            out.trim_end().to_string()
        }
        None => value.to_string(),
    }
}
