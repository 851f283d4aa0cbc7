use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypercontact::contact::{chow_path, horizontality_residual, plan_endpoint, ContactPoint};
use hypercontact::experiment::{
    classify_points, read_points, run_experiment, validate_config, write_artifacts, write_orbits, Suite,
};
use hypercontact::fatou_bieberbach::PushOutState;
use hypercontact::{Error, Result};
use num_complex::Complex64;
use serde_json::json;

#[derive(Parser)]
#[command(name = "hypercontact", version, about = "Contact hyperbolicity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a config file and print it with all defaults filled in.
    Validate { config: PathBuf },
    /// Run a verification suite and write report.json (plus orbit data for the push-out).
    Run {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `out_dir` from the config, then `./out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify points against a stored push-out construction; CSV on stdout.
    Classify {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        points: PathBuf,
    },
    /// Plan an exactly horizontal path between two points; JSON on stdout.
    PlanPath {
        /// Comma separated coordinates x1,y1,...,xn,yn,z; complex entries as `a+bi`.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        #[arg(long, allow_hyphen_values = true)]
        to: String,
    },
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let t = t.replace('j', "i");
    let bad = || Error::Parse(format!("not a complex number: {s:?}"));
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not part of an exponent
        let cut = body
            .char_indices()
            .filter(|&(k, c)| k > 0 && (c == '+' || c == '-') && !matches!(body.as_bytes()[k - 1], b'e' | b'E'))
            .map(|(k, _)| k)
            .last();
        let (re, im) = match cut {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        Ok(Complex64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
    } else {
        Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0))
    }
}

fn parse_point(s: &str) -> Result<ContactPoint> {
    let c = s.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
    ContactPoint::from_coords(&c)
}

fn complex_json(z: Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

fn plan_path(from: &str, to: &str) -> Result<serde_json::Value> {
    let p = parse_point(from)?;
    let q = parse_point(to)?;
    let plan = chow_path(&p, &q)?;
    let end = plan_endpoint(&plan, &p);
    let err = end.to_coords().iter().zip(q.to_coords()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let segments: Vec<_> = plan
        .segments
        .iter()
        .map(|s| {
            let comps: Vec<Vec<_>> =
                s.curve.components().iter().map(|c| c.coeffs().iter().map(|&z| complex_json(z)).collect()).collect();
            json!({
                "block": s.block + 1,
                "axis": s.axis,
                "exactly_horizontal": horizontality_residual(&s.curve).is_zero(),
                "coefficients": comps,
            })
        })
        .collect();
    Ok(json!({
        "from": p.to_coords().into_iter().map(complex_json).collect::<Vec<_>>(),
        "to": q.to_coords().into_iter().map(complex_json).collect::<Vec<_>>(),
        "segments": segments,
        "endpoint_error": err,
    }))
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("HYPERCONTACT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::ConfigField { field: "HYPERCONTACT_THREADS".into(), message: format!("not a count: {v:?}") })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Precondition(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Validate { config } => {
            let cfg = validate_config(&config)?;
            println!("{}", cfg.to_json()?);
            Ok(0)
        }
        Command::Run { suite, config, out } => {
            let cfg = validate_config(&config)?;
            let dir = out.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let output = run_experiment(&cfg, suite)?;
            write_artifacts(&output, &dir)?;
            for c in &output.report.checks {
                println!(
                    "{} {:<36} margin {:>12.4e}  {:>9.1} ms  {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.margin,
                    c.runtime_ms,
                    c.detail
                );
            }
            println!("{} of {} checks failed; report in {}", output.report.failed, output.report.checks.len(), dir.display());
            Ok(output.report.exit_code() as u8)
        }
        Command::Classify { state, points } => {
            let state = PushOutState::from_json(&std::fs::read_to_string(state)?)?;
            let pts = read_points(std::fs::File::open(points)?, state.dim)?;
            let rows = classify_points(&state, &pts)?;
            write_orbits(&rows, state.dim, std::io::stdout().lock())?;
            Ok(0)
        }
        Command::PlanPath { from, to } => {
            println!("{}", serde_json::to_string_pretty(&plan_path(&from, &to)?)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(parse_complex("1-2i").unwrap(), Complex64::new(1.0, -2.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("2e-3+1e+2i").unwrap(), Complex64::new(2e-3, 1e2));
        assert_eq!(parse_complex("3i").unwrap(), Complex64::new(0.0, 3.0));
        assert!(parse_complex("1+").is_err());
    }
}
