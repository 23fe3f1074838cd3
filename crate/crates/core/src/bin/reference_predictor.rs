//! A predictor process for testing the line protocol.
//!
//! Reads rounds of comma-separated points, each round ended by a blank line,
//! and answers `0` or `1` per point. By default a point is positive when its
//! coordinates sum to an even number.

use std::io::{self, BufRead, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use reachset::models::{load_linear, LinearModel};
use reachset::point::parse_csv_ints;

#[derive(Debug, Parser)]
#[command(name = "reference-predictor")]
struct Args {
    /// Score points with this linear model file instead.
    #[arg(long, value_name = "FILE", conflicts_with = "echo")]
    linear: Option<PathBuf>,
    /// Answer with the value of this feature, which must be 0 or 1.
    #[arg(long, value_name = "INDEX")]
    echo: Option<usize>,
}

enum Rule {
    Parity,
    Echo(usize),
    Linear(LinearModel),
}

impl Rule {
    fn predict(&self, x: &[i64]) -> Result<bool, String> {
        match self {
            Rule::Parity => Ok(x.iter().fold(0i64, |s, v| s.wrapping_add(*v)) % 2 == 0),
            Rule::Echo(j) => match x.get(*j) {
                Some(0) => Ok(false),
                Some(1) => Ok(true),
                other => Err(format!("feature {j} is {other:?}, expected 0 or 1")),
            },
            Rule::Linear(m) => {
                if x.len() != m.dim() {
                    return Err(format!("expected {} features, got {}", m.dim(), x.len()));
                }
                Ok(m.predict(x))
            }
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let rule = if let Some(path) = args.linear {
        match std::fs::read_to_string(&path).map_err(|e| e.to_string()).and_then(|t| load_linear(&t).map_err(|e| e.to_string())) {
            Ok(m) => Rule::Linear(m),
            Err(e) => {
                eprintln!("reference-predictor: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
    } else if let Some(j) = args.echo {
        Rule::Echo(j)
    } else {
        Rule::Parity
    };

    let stdin = io::stdin().lock();
    let mut out = BufWriter::new(io::stdout().lock());
    for line in stdin.lines() {
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                eprintln!("reference-predictor: {e}");
                return ExitCode::from(2);
            }
        };
        if line.is_empty() {
            if out.flush().is_err() {
                return ExitCode::from(2);
            }
            continue;
        }
        let answer = parse_csv_ints(&line)
            .map_err(|e| e.to_string())
            .and_then(|x| rule.predict(&x));
        match answer {
            Ok(v) => {
                if writeln!(out, "{}", u8::from(v)).is_err() {
                    return ExitCode::from(2);
                }
            }
            Err(e) => {
                eprintln!("reference-predictor: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let _ = out.flush();
    ExitCode::SUCCESS
}
