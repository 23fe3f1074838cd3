//! Command-line recourse audit.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{ArgGroup, Parser};

use reachset::audit::{run_audit, AuditConfig, AuditOptions, ModelArg};
use reachset::reachable::{Limits, DEFAULT_MAX_POINTS};

/// Audit a classifier for recourse over a dataset.
///
/// Rows the model denies are checked for a reachable point with a
/// desirable prediction. Reports go to --out as per_point.csv,
/// summary.json and rset_sizes.csv.
#[derive(Debug, Parser)]
#[command(name = "audit", version)]
#[command(group(ArgGroup::new("model").required(true).args(["model_linear", "model_cmd"])))]
struct Args {
    /// Action-set specification file.
    #[arg(long, value_name = "S")]
    spec: PathBuf,
    /// Dataset: CSV with the spec's features as header, optional `y` column.
    #[arg(long, value_name = "D")]
    data: PathBuf,
    /// Linear model file (`b=<intercept>` and `w=<weights>` lines).
    #[arg(long, value_name = "F")]
    model_linear: Option<PathBuf>,
    /// Shell command speaking the line-based predictor protocol.
    #[arg(long, value_name = "CMD")]
    model_cmd: Option<String>,
    /// Reachable sets saved by an earlier run.
    #[arg(long, value_name = "PATH")]
    rdb: Option<PathBuf>,
    /// Save the reachable sets after this run.
    #[arg(long, value_name = "PATH")]
    save_rdb: Option<PathBuf>,
    /// Actions proposed by another recourse method, `row_index,a_1,...,a_d`.
    #[arg(long, value_name = "M")]
    method_outputs: Option<PathBuf>,
    /// Largest reachable set to enumerate per row.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_MAX_POINTS)]
    max_points: usize,
    /// Time limit per reachable set, in seconds.
    #[arg(long, value_name = "SECS", default_value_t = 60.0)]
    max_time: f64,
    /// Worker threads.
    #[arg(long, value_name = "K", default_value_t = 1)]
    workers: usize,
    /// Directory for the report files.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Audit every row, not only denied ones.
    #[arg(long)]
    all_points: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if !(args.max_time.is_finite() && args.max_time > 0.0) {
        eprintln!("error: --max-time must be a positive number of seconds");
        return ExitCode::from(1);
    }
    if args.max_points == 0 || args.workers == 0 {
        eprintln!("error: --max-points and --workers must be positive");
        return ExitCode::from(1);
    }
    let model = match (args.model_linear, args.model_cmd) {
        (Some(path), None) => ModelArg::LinearFile(path),
        (None, Some(cmd)) => ModelArg::Command(cmd),
        _ => unreachable!("clap enforces exactly one model"),
    };
    let cfg = AuditConfig {
        spec: args.spec,
        data: args.data,
        model,
        rdb: args.rdb,
        save_rdb: args.save_rdb,
        method_outputs: args.method_outputs,
        out: args.out,
        options: AuditOptions {
            limits: Limits {
                max_points: args.max_points,
                max_time: Duration::from_secs_f64(args.max_time),
                ..Limits::default()
            },
            workers: args.workers,
            all_points: args.all_points,
            cache: true,
        },
    };
    match run_audit(&cfg) {
        Ok(report) => {
            let a = &report.aggregates;
            println!(
                "rows={} denied={} recourse={} no_recourse={} abstain={} solver_calls={}",
                a.n_rows, a.n_denied, a.n_recourse, a.n_no_recourse, a.n_abstain, report.stats.solver_calls
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
