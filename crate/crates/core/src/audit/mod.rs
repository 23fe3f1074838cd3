//! Dataset audits: which denied rows can reach a desirable prediction.

mod input;
mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::SystemTime;

use thiserror::Error;

use crate::actionset::{parse_action_set, ActionSetError, ActionSetSpec};
use crate::models::{load_linear, ModelError, ModelSource};
use crate::point::{Action, Point};
use crate::reachable::{DbError, Limits, ReachableDb, ReachableError};
use crate::verify::{classify_method_output, verify_point, VerificationResult, VerifyError};

pub use input::{ingest_dataset, parse_method_outputs, Dataset, InputError, LABEL_COLUMN};
pub use report::{read_per_point_verdicts, Aggregates, AuditReport, AuditStats, MethodEval, PointResult};

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Spec {
        path: PathBuf,
        #[source]
        source: ActionSetError,
    },
    #[error("{}: {source}", path.display())]
    Dataset {
        path: PathBuf,
        #[source]
        source: InputError,
    },
    #[error("{}: {source}", path.display())]
    ModelFile {
        path: PathBuf,
        #[source]
        source: ModelError,
    },
    #[error("{}: {source}", path.display())]
    MethodOutputs {
        path: PathBuf,
        #[source]
        source: InputError,
    },
    #[error("{}: {source}", path.display())]
    Db {
        path: PathBuf,
        #[source]
        source: DbError,
    },
    #[error("{0}")]
    InvalidOption(String),
    #[error("predicting row {row}: {source}")]
    Predict {
        row: usize,
        #[source]
        source: ModelError,
    },
    #[error("starting model: {0}")]
    ModelStart(#[source] ModelError),
    #[error("building reachable sets: {0}")]
    Reachable(#[from] ReachableError),
    #[error("verifying row {row}: {source}")]
    Verify {
        row: usize,
        #[source]
        source: VerifyError,
    },
    #[error("writing {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AuditError {
    /// 1 for unusable inputs, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            AuditError::Read { .. }
            | AuditError::Spec { .. }
            | AuditError::Dataset { .. }
            | AuditError::ModelFile { .. }
            | AuditError::MethodOutputs { .. }
            | AuditError::InvalidOption(_) => 1,
            AuditError::Db { .. }
            | AuditError::Predict { .. }
            | AuditError::ModelStart(_)
            | AuditError::Reachable(_)
            | AuditError::Verify { .. }
            | AuditError::Write { .. } => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AuditOptions {
    pub limits: Limits,
    /// Threads for reachable-set construction and verification.
    pub workers: usize,
    /// Audit every row, not only the ones the model denies.
    pub all_points: bool,
    /// Memoize model answers within each worker.
    pub cache: bool,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            limits: Limits::default(),
            workers: 1,
            all_points: false,
            cache: true,
        }
    }
}

/// Verified rows of one worker, with its query and round-trip counts.
type WorkerOutcome = (Vec<(usize, VerificationResult)>, u64, u64);

/// Audits `dataset` against `model`, growing `db` with any reachable sets it
/// does not hold yet.
///
/// Reachable sets are built for every row, whether or not it is audited, so
/// the same database serves later audits of other models without new
/// enumeration.
pub fn audit(
    spec: &ActionSetSpec,
    dataset: &Dataset,
    model: &ModelSource,
    db: &mut ReachableDb,
    method_outputs: Option<&BTreeMap<usize, Option<Action>>>,
    opts: &AuditOptions,
) -> Result<AuditReport, AuditError> {
    if opts.workers == 0 {
        return Err(AuditError::InvalidOption("workers must be at least 1".into()));
    }
    let mut stats = AuditStats::default();

    let mut handle = model.open(spec.dim(), opts.cache).map_err(AuditError::ModelStart)?;
    let predictions = handle.predict_batch(&dataset.rows).map_err(|source| AuditError::Predict {
        row: first_bad_row(&dataset.rows, spec.dim()),
        source,
    })?;
    stats.model_queries += handle.stats().forwarded;
    stats.model_round_trips += handle.stats().round_trips;
    drop(handle);

    let before = db.stats().clone();
    db.extend(spec, &dataset.rows, &opts.limits, opts.workers)?;
    let after = db.stats();
    stats.enumerations = after.enumerations - before.enumerations;
    stats.solver_calls = after.solves - before.solves;
    stats.translated_sets = after.translated - before.translated;
    stats.loaded_sets = after.loaded;

    let targets: Vec<usize> = (0..dataset.len())
        .filter(|&i| opts.all_points || !predictions[i])
        .collect();
    let n_denied = predictions.iter().filter(|&&p| !p).count();

    let chunk = targets.len().div_ceil(opts.workers).max(1);
    let db_ref: &ReachableDb = db;
    let outcomes: Vec<Result<WorkerOutcome, AuditError>> = std::thread::scope(|s| {
        let jobs: Vec<_> = targets
            .chunks(chunk)
            .map(|rows| {
                let predictions = &predictions;
                s.spawn(move || {
                    let mut h = model.open(spec.dim(), opts.cache).map_err(AuditError::ModelStart)?;
                    let mut out = Vec::with_capacity(rows.len());
                    for &row in rows {
                        let x = &dataset.rows[row];
                        h.prime(x, predictions[row])
                            .map_err(|source| AuditError::Predict { row, source })?;
                        let rset = db_ref.get(x).expect("reachable set built for every row");
                        let result = verify_point(rset, &mut h).map_err(|source| AuditError::Verify { row, source })?;
                        out.push((row, result));
                    }
                    Ok((out, h.stats().forwarded, h.stats().round_trips))
                })
            })
            .collect();
        jobs.into_iter().map(|j| j.join().expect("worker panicked")).collect()
    });

    let mut per_point = Vec::with_capacity(targets.len());
    for outcome in outcomes {
        let (results, forwarded, round_trips) = outcome?;
        stats.model_queries += forwarded;
        stats.model_round_trips += round_trips;
        for (row, result) in results {
            let x = &dataset.rows[row];
            let rset = db.get(x).expect("reachable set built for every row");
            let method_output = match method_outputs {
                Some(m) => {
                    let proposed = m.get(&row).and_then(|a| a.as_ref());
                    Some(
                        classify_method_output(spec, x, proposed, &result)
                            .map_err(|source| AuditError::Verify { row, source })?,
                    )
                }
                None => None,
            };
            per_point.push(PointResult {
                row,
                anchor: x.clone(),
                prediction: predictions[row],
                verdict: result.verdict,
                witness: result.witness,
                rset_size: rset.len(),
                complete: rset.is_complete(),
                method_output,
            });
        }
    }
    per_point.sort_by_key(|p| p.row);
    Ok(AuditReport::new(
        per_point,
        dataset.len(),
        n_denied,
        method_outputs.is_some(),
        stats,
    ))
}

fn first_bad_row(rows: &[Point], dim: usize) -> usize {
    rows.iter().position(|r| r.dim() != dim).unwrap_or(0)
}

/// Where the audited model comes from on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelArg {
    LinearFile(PathBuf),
    Command(String),
}

#[derive(Debug, Clone)]
pub struct AuditConfig {
    pub spec: PathBuf,
    pub data: PathBuf,
    pub model: ModelArg,
    /// Saved reachable sets to start from.
    pub rdb: Option<PathBuf>,
    /// Where to save the reachable sets after the run.
    pub save_rdb: Option<PathBuf>,
    pub method_outputs: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub options: AuditOptions,
}

fn read(path: &Path) -> Result<String, AuditError> {
    std::fs::read_to_string(path).map_err(|source| AuditError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads every input file, audits, and writes the report and reachable sets
/// where requested.
pub fn run_audit(cfg: &AuditConfig) -> Result<AuditReport, AuditError> {
    let spec = parse_action_set(&read(&cfg.spec)?).map_err(|source| AuditError::Spec {
        path: cfg.spec.clone(),
        source,
    })?;
    let dataset = ingest_dataset(&spec, &read(&cfg.data)?).map_err(|source| AuditError::Dataset {
        path: cfg.data.clone(),
        source,
    })?;
    let model = match &cfg.model {
        ModelArg::LinearFile(path) => {
            let bad = |source| AuditError::ModelFile {
                path: path.clone(),
                source,
            };
            let m = load_linear(&read(path)?).map_err(bad)?;
            m.check_dimension(spec.dim()).map_err(bad)?;
            ModelSource::Linear(Arc::new(m))
        }
        ModelArg::Command(cmd) => ModelSource::Command(cmd.clone()),
    };
    let method_outputs = match &cfg.method_outputs {
        Some(path) => Some(
            parse_method_outputs(&read(path)?, spec.dim(), dataset.len()).map_err(|source| {
                AuditError::MethodOutputs {
                    path: path.clone(),
                    source,
                }
            })?,
        ),
        None => None,
    };
    let mut db = match &cfg.rdb {
        Some(path) => ReachableDb::load(&spec, path).map_err(|source| AuditError::Db {
            path: path.clone(),
            source,
        })?,
        None => ReachableDb::new(&spec),
    };

    let report = audit(&spec, &dataset, &model, &mut db, method_outputs.as_ref(), &cfg.options)?;

    if let Some(path) = &cfg.save_rdb {
        db.save(path).map_err(|source| AuditError::Write {
            path: path.clone(),
            source,
        })?;
    }
    if let Some(dir) = &cfg.out {
        report
            .write(dir, &timestamp())
            .map_err(|source| AuditError::Write {
                path: dir.clone(),
                source,
            })?;
    }
    Ok(report)
}

fn timestamp() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actionset::{FeatureSpec, Sign};
    use crate::models::LinearModel;
    use crate::verify::{MethodOutputVerdict, Verdict};

    fn reapplicant() -> ActionSetSpec {
        ActionSetSpec::new(
            vec![
                FeatureSpec::binary("reapplicant", true, Sign::NonNegative),
                FeatureSpec::binary("age_geq_60", true, Sign::NonNegative),
            ],
            vec![],
        )
        .unwrap()
    }

    fn grid(spec: &ActionSetSpec) -> Dataset {
        ingest_dataset(spec, "reapplicant,age_geq_60\n0,0\n0,1\n1,0\n1,1\n").unwrap()
    }

    #[test]
    fn reapplicant_audit() {
        let spec = reapplicant();
        // Approves exactly the cells with x1 + x2 = 1.
        let model = ModelSource::function(|x| x[0] + x[1] == 1);
        let mut db = ReachableDb::new(&spec);
        let report = audit(&spec, &grid(&spec), &model, &mut db, None, &AuditOptions::default()).unwrap();
        assert_eq!(report.aggregates.n_denied, 2);
        assert_eq!(report.verdict_of(0), Some(Verdict::Yes));
        assert_eq!(report.verdict_of(3), Some(Verdict::No));
        assert_eq!(report.per_point.len(), 2);
        assert_eq!(report.aggregates.pct_no_recourse, Some(50.0));
    }

    #[test]
    fn constant_positive_model_denies_nobody() {
        let spec = reapplicant();
        let model = ModelSource::function(|_| true);
        let mut db = ReachableDb::new(&spec);
        let report = audit(&spec, &grid(&spec), &model, &mut db, None, &AuditOptions::default()).unwrap();
        assert_eq!(report.aggregates.n_denied, 0);
        assert!(report.per_point.is_empty());
        assert_eq!(report.aggregates.pct_no_recourse, None);
        let json = report.summary_json("t");
        assert!(json.contains("\"pct_no_recourse\": null"), "{json}");
    }

    #[test]
    fn method_outputs_classified() {
        let spec = reapplicant();
        let model = ModelSource::Linear(Arc::new(LinearModel::from_integers(&[1, 1], -2)));
        let outputs = parse_method_outputs("2,-1,0\n0,,\n", 2, 4).unwrap();
        let mut db = ReachableDb::new(&spec);
        let report = audit(&spec, &grid(&spec), &model, &mut db, Some(&outputs), &AuditOptions::default()).unwrap();
        let eval = report.method_eval.as_ref().unwrap();
        assert_eq!(eval.n_loopholes, 1);
        assert_eq!(eval.n_blindspots, 2);
        assert_eq!(report.per_point[0].method_output, Some(MethodOutputVerdict::Blindspot));
        assert_eq!(report.per_point[2].method_output, Some(MethodOutputVerdict::Loophole));
    }

    #[test]
    fn second_model_reuses_reachable_sets() {
        let spec = reapplicant();
        let data = grid(&spec);
        let mut db = ReachableDb::new(&spec);
        let opts = AuditOptions {
            workers: 3,
            ..AuditOptions::default()
        };
        let first = audit(&spec, &data, &ModelSource::function(|x| x[0] == 1), &mut db, None, &opts).unwrap();
        assert!(first.stats.solver_calls > 0);
        let second = audit(&spec, &data, &ModelSource::function(|x| x[1] == 1), &mut db, None, &opts).unwrap();
        assert_eq!(second.stats.solver_calls, 0);
        assert_eq!(second.stats.enumerations, 0);
    }

    #[test]
    fn all_points_widens_scope_but_not_aggregates() {
        let spec = reapplicant();
        let model = ModelSource::function(|x| x[0] + x[1] == 1);
        let mut db = ReachableDb::new(&spec);
        let opts = AuditOptions {
            all_points: true,
            ..AuditOptions::default()
        };
        let report = audit(&spec, &grid(&spec), &model, &mut db, None, &opts).unwrap();
        assert_eq!(report.per_point.len(), 4);
        assert_eq!(report.aggregates.n_denied, 2);
        assert_eq!(report.aggregates.n_recourse + report.aggregates.n_no_recourse, 2);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(AuditError::InvalidOption("x".into()).exit_code(), 1);
        assert_eq!(
            AuditError::Reachable(ReachableError::InvalidLimits("x")).exit_code(),
            2
        );
    }
}
