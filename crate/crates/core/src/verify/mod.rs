//! Recourse verdicts over reachable sets.
//!
//! A point has recourse when some reachable point gets the desirable
//! prediction. A complete reachable set with no such point proves there is
//! none. An incomplete set with no such point proves nothing, so the verdict
//! is to abstain.

use num_rational::Rational64;
use thiserror::Error;

use crate::actionset::{ActionSetSpec, DomainError};
use crate::models::{ModelError, PredictorHandle};
use crate::point::{Action, Point};
use crate::reachable::ReachableSet;

/// Largest batch sent to the model in one query while verifying a point.
pub const MAX_BATCH: usize = 1024;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("reachable set has dimension {found}, model expects {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("no positive examples, so the false negative rate is undefined")]
    NoPositives,
    #[error("labels must be 0 or 1, found {0}")]
    BadLabel(i64),
    #[error("false negative rate must lie in [0, 1], got {0}")]
    BadRate(Rational64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Some reachable point receives the desirable prediction.
    Yes,
    /// The complete reachable set holds no such point.
    No,
    /// The enumerated part of an incomplete set holds no such point.
    Abstain,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Abstain => "abstain",
        }
    }

    pub fn parse(s: &str) -> Option<Verdict> {
        match s {
            "yes" => Some(Verdict::Yes),
            "no" => Some(Verdict::No),
            "abstain" => Some(Verdict::Abstain),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationResult {
    pub verdict: Verdict,
    /// First reachable point with a desirable prediction, when the verdict is yes.
    pub witness: Option<Point>,
    /// Reachable points whose prediction was requested.
    pub queries_used: u64,
}

/// Queries the model over `rset` in stored order and stops at the first
/// positive prediction.
///
/// Batches start at one point and double up to [`MAX_BATCH`], so a positive
/// anchor costs a single query.
pub fn verify_point(rset: &ReachableSet, model: &mut PredictorHandle) -> Result<VerificationResult, VerifyError> {
    if rset.anchor().dim() != model.dim() {
        return Err(VerifyError::Dimension {
            expected: model.dim(),
            found: rset.anchor().dim(),
        });
    }
    let mut points = rset.iter();
    let mut batch_size = 1;
    let mut queries_used = 0u64;
    loop {
        let batch: Vec<Point> = points.by_ref().take(batch_size).collect();
        if batch.is_empty() {
            break;
        }
        let preds = model.predict_batch(&batch)?;
        if let Some(i) = preds.iter().position(|&p| p) {
            queries_used += i as u64 + 1;
            return Ok(VerificationResult {
                verdict: Verdict::Yes,
                witness: Some(batch[i].clone()),
                queries_used,
            });
        }
        queries_used += batch.len() as u64;
        batch_size = (batch_size * 2).min(MAX_BATCH);
    }
    Ok(VerificationResult {
        verdict: if rset.is_complete() { Verdict::No } else { Verdict::Abstain },
        witness: None,
        queries_used,
    })
}

/// Certifies recourse from a false negative rate alone.
///
/// If the rate is below the share of positive examples that lie in `rset`,
/// any model achieving it must predict positive on at least one of them.
/// Holds for interior sets as well as complete ones.
pub fn certify_by_fnr(
    rset: &ReachableSet,
    labeled: &[(Point, i64)],
    model_fnr: Rational64,
) -> Result<bool, VerifyError> {
    if model_fnr < Rational64::from_integer(0) || model_fnr > Rational64::from_integer(1) {
        return Err(VerifyError::BadRate(model_fnr));
    }
    let mut positives = 0i64;
    let mut inside = 0i64;
    for (x, y) in labeled {
        match y {
            0 => {}
            1 => {
                positives += 1;
                if rset.contains(x) {
                    inside += 1;
                }
            }
            other => return Err(VerifyError::BadLabel(*other)),
        }
    }
    if positives == 0 {
        return Err(VerifyError::NoPositives);
    }
    Ok(model_fnr < Rational64::new(inside, positives))
}

/// Share of positive examples the model predicts negative.
pub fn empirical_fnr(model: &mut PredictorHandle, labeled: &[(Point, i64)]) -> Result<Rational64, VerifyError> {
    let mut positives = Vec::new();
    for (x, y) in labeled {
        match y {
            0 => {}
            1 => positives.push(x.clone()),
            other => return Err(VerifyError::BadLabel(*other)),
        }
    }
    if positives.is_empty() {
        return Err(VerifyError::NoPositives);
    }
    let preds = model.predict_batch(&positives)?;
    let misses = preds.iter().filter(|&&p| !p).count() as i64;
    Ok(Rational64::new(misses, positives.len() as i64))
}

/// How a third-party recourse method's output at one point compares to the
/// verified ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodOutputVerdict {
    /// The method claimed no recourse exists and verification agrees.
    /// Methods that only return actions never produce this.
    CertifiesNoRecourse,
    /// The proposed action is admissible.
    ValidAction,
    /// The proposed action violates the action set.
    Loophole,
    /// No action proposed, and verification did not find recourse either.
    NoAction,
    /// No action proposed although recourse exists.
    Blindspot,
}

impl MethodOutputVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodOutputVerdict::CertifiesNoRecourse => "certifies-no-recourse",
            MethodOutputVerdict::ValidAction => "valid-action",
            MethodOutputVerdict::Loophole => "loophole",
            MethodOutputVerdict::NoAction => "no-action",
            MethodOutputVerdict::Blindspot => "blindspot",
        }
    }
}

pub fn classify_method_output(
    spec: &ActionSetSpec,
    x: &[i64],
    proposed: Option<&Action>,
    ground_truth: &VerificationResult,
) -> Result<MethodOutputVerdict, VerifyError> {
    match proposed {
        Some(a) => Ok(if spec.check_action(x, a)? {
            MethodOutputVerdict::ValidAction
        } else {
            MethodOutputVerdict::Loophole
        }),
        None => {
            spec.validate_point(x)?;
            Ok(match ground_truth.verdict {
                Verdict::Yes => MethodOutputVerdict::Blindspot,
                Verdict::No | Verdict::Abstain => MethodOutputVerdict::NoAction,
            })
        }
    }
}
