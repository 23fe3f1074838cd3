//! Black-box classifiers and a caching handle around them.

mod external;
mod linear;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::point::Point;

pub use external::{ExternalPredictor, MAX_ROUND_POINTS};
pub use linear::{load_linear, parse_number, serialize_linear, LinearModel};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model expects {expected} features, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("could not start predictor {command:?}: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("predictor {command:?} failed: {detail}")]
    Crashed { command: String, detail: String },
    #[error("response {index} is {line:?}, expected 0 or 1")]
    Malformed { index: usize, line: String },
    #[error("predictor returned {found} responses for {expected} points")]
    LengthMismatch { expected: usize, found: usize },
    #[error("predictor gave two different answers for {point}")]
    Nondeterministic { point: Point },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    BuiltinLinear,
    ExternalProcess,
    Function,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::BuiltinLinear => "builtin-linear",
            ModelKind::ExternalProcess => "external-process",
            ModelKind::Function => "function",
        }
    }
}

/// A classifier queried in batches. `true` is the desirable outcome.
pub trait Model: Send {
    fn kind(&self) -> ModelKind;

    /// Number of features the model expects, when it knows.
    fn dim(&self) -> Option<usize>;

    fn predict_batch(&mut self, points: &[Point]) -> Result<Vec<bool>, ModelError>;
}

/// Wraps a plain function as a [`Model`].
pub struct FnModel<F> {
    dim: Option<usize>,
    f: F,
}

impl<F: Fn(&[i64]) -> bool + Send> FnModel<F> {
    pub fn new(dim: Option<usize>, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[i64]) -> bool + Send> Model for FnModel<F> {
    fn kind(&self) -> ModelKind {
        ModelKind::Function
    }

    fn dim(&self) -> Option<usize> {
        self.dim
    }

    fn predict_batch(&mut self, points: &[Point]) -> Result<Vec<bool>, ModelError> {
        Ok(points.iter().map(|p| (self.f)(p)).collect())
    }
}

/// Query counters for one handle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PredictorStats {
    /// Points asked of the handle.
    pub requested: u64,
    /// Points passed on to the model.
    pub forwarded: u64,
    /// Batches passed on to the model.
    pub round_trips: u64,
}

/// A model plus an optional memo of its answers.
///
/// The handle insists that the model is deterministic: if the model ever
/// gives two answers for one point, the query fails.
pub struct PredictorHandle {
    model: Box<dyn Model>,
    dim: usize,
    cache: Option<HashMap<Point, bool>>,
    stats: PredictorStats,
}

impl fmt::Debug for PredictorHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PredictorHandle")
            .field("kind", &self.model.kind())
            .field("dim", &self.dim)
            .field("cached", &self.cache.as_ref().map(HashMap::len))
            .field("stats", &self.stats)
            .finish()
    }
}

impl PredictorHandle {
    /// A caching handle for points of dimension `dim`.
    pub fn new(model: Box<dyn Model>, dim: usize) -> Result<Self, ModelError> {
        if let Some(found) = model.dim() {
            if found != dim {
                return Err(ModelError::Dimension { expected: dim, found });
            }
        }
        Ok(Self {
            model,
            dim,
            cache: Some(HashMap::new()),
            stats: PredictorStats::default(),
        })
    }

    pub fn without_cache(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stats(&self) -> PredictorStats {
        self.stats
    }

    pub fn is_caching(&self) -> bool {
        self.cache.is_some()
    }

    fn check(&self, p: &[i64]) -> Result<(), ModelError> {
        if p.len() != self.dim {
            return Err(ModelError::Dimension {
                expected: self.dim,
                found: p.len(),
            });
        }
        Ok(())
    }

    /// Records a known answer. Fails if it contradicts an earlier one.
    pub fn prime(&mut self, point: &Point, label: bool) -> Result<(), ModelError> {
        self.check(point)?;
        if let Some(cache) = self.cache.as_mut() {
            if let Some(&old) = cache.get(point) {
                if old != label {
                    return Err(ModelError::Nondeterministic { point: point.clone() });
                }
            } else {
                cache.insert(point.clone(), label);
            }
        }
        Ok(())
    }

    pub fn predict(&mut self, point: &Point) -> Result<bool, ModelError> {
        Ok(self.predict_batch(std::slice::from_ref(point))?[0])
    }

    /// Predictions in input order.
    pub fn predict_batch(&mut self, points: &[Point]) -> Result<Vec<bool>, ModelError> {
        for p in points {
            self.check(p)?;
        }
        self.stats.requested += points.len() as u64;

        let mut out: Vec<Option<bool>> = vec![None; points.len()];
        let mut ask: Vec<Point> = Vec::new();
        let mut slot: HashMap<&Point, usize> = HashMap::new();
        let mut ask_of: Vec<usize> = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if let Some(v) = self.cache.as_ref().and_then(|c| c.get(p)) {
                out[i] = Some(*v);
                ask_of.push(usize::MAX);
                continue;
            }
            let k = if self.cache.is_some() {
                *slot.entry(p).or_insert_with(|| {
                    ask.push(p.clone());
                    ask.len() - 1
                })
            } else {
                ask.push(p.clone());
                ask.len() - 1
            };
            ask_of.push(k);
        }

        if !ask.is_empty() {
            let answers = self.model.predict_batch(&ask)?;
            if answers.len() != ask.len() {
                return Err(ModelError::LengthMismatch {
                    expected: ask.len(),
                    found: answers.len(),
                });
            }
            self.stats.forwarded += ask.len() as u64;
            self.stats.round_trips += 1;

            let mut seen: HashMap<&Point, bool> = HashMap::new();
            for (p, &v) in ask.iter().zip(&answers) {
                if let Some(&old) = seen.get(p) {
                    if old != v {
                        return Err(ModelError::Nondeterministic { point: p.clone() });
                    }
                }
                seen.insert(p, v);
            }
            if let Some(cache) = self.cache.as_mut() {
                for (p, &v) in ask.iter().zip(&answers) {
                    cache.insert(p.clone(), v);
                }
            }
            for (i, &k) in ask_of.iter().enumerate() {
                if k != usize::MAX {
                    out[i] = Some(answers[k]);
                }
            }
        }
        Ok(out.into_iter().map(|v| v.expect("every point answered")).collect())
    }
}

/// Where to get a model from. Each call to [`ModelSource::open`] yields an
/// independent handle, so parallel workers never share a process or cache.
#[derive(Clone)]
pub enum ModelSource {
    Linear(Arc<LinearModel>),
    Command(String),
    Function(SharedFn),
}

type SharedFn = Arc<dyn Fn(&[i64]) -> bool + Send + Sync>;

impl fmt::Debug for ModelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSource::Linear(m) => f.debug_tuple("Linear").field(&m.dim()).finish(),
            ModelSource::Command(c) => f.debug_tuple("Command").field(c).finish(),
            ModelSource::Function(_) => f.write_str("Function"),
        }
    }
}

impl ModelSource {
    pub fn function(f: impl Fn(&[i64]) -> bool + Send + Sync + 'static) -> Self {
        ModelSource::Function(Arc::new(f))
    }

    pub fn open(&self, dim: usize, cache: bool) -> Result<PredictorHandle, ModelError> {
        let model: Box<dyn Model> = match self {
            ModelSource::Linear(m) => Box::new(m.as_ref().clone()),
            ModelSource::Command(c) => Box::new(ExternalPredictor::spawn(c)?),
            ModelSource::Function(f) => {
                let f = Arc::clone(f);
                Box::new(FnModel::new(None, move |x: &[i64]| f(x)))
            }
        };
        let handle = PredictorHandle::new(model, dim)?;
        Ok(if cache { handle } else { handle.without_cache() })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSource::Linear(_) => ModelKind::BuiltinLinear,
            ModelSource::Command(_) => ModelKind::ExternalProcess,
            ModelSource::Function(_) => ModelKind::Function,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU64, Ordering};

    fn grid() -> Vec<Point> {
        [[0, 0], [0, 1], [1, 0], [1, 1]].into_iter().map(Point::from).collect()
    }

    #[test]
    fn cached_repeat_needs_no_round_trip() {
        let mut h = PredictorHandle::new(Box::new(LinearModel::from_integers(&[1, 1], -2)), 2).unwrap();
        assert_eq!(h.predict_batch(&grid()).unwrap(), vec![false, false, false, true]);
        assert_eq!(h.stats().round_trips, 1);
        assert!(h.predict(&Point::from([1, 1])).unwrap());
        assert_eq!(h.predict_batch(&grid()).unwrap(), vec![false, false, false, true]);
        assert_eq!(h.stats().round_trips, 1);
        assert_eq!(h.stats().forwarded, 4);
        assert_eq!(h.stats().requested, 9);
    }

    #[test]
    fn duplicates_forwarded_once_when_caching() {
        let calls = Arc::new(AtomicU64::new(0));
        let c = Arc::clone(&calls);
        let src = ModelSource::function(move |x| {
            c.fetch_add(1, Ordering::SeqCst);
            x[0] > 0
        });
        let pts = vec![Point::from([1]), Point::from([1]), Point::from([0])];
        let mut h = src.open(1, true).unwrap();
        assert_eq!(h.predict_batch(&pts).unwrap(), vec![true, true, false]);
        assert_eq!(calls.load(Ordering::SeqCst), 2);
        let mut h = src.open(1, false).unwrap();
        assert_eq!(h.predict_batch(&pts).unwrap(), vec![true, true, false]);
        assert_eq!(h.predict_batch(&pts).unwrap(), vec![true, true, false]);
        assert_eq!(calls.load(Ordering::SeqCst), 8);
    }

    #[test]
    fn nondeterminism_is_an_error() {
        let flip = AtomicU64::new(0);
        let model = FnModel::new(Some(1), move |_: &[i64]| flip.fetch_add(1, Ordering::SeqCst).is_multiple_of(2));
        let mut h = PredictorHandle::new(Box::new(model), 1).unwrap().without_cache();
        assert!(matches!(
            h.predict_batch(&[Point::from([3]), Point::from([3])]),
            Err(ModelError::Nondeterministic { .. })
        ));

        let mut h = PredictorHandle::new(Box::new(LinearModel::from_integers(&[1], 0)), 1).unwrap();
        h.prime(&Point::from([2]), true).unwrap();
        assert!(matches!(
            h.prime(&Point::from([2]), false),
            Err(ModelError::Nondeterministic { .. })
        ));
    }

    #[test]
    fn dimension_checks() {
        assert!(matches!(
            PredictorHandle::new(Box::new(LinearModel::from_integers(&[0; 35], 0)), 36),
            Err(ModelError::Dimension { expected: 36, found: 35 })
        ));
        let mut h = PredictorHandle::new(Box::new(LinearModel::from_integers(&[1, 1], 0)), 2).unwrap();
        assert!(matches!(
            h.predict(&Point::from([1, 2, 3])),
            Err(ModelError::Dimension { .. })
        ));
    }

    #[test]
    fn external_source_opens_processes() {
        let src = ModelSource::Command("while read -r l; do [ -z \"$l\" ] || echo 1; done".into());
        let mut h = src.open(2, true).unwrap();
        assert_eq!(h.kind(), ModelKind::ExternalProcess);
        assert_eq!(h.predict_batch(&grid()).unwrap(), vec![true; 4]);
    }
}
