//! Action-set specifications.
//!
//! An [`ActionSetSpec`] describes which actions a decision subject can take from
//! a point: per-feature bounds, actionability and sign (the separable rules)
//! plus a list of [`ConstraintSpec`]s that couple several features. Specs are
//! validated and compiled to an index-based form when built, and are immutable
//! afterwards.
//!
//! A point is *in domain* when it lies within every feature's bounds and also
//! satisfies the structural part of every constraint (one-hot counts,
//! monotone thermometer patterns, viable reachability values, implications).
//! Under that definition the null action is admissible at every in-domain point.

mod config;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_rational::Rational64;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{parse_action_set, serialize_action_set, ActionSetError, ParseError};

use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueType {
    Binary,
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Free,
    NonNegative,
    NonPositive,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureSpec {
    pub name: String,
    pub value_type: ValueType,
    pub lower_bound: i64,
    pub upper_bound: i64,
    pub actionable: bool,
    pub sign: Sign,
}

impl FeatureSpec {
    pub fn binary(name: impl Into<String>, actionable: bool, sign: Sign) -> Self {
        Self {
            name: name.into(),
            value_type: ValueType::Binary,
            lower_bound: 0,
            upper_bound: 1,
            actionable,
            sign,
        }
    }

    pub fn integer(name: impl Into<String>, lb: i64, ub: i64, actionable: bool, sign: Sign) -> Self {
        Self {
            name: name.into(),
            value_type: ValueType::Integer,
            lower_bound: lb,
            upper_bound: ub,
            actionable,
            sign,
        }
    }

    pub fn immutable(name: impl Into<String>, value_type: ValueType, lb: i64, ub: i64) -> Self {
        Self {
            name: name.into(),
            value_type,
            lower_bound: lb,
            upper_bound: ub,
            actionable: false,
            sign: Sign::Free,
        }
    }
}

/// Direction a thermometer-encoded block may move in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThermometerDirection {
    Increase,
    Decrease,
}

/// A constraint that couples several features.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ConstraintSpec {
    /// `min_on <= sum_j (x_j + a_j) <= max_on` over the listed binary features.
    OneHotEncoding {
        features: Vec<String>,
        min_on: i64,
        max_on: i64,
    },
    /// Ordered binary dummies whose 1s must precede their 0s. The number of
    /// active dummies may only move in `direction`.
    ThermometerEncoding {
        features: Vec<String>,
        direction: ThermometerDirection,
    },
    /// An action on `source` induces `trunc(scale * a_source)` on each target,
    /// on top of any direct change to the target.
    DirectionalLinkage {
        source: String,
        targets: Vec<(String, Rational64)>,
    },
    /// If `x_antecedent + a_antecedent >= threshold` then
    /// `x_consequent + a_consequent == forced_value`.
    IfThen {
        antecedent: String,
        threshold: i64,
        consequent: String,
        forced_value: i64,
    },
    /// The listed features jointly take one of `values`; `edges[i][k]` says
    /// whether `values[k]` can be reached from `values[i]`.
    ReachabilityMatrix {
        features: Vec<String>,
        values: Vec<Vec<i64>>,
        edges: Vec<Vec<bool>>,
    },
}

impl ConstraintSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ConstraintSpec::OneHotEncoding { .. } => "one_hot",
            ConstraintSpec::ThermometerEncoding { .. } => "thermometer",
            ConstraintSpec::DirectionalLinkage { .. } => "linkage",
            ConstraintSpec::IfThen { .. } => "if_then",
            ConstraintSpec::ReachabilityMatrix { .. } => "reachability",
        }
    }

    /// Feature names the constraint references, in declaration order.
    pub fn feature_names(&self) -> Vec<&str> {
        match self {
            ConstraintSpec::OneHotEncoding { features, .. }
            | ConstraintSpec::ThermometerEncoding { features, .. }
            | ConstraintSpec::ReachabilityMatrix { features, .. } => {
                features.iter().map(String::as_str).collect()
            }
            ConstraintSpec::DirectionalLinkage { source, targets } => std::iter::once(source.as_str())
                .chain(targets.iter().map(|(t, _)| t.as_str()))
                .collect(),
            ConstraintSpec::IfThen {
                antecedent,
                consequent,
                ..
            } => vec![antecedent.as_str(), consequent.as_str()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("spec declares no features")]
    NoFeatures,
    #[error("feature name is empty or contains a reserved character: {0:?}")]
    BadFeatureName(String),
    #[error("feature `{0}` is declared more than once")]
    DuplicateFeature(String),
    #[error("feature `{name}`: lower bound {lb} exceeds upper bound {ub}")]
    BoundInversion { name: String, lb: i64, ub: i64 },
    #[error("feature `{name}`: binary features must have bounds [0, 1], got [{lb}, {ub}]")]
    BinaryBounds { name: String, lb: i64, ub: i64 },
    #[error("constraint {constraint}: unknown feature `{name}`")]
    UnknownFeature { constraint: usize, name: String },
    #[error("constraint {constraint}: feature `{name}` is referenced more than once")]
    RepeatedFeature { constraint: usize, name: String },
    #[error("constraint {constraint}: needs at least {needed} feature(s)")]
    TooFewFeatures { constraint: usize, needed: usize },
    #[error("constraint {constraint}: feature `{name}` must be binary")]
    NonBinaryFeature { constraint: usize, name: String },
    #[error("constraint {constraint}: one-hot limits [{min_on}, {max_on}] invalid for {len} features")]
    OneHotLimits {
        constraint: usize,
        min_on: i64,
        max_on: i64,
        len: usize,
    },
    #[error("constraint {constraint}: reachability matrix must be {expected}x{expected}, row {row} has {found} entries")]
    MatrixNotSquare {
        constraint: usize,
        expected: usize,
        row: usize,
        found: usize,
    },
    #[error("constraint {constraint}: reachability matrix has {found} rows, expected {expected}")]
    MatrixRowCount {
        constraint: usize,
        expected: usize,
        found: usize,
    },
    #[error("constraint {constraint}: reachability matrix diagonal entry {index} is false")]
    FalseDiagonal { constraint: usize, index: usize },
    #[error("constraint {constraint}: value {index} has {found} entries, expected {expected}")]
    ValueArity {
        constraint: usize,
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("constraint {constraint}: value {index} lies outside the feature bounds")]
    ValueOutOfBounds { constraint: usize, index: usize },
    #[error("constraint {constraint}: value {index} is listed twice")]
    DuplicateValue { constraint: usize, index: usize },
    #[error("constraint {constraint}: reachability constraint lists no values")]
    NoValues { constraint: usize },
    #[error("constraint {constraint}: linkage scale must be non-zero")]
    ZeroScale { constraint: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("feature `{feature}` = {value} is outside [{lb}, {ub}]")]
    OutOfBounds {
        feature: String,
        value: i64,
        lb: i64,
        ub: i64,
    },
    #[error("point violates constraint {constraint} ({kind})")]
    Structural { constraint: usize, kind: &'static str },
    #[error("feature index {index} out of range for {dim} features")]
    IndexOutOfRange { index: usize, dim: usize },
}

/// An inclusive integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntRange {
    pub lo: i64,
    pub hi: i64,
}

impl IntRange {
    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn len(&self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    /// Largest absolute value in the interval.
    pub fn max_abs(&self) -> u64 {
        self.lo.unsigned_abs().max(self.hi.unsigned_abs())
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Index-based form of a non-separable constraint.
#[derive(Debug, Clone)]
pub(crate) enum Rule {
    OneHot {
        idx: Vec<usize>,
        min_on: i64,
        max_on: i64,
    },
    Thermometer {
        idx: Vec<usize>,
        direction: ThermometerDirection,
    },
    IfThen {
        antecedent: usize,
        threshold: i64,
        consequent: usize,
        forced_value: i64,
    },
    Reach {
        idx: Vec<usize>,
        edges: Vec<Vec<bool>>,
        lookup: HashMap<Vec<i64>, usize>,
    },
}

impl Rule {
    pub(crate) fn features(&self) -> Vec<usize> {
        match self {
            Rule::OneHot { idx, .. } | Rule::Thermometer { idx, .. } | Rule::Reach { idx, .. } => idx.clone(),
            Rule::IfThen {
                antecedent,
                consequent,
                ..
            } => vec![*antecedent, *consequent],
        }
    }

    /// Structural validity of a single point.
    pub(crate) fn admits_point(&self, x: &[i64]) -> bool {
        match self {
            Rule::OneHot { idx, min_on, max_on } => {
                let on: i64 = idx.iter().map(|&j| x[j]).sum();
                *min_on <= on && on <= *max_on
            }
            Rule::Thermometer { idx, .. } => thermometer_level(idx, x).is_some(),
            Rule::IfThen {
                antecedent,
                threshold,
                consequent,
                forced_value,
            } => x[*antecedent] < *threshold || x[*consequent] == *forced_value,
            Rule::Reach { idx, lookup, .. } => lookup.contains_key(&block_value(idx, x)),
        }
    }

    /// Whether moving from `x` to `post` respects the rule. Assumes `x` is in domain.
    pub(crate) fn admits_move(&self, x: &[i64], post: &[i64]) -> bool {
        match self {
            Rule::OneHot { .. } | Rule::IfThen { .. } => self.admits_point(post),
            Rule::Thermometer { idx, direction } => {
                let Some(after) = thermometer_level(idx, post) else {
                    return false;
                };
                let Some(before) = thermometer_level(idx, x) else {
                    return false;
                };
                match direction {
                    ThermometerDirection::Increase => after >= before,
                    ThermometerDirection::Decrease => after <= before,
                }
            }
            Rule::Reach { idx, edges, lookup } => {
                match (lookup.get(&block_value(idx, x)), lookup.get(&block_value(idx, post))) {
                    (Some(&from), Some(&to)) => edges[from][to],
                    _ => false,
                }
            }
        }
    }
}

/// Number of leading ones when the dummies form a monotone pattern.
fn thermometer_level(idx: &[usize], x: &[i64]) -> Option<usize> {
    let level = idx.iter().take_while(|&&j| x[j] == 1).count();
    idx[level..].iter().all(|&j| x[j] == 0).then_some(level)
}

fn block_value(idx: &[usize], x: &[i64]) -> Vec<i64> {
    idx.iter().map(|&j| x[j]).collect()
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Link {
    pub source: usize,
    pub scale: Rational64,
}

/// Change induced on a target by an action of size `a_source` on its source.
/// Rounds toward zero.
pub(crate) fn induced_change(scale: Rational64, a_source: i64) -> i64 {
    let num = *scale.numer() as i128 * a_source as i128;
    let den = *scale.denom() as i128;
    let q = num / den;
    q.clamp(i64::MIN as i128, i64::MAX as i128) as i64
}

/// A validated, immutable action set.
#[derive(Debug, Clone)]
pub struct ActionSetSpec {
    features: Vec<FeatureSpec>,
    constraints: Vec<ConstraintSpec>,
    rules: Vec<Rule>,
    incoming: Vec<Vec<Link>>,
    index: HashMap<String, usize>,
}

impl PartialEq for ActionSetSpec {
    fn eq(&self, other: &Self) -> bool {
        self.features == other.features && self.constraints == other.constraints
    }
}

impl Eq for ActionSetSpec {}

impl ActionSetSpec {
    pub fn new(features: Vec<FeatureSpec>, constraints: Vec<ConstraintSpec>) -> Result<Self, ValidationError> {
        if features.is_empty() {
            return Err(ValidationError::NoFeatures);
        }
        let mut index = HashMap::with_capacity(features.len());
        for (j, f) in features.iter().enumerate() {
            if f.name.is_empty()
                || f.name.trim() != f.name
                || f.name.contains([',', '"', '\n', '\r', '#'])
                || f.name.starts_with('[')
            {
                return Err(ValidationError::BadFeatureName(f.name.clone()));
            }
            if f.lower_bound > f.upper_bound {
                return Err(ValidationError::BoundInversion {
                    name: f.name.clone(),
                    lb: f.lower_bound,
                    ub: f.upper_bound,
                });
            }
            if f.value_type == ValueType::Binary && (f.lower_bound, f.upper_bound) != (0, 1) {
                return Err(ValidationError::BinaryBounds {
                    name: f.name.clone(),
                    lb: f.lower_bound,
                    ub: f.upper_bound,
                });
            }
            if index.insert(f.name.clone(), j).is_some() {
                return Err(ValidationError::DuplicateFeature(f.name.clone()));
            }
        }

        let mut rules = Vec::new();
        let mut incoming: Vec<Vec<Link>> = vec![Vec::new(); features.len()];
        for (c, constraint) in constraints.iter().enumerate() {
            let names = constraint.feature_names();
            let mut seen = BTreeSet::new();
            let mut idx = Vec::with_capacity(names.len());
            for name in &names {
                let j = *index.get(*name).ok_or_else(|| ValidationError::UnknownFeature {
                    constraint: c,
                    name: name.to_string(),
                })?;
                if !seen.insert(j) {
                    return Err(ValidationError::RepeatedFeature {
                        constraint: c,
                        name: name.to_string(),
                    });
                }
                idx.push(j);
            }
            let require_binary = |idx: &[usize]| -> Result<(), ValidationError> {
                match idx.iter().find(|&&j| features[j].value_type != ValueType::Binary) {
                    Some(&j) => Err(ValidationError::NonBinaryFeature {
                        constraint: c,
                        name: features[j].name.clone(),
                    }),
                    None => Ok(()),
                }
            };
            match constraint {
                ConstraintSpec::OneHotEncoding { min_on, max_on, .. } => {
                    if idx.len() < 2 {
                        return Err(ValidationError::TooFewFeatures { constraint: c, needed: 2 });
                    }
                    require_binary(&idx)?;
                    if *min_on < 0 || min_on > max_on || *max_on > idx.len() as i64 {
                        return Err(ValidationError::OneHotLimits {
                            constraint: c,
                            min_on: *min_on,
                            max_on: *max_on,
                            len: idx.len(),
                        });
                    }
                    rules.push(Rule::OneHot {
                        idx,
                        min_on: *min_on,
                        max_on: *max_on,
                    });
                }
                ConstraintSpec::ThermometerEncoding { direction, .. } => {
                    if idx.len() < 2 {
                        return Err(ValidationError::TooFewFeatures { constraint: c, needed: 2 });
                    }
                    require_binary(&idx)?;
                    rules.push(Rule::Thermometer {
                        idx,
                        direction: *direction,
                    });
                }
                ConstraintSpec::DirectionalLinkage { targets, .. } => {
                    if targets.is_empty() {
                        return Err(ValidationError::TooFewFeatures { constraint: c, needed: 2 });
                    }
                    let source = idx[0];
                    for (k, (_, scale)) in targets.iter().enumerate() {
                        if *scale.numer() == 0 {
                            return Err(ValidationError::ZeroScale { constraint: c });
                        }
                        incoming[idx[k + 1]].push(Link { source, scale: *scale });
                    }
                }
                ConstraintSpec::IfThen {
                    threshold,
                    forced_value,
                    ..
                } => rules.push(Rule::IfThen {
                    antecedent: idx[0],
                    threshold: *threshold,
                    consequent: idx[1],
                    forced_value: *forced_value,
                }),
                ConstraintSpec::ReachabilityMatrix { values, edges, .. } => {
                    if values.is_empty() {
                        return Err(ValidationError::NoValues { constraint: c });
                    }
                    let mut lookup = HashMap::with_capacity(values.len());
                    for (i, v) in values.iter().enumerate() {
                        if v.len() != idx.len() {
                            return Err(ValidationError::ValueArity {
                                constraint: c,
                                index: i,
                                expected: idx.len(),
                                found: v.len(),
                            });
                        }
                        let in_bounds = idx.iter().zip(v).all(|(&j, &val)| {
                            features[j].lower_bound <= val && val <= features[j].upper_bound
                        });
                        if !in_bounds {
                            return Err(ValidationError::ValueOutOfBounds { constraint: c, index: i });
                        }
                        if lookup.insert(v.clone(), i).is_some() {
                            return Err(ValidationError::DuplicateValue { constraint: c, index: i });
                        }
                    }
                    if edges.len() != values.len() {
                        return Err(ValidationError::MatrixRowCount {
                            constraint: c,
                            expected: values.len(),
                            found: edges.len(),
                        });
                    }
                    for (r, row) in edges.iter().enumerate() {
                        if row.len() != values.len() {
                            return Err(ValidationError::MatrixNotSquare {
                                constraint: c,
                                expected: values.len(),
                                row: r,
                                found: row.len(),
                            });
                        }
                        if !row[r] {
                            return Err(ValidationError::FalseDiagonal { constraint: c, index: r });
                        }
                    }
                    rules.push(Rule::Reach {
                        idx,
                        edges: edges.clone(),
                        lookup,
                    });
                }
            }
        }

        Ok(Self {
            features,
            constraints,
            rules,
            incoming,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn constraints(&self) -> &[ConstraintSpec] {
        &self.constraints
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    pub(crate) fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub(crate) fn incoming_links(&self, j: usize) -> &[Link] {
        &self.incoming[j]
    }

    /// Whether some directional linkage drives feature `j`.
    pub fn is_linkage_target(&self, j: usize) -> bool {
        !self.incoming[j].is_empty()
    }

    /// SHA-256 of the canonical serialization, as lowercase hex.
    pub fn spec_hash(&self) -> String {
        let digest = Sha256::digest(serialize_action_set(self).as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks dimension, bounds and the structural part of every constraint.
    pub fn validate_point(&self, x: &[i64]) -> Result<(), DomainError> {
        if x.len() != self.dim() {
            return Err(DomainError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        for (f, &v) in self.features.iter().zip(x) {
            if v < f.lower_bound || v > f.upper_bound {
                return Err(DomainError::OutOfBounds {
                    feature: f.name.clone(),
                    value: v,
                    lb: f.lower_bound,
                    ub: f.upper_bound,
                });
            }
        }
        for (c, rule) in self.rules.iter().enumerate() {
            if !rule.admits_point(x) {
                let constraint = self.rule_constraint_index(c);
                return Err(DomainError::Structural {
                    constraint,
                    kind: self.constraints[constraint].kind(),
                });
            }
        }
        Ok(())
    }

    pub fn contains_point(&self, x: &[i64]) -> bool {
        self.validate_point(x).is_ok()
    }

    /// Maps a rule position back to its position among all constraints.
    fn rule_constraint_index(&self, rule: usize) -> usize {
        self.constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| !matches!(c, ConstraintSpec::DirectionalLinkage { .. }))
            .nth(rule)
            .map(|(i, _)| i)
            .unwrap_or(rule)
    }

    /// Whether `a` is an admissible action at `x`.
    pub fn check_action(&self, x: &[i64], a: &[i64]) -> Result<bool, DomainError> {
        if a.len() != self.dim() {
            return Err(DomainError::DimensionMismatch {
                expected: self.dim(),
                found: a.len(),
            });
        }
        self.validate_point(x)?;
        Ok(self.admits(x, a))
    }

    /// Membership test for an in-domain `x` and a correctly sized `a`.
    pub(crate) fn admits(&self, x: &[i64], a: &[i64]) -> bool {
        let mut post = Vec::with_capacity(x.len());
        for (j, f) in self.features.iter().enumerate() {
            let Some(v) = x[j].checked_add(a[j]) else {
                return false;
            };
            if v < f.lower_bound || v > f.upper_bound {
                return false;
            }
            post.push(v);
        }
        (0..self.dim()).all(|j| self.direct_change_ok(j, a)) && self.rules.iter().all(|r| r.admits_move(x, &post))
    }

    /// Part of `a_j` not explained by linkages into `j`.
    pub(crate) fn direct_change(&self, j: usize, a: &[i64]) -> i64 {
        let induced: i64 = self.incoming[j]
            .iter()
            .map(|l| induced_change(l.scale, a[l.source]))
            .fold(0i64, |acc, v| acc.saturating_add(v));
        a[j].saturating_sub(induced)
    }

    /// Actionability and sign, applied to the direct part of the change on `j`.
    pub(crate) fn direct_change_ok(&self, j: usize, a: &[i64]) -> bool {
        let f = &self.features[j];
        let direct = if self.incoming[j].is_empty() {
            a[j]
        } else {
            self.direct_change(j, a)
        };
        if !f.actionable {
            return direct == 0;
        }
        match f.sign {
            Sign::Free => true,
            Sign::NonNegative => direct >= 0,
            Sign::NonPositive => direct <= 0,
        }
    }

    /// Values `a_j` may take under the separable rules for `j` alone.
    ///
    /// Linkage targets get their full bounds range, since induced changes are
    /// exempt from the target's actionability and sign.
    pub fn action_domain(&self, x: &[i64], j: usize) -> Result<IntRange, DomainError> {
        if j >= self.dim() {
            return Err(DomainError::IndexOutOfRange { index: j, dim: self.dim() });
        }
        self.validate_point(x)?;
        Ok(self.separable_range(x, j))
    }

    pub(crate) fn separable_range(&self, x: &[i64], j: usize) -> IntRange {
        let f = &self.features[j];
        let mut lo = f.lower_bound - x[j];
        let mut hi = f.upper_bound - x[j];
        if self.incoming[j].is_empty() {
            if !f.actionable {
                return IntRange { lo: 0, hi: 0 };
            }
            match f.sign {
                Sign::Free => {}
                Sign::NonNegative => lo = lo.max(0),
                Sign::NonPositive => hi = hi.min(0),
            }
        }
        IntRange { lo, hi }
    }

    /// Undirected graph linking features that share a constraint.
    pub fn constraint_graph(&self) -> ConstraintGraph {
        let mut adjacency = vec![BTreeSet::new(); self.dim()];
        for constraint in &self.constraints {
            let idx: Vec<usize> = constraint
                .feature_names()
                .iter()
                .map(|n| self.index[*n])
                .collect();
            match constraint {
                ConstraintSpec::DirectionalLinkage { .. } => {
                    for &t in &idx[1..] {
                        adjacency[idx[0]].insert(t);
                        adjacency[t].insert(idx[0]);
                    }
                }
                _ => {
                    for &u in &idx {
                        for &v in &idx {
                            if u != v {
                                adjacency[u].insert(v);
                            }
                        }
                    }
                }
            }
        }
        ConstraintGraph {
            adjacency: adjacency.into_iter().map(|s| s.into_iter().collect()).collect(),
        }
    }

    /// Features whose value can influence the set of admissible actions:
    /// actionable features, linkage targets, and anything a constraint reads.
    pub fn action_relevant_features(&self) -> Vec<usize> {
        let mut relevant: BTreeSet<usize> = (0..self.dim())
            .filter(|&j| self.features[j].actionable || self.is_linkage_target(j))
            .collect();
        for rule in &self.rules {
            relevant.extend(rule.features());
        }
        for links in &self.incoming {
            relevant.extend(links.iter().map(|l| l.source));
        }
        relevant.into_iter().collect()
    }

    /// `log2` of the number of joint values the actionable features can take.
    pub fn binary_equivalent_size(&self) -> f64 {
        self.features
            .iter()
            .enumerate()
            .filter(|(j, f)| f.actionable || self.is_linkage_target(*j))
            .map(|(_, f)| ((f.upper_bound - f.lower_bound + 1) as f64).log2())
            .sum()
    }

    /// Whether `target` can be reached from `x` with one admissible action.
    pub fn is_reachable(&self, x: &[i64], target: &[i64]) -> Result<bool, DomainError> {
        self.validate_point(x)?;
        self.validate_point(target)?;
        let a: Vec<i64> = x.iter().zip(target).map(|(u, v)| v - u).collect();
        Ok(self.admits(x, &a))
    }

    /// Convenience for tests and tools: a point from a slice, validated.
    pub fn point(&self, values: &[i64]) -> Result<Point, DomainError> {
        self.validate_point(values)?;
        Ok(Point::from(values))
    }
}

/// Adjacency lists over feature indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintGraph {
    adjacency: Vec<Vec<usize>>,
}

impl ConstraintGraph {
    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }
}
