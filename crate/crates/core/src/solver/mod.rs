//! Minimal-norm action search.
//!
//! [`find_action`] returns an admissible, non-null action of minimal L1 norm
//! that is not in an exclusion list, or proves that none exists. All feature
//! domains are bounded integers, so the search is an exact branch-and-bound:
//! it deepens the target norm one unit at a time and, for each norm, runs a
//! depth-first search over features in index order. Constraints are checked
//! as soon as every feature they read has been assigned.
//!
//! Ties at equal norm are broken lexicographically over the action vector,
//! where each coordinate is ranked `-1 < 1 < -2 < 2 < ... < 0`. This prefers
//! changing lower-indexed features first, smaller magnitudes first and
//! decreases before increases.
//!
//! Feature domains are integer, so the exclusion distance is fixed at one:
//! any action differing from an excluded one is far enough from it.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::time::Instant;

use thiserror::Error;

use crate::actionset::{ActionSetSpec, DomainError, IntRange};
use crate::point::{l1_norm, Action};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Minimum L1 separation between a new solution and each excluded action.
pub const EPSILON_MIN: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("excluded action {index} is not admissible at this point")]
    InconsistentExclusion { index: usize },
    #[error("excluded action {index} has dimension {found}, expected {expected}")]
    ExclusionDimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("action is within the minimum separation of an action already excluded")]
    DuplicateExclusion,
}

/// Prior solutions that a new solution must differ from.
#[derive(Debug, Clone, Default)]
pub struct ExclusionList {
    actions: Vec<Action>,
    members: HashSet<Vec<i64>>,
}

impl ExclusionList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, action: Action) -> Result<(), SolverError> {
        if !self.members.insert(action.as_slice().to_vec()) {
            return Err(SolverError::DuplicateExclusion);
        }
        self.actions.push(action);
        Ok(())
    }

    pub fn contains(&self, action: &[i64]) -> bool {
        self.members.contains(action)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn epsilon_min(&self) -> u64 {
        EPSILON_MIN
    }
}

impl FromIterator<Action> for ExclusionList {
    fn from_iter<I: IntoIterator<Item = Action>>(iter: I) -> Self {
        let mut list = ExclusionList::new();
        for a in iter {
            let _ = list.push(a);
        }
        list
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Found,
    Infeasible,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub action: Option<Action>,
    pub norm: Option<u64>,
    pub nodes_explored: u64,
}

impl SolveOutcome {
    fn found(action: Vec<i64>, nodes: u64) -> Self {
        let norm = l1_norm(&action);
        Self {
            status: SolveStatus::Found,
            action: Some(Action::new(action)),
            norm: Some(norm),
            nodes_explored: nodes,
        }
    }

    fn without_action(status: SolveStatus, nodes: u64) -> Self {
        Self {
            status,
            action: None,
            norm: None,
            nodes_explored: nodes,
        }
    }
}

/// Rank of a coordinate value in the tie-breaking order.
pub(crate) fn value_rank(v: i64) -> u64 {
    if v == 0 {
        u64::MAX
    } else {
        2 * v.unsigned_abs() - u64::from(v < 0)
    }
}

/// Total order used to break ties between actions of equal norm.
pub fn tie_break_order(a: &[i64], b: &[i64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(&u, &v)| value_rank(u).cmp(&value_rank(v)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Order in which solutions are produced: by norm, then [`tie_break_order`].
pub fn solution_order(a: &[i64], b: &[i64]) -> Ordering {
    l1_norm(a).cmp(&l1_norm(b)).then_with(|| tie_break_order(a, b))
}

/// Finds a minimal-norm admissible action at `x` outside `excluded`.
pub fn find_action(
    spec: &ActionSetSpec,
    x: &[i64],
    excluded: &ExclusionList,
    budget: u64,
) -> Result<SolveOutcome, SolverError> {
    spec.validate_point(x)?;
    for (index, a) in excluded.actions().iter().enumerate() {
        if a.dim() != spec.dim() {
            return Err(SolverError::ExclusionDimension {
                index,
                expected: spec.dim(),
                found: a.dim(),
            });
        }
        if !spec.admits(x, a) {
            return Err(SolverError::InconsistentExclusion { index });
        }
    }
    Ok(search(spec, x, &excluded.members, budget, &SearchOptions::default()))
}

/// Whether `target` is reachable from `x` with a single admissible action.
pub fn is_reachable(spec: &ActionSetSpec, x: &[i64], target: &[i64]) -> Result<bool, DomainError> {
    spec.is_reachable(x, target)
}

/// Extra restrictions used by the enumerator.
#[derive(Debug, Clone, Default)]
pub(crate) struct SearchOptions<'a> {
    /// Every action ordered at or before this one is known to be excluded, so
    /// the search may start strictly after it.
    pub floor: Option<&'a [i64]>,
    /// When set, solutions must change features of a single block only.
    /// Maps feature index to block id.
    pub block_of: Option<&'a [usize]>,
    /// Give up, as if out of budget, once this instant has passed.
    pub deadline: Option<Instant>,
}

enum Check {
    Rule(usize),
    Direct(usize),
}

struct Search<'a> {
    spec: &'a ActionSetSpec,
    x: &'a [i64],
    excluded: &'a HashSet<Vec<i64>>,
    domains: Vec<IntRange>,
    suffix_max: Vec<u64>,
    checks_at: Vec<Vec<Check>>,
    block_of: Option<&'a [usize]>,
    floor: Option<&'a [i64]>,
    deadline: Option<Instant>,
    action: Vec<i64>,
    post: Vec<i64>,
    active_block: Vec<Option<usize>>,
    nodes: u64,
    budget: u64,
}

enum Step {
    Found,
    Exhausted,
    OutOfBudget,
}

pub(crate) fn search(
    spec: &ActionSetSpec,
    x: &[i64],
    excluded: &HashSet<Vec<i64>>,
    budget: u64,
    opts: &SearchOptions<'_>,
) -> SolveOutcome {
    let d = spec.dim();
    let domains: Vec<IntRange> = (0..d).map(|j| spec.separable_range(x, j)).collect();
    let mut suffix_max = vec![0u64; d + 1];
    for j in (0..d).rev() {
        suffix_max[j] = suffix_max[j + 1] + domains[j].max_abs();
    }

    let mut checks_at: Vec<Vec<Check>> = (0..d).map(|_| Vec::new()).collect();
    for (r, rule) in spec.rules().iter().enumerate() {
        let ready = rule.features().into_iter().max().unwrap_or(0);
        checks_at[ready].push(Check::Rule(r));
    }
    for t in 0..d {
        let links = spec.incoming_links(t);
        if !links.is_empty() {
            let ready = links.iter().map(|l| l.source).chain([t]).max().unwrap_or(t);
            checks_at[ready].push(Check::Direct(t));
        }
    }

    let mut s = Search {
        spec,
        x,
        excluded,
        domains,
        suffix_max,
        checks_at,
        block_of: opts.block_of,
        floor: opts.floor,
        deadline: opts.deadline,
        action: vec![0; d],
        post: x.to_vec(),
        active_block: vec![None; d + 1],
        nodes: 0,
        budget,
    };

    let max_norm = s.suffix_max[0];
    let start = opts.floor.map(l1_norm).unwrap_or(1).max(1);
    for norm in start..=max_norm {
        let tight = opts.floor.is_some_and(|f| l1_norm(f) == norm);
        match s.descend(0, norm, tight) {
            Step::Found => return SolveOutcome::found(s.action.clone(), s.nodes),
            Step::OutOfBudget => return SolveOutcome::without_action(SolveStatus::BudgetExhausted, s.nodes),
            Step::Exhausted => {}
        }
    }
    SolveOutcome::without_action(SolveStatus::Infeasible, s.nodes)
}

impl Search<'_> {
    /// Candidate values for coordinate `j` in tie-breaking order.
    fn candidates(&self, j: usize, remaining: u64, tight: bool) -> Vec<i64> {
        let dom = self.domains[j];
        let floor_rank = match (tight, self.floor) {
            (true, Some(f)) => value_rank(f[j]),
            _ => 0,
        };
        let mut out = Vec::new();
        let reach = remaining.min(dom.max_abs());
        for m in 1..=reach as i64 {
            for v in [-m, m] {
                if dom.contains(v) && value_rank(v) >= floor_rank {
                    out.push(v);
                }
            }
        }
        if dom.contains(0) {
            out.push(0);
        }
        out
    }

    fn descend(&mut self, j: usize, remaining: u64, tight: bool) -> Step {
        let d = self.action.len();
        if j == d {
            if remaining != 0 || tight || self.excluded.contains(&self.action) {
                return Step::Exhausted;
            }
            return Step::Found;
        }
        for v in self.candidates(j, remaining, tight) {
            let mag = v.unsigned_abs();
            if self.suffix_max[j + 1] < remaining - mag {
                continue;
            }
            let active = self.active_block[j];
            let mut next_active = active;
            if v != 0 {
                if let Some(block_of) = self.block_of {
                    match active {
                        Some(b) if b != block_of[j] => continue,
                        _ => next_active = Some(block_of[j]),
                    }
                }
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Step::OutOfBudget;
            }
            if self.nodes.is_multiple_of(4096) && self.deadline.is_some_and(|t| Instant::now() >= t) {
                return Step::OutOfBudget;
            }
            self.action[j] = v;
            self.post[j] = self.x[j] + v;
            self.active_block[j + 1] = next_active;
            if self.checks_pass(j) {
                let still_tight = tight && self.floor.is_some_and(|f| f[j] == v);
                match self.descend(j + 1, remaining - mag, still_tight) {
                    Step::Exhausted => {}
                    other => return other,
                }
            }
        }
        self.action[j] = 0;
        self.post[j] = self.x[j];
        Step::Exhausted
    }

    fn checks_pass(&self, j: usize) -> bool {
        self.checks_at[j].iter().all(|check| match *check {
            Check::Rule(r) => self.spec.rules()[r].admits_move(self.x, &self.post),
            Check::Direct(t) => self.spec.direct_change_ok(t, &self.action),
        })
    }
}
