//! Reachable-set enumeration.
//!
//! [`get_reachable_set`] repeatedly asks the solver for the cheapest
//! admissible action not yet found, until none is left or a limit is hit.
//! When constraints split the features into independent blocks, each block
//! is enumerated on its own and the full set is the Cartesian product of the
//! block sets, which is never materialized.

mod db;
mod set;

use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::actionset::{ActionSetSpec, DomainError};
use crate::point::{l1_norm, Point};
use crate::solver::{search, SearchOptions, SolveStatus, DEFAULT_NODE_BUDGET};

pub use db::{DbError, DbStats, ReachableDb};
pub use set::{GenerationStats, ReachableSet};

use set::{ActionStore, Block};

pub const DEFAULT_MAX_POINTS: usize = 1_000_000;
pub const DEFAULT_MAX_TIME: Duration = Duration::from_secs(60);

/// Stopping conditions for one enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest number of points, anchor included, a set may hold.
    pub max_points: usize,
    pub max_time: Duration,
    /// Node budget for each individual solver call.
    pub node_budget: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_points: DEFAULT_MAX_POINTS,
            max_time: DEFAULT_MAX_TIME,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<(), ReachableError> {
        if self.max_points == 0 {
            return Err(ReachableError::InvalidLimits("max_points must be positive"));
        }
        if self.max_time.is_zero() {
            return Err(ReachableError::InvalidLimits("max_time must be positive"));
        }
        if self.node_budget == 0 {
            return Err(ReachableError::InvalidLimits("node_budget must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachableError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid limits: {0}")]
    InvalidLimits(&'static str),
    #[error("point {index}: {source}")]
    AtPoint {
        index: usize,
        #[source]
        source: DomainError,
    },
}

/// Connected components of the constraint graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeaturePartition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl FeaturePartition {
    /// Blocks in order of their smallest feature, each sorted.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, feature: usize) -> usize {
        self.block_of[feature]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

pub fn partition(spec: &ActionSetSpec) -> FeaturePartition {
    let d = spec.dim();
    let mut parent: Vec<usize> = (0..d).collect();
    for (u, v) in spec.constraint_graph().edges() {
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru.max(rv)] = ru.min(rv);
        }
    }
    let mut block_of = vec![usize::MAX; d];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for j in 0..d {
        let root = find(&mut parent, j);
        if block_of[root] == usize::MAX {
            block_of[root] = blocks.len();
            blocks.push(Vec::new());
        }
        block_of[j] = block_of[root];
        blocks[block_of[j]].push(j);
    }
    FeaturePartition { blocks, block_of }
}

/// How to enumerate when the feature partition has several blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Per-block enumeration with a lazy product when there is more than one block.
    #[default]
    Decomposed,
    /// One joint enumeration over the whole feature space.
    Flat,
}

pub fn get_reachable_set(spec: &ActionSetSpec, x: &[i64], limits: &Limits) -> Result<ReachableSet, ReachableError> {
    get_reachable_set_with(spec, x, limits, Strategy::Decomposed)
}

pub fn get_reachable_set_with(
    spec: &ActionSetSpec,
    x: &[i64],
    limits: &Limits,
    strategy: Strategy,
) -> Result<ReachableSet, ReachableError> {
    limits.validate()?;
    spec.validate_point(x)?;
    let parts = partition(spec);
    let (store, complete, stats) = if strategy == Strategy::Decomposed && parts.len() > 1 {
        enumerate_blocks(spec, x, limits, &parts)
    } else {
        enumerate_flat(spec, x, limits)
    };
    Ok(ReachableSet::new(Point::from(x), Arc::new(store), complete, stats))
}

/// Outcome of one pass of repeated solving.
struct Run {
    found: Vec<Vec<i64>>,
    complete: bool,
    stats: GenerationStats,
}

/// Finds actions in solution order until infeasible or `max_found` actions
/// are in hand and one more exists.
fn run_solver(spec: &ActionSetSpec, x: &[i64], limits: &Limits, max_found: usize, block_of: Option<&[usize]>) -> Run {
    let start = Instant::now();
    let deadline = start + limits.max_time;
    let mut excluded: HashSet<Vec<i64>> = HashSet::new();
    let mut found: Vec<Vec<i64>> = Vec::new();
    let mut stats = GenerationStats::default();
    let complete = loop {
        if Instant::now() >= deadline {
            break false;
        }
        let opts = SearchOptions {
            floor: found.last().map(Vec::as_slice),
            block_of,
            deadline: Some(deadline),
        };
        let out = search(spec, x, &excluded, limits.node_budget, &opts);
        stats.solves += 1;
        stats.nodes += out.nodes_explored;
        match out.status {
            SolveStatus::Infeasible => break true,
            SolveStatus::BudgetExhausted => break false,
            SolveStatus::Found => {
                if found.len() >= max_found {
                    break false;
                }
                let a = out.action.expect("found action").into_inner();
                stats.found_norms.push(l1_norm(&a));
                excluded.insert(a.clone());
                found.push(a);
            }
        }
    };
    stats.elapsed = start.elapsed();
    Run { found, complete, stats }
}

fn enumerate_flat(spec: &ActionSetSpec, x: &[i64], limits: &Limits) -> (ActionStore, bool, GenerationStats) {
    let run = run_solver(spec, x, limits, limits.max_points - 1, None);
    let mut actions = Vec::with_capacity(run.found.len() + 1);
    actions.push(vec![0; spec.dim()]);
    actions.extend(run.found);
    (ActionStore::flat(actions), run.complete, run.stats)
}

/// Enumerates every action that changes a single block, then assembles the
/// product. Each non-null block action costs one solver call, plus one call
/// to prove there are no more.
fn enumerate_blocks(
    spec: &ActionSetSpec,
    x: &[i64],
    limits: &Limits,
    parts: &FeaturePartition,
) -> (ActionStore, bool, GenerationStats) {
    // A product of per-block lists is at least as large as their total length,
    // so once that passes max_points the set cannot be complete anyway.
    let run = run_solver(spec, x, limits, limits.max_points - 1, Some(&parts.block_of));
    let mut per_block: Vec<Vec<Vec<i64>>> = parts
        .blocks
        .iter()
        .map(|b| vec![vec![0; b.len()]])
        .collect();
    for a in &run.found {
        let j = a.iter().position(|&v| v != 0).expect("non-null action");
        let k = parts.block_of[j];
        per_block[k].push(parts.blocks[k].iter().map(|&f| a[f]).collect());
    }
    let blocks: Vec<Block> = parts
        .blocks
        .iter()
        .zip(per_block)
        .filter(|(_, actions)| actions.len() > 1)
        .map(|(features, actions)| Block::new(features.clone(), actions))
        .collect();
    let size = blocks
        .iter()
        .map(|b| b.actions.len() as u128)
        .fold(1u128, |acc, r| acc.saturating_mul(r));
    let overflow = size > limits.max_points as u128;
    let store = ActionStore::Product {
        dim: spec.dim(),
        blocks,
        cap: overflow.then_some(limits.max_points),
    };
    (store, run.complete && !overflow, run.stats)
}
