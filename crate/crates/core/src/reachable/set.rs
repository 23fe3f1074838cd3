use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::{Arc, OnceLock};
use std::time::Duration;

use crate::point::{l1_norm, Point};

/// Counters describing how a reachable set was produced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenerationStats {
    /// Calls to the minimal-action solver, including the final infeasible one.
    pub solves: u64,
    /// Search nodes visited across all solves.
    pub nodes: u64,
    pub elapsed: Duration,
    /// Norm of each action found, in the order the solver returned them.
    pub found_norms: Vec<u64>,
}

/// The reachable actions for one feature block, in block-local coordinates.
#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub features: Vec<usize>,
    /// Null action first, then the rest in non-decreasing norm.
    pub actions: Vec<Vec<i64>>,
    members: HashSet<Vec<i64>>,
    /// Action indices grouped by norm.
    by_norm: BTreeMap<u64, Vec<usize>>,
}

impl Block {
    pub(crate) fn new(features: Vec<usize>, actions: Vec<Vec<i64>>) -> Self {
        let mut by_norm: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, a) in actions.iter().enumerate() {
            by_norm.entry(l1_norm(a)).or_default().push(i);
        }
        let members = actions.iter().cloned().collect();
        Self {
            features,
            actions,
            members,
            by_norm,
        }
    }
}

/// Actions relative to an anchor. Shared between anchors that only differ on
/// coordinates no action can touch.
#[derive(Debug)]
pub(crate) enum ActionStore {
    /// Explicit list, null action first.
    Flat {
        actions: Vec<Vec<i64>>,
        members: OnceLock<HashSet<Vec<i64>>>,
    },
    /// Cartesian product of per-block action lists, optionally truncated to
    /// its first `cap` elements in iteration order.
    Product {
        dim: usize,
        blocks: Vec<Block>,
        cap: Option<usize>,
    },
}

impl ActionStore {
    pub(crate) fn flat(actions: Vec<Vec<i64>>) -> Self {
        ActionStore::Flat {
            actions,
            members: OnceLock::new(),
        }
    }

    fn full_len(&self) -> u128 {
        match self {
            ActionStore::Flat { actions, .. } => actions.len() as u128,
            ActionStore::Product { blocks, .. } => blocks
                .iter()
                .map(|b| b.actions.len() as u128)
                .fold(1u128, |acc, r| acc.saturating_mul(r)),
        }
    }

    fn len(&self) -> usize {
        let full = self.full_len();
        let capped = match self {
            ActionStore::Product { cap: Some(c), .. } => full.min(*c as u128),
            _ => full,
        };
        usize::try_from(capped).unwrap_or(usize::MAX)
    }

    fn contains(&self, action: &[i64]) -> bool {
        match self {
            ActionStore::Flat { actions, members } => members
                .get_or_init(|| actions.iter().cloned().collect())
                .contains(action),
            ActionStore::Product { dim, blocks, cap } => {
                if action.len() != *dim {
                    return false;
                }
                let mut covered = 0usize;
                for b in blocks {
                    let local: Vec<i64> = b.features.iter().map(|&j| action[j]).collect();
                    if !b.members.contains(&local) {
                        return false;
                    }
                    covered += local.iter().filter(|&&v| v != 0).count();
                }
                let total = action.iter().filter(|&&v| v != 0).count();
                if covered != total {
                    return false;
                }
                match cap {
                    Some(c) if (*c as u128) < self.full_len() => {
                        ProductIter::new(*dim, blocks).take(*c).any(|a| a == action)
                    }
                    _ => true,
                }
            }
        }
    }

    fn actions(&self) -> Box<dyn Iterator<Item = Vec<i64>> + '_> {
        match self {
            ActionStore::Flat { actions, .. } => Box::new(actions.iter().cloned()),
            ActionStore::Product { dim, blocks, cap } => {
                let it = ProductIter::new(*dim, blocks);
                match cap {
                    Some(c) => Box::new(it.take(*c)),
                    None => Box::new(it),
                }
            }
        }
    }
}

/// Visits the product of block action lists in non-decreasing total norm.
///
/// For each total norm, walks the ways to split it across blocks in
/// lexicographic order, and for each split runs an odometer over the block
/// actions of the chosen norms.
struct ProductIter<'a> {
    dim: usize,
    blocks: &'a [Block],
    /// `achievable[k]` holds every total norm the blocks `k..` can produce.
    achievable: Vec<BTreeSet<u64>>,
    max_norm: u64,
    norm: u64,
    split: Option<Vec<u64>>,
    odometer: Vec<usize>,
    done: bool,
}

impl<'a> ProductIter<'a> {
    fn new(dim: usize, blocks: &'a [Block]) -> Self {
        let k = blocks.len();
        let mut achievable = vec![BTreeSet::from([0u64]); k + 1];
        for i in (0..k).rev() {
            let mut sums = BTreeSet::new();
            for &n in blocks[i].by_norm.keys() {
                for &rest in &achievable[i + 1] {
                    sums.insert(n + rest);
                }
            }
            achievable[i] = sums;
        }
        let max_norm = achievable[0].iter().next_back().copied().unwrap_or(0);
        let mut it = Self {
            dim,
            blocks,
            achievable,
            max_norm,
            norm: 0,
            split: None,
            odometer: vec![0; k],
            done: false,
        };
        it.split = it.first_split_from(0, &[], 0);
        it
    }

    /// Smallest split of `norm` extending `prefix` (blocks `0..start`).
    fn first_split_from(&self, start: usize, prefix: &[u64], norm: u64) -> Option<Vec<u64>> {
        let mut split = prefix.to_vec();
        let mut remaining = norm.checked_sub(prefix.iter().sum())?;
        if !self.achievable[start].contains(&remaining) {
            return None;
        }
        for k in start..self.blocks.len() {
            let n = self.blocks[k]
                .by_norm
                .keys()
                .copied()
                .find(|&n| n <= remaining && self.achievable[k + 1].contains(&(remaining - n)))?;
            split.push(n);
            remaining -= n;
        }
        Some(split)
    }

    fn next_split(&self, split: &[u64]) -> Option<Vec<u64>> {
        let k = self.blocks.len();
        for i in (0..k.saturating_sub(1)).rev() {
            let prefix_sum: u64 = split[..i].iter().sum();
            let candidates = self.blocks[i].by_norm.range(split[i] + 1..).map(|(&n, _)| n);
            for n in candidates {
                if prefix_sum + n > self.norm {
                    break;
                }
                let mut prefix = split[..i].to_vec();
                prefix.push(n);
                if let Some(s) = self.first_split_from(i + 1, &prefix, self.norm) {
                    return Some(s);
                }
            }
        }
        None
    }

    fn advance_split(&mut self) {
        let next = self.split.as_ref().and_then(|s| self.next_split(s));
        self.split = next;
        while self.split.is_none() {
            self.norm += 1;
            if self.norm > self.max_norm {
                self.done = true;
                return;
            }
            self.split = self.first_split_from(0, &[], self.norm);
        }
        self.odometer.iter_mut().for_each(|o| *o = 0);
    }
}

impl Iterator for ProductIter<'_> {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        if self.split.is_none() {
            self.advance_split();
            if self.done {
                return None;
            }
        }
        let split = self.split.as_ref().expect("split present");
        let mut action = vec![0i64; self.dim];
        for (k, block) in self.blocks.iter().enumerate() {
            let bucket = &block.by_norm[&split[k]];
            let local = &block.actions[bucket[self.odometer[k]]];
            for (&j, &v) in block.features.iter().zip(local) {
                action[j] = v;
            }
        }
        // Odometer with the last block spinning fastest.
        let mut k = self.blocks.len();
        loop {
            if k == 0 {
                self.advance_split();
                break;
            }
            k -= 1;
            let bucket_len = self.blocks[k].by_norm[&split[k]].len();
            self.odometer[k] += 1;
            if self.odometer[k] < bucket_len {
                break;
            }
            self.odometer[k] = 0;
        }
        Some(action)
    }
}

/// An enumerated subset of the points reachable from an anchor.
///
/// Points are kept as actions relative to the anchor. When the set is
/// `complete` it equals the full reachable set; otherwise it is an interior
/// approximation that still contains the anchor.
#[derive(Debug, Clone)]
pub struct ReachableSet {
    anchor: Point,
    store: Arc<ActionStore>,
    complete: bool,
    stats: GenerationStats,
}

impl ReachableSet {
    pub(crate) fn new(anchor: Point, store: Arc<ActionStore>, complete: bool, stats: GenerationStats) -> Self {
        Self {
            anchor,
            store,
            complete,
            stats,
        }
    }

    pub fn anchor(&self) -> &Point {
        &self.anchor
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn stats(&self) -> &GenerationStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, point: &[i64]) -> bool {
        match self.anchor.action_to(point) {
            Some(a) => self.store.contains(&a),
            None => false,
        }
    }

    /// Actions relative to the anchor, null action first, in non-decreasing norm.
    pub fn actions(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        self.store.actions()
    }

    /// Points in stored order, anchor first.
    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        self.store
            .actions()
            .map(move |a| Point::new(self.anchor.iter().zip(&a).map(|(x, v)| x + v).collect()))
    }

    /// Materializes every point. Prefer [`ReachableSet::iter`] for large sets.
    pub fn points(&self) -> Vec<Point> {
        self.iter().collect()
    }

    /// The same actions taken from another anchor.
    pub(crate) fn translated(&self, anchor: Point) -> ReachableSet {
        ReachableSet {
            anchor,
            store: Arc::clone(&self.store),
            complete: self.complete,
            stats: GenerationStats::default(),
        }
    }

    pub(crate) fn shares_store_with(&self, other: &ReachableSet) -> bool {
        Arc::ptr_eq(&self.store, &other.store)
    }
}
