//! Reachable sets for a whole dataset, with sharing across points and a
//! line-oriented file format.
//!
//! ```text
//! spec_hash=<hex>
//! anchor=<csv-ints> complete=<0|1>
//! <csv-ints>
//! ...
//! ```
//!
//! Each anchor line is followed by the points of its set, one per line,
//! anchor first.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use super::set::ActionStore;
use super::{get_reachable_set, GenerationStats, Limits, ReachableError, ReachableSet};
use crate::actionset::{ActionSetSpec, DomainError};
use crate::point::{join_csv, parse_csv_ints, Point};

#[derive(Debug, Error)]
pub enum DbError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: {source}")]
    Domain {
        line: usize,
        #[source]
        source: DomainError,
    },
    #[error("reachable-set file was built for spec {found}, current spec is {expected}")]
    HashMismatch { expected: String, found: String },
}

/// Work done while building or loading a database.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DbStats {
    /// Distinct enumerations run, one per canonical key.
    pub enumerations: usize,
    /// Solver calls across all enumerations.
    pub solves: u64,
    /// Sets obtained by translating another anchor's enumeration.
    pub translated: usize,
    /// Sets read from a file.
    pub loaded: usize,
}

/// One reachable set per distinct point.
#[derive(Debug, Clone)]
pub struct ReachableDb {
    spec_hash: String,
    relevant: Vec<usize>,
    sets: HashMap<Point, ReachableSet>,
    canonical: HashMap<Vec<i64>, Point>,
    stats: DbStats,
}

impl ReachableDb {
    pub fn new(spec: &ActionSetSpec) -> Self {
        Self {
            spec_hash: spec.spec_hash(),
            relevant: spec.action_relevant_features(),
            sets: HashMap::new(),
            canonical: HashMap::new(),
            stats: DbStats::default(),
        }
    }

    /// Builds sets for `points`, running up to `workers` enumerations at once.
    pub fn build(spec: &ActionSetSpec, points: &[Point], limits: &Limits, workers: usize) -> Result<Self, ReachableError> {
        let mut db = Self::new(spec);
        db.extend(spec, points, limits, workers)?;
        Ok(db)
    }

    /// Adds sets for any of `points` not already present.
    pub fn extend(
        &mut self,
        spec: &ActionSetSpec,
        points: &[Point],
        limits: &Limits,
        workers: usize,
    ) -> Result<(), ReachableError> {
        limits.validate()?;
        for (index, p) in points.iter().enumerate() {
            spec.validate_point(p)
                .map_err(|source| ReachableError::AtPoint { index, source })?;
        }

        let mut pending: Vec<(Vec<i64>, &Point)> = Vec::new();
        let mut queued: HashMap<Vec<i64>, usize> = HashMap::new();
        for p in points {
            if self.sets.contains_key(p) {
                continue;
            }
            let key = self.key(p);
            if !self.canonical.contains_key(&key) && !queued.contains_key(&key) {
                queued.insert(key.clone(), pending.len());
                pending.push((key, p));
            }
        }

        let run = |(_, p): &(Vec<i64>, &Point)| get_reachable_set(spec, p, limits);
        let built: Vec<Result<ReachableSet, ReachableError>> = if workers > 1 && pending.len() > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("thread pool");
            pool.install(|| pending.par_iter().map(run).collect())
        } else {
            pending.iter().map(run).collect()
        };
        for ((key, p), set) in pending.iter().zip(built) {
            let set = set?;
            self.stats.enumerations += 1;
            self.stats.solves += set.stats().solves;
            self.canonical.insert(key.clone(), (*p).clone());
            self.sets.insert((*p).clone(), set);
        }

        for p in points {
            if self.sets.contains_key(p) {
                continue;
            }
            let source = &self.canonical[&self.key(p)];
            let set = self.sets[source].translated(p.clone());
            self.stats.translated += 1;
            self.sets.insert(p.clone(), set);
        }
        Ok(())
    }

    fn key(&self, p: &[i64]) -> Vec<i64> {
        self.relevant.iter().map(|&j| p[j]).collect()
    }

    pub fn get(&self, x: &[i64]) -> Option<&ReachableSet> {
        self.sets.get(x)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.sets.contains_key(x)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn stats(&self) -> &DbStats {
        &self.stats
    }

    pub fn spec_hash(&self) -> &str {
        &self.spec_hash
    }

    /// Anchors in sorted order.
    pub fn anchors(&self) -> Vec<&Point> {
        let mut a: Vec<&Point> = self.sets.keys().collect();
        a.sort();
        a
    }

    /// Whether two anchors share one enumeration.
    pub fn shares_enumeration(&self, a: &[i64], b: &[i64]) -> bool {
        match (self.sets.get(a), self.sets.get(b)) {
            (Some(x), Some(y)) => x.shares_store_with(y),
            _ => false,
        }
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "spec_hash={}", self.spec_hash)?;
        for anchor in self.anchors() {
            let set = &self.sets[anchor];
            writeln!(out, "anchor={} complete={}", anchor, u8::from(set.is_complete()))?;
            for p in set.iter() {
                writeln!(out, "{}", join_csv(&p))?;
            }
        }
        out.flush()
    }

    /// Writes to a temporary sibling file, then renames it into place.
    pub fn save(&self, path: &Path) -> io::Result<()> {
        let tmp = path.with_extension("partial");
        self.write_to(BufWriter::new(File::create(&tmp)?))?;
        std::fs::rename(&tmp, path)
    }

    pub fn load(spec: &ActionSetSpec, path: &Path) -> Result<Self, DbError> {
        Self::read_from(spec, BufReader::new(File::open(path)?))
    }

    pub fn read_from<R: BufRead>(spec: &ActionSetSpec, input: R) -> Result<Self, DbError> {
        let mut db = Self::new(spec);
        let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));

        let (_, header) = lines.next().ok_or(DbError::Format {
            line: 1,
            message: "empty file".into(),
        })?;
        let header = header?;
        let found = header.strip_prefix("spec_hash=").ok_or_else(|| DbError::Format {
            line: 1,
            message: "expected spec_hash=<hex>".into(),
        })?;
        if found != db.spec_hash {
            return Err(DbError::HashMismatch {
                expected: db.spec_hash.clone(),
                found: found.to_string(),
            });
        }

        let mut current: Option<(usize, Point, bool, Vec<Vec<i64>>)> = None;
        for (line_no, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("anchor=") {
                if let Some(entry) = current.take() {
                    db.insert_loaded(entry)?;
                }
                let (csv, flag) = rest.rsplit_once(' ').ok_or_else(|| DbError::Format {
                    line: line_no,
                    message: "expected anchor=<csv-ints> complete=<0|1>".into(),
                })?;
                let complete = match flag {
                    "complete=1" => true,
                    "complete=0" => false,
                    _ => {
                        return Err(DbError::Format {
                            line: line_no,
                            message: format!("bad completeness flag {flag:?}"),
                        })
                    }
                };
                let anchor = parse_point(spec, csv, line_no)?;
                if db.sets.contains_key(&anchor) {
                    return Err(DbError::Format {
                        line: line_no,
                        message: format!("anchor {anchor} appears twice"),
                    });
                }
                current = Some((line_no, anchor, complete, Vec::new()));
            } else {
                let Some((_, anchor, _, actions)) = current.as_mut() else {
                    return Err(DbError::Format {
                        line: line_no,
                        message: "point before the first anchor line".into(),
                    });
                };
                let p = parse_point(spec, &line, line_no)?;
                if !spec.admits(anchor, &anchor.action_to(&p).expect("same dimension")) {
                    return Err(DbError::Format {
                        line: line_no,
                        message: format!("{p} is not reachable from {anchor}"),
                    });
                }
                actions.push(anchor.action_to(&p).expect("same dimension").into_inner());
            }
        }
        if let Some(entry) = current.take() {
            db.insert_loaded(entry)?;
        }
        Ok(db)
    }

    fn insert_loaded(&mut self, (line, anchor, complete, mut actions): (usize, Point, bool, Vec<Vec<i64>>)) -> Result<(), DbError> {
        let null = vec![0; anchor.dim()];
        match actions.iter().position(|a| *a == null) {
            Some(0) => {}
            Some(i) => {
                let a = actions.remove(i);
                actions.insert(0, a);
            }
            None => {
                return Err(DbError::Format {
                    line,
                    message: format!("set of {anchor} does not contain its anchor"),
                })
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(actions.len());
        if !actions.iter().all(|a| seen.insert(a)) {
            return Err(DbError::Format {
                line,
                message: format!("set of {anchor} repeats a point"),
            });
        }
        let set = ReachableSet::new(
            anchor.clone(),
            Arc::new(ActionStore::flat(actions)),
            complete,
            GenerationStats::default(),
        );
        self.canonical.entry(self.key(&anchor)).or_insert_with(|| anchor.clone());
        self.sets.insert(anchor, set);
        self.stats.loaded += 1;
        Ok(())
    }
}

fn parse_point(spec: &ActionSetSpec, text: &str, line: usize) -> Result<Point, DbError> {
    let values = parse_csv_ints(text).map_err(|e| DbError::Format {
        line,
        message: format!("bad integer list: {e}"),
    })?;
    spec.validate_point(&values)
        .map_err(|source| DbError::Domain { line, source })?;
    Ok(Point::new(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actionset::{FeatureSpec, Sign, ValueType};

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

    fn with_immutable() -> ActionSetSpec {
        ActionSetSpec::new(
            vec![
                FeatureSpec::immutable("group", ValueType::Integer, 0, 9),
                FeatureSpec::binary("a", true, Sign::NonNegative),
                FeatureSpec::binary("b", true, Sign::Free),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn reapplicant_cells() {
        let spec = reapplicant();
        let pts: Vec<Point> = [[0, 0], [0, 1], [1, 0], [1, 1]].into_iter().map(Point::from).collect();
        let db = ReachableDb::build(&spec, &pts, &Limits::default(), 2).unwrap();
        let sizes: Vec<usize> = pts.iter().map(|p| db.get(p).unwrap().len()).collect();
        assert_eq!(sizes, vec![4, 2, 2, 1]);
        assert_eq!(db.stats().enumerations, 4);
    }

    #[test]
    fn immutable_difference_shares_one_enumeration() {
        let spec = with_immutable();
        let pts = vec![Point::from([3, 0, 1]), Point::from([7, 0, 1]), Point::from([7, 0, 1])];
        let db = ReachableDb::build(&spec, &pts, &Limits::default(), 1).unwrap();
        assert_eq!(db.len(), 2);
        assert_eq!(db.stats().enumerations, 1);
        assert_eq!(db.stats().translated, 1);
        assert!(db.shares_enumeration(&[3, 0, 1], &[7, 0, 1]));
        let direct = get_reachable_set(&spec, &[7, 0, 1], &Limits::default()).unwrap();
        let mut a = db.get(&[7, 0, 1]).unwrap().points();
        let mut b = direct.points();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p[0] == 7));
    }

    #[test]
    fn bad_point_reports_index() {
        let spec = reapplicant();
        let pts = vec![Point::from([0, 0]), Point::from([0, 5])];
        assert!(matches!(
            ReachableDb::build(&spec, &pts, &Limits::default(), 1),
            Err(ReachableError::AtPoint { index: 1, .. })
        ));
    }

    #[test]
    fn file_round_trip() {
        let spec = with_immutable();
        let pts = vec![Point::from([3, 0, 1]), Point::from([4, 1, 0])];
        let db = ReachableDb::build(&spec, &pts, &Limits::default(), 1).unwrap();
        let mut buf = Vec::new();
        db.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(&format!("spec_hash={}\nanchor=3,0,1 complete=1\n3,0,1\n", spec.spec_hash())));

        let loaded = ReachableDb::read_from(&spec, text.as_bytes()).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded.stats().loaded, 2);
        for p in &pts {
            let (x, y) = (db.get(p).unwrap(), loaded.get(p).unwrap());
            assert_eq!(x.points(), y.points());
            assert_eq!(x.is_complete(), y.is_complete());
        }

        let mut again = loaded.clone();
        again
            .extend(&spec, &[Point::from([9, 0, 1])], &Limits::default(), 1)
            .unwrap();
        assert_eq!(again.stats().enumerations, 0);
        assert_eq!(again.stats().translated, 1);
    }

    #[test]
    fn rejects_other_spec_and_bad_content() {
        let spec = reapplicant();
        let bad_hash = "spec_hash=abc\nanchor=0,0 complete=1\n0,0\n";
        assert!(matches!(
            ReachableDb::read_from(&spec, bad_hash.as_bytes()),
            Err(DbError::HashMismatch { .. })
        ));
        let h = spec.spec_hash();
        let cases = [
            format!("spec_hash={h}\n0,0\n"),
            format!("spec_hash={h}\nanchor=0,0 complete=2\n0,0\n"),
            format!("spec_hash={h}\nanchor=0,0 complete=1\n0,1\n"),
            format!("spec_hash={h}\nanchor=1,1 complete=1\n1,1\n0,0\n"),
            format!("spec_hash={h}\nanchor=0,0 complete=1\n0,0\n0,x\n"),
            format!("spec_hash={h}\nanchor=0,0 complete=1\n0,0\n0,0\n"),
            String::new(),
        ];
        for text in cases {
            assert!(ReachableDb::read_from(&spec, text.as_bytes()).is_err(), "{text:?}");
        }
    }
}
