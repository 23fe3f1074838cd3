//! Audit results and the files they are written to.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::point::{join_csv, Point};
use crate::verify::{MethodOutputVerdict, Verdict};

/// Outcome for one audited row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointResult {
    pub row: usize,
    pub anchor: Point,
    /// The model's prediction at the row itself.
    pub prediction: bool,
    pub verdict: Verdict,
    pub witness: Option<Point>,
    pub rset_size: usize,
    pub complete: bool,
    pub method_output: Option<MethodOutputVerdict>,
}

/// Verdict shares over the rows the model denies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates {
    pub n_rows: usize,
    pub n_denied: usize,
    pub n_no_recourse: usize,
    pub n_recourse: usize,
    pub n_abstain: usize,
    /// Percentages are `null` when no row is denied.
    pub pct_no_recourse: Option<f64>,
    pub pct_recourse: Option<f64>,
    pub pct_abstain: Option<f64>,
}

/// How a third-party method's outputs fare on the denied rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodEval {
    pub n_valid_action: usize,
    pub n_loopholes: usize,
    pub n_no_action: usize,
    pub n_blindspots: usize,
    pub pct_outputs_action: Option<f64>,
    pub pct_loopholes: Option<f64>,
    pub pct_outputs_no_action: Option<f64>,
    pub pct_blindspots: Option<f64>,
}

/// Work counters for a run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditStats {
    /// Reachable sets enumerated during this run.
    pub enumerations: usize,
    /// Solver calls made during this run.
    pub solver_calls: u64,
    /// Reachable sets obtained by translating another row's set.
    pub translated_sets: usize,
    /// Reachable sets read from a saved file.
    pub loaded_sets: usize,
    /// Points sent to the model, across all workers.
    pub model_queries: u64,
    /// Batches sent to the model, across all workers.
    pub model_round_trips: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub per_point: Vec<PointResult>,
    pub aggregates: Aggregates,
    pub method_eval: Option<MethodEval>,
    pub stats: AuditStats,
}

fn pct(count: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| 100.0 * count as f64 / total as f64)
}

impl AuditReport {
    pub fn new(per_point: Vec<PointResult>, n_rows: usize, n_denied: usize, with_method: bool, stats: AuditStats) -> Self {
        let denied: Vec<&PointResult> = per_point.iter().filter(|p| !p.prediction).collect();
        debug_assert_eq!(denied.len(), n_denied);
        let count = |v: Verdict| denied.iter().filter(|p| p.verdict == v).count();
        let (n_no, n_yes, n_abstain) = (count(Verdict::No), count(Verdict::Yes), count(Verdict::Abstain));
        let aggregates = Aggregates {
            n_rows,
            n_denied,
            n_no_recourse: n_no,
            n_recourse: n_yes,
            n_abstain,
            pct_no_recourse: pct(n_no, n_denied),
            pct_recourse: pct(n_yes, n_denied),
            pct_abstain: pct(n_abstain, n_denied),
        };
        let method_eval = with_method.then(|| {
            let count = |k: MethodOutputVerdict| denied.iter().filter(|p| p.method_output == Some(k)).count();
            let valid = count(MethodOutputVerdict::ValidAction);
            let loopholes = count(MethodOutputVerdict::Loophole);
            let no_action = count(MethodOutputVerdict::NoAction);
            let blindspots = count(MethodOutputVerdict::Blindspot);
            MethodEval {
                n_valid_action: valid,
                n_loopholes: loopholes,
                n_no_action: no_action,
                n_blindspots: blindspots,
                pct_outputs_action: pct(valid + loopholes, n_denied),
                pct_loopholes: pct(loopholes, n_denied),
                pct_outputs_no_action: pct(no_action + blindspots, n_denied),
                pct_blindspots: pct(blindspots, n_denied),
            }
        });
        Self {
            per_point,
            aggregates,
            method_eval,
            stats,
        }
    }

    pub fn verdict_of(&self, row: usize) -> Option<Verdict> {
        self.per_point.iter().find(|p| p.row == row).map(|p| p.verdict)
    }

    /// Contents of `per_point.csv`.
    pub fn per_point_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["row", "prediction", "verdict", "witness", "rset_size", "complete", "method_output"])
            .expect("in-memory write");
        for p in &self.per_point {
            w.write_record([
                p.row.to_string(),
                u8::from(p.prediction).to_string(),
                p.verdict.as_str().to_string(),
                p.witness.as_ref().map(|x| join_csv(x)).unwrap_or_default(),
                p.rset_size.to_string(),
                u8::from(p.complete).to_string(),
                p.method_output.map(|m| m.as_str().to_string()).unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }

    /// Contents of `rset_sizes.csv`: audited rows ordered by reachable-set size.
    pub fn rset_sizes_csv(&self) -> String {
        let mut rows: Vec<&PointResult> = self.per_point.iter().collect();
        rows.sort_by_key(|p| (p.rset_size, p.row));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["row", "anchor", "size", "complete", "verdict"])
            .expect("in-memory write");
        for p in rows {
            w.write_record([
                p.row.to_string(),
                join_csv(&p.anchor),
                p.rset_size.to_string(),
                u8::from(p.complete).to_string(),
                p.verdict.as_str().to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }

    /// Contents of `summary.json`. Only the `generated_at` field varies
    /// between runs on identical inputs.
    pub fn summary_json(&self, generated_at: &str) -> String {
        #[derive(Serialize)]
        struct Summary<'a> {
            aggregates: &'a Aggregates,
            method_eval: &'a Option<MethodEval>,
            stats: &'a AuditStats,
            generated_at: &'a str,
        }
        let mut s = serde_json::to_string_pretty(&Summary {
            aggregates: &self.aggregates,
            method_eval: &self.method_eval,
            stats: &self.stats,
            generated_at,
        })
        .expect("serializable");
        s.push('\n');
        s
    }

    /// Writes the three report files into `dir`, each via a temporary file
    /// renamed into place.
    pub fn write(&self, dir: &Path, generated_at: &str) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        write_atomic(&dir.join("per_point.csv"), &self.per_point_csv())?;
        write_atomic(&dir.join("rset_sizes.csv"), &self.rset_sizes_csv())?;
        write_atomic(&dir.join("summary.json"), &self.summary_json(generated_at))
    }
}

pub(crate) fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("partial");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Reads verdicts back from `per_point.csv` contents, keyed by row.
pub fn read_per_point_verdicts(text: &str) -> Result<Vec<(usize, Verdict)>, String> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let row = rec.get(0).and_then(|s| s.parse().ok()).ok_or("bad row index")?;
        let verdict = rec.get(2).and_then(Verdict::parse).ok_or("bad verdict")?;
        out.push((row, verdict));
    }
    Ok(out)
}
