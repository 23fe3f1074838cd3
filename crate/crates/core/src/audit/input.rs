//! Dataset and method-output files.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::actionset::{ActionSetSpec, DomainError};
use crate::point::{Action, Point};

/// Name of the optional label column.
pub const LABEL_COLUMN: &str = "y";

#[derive(Debug, Error)]
pub enum InputError {
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error("header: {0}")]
    Header(String),
    #[error("row {row} (line {line}), column {column:?}: {message}")]
    Cell {
        row: usize,
        line: u64,
        column: String,
        message: String,
    },
    #[error("row {row} (line {line}): {source}")]
    Domain {
        row: usize,
        line: u64,
        #[source]
        source: DomainError,
    },
}

/// Rows of integer features in spec order, with optional 0/1 labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Point>,
    pub labels: Option<Vec<i64>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows paired with their labels, when the dataset has them.
    pub fn labeled(&self) -> Option<Vec<(Point, i64)>> {
        let labels = self.labels.as_ref()?;
        Some(self.rows.iter().cloned().zip(labels.iter().copied()).collect())
    }
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

fn csv_error(e: csv::Error) -> InputError {
    let line = e.position().map_or(0, |p| p.line());
    InputError::Format {
        line,
        message: e.to_string(),
    }
}

/// Reads a comma-separated dataset whose header names the spec's features in
/// order. A column named `y` may appear anywhere and holds 0/1 labels.
pub fn ingest_dataset(spec: &ActionSetSpec, text: &str) -> Result<Dataset, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    let label_at = header.iter().position(|h| h == LABEL_COLUMN);
    let names: Vec<&String> = header.iter().enumerate().filter(|(i, _)| Some(*i) != label_at).map(|(_, h)| h).collect();
    let expected: Vec<&str> = spec.feature_names().collect();
    if names.len() != expected.len() || names.iter().zip(&expected).any(|(a, b)| a.as_str() != *b) {
        let at = names
            .iter()
            .zip(&expected)
            .position(|(a, b)| a.as_str() != *b)
            .unwrap_or(names.len().min(expected.len()));
        return Err(InputError::Header(format!(
            "expected the spec's {} features in order; column {} is {:?}, expected {:?}",
            expected.len(),
            at + 1,
            names.get(at).map(|s| s.as_str()).unwrap_or("<missing>"),
            expected.get(at).copied().unwrap_or("<none>"),
        )));
    }

    let mut rows = Vec::new();
    let mut labels = label_at.map(|_| Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        if record.len() != header.len() {
            return Err(InputError::Format {
                line,
                message: format!("row {row} has {} fields, header has {}", record.len(), header.len()),
            });
        }
        let mut values = Vec::with_capacity(expected.len());
        for (i, cell) in record.iter().enumerate() {
            let v: i64 = cell.parse().map_err(|_| InputError::Cell {
                row,
                line,
                column: header[i].clone(),
                message: format!("{cell:?} is not an integer"),
            })?;
            if Some(i) == label_at {
                if v != 0 && v != 1 {
                    return Err(InputError::Cell {
                        row,
                        line,
                        column: header[i].clone(),
                        message: format!("label must be 0 or 1, found {v}"),
                    });
                }
                if let Some(l) = labels.as_mut() {
                    l.push(v);
                }
            } else {
                values.push(v);
            }
        }
        if let Err(source) = spec.validate_point(&values) {
            return Err(match source {
                DomainError::OutOfBounds { feature, value, lb, ub } => InputError::Cell {
                    row,
                    line,
                    column: feature,
                    message: format!("{value} is outside [{lb}, {ub}]"),
                },
                source => InputError::Domain { row, line, source },
            });
        }
        rows.push(Point::new(values));
    }
    Ok(Dataset {
        feature_names: expected.iter().map(|s| s.to_string()).collect(),
        rows,
        labels,
    })
}

/// Per-row outputs of a third-party recourse method.
///
/// Each line is `row_index,a_1,...,a_d`. Leaving every action field blank
/// records that the method returned no action. A header line is allowed.
pub fn parse_method_outputs(text: &str, dim: usize, n_rows: usize) -> Result<BTreeMap<usize, Option<Action>>, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line = line_of(&record);
        let bad = |message: String| InputError::Format { line, message };
        if record.iter().all(str::is_empty) {
            continue;
        }
        let first = record.get(0).unwrap_or("");
        let Ok(row) = first.parse::<usize>() else {
            if i == 0 {
                continue;
            }
            return Err(bad(format!("row index {first:?} is not a non-negative integer")));
        };
        if row >= n_rows {
            return Err(bad(format!("row index {row} is past the last row ({})", n_rows.saturating_sub(1))));
        }
        let fields: Vec<&str> = record.iter().skip(1).collect();
        let action = if fields.iter().all(|f| f.is_empty()) {
            None
        } else {
            if fields.len() != dim {
                return Err(bad(format!("expected {dim} action values, found {}", fields.len())));
            }
            let values = fields
                .iter()
                .map(|f| f.parse::<i64>().map_err(|_| bad(format!("{f:?} is not an integer"))))
                .collect::<Result<Vec<_>, _>>()?;
            Some(Action::new(values))
        };
        if out.insert(row, action).is_some() {
            return Err(bad(format!("row index {row} appears twice")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actionset::{FeatureSpec, Sign};

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

    #[test]
    fn reads_rows_and_labels() {
        let d = ingest_dataset(&reapplicant(), "reapplicant,age_geq_60\n0,0\n0,1\n1,0\n1,1\n").unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.labels, None);
        let d = ingest_dataset(&reapplicant(), "y,reapplicant,age_geq_60\n1,0,0\n0, 1 ,1\n").unwrap();
        assert_eq!(d.rows, vec![Point::from([0, 0]), Point::from([1, 1])]);
        assert_eq!(d.labels, Some(vec![1, 0]));
    }

    #[test]
    fn errors_name_row_and_column() {
        let err = ingest_dataset(&reapplicant(), "reapplicant,age_geq_60\n0,0\n0,2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 1") && msg.contains("age_geq_60"), "{msg}");
        let err = ingest_dataset(&reapplicant(), "reapplicant,age_geq_60\n0,x\n").unwrap_err();
        assert!(matches!(err, InputError::Cell { row: 0, .. }));
        assert!(matches!(
            ingest_dataset(&reapplicant(), "age_geq_60,reapplicant\n0,0\n"),
            Err(InputError::Header(_))
        ));
        assert!(matches!(
            ingest_dataset(&reapplicant(), "reapplicant,age_geq_60\n0\n"),
            Err(InputError::Format { .. })
        ));
        assert!(matches!(
            ingest_dataset(&reapplicant(), "reapplicant,age_geq_60,y\n0,0,2\n"),
            Err(InputError::Cell { .. })
        ));
    }

    #[test]
    fn method_outputs() {
        let m = parse_method_outputs("row_index,a1,a2\n0,1,0\n2,,\n3,-1,0\n", 2, 4).unwrap();
        assert_eq!(m[&0], Some(Action::from([1, 0])));
        assert_eq!(m[&2], None);
        assert_eq!(m[&3], Some(Action::from([-1, 0])));
        assert!(!m.contains_key(&1));
        for bad in ["0,1\n", "5,1,0\n", "0,1,0\n0,1,0\n", "0,x,1\n", "0,1,\n", "0,0\nfoo,1,1\n"] {
            assert!(parse_method_outputs(bad, 2, 4).is_err(), "{bad:?}");
        }
    }
}
