//! Predictors running as a separate process.
//!
//! The command is run through `sh -c`. Each round, the engine writes one line
//! per point (comma-separated integers) followed by a blank line. The
//! process answers with one line per point, `0` or `1`, in the same order.
//! Rounds repeat until the engine closes the process's stdin.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use super::{Model, ModelError, ModelKind};
use crate::point::{join_csv, Point};

/// Points sent per round. Keeps pipe buffers small on both sides.
pub const MAX_ROUND_POINTS: usize = 4096;

pub struct ExternalPredictor {
    command: String,
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    stdout: BufReader<ChildStdout>,
    rounds: u64,
}

impl std::fmt::Debug for ExternalPredictor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalPredictor")
            .field("command", &self.command)
            .field("rounds", &self.rounds)
            .finish()
    }
}

impl ExternalPredictor {
    pub fn spawn(command: &str) -> Result<Self, ModelError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ModelError::Spawn {
                command: command.to_string(),
                source,
            })?;
        let stdin = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self {
            command: command.to_string(),
            child,
            stdin: Some(stdin),
            stdout,
            rounds: 0,
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// Request/response rounds completed so far.
    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    fn crashed(&mut self, context: &str) -> ModelError {
        // Close our end first so a process blocked on input can exit.
        self.stdin = None;
        let status = self.child.wait().ok().map(|s| s.to_string());
        ModelError::Crashed {
            command: self.command.clone(),
            detail: match status {
                Some(s) => format!("{context} ({s})"),
                None => context.to_string(),
            },
        }
    }

    fn round(&mut self, points: &[Point]) -> Result<Vec<bool>, ModelError> {
        let Some(stdin) = self.stdin.as_mut() else {
            return Err(self.crashed("input stream already closed"));
        };
        let mut sent = Ok(());
        for p in points {
            sent = writeln!(stdin, "{}", join_csv(p));
            if sent.is_err() {
                break;
            }
        }
        let sent = sent.and_then(|_| writeln!(stdin)).and_then(|_| stdin.flush());
        if let Err(e) = sent {
            return Err(self.crashed(&format!("write failed: {e}")));
        }

        let mut out = Vec::with_capacity(points.len());
        let mut line = String::new();
        for i in 0..points.len() {
            line.clear();
            match self.stdout.read_line(&mut line) {
                Ok(0) => {
                    let msg = format!("output ended after {i} of {} responses", points.len());
                    return Err(match self.crashed(&msg) {
                        ModelError::Crashed { .. } if i > 0 => ModelError::LengthMismatch {
                            expected: points.len(),
                            found: i,
                        },
                        e => e,
                    });
                }
                Ok(_) => {}
                Err(e) => return Err(self.crashed(&format!("read failed: {e}"))),
            }
            let value = line.strip_suffix('\n').unwrap_or(&line);
            let value = value.strip_suffix('\r').unwrap_or(value);
            match value {
                "0" => out.push(false),
                "1" => out.push(true),
                _ => {
                    return Err(ModelError::Malformed {
                        index: i,
                        line: value.to_string(),
                    })
                }
            }
        }
        self.rounds += 1;
        Ok(out)
    }
}

impl Model for ExternalPredictor {
    fn kind(&self) -> ModelKind {
        ModelKind::ExternalProcess
    }

    fn dim(&self) -> Option<usize> {
        None
    }

    fn predict_batch(&mut self, points: &[Point]) -> Result<Vec<bool>, ModelError> {
        let mut out = Vec::with_capacity(points.len());
        for chunk in points.chunks(MAX_ROUND_POINTS) {
            out.extend(self.round(chunk)?);
        }
        Ok(out)
    }
}

impl Drop for ExternalPredictor {
    fn drop(&mut self) {
        if let Some(mut stdin) = self.stdin.take() {
            let _ = stdin.flush();
        }
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PARITY: &str = r#"while IFS= read -r line; do
  if [ -z "$line" ]; then continue; fi
  s=0; for v in $(echo "$line" | tr ',' ' '); do s=$((s + v)); done
  echo $((s % 2 == 0 ? 1 : 0))
done"#;

    #[test]
    fn shell_predictor_answers_rounds() {
        let mut m = ExternalPredictor::spawn(PARITY).unwrap();
        let pts: Vec<Point> = [[0, 0], [0, 1], [1, 1]].into_iter().map(Point::from).collect();
        assert_eq!(m.predict_batch(&pts).unwrap(), vec![true, false, true]);
        assert_eq!(m.predict_batch(&pts[1..2]).unwrap(), vec![false]);
        assert_eq!(m.rounds(), 2);
    }

    #[test]
    fn malformed_and_short_responses() {
        let mut m = ExternalPredictor::spawn("while read -r l; do [ -z \"$l\" ] || echo yes; done").unwrap();
        assert!(matches!(
            m.predict_batch(&[Point::from([1])]),
            Err(ModelError::Malformed { index: 0, .. })
        ));
        let mut m = ExternalPredictor::spawn("read -r l; echo 1").unwrap();
        assert!(matches!(
            m.predict_batch(&[Point::from([1]), Point::from([2])]),
            Err(ModelError::LengthMismatch { expected: 2, found: 1 })
        ));
        let mut m = ExternalPredictor::spawn("exit 3").unwrap();
        assert!(matches!(m.predict_batch(&[Point::from([1])]), Err(ModelError::Crashed { .. })));
    }
}
