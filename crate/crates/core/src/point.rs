//! Integer feature vectors and the actions that move between them.

use std::fmt;
use std::ops::Deref;

/// A point in a bounded, discrete feature space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<i64>);

/// A change in feature space. `x + a` is the point reached by taking `a` at `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action(Vec<i64>);

macro_rules! vector_newtype {
    ($ty:ident) => {
        impl $ty {
            pub fn new(values: Vec<i64>) -> Self {
                Self(values)
            }

            pub fn zeros(dim: usize) -> Self {
                Self(vec![0; dim])
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[i64] {
                &self.0
            }

            pub fn into_inner(self) -> Vec<i64> {
                self.0
            }
        }

        impl Deref for $ty {
            type Target = [i64];

            fn deref(&self) -> &[i64] {
                &self.0
            }
        }

        impl std::borrow::Borrow<[i64]> for $ty {
            fn borrow(&self) -> &[i64] {
                &self.0
            }
        }

        impl From<Vec<i64>> for $ty {
            fn from(values: Vec<i64>) -> Self {
                Self(values)
            }
        }

        impl From<&[i64]> for $ty {
            fn from(values: &[i64]) -> Self {
                Self(values.to_vec())
            }
        }

        impl<const N: usize> From<[i64; N]> for $ty {
            fn from(values: [i64; N]) -> Self {
                Self(values.to_vec())
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&join_csv(&self.0))
            }
        }
    };
}

vector_newtype!(Point);
vector_newtype!(Action);

impl Point {
    /// `self + action`, or `None` on dimension mismatch or overflow.
    pub fn apply(&self, action: &[i64]) -> Option<Point> {
        if action.len() != self.0.len() {
            return None;
        }
        self.0
            .iter()
            .zip(action)
            .map(|(x, a)| x.checked_add(*a))
            .collect::<Option<Vec<_>>>()
            .map(Point)
    }

    /// The action that moves `self` to `target`.
    pub fn action_to(&self, target: &[i64]) -> Option<Action> {
        if target.len() != self.0.len() {
            return None;
        }
        self.0
            .iter()
            .zip(target)
            .map(|(x, t)| t.checked_sub(*x))
            .collect::<Option<Vec<_>>>()
            .map(Action)
    }
}

impl Action {
    pub fn is_null(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn l1_norm(&self) -> u64 {
        l1_norm(&self.0)
    }
}

pub(crate) fn l1_norm(values: &[i64]) -> u64 {
    values.iter().map(|v| v.unsigned_abs()).sum()
}

/// Comma-separated integers, the wire and file representation of vectors.
pub fn join_csv(values: &[i64]) -> String {
    let mut out = String::with_capacity(values.len() * 3);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&v.to_string());
    }
    out
}

/// Parses a comma-separated integer list. Whitespace around entries is ignored.
pub fn parse_csv_ints(text: &str) -> Result<Vec<i64>, std::num::ParseIntError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|s| s.trim().parse::<i64>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_and_action_to_are_inverse() {
        let x = Point::from([1, 2, 3]);
        let a = Action::from([-1, 0, 4]);
        let y = x.apply(&a).unwrap();
        assert_eq!(y, Point::from([0, 2, 7]));
        assert_eq!(x.action_to(&y).unwrap(), a);
    }

    #[test]
    fn apply_rejects_mismatch_and_overflow() {
        assert!(Point::from([1]).apply(&[1, 2]).is_none());
        assert!(Point::from([i64::MAX]).apply(&[1]).is_none());
    }

    #[test]
    fn csv_round_trip() {
        let v = vec![-3, 0, 12];
        assert_eq!(parse_csv_ints(&join_csv(&v)).unwrap(), v);
        assert_eq!(parse_csv_ints(" ").unwrap(), Vec::<i64>::new());
        assert!(parse_csv_ints("1,x").is_err());
    }
}
