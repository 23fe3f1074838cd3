//! Linear scorers with exact rational weights.
//!
//! Model files hold an intercept line and a weight line:
//!
//! ```text
//! b=-2
//! w=1,1
//! ```
//!
//! Numbers may be integers, decimals (`-0.125`), decimals with an exponent
//! (`3.5e-4`) or fractions (`7/3`). All are read exactly. Blank lines and
//! lines starting with `#` are ignored.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Model, ModelError, ModelKind};
use crate::point::Point;

/// `f(x) = 1` iff `w . x + b >= 0`, evaluated exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearModel {
    weights: Vec<BigRational>,
    intercept: BigRational,
    /// Weights and intercept scaled by their common denominator.
    scaled_weights: Vec<BigInt>,
    scaled_intercept: BigInt,
    /// The scaled values again, when every one fits comfortably in an i64.
    small: Option<(Vec<i64>, i64)>,
}

impl LinearModel {
    pub fn new(weights: Vec<BigRational>, intercept: BigRational) -> Self {
        let mut denom = intercept.denom().clone();
        for w in &weights {
            denom = num_integer::lcm(denom, w.denom().clone());
        }
        let scale = |r: &BigRational| r.numer() * (&denom / r.denom());
        let scaled_weights: Vec<BigInt> = weights.iter().map(scale).collect();
        let scaled_intercept = scale(&intercept);
        let fits = |v: &BigInt| v.to_i64().filter(|x| x.unsigned_abs() < 1 << 62);
        let small = scaled_weights
            .iter()
            .map(fits)
            .collect::<Option<Vec<i64>>>()
            .zip(fits(&scaled_intercept));
        Self {
            weights,
            intercept,
            scaled_weights,
            scaled_intercept,
            small,
        }
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_integers(weights: &[i64], intercept: i64) -> Self {
        Self::new(
            weights.iter().map(|&w| BigRational::from_integer(w.into())).collect(),
            BigRational::from_integer(intercept.into()),
        )
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn intercept(&self) -> &BigRational {
        &self.intercept
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn check_dimension(&self, expected: usize) -> Result<(), ModelError> {
        if self.dim() != expected {
            return Err(ModelError::Dimension {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }

    /// `w . x + b` exactly.
    pub fn score(&self, x: &[i64]) -> BigRational {
        let mut s = self.intercept.clone();
        for (w, &v) in self.weights.iter().zip(x) {
            s += w * BigRational::from_integer(v.into());
        }
        s
    }

    pub fn predict(&self, x: &[i64]) -> bool {
        if let Some((w, b)) = &self.small {
            let mut acc = *b as i128;
            let mut exact = true;
            for (&wj, &xj) in w.iter().zip(x) {
                match (wj as i128).checked_mul(xj as i128).and_then(|t| acc.checked_add(t)) {
                    Some(v) => acc = v,
                    None => {
                        exact = false;
                        break;
                    }
                }
            }
            if exact {
                return acc >= 0;
            }
        }
        let mut acc = self.scaled_intercept.clone();
        for (w, &v) in self.scaled_weights.iter().zip(x) {
            acc += w * BigInt::from(v);
        }
        !acc.is_negative()
    }
}

impl Model for LinearModel {
    fn kind(&self) -> ModelKind {
        ModelKind::BuiltinLinear
    }

    fn dim(&self) -> Option<usize> {
        Some(self.weights.len())
    }

    fn predict_batch(&mut self, points: &[Point]) -> Result<Vec<bool>, ModelError> {
        Ok(points.iter().map(|p| self.predict(p)).collect())
    }
}

/// Parses an exact number: integer, decimal, decimal with exponent, or `p/q`.
pub fn parse_number(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let shift = exponent.checked_sub(i32::try_from(frac_part.len()).ok()?)?;
    if shift.unsigned_abs() > 4096 {
        return None;
    }
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, shift.unsigned_abs() as usize);
    let mut value = if shift >= 0 {
        BigRational::from_integer(all * pow)
    } else {
        BigRational::new(all, pow)
    };
    if negative {
        value = -value;
    }
    Some(value)
}

fn format_number(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn load_linear(text: &str) -> Result<LinearModel, ModelError> {
    let mut intercept = None;
    let mut weights = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| ModelError::Parse { line: line_no, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad("expected b=<number> or w=<numbers>".into()))?;
        match key.trim() {
            "b" => {
                if intercept.is_some() {
                    return Err(bad("intercept given twice".into()));
                }
                intercept = Some(parse_number(value).ok_or_else(|| bad(format!("bad number {:?}", value.trim())))?);
            }
            "w" => {
                if weights.is_some() {
                    return Err(bad("weights given twice".into()));
                }
                let parsed = value
                    .split(',')
                    .map(|v| parse_number(v).ok_or_else(|| bad(format!("bad number {:?}", v.trim()))))
                    .collect::<Result<Vec<_>, _>>()?;
                weights = Some(parsed);
            }
            other => return Err(bad(format!("unknown key {other:?}"))),
        }
    }
    let missing = |what: &str| ModelError::Parse {
        line: text.lines().count().max(1),
        message: format!("missing {what}"),
    };
    let intercept = intercept.ok_or_else(|| missing("intercept line b=..."))?;
    let weights = weights.ok_or_else(|| missing("weight line w=..."))?;
    Ok(LinearModel::new(weights, intercept))
}

pub fn serialize_linear(model: &LinearModel) -> String {
    let w: Vec<String> = model.weights.iter().map(format_number).collect();
    format!("b={}\nw={}\n", format_number(&model.intercept), w.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn reapplicant_grid_predictions() {
        let m = load_linear("b=-2\nw=1,1").unwrap();
        assert_eq!(m, LinearModel::from_integers(&[1, 1], -2));
        let got: Vec<bool> = [[0, 0], [0, 1], [1, 0], [1, 1]].iter().map(|x| m.predict(x)).collect();
        assert_eq!(got, vec![false, false, false, true]);
    }

    #[test]
    fn zero_score_is_positive() {
        let m = LinearModel::from_integers(&[0, 0], 0);
        assert!([[0, 0], [5, -3]].iter().all(|x| m.predict(x)));
        let m = load_linear("w=0.1,0.2\nb=-0.3").unwrap();
        assert!(m.predict(&[1, 1]));
        assert!(!m.predict(&[1, 0]));
    }

    #[test]
    fn numbers_are_exact() {
        assert_eq!(parse_number("0.1"), Some(r(1, 10)));
        assert_eq!(parse_number("-1.25e-2"), Some(r(-1, 80)));
        assert_eq!(parse_number("2E3"), Some(r(2000, 1)));
        assert_eq!(parse_number(".5"), Some(r(1, 2)));
        assert_eq!(parse_number("7/-3"), Some(r(-7, 3)));
        for bad in ["", "-", "1/0", "abc", "1.2.3", "1e", "0x10"] {
            assert_eq!(parse_number(bad), None, "{bad}");
        }
    }

    #[test]
    fn round_trip() {
        let m = load_linear("# model\nb=-3/7\nw=0.5,-2,1e-3\n").unwrap();
        assert_eq!(load_linear(&serialize_linear(&m)).unwrap(), m);
    }

    #[test]
    fn big_values_fall_back_to_big_integers() {
        let m = load_linear("b=0\nw=4611686018427387904,-4611686018427387904").unwrap();
        assert!(m.small.is_none());
        assert!(m.predict(&[1, 1]));
        assert!(!m.predict(&[0, 1]));
        let m = LinearModel::from_integers(&[1 << 61, 1 << 61, 1 << 61], 0);
        assert!(m.predict(&[i64::MAX, i64::MAX, i64::MAX]));
        assert!(!m.predict(&[i64::MIN, i64::MIN, 5]));
    }

    #[test]
    fn dimension_and_parse_errors() {
        let m = LinearModel::from_integers(&[0; 35], 0);
        assert!(matches!(m.check_dimension(36), Err(ModelError::Dimension { expected: 36, found: 35 })));
        assert!(m.check_dimension(35).is_ok());
        for bad in ["w=1,1", "b=1", "b=1\nb=2\nw=1", "b=x\nw=1", "b=1\nw=1,,2", "b=1\nw=1\nq=3", "nonsense"] {
            assert!(matches!(load_linear(bad), Err(ModelError::Parse { .. })), "{bad}");
        }
    }
}
