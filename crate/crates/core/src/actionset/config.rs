//! Text format for action sets.
//!
//! ```text
//! # comments start with '#'
//! [features]
//! name,type,lb,ub,actionable,sign
//! Age,integer,19,75,no,
//! YearsAtResidence,integer,0,7,yes,+
//! CheckingAcct_exists,binary,0,1,yes,+
//! CheckingAcct>=0,binary,0,1,yes,+
//!
//! [constraints]
//! linkage(source="YearsAtResidence", targets=[("Age", 1)])
//! thermometer(features=["CheckingAcct_exists", "CheckingAcct>=0"], direction=increase)
//! ```
//!
//! Feature rows are comma separated. `type` is `binary` or `integer`,
//! `actionable` is `yes`/`no`, `sign` is `+`, `-` or blank (free). The header
//! row is optional.
//!
//! Constraint records have the form `kind(key=value, ...)` and may span
//! several lines. Values are quoted strings, bare words, numbers (`3`, `-1`,
//! `0.5`, `1/3`), lists `[...]` and tuples `(...)`. Kinds:
//!
//! * `one_hot(features=[..], min_on=L, max_on=U)`
//! * `thermometer(features=[..], direction=increase|decrease)`
//! * `linkage(source="s", targets=[("t", scale), ..])`
//! * `if_then(antecedent="a", threshold=v, consequent="c", value=w)`
//! * `reachability(features=[..], values=[(..), ..], edges=[[1,0,..], ..])`

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_rational::Rational64;
use thiserror::Error;

use super::{
    ActionSetSpec, ConstraintSpec, FeatureSpec, Sign, ThermometerDirection, ValidationError, ValueType,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "line {}: {}: {}", self.line, field, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionSetError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid action set: {0}")]
    Validation(#[from] ValidationError),
}

fn err(line: usize, field: Option<&str>, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        field: field.map(str::to_string),
        message: message.into(),
    }
}

const FEATURE_COLUMNS: [&str; 6] = ["name", "type", "lb", "ub", "actionable", "sign"];

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Features,
    Constraints,
}

/// Parses and validates an action set.
pub fn parse_action_set(text: &str) -> Result<ActionSetSpec, ActionSetError> {
    let mut section = Section::None;
    let mut features = Vec::new();
    let mut constraints = Vec::new();
    let mut pending = String::new();
    let mut pending_start = 0usize;
    let mut depth = 0i32;

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = strip_comment(raw).trim();
        if depth == 0 {
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') && !line.contains('(') {
                section = match line {
                    "[features]" => Section::Features,
                    "[constraints]" => Section::Constraints,
                    other => return Err(err(lineno, None, format!("unknown section {other}")).into()),
                };
                continue;
            }
        }
        match section {
            Section::None => {
                return Err(err(lineno, None, "content before the first [features] or [constraints] section").into())
            }
            Section::Features => {
                if let Some(f) = parse_feature_row(lineno, line)? {
                    features.push(f);
                }
            }
            Section::Constraints => {
                if depth == 0 {
                    pending_start = lineno;
                    pending.clear();
                }
                pending.push_str(line);
                pending.push('\n');
                depth = paren_balance(&pending).map_err(|m| err(lineno, None, m))?;
                if depth == 0 && !pending.trim().is_empty() {
                    constraints.push(parse_constraint(pending_start, &pending)?);
                }
            }
        }
    }
    if depth != 0 {
        return Err(err(pending_start, None, "unterminated constraint record").into());
    }
    Ok(ActionSetSpec::new(features, constraints)?)
}

/// Drops a trailing `#` comment, ignoring `#` inside quoted strings.
fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_str => escaped = true,
            '"' => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

fn paren_balance(text: &str) -> Result<i32, String> {
    let mut depth = 0i32;
    let mut in_str = false;
    let mut escaped = false;
    for c in text.chars() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_str => escaped = true,
            '"' => in_str = !in_str,
            '(' | '[' if !in_str => depth += 1,
            ')' | ']' if !in_str => {
                depth -= 1;
                if depth < 0 {
                    return Err("unbalanced closing bracket".into());
                }
            }
            _ => {}
        }
    }
    Ok(depth)
}

fn parse_feature_row(lineno: usize, line: &str) -> Result<Option<FeatureSpec>, ParseError> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    if cols.len() != FEATURE_COLUMNS.len() {
        return Err(err(
            lineno,
            None,
            format!("expected {} columns (name,type,lb,ub,actionable,sign), found {}", FEATURE_COLUMNS.len(), cols.len()),
        ));
    }
    if cols.iter().zip(FEATURE_COLUMNS).all(|(c, h)| c.eq_ignore_ascii_case(h)) {
        return Ok(None);
    }
    let value_type = match cols[1].to_ascii_lowercase().as_str() {
        "binary" | "bool" => ValueType::Binary,
        "integer" | "int" => ValueType::Integer,
        other => return Err(err(lineno, Some("type"), format!("unknown type `{other}`"))),
    };
    let bound = |s: &str, field: &str| {
        s.parse::<i64>()
            .map_err(|_| err(lineno, Some(field), format!("`{s}` is not an integer")))
    };
    let lower_bound = bound(cols[2], "lb")?;
    let upper_bound = bound(cols[3], "ub")?;
    let actionable = match cols[4].to_ascii_lowercase().as_str() {
        "yes" | "true" | "1" | "y" => true,
        "no" | "false" | "0" | "n" => false,
        other => return Err(err(lineno, Some("actionable"), format!("expected yes/no, found `{other}`"))),
    };
    let sign = match cols[5].to_ascii_lowercase().as_str() {
        "" | "free" => Sign::Free,
        "+" | "nonneg" | "non-negative" => Sign::NonNegative,
        "-" | "nonpos" | "non-positive" => Sign::NonPositive,
        other => return Err(err(lineno, Some("sign"), format!("expected +, - or blank, found `{other}`"))),
    };
    Ok(Some(FeatureSpec {
        name: cols[0].to_string(),
        value_type,
        lower_bound,
        upper_bound,
        actionable,
        sign,
    }))
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Str(String),
    Word(String),
    Num(String),
    List(Vec<Value>),
    Tuple(Vec<Value>),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Word(String),
    Str(String),
    Num(String),
    Punct(char),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Self {
            chars: text.char_indices().peekable(),
            line,
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Token)>, ParseError> {
        let mut out = Vec::new();
        while let Some(&(_, c)) = self.chars.peek() {
            match c {
                '\n' => {
                    self.line += 1;
                    self.chars.next();
                }
                c if c.is_whitespace() => {
                    self.chars.next();
                }
                '(' | ')' | '[' | ']' | ',' | '=' => {
                    self.chars.next();
                    out.push((self.line, Token::Punct(c)));
                }
                '"' => {
                    self.chars.next();
                    let line = self.line;
                    let mut s = String::new();
                    loop {
                        match self.chars.next() {
                            Some((_, '"')) => break,
                            Some((_, '\\')) => match self.chars.next() {
                                Some((_, e)) => s.push(e),
                                None => return Err(err(line, None, "unterminated string")),
                            },
                            Some((_, '\n')) | None => return Err(err(line, None, "unterminated string")),
                            Some((_, ch)) => s.push(ch),
                        }
                    }
                    out.push((line, Token::Str(s)));
                }
                c if c == '-' || c == '+' || c.is_ascii_digit() => {
                    let mut s = String::new();
                    while let Some(&(_, ch)) = self.chars.peek() {
                        if ch.is_ascii_digit() || matches!(ch, '-' | '+' | '.' | '/') {
                            s.push(ch);
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    out.push((self.line, Token::Num(s)));
                }
                c if c.is_alphabetic() || c == '_' => {
                    let mut s = String::new();
                    while let Some(&(_, ch)) = self.chars.peek() {
                        if ch.is_alphanumeric() || ch == '_' {
                            s.push(ch);
                            self.chars.next();
                        } else {
                            break;
                        }
                    }
                    out.push((self.line, Token::Word(s)));
                }
                other => return Err(err(self.line, None, format!("unexpected character `{other}`"))),
            }
        }
        Ok(out)
    }
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    last_line: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.tokens.get(self.pos).map(|(l, _)| *l).unwrap_or(self.last_line)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        tok
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        let line = self.line();
        match self.next() {
            Some(Token::Punct(p)) if p == c => Ok(()),
            other => Err(err(line, None, format!("expected `{c}`, found {}", describe(other.as_ref())))),
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        let line = self.line();
        match self.next() {
            Some(Token::Str(s)) => Ok(Value::Str(s)),
            Some(Token::Word(w)) => Ok(Value::Word(w)),
            Some(Token::Num(n)) => Ok(Value::Num(n)),
            Some(Token::Punct('[')) => Ok(Value::List(self.sequence(']')?)),
            Some(Token::Punct('(')) => Ok(Value::Tuple(self.sequence(')')?)),
            other => Err(err(line, None, format!("expected a value, found {}", describe(other.as_ref())))),
        }
    }

    fn sequence(&mut self, close: char) -> Result<Vec<Value>, ParseError> {
        let mut items = Vec::new();
        if self.peek() == Some(&Token::Punct(close)) {
            self.next();
            return Ok(items);
        }
        loop {
            items.push(self.value()?);
            let line = self.line();
            match self.next() {
                Some(Token::Punct(',')) => {
                    if self.peek() == Some(&Token::Punct(close)) {
                        self.next();
                        return Ok(items);
                    }
                }
                Some(Token::Punct(c)) if c == close => return Ok(items),
                other => {
                    return Err(err(line, None, format!("expected `,` or `{close}`, found {}", describe(other.as_ref()))))
                }
            }
        }
    }
}

fn describe(tok: Option<&Token>) -> String {
    match tok {
        None => "end of record".into(),
        Some(Token::Word(w)) => format!("`{w}`"),
        Some(Token::Str(s)) => format!("\"{s}\""),
        Some(Token::Num(n)) => format!("`{n}`"),
        Some(Token::Punct(c)) => format!("`{c}`"),
    }
}

struct Args {
    line: usize,
    kind: String,
    values: BTreeMap<String, Value>,
}

impl Args {
    fn take(&mut self, key: &str) -> Result<Value, ParseError> {
        self.values
            .remove(key)
            .ok_or_else(|| err(self.line, Some(key), format!("`{}` requires argument `{key}`", self.kind)))
    }

    fn finish(self) -> Result<(), ParseError> {
        match self.values.keys().next() {
            Some(extra) => Err(err(self.line, Some(extra), format!("unexpected argument for `{}`", self.kind))),
            None => Ok(()),
        }
    }

    fn name(&mut self, key: &str) -> Result<String, ParseError> {
        let v = self.take(key)?;
        as_name(self.line, key, &v)
    }

    fn names(&mut self, key: &str) -> Result<Vec<String>, ParseError> {
        match self.take(key)? {
            Value::List(items) => items.iter().map(|v| as_name(self.line, key, v)).collect(),
            _ => Err(err(self.line, Some(key), "expected a list of feature names")),
        }
    }

    fn int(&mut self, key: &str) -> Result<i64, ParseError> {
        let v = self.take(key)?;
        as_int(self.line, key, &v)
    }
}

fn as_name(line: usize, key: &str, v: &Value) -> Result<String, ParseError> {
    match v {
        Value::Str(s) | Value::Word(s) => Ok(s.clone()),
        _ => Err(err(line, Some(key), "expected a feature name")),
    }
}

fn as_int(line: usize, key: &str, v: &Value) -> Result<i64, ParseError> {
    match v {
        Value::Num(n) => n
            .parse::<i64>()
            .map_err(|_| err(line, Some(key), format!("`{n}` is not an integer"))),
        _ => Err(err(line, Some(key), "expected an integer")),
    }
}

fn as_rational(line: usize, key: &str, v: &Value) -> Result<Rational64, ParseError> {
    let Value::Num(n) = v else {
        return Err(err(line, Some(key), "expected a number"));
    };
    parse_rational(n).ok_or_else(|| err(line, Some(key), format!("`{n}` is not a number")))
}

/// Accepts `3`, `-1.25`, `1/3`.
pub(crate) fn parse_rational(text: &str) -> Option<Rational64> {
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.parse().ok()?;
        let q: i64 = q.parse().ok()?;
        return (q != 0).then(|| Rational64::new(p, q));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 18 {
            return None;
        }
        let negative = int.starts_with('-');
        let int: i64 = int.parse().ok()?;
        let den = 10i64.checked_pow(frac.len() as u32)?;
        let f: i64 = frac.parse().ok()?;
        let mag = int.checked_abs()?.checked_mul(den)?.checked_add(f)?;
        return Some(Rational64::new(if negative { -mag } else { mag }, den));
    }
    text.parse::<i64>().ok().map(Rational64::from_integer)
}

fn parse_constraint(line: usize, text: &str) -> Result<ConstraintSpec, ParseError> {
    let tokens = Lexer::new(text, line).tokens()?;
    let last_line = tokens.last().map(|(l, _)| *l).unwrap_or(line);
    let mut p = Parser {
        tokens,
        pos: 0,
        last_line,
    };
    let kind = match p.next() {
        Some(Token::Word(w)) => w,
        other => return Err(err(line, None, format!("expected a constraint kind, found {}", describe(other.as_ref())))),
    };
    p.expect('(')?;
    let mut values = BTreeMap::new();
    if p.peek() == Some(&Token::Punct(')')) {
        p.next();
    } else {
        loop {
            let key_line = p.line();
            let key = match p.next() {
                Some(Token::Word(w)) => w,
                other => {
                    return Err(err(key_line, None, format!("expected an argument name, found {}", describe(other.as_ref()))))
                }
            };
            p.expect('=')?;
            let v = p.value()?;
            if values.insert(key.clone(), v).is_some() {
                return Err(err(key_line, Some(&key), "argument given twice"));
            }
            let sep_line = p.line();
            match p.next() {
                Some(Token::Punct(',')) => {
                    if p.peek() == Some(&Token::Punct(')')) {
                        p.next();
                        break;
                    }
                }
                Some(Token::Punct(')')) => break,
                other => return Err(err(sep_line, None, format!("expected `,` or `)`, found {}", describe(other.as_ref())))),
            }
        }
    }
    if let Some(extra) = p.peek() {
        return Err(err(p.line(), None, format!("trailing input after record: {}", describe(Some(extra)))));
    }

    let mut args = Args { line, kind, values };
    let spec = match args.kind.as_str() {
        "one_hot" => ConstraintSpec::OneHotEncoding {
            features: args.names("features")?,
            min_on: args.int("min_on")?,
            max_on: args.int("max_on")?,
        },
        "thermometer" => {
            let features = args.names("features")?;
            let direction = match args.take("direction")? {
                Value::Word(w) | Value::Str(w) => match w.as_str() {
                    "increase" | "increase_only" => ThermometerDirection::Increase,
                    "decrease" | "decrease_only" => ThermometerDirection::Decrease,
                    _ => return Err(err(line, Some("direction"), format!("expected increase or decrease, found `{w}`"))),
                },
                _ => return Err(err(line, Some("direction"), "expected increase or decrease")),
            };
            ConstraintSpec::ThermometerEncoding { features, direction }
        }
        "linkage" => {
            let source = args.name("source")?;
            let targets = match args.take("targets")? {
                Value::List(items) => items
                    .iter()
                    .map(|item| match item {
                        Value::Tuple(pair) if pair.len() == 2 => Ok((
                            as_name(line, "targets", &pair[0])?,
                            as_rational(line, "targets", &pair[1])?,
                        )),
                        _ => Err(err(line, Some("targets"), "expected (name, scale) pairs")),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                _ => return Err(err(line, Some("targets"), "expected a list of (name, scale) pairs")),
            };
            ConstraintSpec::DirectionalLinkage { source, targets }
        }
        "if_then" => ConstraintSpec::IfThen {
            antecedent: args.name("antecedent")?,
            threshold: args.int("threshold")?,
            consequent: args.name("consequent")?,
            forced_value: args.int("value")?,
        },
        "reachability" => {
            let features = args.names("features")?;
            let values = match args.take("values")? {
                Value::List(items) => items
                    .iter()
                    .map(|item| match item {
                        Value::Tuple(vs) | Value::List(vs) => vs.iter().map(|v| as_int(line, "values", v)).collect(),
                        _ => Err(err(line, Some("values"), "expected tuples of integers")),
                    })
                    .collect::<Result<Vec<Vec<i64>>, _>>()?,
                _ => return Err(err(line, Some("values"), "expected a list of tuples")),
            };
            let edges = match args.take("edges")? {
                Value::List(rows) => rows
                    .iter()
                    .map(|row| match row {
                        Value::List(vs) => vs
                            .iter()
                            .map(|v| match as_int(line, "edges", v)? {
                                0 => Ok(false),
                                1 => Ok(true),
                                _ => Err(err(line, Some("edges"), "entries must be 0 or 1")),
                            })
                            .collect(),
                        _ => Err(err(line, Some("edges"), "expected rows of 0/1 entries")),
                    })
                    .collect::<Result<Vec<Vec<bool>>, _>>()?,
                _ => return Err(err(line, Some("edges"), "expected a matrix")),
            };
            ConstraintSpec::ReachabilityMatrix {
                features,
                values,
                edges,
            }
        }
        other => return Err(err(line, None, format!("unknown constraint kind `{other}`"))),
    };
    args.finish()?;
    Ok(spec)
}

fn quote(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 2);
    out.push('"');
    for c in name.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn format_rational(r: &Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn quoted_list(names: &[String]) -> String {
    names.iter().map(|n| quote(n)).collect::<Vec<_>>().join(", ")
}

/// Canonical text form. `parse_action_set(&serialize_action_set(s)) == s`.
pub fn serialize_action_set(spec: &ActionSetSpec) -> String {
    let mut out = String::from("[features]\nname,type,lb,ub,actionable,sign\n");
    for f in spec.features() {
        let ty = match f.value_type {
            ValueType::Binary => "binary",
            ValueType::Integer => "integer",
        };
        let sign = match f.sign {
            Sign::Free => "",
            Sign::NonNegative => "+",
            Sign::NonPositive => "-",
        };
        let actionable = if f.actionable { "yes" } else { "no" };
        let _ = writeln!(out, "{},{},{},{},{},{}", f.name, ty, f.lower_bound, f.upper_bound, actionable, sign);
    }
    out.push_str("\n[constraints]\n");
    for c in spec.constraints() {
        let _ = match c {
            ConstraintSpec::OneHotEncoding {
                features,
                min_on,
                max_on,
            } => writeln!(out, "one_hot(features=[{}], min_on={min_on}, max_on={max_on})", quoted_list(features)),
            ConstraintSpec::ThermometerEncoding { features, direction } => {
                let dir = match direction {
                    ThermometerDirection::Increase => "increase",
                    ThermometerDirection::Decrease => "decrease",
                };
                writeln!(out, "thermometer(features=[{}], direction={dir})", quoted_list(features))
            }
            ConstraintSpec::DirectionalLinkage { source, targets } => {
                let targets = targets
                    .iter()
                    .map(|(t, s)| format!("({}, {})", quote(t), format_rational(s)))
                    .collect::<Vec<_>>()
                    .join(", ");
                writeln!(out, "linkage(source={}, targets=[{targets}])", quote(source))
            }
            ConstraintSpec::IfThen {
                antecedent,
                threshold,
                consequent,
                forced_value,
            } => writeln!(
                out,
                "if_then(antecedent={}, threshold={threshold}, consequent={}, value={forced_value})",
                quote(antecedent),
                quote(consequent)
            ),
            ConstraintSpec::ReachabilityMatrix {
                features,
                values,
                edges,
            } => {
                let values = values
                    .iter()
                    .map(|v| format!("({})", v.iter().map(i64::to_string).collect::<Vec<_>>().join(", ")))
                    .collect::<Vec<_>>()
                    .join(", ");
                let edges = edges
                    .iter()
                    .map(|row| format!("[{}]", row.iter().map(|&e| if e { "1" } else { "0" }).collect::<Vec<_>>().join(", ")))
                    .collect::<Vec<_>>()
                    .join(", ");
                writeln!(
                    out,
                    "reachability(features=[{}], values=[{values}], edges=[{edges}])",
                    quoted_list(features)
                )
            }
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const REAPPLICANT: &str = "\
[features]
name,type,lb,ub,actionable,sign
reapplicant,binary,0,1,yes,+
age_geq_60,binary,0,1,yes,+
";

    #[test]
    fn parses_two_monotone_binaries() {
        let spec = parse_action_set(REAPPLICANT).unwrap();
        assert_eq!(spec.dim(), 2);
        assert!(spec.constraints().is_empty());
        for f in spec.features() {
            assert_eq!(f.value_type, ValueType::Binary);
            assert!(f.actionable);
            assert_eq!(f.sign, Sign::NonNegative);
        }
    }

    #[test]
    fn immutable_only_spec() {
        let spec = parse_action_set("[features]\nage,integer,18,90,no,\n[constraints]\n").unwrap();
        assert!(!spec.features()[0].actionable);
        assert!(spec.check_action(&[30], &[0]).unwrap());
        assert!(!spec.check_action(&[30], &[1]).unwrap());
    }

    #[test]
    fn all_constraint_kinds_round_trip() {
        let text = r#"
# a comment
[features]
a,binary,0,1,yes,
b,binary,0,1,yes,-
c,binary,0,1,yes,+   # trailing comment
n,integer,-3,12,yes,
m,integer,0,100,no,
[constraints]
one_hot(features=["a", "b"], min_on=0, max_on=1)
thermometer(features=[b, c], direction=decrease)
linkage(source="n", targets=[("m", 1/2), ("a", -1)])
if_then(antecedent="n", threshold=5, consequent="c", value=0)
reachability(
    features=["a", "c"],
    values=[(0, 0), (1, 0), (1, 1)],
    edges=[[1, 1, 0],
           [0, 1, 1],
           [0, 0, 1]],
)
"#;
        let spec = parse_action_set(text).unwrap();
        assert_eq!(spec.constraints().len(), 5);
        let again = parse_action_set(&serialize_action_set(&spec)).unwrap();
        assert_eq!(spec, again);
        assert_eq!(serialize_action_set(&spec), serialize_action_set(&again));
    }

    #[test]
    fn names_with_operators() {
        let text = "[features]\nCheckingAcct_exists,binary,0,1,yes,+\nCheckingAcct>=0,binary,0,1,yes,+\n\
                    [constraints]\nthermometer(features=[\"CheckingAcct_exists\", \"CheckingAcct>=0\"], direction=increase)\n";
        let spec = parse_action_set(text).unwrap();
        assert_eq!(spec.feature_index("CheckingAcct>=0"), Some(1));
    }

    #[test]
    fn reports_parse_location() {
        let e = parse_action_set("[features]\na,binary,0,1,maybe,+\n").unwrap_err();
        match e {
            ActionSetError::Parse(p) => {
                assert_eq!(p.line, 2);
                assert_eq!(p.field.as_deref(), Some("actionable"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let e = parse_action_set("[features]\na,binary,0,1,yes,+\n[constraints]\n\nbogus(x=1)\n").unwrap_err();
        assert!(matches!(e, ActionSetError::Parse(ParseError { line: 5, .. })));
        let e = parse_action_set("[features]\na,binary,0,1,yes,+\n[constraints]\none_hot(features=[\"a\"\n").unwrap_err();
        assert!(matches!(e, ActionSetError::Parse(_)));
    }

    #[test]
    fn validation_errors_surface() {
        let e = parse_action_set("[features]\nx,integer,5,1,yes,\n").unwrap_err();
        assert!(matches!(e, ActionSetError::Validation(ValidationError::BoundInversion { .. })));
        let e = parse_action_set(
            "[features]\na,binary,0,1,yes,\n[constraints]\nthermometer(features=[\"a\", \"ghost\"], direction=increase)\n",
        )
        .unwrap_err();
        assert!(matches!(e, ActionSetError::Validation(ValidationError::UnknownFeature { .. })));
    }

    #[test]
    fn missing_and_extra_arguments() {
        let base = "[features]\na,binary,0,1,yes,\nb,binary,0,1,yes,\n[constraints]\n";
        let e = parse_action_set(&format!("{base}one_hot(features=[a, b], min_on=0)\n")).unwrap_err();
        assert!(matches!(e, ActionSetError::Parse(ParseError { field: Some(ref f), .. }) if f == "max_on"));
        let e = parse_action_set(&format!("{base}one_hot(features=[a, b], min_on=0, max_on=1, extra=2)\n")).unwrap_err();
        assert!(matches!(e, ActionSetError::Parse(ParseError { field: Some(ref f), .. }) if f == "extra"));
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3"), Some(Rational64::from_integer(3)));
        assert_eq!(parse_rational("-1.25"), Some(Rational64::new(-5, 4)));
        assert_eq!(parse_rational("-0.5"), Some(Rational64::new(-1, 2)));
        assert_eq!(parse_rational("1/3"), Some(Rational64::new(1, 3)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }
}
