//! Regression corpus of worked examples and its replay.
//!
//! Each fixture supplies default arguments (`space`, `codomain`, `operator`)
//! and a list of queries. A query's `expect` object is compared as a subset
//! of the answer: every expected key must be present and equal, extra keys in
//! the answer are ignored.

use std::time::{Duration, Instant};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::query::{run_query, Context};
use crate::report::{error_json, parse_scalar};

/// The corpus compiled into the library.
pub const CORPUS: &str = include_str!("../fixtures/corpus.json");

const DEFAULT_KEYS: [&str; 3] = ["space", "codomain", "operator"];
const FLOAT_RELATIVE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub id: String,
    pub anchor: String,
    pub defaults: Map<String, Value>,
    pub queries: Vec<Value>,
}

impl Fixture {
    /// The query with fixture defaults filled in and `expect` removed.
    pub fn resolved_query(&self, index: usize) -> (Value, Value) {
        let mut q = self.queries[index].as_object().cloned().unwrap_or_default();
        let expect = q.remove("expect").unwrap_or(Value::Null);
        for (k, v) in &self.defaults {
            q.entry(k.clone()).or_insert_with(|| v.clone());
        }
        (Value::Object(q), expect)
    }
}

pub fn load(text: &str) -> Result<Vec<Fixture>> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let list = root
        .get("fixtures")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("corpus needs a \"fixtures\" array".into()))?;
    list.iter()
        .map(|f| {
            let obj = f.as_object().ok_or_else(|| Error::Parse("fixture must be an object".into()))?;
            let text = |k: &str| obj.get(k).and_then(Value::as_str).map(str::to_string);
            let id = text("id").ok_or_else(|| Error::Parse("fixture without id".into()))?;
            let defaults = DEFAULT_KEYS
                .iter()
                .filter_map(|k| obj.get(*k).map(|v| (k.to_string(), v.clone())))
                .collect();
            let queries = obj.get("queries").and_then(Value::as_array).cloned().unwrap_or_default();
            Ok(Fixture { id, anchor: text("anchor").unwrap_or_default(), defaults, queries })
        })
        .collect()
}

pub fn builtin() -> Vec<Fixture> {
    load(CORPUS).expect("embedded corpus parses")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub query: usize,
    pub op: String,
    pub path: String,
    pub expected: Value,
    pub actual: Value,
}

impl Mismatch {
    pub fn to_json(&self) -> Value {
        json!({
            "query": self.query,
            "op": self.op,
            "path": self.path,
            "expected": self.expected,
            "actual": self.actual,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixtureOutcome {
    pub id: String,
    pub queries: usize,
    pub mismatches: Vec<Mismatch>,
    pub elapsed: Duration,
}

impl FixtureOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn replay(fixture: &Fixture, ctx: &Context) -> FixtureOutcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for i in 0..fixture.queries.len() {
        let (query, expect) = fixture.resolved_query(i);
        let op = query.get("op").and_then(Value::as_str).unwrap_or("?").to_string();
        let actual = match run_query(&query, ctx) {
            Ok(a) => a.value,
            Err(e) => error_json(&e),
        };
        let mut found = Vec::new();
        compare(&expect, &actual, "", &mut found);
        mismatches.extend(found.into_iter().map(|(path, expected, actual)| Mismatch {
            query: i,
            op: op.clone(),
            path,
            expected,
            actual,
        }));
    }
    FixtureOutcome { id: fixture.id.clone(), queries: fixture.queries.len(), mismatches, elapsed: start.elapsed() }
}

pub fn replay_all(fixtures: &[Fixture], ctx: &Context) -> Vec<FixtureOutcome> {
    fixtures.iter().map(|f| replay(f, ctx)).collect()
}

fn numbers_equal(e: &Value, a: &Value) -> Option<bool> {
    let is_float = |v: &Value| v.as_f64().is_some() && !v.is_i64() && !v.is_u64();
    if is_float(e) || is_float(a) {
        let (x, y) = (e.as_f64()?, a.as_f64().or_else(|| parse_scalar(a).ok().map(|r| crate::scalar::Field::to_f64(&r)))?);
        return Some((x - y).abs() <= FLOAT_RELATIVE * x.abs().max(1.0));
    }
    match (parse_scalar(e), parse_scalar(a)) {
        (Ok(x), Ok(y)) => Some(x == y),
        _ => None,
    }
}

/// Collects `(path, expected, actual)` for every place where `actual` does
/// not contain `expected`.
pub fn compare(expected: &Value, actual: &Value, path: &str, out: &mut Vec<(String, Value, Value)>) {
    match (expected, actual) {
        (Value::Null, _) => {}
        (Value::Object(e), Value::Object(a)) => {
            for (k, ev) in e {
                let sub = format!("{path}/{k}");
                match a.get(k) {
                    Some(av) => compare(ev, av, &sub, out),
                    None => out.push((sub, ev.clone(), Value::Null)),
                }
            }
        }
        (Value::Array(e), Value::Array(a)) if e.len() == a.len() => {
            for (i, (ev, av)) in e.iter().zip(a).enumerate() {
                compare(ev, av, &format!("{path}/{i}"), out);
            }
        }
        (Value::Number(_), _) | (Value::String(_), Value::Number(_)) => {
            if numbers_equal(expected, actual) != Some(true) {
                out.push((path.to_string(), expected.clone(), actual.clone()));
            }
        }
        (Value::String(e), Value::String(a)) => {
            if e != a && numbers_equal(expected, actual) != Some(true) {
                out.push((path.to_string(), expected.clone(), actual.clone()));
            }
        }
        (e, a) => {
            if e != a {
                out.push((path.to_string(), e.clone(), a.clone()));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_replays_green() {
        let fixtures = builtin();
        assert!(fixtures.len() >= 7);
        for outcome in replay_all(&fixtures, &Context::default()) {
            assert!(outcome.passed(), "{}: {:#?}", outcome.id, outcome.mismatches);
        }
    }

    #[test]
    fn corrupted_expectation_is_reported() {
        let mut fixtures = builtin();
        let f = fixtures.iter_mut().find(|f| f.id == "linf2-s1").unwrap();
        f.queries[2]["expect"]["verdict"] = json!(true);
        let outcome = replay(f, &Context::default());
        assert_eq!(outcome.mismatches.len(), 1);
        assert_eq!(outcome.mismatches[0].path, "/verdict");
    }

    #[test]
    fn compare_treats_rationals_by_value() {
        let mut out = Vec::new();
        compare(&json!({"a": "2/4", "b": [1, 2]}), &json!({"a": "1/2", "b": [1, 2], "c": 0}), "", &mut out);
        assert!(out.is_empty());
        compare(&json!([1, 2]), &json!([1]), "", &mut out);
        assert_eq!(out.len(), 1);
    }
}
