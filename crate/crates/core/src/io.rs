//! Reading and writing matrices and perturbations.
//!
//! Matrix JSON: `{"n": 3, "rows": [[[col, prob], ...], ...], "labels": [...]}`
//! (labels optional). Triplets: one `src dst prob` per line, integer states,
//! `#` starts a comment. Perturbation JSON: `{"W": [...], "rows": {"w": [[col, prob], ...]}}`,
//! where states may be given by index or label.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stochastic::{PerturbationSpec, StateSpace, StochasticMatrix};

#[derive(Debug, Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum StateRef {
    Index(usize),
    Label(String),
}

#[derive(Debug, Deserialize)]
struct PerturbationJson {
    #[serde(rename = "W")]
    w: Vec<StateRef>,
    #[serde(default)]
    rows: BTreeMap<String, Vec<(StateRef, f64)>>,
}

#[derive(Debug, Serialize)]
struct PerturbationOut<'a> {
    #[serde(rename = "W")]
    w: &'a [usize],
    rows: BTreeMap<String, &'a Vec<(usize, f64)>>,
}

pub fn parse_matrix_json(text: &str) -> Result<(StochasticMatrix, StateSpace)> {
    let raw: MatrixJson = serde_json::from_str(text)?;
    if raw.rows.len() != raw.n {
        return Err(Error::DimensionMismatch {
            expected: raw.n,
            found: raw.rows.len(),
        });
    }
    let states = match raw.labels {
        Some(labels) if labels.len() != raw.n => {
            return Err(Error::DimensionMismatch {
                expected: raw.n,
                found: labels.len(),
            })
        }
        Some(labels) => StateSpace::new(labels)?,
        None => StateSpace::indexed(raw.n)?,
    };
    Ok((StochasticMatrix::from_rows(raw.rows)?, states))
}

fn parse_field<T: std::str::FromStr>(token: Option<&str>, what: &str, line: usize) -> Result<T> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {what} '{token}'"),
    })
}

pub fn parse_triplets(text: &str) -> Result<StochasticMatrix> {
    let mut entries = Vec::new();
    let mut n = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let src: usize = parse_field(tokens.next(), "source state", line)?;
        let dst: usize = parse_field(tokens.next(), "target state", line)?;
        let prob: f64 = parse_field(tokens.next(), "probability", line)?;
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse {
                line,
                message: format!("unexpected token '{extra}'"),
            });
        }
        if !prob.is_finite() || prob < 0.0 {
            return Err(Error::Parse {
                line,
                message: format!("probability {prob} is not a nonnegative number"),
            });
        }
        n = n.max(src + 1).max(dst + 1);
        entries.push((src, dst, prob));
    }
    if n == 0 {
        return Err(Error::Parse {
            line: 0,
            message: "no transitions".into(),
        });
    }
    let mut rows = vec![Vec::new(); n];
    for (src, dst, prob) in entries {
        rows[src].push((dst, prob));
    }
    StochasticMatrix::from_rows(rows)
}

/// Reads a matrix file, choosing the format from the content.
pub fn read_matrix(path: &Path) -> Result<(StochasticMatrix, StateSpace)> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        parse_matrix_json(&text)
    } else {
        let p = parse_triplets(&text)?;
        let states = StateSpace::indexed(p.n())?;
        Ok((p, states))
    }
}

pub fn matrix_to_json(p: &StochasticMatrix, states: Option<&StateSpace>) -> String {
    let raw = MatrixJson {
        n: p.n(),
        rows: p.rows(),
        labels: states.map(|s| s.labels().to_vec()),
    };
    serde_json::to_string(&raw).expect("matrix serializes")
}

pub fn matrix_to_triplets(p: &StochasticMatrix) -> String {
    let mut out = String::new();
    for u in 0..p.n() {
        for (v, q) in p.row(u) {
            out.push_str(&format!("{u} {v} {q:e}\n"));
        }
    }
    out
}

fn resolve(states: &StateSpace, r: &StateRef) -> Result<usize> {
    let found = match r {
        StateRef::Index(i) if *i < states.len() => Some(*i),
        StateRef::Index(_) => None,
        StateRef::Label(s) => states.resolve(s),
    };
    found.ok_or_else(|| Error::domain(format!("unknown state {r:?}")))
}

pub fn parse_perturbation_json(text: &str, states: &StateSpace) -> Result<PerturbationSpec> {
    let raw: PerturbationJson = serde_json::from_str(text)?;
    let set = raw
        .w
        .iter()
        .map(|r| resolve(states, r))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = BTreeMap::new();
    for (key, entries) in &raw.rows {
        let w = states
            .resolve(key)
            .ok_or_else(|| Error::domain(format!("unknown state '{key}'")))?;
        let row = entries
            .iter()
            .map(|(r, q)| Ok((resolve(states, r)?, *q)))
            .collect::<Result<Vec<_>>>()?;
        rows.insert(w, row);
    }
    PerturbationSpec::new(states.len(), set, rows)
}

pub fn read_perturbation(path: &Path, states: &StateSpace) -> Result<PerturbationSpec> {
    parse_perturbation_json(&fs::read_to_string(path)?, states)
}

pub fn perturbation_to_json(spec: &PerturbationSpec) -> String {
    let out = PerturbationOut {
        w: spec.set(),
        rows: spec.rows().iter().map(|(w, r)| (w.to_string(), r)).collect(),
    };
    serde_json::to_string(&out).expect("perturbation serializes")
}
