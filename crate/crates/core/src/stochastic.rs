//! Finite state spaces, sparse row-stochastic matrices and probability vectors.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Ordered, duplicate-free list of opaque state labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::domain("state space must contain at least one state"));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::domain(format!("duplicate state label {l:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// States labelled `"0"`, `"1"`, ..., `"n-1"`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Resolves a label, falling back to a decimal index.
    pub fn resolve(&self, key: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == key).or_else(|| {
            key.parse::<usize>()
                .ok()
                .filter(|&i| i < self.labels.len())
        })
    }
}

/// Normalizes and validates one sparse probability row.
///
/// Entries are sorted by column, duplicates rejected, entries in `[-clamp, 0]`
/// dropped, and the sum must be within `tol.construction` of 1.
pub(crate) fn validate_row(
    row_index: usize,
    n: usize,
    mut entries: Vec<(usize, f64)>,
    tol: &Tolerances,
) -> Result<Vec<(usize, f64)>> {
    let invalid = |reason: String| Error::InvalidRow {
        row: row_index,
        reason,
    };
    entries.sort_by_key(|&(c, _)| c);
    let mut out = Vec::with_capacity(entries.len());
    let mut last = None;
    let mut sum = 0.0;
    for (c, p) in entries {
        if c >= n {
            return Err(invalid(format!("column {c} out of range for n = {n}")));
        }
        if last == Some(c) {
            return Err(invalid(format!("duplicate column {c}")));
        }
        last = Some(c);
        if !p.is_finite() {
            return Err(invalid(format!("non-finite entry at column {c}")));
        }
        if p < -tol.clamp {
            return Err(invalid(format!("negative entry {p} at column {c}")));
        }
        if p > 0.0 {
            sum += p;
            out.push((c, p));
        }
    }
    if (sum - 1.0).abs() > tol.construction {
        return Err(invalid(format!("row sums to {sum}")));
    }
    Ok(out)
}

/// Sparse row-stochastic matrix in compressed-row form.
///
/// Only strictly positive entries are stored, so the stored pattern is the
/// support graph of the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl StochasticMatrix {
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        Self::from_rows_with(rows, &Tolerances::default())
    }

    pub fn from_rows_with(rows: Vec<Vec<(usize, f64)>>, tol: &Tolerances) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::domain("matrix must have at least one row"));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for (u, row) in rows.into_iter().enumerate() {
            for (c, p) in validate_row(u, n, row, tol)? {
                cols.push(c);
                vals.push(p);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            n,
            row_ptr,
            cols,
            vals,
        })
    }

    /// Builds from a dense row-major table; zero entries are dropped.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let sparse = rows
            .iter()
            .map(|r| {
                if r.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: r.len(),
                    });
                }
                Ok(r.iter().copied().enumerate().filter(|&(_, p)| p != 0.0).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(sparse)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_cols(&self, u: usize) -> &[usize] {
        &self.cols[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    pub fn row_vals(&self, u: usize) -> &[f64] {
        &self.vals[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    pub fn row(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row_cols(u)
            .iter()
            .copied()
            .zip(self.row_vals(u).iter().copied())
    }

    pub fn row_vec(&self, u: usize) -> Vec<(usize, f64)> {
        self.row(u).collect()
    }

    pub fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        (0..self.n).map(|u| self.row_vec(u)).collect()
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        let cols = self.row_cols(u);
        match cols.binary_search(&v) {
            Ok(k) => self.row_vals(u)[k],
            Err(_) => 0.0,
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for u in 0..n {
            for (v, p) in self.row(u) {
                out[u * n + v] = p;
            }
        }
        out
    }

    /// `μP` for a row vector `μ`.
    pub fn left_mul(&self, mu: &[f64]) -> Vec<f64> {
        assert_eq!(mu.len(), self.n);
        let mut out = vec![0.0; self.n];
        for (u, &m) in mu.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for (v, p) in self.row(u) {
                out[v] += m * p;
            }
        }
        out
    }

    /// `Px` for a column vector `x`.
    pub fn right_mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|u| self.row(u).map(|(v, p)| p * x[v]).sum())
            .collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|u| self.row(u).all(|(v, p)| (self.get(v, u) - p).abs() <= tol))
    }

    /// Rows whose entries differ from `other` by more than `tol`.
    pub fn differing_rows(&self, other: &StochasticMatrix, tol: f64) -> Result<Vec<usize>> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok((0..self.n)
            .filter(|&u| {
                let a: BTreeMap<usize, f64> = self.row(u).collect();
                let b: BTreeMap<usize, f64> = other.row(u).collect();
                let keys: BTreeSet<usize> = a.keys().chain(b.keys()).copied().collect();
                keys.into_iter().any(|k| {
                    let x = a.get(&k).copied().unwrap_or(0.0);
                    let y = b.get(&k).copied().unwrap_or(0.0);
                    (x - y).abs() > tol
                })
            })
            .collect())
    }

    /// Principal submatrix on a closed set of states, re-indexed in the given order.
    pub fn restrict_closed(&self, states: &[usize]) -> Result<StochasticMatrix> {
        let mut index = vec![usize::MAX; self.n];
        for (k, &s) in states.iter().enumerate() {
            index[s] = k;
        }
        let rows = states
            .iter()
            .map(|&s| {
                self.row(s)
                    .map(|(v, p)| {
                        if index[v] == usize::MAX {
                            Err(Error::domain(format!(
                                "state set is not closed: {s} -> {v}"
                            )))
                        } else {
                            Ok((index[v], p))
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        StochasticMatrix::from_rows(rows)
    }

    /// Strongly connected components of the support graph (Tarjan).
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::with_capacity(self.n, self.nnz());
        let nodes: Vec<_> = (0..self.n).map(|_| g.add_node(())).collect();
        for u in 0..self.n {
            for &v in self.row_cols(u) {
                g.add_edge(nodes[u], nodes[v], ());
            }
        }
        let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
                c.sort_unstable();
                c
            })
            .collect();
        comps.sort_by_key(|c| c[0]);
        comps
    }

    pub fn is_irreducible(&self) -> bool {
        self.strongly_connected_components().len() == 1
    }

    /// Components with no transition leaving them (the recurrent classes).
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        let comps = self.strongly_connected_components();
        let mut comp_of = vec![0; self.n];
        for (k, c) in comps.iter().enumerate() {
            for &s in c {
                comp_of[s] = k;
            }
        }
        comps
            .iter()
            .enumerate()
            .filter(|(k, c)| {
                c.iter()
                    .all(|&u| self.row_cols(u).iter().all(|&v| comp_of[v] == *k))
            })
            .map(|(_, c)| c.clone())
            .collect()
    }

    /// States from which some state of `targets` is reachable in the support graph.
    pub fn states_reaching(&self, targets: &[usize]) -> Vec<bool> {
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for u in 0..self.n {
            for &v in self.row_cols(u) {
                preds[v].push(u);
            }
        }
        let mut seen = vec![false; self.n];
        let mut stack: Vec<usize> = Vec::new();
        for &t in targets {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
        while let Some(v) = stack.pop() {
            for &u in &preds[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }
}

/// Dense probability vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::new_with(entries, &Tolerances::default())
    }

    pub fn new_with(mut entries: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidVector("empty vector".into()));
        }
        let mut sum = 0.0;
        for (i, x) in entries.iter_mut().enumerate() {
            if !x.is_finite() || *x < -tol.clamp {
                return Err(Error::InvalidVector(format!("entry {i} = {x}")));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
            sum += *x;
        }
        if (sum - 1.0).abs() > tol.construction {
            return Err(Error::InvalidVector(format!("entries sum to {sum}")));
        }
        Ok(Self(entries))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `μ(A) = Σ_{a∈A} μ_a`.
    pub fn mass(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.0[i]).sum()
    }

    pub fn support(&self, positivity: f64) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > positivity).collect()
    }

    /// Inner product with a column vector.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn check_dims(mu: &ProbVector, nu: &ProbVector) -> Result<()> {
    if mu.len() != nu.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            found: nu.len(),
        });
    }
    Ok(())
}

/// Total variation distance `½ Σ_v |μ_v − ν_v|`.
pub fn tv_distance(mu: &ProbVector, nu: &ProbVector) -> Result<f64> {
    check_dims(mu, nu)?;
    let l1: f64 = mu.0.iter().zip(&nu.0).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * l1).clamp(0.0, 1.0))
}

/// The set `{v : μ_v > ν_v}` maximizing `μ(U) − ν(U)`, together with the gap.
pub fn tv_subset_witness(mu: &ProbVector, nu: &ProbVector) -> Result<(Vec<usize>, f64)> {
    check_dims(mu, nu)?;
    let set: Vec<usize> = (0..mu.len()).filter(|&v| mu.0[v] > nu.0[v]).collect();
    let gap = set.iter().map(|&v| mu.0[v] - nu.0[v]).sum();
    Ok((set, gap))
}

/// A perturbation set `W` with replacement rows.
///
/// A state of `W` without an entry in `rows` keeps its original row; `W` may
/// therefore be any superset of the rows that actually change.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    n: usize,
    set: Vec<usize>,
    rows: BTreeMap<usize, Vec<(usize, f64)>>,
}

impl PerturbationSpec {
    pub fn new(n: usize, set: Vec<usize>, rows: BTreeMap<usize, Vec<(usize, f64)>>) -> Result<Self> {
        let tol = Tolerances::default();
        let set: Vec<usize> = set.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if set.is_empty() {
            return Err(Error::domain("perturbation set W must be nonempty"));
        }
        if let Some(&w) = set.iter().find(|&&w| w >= n) {
            return Err(Error::domain(format!("state {w} of W out of range for n = {n}")));
        }
        let mut checked = BTreeMap::new();
        for (w, row) in rows {
            if set.binary_search(&w).is_err() {
                return Err(Error::domain(format!("replacement row {w} is not in W")));
            }
            checked.insert(w, validate_row(w, n, row, &tol)?);
        }
        Ok(Self {
            n,
            set,
            rows: checked,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted states of `W`.
    pub fn set(&self) -> &[usize] {
        &self.set
    }

    pub fn rows(&self) -> &BTreeMap<usize, Vec<(usize, f64)>> {
        &self.rows
    }
}

/// Builds `P̃`: equal to `P` off `W`, replacement rows on `W`.
pub fn apply_perturbation(p: &StochasticMatrix, spec: &PerturbationSpec) -> Result<StochasticMatrix> {
    if spec.n != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            found: spec.n,
        });
    }
    let rows = (0..p.n())
        .map(|u| match spec.rows.get(&u) {
            Some(r) => r.clone(),
            None => p.row_vec(u),
        })
        .collect();
    let pt = StochasticMatrix::from_rows(rows)?;
    let changed = p.differing_rows(&pt, 0.0)?;
    let outside: Vec<usize> = changed
        .into_iter()
        .filter(|u| spec.set.binary_search(u).is_err())
        .collect();
    if !outside.is_empty() {
        return Err(Error::SupportViolation(outside));
    }
    Ok(pt)
}

/// Sorted complement of a sorted set within `0..n`.
pub fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    let mut mark = vec![false; n];
    for &s in set {
        mark[s] = true;
    }
    (0..n).filter(|&v| !mark[v]).collect()
}

/// Membership mask for a set of states.
pub fn mask(n: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &s in set {
        m[s] = true;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(a: f64, b: f64) -> StochasticMatrix {
        StochasticMatrix::from_dense(&[vec![1.0 - a, a], vec![b, 1.0 - b]]).unwrap()
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(
            StochasticMatrix::from_rows(vec![vec![(0, 0.5)]]),
            Err(Error::InvalidRow { row: 0, .. })
        ));
        assert!(StochasticMatrix::from_rows(vec![vec![(0, 1.2), (0, -0.2)]]).is_err());
        assert!(StochasticMatrix::from_rows(vec![vec![(0, 1.0 + 1e-9)]]).is_err());
        assert!(StochasticMatrix::from_rows(vec![vec![(0, 1.0), (1, 0.0)]]).is_err());
        assert!(StochasticMatrix::from_rows(vec![vec![(0, 1.0), (1, -1e-3)], vec![(1, 1.0)]]).is_err());
    }

    #[test]
    fn clamps_float_noise() {
        let m = StochasticMatrix::from_rows(vec![
            vec![(0, 1.0), (1, -1e-16)],
            vec![(0, 0.5), (1, 0.5)],
        ])
        .unwrap();
        assert_eq!(m.row_cols(0), &[0]);
        assert_eq!(m.nnz(), 3);
        let v = ProbVector::new(vec![1.0, -5e-16]).unwrap();
        assert_eq!(v[1], 0.0);
        assert!(ProbVector::new(vec![1.1, -0.1]).is_err());
    }

    #[test]
    fn tv_basic_cases() {
        let a = ProbVector::new(vec![1.0, 0.0]).unwrap();
        let b = ProbVector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 1.0);
        assert_eq!(tv_subset_witness(&a, &a).unwrap(), (vec![], 0.0));
        let c = ProbVector::uniform(3);
        assert!(matches!(
            tv_distance(&a, &c),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tv_of_single_row_perturbation_on_complete_chain() {
        // n = 10, α = 0.5: π̃_w = 1/(nα+1), π̃_v = nα/((n−1)(nα+1)).
        let n = 10;
        let alpha = 0.5;
        let nf = n as f64;
        let mut pt = vec![nf * alpha / ((nf - 1.0) * (nf * alpha + 1.0)); n];
        pt[0] = 1.0 / (nf * alpha + 1.0);
        let pt = ProbVector::new(pt).unwrap();
        let tv = tv_distance(&pt, &ProbVector::uniform(n)).unwrap();
        assert!((tv - 0.4 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn identity_perturbation_is_noop() {
        let p = two_state(0.3, 0.6);
        let spec = PerturbationSpec::new(2, vec![0], BTreeMap::from([(0, p.row_vec(0))])).unwrap();
        assert_eq!(apply_perturbation(&p, &spec).unwrap(), p);
    }

    #[test]
    fn perturbation_changes_only_w() {
        let p = two_state(0.3, 0.6);
        let spec = PerturbationSpec::new(2, vec![1], BTreeMap::from([(1, vec![(1, 1.0)])])).unwrap();
        let pt = apply_perturbation(&p, &spec).unwrap();
        assert_eq!(pt.differing_rows(&p, 0.0).unwrap(), vec![1]);
        assert_eq!(pt.get(1, 1), 1.0);
    }

    #[test]
    fn spec_validation() {
        assert!(PerturbationSpec::new(2, vec![], BTreeMap::new()).is_err());
        assert!(PerturbationSpec::new(2, vec![2], BTreeMap::new()).is_err());
        assert!(PerturbationSpec::new(2, vec![0], BTreeMap::from([(1, vec![(1, 1.0)])])).is_err());
        assert!(PerturbationSpec::new(2, vec![0], BTreeMap::from([(0, vec![(1, 0.7)])])).is_err());
    }

    #[test]
    fn components_and_classes() {
        // 0 <-> 1, 2 -> 0, 3 absorbing
        let p = StochasticMatrix::from_rows(vec![
            vec![(1, 1.0)],
            vec![(0, 1.0)],
            vec![(0, 0.5), (3, 0.5)],
            vec![(3, 1.0)],
        ])
        .unwrap();
        assert_eq!(p.strongly_connected_components().len(), 3);
        assert_eq!(p.closed_classes(), vec![vec![0, 1], vec![3]]);
        assert!(!p.is_irreducible());
        let reach = p.states_reaching(&[3]);
        assert_eq!(reach, vec![false, false, true, true]);
    }

    #[test]
    fn state_space_labels() {
        assert!(StateSpace::new(vec!["a".into(), "a".into()]).is_err());
        assert!(StateSpace::new(vec![]).is_err());
        let s = StateSpace::new(vec!["x".into(), "y".into()]).unwrap();
        assert_eq!(s.resolve("y"), Some(1));
        assert_eq!(s.resolve("0"), Some(0));
        assert_eq!(s.resolve("5"), None);
    }
}
