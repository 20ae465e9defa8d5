//! Exit-time law from `W` under the perturbed matrix and the exit probability `γ̃_W`.
//!
//! With `S` the sub-stochastic restriction of `P̃` to `W × W` and `e_w` the
//! one-step exit mass `Σ_{v∉W} P̃_wv`, the exit time from `w` has
//! `φ_w(k) = (S^{k−1} e)_w` and `ℙ_w(T ≤ t) = Σ_{k≤t} φ_w(k)`.
//!
//! `γ̃_W = sup_t min_w ℙ_w(T ≤ t)/t` over the supported states. Since the
//! ratio is at most `1/t`, once a value `b` has been seen no horizon
//! `t ≥ 1/b` can improve on it, which makes the supremum a finite search.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stochastic::{mask, StochasticMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitOptions {
    /// Hard limit on the search horizon. Hitting it makes the result a lower bound.
    pub t_cap: usize,
}

impl Default for ExitOptions {
    fn default() -> Self {
        Self { t_cap: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExitDistribution {
    /// `φ_w(k)` for `k = 1..=horizon`.
    pub phi: BTreeMap<usize, Vec<f64>>,
    /// Truncation horizon `T`.
    pub horizon: usize,
    /// `ℙ_w(T_exit > horizon)`.
    pub truncated_mass: BTreeMap<usize, f64>,
    /// States of `W` from which `V∖W` is not accessible.
    pub trapped: Vec<usize>,
    /// The search stopped at `t_cap` before certifying the supremum.
    pub capped: bool,
}

impl ExitDistribution {
    /// `ℙ_w(T_exit ≤ t)` for `t ≤ horizon`.
    pub fn cdf(&self, w: usize, t: usize) -> f64 {
        self.phi[&w][..t].iter().sum()
    }
}

struct Restricted {
    states: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
    exit: Vec<f64>,
}

fn restrict(pt: &StochasticMatrix, set: &[usize]) -> Restricted {
    let n = pt.n();
    let mut local = vec![usize::MAX; n];
    for (k, &w) in set.iter().enumerate() {
        local[w] = k;
    }
    let mut rows = Vec::with_capacity(set.len());
    let mut exit = Vec::with_capacity(set.len());
    for &w in set {
        let mut row = Vec::new();
        let mut out = 0.0;
        for (v, q) in pt.row(w) {
            match local[v] {
                usize::MAX => out += q,
                j => row.push((j, q)),
            }
        }
        rows.push(row);
        exit.push(out);
    }
    Restricted {
        states: set.to_vec(),
        rows,
        exit,
    }
}

/// States of `W` (local indices) that can reach the complement.
fn can_exit(r: &Restricted) -> Vec<bool> {
    let m = r.states.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, row) in r.rows.iter().enumerate() {
        for &(j, _) in row {
            preds[j].push(i);
        }
    }
    let mut ok: Vec<bool> = r.exit.iter().map(|&e| e > 0.0).collect();
    let mut stack: Vec<usize> = (0..m).filter(|&i| ok[i]).collect();
    while let Some(j) = stack.pop() {
        for &i in &preds[j] {
            if !ok[i] {
                ok[i] = true;
                stack.push(i);
            }
        }
    }
    ok
}

fn normalize_set(n: usize, set: &[usize]) -> Result<Vec<usize>> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&w) = s.iter().find(|&&w| w >= n) {
        return Err(Error::domain(format!("state {w} out of range")));
    }
    Ok(s)
}

pub fn exit_distribution(
    pt: &StochasticMatrix,
    set: &[usize],
    support: &[usize],
) -> Result<ExitDistribution> {
    exit_distribution_with(pt, set, support, &ExitOptions::default())
}

/// Computes `φ_w` up to a horizon that certifies `γ̃_W` for `support`.
pub fn exit_distribution_with(
    pt: &StochasticMatrix,
    set: &[usize],
    support: &[usize],
    opts: &ExitOptions,
) -> Result<ExitDistribution> {
    let set = normalize_set(pt.n(), set)?;
    let support = normalize_set(pt.n(), support)?;
    if set.is_empty() {
        return Err(Error::domain("W must be nonempty"));
    }
    if support.is_empty() {
        return Err(Error::domain("support of the perturbed invariant vector is empty"));
    }
    let in_w = mask(pt.n(), &set);
    if let Some(&s) = support.iter().find(|&&s| !in_w[s]) {
        return Err(Error::domain(format!("support state {s} is not in W")));
    }
    let r = restrict(pt, &set);
    let m = set.len();
    let local_of = |w: usize| set.binary_search(&w).expect("w in W");
    let ok = can_exit(&r);
    let trapped: Vec<usize> = (0..m).filter(|&i| !ok[i]).map(|i| set[i]).collect();
    let supp_local: Vec<usize> = support.iter().map(|&w| local_of(w)).collect();
    let support_trapped = supp_local.iter().any(|&i| !ok[i]);

    let mut phi: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut cdf = vec![0.0; m];
    // q = S^{t−1} e, surv = S^t 𝟙
    let mut q = r.exit.clone();
    let mut surv = vec![1.0; m];
    let mut best: f64 = 0.0;
    let mut capped = false;
    let mut t = 0usize;
    loop {
        t += 1;
        for i in 0..m {
            phi[i].push(q[i]);
            cdf[i] += q[i];
        }
        q = step(&r.rows, &q);
        surv = step(&r.rows, &surv);
        if support_trapped {
            if t >= m {
                break;
            }
            continue;
        }
        let worst = supp_local
            .iter()
            .map(|&i| cdf[i].min(1.0) / t as f64)
            .fold(f64::INFINITY, f64::min);
        best = best.max(worst);
        if best > 0.0 && (t + 1) as f64 * best >= 1.0 {
            break;
        }
        if t >= opts.t_cap {
            capped = true;
            break;
        }
    }
    Ok(ExitDistribution {
        phi: set.iter().copied().zip(phi).collect(),
        horizon: t,
        truncated_mass: set.iter().copied().zip(surv).collect(),
        trapped,
        capped,
    })
}

fn step(rows: &[Vec<(usize, f64)>], x: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|row| row.iter().map(|&(j, q)| q * x[j]).sum())
        .collect()
}

/// `γ̃_W = sup_{1≤t≤T} min_{w ∈ support} ℙ_w(T_exit ≤ t)/t`; zero when some supported
/// state cannot leave `W`.
pub fn exit_probability(dist: &ExitDistribution, support: &[usize]) -> Result<f64> {
    if support.is_empty() {
        return Err(Error::domain("support of the perturbed invariant vector is empty"));
    }
    for s in support {
        if !dist.phi.contains_key(s) {
            return Err(Error::domain(format!("support state {s} is not in W")));
        }
    }
    if support.iter().any(|s| dist.trapped.contains(s)) {
        return Ok(0.0);
    }
    let mut cdf: Vec<f64> = vec![0.0; support.len()];
    let mut best: f64 = 0.0;
    for t in 1..=dist.horizon {
        let mut worst = f64::INFINITY;
        for (c, s) in cdf.iter_mut().zip(support) {
            *c += dist.phi[s][t - 1];
            worst = worst.min(c.min(1.0) / t as f64);
        }
        best = best.max(worst);
    }
    Ok(best.clamp(0.0, 1.0))
}
