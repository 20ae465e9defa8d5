//! Expected hitting times and the entrance time of a target set.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::stochastic::{complement, mask, StochasticMatrix};

/// Expected hitting times `τ^v_W` of `W` for every starting state `v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingTimes {
    pub tau: Vec<f64>,
    pub target: Vec<usize>,
}

impl HittingTimes {
    /// Largest violation of `τ^u = 1 + Σ_v P_uv τ^v` over `u ∉ W`, or of `τ^w = 0` on `W`.
    pub fn residual(&self, p: &StochasticMatrix) -> f64 {
        let in_w = mask(p.n(), &self.target);
        (0..p.n())
            .map(|u| {
                if in_w[u] {
                    self.tau[u].abs()
                } else {
                    let rhs: f64 = 1.0 + p.row(u).map(|(v, q)| q * self.tau[v]).sum::<f64>();
                    (self.tau[u] - rhs).abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

pub fn hitting_times(p: &StochasticMatrix, target: &[usize]) -> Result<HittingTimes> {
    hitting_times_with(p, target, &SolverConfig::default())
}

/// Solves `(I − P_{CC}) τ_C = 𝟙` on the complement `C` of `W`.
pub fn hitting_times_with(
    p: &StochasticMatrix,
    target: &[usize],
    cfg: &SolverConfig,
) -> Result<HittingTimes> {
    let n = p.n();
    let mut target: Vec<usize> = target.to_vec();
    target.sort_unstable();
    target.dedup();
    if target.is_empty() {
        return Err(Error::domain("target set must be nonempty"));
    }
    if let Some(&w) = target.iter().find(|&&w| w >= n) {
        return Err(Error::domain(format!("target state {w} out of range")));
    }
    let reach = p.states_reaching(&target);
    let stuck: Vec<usize> = (0..n).filter(|&u| !reach[u]).collect();
    if !stuck.is_empty() {
        return Err(Error::Unreachable(stuck));
    }

    let rest = complement(n, &target);
    let mut tau = vec![0.0; n];
    if rest.is_empty() {
        return Ok(HittingTimes { tau, target });
    }
    let mut local = vec![usize::MAX; n];
    for (k, &u) in rest.iter().enumerate() {
        local[u] = k;
    }
    let solved = if rest.len() <= cfg.direct_max_states {
        solve_direct(p, &rest, &local)?
    } else {
        solve_gauss_seidel(p, &rest, &local, cfg)?
    };
    for (k, &u) in rest.iter().enumerate() {
        tau[u] = solved[k];
    }
    Ok(HittingTimes { tau, target })
}

fn solve_direct(p: &StochasticMatrix, rest: &[usize], local: &[usize]) -> Result<Vec<f64>> {
    let m = rest.len();
    let mut a = DMatrix::<f64>::identity(m, m);
    for (i, &u) in rest.iter().enumerate() {
        for (v, q) in p.row(u) {
            let j = local[v];
            if j != usize::MAX {
                a[(i, j)] -= q;
            }
        }
    }
    let b = DVector::<f64>::from_element(m, 1.0);
    let lu = a.clone().lu();
    let singular = || Error::domain("singular hitting-time system");
    let mut x = lu.solve(&b).ok_or_else(singular)?;
    // One step of iterative refinement.
    let r = &b - &a * &x;
    x += lu.solve(&r).ok_or_else(singular)?;
    Ok(x.iter().copied().collect())
}

fn solve_gauss_seidel(
    p: &StochasticMatrix,
    rest: &[usize],
    local: &[usize],
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let mut x = vec![0.0; rest.len()];
    let mut change = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        change = 0.0;
        let mut scale: f64 = 1.0;
        for (i, &u) in rest.iter().enumerate() {
            let mut diag = 0.0;
            let mut acc = 1.0;
            for (v, q) in p.row(u) {
                let j = local[v];
                if j == i {
                    diag = q;
                } else if j != usize::MAX {
                    acc += q * x[j];
                }
            }
            let new = acc / (1.0 - diag);
            change = change.max((new - x[i]).abs());
            scale = scale.max(new.abs());
            x[i] = new;
        }
        if change <= 1e-13 * scale {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iterations,
        residual: change,
    })
}

/// Entrance time `τ*_W = min_{u ∉ W} τ^u_W`.
pub fn entrance_time(ht: &HittingTimes) -> Result<f64> {
    let in_w = mask(ht.tau.len(), &ht.target);
    ht.tau
        .iter()
        .enumerate()
        .filter(|&(u, _)| !in_w[u])
        .map(|(_, &t)| t)
        .reduce(f64::min)
        .ok_or(Error::EmptyComplement)
}

/// The same minimum taken only over the in-boundary `∂⁻_W`.
pub fn entrance_time_on_boundary(p: &StochasticMatrix, ht: &HittingTimes) -> Result<f64> {
    let (_, minus) = crate::analysis::boundaries(p, &ht.target);
    minus
        .iter()
        .map(|&u| ht.tau[u])
        .reduce(f64::min)
        .ok_or(Error::EmptyComplement)
}
