//! Mixing time by explicit matrix powers.
//!
//! `t_mix` is the first `t ≥ 1` at which every pair of rows of `P^t` is within
//! total variation `1/e`. Powers are kept dense and advanced by one sparse
//! multiplication per step, so a step costs `O(n · nnz(P))` plus the pairwise
//! diameter scan.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::stochastic::StochasticMatrix;
use crate::tagged::Method;

pub const MIXING_THRESHOLD: f64 = 1.0 / std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingOptions {
    pub threshold: f64,
    /// Defaults to `10 n²` when `None`.
    pub t_cap: Option<usize>,
    /// Above this size the diameter is replaced by a triangle-inequality upper bound.
    pub exact_pairs_max: usize,
}

impl Default for MixingOptions {
    fn default() -> Self {
        Self {
            threshold: MIXING_THRESHOLD,
            t_cap: None,
            exact_pairs_max: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingTime {
    pub steps: usize,
    /// Diameter (or its upper bound) at `steps`.
    pub diameter: f64,
    /// `Exact`, or `UpperBound` when the pairwise scan was replaced by the triangle bound.
    pub method: Method,
}

/// Dense iterates `P, P², P³, ...`.
pub struct MatrixPowers<'a> {
    p: &'a StochasticMatrix,
    current: Vec<f64>,
    t: usize,
}

impl<'a> MatrixPowers<'a> {
    pub fn new(p: &'a StochasticMatrix) -> Self {
        Self {
            p,
            current: p.to_dense(),
            t: 1,
        }
    }

    pub fn exponent(&self) -> usize {
        self.t
    }

    /// Row-major `P^t`.
    pub fn current(&self) -> &[f64] {
        &self.current
    }

    pub fn advance(&mut self) {
        let n = self.p.n();
        let p = self.p;
        let cur = &self.current;
        let mut next = vec![0.0; n * n];
        next.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
            let row = &cur[i * n..(i + 1) * n];
            for (k, &c) in row.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (j, pv) in p.row(k) {
                    out[j] += c * pv;
                }
            }
        });
        self.current = next;
        self.t += 1;
    }
}

fn row_tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// `max_{u,v} ‖M_u − M_v‖` over all row pairs of a dense row-major matrix.
pub fn tv_diameter(m: &[f64], n: usize) -> f64 {
    (0..n)
        .into_par_iter()
        .map(|u| {
            let ru = &m[u * n..(u + 1) * n];
            ((u + 1)..n)
                .map(|v| row_tv(ru, &m[v * n..(v + 1) * n]))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Upper bound on the diameter from the distances to row 0:
/// `‖M_u − M_v‖ ≤ ‖M_u − M_0‖ + ‖M_0 − M_v‖`.
pub fn tv_diameter_upper(m: &[f64], n: usize) -> f64 {
    let r0 = &m[..n];
    let mut d: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|u| row_tv(&m[u * n..(u + 1) * n], r0))
        .collect();
    d.sort_by(|a, b| b.total_cmp(a));
    let top = d.first().copied().unwrap_or(0.0) + d.get(1).copied().unwrap_or(0.0);
    top.min(1.0)
}

/// Exact `d̄(t)` for `t = 1..=t_max`.
pub fn diameter_sequence(p: &StochasticMatrix, t_max: usize) -> Vec<f64> {
    let mut powers = MatrixPowers::new(p);
    let mut out = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        if t > 1 {
            powers.advance();
        }
        out.push(tv_diameter(powers.current(), p.n()));
    }
    out
}

/// Exact mixing time; fails with `CapExceeded` for periodic or very slow chains.
pub fn mixing_time_exact(p: &StochasticMatrix, threshold: f64, t_cap: usize) -> Result<usize> {
    let opts = MixingOptions {
        threshold,
        t_cap: Some(t_cap),
        exact_pairs_max: usize::MAX,
    };
    mixing_time(p, &opts).map(|m| m.steps)
}

pub fn mixing_time(p: &StochasticMatrix, opts: &MixingOptions) -> Result<MixingTime> {
    let n = p.n();
    let cap = opts.t_cap.unwrap_or(10 * n * n).max(1);
    let exact = n <= opts.exact_pairs_max;
    let mut powers = MatrixPowers::new(p);
    let mut last = 1.0;
    for t in 1..=cap {
        if t > 1 {
            powers.advance();
        }
        last = if exact {
            tv_diameter(powers.current(), n)
        } else {
            tv_diameter_upper(powers.current(), n)
        };
        if last <= opts.threshold {
            return Ok(MixingTime {
                steps: t,
                diameter: last,
                method: if exact { Method::Exact } else { Method::UpperBound },
            });
        }
    }
    Err(Error::CapExceeded {
        cap,
        last_diameter: last,
    })
}

/// Coupling bound `⌈−1/ln(1−β)⌉` on the mixing time of `(1−β)Q + β𝟙μ`.
pub fn pagerank_mixing_bound(beta: f64) -> Result<usize> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("teleportation β = {beta} not in (0,1)")));
    }
    let x = -1.0 / (1.0 - beta).ln();
    Ok((x.ceil() as usize).max(1))
}
