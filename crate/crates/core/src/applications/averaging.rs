//! Ratio-consensus averaging on a sensor graph, with and without failed links.
//!
//! Each node starts from `x = y/d`, `z = 1/d` and repeatedly replaces both by
//! the lazy-walk average over its neighbors. Every ratio `x_v/z_v` is then a
//! weighted average of the previous ratios, so the spread `max − min` of the
//! ratios shrinks monotonically and the common limit lies inside it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{lazy_walk, link_removal_perturbation, GraphSpec};
use crate::stationary::stationary_vector;
use crate::stochastic::{tv_distance, ProbVector, StochasticMatrix};
use crate::tagged::Tagged;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingOptions {
    /// Stop once `max_v r_v − min_v r_v ≤ tol`, where `r = x/z`.
    pub tol: f64,
    pub max_iterations: usize,
    /// Keep every iterate instead of only the first and last.
    pub record_trace: bool,
}

impl Default for AveragingOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iterations: 10_000_000,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragingRun {
    pub x_trace: Vec<Vec<f64>>,
    pub z_trace: Vec<Vec<f64>>,
    pub consensus_value: f64,
    pub iterations: usize,
    /// `max_v |x_v/z_v − consensus_value|` at the final iterate.
    pub residual: f64,
}

fn ratio_spread(x: &[f64], z: &[f64]) -> (f64, f64) {
    x.iter()
        .zip(z)
        .map(|(a, b)| a / b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r), hi.max(r))
        })
}

fn iterate(
    p: &StochasticMatrix,
    degrees: &[usize],
    y: &[f64],
    opts: &AveragingOptions,
) -> Result<AveragingRun> {
    let mut x: Vec<f64> = y.iter().zip(degrees).map(|(&v, &d)| v / d as f64).collect();
    let mut z: Vec<f64> = degrees.iter().map(|&d| 1.0 / d as f64).collect();
    let mut x_trace = vec![x.clone()];
    let mut z_trace = vec![z.clone()];
    let mut t = 0;
    loop {
        let (lo, hi) = ratio_spread(&x, &z);
        if hi - lo <= opts.tol {
            let consensus_value = 0.5 * (lo + hi);
            if !opts.record_trace && t > 0 {
                x_trace.push(x);
                z_trace.push(z);
            }
            return Ok(AveragingRun {
                x_trace,
                z_trace,
                consensus_value,
                iterations: t,
                residual: 0.5 * (hi - lo),
            });
        }
        if t >= opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations: t,
                residual: hi - lo,
            });
        }
        x = p.right_mul(&x);
        z = p.right_mul(&z);
        t += 1;
        if opts.record_trace {
            x_trace.push(x.clone());
            z_trace.push(z.clone());
        }
    }
}

fn check_measurements(graph: &GraphSpec, y: &[f64]) -> Result<()> {
    if y.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            found: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("measurements must be finite"));
    }
    Ok(())
}

/// Runs the averaging iteration on the intact graph.
pub fn run_averaging(graph: &GraphSpec, y: &[f64], opts: &AveragingOptions) -> Result<AveragingRun> {
    check_measurements(graph, y)?;
    let p = lazy_walk(graph)?;
    iterate(&p, &graph.out_degrees(), y, opts)
}

/// Runs the iteration after the links in `removed` fail; node `u` then averages
/// over its surviving links and divides by its residual degree `d̃_u`.
pub fn run_averaging_perturbed(
    graph: &GraphSpec,
    removed: &[(usize, usize)],
    y: &[f64],
    opts: &AveragingOptions,
) -> Result<AveragingRun> {
    check_measurements(graph, y)?;
    let (residual, _) = link_removal_perturbation(graph, removed)?;
    let p = lazy_walk(&residual)?;
    iterate(&p, &residual.out_degrees(), y, opts)
}

/// `π̃(y/d̃) / π̃(𝟙/d̃)` for the lazy walk on the residual graph.
pub fn perturbed_consensus(graph: &GraphSpec, removed: &[(usize, usize)], y: &[f64]) -> Result<f64> {
    check_measurements(graph, y)?;
    let (residual, _) = link_removal_perturbation(graph, removed)?;
    let pi = stationary_vector(&lazy_walk(&residual)?)?;
    let d = residual.out_degrees();
    let num: f64 = (0..y.len()).map(|v| pi[v] * y[v] / d[v] as f64).sum();
    let den: f64 = (0..y.len()).map(|v| pi[v] / d[v] as f64).sum();
    Ok(num / den)
}

/// `2 d̄ (|F|/|E| + ‖π̃ − π‖)`, a bound on `|ỹ − ȳ| / ‖y‖_∞`.
pub fn averaging_error_bound(d_bar: f64, frac_failed: f64, tv: f64) -> Result<f64> {
    if [d_bar, frac_failed, tv].iter().any(|&x| x.is_nan() || x < 0.0) {
        return Err(Error::domain("averaging bound inputs must be nonnegative"));
    }
    Ok(2.0 * d_bar * (frac_failed + tv))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragingAudit {
    pub mean: Tagged<f64>,
    pub consensus: Tagged<f64>,
    pub consensus_iterations: usize,
    pub consensus_formula: Tagged<f64>,
    pub tv: Tagged<f64>,
    pub normalized_error: Tagged<f64>,
    pub bound: Tagged<f64>,
    pub holds: bool,
}

/// Runs the perturbed iteration and compares its limit with the closed form
/// and the error bound.
pub fn audit_averaging(
    graph: &GraphSpec,
    removed: &[(usize, usize)],
    y: &[f64],
    opts: &AveragingOptions,
) -> Result<AveragingAudit> {
    let run = run_averaging_perturbed(graph, removed, y, opts)?;
    let formula = perturbed_consensus(graph, removed, y)?;
    let (residual, _) = link_removal_perturbation(graph, removed)?;
    let pi = stationary_vector(&lazy_walk(graph)?)?;
    let pit = stationary_vector(&lazy_walk(&residual)?)?;
    let tv = tv_distance(&pit, &pi)?;
    let n = graph.n() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let y_inf = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let normalized_error = if y_inf > 0.0 {
        (run.consensus_value - mean).abs() / y_inf
    } else {
        0.0
    };
    let d_bar = graph.num_edges() as f64 / n;
    let frac = (graph.num_edges() - residual.num_edges()) as f64 / graph.num_edges() as f64;
    let bound = averaging_error_bound(d_bar, frac, tv)?;
    Ok(AveragingAudit {
        mean: Tagged::exact(mean),
        consensus: Tagged::exact(run.consensus_value),
        consensus_iterations: run.iterations,
        consensus_formula: Tagged::exact(formula),
        tv: Tagged::exact(tv),
        normalized_error: Tagged::exact(normalized_error),
        bound: Tagged::upper(bound),
        holds: normalized_error <= bound + 1e-12,
    })
}

/// `π_v = d_v/(n d̄)`, the invariant vector of the lazy walk on an undirected graph.
pub fn degree_invariant(graph: &GraphSpec) -> Result<ProbVector> {
    let d = graph.out_degrees();
    let total: usize = d.iter().sum();
    if total == 0 {
        return Err(Error::ZeroDegree(0));
    }
    ProbVector::new(d.into_iter().map(|x| x as f64 / total as f64).collect())
}
