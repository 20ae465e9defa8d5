//! Voter model on a graph, optionally with suppressed links (influential agents).
//!
//! At each step one link `(u, v)` is drawn uniformly from the original link set
//! and `u` copies the opinion of `v`. A suppressed link leaves the state
//! unchanged. The probability of consensus on 1 equals `π̃ · X(0)`, where `π̃` is
//! invariant for the (perturbed) voter update matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{voter_perturbation, voter_update_matrix, GraphSpec};
use crate::stationary::stationary_vector;
use crate::stochastic::{apply_perturbation, tv_subset_witness, ProbVector};
use crate::tagged::Tagged;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct VoterOptions {
    pub trials: usize,
    pub seed: u64,
    /// Times at which `π̃ · X(t)` is recorded.
    pub checkpoints: Vec<usize>,
    /// Per-trial step limit; defaults to `50 n³ |E|`.
    pub step_cap: Option<u64>,
}

impl Default for VoterOptions {
    fn default() -> Self {
        Self {
            trials: 10_000,
            seed: 0,
            checkpoints: Vec::new(),
            step_cap: None,
        }
    }
}

/// Mean of `π̃ · X(t)` over trials at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartingalePoint {
    pub t: usize,
    pub mean: Tagged<f64>,
    pub ci_halfwidth: Tagged<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoterOutcome {
    pub trials: usize,
    pub seed: u64,
    pub consensus_frequency: Tagged<f64>,
    pub ci_halfwidth: Tagged<f64>,
    pub mean_consensus_time: Tagged<f64>,
    pub martingale: Vec<MartingalePoint>,
}

struct Trial {
    consensus_on_one: bool,
    steps: u64,
    checkpoints: Vec<f64>,
}

fn check_initial(graph: &GraphSpec, x0: &[bool]) -> Result<()> {
    if x0.len() != graph.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            found: x0.len(),
        });
    }
    Ok(())
}

/// Invariant vector of the voter update matrix with `removed` suppressed.
pub fn voter_stationary(graph: &GraphSpec, removed: &[(usize, usize)]) -> Result<ProbVector> {
    let p = voter_update_matrix(graph)?;
    match voter_perturbation(graph, removed)? {
        (_, None) => Ok(ProbVector::uniform(graph.n())),
        (_, Some(spec)) => stationary_vector(&apply_perturbation(&p, &spec)?),
    }
}

/// `π̃ · X(0)`; the plain average of `X(0)` when nothing is suppressed.
pub fn voter_theoretical(graph: &GraphSpec, removed: &[(usize, usize)], x0: &[bool]) -> Result<f64> {
    check_initial(graph, x0)?;
    let pi = voter_stationary(graph, removed)?;
    Ok((0..x0.len()).filter(|&v| x0[v]).map(|v| pi[v]).sum())
}

/// Initial state whose consensus probability moves the most under the
/// suppression: the indicator of `{v : π̃_v > π_v}`. Returns it with the gap,
/// which equals the total variation distance.
pub fn tightness_witness(graph: &GraphSpec, removed: &[(usize, usize)]) -> Result<(Vec<bool>, f64)> {
    let pit = voter_stationary(graph, removed)?;
    let (set, gap) = tv_subset_witness(&pit, &ProbVector::uniform(graph.n()))?;
    let mut x0 = vec![false; graph.n()];
    for v in set {
        x0[v] = true;
    }
    Ok((x0, gap))
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    graph: &GraphSpec,
    live: &[bool],
    x0: &[bool],
    weights: &[f64],
    checkpoints: &[usize],
    seed: u64,
    trial: u64,
    cap: u64,
) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let edges = graph.edges();
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut ones = x.iter().filter(|&&b| b).count();
    let mut recorded = Vec::with_capacity(checkpoints.len());
    let weigh = |x: &[bool]| -> f64 { (0..n).filter(|&v| x[v]).map(|v| weights[v]).sum() };
    let mut t: u64 = 0;
    loop {
        while recorded.len() < checkpoints.len() && checkpoints[recorded.len()] as u64 == t {
            recorded.push(weigh(&x));
        }
        if ones == 0 || ones == n {
            if recorded.len() < checkpoints.len() {
                let value = weigh(&x);
                recorded.resize(checkpoints.len(), value);
            }
            return Ok(Trial {
                consensus_on_one: ones == n,
                steps: t,
                checkpoints: recorded,
            });
        }
        if t >= cap {
            return Err(Error::NoConvergence {
                iterations: cap as usize,
                residual: ones as f64 / n as f64,
            });
        }
        let k = rng.random_range(0..edges.len());
        if live[k] {
            let (u, v) = edges[k];
            if x[u] != x[v] {
                x[u] = x[v];
                if x[u] {
                    ones += 1;
                } else {
                    ones -= 1;
                }
            }
        }
        t += 1;
    }
}

fn halfwidth(sd: f64, trials: usize) -> f64 {
    Z95 * sd / (trials as f64).sqrt()
}

/// Monte-Carlo estimate of the probability of consensus on 1. Trial `i` draws
/// from the ChaCha stream `i` of `seed`, so results do not depend on scheduling.
pub fn simulate_voter(
    graph: &GraphSpec,
    removed: &[(usize, usize)],
    x0: &[bool],
    opts: &VoterOptions,
) -> Result<VoterOutcome> {
    check_initial(graph, x0)?;
    if opts.trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let (residual, _) = voter_perturbation(graph, removed)?;
    let live: Vec<bool> = graph
        .edges()
        .iter()
        .map(|&(u, v)| residual.contains(u, v))
        .collect();
    let mut checkpoints = opts.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let weights = if checkpoints.is_empty() {
        Vec::new()
    } else {
        voter_stationary(graph, removed)?.into_inner()
    };
    let n = graph.n() as u64;
    let cap = opts
        .step_cap
        .unwrap_or(50 * n * n * n * graph.num_edges() as u64);

    let results: Vec<Trial> = (0..opts.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(graph, &live, x0, &weights, &checkpoints, opts.seed, i, cap))
        .collect::<Result<_>>()?;

    let trials = opts.trials as f64;
    let hits = results.iter().filter(|r| r.consensus_on_one).count() as f64;
    let freq = hits / trials;
    let mean_time = results.iter().map(|r| r.steps as f64).sum::<f64>() / trials;
    let martingale = checkpoints
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let vals = results.iter().map(|r| r.checkpoints[k]);
            let mean = vals.clone().sum::<f64>() / trials;
            let var = vals.map(|v| (v - mean).powi(2)).sum::<f64>() / trials;
            MartingalePoint {
                t,
                mean: Tagged::monte_carlo(mean),
                ci_halfwidth: Tagged::monte_carlo(halfwidth(var.sqrt(), opts.trials)),
            }
        })
        .collect();
    Ok(VoterOutcome {
        trials: opts.trials,
        seed: opts.seed,
        consensus_frequency: Tagged::monte_carlo(freq),
        ci_halfwidth: Tagged::monte_carlo(halfwidth((freq * (1.0 - freq)).sqrt(), opts.trials)),
        mean_consensus_time: Tagged::monte_carlo(mean_time),
        martingale,
    })
}
