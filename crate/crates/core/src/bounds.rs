//! The bound-shaping function `Ψ` and the perturbation bounds built on it.
//!
//! `Ψ(x) = x ln(e²/x)` up to the kink `x*`, where it reaches 1, and `1` beyond.

use std::sync::OnceLock;

use serde::Serialize;

use crate::analysis::{analyze_with, AnalysisOptions, ChainReport};
use crate::error::{Error, Result};
use crate::stationary::stationary_vector_with;
use crate::stochastic::{mask, tv_distance, ProbVector, StochasticMatrix};
use crate::tagged::Tagged;

/// Printed five-digit value of the kink, used only as a cross-check.
pub const X_STAR_PRINTED: f64 = 0.31784;

/// Slack allowed when checking a bound against an exact value.
pub const DOMINANCE_SLACK: f64 = 1e-12;

fn shape(x: f64) -> f64 {
    x * (2.0 - x.ln())
}

fn bisect_x_star() -> f64 {
    // shape is increasing on (0, e) with shape(0+) = 0 and shape(0.5) > 1.
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if shape(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    assert!(
        (x - X_STAR_PRINTED).abs() <= 1e-5,
        "kink {x} disagrees with {X_STAR_PRINTED}"
    );
    x
}

/// Smallest positive solution of `x ln(e²/x) = 1`.
pub fn x_star() -> f64 {
    static X_STAR: OnceLock<f64> = OnceLock::new();
    *X_STAR.get_or_init(bisect_x_star)
}

pub fn psi(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("Ψ is defined on [0, ∞), got {x}")));
    }
    if x <= 1e-300 {
        return Ok(0.0);
    }
    if x > x_star() {
        return Ok(1.0);
    }
    Ok(shape(x).min(1.0))
}

/// `Ψ(t_mix · π̃(W))`.
pub fn lemma1_bound(t_mix: usize, pi_tilde_w: f64) -> Result<f64> {
    if t_mix < 1 {
        return Err(Error::domain("t_mix must be at least 1"));
    }
    if !(0.0..=1.0 + 1e-12).contains(&pi_tilde_w) {
        return Err(Error::domain(format!("π̃(W) = {pi_tilde_w} not in [0,1]")));
    }
    psi(t_mix as f64 * pi_tilde_w.min(1.0))
}

/// `1/(γ̃ τ*)`, an upper bound on `π̃(W)`; infinite when `γ̃ = 0`.
pub fn lemma2_bound(gamma: f64, tau_star: f64) -> Result<f64> {
    if tau_star.is_nan() || tau_star <= 0.0 {
        return Err(Error::domain(format!("τ* = {tau_star} must be positive")));
    }
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::domain(format!("γ̃ = {gamma} must be nonnegative")));
    }
    if gamma == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (gamma * tau_star))
}

/// Argument `t_mix/(γ̃ τ*)` of the main bound.
pub fn theorem1_argument(t_mix: usize, gamma: f64, tau_star: f64) -> Result<f64> {
    if t_mix < 1 {
        return Err(Error::domain("t_mix must be at least 1"));
    }
    Ok(t_mix as f64 * lemma2_bound(gamma, tau_star)?)
}

/// `Ψ(t_mix/(γ̃ τ*))`; exactly 1 (vacuous) when `γ̃ = 0`.
pub fn theorem1_bound(t_mix: usize, gamma: f64, tau_star: f64) -> Result<f64> {
    let arg = theorem1_argument(t_mix, gamma, tau_star)?;
    if arg.is_infinite() {
        return Ok(1.0);
    }
    psi(arg)
}

/// `λ (1/π(W) − 1)`, a lower bound on the entrance time.
pub fn prop1_tau_lower(lambda: f64, pi_w: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("λ_W = {lambda} not in [0,1]")));
    }
    if !(pi_w > 0.0 && pi_w <= 1.0 + 1e-12) {
        return Err(Error::domain(format!("π(W) = {pi_w} not in (0,1]")));
    }
    Ok(lambda * (1.0 / pi_w.min(1.0) - 1.0))
}

/// Invariant vectors of `P` and `P̃` for the exact comparison.
#[derive(Debug, Clone, Copy)]
pub struct ExactInputs<'a> {
    pub pi: &'a ProbVector,
    pub pi_tilde: &'a ProbVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub psi_arg: Tagged<f64>,
    pub bound_thm1: Tagged<f64>,
    pub pi_tilde_w_bound_lemma2: Tagged<f64>,
    pub tau_star_lower_prop1: Tagged<f64>,
    pub bound_lemma1: Option<Tagged<f64>>,
    pub pi_tilde_w: Option<Tagged<f64>>,
    pub exact_tv: Option<Tagged<f64>>,
    /// `γ̃ = 0`: the main bound carries no information.
    pub vacuous: bool,
}

/// Assembles every bound from a chain report; with exact inputs, also checks
/// each bound against the exact quantities and fails on any violation.
pub fn compose_report(chain: &ChainReport, exact: Option<ExactInputs<'_>>) -> Result<BoundReport> {
    let t_mix = chain.t_mix.value;
    let gamma = chain.gamma_tilde.value;
    let tau = chain.tau_star.value;
    let arg = theorem1_argument(t_mix, gamma, tau)?;
    let thm1 = theorem1_bound(t_mix, gamma, tau)?;
    let lemma2 = lemma2_bound(gamma, tau)?;
    let prop1 = prop1_tau_lower(chain.lambda_w.value, chain.pi_w.value)?;
    if prop1 > tau + 1e-9 * tau.max(1.0) {
        return Err(Error::BoundViolated {
            name: "entrance-time lower bound",
            bound: prop1,
            exact: tau,
        });
    }

    let mut report = BoundReport {
        psi_arg: Tagged::exact(arg),
        bound_thm1: Tagged::upper(thm1),
        pi_tilde_w_bound_lemma2: Tagged::upper(lemma2),
        tau_star_lower_prop1: Tagged::lower(prop1),
        bound_lemma1: None,
        pi_tilde_w: None,
        exact_tv: None,
        vacuous: gamma == 0.0,
    };

    if let Some(ex) = exact {
        let tv = tv_distance(ex.pi_tilde, ex.pi)?;
        let pt_w = ex.pi_tilde.mass(&chain.w);
        let l1 = lemma1_bound(t_mix, pt_w)?;
        let checks = [
            ("main bound", thm1, tv),
            ("coupling bound", l1, tv),
            ("π̃(W) bound", lemma2, pt_w),
        ];
        for (name, bound, exact) in checks {
            if bound < exact - DOMINANCE_SLACK {
                return Err(Error::BoundViolated { name, bound, exact });
            }
        }
        report.bound_lemma1 = Some(Tagged::upper(l1));
        report.pi_tilde_w = Some(Tagged::exact(pt_w));
        report.exact_tv = Some(Tagged::exact(tv));
    }
    Ok(report)
}

/// Chain report, bound report and both invariant vectors for one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub chain: ChainReport,
    pub bounds: BoundReport,
    pub pi: ProbVector,
    pub pi_tilde: ProbVector,
}

/// Full evaluation when `P̃` has a unique invariant vector.
pub fn evaluate(p: &StochasticMatrix, pt: &StochasticMatrix, set: &[usize]) -> Result<Evaluation> {
    let opts = AnalysisOptions::default();
    let pi_tilde = stationary_vector_with(pt, &opts.solver)?;
    evaluate_with_invariant(p, pt, set, pi_tilde, &opts)
}

/// Full evaluation against a chosen invariant vector of `P̃`, which may be one
/// of several when `P̃` is reducible.
pub fn evaluate_with_invariant(
    p: &StochasticMatrix,
    pt: &StochasticMatrix,
    set: &[usize],
    pi_tilde: ProbVector,
    opts: &AnalysisOptions,
) -> Result<Evaluation> {
    let residual = crate::stationary::stationarity_residual(pt, pi_tilde.as_slice());
    if residual > 1e-8 {
        return Err(Error::domain(format!(
            "given vector is not invariant for the perturbed matrix (residual {residual:e})"
        )));
    }
    let in_w = mask(p.n(), set);
    let support: Vec<usize> = pi_tilde
        .support(opts.solver.tolerances.positivity)
        .into_iter()
        .filter(|&v| in_w[v])
        .collect();
    if support.is_empty() {
        return Err(Error::domain("perturbed invariant vector puts no mass on W"));
    }
    let chain = analyze_with(p, pt, set, &support, opts)?;
    let pi = stationary_vector_with(p, &opts.solver)?;
    let bounds = compose_report(
        &chain,
        Some(ExactInputs {
            pi: &pi,
            pi_tilde: &pi_tilde,
        }),
    )?;
    Ok(Evaluation {
        chain,
        bounds,
        pi,
        pi_tilde,
    })
}
