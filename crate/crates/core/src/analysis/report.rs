use serde::Serialize;

use super::{
    boundaries, entrance_time, entrance_time_on_boundary, exit_distribution_with,
    exit_probability, hitting_times_with, lambda_w, mixing_time, ExitOptions, HittingTimes,
    MixingOptions,
};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::stationary::stationary_vector_with;
use crate::stochastic::{ProbVector, StochasticMatrix};
use crate::tagged::{Method, Tagged};

/// `|Σ_{w∈W} Σ_v π_w P_wv (τ^v_W + 1) − 1|`, which vanishes for the invariant `π`.
pub fn kac_residual(p: &StochasticMatrix, pi: &ProbVector, set: &[usize], ht: &HittingTimes) -> f64 {
    let total: f64 = set
        .iter()
        .map(|&w| {
            pi[w]
                * p.row(w)
                    .map(|(v, q)| q * (ht.tau[v] + 1.0))
                    .sum::<f64>()
        })
        .sum();
    (total - 1.0).abs()
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnalysisOptions {
    pub solver: SolverConfig,
    pub mixing: MixingOptions,
    pub exit: ExitOptions,
}

/// Everything the bound needs about `(P, P̃, W)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub n: usize,
    pub w: Vec<usize>,
    pub pi_tilde_support: Vec<usize>,
    pub t_mix: Tagged<usize>,
    pub tau_star: Tagged<f64>,
    pub gamma_tilde: Tagged<f64>,
    pub exit_horizon: usize,
    pub boundary_plus: Vec<usize>,
    pub boundary_minus: Vec<usize>,
    pub lambda_w: Tagged<f64>,
    pub lambda_plus_to_minus: Tagged<f64>,
    pub lambda_minus_to_plus: Tagged<f64>,
    pub pi_w: Tagged<f64>,
    pub kac_residual: Tagged<f64>,
}

pub fn analyze(
    p: &StochasticMatrix,
    pt: &StochasticMatrix,
    set: &[usize],
    pi_tilde_support: &[usize],
) -> Result<ChainReport> {
    analyze_with(p, pt, set, pi_tilde_support, &AnalysisOptions::default())
}

pub fn analyze_with(
    p: &StochasticMatrix,
    pt: &StochasticMatrix,
    set: &[usize],
    pi_tilde_support: &[usize],
    opts: &AnalysisOptions,
) -> Result<ChainReport> {
    let mut w = set.to_vec();
    w.sort_unstable();
    w.dedup();
    let outside: Vec<usize> = p
        .differing_rows(pt, 0.0)?
        .into_iter()
        .filter(|u| w.binary_search(u).is_err())
        .collect();
    if !outside.is_empty() {
        return Err(Error::SupportViolation(outside));
    }

    let pi = stationary_vector_with(p, &opts.solver)?;
    let mixing = mixing_time(p, &opts.mixing)?;
    let ht = hitting_times_with(p, &w, &opts.solver)?;
    let tau_star = entrance_time(&ht)?;
    debug_assert_eq!(Ok(tau_star), entrance_time_on_boundary(p, &ht));

    let dist = exit_distribution_with(pt, &w, pi_tilde_support, &opts.exit)?;
    let gamma = exit_probability(&dist, pi_tilde_support)?;
    let gamma_tilde = if dist.capped {
        Tagged::lower(gamma)
    } else {
        Tagged::exact(gamma)
    };

    let (boundary_plus, boundary_minus) = boundaries(p, &w);
    let lambda = lambda_w(p, &w);
    let kac = kac_residual(p, &pi, &w, &ht);

    Ok(ChainReport {
        n: p.n(),
        pi_w: Tagged::exact(pi.mass(&w)),
        w,
        pi_tilde_support: pi_tilde_support.to_vec(),
        t_mix: Tagged {
            value: mixing.steps,
            method: mixing.method,
        },
        tau_star: Tagged::exact(tau_star),
        gamma_tilde,
        exit_horizon: dist.horizon,
        boundary_plus,
        boundary_minus,
        lambda_w: Tagged::exact(lambda.value),
        lambda_plus_to_minus: Tagged::exact(lambda.plus_to_minus),
        lambda_minus_to_plus: Tagged::exact(lambda.minus_to_plus),
        kac_residual: Tagged {
            value: kac,
            method: Method::Exact,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::hitting_times;
    use crate::generators::{complete_uniform, self_loop_perturbation, torus_lazy_walk, GridSpec};
    use crate::stationary::stationary_vector;
    use crate::stochastic::apply_perturbation;

    #[test]
    fn kac_identity_on_whole_space() {
        let p = complete_uniform(5).unwrap();
        let pi = stationary_vector(&p).unwrap();
        let all: Vec<usize> = (0..5).collect();
        let ht = hitting_times(&p, &all).unwrap();
        assert!(kac_residual(&p, &pi, &all, &ht) < 1e-15);
    }

    #[test]
    fn kac_on_torus_reproduces_size() {
        let spec = GridSpec::new(2, 5).unwrap();
        let p = torus_lazy_walk(spec).unwrap();
        let pi = stationary_vector(&p).unwrap();
        let ht = hitting_times(&p, &[7]).unwrap();
        assert!(kac_residual(&p, &pi, &[7], &ht) < 1e-8);
        let tau = entrance_time(&ht).unwrap();
        assert!((1.0 + 0.5 * tau - 25.0).abs() < 1e-8);
    }

    #[test]
    fn complete_chain_report() {
        let n = 10;
        let p = complete_uniform(n).unwrap();
        let pt = apply_perturbation(&p, &self_loop_perturbation(&p, &[0], 0.5).unwrap()).unwrap();
        let r = analyze(&p, &pt, &[0], &[0]).unwrap();
        assert_eq!(r.t_mix, Tagged::exact(1));
        assert!((r.tau_star.value - 10.0).abs() < 1e-9);
        assert!((r.gamma_tilde.value - 0.5).abs() < 1e-12);
        assert!(r.kac_residual.value < 1e-8);
    }

    #[test]
    fn changed_row_outside_w_rejected() {
        let p = complete_uniform(4).unwrap();
        let pt = apply_perturbation(&p, &self_loop_perturbation(&p, &[1], 0.5).unwrap()).unwrap();
        assert_eq!(analyze(&p, &pt, &[0], &[0]), Err(Error::SupportViolation(vec![1])));
    }

    #[test]
    fn whole_space_w_has_empty_complement() {
        let p = complete_uniform(3).unwrap();
        assert_eq!(analyze(&p, &p, &[0, 1, 2], &[0]), Err(Error::EmptyComplement));
    }
}
