//! PageRank under manipulation of the out-links of a set of pages `W`.
//!
//! With `P = (1 − β)Q + β𝟙μ`, the three ingredients of the main bound admit
//! closed-form estimates: `γ̃ ≥ β(1 − μ(W))`, `t_mix ≤ ⌈−1/ln(1 − β)⌉` and
//! `τ* ≥ β/π(W) − 1`, which combine into `Ψ((1 + β)π(W)/(β²(1 − μ(W))))`.

use serde::Serialize;

use crate::analysis::pagerank_mixing_bound;
use crate::bounds::{evaluate, psi};
use crate::error::{Error, Result};
use crate::generators::pagerank_matrix;
use crate::stochastic::{ProbVector, StochasticMatrix};
use crate::tagged::Tagged;

/// Slack for comparing closed-form estimates with exact quantities.
const AUDIT_SLACK: f64 = 1e-9;

fn check_inputs(beta: f64, pi_w: f64, mu_w: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("β = {beta} not in (0,1)")));
    }
    if !(0.0..=1.0).contains(&pi_w) {
        return Err(Error::domain(format!("π(W) = {pi_w} not in [0,1]")));
    }
    if !(0.0..=1.0).contains(&mu_w) {
        return Err(Error::domain(format!("μ(W) = {mu_w} not in [0,1]")));
    }
    Ok(())
}

/// `Ψ((1 + β) π(W) / (β² (1 − μ(W))))`; 1 when `μ(W) = 1`.
pub fn pagerank_closed_bound(beta: f64, pi_w: f64, mu_w: f64) -> Result<f64> {
    check_inputs(beta, pi_w, mu_w)?;
    if mu_w >= 1.0 {
        return Ok(1.0);
    }
    psi((1.0 + beta) * pi_w / (beta * beta * (1.0 - mu_w)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IngredientBounds {
    pub gamma_lower: f64,
    pub t_mix_upper: usize,
    pub tau_star_lower: f64,
}

pub fn pagerank_ingredient_bounds(beta: f64, pi_w: f64, mu_w: f64) -> Result<IngredientBounds> {
    check_inputs(beta, pi_w, mu_w)?;
    if pi_w == 0.0 {
        return Err(Error::domain("π(W) must be positive"));
    }
    Ok(IngredientBounds {
        gamma_lower: beta * (1.0 - mu_w),
        t_mix_upper: pagerank_mixing_bound(beta)?,
        tau_star_lower: beta / pi_w - 1.0,
    })
}

/// An estimate next to the exact value it bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub estimate: Tagged<f64>,
    pub exact: Tagged<f64>,
    pub holds: bool,
}

impl Comparison {
    fn lower(estimate: f64, exact: Tagged<f64>) -> Self {
        Self {
            estimate: Tagged::lower(estimate),
            holds: exact.value >= estimate - AUDIT_SLACK,
            exact,
        }
    }

    fn upper(estimate: f64, exact: Tagged<f64>) -> Self {
        Self {
            estimate: Tagged::upper(estimate),
            holds: exact.value <= estimate + AUDIT_SLACK,
            exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PagerankAudit {
    pub beta: f64,
    pub w: Vec<usize>,
    pub pi_w: Tagged<f64>,
    pub mu_w: Tagged<f64>,
    pub gamma_tilde: Comparison,
    pub t_mix: Comparison,
    pub tau_star: Comparison,
    /// Closed-form bound against the exact total variation distance.
    pub closed_bound: Comparison,
    /// Main bound evaluated with the exact ingredients.
    pub theorem_bound: Tagged<f64>,
}

impl PagerankAudit {
    pub fn all_hold(&self) -> bool {
        [self.gamma_tilde, self.t_mix, self.tau_star, self.closed_bound]
            .iter()
            .all(|c| c.holds)
    }
}

/// Compares every closed-form estimate with the exact quantity for the PageRank
/// chains built from `q` and `q_tilde`, which must differ only on `set`.
pub fn audit_pagerank(
    q: &StochasticMatrix,
    q_tilde: &StochasticMatrix,
    mu: &ProbVector,
    beta: f64,
    set: &[usize],
) -> Result<PagerankAudit> {
    let p = pagerank_matrix(q, mu, beta)?;
    let pt = pagerank_matrix(q_tilde, mu, beta)?;
    let eval = evaluate(&p, &pt, set)?;
    let pi_w = eval.chain.pi_w.value;
    let mu_w = mu.mass(&eval.chain.w);
    let est = pagerank_ingredient_bounds(beta, pi_w, mu_w)?;
    let exact_tv = eval.bounds.exact_tv.expect("evaluation carries the exact distance");
    let t_mix = eval.chain.t_mix;
    Ok(PagerankAudit {
        beta,
        w: eval.chain.w.clone(),
        pi_w: eval.chain.pi_w,
        mu_w: Tagged::exact(mu_w),
        gamma_tilde: Comparison::lower(est.gamma_lower, eval.chain.gamma_tilde),
        t_mix: Comparison::upper(
            est.t_mix_upper as f64,
            Tagged {
                value: t_mix.value as f64,
                method: t_mix.method,
            },
        ),
        tau_star: Comparison::lower(est.tau_star_lower, eval.chain.tau_star),
        closed_bound: Comparison::upper(pagerank_closed_bound(beta, pi_w, mu_w)?, exact_tv),
        theorem_bound: eval.bounds.bound_thm1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{web_graph_to_q, GraphSpec};

    #[test]
    fn closed_bound_values() {
        assert_eq!(pagerank_closed_bound(0.15, 0.0, 0.3).unwrap(), 0.0);
        let arg: f64 = 1.15 * 0.001 / (0.0225 * 0.999);
        assert!((arg - 0.051_162).abs() < 1e-6);
        let b = pagerank_closed_bound(0.15, 0.001, 0.001).unwrap();
        assert!((b - arg * (2.0 - arg.ln())).abs() < 1e-15);
        assert!((b - 0.254_42).abs() < 1e-5);
        assert_eq!(pagerank_closed_bound(0.15, 0.01, 0.0).unwrap(), 1.0);
        assert_eq!(pagerank_closed_bound(0.15, 0.01, 1.0).unwrap(), 1.0);
        assert!(pagerank_closed_bound(1.0, 0.01, 0.0).is_err());
    }

    #[test]
    fn ingredient_values() {
        let b = pagerank_ingredient_bounds(0.15, 0.01, 0.2).unwrap();
        assert!((b.gamma_lower - 0.12).abs() < 1e-15);
        assert_eq!(b.t_mix_upper, 7);
        assert!((b.tau_star_lower - 14.0).abs() < 1e-12);
    }

    #[test]
    fn audit_on_small_web() {
        // 0 -> 1 -> 2 -> 0, 3 dangling; page 3 starts linking to 0.
        let g = GraphSpec::new(4, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let gt = GraphSpec::new(4, vec![(0, 1), (1, 2), (2, 0), (3, 0)]).unwrap();
        let q = web_graph_to_q(&g).unwrap();
        let qt = web_graph_to_q(&gt).unwrap();
        let a = audit_pagerank(&q, &qt, &ProbVector::uniform(4), 0.3, &[3]).unwrap();
        assert!(a.all_hold(), "{a:?}");
        assert!(a.closed_bound.exact.value > 0.0);
    }
}
