//! Closed-form checks on the reference families: the complete chain, the glued
//! cliques, node detachment, and the torus with point and cube perturbations.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::analysis::{
    analyze, entrance_time, hitting_times, kac_residual, lambda_w, AnalysisOptions,
};
use crate::bounds::{evaluate, evaluate_with_invariant, theorem1_bound, x_star};
use crate::error::{Error, Result};
use crate::generators::{
    complete_uniform, glued_complete, glued_complete_perturbation, hypercube_window,
    node_detach_perturbation, self_loop_perturbation, torus_lazy_walk, GridSpec,
};
use crate::stationary::{invariant_vectors_reducible, stationary_vector};
use crate::stochastic::{apply_perturbation, PerturbationSpec, StochasticMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub family: &'static str,
    pub case: String,
    pub name: &'static str,
    pub value: f64,
    pub reference: f64,
    pub passed: bool,
}

struct Recorder<'a> {
    family: &'static str,
    case: String,
    out: &'a mut Vec<Check>,
}

impl Recorder<'_> {
    fn push(&mut self, name: &'static str, value: f64, reference: f64, passed: bool) {
        self.out.push(Check {
            family: self.family,
            case: self.case.clone(),
            name,
            value,
            reference,
            passed,
        });
    }

    fn close(&mut self, name: &'static str, value: f64, reference: f64, tol: f64) {
        self.push(name, value, reference, (value - reference).abs() <= tol);
    }

    fn at_least(&mut self, name: &'static str, value: f64, reference: f64) {
        self.push(name, value, reference, value >= reference - 1e-12);
    }

    fn above(&mut self, name: &'static str, value: f64, reference: f64) {
        self.push(name, value, reference, value > reference);
    }
}

/// Complete chain of size `n`, one row turned into a self-loop of weight `1 − α`.
pub fn check_complete(n: usize, alpha: f64, out: &mut Vec<Check>) -> Result<()> {
    let mut r = Recorder {
        family: "complete",
        case: format!("n={n} alpha={alpha}"),
        out,
    };
    let p = complete_uniform(n)?;
    let pt = apply_perturbation(&p, &self_loop_perturbation(&p, &[0], 1.0 - alpha)?)?;
    let e = evaluate(&p, &pt, &[0])?;
    let nf = n as f64;
    let tv_formula = (1.0 - alpha - 1.0 / nf).abs() / (nf * alpha + 1.0);
    let tv = e.bounds.exact_tv.map(|t| t.value).unwrap_or(f64::NAN);
    r.close("total variation", tv, tv_formula, 1e-10);
    r.close("t_mix", e.chain.t_mix.value as f64, 1.0, 0.0);
    r.close("entrance time", e.chain.tau_star.value, nf, 1e-9 * nf);
    r.close("exit probability", e.chain.gamma_tilde.value, alpha, 1e-12);
    r.at_least("bound dominates", e.bounds.bound_thm1.value, tv);
    Ok(())
}

/// Glued cliques with the hub row tilted by `α`.
pub fn check_glued(m: usize, alpha: f64, out: &mut Vec<Check>) -> Result<()> {
    let mut r = Recorder {
        family: "glued",
        case: format!("m={m} alpha={alpha}"),
        out,
    };
    let p = glued_complete(m)?;
    let spec = glued_complete_perturbation(m, alpha)?;
    let pt = apply_perturbation(&p, &spec)?;
    let e = evaluate(&p, &pt, spec.set())?;
    let mf = m as f64;
    let tv = e.bounds.exact_tv.map(|t| t.value).unwrap_or(f64::NAN);
    r.close("total variation", tv, mf * alpha / (mf + 1.0), 1e-10);
    r.close("entrance time", e.chain.tau_star.value, mf, 1e-9 * mf);
    r.close("exit probability", e.chain.gamma_tilde.value, 1.0, 1e-12);
    r.at_least("bottleneck t_mix", e.chain.t_mix.value as f64, mf / 2.0);
    let arg = e.bounds.psi_arg.value;
    if arg > x_star() {
        r.close("trivial bound", e.bounds.bound_thm1.value, 1.0, 0.0);
    }
    r.at_least("bound dominates", e.bounds.bound_thm1.value, tv);
    Ok(())
}

/// Detaches state `u` from `p`. Against the invariant vector avoiding `u` the
/// bound is informative; against the point mass at `u` the exit probability is 0.
pub fn check_detach(p: &StochasticMatrix, u: usize, out: &mut Vec<Check>) -> Result<()> {
    let mut r = Recorder {
        family: "detach",
        case: format!("n={} u={u}", p.n()),
        out,
    };
    let spec = node_detach_perturbation(p, u)?;
    let pt = apply_perturbation(p, &spec)?;
    let classes = invariant_vectors_reducible(&pt)?;
    r.close("recurrent classes", classes.len() as f64, 2.0, 0.0);
    let opts = AnalysisOptions::default();
    let (point, rest): (Vec<_>, Vec<_>) = classes.into_iter().partition(|v| v[u] > 0.5);
    let rest = rest
        .into_iter()
        .next()
        .ok_or_else(|| Error::domain("no invariant vector avoiding the detached state"))?;
    let e = evaluate_with_invariant(p, &pt, spec.set(), rest, &opts)?;
    let tv = e.bounds.exact_tv.map(|t| t.value).unwrap_or(f64::NAN);
    r.above("exit probability", e.chain.gamma_tilde.value, 0.0);
    r.at_least("bound dominates", e.bounds.bound_thm1.value, tv);
    if let Some(delta) = point.into_iter().next() {
        let g = analyze(p, &pt, spec.set(), &delta.support(1e-12))?;
        r.close("exit probability at the point mass", g.gamma_tilde.value, 0.0, 0.0);
    }
    Ok(())
}

/// Torus with a single perturbed state whose row gets self-loop `self_loop`.
pub fn check_torus_point(d: usize, m: usize, self_loop: f64, out: &mut Vec<Check>) -> Result<()> {
    let mut r = Recorder {
        family: "torus",
        case: format!("d={d} m={m}"),
        out,
    };
    let spec = GridSpec::new(d, m)?;
    let p = torus_lazy_walk(spec)?;
    let w = 0;
    let pt = apply_perturbation(&p, &self_loop_perturbation(&p, &[w], self_loop)?)?;
    let e = evaluate(&p, &pt, &[w])?;
    let n = spec.n() as f64;
    r.close("entrance time", e.chain.tau_star.value, 2.0 * (n - 1.0), 1e-8);
    r.close("return-time residual", e.chain.kac_residual.value, 0.0, 1e-8);
    r.close("exit probability", e.chain.gamma_tilde.value, 1.0 - pt.get(w, w), 1e-12);
    let tv = e.bounds.exact_tv.map(|t| t.value).unwrap_or(f64::NAN);
    r.at_least("bound dominates", e.bounds.bound_thm1.value, tv);
    Ok(())
}

/// Replacement rows on `set` for the cube check: self-loop 0.1 and the rest
/// spread evenly over the torus neighbors. Positive entries are at least 0.1.
pub fn cube_perturbation(spec: GridSpec, set: &[usize]) -> Result<PerturbationSpec> {
    let share = 0.9 / (2 * spec.d()) as f64;
    let rows = set
        .iter()
        .map(|&w| {
            let mut row: BTreeMap<usize, f64> = BTreeMap::from([(w, 0.1)]);
            for v in spec.neighbors(w) {
                *row.entry(v).or_insert(0.0) += share;
            }
            (w, row.into_iter().collect())
        })
        .collect();
    PerturbationSpec::new(spec.n(), set.to_vec(), rows)
}

/// Torus with a perturbation supported on an `s^d` cube.
pub fn check_torus_cube(d: usize, m: usize, s: usize, out: &mut Vec<Check>) -> Result<()> {
    let mut r = Recorder {
        family: "torus-cube",
        case: format!("d={d} m={m} s={s}"),
        out,
    };
    let spec = GridSpec::new(d, m)?;
    let p = torus_lazy_walk(spec)?;
    let set = hypercube_window(spec, &vec![0; d], s)?;
    let pert = cube_perturbation(spec, &set)?;
    let pt = apply_perturbation(&p, &pert)?;
    let pi_tilde = stationary_vector(&pt)?;
    let support: Vec<usize> = set.iter().copied().filter(|&v| pi_tilde[v] > 1e-12).collect();
    let chain = analyze(&p, &pt, &set, &support)?;
    let n = spec.n() as f64;
    let size = set.len() as f64;
    let lambda = lambda_w(&p, &set).value;
    let df = d as f64;
    r.above("boundary connectivity", lambda, (4.0 * df).powf(-df * (s as f64 + 1.0)));
    r.above("entrance-time lower bound", chain.tau_star.value, lambda * (n / size - 1.0));
    let delta = pert
        .rows()
        .values()
        .flat_map(|row| row.iter().map(|&(_, q)| q))
        .fold(f64::INFINITY, f64::min);
    r.above(
        "exit-probability lower bound",
        chain.gamma_tilde.value,
        delta.powf(size) / size,
    );
    Ok(())
}

/// Runs every family on its standard parameter grid.
pub fn verify_examples() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in [5, 10, 50, 200] {
        for alpha in [0.1, 0.5, 0.9] {
            check_complete(n, alpha, &mut out)?;
        }
    }
    for m in 2..=8 {
        for alpha in [0.1, 0.3, 0.45] {
            check_glued(m, alpha, &mut out)?;
        }
    }
    let torus = torus_lazy_walk(GridSpec::new(2, 4)?)?;
    check_detach(&torus, 5, &mut out)?;
    let glued = glued_complete(3)?;
    check_detach(&glued, 1, &mut out)?;
    for (d, m) in [(1, 8), (2, 5), (3, 4)] {
        check_torus_point(d, m, 0.25, &mut out)?;
    }
    for s in [1, 2] {
        check_torus_cube(3, 5, s, &mut out)?;
    }
    Ok(out)
}

/// `Ψ(t_mix/(γ̃ τ*))` for the torus with one perturbed state, which should
/// shrink with `n` when `d ≥ 3`.
pub fn torus_point_bound(d: usize, m: usize, self_loop: f64) -> Result<f64> {
    let spec = GridSpec::new(d, m)?;
    let p = torus_lazy_walk(spec)?;
    let pt = apply_perturbation(&p, &self_loop_perturbation(&p, &[0], self_loop)?)?;
    let chain = analyze(&p, &pt, &[0], &[0])?;
    theorem1_bound(chain.t_mix.value, chain.gamma_tilde.value, chain.tau_star.value)
}

/// Entrance time and return-time residual of a single state on the torus, for
/// callers that only need the hitting-time part.
pub fn torus_entrance(d: usize, m: usize) -> Result<(f64, f64)> {
    let spec = GridSpec::new(d, m)?;
    let p = torus_lazy_walk(spec)?;
    let pi = stationary_vector(&p)?;
    let ht = hitting_times(&p, &[0])?;
    Ok((entrance_time(&ht)?, kac_residual(&p, &pi, &[0], &ht)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_family_passes() {
        let mut out = Vec::new();
        check_complete(10, 0.5, &mut out).unwrap();
        check_complete(5, 0.9, &mut out).unwrap();
        assert!(out.iter().all(|c| c.passed), "{out:#?}");
    }

    #[test]
    fn detach_on_torus() {
        let mut out = Vec::new();
        let p = torus_lazy_walk(GridSpec::new(2, 4).unwrap()).unwrap();
        check_detach(&p, 5, &mut out).unwrap();
        assert!(out.iter().all(|c| c.passed), "{out:#?}");
        assert_eq!(out.len(), 4);
    }

    #[test]
    fn torus_entrance_matches_size() {
        let (tau, kac) = torus_entrance(2, 5).unwrap();
        assert!((tau - 48.0).abs() < 1e-8);
        assert!(kac < 1e-8);
    }
}
