//! Invariant probability vectors.

use nalgebra::{DMatrix, DVector};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::stochastic::{ProbVector, StochasticMatrix};

/// `‖πP − π‖₁`.
pub fn stationarity_residual(p: &StochasticMatrix, pi: &[f64]) -> f64 {
    p.left_mul(pi)
        .iter()
        .zip(pi)
        .map(|(a, b)| (a - b).abs())
        .sum()
}

/// Unique invariant probability vector of an irreducible matrix.
pub fn stationary_vector(p: &StochasticMatrix) -> Result<ProbVector> {
    stationary_vector_with(p, &SolverConfig::default())
}

pub fn stationary_vector_with(p: &StochasticMatrix, cfg: &SolverConfig) -> Result<ProbVector> {
    let comps = p.strongly_connected_components();
    if comps.len() != 1 {
        return Err(Error::ReducibleMatrix {
            components: comps.len(),
        });
    }
    let tol = cfg.tolerances.solver_residual;
    let start = if p.n() <= cfg.direct_max_states {
        let pi = direct_solve(p)?;
        if stationarity_residual(p, &pi) <= tol {
            return finish(pi, cfg);
        }
        // Ill-conditioned direct solve: polish it iteratively.
        pi
    } else {
        vec![1.0 / p.n() as f64; p.n()]
    };
    let pi = lazy_power_iteration(p, start, cfg)?;
    finish(pi, cfg)
}

fn finish(mut pi: Vec<f64>, cfg: &SolverConfig) -> Result<ProbVector> {
    for x in pi.iter_mut() {
        if *x < 0.0 && *x >= -cfg.tolerances.clamp.max(1e-14) {
            *x = 0.0;
        }
    }
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= s);
    ProbVector::new_with(pi, &cfg.tolerances)
}

/// Solves `(Pᵀ − I)π = 0` with the last equation replaced by `Σπ = 1`.
fn direct_solve(p: &StochasticMatrix) -> Result<Vec<f64>> {
    let n = p.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for u in 0..n {
        for (v, w) in p.row(u) {
            a[(v, u)] += w;
        }
        a[(u, u)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::domain("singular stationary system"))?;
    Ok(x.iter().copied().collect())
}

/// Power iteration on `(I + P)/2`, which shares `π` with `P` and is aperiodic.
fn lazy_power_iteration(
    p: &StochasticMatrix,
    mut mu: Vec<f64>,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let tol = cfg.tolerances.solver_residual;
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let step = p.left_mul(&mu);
        residual = step.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
        if residual <= tol * 0.5 {
            return Ok(mu);
        }
        for (m, s) in mu.iter_mut().zip(&step) {
            *m = 0.5 * (*m + s);
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iterations,
        residual,
    })
}

/// One invariant probability vector per recurrent class, each supported on its class.
///
/// These are the extreme points of the set of invariant probability vectors.
pub fn invariant_vectors_reducible(p: &StochasticMatrix) -> Result<Vec<ProbVector>> {
    let classes = p.closed_classes();
    classes
        .iter()
        .map(|class| {
            let sub = p.restrict_closed(class)?;
            let local = stationary_vector(&sub)?;
            let mut full = vec![0.0; p.n()];
            for (k, &s) in class.iter().enumerate() {
                full[s] = local[k];
            }
            ProbVector::new(full)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete_uniform, glued_complete, glued_index};

    #[test]
    fn complete_chain_is_uniform() {
        let pi = stationary_vector(&complete_uniform(4).unwrap()).unwrap();
        for &x in pi.as_slice() {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn glued_cliques_closed_form() {
        let m = 5;
        let pi = stationary_vector(&glued_complete(m).unwrap()).unwrap();
        assert!((pi[glued_index(m, 0)] - 1.0 / 6.0).abs() < 1e-12);
        for v in [-5i64, -1, 1, 5] {
            assert!((pi[glued_index(m, v)] - 1.0 / 12.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reducible_is_rejected() {
        let p = StochasticMatrix::from_rows(vec![vec![(0, 1.0)], vec![(1, 1.0)]]).unwrap();
        assert_eq!(
            stationary_vector(&p),
            Err(Error::ReducibleMatrix { components: 2 })
        );
    }

    #[test]
    fn periodic_chain_via_iteration() {
        // 3-cycle: period 3, forced onto the iterative path.
        let p = StochasticMatrix::from_rows(vec![
            vec![(1, 1.0)],
            vec![(2, 1.0)],
            vec![(0, 1.0)],
        ])
        .unwrap();
        let cfg = SolverConfig {
            direct_max_states: 0,
            ..SolverConfig::default()
        };
        let pi = stationary_vector_with(&p, &cfg).unwrap();
        for &x in pi.as_slice() {
            assert!((x - 1.0 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn iterative_matches_direct() {
        let p = glued_complete(3).unwrap();
        let direct = stationary_vector(&p).unwrap();
        let cfg = SolverConfig {
            direct_max_states: 0,
            ..SolverConfig::default()
        };
        let iter = stationary_vector_with(&p, &cfg).unwrap();
        for (a, b) in direct.as_slice().iter().zip(iter.as_slice()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let p = glued_complete(3).unwrap();
        let cfg = SolverConfig {
            direct_max_states: 0,
            max_iterations: 2,
            ..SolverConfig::default()
        };
        assert!(matches!(
            stationary_vector_with(&p, &cfg),
            Err(Error::NoConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn block_diagonal_two_cliques() {
        let half = |off: usize| -> Vec<(usize, f64)> { (off..off + 3).map(|c| (c, 1.0 / 3.0)).collect() };
        let p = StochasticMatrix::from_rows(vec![half(0), half(0), half(0), half(3), half(3), half(3)]).unwrap();
        let vs = invariant_vectors_reducible(&p).unwrap();
        assert_eq!(vs.len(), 2);
        assert!((vs[0].mass(&[0, 1, 2]) - 1.0).abs() < 1e-12);
        assert!((vs[1].mass(&[3, 4, 5]) - 1.0).abs() < 1e-12);
        assert!((vs[1][4] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn irreducible_gives_singleton() {
        let p = glued_complete(2).unwrap();
        let vs = invariant_vectors_reducible(&p).unwrap();
        assert_eq!(vs.len(), 1);
        let pi = stationary_vector(&p).unwrap();
        for (a, b) in vs[0].as_slice().iter().zip(pi.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
