//! Numerical tolerances and solver limits.

/// Tolerances shared by constructors and solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of a row (or vector) sum from 1.
    pub construction: f64,
    /// Entries in `[-clamp, 0)` are treated as rounding noise and set to 0.
    pub clamp: f64,
    /// Maximum `‖πP − π‖₁` accepted from the stationary solver.
    pub solver_residual: f64,
    /// Entries above this count as positive when deriving supports.
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            construction: 1e-12,
            clamp: 1e-15,
            solver_residual: 1e-10,
            positivity: 1e-12,
        }
    }
}

/// Limits for the linear solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tolerances: Tolerances,
    /// Systems up to this many unknowns are solved by dense LU; larger ones iterate.
    pub direct_max_states: usize,
    /// Iteration cap for the power-iteration and Gauss-Seidel fallbacks.
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            direct_max_states: 2000,
            max_iterations: 1_000_000,
        }
    }
}
