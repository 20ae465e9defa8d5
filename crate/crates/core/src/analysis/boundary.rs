//! External boundaries of a set and the connectivity constant `λ_W`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::stochastic::{mask, StochasticMatrix};

/// `(∂⁺_W, ∂⁻_W)`: states outside `W` entered from `W` in one step, and states
/// outside `W` that enter `W` in one step.
pub fn boundaries(p: &StochasticMatrix, set: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = p.n();
    let in_w = mask(n, set);
    let mut plus = vec![false; n];
    let mut minus = vec![false; n];
    for u in 0..n {
        for &v in p.row_cols(u) {
            if in_w[u] && !in_w[v] {
                plus[v] = true;
            }
            if !in_w[u] && in_w[v] {
                minus[u] = true;
            }
        }
    }
    let collect = |m: Vec<bool>| (0..n).filter(|&v| m[v]).collect::<Vec<_>>();
    (collect(plus), collect(minus))
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    cost: f64,
    state: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| self.state.cmp(&other.state))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Largest path probability `max_ξ Π P_{ξ_{i−1} ξ_i}` from `source` to every
/// state, over paths that stay in `V∖W`. Zero where no such path exists.
///
/// Dijkstra on edge costs `−ln P_uv`; all costs are nonnegative, so optimal
/// paths never revisit a state.
pub fn max_product_paths(p: &StochasticMatrix, set: &[usize], source: usize) -> Vec<f64> {
    let n = p.n();
    let in_w = mask(n, set);
    let mut cost = vec![f64::INFINITY; n];
    if in_w[source] {
        return vec![0.0; n];
    }
    let mut heap = BinaryHeap::new();
    cost[source] = 0.0;
    heap.push(Frontier {
        cost: 0.0,
        state: source,
    });
    while let Some(Frontier { cost: c, state: u }) = heap.pop() {
        if c > cost[u] {
            continue;
        }
        for (v, q) in p.row(u) {
            if in_w[v] {
                continue;
            }
            let next = c - q.ln();
            if next < cost[v] {
                cost[v] = next;
                heap.push(Frontier { cost: next, state: v });
            }
        }
    }
    cost.into_iter().map(|c| (-c).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaW {
    /// Minimum of the two orientations below.
    pub value: f64,
    /// Pairs `u ∈ ∂⁺_W`, `v ∈ ∂⁻_W`.
    pub plus_to_minus: f64,
    /// Pairs `u ∈ ∂⁻_W`, `v ∈ ∂⁺_W`.
    pub minus_to_plus: f64,
}

fn min_over_pairs(p: &StochasticMatrix, set: &[usize], from: &[usize], to: &[usize]) -> f64 {
    let mut worst: f64 = 1.0;
    for &u in from {
        if !to.iter().any(|&v| v != u) {
            continue;
        }
        let best = max_product_paths(p, set, u);
        for &v in to {
            if v != u {
                worst = worst.min(best[v]);
            }
        }
    }
    worst
}

/// `λ_W = min_{u≠v} max_{ξ ∈ Γ_{u,v}} P_ξ` with both boundary orientations;
/// the minimum over no pairs is 1 and the maximum over no paths is 0.
pub fn lambda_w(p: &StochasticMatrix, set: &[usize]) -> LambdaW {
    let (plus, minus) = boundaries(p, set);
    let plus_to_minus = min_over_pairs(p, set, &plus, &minus);
    let minus_to_plus = min_over_pairs(p, set, &minus, &plus);
    LambdaW {
        value: plus_to_minus.min(minus_to_plus),
        plus_to_minus,
        minus_to_plus,
    }
}
