//! Matrix families, graphs and perturbations used by the examples and applications.

mod graph;
pub mod random;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::stochastic::{PerturbationSpec, ProbVector, StochasticMatrix};

pub use graph::{
    lazy_walk, link_removal_perturbation, voter_perturbation, voter_update_matrix,
    web_graph_to_q, GraphSpec,
};

/// Shape of the torus `ℤ_m^d`. States are indexed little-endian:
/// `idx = Σ_i c_i m^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    d: usize,
    m: usize,
    n: usize,
}

impl GridSpec {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("torus dimension must be at least 1"));
        }
        if m < 2 {
            return Err(Error::domain("torus side must be at least 2"));
        }
        let n = u32::try_from(d)
            .ok()
            .and_then(|d| m.checked_pow(d))
            .ok_or_else(|| Error::domain(format!("torus {m}^{d} is too large")))?;
        Ok(Self { d, m, n })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        let mut c = Vec::with_capacity(self.d);
        for _ in 0..self.d {
            c.push(idx % self.m);
            idx /= self.m;
        }
        c
    }

    /// Index of a coordinate tuple; coordinates are reduced mod `m`.
    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .rev()
            .fold(0, |acc, &c| acc * self.m + c % self.m)
    }

    /// The `2d` torus neighbors of `idx`, with repeats when `m = 2`.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let c = self.coords(idx);
        let mut out = Vec::with_capacity(2 * self.d);
        for i in 0..self.d {
            for step in [1, self.m - 1] {
                let mut nb = c.clone();
                nb[i] = (c[i] + step) % self.m;
                out.push(self.index(&nb));
            }
        }
        out
    }
}

/// Every entry equal to `1/n`.
pub fn complete_uniform(n: usize) -> Result<StochasticMatrix> {
    if n < 2 {
        return Err(Error::domain("complete chain needs n ≥ 2"));
    }
    let q = 1.0 / n as f64;
    StochasticMatrix::from_rows((0..n).map(|_| (0..n).map(|v| (v, q)).collect()).collect())
}

/// Index of state `v ∈ {−m, …, m}` of the glued-cliques chain.
pub fn glued_index(m: usize, v: i64) -> usize {
    let idx = v + m as i64;
    assert!(
        (0..=2 * m as i64).contains(&idx),
        "state {v} outside −{m}..={m}"
    );
    idx as usize
}

/// Two `m`-cliques `{1..m}` and `{−m..−1}` joined through a hub `0`.
/// A non-hub state moves uniformly to the `m` other states of the same sign
/// or zero; the hub moves uniformly to any of the `2m` others.
pub fn glued_complete(m: usize) -> Result<StochasticMatrix> {
    if m == 0 {
        return Err(Error::domain("glued cliques need m ≥ 1"));
    }
    let mi = m as i64;
    let mut rows = Vec::with_capacity(2 * m + 1);
    for u in -mi..=mi {
        let row = if u == 0 {
            let q = 1.0 / (2 * m) as f64;
            (-mi..=mi)
                .filter(|&v| v != 0)
                .map(|v| (glued_index(m, v), q))
                .collect()
        } else {
            let q = 1.0 / m as f64;
            (-mi..=mi)
                .filter(|&v| v != u && u * v >= 0)
                .map(|v| (glued_index(m, v), q))
                .collect()
        };
        rows.push(row);
    }
    StochasticMatrix::from_rows(rows)
}

/// Hub row tilted toward the positive clique: `P̃_0v = (1/2 + α sgn v)/m`.
pub fn glued_complete_perturbation(m: usize, alpha: f64) -> Result<PerturbationSpec> {
    if m == 0 {
        return Err(Error::domain("glued cliques need m ≥ 1"));
    }
    if !(0.0..0.5).contains(&alpha) {
        return Err(Error::domain(format!("α = {alpha} not in [0, 1/2)")));
    }
    let mi = m as i64;
    let row: Vec<(usize, f64)> = (-mi..=mi)
        .filter(|&v| v != 0)
        .map(|v| {
            let sign = v.signum() as f64;
            (glued_index(m, v), (0.5 + alpha * sign) / m as f64)
        })
        .collect();
    let hub = glued_index(m, 0);
    PerturbationSpec::new(2 * m + 1, vec![hub], BTreeMap::from([(hub, row)]))
}

/// Rows of `set` replaced by a self-loop of weight `self_loop`, with the remaining
/// mass spread over the other states in proportion to `P`.
pub fn self_loop_perturbation(
    p: &StochasticMatrix,
    set: &[usize],
    self_loop: f64,
) -> Result<PerturbationSpec> {
    if !(0.0..=1.0).contains(&self_loop) {
        return Err(Error::domain(format!("self-loop weight {self_loop} not in [0,1]")));
    }
    let n = p.n();
    let mut rows = BTreeMap::new();
    for &w in set {
        if w >= n {
            return Err(Error::domain(format!("state {w} out of range")));
        }
        let off = 1.0 - p.get(w, w);
        let mut row = vec![(w, self_loop)];
        if self_loop < 1.0 {
            if off <= 0.0 {
                return Err(Error::domain(format!("state {w} is absorbing in P")));
            }
            let scale = (1.0 - self_loop) / off;
            row.extend(p.row(w).filter(|&(v, _)| v != w).map(|(v, q)| (v, q * scale)));
        }
        rows.insert(w, row);
    }
    PerturbationSpec::new(n, set.to_vec(), rows)
}

/// Lazy walk on the torus: stay with probability 1/2, otherwise move to one of
/// the `2d` neighbors. For `m = 2` the two neighbors along an axis coincide and
/// their weights are merged.
pub fn torus_lazy_walk(spec: GridSpec) -> Result<StochasticMatrix> {
    let q = 1.0 / (4 * spec.d) as f64;
    let rows = (0..spec.n)
        .map(|u| {
            let mut row: BTreeMap<usize, f64> = BTreeMap::from([(u, 0.5)]);
            for v in spec.neighbors(u) {
                *row.entry(v).or_insert(0.0) += q;
            }
            row.into_iter().collect()
        })
        .collect();
    StochasticMatrix::from_rows(rows)
}

/// States of the cube `∏_i [corner_i, corner_i + s − 1]` (mod `m`), sorted.
pub fn hypercube_window(spec: GridSpec, corner: &[usize], s: usize) -> Result<Vec<usize>> {
    if corner.len() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: corner.len(),
        });
    }
    if s == 0 || s >= spec.m {
        return Err(Error::domain(format!("window side {s} not in [1, {})", spec.m)));
    }
    let mut out = Vec::with_capacity(s.pow(spec.d as u32));
    let mut offset = vec![0usize; spec.d];
    loop {
        let c: Vec<usize> = corner.iter().zip(&offset).map(|(&a, &o)| a + o).collect();
        out.push(spec.index(&c));
        let mut i = 0;
        while i < spec.d {
            offset[i] += 1;
            if offset[i] < s {
                break;
            }
            offset[i] = 0;
            i += 1;
        }
        if i == spec.d {
            break;
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// `(1 − β) Q + β 𝟙 μ`.
pub fn pagerank_matrix(q: &StochasticMatrix, mu: &ProbVector, beta: f64) -> Result<StochasticMatrix> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("β = {beta} not in (0,1)")));
    }
    let n = q.n();
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mu.len(),
        });
    }
    let rows = (0..n)
        .map(|u| {
            let mut dense: Vec<f64> = mu.as_slice().iter().map(|&x| beta * x).collect();
            for (v, x) in q.row(u) {
                dense[v] += (1.0 - beta) * x;
            }
            dense
                .into_iter()
                .enumerate()
                .filter(|&(_, x)| x > 0.0)
                .collect()
        })
        .collect();
    StochasticMatrix::from_rows(rows)
}

/// Detaches `u`: it becomes absorbing, and each in-neighbor `v` drops its link
/// to `u` and renormalizes, `P̃_vv′ = P_vv′/(1 − P_vu)`.
/// `W = {u} ∪ {v : P_vu > 0}`.
pub fn node_detach_perturbation(p: &StochasticMatrix, u: usize) -> Result<PerturbationSpec> {
    let n = p.n();
    if u >= n {
        return Err(Error::domain(format!("state {u} out of range")));
    }
    if n < 2 {
        return Err(Error::Disconnects("nothing left after removing the node".into()));
    }
    let rest: Vec<usize> = (0..n).filter(|&v| v != u).collect();
    if !remains_strongly_connected(p, u) {
        return Err(Error::Disconnects(format!(
            "support graph without state {u} is not strongly connected"
        )));
    }
    let mut rows = BTreeMap::from([(u, vec![(u, 1.0)])]);
    let mut set = vec![u];
    for &v in &rest {
        let into_u = p.get(v, u);
        if into_u > 0.0 {
            let keep = 1.0 - into_u;
            if keep <= 0.0 {
                return Err(Error::Disconnects(format!("state {v} only leads to {u}")));
            }
            let row = p
                .row(v)
                .filter(|&(x, _)| x != u)
                .map(|(x, q)| (x, q / keep))
                .collect();
            rows.insert(v, row);
            set.push(v);
        }
    }
    PerturbationSpec::new(n, set, rows)
}

fn remains_strongly_connected(p: &StochasticMatrix, removed: usize) -> bool {
    let n = p.n();
    let Some(start) = (0..n).find(|&v| v != removed) else {
        return true;
    };
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        for &x in p.row_cols(v) {
            rev[x].push(v);
        }
    }
    let reach = |adj: &dyn Fn(usize) -> Vec<usize>| {
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for x in adj(v) {
                if x != removed && !seen[x] {
                    seen[x] = true;
                    stack.push(x);
                }
            }
        }
        (0..n).all(|v| v == removed || seen[v])
    };
    reach(&|v| p.row_cols(v).to_vec()) && reach(&|v| rev[v].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::{invariant_vectors_reducible, stationary_vector};
    use crate::stochastic::{apply_perturbation, tv_distance};

    #[test]
    fn complete_two_states() {
        let p = complete_uniform(2).unwrap();
        assert_eq!(p.to_dense(), vec![0.5; 4]);
        assert!(complete_uniform(1).is_err());
    }

    #[test]
    fn glued_rows_and_invariant() {
        for m in 1..=6 {
            let p = glued_complete(m).unwrap();
            assert_eq!(p.n(), 2 * m + 1);
            let pi = stationary_vector(&p).unwrap();
            let z = glued_index(m, 0);
            assert!((pi[z] - 1.0 / (m + 1) as f64).abs() < 1e-12);
            for v in 0..p.n() {
                if v != z {
                    assert!((pi[v] - 1.0 / (2 * m + 2) as f64).abs() < 1e-12);
                }
            }
        }
        let p = glued_complete(3).unwrap();
        assert_eq!(p.get(glued_index(3, 1), glued_index(3, -1)), 0.0);
        assert_eq!(p.get(glued_index(3, 2), glued_index(3, 2)), 0.0);
    }

    #[test]
    fn glued_perturbation_shift() {
        let (m, alpha) = (5, 0.3);
        let p = glued_complete(m).unwrap();
        let pt = apply_perturbation(&p, &glued_complete_perturbation(m, alpha).unwrap()).unwrap();
        let pi = stationary_vector(&p).unwrap();
        let pit = stationary_vector(&pt).unwrap();
        for v in -(m as i64)..=m as i64 {
            let i = glued_index(m, v);
            let shift = alpha * v.signum() as f64 / (m + 1) as f64;
            assert!((pit[i] - pi[i] - shift).abs() < 1e-10);
        }
        assert!((tv_distance(&pit, &pi).unwrap() - 0.25).abs() < 1e-10);

        let pt0 = apply_perturbation(&p, &glued_complete_perturbation(m, 0.0).unwrap()).unwrap();
        assert!(tv_distance(&stationary_vector(&pt0).unwrap(), &pi).unwrap() < 1e-12);
        assert!(glued_complete_perturbation(m, 0.5).is_err());
    }

    #[test]
    fn grid_indexing_roundtrip() {
        let g = GridSpec::new(3, 4).unwrap();
        assert_eq!(g.n(), 64);
        for idx in 0..g.n() {
            assert_eq!(g.index(&g.coords(idx)), idx);
        }
        assert!(GridSpec::new(0, 4).is_err());
        assert!(GridSpec::new(2, 1).is_err());
        assert!(GridSpec::new(64, 10).is_err());
    }

    #[test]
    fn torus_is_doubly_stochastic() {
        for (d, m) in [(1, 4), (2, 2), (2, 5), (3, 3)] {
            let p = torus_lazy_walk(GridSpec::new(d, m).unwrap()).unwrap();
            assert!(p.is_symmetric(1e-15));
            let pi = stationary_vector(&p).unwrap();
            let u = 1.0 / p.n() as f64;
            assert!(pi.as_slice().iter().all(|&x| (x - u).abs() < 1e-12));
        }
        // m = 2 merges the ± neighbors
        let p = torus_lazy_walk(GridSpec::new(1, 2).unwrap()).unwrap();
        assert_eq!(p.to_dense(), vec![0.5; 4]);
    }

    #[test]
    fn windows() {
        let g = GridSpec::new(3, 5).unwrap();
        assert_eq!(hypercube_window(g, &[1, 2, 3], 1).unwrap(), vec![g.index(&[1, 2, 3])]);
        assert_eq!(hypercube_window(g, &[4, 4, 4], 2).unwrap().len(), 8);
        assert!(hypercube_window(g, &[0, 0], 2).is_err());
        assert!(hypercube_window(g, &[0, 0, 0], 5).is_err());
        // wraps around
        let w = hypercube_window(g, &[4, 0, 0], 2).unwrap();
        assert!(w.contains(&g.index(&[0, 1, 1])));
    }

    #[test]
    fn pagerank_invariant_solves_teleport_equation() {
        let q = torus_lazy_walk(GridSpec::new(1, 7).unwrap()).unwrap();
        let mu = ProbVector::new(vec![0.4, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]).unwrap();
        let beta = 0.15;
        let p = pagerank_matrix(&q, &mu, beta).unwrap();
        let pi = stationary_vector(&p).unwrap();
        let piq = q.left_mul(pi.as_slice());
        for v in 0..7 {
            assert!((pi[v] - (1.0 - beta) * piq[v] - beta * mu[v]).abs() < 1e-10);
        }
        let pu = pagerank_matrix(&complete_uniform(4).unwrap(), &ProbVector::uniform(4), 0.3).unwrap();
        let pi = stationary_vector(&pu).unwrap();
        assert!(pi.as_slice().iter().all(|&x| (x - 0.25).abs() < 1e-12));
        assert!(pagerank_matrix(&q, &mu, 1.0).is_err());
    }

    #[test]
    fn self_loop_rows() {
        let p = complete_uniform(5).unwrap();
        let spec = self_loop_perturbation(&p, &[3], 0.7).unwrap();
        let row = &spec.rows()[&3];
        assert!(row.contains(&(3, 0.7)));
        for &(v, q) in row {
            if v != 3 {
                assert!((q - 0.3 / 4.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn detach_makes_two_recurrent_classes() {
        let p = torus_lazy_walk(GridSpec::new(2, 4).unwrap()).unwrap();
        let spec = node_detach_perturbation(&p, 5).unwrap();
        let mut expected: Vec<usize> = (0..16).filter(|&v| p.get(v, 5) > 0.0).collect();
        expected.sort_unstable();
        assert_eq!(spec.set(), expected.as_slice());
        let pt = apply_perturbation(&p, &spec).unwrap();
        assert_eq!(pt.get(5, 5), 1.0);
        assert_eq!(pt.closed_classes().len(), 2);
        assert_eq!(invariant_vectors_reducible(&pt).unwrap().len(), 2);
        let changed = p.differing_rows(&pt, 0.0).unwrap();
        assert!(changed.iter().all(|u| spec.set().contains(u)));
    }

    #[test]
    fn detach_cut_vertex_rejected() {
        // path 0 - 1 - 2: removing the middle disconnects.
        let p = StochasticMatrix::from_rows(vec![
            vec![(0, 0.5), (1, 0.5)],
            vec![(0, 0.25), (1, 0.5), (2, 0.25)],
            vec![(1, 0.5), (2, 0.5)],
        ])
        .unwrap();
        assert!(matches!(node_detach_perturbation(&p, 1), Err(Error::Disconnects(_))));
        assert!(node_detach_perturbation(&p, 0).is_ok());
    }
}
