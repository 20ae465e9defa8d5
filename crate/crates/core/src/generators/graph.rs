use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::stochastic::{PerturbationSpec, StochasticMatrix};

use super::GridSpec;

/// Directed graph on `0..n` with a sorted, duplicate-free link list.
///
/// A link `(u, v)` means `u` reads from `v`: in every matrix built from the graph
/// it contributes to row `u`, column `v`. Undirected graphs carry both directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSpec {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl GraphSpec {
    pub fn new(n: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("graph must have at least one node"));
        }
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n) {
            return Err(Error::domain(format!("link ({u}, {v}) out of range for n = {n}")));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self { n, edges })
    }

    /// Adds both directions of every pair.
    pub fn undirected(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let edges = pairs.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
        Self::new(n, edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain("cycle needs n ≥ 3"));
        }
        let pairs: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Self::undirected(n, &pairs)
    }

    pub fn path(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (1..n).map(|u| (u - 1, u)).collect();
        Self::undirected(n, &pairs)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let pairs: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Self::undirected(n, &pairs)
    }

    /// Center `0` joined to leaves `1..=leaves`.
    pub fn star(leaves: usize) -> Result<Self> {
        let pairs: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        Self::undirected(leaves + 1, &pairs)
    }

    /// Nearest-neighbor graph of the torus (no self-loops).
    pub fn torus(spec: GridSpec) -> Result<Self> {
        let edges = (0..spec.n())
            .flat_map(|u| spec.neighbors(u).into_iter().map(move |v| (u, v)))
            .collect();
        Self::new(spec.n(), edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u, v)).is_ok()
    }

    /// Heads of the links leaving `u`, sorted.
    pub fn successors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        let lo = self.edges.partition_point(|&(a, _)| a < u);
        let hi = self.edges.partition_point(|&(a, _)| a <= u);
        self.edges[lo..hi].iter().map(|&(_, v)| v)
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, _) in &self.edges {
            d[u] += 1;
        }
        d
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(_, v) in &self.edges {
            d[v] += 1;
        }
        d
    }

    pub fn has_self_loops(&self) -> bool {
        self.edges.iter().any(|&(u, v)| u == v)
    }

    pub fn is_undirected(&self) -> bool {
        self.edges.iter().all(|&(u, v)| self.contains(v, u))
    }

    pub fn is_strongly_connected(&self) -> bool {
        let reaches_all = |forward: bool| {
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.n];
            for &(u, v) in &self.edges {
                if forward {
                    adj[u].push(v);
                } else {
                    adj[v].push(u);
                }
            }
            let mut seen = vec![false; self.n];
            seen[0] = true;
            let mut stack = vec![0];
            while let Some(u) = stack.pop() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reaches_all(true) && reaches_all(false)
    }

    /// The graph with the links of `removed` deleted; every removed link must exist.
    pub fn without(&self, removed: &[(usize, usize)]) -> Result<Self> {
        let mut gone = removed.to_vec();
        gone.sort_unstable();
        gone.dedup();
        if let Some(&(u, v)) = gone.iter().find(|&&(u, v)| !self.contains(u, v)) {
            return Err(Error::domain(format!("link ({u}, {v}) is not in the graph")));
        }
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|e| gone.binary_search(e).is_err())
            .collect();
        Ok(Self { n: self.n, edges })
    }
}

/// Sorted tails of a link set.
pub(crate) fn tails(links: &[(usize, usize)]) -> Vec<usize> {
    let mut t: Vec<usize> = links.iter().map(|&(u, _)| u).collect();
    t.sort_unstable();
    t.dedup();
    t
}

/// Uniform over out-links; a node without out-links jumps uniformly to any node.
pub fn web_graph_to_q(graph: &GraphSpec) -> Result<StochasticMatrix> {
    let n = graph.n();
    let rows = (0..n)
        .map(|u| {
            let succ: Vec<usize> = graph.successors(u).collect();
            if succ.is_empty() {
                (0..n).map(|v| (v, 1.0 / n as f64)).collect()
            } else {
                let q = 1.0 / succ.len() as f64;
                succ.into_iter().map(|v| (v, q)).collect()
            }
        })
        .collect();
    StochasticMatrix::from_rows(rows)
}

fn lazy_row(graph: &GraphSpec, u: usize) -> Result<Vec<(usize, f64)>> {
    let succ: Vec<usize> = graph.successors(u).collect();
    if succ.is_empty() {
        return Err(Error::ZeroDegree(u));
    }
    let q = 0.5 / succ.len() as f64;
    let mut row: BTreeMap<usize, f64> = BTreeMap::from([(u, 0.5)]);
    for v in succ {
        *row.entry(v).or_insert(0.0) += q;
    }
    Ok(row.into_iter().collect())
}

/// `(I + Q)/2` with `Q_uv = 1/d_u` over the out-links of `u`.
pub fn lazy_walk(graph: &GraphSpec) -> Result<StochasticMatrix> {
    let rows = (0..graph.n())
        .map(|u| lazy_row(graph, u))
        .collect::<Result<Vec<_>>>()?;
    StochasticMatrix::from_rows(rows)
}

fn residual_graph(graph: &GraphSpec, removed: &[(usize, usize)]) -> Result<GraphSpec> {
    let residual = graph.without(removed)?;
    if !residual.is_strongly_connected() {
        return Err(Error::Disconnects(format!(
            "removing {} link(s) breaks strong connectivity",
            removed.len()
        )));
    }
    Ok(residual)
}

/// Removes the links `removed` from the lazy walk. The tails form `W` and get
/// the lazy rows of the residual graph. No perturbation when nothing is removed.
pub fn link_removal_perturbation(
    graph: &GraphSpec,
    removed: &[(usize, usize)],
) -> Result<(GraphSpec, Option<PerturbationSpec>)> {
    let residual = residual_graph(graph, removed)?;
    let set = tails(removed);
    if set.is_empty() {
        return Ok((residual, None));
    }
    let rows = set
        .iter()
        .map(|&u| Ok((u, lazy_row(&residual, u)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let spec = PerturbationSpec::new(graph.n(), set, rows)?;
    Ok((residual, Some(spec)))
}

fn voter_row(graph: &GraphSpec, u: usize, links: usize) -> Vec<(usize, f64)> {
    let q = 1.0 / links as f64;
    let succ: Vec<usize> = graph.successors(u).collect();
    let mut row = vec![(u, 1.0 - succ.len() as f64 * q)];
    row.extend(succ.into_iter().map(|v| (v, q)));
    row
}

fn check_voter_graph(graph: &GraphSpec) -> Result<()> {
    if graph.has_self_loops() {
        return Err(Error::domain("voter graph must not have self-loops"));
    }
    if !graph.is_undirected() {
        return Err(Error::domain("voter graph must be undirected"));
    }
    if graph.num_edges() == 0 || !graph.is_strongly_connected() {
        return Err(Error::domain("voter graph must be connected"));
    }
    Ok(())
}

/// `I + (1/|E|) Σ_{(u,v)∈E} E^{(u,v)}`, where `E^{(u,v)}` moves unit weight in
/// row `u` from the diagonal to column `v`.
pub fn voter_update_matrix(graph: &GraphSpec) -> Result<StochasticMatrix> {
    check_voter_graph(graph)?;
    let links = graph.num_edges();
    StochasticMatrix::from_rows((0..graph.n()).map(|u| voter_row(graph, u, links)).collect())
}

/// The voter matrix with `removed` suppressed: the denominator stays `|E|`, so a
/// removed link turns into a self-loop of the same weight.
pub fn voter_perturbation(
    graph: &GraphSpec,
    removed: &[(usize, usize)],
) -> Result<(GraphSpec, Option<PerturbationSpec>)> {
    check_voter_graph(graph)?;
    let residual = residual_graph(graph, removed)?;
    let set = tails(removed);
    if set.is_empty() {
        return Ok((residual, None));
    }
    let links = graph.num_edges();
    let rows = set
        .iter()
        .map(|&u| (u, voter_row(&residual, u, links)))
        .collect();
    let spec = PerturbationSpec::new(graph.n(), set, rows)?;
    Ok((residual, Some(spec)))
}
