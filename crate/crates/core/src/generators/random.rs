//! Random instances for property tests and audits. Callers own the RNG, so a
//! seeded generator reproduces every draw.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;

use super::GraphSpec;
use crate::error::{Error, Result};
use crate::stochastic::{PerturbationSpec, ProbVector, StochasticMatrix};

/// Plain redraws before `random_irreducible` forces a spanning cycle.
const REJECTION_ATTEMPTS: usize = 32;

/// Flat Dirichlet weights on `support` (normalized unit exponentials).
fn dirichlet_row<R: Rng + ?Sized>(rng: &mut R, support: &[usize]) -> Vec<(usize, f64)> {
    let w: Vec<f64> = support
        .iter()
        .map(|_| rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE))
        .collect();
    let total: f64 = w.iter().sum();
    support.iter().copied().zip(w.into_iter().map(|x| x / total)).collect()
}

/// A row over `0..n` whose support includes each state with probability
/// `density`, and never empty.
pub fn random_row<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> Vec<(usize, f64)> {
    let mut support: Vec<usize> = (0..n).filter(|_| rng.random_bool(density)).collect();
    if support.is_empty() {
        support.push(rng.random_range(0..n));
    }
    dirichlet_row(rng, &support)
}

/// Irreducible, aperiodic random matrix: Erdős–Rényi support of the given
/// density plus a self-loop on every state, Dirichlet weights, redrawn until
/// irreducible. Sparse draws that keep failing get a random cycle through all
/// states added to the support.
pub fn random_irreducible<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    density: f64,
) -> Result<StochasticMatrix> {
    if n == 0 || !(0.0..=1.0).contains(&density) {
        return Err(Error::domain("need n ≥ 1 and density in [0,1]"));
    }
    for _ in 0..REJECTION_ATTEMPTS {
        let rows = (0..n)
            .map(|u| {
                let support: Vec<usize> = (0..n)
                    .filter(|&v| v == u || rng.random_bool(density))
                    .collect();
                dirichlet_row(rng, &support)
            })
            .collect();
        let p = StochasticMatrix::from_rows(rows)?;
        if p.is_irreducible() {
            return Ok(p);
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut next = vec![0; n];
    for k in 0..n {
        next[order[k]] = order[(k + 1) % n];
    }
    let rows = (0..n)
        .map(|u| {
            let support: Vec<usize> = (0..n)
                .filter(|&v| v == u || v == next[u] || rng.random_bool(density))
                .collect();
            dirichlet_row(rng, &support)
        })
        .collect();
    StochasticMatrix::from_rows(rows)
}

/// A nonempty random subset of `0..n` with at most `max_size` states, sorted.
pub fn random_subset<R: Rng + ?Sized>(rng: &mut R, n: usize, max_size: usize) -> Vec<usize> {
    let k = rng.random_range(1..=max_size.clamp(1, n));
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    all.truncate(k);
    all.sort_unstable();
    all
}

/// Fresh random rows for every state of `set`.
pub fn random_replacement<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    set: &[usize],
    density: f64,
) -> Result<PerturbationSpec> {
    let rows: BTreeMap<usize, Vec<(usize, f64)>> =
        set.iter().map(|&w| (w, random_row(rng, n, density))).collect();
    PerturbationSpec::new(n, set.to_vec(), rows)
}

/// A probability vector where each entry is zero with probability `zero_prob`.
pub fn random_prob_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, zero_prob: f64) -> ProbVector {
    let mut support: Vec<usize> = (0..n).filter(|_| !rng.random_bool(zero_prob)).collect();
    if support.is_empty() {
        support.push(rng.random_range(0..n));
    }
    let mut x = vec![0.0; n];
    for (v, q) in dirichlet_row(rng, &support) {
        x[v] = q;
    }
    ProbVector::new(x).expect("Dirichlet draw is a probability vector")
}

/// Directed random web graph: each node is dangling with probability
/// `dangling`, otherwise links to each other node with probability `density`.
pub fn random_web_graph<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    density: f64,
    dangling: f64,
) -> Result<GraphSpec> {
    let mut edges = Vec::new();
    for u in 0..n {
        if rng.random_bool(dangling) {
            continue;
        }
        edges.extend((0..n).filter(|&v| v != u && rng.random_bool(density)).map(|v| (u, v)));
    }
    GraphSpec::new(n, edges)
}

/// A web graph before and after the pages in `w` rewire their out-links, with
/// a teleportation vector `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct WebManipulation {
    pub original: GraphSpec,
    pub manipulated: GraphSpec,
    pub mu: ProbVector,
    pub w: Vec<usize>,
}

/// Random web graph on `n` pages in which up to `max_w` pages drop their links
/// and either point at one to three random pages or go dangling.
pub fn random_web_manipulation<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_w: usize,
) -> Result<WebManipulation> {
    if n < 2 {
        return Err(Error::domain("web graph needs n ≥ 2"));
    }
    let density = rng.random_range(0.02..0.3);
    let original = random_web_graph(rng, n, density, 0.15)?;
    let w = random_subset(rng, n, max_w);
    let in_w = crate::stochastic::mask(n, &w);
    let mut edges: Vec<(usize, usize)> = original
        .edges()
        .iter()
        .copied()
        .filter(|&(u, _)| !in_w[u])
        .collect();
    for &u in &w {
        if rng.random_bool(0.2) {
            continue;
        }
        let k = rng.random_range(1..=3usize.min(n - 1));
        let mut targets: Vec<usize> = (0..n).filter(|&v| v != u).collect();
        targets.shuffle(rng);
        edges.extend(targets[..k].iter().map(|&v| (u, v)));
    }
    let manipulated = GraphSpec::new(n, edges)?;
    let mu = if rng.random_bool(0.5) {
        ProbVector::uniform(n)
    } else {
        random_prob_vector(rng, n, 0.0)
    };
    Ok(WebManipulation {
        original,
        manipulated,
        mu,
        w,
    })
}

/// Connected undirected graph: a random spanning tree plus each remaining pair
/// with probability `density`.
pub fn random_connected_graph<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    density: f64,
) -> Result<GraphSpec> {
    if n < 2 {
        return Err(Error::domain("connected graph needs n ≥ 2"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = (1..n)
        .map(|i| (order[rng.random_range(0..i)], order[i]))
        .collect();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(density) {
                pairs.push((u, v));
            }
        }
    }
    GraphSpec::undirected(n, &pairs)
}

/// Up to `count` links whose joint removal keeps the graph strongly connected,
/// chosen greedily in random order.
pub fn removable_links<R: Rng + ?Sized>(
    rng: &mut R,
    graph: &GraphSpec,
    count: usize,
) -> Vec<(usize, usize)> {
    let mut candidates = graph.edges().to_vec();
    candidates.shuffle(rng);
    let mut chosen = Vec::new();
    for e in candidates {
        if chosen.len() == count {
            break;
        }
        chosen.push(e);
        let ok = graph
            .without(&chosen)
            .map(|g| g.is_strongly_connected())
            .unwrap_or(false);
        if !ok {
            chosen.pop();
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn irreducible_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 30] {
            let p = random_irreducible(&mut rng, n, 0.2).unwrap();
            assert!(p.is_irreducible());
            assert!((0..n).all(|u| p.get(u, u) > 0.0));
        }
    }

    #[test]
    fn sparse_draws_are_still_irreducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            assert!(random_irreducible(&mut rng, 40, 0.01).unwrap().is_irreducible());
        }
    }

    #[test]
    fn same_seed_same_draw() {
        let a = random_irreducible(&mut ChaCha8Rng::seed_from_u64(3), 12, 0.3).unwrap();
        let b = random_irreducible(&mut ChaCha8Rng::seed_from_u64(3), 12, 0.3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subsets_and_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let s = random_subset(&mut rng, 10, 5);
            assert!(!s.is_empty() && s.len() <= 5);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            let v = random_prob_vector(&mut rng, 8, 0.3);
            assert!((v.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn connected_graphs_and_removals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g = random_connected_graph(&mut rng, 12, 0.2).unwrap();
            assert!(g.is_undirected() && g.is_strongly_connected());
            let f = removable_links(&mut rng, &g, 3);
            assert!(g.without(&f).unwrap().is_strongly_connected());
        }
    }

    #[test]
    fn manipulation_only_touches_w() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let m = random_web_manipulation(&mut rng, 30, 3).unwrap();
            assert!(!m.w.is_empty() && m.w.len() <= 3);
            for u in (0..30).filter(|u| !m.w.contains(u)) {
                let a: Vec<_> = m.original.successors(u).collect();
                let b: Vec<_> = m.manipulated.successors(u).collect();
                assert_eq!(a, b);
            }
        }
    }
}
