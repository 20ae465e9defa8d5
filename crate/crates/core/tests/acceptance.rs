//! Acceptance suite: ten numbered criteria, each with its tolerance and time
//! budget. Prints one PASS/FAIL line per criterion and exits nonzero on any FAIL.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stochbound::analysis::{analyze, hitting_times, kac_residual, lambda_w, AnalysisOptions};
use stochbound::applications::averaging::{audit_averaging, AveragingOptions};
use stochbound::applications::pagerank::audit_pagerank;
use stochbound::applications::voter::{
    simulate_voter, tightness_witness, voter_stationary, voter_theoretical, VoterOptions,
};
use stochbound::bounds::{evaluate, evaluate_with_invariant, psi, theorem1_bound, x_star, X_STAR_PRINTED};
use stochbound::generators::random::{
    random_connected_graph, random_irreducible, random_prob_vector, random_replacement,
    random_subset, random_web_manipulation, removable_links,
};
use stochbound::generators::{
    complete_uniform, glued_complete, glued_complete_perturbation, hypercube_window,
    node_detach_perturbation, self_loop_perturbation, torus_lazy_walk, web_graph_to_q, GraphSpec,
    GridSpec,
};
use stochbound::stationary::{invariant_vectors_reducible, stationary_vector};
use stochbound::verify::{cube_perturbation, torus_point_bound};
use stochbound::{apply_perturbation, tv_distance, tv_subset_witness, ProbVector, StochasticMatrix};

/// Tolerance for quantities the criteria call exact.
const EXACT: f64 = 1e-12;

/// Collects violated checks for one criterion.
#[derive(Default)]
struct Ledger {
    checks: usize,
    failures: Vec<String>,
}

impl Ledger {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self) -> Result<String, String> {
        if self.failures.is_empty() {
            Ok(format!("{} checks", self.checks))
        } else {
            let shown: Vec<&str> = self.failures.iter().take(5).map(String::as_str).collect();
            Err(format!(
                "{} of {} checks failed: {}",
                self.failures.len(),
                self.checks,
                shown.join("; ")
            ))
        }
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn complete_chain() -> Result<String, String> {
    let mut l = Ledger::default();
    for n in [5usize, 10, 50, 200] {
        for alpha in [0.1, 0.5, 0.9] {
            let p = complete_uniform(n).unwrap();
            let spec = self_loop_perturbation(&p, &[0], 1.0 - alpha).unwrap();
            let pt = apply_perturbation(&p, &spec).unwrap();
            let e = evaluate(&p, &pt, &[0]).unwrap();
            let nf = n as f64;
            let formula = (1.0 - alpha - 1.0 / nf).abs() / (nf * alpha + 1.0);
            let tv = e.bounds.exact_tv.unwrap().value;
            let case = format!("n={n} α={alpha}");
            l.check(close(tv, formula, 1e-10), || format!("{case}: TV {tv} vs {formula}"));
            l.check(e.chain.t_mix.value == 1, || format!("{case}: t_mix {}", e.chain.t_mix.value));
            let tau = e.chain.tau_star.value;
            l.check(close(tau, nf, EXACT * nf), || format!("{case}: τ* {tau}"));
            let g = e.chain.gamma_tilde.value;
            l.check(close(g, alpha, EXACT), || format!("{case}: γ̃ {g}"));
            let b = e.bounds.bound_thm1.value;
            l.check(b >= tv, || format!("{case}: bound {b} < TV {tv}"));
        }
    }
    l.finish()
}

fn glued_cliques() -> Result<String, String> {
    let mut l = Ledger::default();
    for m in 2usize..=10 {
        for alpha in [0.1, 0.3, 0.45] {
            let p = glued_complete(m).unwrap();
            let spec = glued_complete_perturbation(m, alpha).unwrap();
            let pt = apply_perturbation(&p, &spec).unwrap();
            let e = evaluate(&p, &pt, spec.set()).unwrap();
            let mf = m as f64;
            let case = format!("m={m} α={alpha}");
            let tv = e.bounds.exact_tv.unwrap().value;
            let formula = mf * alpha / (mf + 1.0);
            l.check(close(tv, formula, 1e-10), || format!("{case}: TV {tv} vs {formula}"));
            let tau = e.chain.tau_star.value;
            l.check(close(tau, mf, EXACT * mf), || format!("{case}: τ* {tau}"));
            let g = e.chain.gamma_tilde.value;
            l.check(close(g, 1.0, EXACT), || format!("{case}: γ̃ {g}"));
            let t = e.chain.t_mix.value;
            l.check(t as f64 >= mf / 2.0, || format!("{case}: t_mix {t} < m/2"));
            if e.bounds.psi_arg.value > x_star() {
                let b = e.bounds.bound_thm1.value;
                l.check(b == 1.0, || format!("{case}: argument above x* but bound {b}"));
            }
        }
    }
    l.finish()
}

fn torus_point() -> Result<String, String> {
    let mut l = Ledger::default();
    let self_loop = 0.25;
    for (d, m) in [(1usize, 8usize), (2, 5), (3, 4)] {
        let spec = GridSpec::new(d, m).unwrap();
        let p = torus_lazy_walk(spec).unwrap();
        let pt = apply_perturbation(&p, &self_loop_perturbation(&p, &[0], self_loop).unwrap()).unwrap();
        let chain = analyze(&p, &pt, &[0], &[0]).unwrap();
        let n = spec.n() as f64;
        let case = format!("d={d} m={m}");
        let tau = chain.tau_star.value;
        l.check(close(tau, 2.0 * (n - 1.0), 1e-8), || format!("{case}: τ* {tau}"));
        let pi = stationary_vector(&p).unwrap();
        let kac = kac_residual(&p, &pi, &[0], &hitting_times(&p, &[0]).unwrap());
        l.check(kac <= 1e-8, || format!("{case}: Kac residual {kac}"));
        let g = chain.gamma_tilde.value;
        let expected = 1.0 - pt.get(0, 0);
        l.check(close(g, expected, EXACT), || format!("{case}: γ̃ {g} vs {expected}"));
    }
    let bounds: Vec<f64> = [3, 4, 5]
        .iter()
        .map(|&m| torus_point_bound(3, m, self_loop).unwrap())
        .collect();
    l.check(bounds.windows(2).all(|w| w[1] < w[0]), || {
        format!("d=3 bounds not decreasing: {bounds:?}")
    });
    Ok(format!("{}; d=3 bounds {:.4?}", l.finish()?, bounds))
}

fn torus_cube() -> Result<String, String> {
    let mut l = Ledger::default();
    let d = 3usize;
    for m in [4usize, 5] {
        for s in [1usize, 2] {
            let spec = GridSpec::new(d, m).unwrap();
            let p = torus_lazy_walk(spec).unwrap();
            let set = hypercube_window(spec, &[0, 0, 0], s).unwrap();
            let pert = cube_perturbation(spec, &set).unwrap();
            let pt = apply_perturbation(&p, &pert).unwrap();
            let pit = stationary_vector(&pt).unwrap();
            let support: Vec<usize> = set.iter().copied().filter(|&v| pit[v] > 1e-12).collect();
            let chain = analyze(&p, &pt, &set, &support).unwrap();
            let case = format!("m={m} s={s}");
            let n = spec.n() as f64;
            let cube = (s as f64).powi(d as i32);
            let lambda = lambda_w(&p, &set).value;
            let lambda_floor = (4.0 * d as f64).powf(-(d as f64) * (s as f64 + 1.0));
            l.check(lambda > lambda_floor, || format!("{case}: λ {lambda} ≤ {lambda_floor}"));
            let tau = chain.tau_star.value;
            let tau_floor = lambda * (n / cube - 1.0);
            l.check(tau > tau_floor, || format!("{case}: τ* {tau} ≤ {tau_floor}"));
            let delta = pert
                .rows()
                .values()
                .flat_map(|r| r.iter().map(|&(_, q)| q))
                .fold(f64::INFINITY, f64::min);
            let g = chain.gamma_tilde.value;
            let g_floor = delta.powf(cube) / cube;
            l.check(g > g_floor, || format!("{case}: γ̃ {g} ≤ {g_floor}"));
        }
    }
    l.finish()
}

/// A random instance whose perturbed matrix may be irreducible or, for the
/// detachment kind, has an absorbing state.
fn dominance_instance(rng: &mut ChaCha8Rng, detach: bool) -> (StochasticMatrix, StochasticMatrix, Vec<usize>) {
    loop {
        let n = rng.random_range(5..=50);
        if detach {
            let density = rng.random_range(0.05..0.15);
            let p = random_irreducible(rng, n, density).unwrap();
            let u = rng.random_range(0..n);
            if let Ok(spec) = node_detach_perturbation(&p, u) {
                if spec.set().len() <= n / 2 {
                    let pt = apply_perturbation(&p, &spec).unwrap();
                    return (p, pt, spec.set().to_vec());
                }
            }
        } else {
            let density = rng.random_range(0.05..0.5);
            let p = random_irreducible(rng, n, density).unwrap();
            let set = random_subset(rng, n, n / 2);
            let density = rng.random_range(0.05..0.5);
            let spec = random_replacement(rng, n, &set, density).unwrap();
            let pt = apply_perturbation(&p, &spec).unwrap();
            return (p, pt, set);
        }
    }
}

fn dominance() -> Result<String, String> {
    let mut l = Ledger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let opts = AnalysisOptions::default();
    let mut reducible = 0;
    let mut evaluations = 0;
    for i in 0..500 {
        let (p, pt, set) = dominance_instance(&mut rng, i % 4 == 3);
        let invariants = if pt.is_irreducible() {
            vec![stationary_vector(&pt).unwrap()]
        } else {
            reducible += 1;
            invariant_vectors_reducible(&pt).unwrap()
        };
        for v in invariants {
            evaluations += 1;
            let e = match evaluate_with_invariant(&p, &pt, &set, v, &opts) {
                Ok(e) => e,
                Err(err) => {
                    l.check(false, || format!("instance {i}: {err}"));
                    continue;
                }
            };
            let tv = e.bounds.exact_tv.unwrap().value;
            let b = &e.bounds;
            l.check(b.bound_thm1.value >= tv - 1e-12, || format!("instance {i}: main bound"));
            l.check(b.bound_lemma1.unwrap().value >= tv - 1e-12, || format!("instance {i}: coupling bound"));
            let ptw = b.pi_tilde_w.unwrap().value;
            l.check(ptw <= b.pi_tilde_w_bound_lemma2.value + 1e-12, || format!("instance {i}: π̃(W) bound"));
            l.check(e.chain.tau_star.value >= b.tau_star_lower_prop1.value - 1e-9, || {
                format!("instance {i}: entrance-time bound")
            });
            let kac = e.chain.kac_residual.value;
            l.check(kac <= 1e-8, || format!("instance {i}: Kac residual {kac}"));
        }
    }
    Ok(format!(
        "{}; {evaluations} invariant vectors, {reducible} reducible instances",
        l.finish()?
    ))
}

fn tv_identity() -> Result<String, String> {
    let mut l = Ledger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for i in 0..200 {
        let n = rng.random_range(1..=12);
        let mu = random_prob_vector(&mut rng, n, 0.25);
        let nu = random_prob_vector(&mut rng, n, 0.25);
        let gap = |mask: u32| -> f64 {
            (0..n)
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| mu[k] - nu[k])
                .sum::<f64>()
                .abs()
        };
        let brute = (0u32..1 << n).map(gap).fold(0.0, f64::max);
        let (set, witness) = tv_subset_witness(&mu, &nu).unwrap();
        let mask = set.iter().fold(0u32, |m, &k| m | 1 << k);
        l.check(close(witness, brute, EXACT), || format!("pair {i}: {witness} vs {brute}"));
        l.check(close(gap(mask), brute, EXACT), || format!("pair {i}: witness set gap {}", gap(mask)));
        let tv = tv_distance(&mu, &nu).unwrap();
        l.check(close(tv, brute, EXACT), || format!("pair {i}: half-L1 {tv}"));
    }
    l.finish()
}

fn pagerank() -> Result<String, String> {
    let mut l = Ledger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut dangling = 0;
    for g in 0..100 {
        let n = rng.random_range(10..=200);
        let web = random_web_manipulation(&mut rng, n, 1 + n / 20).unwrap();
        dangling += web.original.out_degrees().iter().filter(|&&d| d == 0).count();
        let q = web_graph_to_q(&web.original).unwrap();
        let qt = web_graph_to_q(&web.manipulated).unwrap();
        for beta in [0.15, 0.3] {
            let case = format!("graph {g} (n={n}) β={beta}");
            match audit_pagerank(&q, &qt, &web.mu, beta, &web.w) {
                Ok(a) => {
                    l.check(a.gamma_tilde.holds, || format!("{case}: γ̃ estimate"));
                    l.check(a.t_mix.holds, || format!("{case}: t_mix estimate"));
                    l.check(a.tau_star.holds, || format!("{case}: τ* estimate"));
                    l.check(a.closed_bound.holds, || format!("{case}: closed-form bound"));
                }
                Err(e) => l.check(false, || format!("{case}: {e}")),
            }
        }
    }
    l.check(dangling > 0, || "no dangling pages drawn".into());
    Ok(format!("{}; {dangling} dangling pages", l.finish()?))
}

fn averaging() -> Result<String, String> {
    let mut l = Ledger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let opts = AveragingOptions::default();
    for i in 0..50 {
        let graph = match i % 3 {
            0 => GraphSpec::torus(GridSpec::new(2, 4).unwrap()).unwrap(),
            1 => GraphSpec::torus(GridSpec::new(2, 6).unwrap()).unwrap(),
            _ => {
                let n = rng.random_range(6..=30);
                let density = rng.random_range(0.1..0.4);
                random_connected_graph(&mut rng, n, density).unwrap()
            }
        };
        let count = if i % 2 == 0 { 1 } else { rng.random_range(2..=5) };
        let failed = removable_links(&mut rng, &graph, count);
        let y: Vec<f64> = (0..graph.n()).map(|_| rng.random::<f64>()).collect();
        let case = format!("instance {i} (n={}, {} failed)", graph.n(), failed.len());
        l.check(!failed.is_empty(), || format!("{case}: no removable link"));
        match audit_averaging(&graph, &failed, &y, &opts) {
            Ok(a) => {
                let (c, f) = (a.consensus.value, a.consensus_formula.value);
                l.check(close(c, f, 1e-8), || format!("{case}: limit {c} vs {f}"));
                l.check(a.holds, || {
                    format!("{case}: error {} > bound {}", a.normalized_error.value, a.bound.value)
                });
            }
            Err(e) => l.check(false, || format!("{case}: {e}")),
        }
    }
    l.finish()
}

type Links = Vec<(usize, usize)>;

fn voter() -> Result<String, String> {
    let mut l = Ledger::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let trials = 10_000;
    let cases: Vec<(&str, GraphSpec, Links)> = vec![
        ("cycle 8 intact", GraphSpec::cycle(8).unwrap(), vec![]),
        ("cycle 10", GraphSpec::cycle(10).unwrap(), vec![(0, 1), (4, 5)]),
        ("complete 6", GraphSpec::complete(6).unwrap(), vec![(0, 1), (0, 2), (3, 4)]),
        ("torus 4x4", GraphSpec::torus(GridSpec::new(2, 4).unwrap()).unwrap(), vec![(0, 1), (0, 4), (5, 6)]),
        ("random 12", random_connected_graph(&mut rng, 12, 0.25).unwrap(), vec![]),
    ];
    let checkpoints = vec![0, 5, 25, 100, 400];
    for (k, (name, graph, mut failed)) in cases.into_iter().enumerate() {
        if name.starts_with("random") {
            failed = removable_links(&mut rng, &graph, 3);
        }
        let n = graph.n();
        let x0: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let p = voter_theoretical(&graph, &failed, &x0).unwrap();
        if failed.is_empty() {
            let mean = x0.iter().filter(|&&b| b).count() as f64 / n as f64;
            l.check(close(p, mean, EXACT), || format!("{name}: π̃·X0 {p} vs mean {mean}"));
        }
        let opts = VoterOptions {
            trials,
            seed: 1000 + k as u64,
            checkpoints: checkpoints.clone(),
            step_cap: None,
        };
        let out = simulate_voter(&graph, &failed, &x0, &opts).unwrap();
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let freq = out.consensus_frequency.value;
        l.check((freq - p).abs() <= 3.0 * sigma, || format!("{name}: frequency {freq} vs {p} (σ {sigma})"));
        for point in &out.martingale {
            let s = point.ci_halfwidth.value / 1.959_963_984_540_054;
            let mean = point.mean.value;
            l.check((mean - p).abs() <= 3.0 * s + EXACT, || {
                format!("{name}: martingale at t={} is {mean} vs {p} (σ {s})", point.t)
            });
        }

        if failed.is_empty() {
            continue;
        }
        let (witness, gap) = tightness_witness(&graph, &failed).unwrap();
        let pit = voter_stationary(&graph, &failed).unwrap();
        let tv = tv_distance(&pit, &ProbVector::uniform(n)).unwrap();
        l.check(close(gap, tv, EXACT), || format!("{name}: witness gap {gap} vs TV {tv}"));
        let y = witness.iter().filter(|&&b| b).count() as f64 / n as f64;
        let pw = voter_theoretical(&graph, &failed, &witness).unwrap();
        let out = simulate_voter(&graph, &failed, &witness, &VoterOptions { seed: 2000 + k as u64, ..opts }).unwrap();
        let sigma = (pw * (1.0 - pw) / trials as f64).sqrt();
        let shift = (out.consensus_frequency.value - y).abs();
        l.check((shift - tv).abs() <= 3.0 * sigma, || {
            format!("{name}: witness shift {shift} vs TV {tv} (σ {sigma})")
        });
    }
    l.finish()
}

fn psi_unit() -> Result<String, String> {
    let mut l = Ledger::default();
    l.check(psi(0.0).unwrap() == 0.0, || "Ψ(0) ≠ 0".into());
    let grid: Vec<f64> = (0..10_000).map(|i| psi(1.5 * i as f64 / 9_999.0).unwrap()).collect();
    l.check(grid.windows(2).all(|w| w[1] >= w[0]), || "Ψ not monotone on the grid".into());
    let x = x_star();
    let identity = x * (std::f64::consts::E.powi(2) / x).ln();
    l.check(close(identity, 1.0, 1e-12), || format!("x*·ln(e²/x*) = {identity}"));
    l.check(close(x, X_STAR_PRINTED, 1e-5), || format!("x* = {x}"));
    l.check(theorem1_bound(1, 0.0, 1.0).unwrap() == 1.0, || "γ̃ = 0 not vacuous".into());
    Ok(format!("{}; x* = {x:.10}", l.finish()?))
}

type Runner = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(u32, &str, u64, Runner); 10] = [
        (1, "complete chain exactness", 5, complete_chain),
        (2, "glued cliques exactness", 10, glued_cliques),
        (3, "torus single-state perturbation", 60, torus_point),
        (4, "torus cube inequalities", 120, torus_cube),
        (5, "bound dominance on 500 random instances", 300, dominance),
        (6, "total variation subset identity", 30, tv_identity),
        (7, "PageRank estimates on 100 web graphs", 300, pagerank),
        (8, "averaging with failed links", 120, averaging),
        (9, "voter model with suppressed links", 300, voter),
        (10, "Ψ unit checks", 1, psi_unit),
    ];
    let mut failed = 0;
    for (id, title, budget, run) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > Duration::from_secs(budget) => {
                Err(format!("{detail}; over the {budget} s budget"))
            }
            other => other,
        };
        let (status, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {id:>2} {status} [{:>8.3} s / {budget} s] {title}: {detail}",
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
