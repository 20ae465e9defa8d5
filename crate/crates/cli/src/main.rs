//! `stochbound`: analyze perturbed chains, evaluate the bounds, re-check the
//! reference families and run the application audits.

mod source;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use stochbound::analysis::{AnalysisOptions, ChainReport};
use stochbound::applications::averaging::{audit_averaging, AveragingAudit, AveragingOptions};
use stochbound::applications::pagerank::{audit_pagerank, PagerankAudit};
use stochbound::applications::voter::{
    simulate_voter, tightness_witness, voter_theoretical, VoterOptions, VoterOutcome,
};
use stochbound::bounds::{evaluate_with_invariant, psi, BoundReport};
use stochbound::generators::random::{random_web_manipulation, removable_links};
use stochbound::generators::{web_graph_to_q, GraphSpec};
use stochbound::io::{matrix_to_json, matrix_to_triplets, perturbation_to_json};
use stochbound::stationary::{invariant_vectors_reducible, stationary_vector_with};
use stochbound::verify::verify_examples;
use stochbound::{apply_perturbation, Tagged};

use source::{
    build_graph, build_matrix, build_perturbation, build_set, parse_links, InstanceArgs,
    PerturbationArgs, SetArgs,
};

const EXIT_ERROR: u8 = 1;
const EXIT_VACUOUS: u8 = 2;

#[derive(Parser)]
#[command(name = "stochbound", version, about = "Perturbation bounds for invariant vectors of stochastic matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute every ingredient and bound for one perturbed instance.
    Analyze(AnalyzeArgs),
    /// Re-check the closed-form identities of the reference families.
    VerifyExamples(VerifyArgs),
    /// Tabulate Ψ as CSV.
    PsiTable(PsiArgs),
    /// Audit the PageRank estimates on random manipulated web graphs.
    PagerankAudit(PagerankArgs),
    /// Run ratio-consensus averaging with failed links.
    Averaging(AveragingArgs),
    /// Simulate the voter model with suppressed links.
    Voter(VoterArgs),
    /// Write a generated instance to a file.
    Generate(GenerateArgs),
}

#[derive(Args, Serialize)]
struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    #[serde(flatten)]
    set: SetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    perturbation: PerturbationArgs,
    /// Give up on the mixing time after this many powers.
    #[arg(long)]
    t_cap: Option<usize>,
    /// Residual accepted from the stationary solver.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Print the checks as JSON instead of a table.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PsiArgs {
    #[arg(long, default_value_t = 0.0)]
    xmin: f64,
    #[arg(long, default_value_t = 1.0)]
    xmax: f64,
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct PagerankArgs {
    /// Number of random web graphs.
    #[arg(long, default_value_t = 20)]
    graphs: usize,
    /// Pages per graph.
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Largest manipulated set.
    #[arg(long, default_value_t = 3)]
    max_w: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.15, 0.3])]
    beta: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct FailureArgs {
    /// Failed links `u-v,...` (u stops reading v).
    #[arg(long)]
    fail: Option<String>,
    /// Pick this many failed links at random, keeping strong connectivity.
    #[arg(long, conflicts_with = "fail")]
    random_failures: Option<usize>,
}

#[derive(Args, Serialize)]
struct AveragingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    #[serde(flatten)]
    failures: FailureArgs,
    /// Measurements, comma-separated; random in [0,1) when omitted.
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct VoterArgs {
    #[command(flatten)]
    #[serde(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    #[serde(flatten)]
    failures: FailureArgs,
    /// Initial opinions as 0/1, comma-separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "witness")]
    x0: Option<Vec<u8>>,
    /// Start from the state that separates the two consensus probabilities most.
    #[arg(long)]
    witness: bool,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Times at which to record the weighted opinion average.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<usize>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Triplets,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    set: SetArgs,
    #[command(flatten)]
    perturbation: PerturbationArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Also write the perturbation (JSON) here.
    #[arg(long)]
    perturbation_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(&text, out)
}

#[derive(Serialize)]
struct EvaluationOut {
    chain: ChainReport,
    bounds: BoundReport,
}

#[derive(Serialize)]
struct AnalyzeReport<'a> {
    config: &'a AnalyzeArgs,
    n: usize,
    w: Vec<String>,
    perturbed_irreducible: bool,
    /// One entry per extreme invariant vector of the perturbed matrix.
    evaluations: Vec<EvaluationOut>,
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<u8> {
    let inst = build_matrix(&args.instance)?;
    let set = build_set(&args.set, &inst)?;
    let spec = build_perturbation(&args.perturbation, &inst, set.as_deref(), args.instance.seed)?;
    let pt = apply_perturbation(&inst.p, &spec)?;

    let mut opts = AnalysisOptions::default();
    opts.mixing.t_cap = args.t_cap;
    if let Some(tol) = args.tol {
        opts.solver.tolerances.solver_residual = tol;
    }
    let irreducible = pt.is_irreducible();
    let invariants = if irreducible {
        vec![stationary_vector_with(&pt, &opts.solver)?]
    } else {
        invariant_vectors_reducible(&pt)?
    };
    let evaluations = invariants
        .into_iter()
        .map(|v| {
            let e = evaluate_with_invariant(&inst.p, &pt, spec.set(), v, &opts)?;
            Ok(EvaluationOut {
                chain: e.chain,
                bounds: e.bounds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let vacuous = evaluations.iter().all(|e| e.bounds.vacuous);
    let report = AnalyzeReport {
        config: &args,
        n: inst.p.n(),
        w: spec.set().iter().map(|&v| inst.states.label(v).to_string()).collect(),
        perturbed_irreducible: irreducible,
        evaluations,
    };
    emit_json(&report, args.out.as_ref())?;
    Ok(if vacuous { EXIT_VACUOUS } else { 0 })
}

fn cmd_verify(args: VerifyArgs) -> Result<u8> {
    let checks = verify_examples()?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    if args.json {
        emit_json(&checks, args.out.as_ref())?;
    } else {
        let mut text = format!(
            "{:<6} {:<11} {:<22} {:<36} {:>14} {:>14}\n",
            "status", "family", "case", "check", "value", "reference"
        );
        for c in &checks {
            text.push_str(&format!(
                "{:<6} {:<11} {:<22} {:<36} {:>14.8e} {:>14.8e}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.family,
                c.case,
                c.name,
                c.value,
                c.reference
            ));
        }
        text.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
        emit(&text, args.out.as_ref())?;
    }
    Ok(if failed == 0 { 0 } else { EXIT_ERROR })
}

fn cmd_psi_table(args: PsiArgs) -> Result<u8> {
    if !(args.xmin >= 0.0 && args.xmin < args.xmax && args.xmax.is_finite()) {
        bail!("need 0 ≤ xmin < xmax, got xmin = {}, xmax = {}", args.xmin, args.xmax);
    }
    if args.points < 2 {
        bail!("need at least 2 points");
    }
    let mut text = String::from("x,psi\n");
    let step = (args.xmax - args.xmin) / (args.points - 1) as f64;
    for i in 0..args.points {
        let x = if i + 1 == args.points {
            args.xmax
        } else {
            args.xmin + step * i as f64
        };
        text.push_str(&format!("{x},{}\n", psi(x)?));
    }
    emit(&text, args.out.as_ref())?;
    Ok(0)
}

#[derive(Serialize)]
struct PagerankCase {
    graph: usize,
    audit: PagerankAudit,
}

#[derive(Serialize)]
struct PagerankReport<'a> {
    config: &'a PagerankArgs,
    cases: Vec<PagerankCase>,
    violations: usize,
}

fn cmd_pagerank(args: PagerankArgs) -> Result<u8> {
    let cases: Vec<Vec<PagerankCase>> = (0..args.graphs)
        .into_par_iter()
        .map(|g| {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            rng.set_stream(g as u64);
            let web = random_web_manipulation(&mut rng, args.n, args.max_w)?;
            let q = web_graph_to_q(&web.original)?;
            let qt = web_graph_to_q(&web.manipulated)?;
            args.beta
                .iter()
                .map(|&beta| {
                    Ok(PagerankCase {
                        graph: g,
                        audit: audit_pagerank(&q, &qt, &web.mu, beta, &web.w)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let cases: Vec<PagerankCase> = cases.into_iter().flatten().collect();
    let violations = cases.iter().filter(|c| !c.audit.all_hold()).count();
    emit_json(
        &PagerankReport {
            config: &args,
            cases,
            violations,
        },
        args.out.as_ref(),
    )?;
    Ok(if violations == 0 { 0 } else { EXIT_ERROR })
}

fn failed_links(args: &FailureArgs, graph: &GraphSpec, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>> {
    Ok(match (&args.fail, args.random_failures) {
        (Some(text), _) => parse_links(text)?,
        (None, Some(k)) => removable_links(rng, graph, k),
        (None, None) => Vec::new(),
    })
}

#[derive(Serialize)]
struct AveragingReport<'a> {
    config: &'a AveragingArgs,
    failed: Vec<(usize, usize)>,
    y: Vec<f64>,
    audit: AveragingAudit,
}

fn cmd_averaging(args: AveragingArgs) -> Result<u8> {
    let graph = build_graph(&args.instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.instance.seed);
    let failed = failed_links(&args.failures, &graph, &mut rng)?;
    let y = match &args.y {
        Some(y) => y.clone(),
        None => (0..graph.n()).map(|_| rng.random::<f64>()).collect(),
    };
    let opts = AveragingOptions {
        tol: args.tol,
        ..AveragingOptions::default()
    };
    let audit = audit_averaging(&graph, &failed, &y, &opts)?;
    emit_json(
        &AveragingReport {
            config: &args,
            failed,
            y,
            audit,
        },
        args.out.as_ref(),
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct VoterReport<'a> {
    config: &'a VoterArgs,
    failed: Vec<(usize, usize)>,
    x0: Vec<u8>,
    /// `π̃ · X(0)`.
    theoretical: Tagged<f64>,
    /// `|π̃ · X(0) − mean(X(0))|`; equals the total variation distance for the witness.
    shift: Tagged<f64>,
    sigma: Tagged<f64>,
    within_three_sigma: bool,
    outcome: VoterOutcome,
}

fn cmd_voter(args: VoterArgs) -> Result<u8> {
    let graph = build_graph(&args.instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.instance.seed);
    let failed = failed_links(&args.failures, &graph, &mut rng)?;
    let x0: Vec<bool> = match (&args.x0, args.witness) {
        (Some(x), _) => x.iter().map(|&b| b != 0).collect(),
        (None, true) => tightness_witness(&graph, &failed)?.0,
        (None, false) => bail!("give --x0 or --witness"),
    };
    let theoretical = voter_theoretical(&graph, &failed, &x0)?;
    let mean = x0.iter().filter(|&&b| b).count() as f64 / x0.len() as f64;
    let outcome = simulate_voter(
        &graph,
        &failed,
        &x0,
        &VoterOptions {
            trials: args.trials,
            seed: args.instance.seed,
            checkpoints: args.checkpoints.clone(),
            step_cap: None,
        },
    )?;
    let sigma = (theoretical * (1.0 - theoretical) / args.trials as f64).sqrt();
    let within = (outcome.consensus_frequency.value - theoretical).abs() <= 3.0 * sigma;
    emit_json(
        &VoterReport {
            config: &args,
            failed,
            x0: x0.iter().map(|&b| b as u8).collect(),
            theoretical: Tagged::exact(theoretical),
            shift: Tagged::exact((theoretical - mean).abs()),
            sigma: Tagged::exact(sigma),
            within_three_sigma: within,
            outcome,
        },
        args.out.as_ref(),
    )?;
    Ok(0)
}

fn cmd_generate(args: GenerateArgs) -> Result<u8> {
    let inst = build_matrix(&args.instance)?;
    let labels = (args.instance.instance.is_some()).then_some(&inst.states);
    let text = match args.format {
        Format::Json => format!("{}\n", matrix_to_json(&inst.p, labels)),
        Format::Triplets => matrix_to_triplets(&inst.p),
    };
    emit(&text, args.out.as_ref())?;
    if let Some(path) = &args.perturbation_out {
        let set = build_set(&args.set, &inst)?;
        let spec = build_perturbation(&args.perturbation, &inst, set.as_deref(), args.instance.seed)?;
        fs::write(path, format!("{}\n", perturbation_to_json(&spec)))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(0)
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("STOCHBOUND_THREADS") {
        let threads: usize = value
            .parse()
            .with_context(|| format!("STOCHBOUND_THREADS = '{value}' is not a count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::VerifyExamples(a) => cmd_verify(a),
        Command::PsiTable(a) => cmd_psi_table(a),
        Command::PagerankAudit(a) => cmd_pagerank(a),
        Command::Averaging(a) => cmd_averaging(a),
        Command::Voter(a) => cmd_voter(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
