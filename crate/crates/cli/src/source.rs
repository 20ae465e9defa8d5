//! Building instances from files or generator families.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use stochbound::generators::random::{random_connected_graph, random_irreducible, random_replacement};
use stochbound::generators::{
    complete_uniform, glued_complete, glued_complete_perturbation, hypercube_window,
    node_detach_perturbation, self_loop_perturbation, torus_lazy_walk, GraphSpec, GridSpec,
};
use stochbound::io::{read_matrix, read_perturbation};
use stochbound::{PerturbationSpec, StateSpace, StochasticMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// All entries 1/n (uses --n).
    Complete,
    /// Two m-cliques joined through a hub (uses --m).
    Glued,
    /// Lazy walk on the torus Z_m^d (uses --d, --m).
    Torus,
    /// Random irreducible matrix (uses --n, --seed).
    Random,
    /// Cycle graph (graph commands; uses --n).
    Cycle,
    /// Path graph (graph commands; uses --n).
    Path,
    /// Star with n − 1 leaves around node 0 (graph commands; uses --n).
    Star,
    /// Random connected graph (graph commands; uses --n, --seed).
    RandomGraph,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InstanceArgs {
    /// Matrix file (JSON or triplets).
    #[arg(long, conflicts_with = "family")]
    pub instance: Option<PathBuf>,
    /// Generator family.
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Support density of random instances.
    #[arg(long, default_value_t = 0.3)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SetArgs {
    /// Perturbation set: comma-separated states, or a file holding them.
    #[arg(long = "W", value_name = "STATES|FILE")]
    #[serde(rename = "W")]
    pub w: Option<String>,
    /// Torus cube `c1,c2,...:s` with corner c and side s.
    #[arg(long, value_name = "CORNER:SIDE")]
    pub window: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PerturbationArgs {
    /// Perturbation JSON file.
    #[arg(long)]
    pub perturbation: Option<PathBuf>,
    /// Detach this state (absorbing; its in-neighbors renormalize).
    #[arg(long, conflicts_with = "perturbation")]
    pub detach: Option<usize>,
    /// Perturbation strength for the built-in families.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
}

pub struct Instance {
    pub p: StochasticMatrix,
    pub states: StateSpace,
    pub grid: Option<GridSpec>,
    pub family: Option<Family>,
}

pub fn build_matrix(args: &InstanceArgs) -> Result<Instance> {
    if let Some(path) = &args.instance {
        let (p, states) =
            read_matrix(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(Instance {
            p,
            states,
            grid: None,
            family: None,
        });
    }
    let family = args
        .family
        .ok_or_else(|| anyhow!("give either --instance FILE or --family NAME"))?;
    let mut grid = None;
    let p = match family {
        Family::Complete => complete_uniform(args.n)?,
        Family::Glued => glued_complete(args.m)?,
        Family::Torus => {
            let spec = GridSpec::new(args.d, args.m)?;
            grid = Some(spec);
            torus_lazy_walk(spec)?
        }
        Family::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            random_irreducible(&mut rng, args.n, args.density)?
        }
        Family::Cycle | Family::Path | Family::Star | Family::RandomGraph => {
            stochbound::generators::lazy_walk(&build_graph(args)?)?
        }
    };
    let states = StateSpace::indexed(p.n())?;
    Ok(Instance {
        p,
        states,
        grid,
        family: Some(family),
    })
}

pub fn build_graph(args: &InstanceArgs) -> Result<GraphSpec> {
    let family = args
        .family
        .ok_or_else(|| anyhow!("graph commands need --family"))?;
    Ok(match family {
        Family::Cycle => GraphSpec::cycle(args.n)?,
        Family::Path => GraphSpec::path(args.n)?,
        Family::Complete => GraphSpec::complete(args.n)?,
        Family::Star => GraphSpec::star(args.n.saturating_sub(1))?,
        Family::Torus => GraphSpec::torus(GridSpec::new(args.d, args.m)?)?,
        Family::RandomGraph => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            random_connected_graph(&mut rng, args.n, args.density)?
        }
        Family::Glued | Family::Random => bail!("family {family:?} is not a graph family"),
    })
}

fn parse_state_list(text: &str, states: &StateSpace) -> Result<Vec<usize>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            states
                .resolve(t.trim_matches(|c| c == '"' || c == '[' || c == ']'))
                .ok_or_else(|| anyhow!("unknown state '{t}'"))
        })
        .collect()
}

/// Resolves `--W` or `--window`; `None` when neither is given.
pub fn build_set(args: &SetArgs, inst: &Instance) -> Result<Option<Vec<usize>>> {
    if let Some(w) = &args.w {
        let text = if Path::new(w).is_file() {
            std::fs::read_to_string(w).with_context(|| format!("reading {w}"))?
        } else {
            w.clone()
        };
        let set = parse_state_list(&text, &inst.states)?;
        if set.is_empty() {
            bail!("--W is empty");
        }
        return Ok(Some(set));
    }
    if let Some(win) = &args.window {
        let grid = inst
            .grid
            .ok_or_else(|| anyhow!("--window needs the torus family"))?;
        let (corner, side) = win
            .split_once(':')
            .ok_or_else(|| anyhow!("--window expects CORNER:SIDE, e.g. 0,0,0:2"))?;
        let corner = corner
            .split(',')
            .map(|c| c.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .context("bad window corner")?;
        let side: usize = side.trim().parse().context("bad window side")?;
        return Ok(Some(hypercube_window(grid, &corner, side)?));
    }
    Ok(None)
}

/// The perturbation for `analyze`: a file, a detached state, or the family's
/// built-in perturbation on `set`.
pub fn build_perturbation(
    args: &PerturbationArgs,
    inst: &Instance,
    set: Option<&[usize]>,
    seed: u64,
) -> Result<PerturbationSpec> {
    if let Some(path) = &args.perturbation {
        let spec = read_perturbation(path, &inst.states)
            .with_context(|| format!("reading {}", path.display()))?;
        return Ok(match set {
            Some(w) => {
                let mut all = w.to_vec();
                all.extend_from_slice(spec.set());
                PerturbationSpec::new(inst.p.n(), all, spec.rows().clone())?
            }
            None => spec,
        });
    }
    if let Some(u) = args.detach {
        return Ok(node_detach_perturbation(&inst.p, u)?);
    }
    let alpha = args.alpha;
    match (inst.family, set) {
        (Some(Family::Glued), None) => Ok(glued_complete_perturbation(inst.p.n() / 2, alpha)?),
        (Some(Family::Random), Some(w)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            Ok(random_replacement(&mut rng, inst.p.n(), w, 0.5)?)
        }
        (_, Some(w)) => Ok(self_loop_perturbation(&inst.p, w, 1.0 - alpha)?),
        (_, None) => bail!("give --W, --window, --perturbation or --detach"),
    }
}

/// Parses `u-v,u-v,...` into links.
pub fn parse_links(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (u, v) = t
                .trim()
                .split_once('-')
                .ok_or_else(|| anyhow!("link '{t}' is not of the form u-v"))?;
            Ok((u.parse()?, v.parse()?))
        })
        .collect()
}
