//! The `endgrid` command line: builds trees, inflates them, runs the path,
//! comb and core analyses and emits certificates.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use endgrid_core::bipartite::certify::SubtreeMode;
use endgrid_core::bipartite::scale::ScaleFamily;
use endgrid_core::certifier::{
    affirmative_pipeline, certify_attachment_bound, certify_scale_obstruction, search_star, Certificate,
    PathDiscipline, StarSearchConfig, Verdict,
};
use endgrid_core::ends::combs::{find_combs, greedy_core};
use endgrid_core::ends::frayed::{frayed_decompose, RootedTree};
use endgrid_core::ends::paths::disjoint_paths;
use endgrid_core::ends::raygraph::ray_graph;
use endgrid_core::ends::surrogate::{all_rows, DepthSchedule, EndSurrogate, GeneratorSpec, RayKey};
use endgrid_core::graph::TruncatedGraph;
use endgrid_core::inflation::inflate;
use endgrid_core::io::{
    emit_graph, emit_sparse, emit_tree, from_json, parse_graph, parse_sparse, parse_tree, to_dot, to_json,
};
use endgrid_core::ladder::{attachment_sets, select_ladders, SparseTGraph};
use endgrid_core::tree::{build_regular_tree, leaf_keys, NodeKey, OrderTree};
use endgrid_core::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "endgrid",
    version,
    about = "Ray inflations of order trees and star-of-rays certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Args)]
pub struct Options {
    /// Truncation depth (ray length and, by default, tree height).
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Comma-separated, strictly increasing truncation depths.
    #[arg(long, global = true, value_delimiter = ',')]
    pub schedule: Option<Vec<usize>>,
    /// Teeth or path multiplicity threshold.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Neighbour threshold for the scale obstruction.
    #[arg(long, global = true)]
    pub d: Option<usize>,
    /// Number of leaves, paths or captured tops, depending on the command.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Size bound on the core side.
    #[arg(long, global = true)]
    pub core_budget: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Artifact path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Greedy,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LadderRule {
    /// Every top's ladder is its whole branch.
    Branch,
    /// The antichain rule, on the tree's partition or on its levels.
    Antichain,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regular tree with optional tops, written as a tree document.
    BuildTree {
        /// Children per level, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        profile: Vec<usize>,
        /// Tree height; defaults to --depth.
        #[arg(long)]
        height: Option<usize>,
        /// Place a top above every branch.
        #[arg(long)]
        all_tops: bool,
        /// Branches to place tops above, e.g. `0.1,1.0`.
        #[arg(long, value_delimiter = ',')]
        tops: Vec<String>,
        /// Attach the level antichains.
        #[arg(long)]
        level_antichains: bool,
    },
    /// Chooses a ladder for every top.
    SelectLadders {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = LadderRule::Antichain)]
        rule: LadderRule,
    },
    /// Truncated ray inflation of a laddered tree.
    Inflate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Star lifting of chosen horizontal rays of an inflation.
    Lift {
        #[arg(long)]
        input: PathBuf,
        /// Row keys, e.g. `r.0,r.1`.
        #[arg(long, value_delimiter = ',', required = true)]
        rows: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    #[command(subcommand)]
    Analyze(Analysis),
    #[command(subcommand)]
    Certify(Certification),
    /// Renders a graph document as Graphviz.
    ExportDot {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum Analysis {
    /// Disjoint paths between two vertex sets of a graph document, with a cut.
    DisjointPaths {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        source: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        target: Vec<usize>,
    },
    /// Combs from every other row onto the root row.
    Combs {
        #[arg(long)]
        input: PathBuf,
    },
    /// Greedy core grown from the root row by the other rows.
    GreedyCore {
        #[arg(long)]
        input: PathBuf,
    },
    /// Ray graph of all rows and its shape.
    RayGraph {
        #[arg(long)]
        input: PathBuf,
    },
    /// Star, frayed star or frayed comb in the tree itself, with threshold --k.
    Frayed {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum Certification {
    /// Attachment bound at level --sigma.
    Attachment {
        #[arg(long)]
        input: PathBuf,
        /// Defaults to half the tree height.
        #[arg(long)]
        sigma: Option<usize>,
    },
    /// Scale obstruction for a scale family document.
    Scale {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Star of rays among all rows.
    StarSearch {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        disjoint: bool,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// Greedy core, small core and star assembly.
    Pipeline {
        #[arg(long)]
        input: PathBuf,
    },
}

/// Command failures, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Core(Error::NotFound(_) | Error::Certification { .. }) => EXIT_FAIL,
            CliError::Core(Error::Internal(_)) => EXIT_INTERNAL,
            CliError::Core(_) => EXIT_USAGE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Artifact text plus the exit code it implies.
struct Output {
    text: String,
    code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, code: EXIT_PASS }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn depth(opts: &Options) -> CliResult<usize> {
    opts.depth.ok_or_else(|| CliError::Usage("--depth is required".into()))
}

fn need(v: Option<usize>, flag: &str) -> CliResult<usize> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn render<T: Serialize>(value: &T, summary: impl FnOnce() -> String, format: Format) -> CliResult<String> {
    match format {
        Format::Json => Ok(to_json(value)?),
        Format::Text => Ok(summary() + "\n"),
        Format::Dot => Err(CliError::Usage("this command has no DOT rendering".into())),
    }
}

fn render_certificate(c: &Certificate, format: Format) -> CliResult<Output> {
    let text = render(c, || format!("{:?} {:?}: {}", c.kind, c.verdict, c.summary), format)?;
    let code = if c.verdict == Verdict::Pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    };
    Ok(Output { text, code })
}

fn render_graph(h: &TruncatedGraph, format: Format) -> CliResult<String> {
    match format {
        Format::Json => Ok(emit_graph(h)?),
        Format::Dot => Ok(to_dot(h)),
        Format::Text => Ok(format!("{} vertices, {} edges\n", h.vertex_count(), h.edge_count())),
    }
}

fn parse_branch(s: &str) -> CliResult<Vec<u32>> {
    s.split('.')
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|_| CliError::Usage(format!("bad branch selector {s:?}")))
        })
        .collect()
}

fn inflated(opts: &Options, input: &Path) -> CliResult<(SparseTGraph, TruncatedGraph)> {
    let g = parse_sparse(&read(input)?)?;
    let h = inflate(&g, depth(opts)?);
    Ok((g, h))
}

fn rooted_tree(t: &OrderTree) -> CliResult<RootedTree> {
    let parents: Vec<Option<usize>> = t.node_ids().map(|x| t.parent(x)).collect();
    Ok(RootedTree::from_parents(&parents)?)
}

fn build_tree(
    opts: &Options,
    profile: &[usize],
    height: Option<usize>,
    all_tops: bool,
    tops: &[String],
    level_antichains: bool,
) -> CliResult<Output> {
    let height = match height {
        Some(h) => h,
        None => depth(opts)?,
    };
    let mut t = build_regular_tree(profile, height)?;
    let selectors: Vec<Vec<u32>> = if all_tops {
        leaf_keys(&t)
    } else {
        tops.iter().map(|s| parse_branch(s)).collect::<CliResult<_>>()?
    };
    if !selectors.is_empty() {
        t = t.attach_tops(&selectors)?;
    }
    if level_antichains {
        let ac = t.level_antichains();
        t = t.with_antichains(ac)?;
    }
    let text = match opts.format {
        Format::Text => format!(
            "{} nodes, {} tops, levels {:?}\n",
            t.len(),
            t.tops().len(),
            t.level_sizes()
        ),
        Format::Json => emit_tree(&t, None)?,
        Format::Dot => return Err(CliError::Usage("trees are written as JSON or text".into())),
    };
    Ok(Output::ok(text))
}

fn select(opts: &Options, input: &Path, rule: LadderRule) -> CliResult<Output> {
    let t = parse_tree(&read(input)?)?;
    let g = match rule {
        LadderRule::Branch => SparseTGraph::branch_following(t),
        LadderRule::Antichain if t.antichains().is_some() => select_ladders(t)?,
        LadderRule::Antichain => {
            let ac = t.level_antichains();
            select_ladders(t.with_antichains(ac)?)?
        }
    };
    let text = match opts.format {
        Format::Json => emit_sparse(&g)?,
        Format::Text => {
            let tree = g.tree();
            let mut s = String::new();
            for &x in tree.tops() {
                let l: Vec<String> = g.ladder(x).iter().map(|&y| tree.key(y).to_string()).collect();
                s.push_str(&format!("{}: {}\n", tree.key(x), l.join(" ")));
            }
            s
        }
        Format::Dot => return Err(CliError::Usage("ladders are written as JSON or text".into())),
    };
    Ok(Output::ok(text))
}

fn lift(opts: &Options, input: &Path, rows: &[String], sizes: &[usize]) -> CliResult<Output> {
    let g = parse_sparse(&read(input)?)?;
    let rows = rows.iter().map(|r| NodeKey::parse(r)).collect::<Result<Vec<_>, _>>()?;
    let spec = GeneratorSpec::Lift {
        base: Box::new(GeneratorSpec::Inflation { tree: Box::new(g) }),
        rows,
        sizes: sizes.to_vec(),
    };
    let h = spec.truncate(depth(opts)?)?;
    Ok(Output::ok(render_graph(&h, opts.format)?))
}

fn analyze(opts: &Options, a: &Analysis) -> CliResult<Output> {
    let format = opts.format;
    match a {
        Analysis::DisjointPaths { input, source, target } => {
            let h = parse_graph(&read(input)?)?;
            let k = opts.k.unwrap_or(h.vertex_count());
            let p = disjoint_paths(&h, source, target, k)?;
            let text = render(&p, || format!("{} disjoint paths", p.count()), format)?;
            let code = if opts.k.is_some_and(|k| p.count() < k) {
                EXIT_FAIL
            } else {
                EXIT_PASS
            };
            Ok(Output { text, code })
        }
        Analysis::Combs { input } => {
            let (g, h) = inflated(opts, input)?;
            let rays = all_rows(&g, &h)?;
            let (root, spines) = rays.split_first().ok_or_else(|| CliError::Usage("empty tree".into()))?;
            let combs = find_combs(&h, &root.vertex_set(), spines, opts.m.unwrap_or(1), &Default::default())?;
            Ok(Output::ok(render(&combs, || format!("{} combs", combs.len()), format)?))
        }
        Analysis::GreedyCore { input } => {
            let (g, h) = inflated(opts, input)?;
            let rays = all_rows(&g, &h)?;
            let gc = greedy_core(&h, &rays, opts.m.unwrap_or(1), rays.len() + 1)?;
            let text = render(
                &gc,
                || {
                    format!(
                        "core of {} vertices, {} combs, {} rounds",
                        gc.core.len(),
                        gc.combs.len(),
                        gc.rounds.len()
                    )
                },
                format,
            )?;
            Ok(Output::ok(text))
        }
        Analysis::RayGraph { input } => {
            let (g, h) = inflated(opts, input)?;
            let rays = all_rows(&g, &h)?;
            let rg = ray_graph(&h, &rays, opts.m.unwrap_or(1))?;
            #[derive(Serialize)]
            struct Report<'a, S> {
                graph: &'a endgrid_core::ends::raygraph::RayGraph,
                shape: S,
            }
            let shape = rg.classify();
            let text = render(
                &Report {
                    graph: &rg,
                    shape: &shape,
                },
                || format!("{} rays, {} edges, {:?}", rg.rays, rg.edges.len(), shape),
                format,
            )?;
            Ok(Output::ok(text))
        }
        Analysis::Frayed { input } => {
            let g = parse_sparse(&read(input)?)?;
            let t = rooted_tree(g.tree())?;
            let f = frayed_decompose(&t, need(opts.k, "k")?)?;
            Ok(Output::ok(render(&f, || format!("{:?}", f), format)?))
        }
    }
}

fn certify(opts: &Options, c: &Certification) -> CliResult<Output> {
    let cert = match c {
        Certification::Attachment { input, sigma } => {
            let (g, h) = inflated(opts, input)?;
            let sigma = sigma.unwrap_or(g.tree().finite_height() / 2);
            certify_attachment_bound(&g, &h, &attachment_sets(&g), sigma)?
        }
        Certification::Scale { input, samples } => {
            let sf: ScaleFamily = from_json(&read(input)?)?;
            let mode = match opts.mode {
                None | Some(Mode::Exact) => SubtreeMode::Exact,
                Some(Mode::Sampled) => SubtreeMode::Sampled {
                    seed: opts.seed,
                    samples: *samples,
                },
                Some(Mode::Greedy) => return Err(CliError::Usage("scale certificates are exact or sampled".into())),
            };
            let d = opts.d.unwrap_or(2);
            let a = opts.core_budget.unwrap_or(d.max(2));
            certify_scale_obstruction(&sf, depth(opts)?, a, d, opts.k.unwrap_or(2), mode)?
        }
        Certification::StarSearch {
            input,
            disjoint,
            budget,
        } => {
            let (g, h) = inflated(opts, input)?;
            let rays = all_rows(&g, &h)?;
            let mut cfg = StarSearchConfig::new(need(opts.k, "k")?, opts.m.unwrap_or(1));
            cfg.budget = *budget;
            if *disjoint {
                cfg.discipline = PathDiscipline::Disjoint;
            }
            search_star(&h, &rays, &cfg)?
        }
        Certification::Pipeline { input } => {
            let g = parse_sparse(&read(input)?)?;
            let schedule = match (&opts.schedule, opts.depth) {
                (Some(s), _) => DepthSchedule::new(s.clone())?,
                (None, Some(d)) => DepthSchedule::new(vec![d])?,
                (None, None) => return Err(CliError::Usage("--depth or --schedule is required".into())),
            };
            let keys: Vec<RayKey> = g
                .tree()
                .node_ids()
                .map(|t| RayKey::row(g.tree().key(t).clone()))
                .collect();
            let e = EndSurrogate::new(GeneratorSpec::Inflation { tree: Box::new(g) }, schedule);
            let m = opts.m.unwrap_or(1);
            let k = need(opts.k, "k")?;
            affirmative_pipeline(&e, &keys, m, opts.core_budget.unwrap_or(k + 1), k)?
        }
    };
    render_certificate(&cert, opts.format)
}

fn dispatch(cli: &Cli) -> CliResult<Output> {
    let opts = &cli.opts;
    if let Some(s) = &opts.schedule {
        DepthSchedule::new(s.clone())?;
    }
    match &cli.command {
        Command::BuildTree {
            profile,
            height,
            all_tops,
            tops,
            level_antichains,
        } => build_tree(opts, profile, *height, *all_tops, tops, *level_antichains),
        Command::SelectLadders { input, rule } => select(opts, input, *rule),
        Command::Inflate { input } => {
            let (_, h) = inflated(opts, input)?;
            Ok(Output::ok(render_graph(&h, opts.format)?))
        }
        Command::Lift { input, rows, sizes } => lift(opts, input, rows, sizes),
        Command::Analyze(a) => analyze(opts, a),
        Command::Certify(c) => certify(opts, c),
        Command::ExportDot { input } => {
            let h = parse_graph(&read(input)?)?;
            Ok(Output::ok(to_dot(&h)))
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    log::debug!("{cli:?}");
    let result = dispatch(cli).and_then(|o| emit(cli.opts.out.as_deref(), &o.text).map(|_| o.code));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("endgrid: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (program name first) and runs them.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            }
        }
    }
}
