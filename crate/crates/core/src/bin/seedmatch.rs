use std::collections::HashMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seedmatch::bench::collapse::{collapse_analysis, Curve, Rescale};
use seedmatch::bench::config::{ExperimentConfig, PSpec};
use seedmatch::bench::ingest::{ingest_edge_list, EdgeList};
use seedmatch::bench::output::{self, read_csv, sweep_rows, svg_plot, write_csv, Series};
use seedmatch::bench::real::{real_protocol, RealParams};
use seedmatch::bench::sweep::run_sweep;
use seedmatch::bench::accuracy;
use seedmatch::error::{Error, Result};
use seedmatch::graph::{Graph, VertexMapping};
use seedmatch::matcher::{complete_randomly, iterate, Algorithm};
use seedmatch::rng::{purpose_stream, substream_id, Purpose};
use seedmatch::synth::{make_correlated_pair, ModelParams};
use seedmatch::theory::{bound_report, empirical_event_check, Event};

#[derive(Parser)]
#[command(name = "seedmatch", version, about = "Seeded graph matching experiments")]
struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a correlated pair and write edge lists and mappings.
    Synth(ModelArgs),
    /// Match two edge lists given a seed mapping file.
    Match(MatchArgs),
    /// Run an accuracy sweep and write sweep.csv and sweep.svg.
    Sweep(SweepArgs),
    /// Crossing points and spread of rescaled sweep curves.
    Collapse(CollapseArgs),
    /// Evaluate the closed-form bounds, or check an event empirically.
    Bounds(BoundsArgs),
    /// Match two subsampled copies of a given graph.
    Real(RealArgs),
    /// Read an edge list and report its size.
    Ingest(IngestArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    n: usize,
    /// Edge probability, a number or n^-<gamma>.
    #[arg(long)]
    p: String,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    beta: f64,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    g1: PathBuf,
    #[arg(long)]
    g2: PathBuf,
    /// Seed pairs, one `id1 id2` per line.
    #[arg(long)]
    seeds: PathBuf,
    /// True pairs; when given, accuracy is reported.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value = "two_hop")]
    algorithm: String,
    #[arg(long, default_value_t = 0)]
    iterations: usize,
    #[arg(long)]
    complete_random: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Comma-separated vertex counts.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    s: Option<f64>,
    /// Comma-separated seed fractions.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// Interpret the beta grid in units of this rate.
    #[arg(long)]
    beta_scale: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    complete_random: bool,
    /// Fill the runtime_ms column.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct CollapseArgs {
    /// Sweep CSV; only median rows are used.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    rescale: String,
    /// Restrict to one algorithm when the CSV holds several.
    #[arg(long)]
    algorithm: Option<String>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: String,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// lemma1_psi, lemma3_R, lemma6_T, criteria_weak or criteria_strong.
    #[arg(long)]
    event: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 100)]
    pairs: usize,
}

#[derive(Args)]
struct RealArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    s: f64,
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value = "two_hop")]
    algorithm: String,
    #[arg(long, default_value_t = 0)]
    iterations: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long)]
    complete_random: bool,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    graph: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seedmatch: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build_global()
            .map_err(|e| Error::Usage(format!("cannot start {k} threads: {e}")))?;
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| Error::io(&cli.out, e))?;
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Synth(a) => synth(&a, seed, &cli.out),
        Command::Match(a) => match_files(&a, seed, &cli.out),
        Command::Sweep(a) => sweep(&a, cli.seed, &cli.out),
        Command::Collapse(a) => collapse(&a, &cli.out),
        Command::Bounds(a) => bounds(&a, seed),
        Command::Real(a) => real(&a, seed, &cli.out),
        Command::Ingest(a) => ingest(&a),
    }
}

fn model(a: &ModelArgs) -> Result<ModelParams> {
    ModelParams::new(a.n, PSpec::parse(&a.p)?.at(a.n), a.s, a.beta)
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn write_edges(g: &Graph, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "# Nodes: {} Edges: {}", g.vertex_count(), g.edge_count()).map_err(io)?;
    for (u, v) in g.edges() {
        writeln!(w, "{u} {v}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn write_mapping(m: &VertexMapping, ids1: &[String], ids2: &[String], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    for (u, v) in m.pairs() {
        writeln!(w, "{} {}", ids1[u], ids2[v]).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn numeric_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn synth(a: &ModelArgs, seed: u64, out: &Path) -> Result<()> {
    let params = model(a)?;
    let inst = make_correlated_pair(&params, substream_id(seed, &[params.n as u64]))?;
    let ids = numeric_ids(params.n);
    write_edges(&inst.g1, &out.join("g1.txt"))?;
    write_edges(&inst.g2, &out.join("g2.txt"))?;
    write_mapping(&inst.truth, &ids, &ids, &out.join("truth.txt"))?;
    write_mapping(&inst.seeds, &ids, &ids, &out.join("seeds.txt"))?;
    println!(
        "n = {}, p = {}, edges = ({}, {}), correct seeds = {}",
        params.n,
        params.p,
        inst.g1.edge_count(),
        inst.g2.edge_count(),
        inst.seeds.agreement(&inst.truth)
    );
    Ok(())
}

/// Reads `id1 id2` pairs.
fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut t = line.split_whitespace();
        match (t.next(), t.next(), t.next()) {
            (Some(a), Some(b), None) => pairs.push((a.to_string(), b.to_string())),
            _ => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: no + 1,
                    message: format!("expected two vertex ids, found `{line}`"),
                })
            }
        }
    }
    Ok(pairs)
}

/// Adds vertices that appear only in mapping files (isolated in the graph).
fn extend_vertices<'a>(list: &mut EdgeList, extra: impl Iterator<Item = &'a String>) -> Result<()> {
    let mut index: HashMap<String, usize> = list.ids.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let before = list.ids.len();
    for id in extra {
        if !index.contains_key(id) {
            index.insert(id.clone(), list.ids.len());
            list.ids.push(id.clone());
        }
    }
    if list.ids.len() > before {
        list.graph = Graph::build(list.ids.len(), list.graph.edges())?;
    }
    Ok(())
}

fn to_mapping(pairs: &[(String, String)], l1: &EdgeList, l2: &EdgeList) -> Result<VertexMapping> {
    let (i1, i2) = (l1.index_of(), l2.index_of());
    let pairs: Vec<(usize, usize)> = pairs.iter().map(|(a, b)| (i1[a.as_str()], i2[b.as_str()])).collect();
    VertexMapping::from_pairs(l1.ids.len(), l2.ids.len(), pairs)
}

fn match_files(a: &MatchArgs, seed: u64, out: &Path) -> Result<()> {
    let algorithm = Algorithm::parse(&a.algorithm)?;
    let mut l1 = ingest_edge_list(&a.g1)?;
    let mut l2 = ingest_edge_list(&a.g2)?;
    let seed_pairs = read_pairs(&a.seeds)?;
    let truth_pairs = a.truth.as_deref().map(read_pairs).transpose()?.unwrap_or_default();
    let all = seed_pairs.iter().chain(&truth_pairs);
    extend_vertices(&mut l1, all.clone().map(|p| &p.0))?;
    extend_vertices(&mut l2, all.map(|p| &p.1))?;
    let seeds = to_mapping(&seed_pairs, &l1, &l2)?;
    let mut result = iterate(&l1.graph, &l2.graph, &seeds, algorithm, a.iterations)?;
    if a.complete_random {
        result = complete_randomly(&result, &mut purpose_stream(seed, Purpose::Algorithm));
    }
    let path = out.join("matching.txt");
    write_mapping(&result.mapping, &l1.ids, &l2.ids, &path)?;
    println!("matched {} of {} vertices", result.matched_count, l1.ids.len());
    if result.failure {
        println!("warning: column collision in parallel argmax");
    }
    if a.truth.is_some() {
        let truth = to_mapping(&truth_pairs, &l1, &l2)?;
        let eligible: Vec<usize> = truth.pairs().map(|(u, _)| u).collect();
        println!("accuracy = {}", accuracy(&result, &truth, Some(&eligible))?);
    }
    Ok(())
}

fn sweep(a: &SweepArgs, seed: Option<u64>, out: &Path) -> Result<()> {
    let mut config = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig {
            algorithm: Algorithm::TWO_HOP,
            iterations: 0,
            n: Vec::new(),
            p: PSpec::Constant(0.0),
            s: 1.0,
            beta: Vec::new(),
            beta_scale: None,
            trials: 10,
            seed: 0,
            complete_random: false,
            timing: false,
        },
    };
    if let Some(alg) = &a.algorithm {
        config.algorithm = Algorithm::parse(alg)?;
    }
    if let Some(l) = a.iterations {
        config.iterations = l;
    }
    if let Some(n) = &a.n {
        config.n = n.clone();
    }
    if let Some(p) = &a.p {
        config.p = PSpec::parse(p)?;
    }
    if let Some(s) = a.s {
        config.s = s;
    }
    if let Some(b) = &a.beta {
        config.beta = b.clone();
    }
    if let Some(scale) = &a.beta_scale {
        config.beta_scale = Some(scale.parse()?);
    }
    if let Some(t) = a.trials {
        config.trials = t;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    config.complete_random |= a.complete_random;
    config.timing |= a.timing;
    if config.n.is_empty() || config.beta.is_empty() {
        return Err(Error::Usage("sweep needs --config or --n, --p and --beta".into()));
    }
    config.validate()?;
    let result = run_sweep(&config)?;
    for warning in &result.skipped {
        eprintln!("skipped {warning}");
    }
    write_csv(&sweep_rows(&result), &out.join("sweep.csv"))?;
    let svg = svg_plot(&output::sweep_series(&result), "beta", "median accuracy")?;
    output::write_text(&out.join("sweep.svg"), &svg)?;
    for pt in &result.points {
        println!("n = {:>6}  beta = {:<10.6}  median accuracy = {:.4}", pt.n, pt.beta, pt.median_accuracy);
    }
    Ok(())
}

fn collapse(a: &CollapseArgs, out: &Path) -> Result<()> {
    let rescale: Rescale = a.rescale.parse()?;
    let rows = read_csv(&a.input)?;
    let mut by_n: Vec<(usize, f64, Vec<(f64, f64)>)> = Vec::new();
    for r in rows.iter().filter(|r| r.trial_or_median == output::MEDIAN) {
        if a.algorithm.as_deref().is_some_and(|alg| alg != r.algorithm) {
            continue;
        }
        match by_n.iter_mut().find(|(n, _, _)| *n == r.n) {
            Some(entry) => entry.2.push((r.beta, r.accuracy)),
            None => by_n.push((r.n, r.p, vec![(r.beta, r.accuracy)])),
        }
    }
    let curves: Vec<Curve> = by_n.into_iter().map(|(n, p, pts)| Curve::new(n, p, pts)).collect();
    let report = collapse_analysis(&curves, rescale)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for level in &report.levels {
        for (n, raw, scaled) in &level.crossings {
            println!(
                "level {:.2}  n = {:>6}  beta* = {}  rescaled = {}",
                level.level,
                n,
                raw.map_or("-".into(), |v| v.to_string()),
                scaled.map_or("-".into(), |v| v.to_string())
            );
        }
        println!(
            "level {:.2}  spread = {}",
            level.level,
            level.spread.map_or("undefined".into(), |v| v.to_string())
        );
    }
    let series: Vec<Series> = report
        .curves
        .iter()
        .map(|(n, pts)| Series {
            label: format!("n = {n}"),
            points: pts.clone(),
        })
        .collect();
    let svg = svg_plot(&series, rescale.axis_label(), "median accuracy")?;
    output::write_text(&out.join(format!("collapse_{}.svg", rescale.name())), &svg)
}

fn bounds(a: &BoundsArgs, seed: u64) -> Result<()> {
    let params = ModelParams::new(a.n, PSpec::parse(&a.p)?.at(a.n), a.s, a.beta)?;
    match &a.event {
        None => {
            let report = bound_report(&params, None)?;
            print!("{}", toml::to_string(&report).map_err(|e| Error::domain(e.to_string()))?);
        }
        Some(name) => {
            let event = Event::parse(name)?;
            let r = empirical_event_check(&params, event, a.trials, a.pairs, seed)?;
            println!("event = \"{}\"", event.name());
            println!("violations = {}", r.violations);
            println!("samples = {}", r.samples);
            println!("rate = {}", r.rate());
        }
    }
    Ok(())
}

fn real(a: &RealArgs, seed: u64, out: &Path) -> Result<()> {
    let list = ingest_edge_list(&a.graph)?;
    let params = RealParams {
        s: a.s,
        alpha: a.alpha,
        beta: a.beta,
        algorithm: Algorithm::parse(&a.algorithm)?,
        iterations: a.iterations,
        complete_random: a.complete_random,
    };
    let path = out.join("real.csv");
    let mut w = create(&path)?;
    let io = |e| Error::io(&path, e);
    writeln!(w, "algorithm,trial,beta,accuracy,ceiling,common,matched,seed").map_err(io)?;
    for t in 0..a.trials {
        let id = substream_id(seed, &[t as u64]);
        let r = real_protocol(&list.graph, &params, id)?;
        writeln!(
            w,
            "{},{t},{},{},{},{},{},{id}",
            params.algorithm, a.beta, r.accuracy, r.ceiling, r.common, r.matched_count
        )
        .map_err(io)?;
        println!("trial {t}: accuracy = {:.4}, ceiling = {:.4}", r.accuracy, r.ceiling);
    }
    w.flush().map_err(io)
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let list = ingest_edge_list(&a.graph)?;
    println!("vertices = {}", list.graph.vertex_count());
    println!("edges = {}", list.graph.edge_count());
    println!("edge_lines = {}", list.lines);
    if let Some((n, m)) = list.declared {
        println!("declared_vertices = {n}");
        println!("declared_edges = {m}");
    }
    let isolated = list.graph.isolated_vertices().count();
    println!("isolated = {isolated}");
    Ok(())
}
