//! `cartlabel` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use cartlabel::construct::{construct_with, ConstructOptions, ConstructionContext};
use cartlabel::graph::{Graph, ProductGraph};
use cartlabel::io::{parse_dimacs, to_dimacs, GraphFile};
use cartlabel::lab::{canonical_certificate, run_batch, run_sandwich_experiment, CertificateSpec, ExperimentReport, InstanceSpec};
use cartlabel::labelling::{verify_cyclic, verify_linear, HVector, Labelling};
use cartlabel::solver::{certificate_check, chromatic_with, solve, Invariant, SolveOptions, SolveResult, SolveValue, DEFAULT_BUDGET};
use cartlabel::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

const EXIT_VERIFY: u8 = 1;
const EXIT_STUCK: u8 = 2;
const EXIT_UNRESOLVED: u8 = 3;
const EXIT_INVALID: u8 = 4;

#[derive(Parser)]
#[command(name = "cartlabel", version, about = "Distance-constrained labellings of Cartesian products")]
struct Cli {
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Format for graph files read or written.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dimacs,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a named graph.
    Gen(GenArgs),
    /// Cartesian product of graph files, in the order given.
    Product {
        #[arg(required = true, num_args = 1..)]
        graphs: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The l-th power of a graph.
    Power {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        l: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a labelling of a product by the offset construction.
    Construct(ConstructArgs),
    /// Exact value of a labelling invariant or chromatic number.
    Solve(SolveArgs),
    /// Check a labelling against a graph.
    Verify(VerifyArgs),
    /// Validate a lower-bound certificate.
    Certify(CertifyArgs),
    /// Run instance specifications and report what was reproduced.
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Summary table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-check an experiment on random graphs between the certificate and
    /// the product.
    Sandwich {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Complete,
    Path,
    Cycle,
    Star,
    Broom,
    Hamming,
    Hypercube,
    Edges,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    orders: Vec<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Broom diameter.
    #[arg(long)]
    diameter: Option<usize>,
    /// Edge list such as `0-1,1-2`.
    #[arg(long, value_delimiter = ',')]
    edges: Vec<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["hypercube", "graph"])]
    hamming: Vec<usize>,
    #[arg(long, conflicts_with = "graph")]
    hypercube: Option<usize>,
    /// Product graph file.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    l: usize,
    #[arg(long)]
    ql: usize,
    /// Leading separation to verify against; defaults to `ql`.
    #[arg(long)]
    h: Option<u64>,
    /// Labelling file.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Dead ends to back out of before giving up.
    #[arg(long)]
    backtrack_budget: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Lambda,
    Nlambda,
    Sigma,
    Nsigma,
    Chromatic,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    variant: Variant,
    #[arg(long, value_delimiter = ',')]
    h: Vec<u64>,
    /// Power of the graph to colour (chromatic only).
    #[arg(long, default_value_t = 1)]
    l: usize,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Plain exhaustive search.
    #[arg(long)]
    oracle: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    labelling: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    h: Vec<u64>,
    /// Cyclic modulus; a cyclic labelling file supplies its own.
    #[arg(long)]
    k: Option<u64>,
    /// Also fail when the labelling has a hole.
    #[arg(long)]
    no_hole: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    l: usize,
    /// Explicit vertex set.
    #[arg(long, value_delimiter = ',', conflicts_with = "subsets")]
    vertices: Vec<usize>,
    /// One subset per factor, `;`-separated, e.g. `0,1,2;0,1;0`.
    #[arg(long)]
    subsets: Option<String>,
    /// Separation for the canonical certificate of a product.
    #[arg(long)]
    ql: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::ConstructionStuck { .. }) => EXIT_STUCK,
        Some(Error::Unresolved { .. }) => EXIT_UNRESOLVED,
        Some(Error::CertificateRejected(_)) => EXIT_VERIFY,
        _ => EXIT_INVALID,
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build_global()?;
    let format = cli.format;
    match cli.command {
        Command::Gen(args) => gen(args, format),
        Command::Product { graphs, output } => {
            let mut factors = Vec::new();
            for p in &graphs {
                match read_graph(p, format)? {
                    GraphFile::Product(pg) => factors.extend(pg.factors().iter().cloned()),
                    GraphFile::Plain(g) => factors.push(g),
                }
            }
            write_graph(&GraphFile::Product(ProductGraph::cartesian(factors)?), output.as_deref(), format)?;
            Ok(0)
        }
        Command::Power { graph, l, output } => {
            let g = read_graph(&graph, format)?;
            let p = g.graph().power(l)?;
            let name = format!("({})^{l}", g.graph().name());
            write_graph(&GraphFile::Plain(p.named(name)), output.as_deref(), format)?;
            Ok(0)
        }
        Command::Construct(args) => construct(args, format),
        Command::Solve(args) => solve_cmd(args, format),
        Command::Verify(args) => verify(args, format),
        Command::Certify(args) => certify(args, format),
        Command::Experiment { spec, output, csv } => experiment(&spec, output.as_deref(), csv.as_deref()),
        Command::Sandwich { spec, samples, seed, output } => {
            let specs = read_specs(&spec)?;
            let [spec] = specs.as_slice() else { bail!(Error::InvalidArgument("sandwich takes exactly one spec".into())) };
            let samples = samples.or(spec.samples).unwrap_or(20);
            let report = run_sandwich_experiment(spec, samples, seed)?;
            emit(&serde_json::to_value(&report)?, output.as_deref())?;
            eprintln!("{}/{} samples reproduced", report.reproduced, report.samples.len());
            Ok(if report.all_reproduced { 0 } else { EXIT_VERIFY })
        }
    }
}

fn need<T>(v: Option<T>, flag: &str) -> anyhow::Result<T> {
    v.ok_or_else(|| anyhow!(Error::InvalidArgument(format!("missing --{flag}"))))
}

fn gen(args: GenArgs, format: Format) -> anyhow::Result<u8> {
    let file = match args.kind {
        Kind::Complete => GraphFile::Plain(Graph::complete(need(args.n, "n")?)?),
        Kind::Path => GraphFile::Plain(Graph::path(need(args.n, "n")?)?),
        Kind::Cycle => GraphFile::Plain(Graph::cycle(need(args.n, "n")?)?),
        Kind::Star => GraphFile::Plain(Graph::star(need(args.n, "n")?)?),
        Kind::Broom => GraphFile::Plain(Graph::broom(need(args.n, "n")?, need(args.diameter, "diameter")?)?),
        Kind::Hamming => {
            if args.orders.is_empty() {
                bail!(Error::InvalidArgument("missing --orders".into()));
            }
            GraphFile::Product(ProductGraph::hamming(&args.orders)?)
        }
        Kind::Hypercube => GraphFile::Product(ProductGraph::hypercube(need(args.d, "d")?)?),
        Kind::Edges => {
            let edges = args.edges.iter().map(|e| parse_edge(e)).collect::<anyhow::Result<Vec<_>>>()?;
            GraphFile::Plain(Graph::from_edges(need(args.n, "n")?, &edges)?)
        }
    };
    write_graph(&file, args.output.as_deref(), format)?;
    Ok(0)
}

fn parse_edge(s: &str) -> anyhow::Result<(usize, usize)> {
    let bad = || anyhow!(Error::Parse(format!("edge `{s}` is not of the form u-v")));
    let (u, v) = s.trim().split_once('-').ok_or_else(bad)?;
    Ok((u.trim().parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?))
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_graph(path: &Path, format: Format) -> anyhow::Result<GraphFile> {
    let text = read_text(path)?;
    let file = match format {
        Format::Json => GraphFile::from_json(&text),
        Format::Dimacs => parse_dimacs(&text).map(GraphFile::Plain),
    };
    file.with_context(|| format!("parsing {}", path.display()))
}

fn write_graph(file: &GraphFile, output: Option<&Path>, format: Format) -> anyhow::Result<()> {
    let text = match (format, file) {
        (Format::Dimacs, f) => to_dimacs(f.graph()),
        (Format::Json, GraphFile::Plain(g)) => pretty(&serde_json::to_value(g)?)?,
        (Format::Json, GraphFile::Product(pg)) => pretty(&serde_json::to_value(pg)?)?,
    };
    write_text(&text, output)
}

fn pretty(v: &serde_json::Value) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn write_text(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(v: &serde_json::Value, output: Option<&Path>) -> anyhow::Result<()> {
    write_text(&pretty(v)?, output)
}

fn construct(args: ConstructArgs, format: Format) -> anyhow::Result<u8> {
    let pg = if !args.hamming.is_empty() {
        ProductGraph::hamming(&args.hamming)?
    } else if let Some(d) = args.hypercube {
        ProductGraph::hypercube(d)?
    } else if let Some(path) = &args.graph {
        match read_graph(path, format)? {
            GraphFile::Product(pg) => pg,
            GraphFile::Plain(_) => bail!(Error::InvalidArgument("construct needs a product graph file".into())),
        }
    } else {
        bail!(Error::InvalidArgument("one of --hamming, --hypercube or --graph is required".into()));
    };
    let h = args.h.unwrap_or(args.ql as u64);
    if h < 1 || h > args.ql as u64 {
        bail!(Error::InvalidArgument(format!("need 1 <= h <= ql, got h = {h}")));
    }
    let hv = HVector::leading(h, args.l)?;
    let ctx = ConstructionContext::from_product(&pg, args.l, args.ql)?;
    let mut opts = ConstructOptions::default();
    if let Some(b) = args.backtrack_budget {
        opts.backtrack_budget = b;
    }
    let c = construct_with(&ctx, opts)?;
    let k = c.labelling.modulus().expect("constructed labellings are cyclic");
    let cyc = verify_cyclic(pg.graph(), &hv, &c.labelling, k)?;
    let linear = c.labelling.to_linear();
    let lin = verify_linear(pg.graph(), &hv, &linear)?;
    let pass = cyc.pass && cyc.no_hole && lin.pass && lin.no_hole;

    let trace = serde_json::to_value(c.trace())?;
    if let Some(p) = &args.trace {
        emit(&trace, Some(p))?;
    }
    let mut report = json!({
        "graph": pg.graph().name(),
        "n": pg.order(),
        "l": args.l,
        "h": h,
        "q_l": args.ql,
        "k": k,
        "span": linear.span(),
        "guaranteed": c.guaranteed,
        "backtracks": c.backtracks,
        "cyclic_check": check(&cyc, c.labelling.span()),
        "linear_check": check(&lin, linear.span()),
        "pass": pass,
    });
    match &args.output {
        Some(p) => emit(&serde_json::to_value(&c.labelling)?, Some(p))?,
        None => report["labelling"] = serde_json::to_value(&c.labelling)?,
    }
    if args.trace.is_none() {
        report["trace"] = trace;
    }
    emit(&report, None)?;
    Ok(if pass { 0 } else { EXIT_VERIFY })
}

fn check(r: &cartlabel::labelling::VerificationReport, span: u64) -> serde_json::Value {
    json!({
        "pass": r.pass,
        "no_hole": r.no_hole,
        "span": span,
        "violations": r.violations.len(),
        "pairs_checked": r.total_pairs(),
    })
}

fn solve_cmd(args: SolveArgs, format: Format) -> anyhow::Result<u8> {
    let file = read_graph(&args.graph, format)?;
    let g = file.graph();
    let opts = SolveOptions { budget: args.budget, oracle: args.oracle };
    let (invariant, result) = match args.variant {
        Variant::Chromatic => {
            let p = if args.l == 1 { g.clone() } else { g.power(args.l)? };
            (Invariant::Chromatic, chromatic_with(&p, opts))
        }
        v => {
            let inv = match v {
                Variant::Lambda => Invariant::Lambda,
                Variant::Nlambda => Invariant::Nlambda,
                Variant::Sigma => Invariant::Sigma,
                _ => Invariant::Nsigma,
            };
            if args.h.is_empty() {
                bail!(Error::InvalidArgument("missing --h".into()));
            }
            (inv, solve(g, &HVector::new(args.h.clone())?, inv, opts))
        }
    };
    match result {
        Ok(r) => {
            emit(&serde_json::to_value(&r)?, args.output.as_deref())?;
            Ok(0)
        }
        Err(Error::Unresolved { lo, hi }) => {
            let r = SolveResult { invariant, value: SolveValue::Unresolved, witness: None, nodes: args.budget, spans_tested: vec![] };
            emit(&serde_json::to_value(&r)?, args.output.as_deref())?;
            let hi = hi.map_or("unknown".to_string(), |h| h.to_string());
            eprintln!("budget of {} nodes exhausted; value between {lo} and {hi}", args.budget);
            Ok(EXIT_UNRESOLVED)
        }
        Err(e) => Err(e.into()),
    }
}

fn verify(args: VerifyArgs, format: Format) -> anyhow::Result<u8> {
    let file = read_graph(&args.graph, format)?;
    let g = file.graph();
    let phi: Labelling = serde_json::from_str(&read_text(&args.labelling)?)
        .with_context(|| format!("parsing {}", args.labelling.display()))
        .map_err(|e| anyhow!(Error::Parse(format!("{e:#}"))))?;
    let h = HVector::new(args.h.clone())?;
    let report = match args.k.or(phi.modulus()) {
        Some(k) => {
            let phi = if phi.modulus() == Some(k) { phi } else { Labelling::cyclic(phi.labels().to_vec(), k)? };
            verify_cyclic(g, &h, &phi, k)?
        }
        None => verify_linear(g, &h, &phi)?,
    };
    emit(&serde_json::to_value(&report)?, args.output.as_deref())?;
    let ok = report.pass && (!args.no_hole || report.no_hole);
    if !ok {
        eprintln!("verification failed: {} violations, no_hole = {}", report.violations.len(), report.no_hole);
    }
    Ok(if ok { 0 } else { EXIT_VERIFY })
}

fn certify(args: CertifyArgs, format: Format) -> anyhow::Result<u8> {
    let file = read_graph(&args.graph, format)?;
    let g = file.graph();
    let report = if !args.vertices.is_empty() {
        let bound = certificate_check(g, &args.vertices, args.l)?;
        let diameter = g.induced_subgraph(&args.vertices)?.graph.diameter();
        json!({"source": "vertices", "order": args.vertices.len(), "diameter": diameter, "bound": bound})
    } else {
        let Some(pg) = file.product() else {
            bail!(Error::InvalidArgument("a plain graph needs --vertices".into()));
        };
        let supplied = match &args.subsets {
            Some(s) => Some(CertificateSpec::FactorSubsets(parse_subsets(s)?)),
            None => None,
        };
        let ql = match (&supplied, args.ql) {
            (_, Some(q)) => q,
            (Some(_), None) => 1,
            (None, None) => bail!(Error::InvalidArgument("missing --ql or --subsets".into())),
        };
        serde_json::to_value(canonical_certificate(pg, args.l, ql, supplied.as_ref())?)?
    };
    emit(&report, args.output.as_deref())?;
    Ok(0)
}

fn parse_subsets(s: &str) -> anyhow::Result<Vec<Vec<usize>>> {
    s.split(';')
        .map(|part| {
            part.split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| anyhow!(Error::Parse(format!("bad vertex `{x}` in --subsets")))))
                .collect()
        })
        .collect()
}

fn read_specs(path: &Path) -> anyhow::Result<Vec<InstanceSpec>> {
    let value: serde_json::Value = serde_json::from_str(&read_text(path)?).map_err(|e| anyhow!(Error::Json(e)))?;
    let specs = if value.is_array() { serde_json::from_value(value) } else { serde_json::from_value(value).map(|s| vec![s]) };
    let specs: Vec<InstanceSpec> = specs.map_err(|e| anyhow!(Error::Json(e)))?;
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

fn experiment(spec: &Path, output: Option<&Path>, csv_path: Option<&Path>) -> anyhow::Result<u8> {
    let text = read_text(spec)?;
    let single = !text.trim_start().starts_with('[');
    let specs = read_specs(spec)?;
    let reports: Vec<ExperimentReport> = run_batch(&specs).into_iter().collect::<Result<_, _>>()?;
    let value = if single { serde_json::to_value(&reports[0])? } else { serde_json::to_value(&reports)? };
    emit(&value, output)?;
    if let Some(p) = csv_path {
        let mut w = csv::Writer::from_path(p).with_context(|| format!("writing {}", p.display()))?;
        for r in &reports {
            w.serialize(r.summary_row())?;
        }
        w.flush()?;
    }
    for r in &reports {
        let row = r.summary_row();
        eprintln!("{}: constructed {}, certificate {}, reproduced {}", row.instance, row.constructed, row.certificate, row.reproduced);
    }
    Ok(if reports.iter().all(|r| r.reproduced) {
        0
    } else if reports.iter().any(|r| r.construction.stuck_at.is_some()) {
        EXIT_STUCK
    } else {
        EXIT_VERIFY
    })
}
