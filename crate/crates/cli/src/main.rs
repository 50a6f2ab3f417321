//! `mvm`: kernelize, match, generate, verify and benchmark bipartite graphs.
//!
//! Exit status is 0 on a valid verdict, 2 when verification fails and 1 on
//! usage or I/O errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mvm_core::graph::{random_permute, BipartiteGraph, BipartiteView};
use mvm_core::instances::{gen_random_bipartite, gen_worst_case, WorstCaseSpec};
use mvm_core::io::{load_matching_pairs, save_edge_list, save_matching, write_edge_list};
use mvm_core::kernel::kernelize;
use mvm_core::matching::{brute_force_max, verify_pairs};
use mvm_core::pipeline::{emit_report, run_pipeline, Format, InputSource, ReportFormat, RunConfig, RunStrategy};
use mvm_core::reconstruct::KernelGraph;

#[derive(Parser)]
#[command(name = "mvm", version, about = "Karp-Sipser kernelization with multi-vertex merging")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a graph and print the kernel counters as JSON.
    Kernelize {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "mvm-balanced")]
        strategy: RunStrategy,
        /// Write the kernel as an edge list in kernel-local ids.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a maximum matching end to end and print a report.
    Match {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value = "mvm-balanced")]
        strategy: RunStrategy,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        /// Write the matching as `u v` lines in input ids.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportArg::Json)]
        report: ReportArg,
        /// Cross-check the size against an independent small-graph oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Generate an instance and write it as an edge list.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        /// Vertices per copy (worst-case) or left vertices (random).
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        copies: usize,
        /// Right vertices for random graphs, default `n`.
        #[arg(long)]
        n_right: Option<usize>,
        /// Edges for random graphs, default `3n`.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination file, stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a matching file against a graph.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        /// Matching as `u v` lines.
        #[arg(long)]
        matching: PathBuf,
        /// Also require the matching to be maximum.
        #[arg(long)]
        oracle: bool,
    },
    /// Run strategies over inputs and emit one report per pair.
    Bench {
        /// Graph files or generator descriptors; repeatable.
        #[arg(long = "input", required = true)]
        inputs: Vec<String>,
        #[arg(long)]
        format: Option<Format>,
        /// Repeatable; all four strategies if omitted.
        #[arg(long = "strategy")]
        strategies: Vec<RunStrategy>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        permute: bool,
        #[arg(long, default_value_t = 0.0)]
        slack: f64,
        #[arg(long, default_value_t = 5)]
        repeat: usize,
        /// Report destination, stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportArg::Json)]
        report: ReportArg,
        #[arg(long)]
        oracle: bool,
    },
}

#[derive(Args)]
struct InputArgs {
    /// Graph file, or `worst-case:n=N[,copies=C]`, or `random:n_left=A,n_right=B,m=M`.
    #[arg(long)]
    input: String,
    /// File format; guessed from the extension if omitted.
    #[arg(long)]
    format: Option<Format>,
    /// Generator seed, and the id shuffle seed with `--permute`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shuffle vertex ids before reducing.
    #[arg(long)]
    permute: bool,
    /// Spare capacity per adjacency table, as a fraction of its degree.
    #[arg(long, default_value_t = 0.0)]
    slack: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportArg {
    Json,
    Csv,
}

impl From<ReportArg> for ReportFormat {
    fn from(r: ReportArg) -> Self {
        match r {
            ReportArg::Json => ReportFormat::Json,
            ReportArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    WorstCase,
    Random,
}

fn parse_params(body: &str) -> Result<Vec<(&str, usize)>> {
    body.split(',')
        .map(|kv| {
            let (k, v) = kv.split_once('=').with_context(|| format!("expected key=value, got `{kv}`"))?;
            Ok((k, v.parse().with_context(|| format!("bad number in `{kv}`"))?))
        })
        .collect()
}

fn param(params: &[(&str, usize)], key: &str) -> Option<usize> {
    params.iter().find(|(k, _)| *k == key).map(|&(_, v)| v)
}

fn resolve_input(input: &str, format: Option<Format>, seed: u64) -> Result<InputSource> {
    if let Some(body) = input.strip_prefix("worst-case:") {
        let p = parse_params(body)?;
        let n = param(&p, "n").context("worst-case descriptor needs n")?;
        let mut spec = WorstCaseSpec::new(n, seed);
        if let Some(c) = param(&p, "copies") {
            spec.copies = c;
        }
        return Ok(InputSource::WorstCase(spec));
    }
    if let Some(body) = input.strip_prefix("random:") {
        let p = parse_params(body)?;
        let need = |k| param(&p, k).with_context(|| format!("random descriptor needs {k}"));
        return Ok(InputSource::Random { n_left: need("n_left")?, n_right: need("n_right")?, m: need("m")?, seed });
    }
    let path = PathBuf::from(input);
    let format = format.unwrap_or_else(|| Format::from_path(&path));
    Ok(InputSource::File { path, format })
}

impl InputArgs {
    fn source(&self) -> Result<InputSource> {
        resolve_input(&self.input, self.format, self.seed)
    }

    fn config(&self, strategy: RunStrategy) -> Result<RunConfig> {
        let mut cfg = RunConfig::new(self.source()?, strategy);
        cfg.permute_seed = self.permute.then_some(self.seed);
        cfg.slack = self.slack;
        Ok(cfg)
    }
}

fn kernel_as_graph(kg: &KernelGraph) -> Result<BipartiteGraph> {
    let edges: Vec<(u32, u32)> =
        (0..kg.n_left()).flat_map(|u| kg.neighbors(u).iter().map(move |&v| (u as u32, v))).collect();
    Ok(BipartiteGraph::from_edges(kg.n_left(), kg.n_right(), &edges)?)
}

fn cmd_kernelize(input: &InputArgs, strategy: RunStrategy, out: Option<&Path>) -> Result<bool> {
    let RunStrategy::Kernel(strategy) = strategy else {
        bail!("kernelize needs a kernel strategy, not `none`");
    };
    let source = input.source()?;
    let mut g = source.load()?;
    if input.permute {
        g = random_permute(&g, input.seed);
    }
    let t = Instant::now();
    let mut result = kernelize(&g, strategy, input.slack);
    let seconds = t.elapsed().as_secs_f64();
    let kg = KernelGraph::from_store(&mut result.kernel);
    if let Some(path) = out {
        save_edge_list(&kernel_as_graph(&kg)?, path)?;
    }
    let line = serde_json::json!({
        "input": source.describe(),
        "strategy": strategy.name(),
        "n_left": g.n_left(),
        "n_right": g.n_right(),
        "m": g.m(),
        "t_kernelize": seconds,
        "rule1_matched": result.partial.size(),
        "stats": result.stats,
    });
    println!("{line}");
    Ok(true)
}

fn cmd_match(
    input: &InputArgs,
    strategy: RunStrategy,
    repeat: usize,
    out: Option<&Path>,
    report: ReportArg,
    oracle: bool,
) -> Result<bool> {
    let mut cfg = input.config(strategy)?;
    cfg.repeat = repeat;
    cfg.oracle = oracle;
    let outcome = run_pipeline(&cfg)?;
    if let Some(path) = out {
        save_matching(&outcome.matching, path)?;
    }
    emit_report(std::slice::from_ref(&outcome.report), None, report.into())?;
    Ok(outcome.report.valid)
}

fn cmd_gen(
    family: Family,
    n: usize,
    copies: usize,
    n_right: Option<usize>,
    m: Option<usize>,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool> {
    let g = match family {
        Family::WorstCase => gen_worst_case(&WorstCaseSpec { n_per_instance: n, copies, seed })?,
        Family::Random => gen_random_bipartite(n, n_right.unwrap_or(n), m.unwrap_or(3 * n), seed)?,
    };
    match out {
        Some(path) => save_edge_list(&g, path)?,
        None => write_edge_list(&g, std::io::stdout().lock())?,
    }
    Ok(true)
}

fn cmd_verify(input: &InputArgs, matching: &Path, oracle: bool) -> Result<bool> {
    let g = input.source()?.load()?;
    let pairs = load_matching_pairs(matching)?;
    let report = verify_pairs(&g, &pairs);
    let best = if oracle { Some(brute_force_max(&g)?) } else { None };
    let maximum = best.map(|b| b == report.size);
    let line = serde_json::json!({
        "valid": report.valid,
        "size": report.size,
        "violations": report.violations,
        "oracle_size": best,
        "maximum": maximum,
    });
    println!("{line}");
    Ok(report.valid && maximum != Some(false))
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    inputs: &[String],
    format: Option<Format>,
    strategies: &[RunStrategy],
    seed: u64,
    permute: bool,
    slack: f64,
    repeat: usize,
    out: Option<&Path>,
    report: ReportArg,
    oracle: bool,
) -> Result<bool> {
    let strategies = if strategies.is_empty() { &RunStrategy::ALL[..] } else { strategies };
    let mut reports = Vec::new();
    for input in inputs {
        let source = resolve_input(input, format, seed)?;
        for &s in strategies {
            let mut cfg = RunConfig::new(source.clone(), s);
            cfg.permute_seed = permute.then_some(seed);
            cfg.slack = slack;
            cfg.repeat = repeat;
            cfg.oracle = oracle;
            let outcome = run_pipeline(&cfg).with_context(|| format!("{} with {s}", source.describe()))?;
            reports.push(outcome.report);
        }
    }
    emit_report(&reports, out, report.into())?;
    Ok(reports.iter().all(|r| r.valid))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Kernelize { input, strategy, out } => cmd_kernelize(&input, strategy, out.as_deref()),
        Command::Match { input, strategy, repeat, out, report, oracle } => {
            cmd_match(&input, strategy, repeat, out.as_deref(), report, oracle)
        }
        Command::Gen { family, n, copies, n_right, m, seed, out } => {
            cmd_gen(family, n, copies, n_right, m, seed, out.as_deref())
        }
        Command::Verify { input, matching, oracle } => cmd_verify(&input, &matching, oracle),
        Command::Bench { inputs, format, strategies, seed, permute, slack, repeat, out, report, oracle } => {
            cmd_bench(&inputs, format, &strategies, seed, permute, slack, repeat, out.as_deref(), report, oracle)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            let _ = std::io::stdout().flush();
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
