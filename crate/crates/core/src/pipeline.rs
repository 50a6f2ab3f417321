//! End-to-end runs and machine-readable reports.
//!
//! A run is load, optional permutation, optional kernelization, exact
//! matching, reconstruction and verification. Each phase is timed with a
//! monotonic clock; everything else in a report is deterministic.
//!
//! Report fields (JSON keys, CSV columns):
//!
//! | field | meaning |
//! |---|---|
//! | `input` | file path or generator descriptor |
//! | `strategy` | `mvm-balanced`, `mvm-greedy`, `kasi-baseline` or `none` |
//! | `permute_seed` | seed of the id shuffle, empty if none |
//! | `slack` | spare table capacity fraction |
//! | `repeat` | runs averaged into the times |
//! | `n_left`, `n_right`, `m` | input sizes |
//! | `t_load` .. `t_verify` | mean phase wall times in seconds |
//! | `merge_ops` .. `boundary_overlaps` | kernel counters, empty for `none` |
//! | `per_round_merge_ops` | `;`-separated merge counts per round |
//! | `kernel_matching_size` | matching size on the kernel |
//! | `matching_size` | size of the final matching |
//! | `size_identity` | final size = kernel size + Rule 1 + merged |
//! | `valid` | verification verdict |
//! | `violations` | number of verification violations |
//! | `oracle_size` | independent maximum, when requested and in range |

use std::fmt;
use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{permutation_pair, BipartiteGraph};
use crate::instances::{gen_random_bipartite, gen_worst_case, WorstCaseSpec};
use crate::io::{load_edge_list, load_matrix_market};
use crate::kernel::{kernelize, KernelStats, Strategy};
use crate::matching::{brute_force_max, maximum_matching, verify_matching, Matching};
use crate::reconstruct::{reconstruct, KernelGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Mtx,
    EdgeList,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mtx" => Ok(Format::Mtx),
            "edgelist" => Ok(Format::EdgeList),
            _ => Err(Error::InvalidSpec(format!("unknown format `{s}`, expected mtx or edgelist"))),
        }
    }
}

impl Format {
    /// Guesses from the file extension; anything but `.mtx` is an edge list.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("mtx") => Format::Mtx,
            _ => Format::EdgeList,
        }
    }
}

/// Kernelization strategy, or `None` to match the input directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStrategy {
    Kernel(Strategy),
    None,
}

impl RunStrategy {
    pub const ALL: [RunStrategy; 4] = [
        RunStrategy::Kernel(Strategy::Balanced),
        RunStrategy::Kernel(Strategy::Greedy),
        RunStrategy::Kernel(Strategy::Baseline),
        RunStrategy::None,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RunStrategy::Kernel(s) => s.name(),
            RunStrategy::None => "none",
        }
    }
}

impl fmt::Display for RunStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RunStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RunStrategy::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| {
            Error::InvalidSpec(format!(
                "unknown strategy `{s}`, expected mvm-balanced, mvm-greedy, kasi-baseline or none"
            ))
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InputSource {
    File { path: PathBuf, format: Format },
    WorstCase(WorstCaseSpec),
    Random { n_left: usize, n_right: usize, m: usize, seed: u64 },
}

impl InputSource {
    pub fn describe(&self) -> String {
        match self {
            InputSource::File { path, .. } => path.display().to_string(),
            InputSource::WorstCase(s) => {
                format!("worst-case:n={},copies={},seed={}", s.n_per_instance, s.copies, s.seed)
            }
            InputSource::Random { n_left, n_right, m, seed } => {
                format!("random:n_left={n_left},n_right={n_right},m={m},seed={seed}")
            }
        }
    }

    pub fn load(&self) -> Result<BipartiteGraph> {
        match self {
            InputSource::File { path, format: Format::Mtx } => load_matrix_market(path),
            InputSource::File { path, format: Format::EdgeList } => load_edge_list(path),
            InputSource::WorstCase(s) => gen_worst_case(s),
            InputSource::Random { n_left, n_right, m, seed } => gen_random_bipartite(*n_left, *n_right, *m, *seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: InputSource,
    pub strategy: RunStrategy,
    pub permute_seed: Option<u64>,
    pub slack: f64,
    pub repeat: usize,
    pub oracle: bool,
}

impl RunConfig {
    pub fn new(input: InputSource, strategy: RunStrategy) -> Self {
        RunConfig { input, strategy, permute_seed: None, slack: 0.0, repeat: 1, oracle: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub load: f64,
    pub kernelize: f64,
    #[serde(rename = "match")]
    pub matching: f64,
    pub reconstruct: f64,
    pub verify: f64,
}

impl PhaseTimes {
    fn add(&mut self, o: &PhaseTimes) {
        self.load += o.load;
        self.kernelize += o.kernelize;
        self.matching += o.matching;
        self.reconstruct += o.reconstruct;
        self.verify += o.verify;
    }

    fn scale(&mut self, f: f64) {
        self.load *= f;
        self.kernelize *= f;
        self.matching *= f;
        self.reconstruct *= f;
        self.verify *= f;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub input: String,
    pub strategy: String,
    pub permute_seed: Option<u64>,
    pub slack: f64,
    pub repeat: usize,
    pub n_left: usize,
    pub n_right: usize,
    pub m: usize,
    pub times: PhaseTimes,
    pub stats: Option<KernelStats>,
    pub kernel_matching_size: usize,
    pub matching_size: usize,
    pub size_identity: Option<bool>,
    pub valid: bool,
    pub violations: usize,
    pub oracle_size: Option<usize>,
}

impl RunReport {
    /// The same report with every wall time zeroed.
    pub fn without_times(&self) -> RunReport {
        RunReport { times: PhaseTimes::default(), ..self.clone() }
    }
}

pub struct RunOutcome {
    pub report: RunReport,
    /// Final matching in the input's own ids.
    pub matching: Matching,
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Runs the pipeline `cfg.repeat` times and reports mean phase times.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutcome> {
    let repeat = cfg.repeat.max(1);
    let mut total = PhaseTimes::default();
    let mut last: Option<RunOutcome> = None;
    for _ in 0..repeat {
        let t = Instant::now();
        let g = cfg.input.load()?;
        let load = secs(t);
        let mut out = run_on_graph(&g, &cfg.input.describe(), cfg)?;
        out.report.times.load = load;
        total.add(&out.report.times);
        if let Some(prev) = &last {
            if prev.report.without_times() != out.report.without_times() {
                return Err(Error::Report("repeated runs disagree".into()));
            }
        }
        last = Some(out);
    }
    let mut out = last.expect("at least one run");
    total.scale(1.0 / repeat as f64);
    out.report.times = total;
    out.report.repeat = repeat;
    Ok(out)
}

/// One run on an already loaded graph. `times.load` is left at zero.
pub fn run_on_graph(g: &BipartiteGraph, input: &str, cfg: &RunConfig) -> Result<RunOutcome> {
    let mut times = PhaseTimes::default();
    let permuted;
    let perms = cfg.permute_seed.map(|s| permutation_pair(g.n_left(), g.n_right(), s));
    let work = match &perms {
        Some((lp, rp)) => {
            permuted = g.relabel(lp, rp);
            &permuted
        }
        None => g,
    };

    let (matching, kernel_size, stats, identity) = match cfg.strategy {
        RunStrategy::None => {
            let t = Instant::now();
            let m = maximum_matching(work);
            times.matching = secs(t);
            let size = m.size();
            (m, size, None, None)
        }
        RunStrategy::Kernel(strategy) => {
            let t = Instant::now();
            let mut result = kernelize(work, strategy, cfg.slack);
            times.kernelize = secs(t);
            let t = Instant::now();
            let kg = KernelGraph::from_store(&mut result.kernel);
            let km = maximum_matching(&kg);
            times.matching = secs(t);
            let t = Instant::now();
            let m = reconstruct(&kg, &km, &result)?;
            times.reconstruct = secs(t);
            let s = &result.stats;
            let identity = m.size() == km.size() + (s.r1_matches + s.merged_count) as usize;
            (m, km.size(), Some(result.stats), Some(identity))
        }
    };

    let t = Instant::now();
    let verdict = verify_matching(work, &matching);
    let oracle_size = if cfg.oracle { brute_force_max(work).ok() } else { None };
    times.verify = secs(t);
    let oracle_ok = oracle_size.is_none_or(|o| o == matching.size());

    let matching = match &perms {
        Some((lp, rp)) => unpermute(&matching, lp, rp),
        None => matching,
    };
    let report = RunReport {
        input: input.to_string(),
        strategy: cfg.strategy.name().to_string(),
        permute_seed: cfg.permute_seed,
        slack: cfg.slack,
        repeat: 1,
        n_left: g.n_left(),
        n_right: g.n_right(),
        m: g.m(),
        times,
        stats,
        kernel_matching_size: kernel_size,
        matching_size: matching.size(),
        size_identity: identity,
        valid: verdict.valid && identity != Some(false) && oracle_ok,
        violations: verdict.violations.len(),
        oracle_size,
    };
    Ok(RunOutcome { report, matching })
}

fn unpermute(m: &Matching, lp: &[u32], rp: &[u32]) -> Matching {
    let mut inv_l = vec![0u32; lp.len()];
    for (old, &new) in lp.iter().enumerate() {
        inv_l[new as usize] = old as u32;
    }
    let mut inv_r = vec![0u32; rp.len()];
    for (old, &new) in rp.iter().enumerate() {
        inv_r[new as usize] = old as u32;
    }
    let mut out = Matching::new(lp.len(), rp.len());
    for (u, v) in m.pairs() {
        out.add(inv_l[u as usize], inv_r[v as usize]);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::InvalidSpec(format!("unknown report format `{s}`, expected json or csv"))),
        }
    }
}

pub const CSV_HEADER: [&str; 28] = [
    "input",
    "strategy",
    "permute_seed",
    "slack",
    "repeat",
    "n_left",
    "n_right",
    "m",
    "t_load",
    "t_kernelize",
    "t_match",
    "t_reconstruct",
    "t_verify",
    "merge_ops",
    "rounds",
    "edges_touched",
    "r1_matches",
    "merged_count",
    "kernel_n",
    "kernel_m",
    "per_round_merge_ops",
    "boundary_overlaps",
    "kernel_matching_size",
    "matching_size",
    "size_identity",
    "valid",
    "violations",
    "oracle_size",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_row(r: &RunReport) -> Vec<String> {
    let s = r.stats.as_ref();
    vec![
        r.input.clone(),
        r.strategy.clone(),
        opt(r.permute_seed),
        r.slack.to_string(),
        r.repeat.to_string(),
        r.n_left.to_string(),
        r.n_right.to_string(),
        r.m.to_string(),
        r.times.load.to_string(),
        r.times.kernelize.to_string(),
        r.times.matching.to_string(),
        r.times.reconstruct.to_string(),
        r.times.verify.to_string(),
        opt(s.map(|s| s.merge_ops)),
        opt(s.map(|s| s.rounds)),
        opt(s.map(|s| s.edges_touched)),
        opt(s.map(|s| s.r1_matches)),
        opt(s.map(|s| s.merged_count)),
        opt(s.map(|s| s.kernel_n)),
        opt(s.map(|s| s.kernel_m)),
        opt(s.map(|s| s.per_round_merge_ops.iter().map(u64::to_string).collect::<Vec<_>>().join(";"))),
        opt(s.map(|s| s.boundary_overlaps)),
        r.kernel_matching_size.to_string(),
        r.matching_size.to_string(),
        opt(r.size_identity),
        r.valid.to_string(),
        r.violations.to_string(),
        opt(r.oracle_size),
    ]
}

/// Writes one JSON object per line, or a CSV header plus one row per run.
pub fn write_reports(reports: &[RunReport], format: ReportFormat, mut w: impl Write) -> Result<()> {
    let err = |e: String| Error::Report(e);
    match format {
        ReportFormat::Json => {
            for r in reports {
                serde_json::to_writer(&mut w, r).map_err(|e| err(e.to_string()))?;
                writeln!(w).map_err(|e| err(e.to_string()))?;
            }
        }
        ReportFormat::Csv => {
            let mut cw = csv::Writer::from_writer(&mut w);
            cw.write_record(CSV_HEADER).map_err(|e| err(e.to_string()))?;
            for r in reports {
                cw.write_record(csv_row(r)).map_err(|e| err(e.to_string()))?;
            }
            cw.flush().map_err(|e| err(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| err(e.to_string()))
}

/// Writes reports to `path`, or to stdout when `path` is `None`.
pub fn emit_report(reports: &[RunReport], path: Option<&Path>, format: ReportFormat) -> Result<()> {
    match path {
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|source| Error::Io { path: p.to_path_buf(), source })?;
            write_reports(reports, format, std::io::BufWriter::new(file))
        }
        None => write_reports(reports, format, std::io::stdout().lock()),
    }
}

/// Parses the output of [`write_reports`].
pub fn read_reports(format: ReportFormat, r: impl Read) -> Result<Vec<RunReport>> {
    let err = |e: String| Error::Report(e);
    match format {
        ReportFormat::Json => std::io::BufReader::new(r)
            .lines()
            .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
            .map(|l| {
                let l = l.map_err(|e| err(e.to_string()))?;
                serde_json::from_str(&l).map_err(|e| err(e.to_string()))
            })
            .collect(),
        ReportFormat::Csv => {
            let mut cr = csv::Reader::from_reader(r);
            let header = cr.headers().map_err(|e| err(e.to_string()))?.clone();
            if header.iter().ne(CSV_HEADER) {
                return Err(err("unexpected CSV header".into()));
            }
            cr.records().map(|rec| parse_csv_row(&rec.map_err(|e| err(e.to_string()))?)).collect()
        }
    }
}

fn parse_csv_row(rec: &csv::StringRecord) -> Result<RunReport> {
    let field = |i: usize| rec.get(i).unwrap_or("");
    fn num<T: FromStr>(s: &str, name: &str) -> Result<T> {
        s.parse().map_err(|_| Error::Report(format!("bad {name} `{s}`")))
    }
    fn opt_num<T: FromStr>(s: &str, name: &str) -> Result<Option<T>> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s, name).map(Some)
        }
    }
    let stats = if field(13).is_empty() {
        None
    } else {
        let per_round = if field(20).is_empty() {
            Vec::new()
        } else {
            field(20).split(';').map(|x| num(x, "per_round_merge_ops")).collect::<Result<_>>()?
        };
        Some(KernelStats {
            merge_ops: num(field(13), "merge_ops")?,
            rounds: num(field(14), "rounds")?,
            edges_touched: num(field(15), "edges_touched")?,
            r1_matches: num(field(16), "r1_matches")?,
            merged_count: num(field(17), "merged_count")?,
            kernel_n: num(field(18), "kernel_n")?,
            kernel_m: num(field(19), "kernel_m")?,
            per_round_merge_ops: per_round,
            boundary_overlaps: num(field(21), "boundary_overlaps")?,
        })
    };
    Ok(RunReport {
        input: field(0).to_string(),
        strategy: field(1).to_string(),
        permute_seed: opt_num(field(2), "permute_seed")?,
        slack: num(field(3), "slack")?,
        repeat: num(field(4), "repeat")?,
        n_left: num(field(5), "n_left")?,
        n_right: num(field(6), "n_right")?,
        m: num(field(7), "m")?,
        times: PhaseTimes {
            load: num(field(8), "t_load")?,
            kernelize: num(field(9), "t_kernelize")?,
            matching: num(field(10), "t_match")?,
            reconstruct: num(field(11), "t_reconstruct")?,
            verify: num(field(12), "t_verify")?,
        },
        stats,
        kernel_matching_size: num(field(22), "kernel_matching_size")?,
        matching_size: num(field(23), "matching_size")?,
        size_identity: opt_num(field(24), "size_identity")?,
        valid: num(field(25), "valid")?,
        violations: num(field(26), "violations")?,
        oracle_size: opt_num(field(27), "oracle_size")?,
    })
}
