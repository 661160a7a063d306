//! The `rnorm` command line.
//!
//! Exit codes: 0 on success, 1 for usage or parameter errors, 2 for unreadable or malformed
//! input, 3 for numerical failures such as a singular triangular factor.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rnorm_core::leverage::default_embedding_rows;
use rnorm_core::rng::{gaussian_block, STREAM_RANGE};
use rnorm_core::{
    estimate_distances_adaptive, estimate_distances_jl, estimate_leverage_adaptive, estimate_rownorms_adaptive,
    estimate_rownorms_jl, exact_distances, exact_leverage, exact_rownorms, make_powerlaw_matrix, Method, PairSet,
    QueryCounts, SpectrumSpec,
};

use crate::bench::{self, Metric, SweepConfig};
use crate::error::{Error, Result};
use crate::io::{self, CsvSink, Format, LoadedMatrix};

/// Seed used when neither `--seed` nor `RNORM_SEED` is given.
pub const DEFAULT_SEED: u64 = 7;

/// Dimensions above this need `--allow-large` (a dense `d × d` matrix of doubles).
pub const LARGE_DIM: usize = 2048;

/// Refuse to enumerate more implicit pairs than this.
const MAX_IMPLICIT_PAIRS: usize = 20_000_000;

#[derive(Parser, Debug)]
#[command(
    name = "rnorm",
    version,
    about = "Matrix-free estimation of row norms, pairwise distances and leverage scores"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate the squared Euclidean norm of every row.
    Rownorm(RownormArgs),
    /// Estimate squared distances between pairs of rows.
    Distance(DistanceArgs),
    /// Estimate leverage scores of a tall matrix with full column rank.
    Leverage(LeverageArgs),
    /// Error-versus-budget sweep on synthetic power-law matrices.
    Sweep(SweepArgs),
    /// Exact values computed from the materialized matrix.
    Oracle(OracleArgs),
    /// Write a synthetic test matrix in RNORM-DENSE v1 format.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Matrix file (RNORM-DENSE v1 or Matrix Market coordinate).
    #[arg(long)]
    pub input: PathBuf,
    /// auto, dense or mtx.
    #[arg(long, default_value = "auto")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct Widths {
    /// Total query budget: four blocks of budget/4 for adaptive, one block for jl.
    #[arg(long, conflicts_with_all = ["m_s", "m_g", "width"])]
    pub budget: Option<usize>,
    /// Range-sketch width of the adaptive estimator.
    #[arg(long = "m-s")]
    pub m_s: Option<usize>,
    /// Residual-probe width of the adaptive estimator.
    #[arg(long = "m-g")]
    pub m_g: Option<usize>,
    /// Projection width of the jl estimator.
    #[arg(long)]
    pub width: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Resolved {
    Adaptive { m_s: usize, m_g: usize },
    Jl { width: usize },
}

impl Widths {
    fn resolve(&self, method: Method) -> Result<Resolved> {
        let usage = |m: &str| Err(Error::Usage(m.into()));
        match method {
            Method::Adaptive => {
                if self.width.is_some() {
                    return usage("--width applies to --method jl; use --m-s and --m-g");
                }
                if let Some(b) = self.budget {
                    let (m_s, m_g) = bench::split_budget(b)?;
                    return Ok(Resolved::Adaptive { m_s, m_g });
                }
                match (self.m_s, self.m_g) {
                    (Some(m_s), Some(m_g)) => Ok(Resolved::Adaptive { m_s, m_g }),
                    _ => usage("give --budget, or both --m-s and --m-g"),
                }
            }
            Method::Jl => {
                if self.m_s.is_some() || self.m_g.is_some() {
                    return usage("--m-s and --m-g apply to --method adaptive; use --width");
                }
                match self.budget.or(self.width) {
                    Some(width) => Ok(Resolved::Jl { width }),
                    None => usage("give --budget or --width"),
                }
            }
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodArg {
    Adaptive,
    Jl,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Adaptive => Method::Adaptive,
            MethodArg::Jl => Method::Jl,
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long, value_enum, default_value = "adaptive")]
    pub method: MethodArg,
    #[arg(long, env = "RNORM_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add a column with the exact values (materializes the matrix).
    #[arg(long)]
    pub emit_exact: bool,
}

#[derive(Args, Debug)]
pub struct RownormArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub widths: Widths,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct DistanceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// CSV of 0-based `i,j` row pairs; all pairs when omitted.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[command(flatten)]
    pub widths: Widths,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct LeverageArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Rows of the Gaussian subspace embedding [default: max(4d, d + 40)].
    #[arg(long)]
    pub r1: Option<usize>,
    /// Query budget of the row-norm stage (the embedding costs r1 more transpose queries).
    #[arg(long, conflicts_with_all = ["m_s", "m_g"])]
    pub budget: Option<usize>,
    #[arg(long = "m-s")]
    pub m_s: Option<usize>,
    #[arg(long = "m-g")]
    pub m_g: Option<usize>,
    #[arg(long, env = "RNORM_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub emit_exact: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1000)]
    pub d: usize,
    /// Decay exponents.
    #[arg(long = "c", value_delimiter = ',', default_value = "0.5,1,1.5,2")]
    pub exponents: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
    pub budgets: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// Base estimator seed; repetition k uses seed + k.
    #[arg(long, env = "RNORM_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Seed of the random rotation in each test matrix.
    #[arg(long, default_value_t = 7)]
    pub matrix_seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "adaptive,jl")]
    pub methods: Vec<MethodArg>,
    /// Worker threads; 0 uses every CPU.
    #[arg(long, env = "RNORM_JOBS", default_value_t = 0)]
    pub jobs: usize,
    /// Per-run records; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-cell summary [default: <out>.summary.csv next to --out].
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Permit d above 2048.
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Rownorm,
    Distance,
    Leverage,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub kind: OracleKind,
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    /// Symmetric d × d with singular values i^-c.
    Powerlaw,
    /// rows × cols with i.i.d. standard normal entries.
    Gaussian,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: MatrixKind,
    #[arg(long, default_value_t = 1000)]
    pub d: usize,
    #[arg(long = "c", default_value_t = 1.0)]
    pub exponent: f64,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long, env = "RNORM_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub allow_large: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rnorm: {e}");
            (&e).into()
        }
    }
}

fn execute(command: Command, argv: &[OsString]) -> Result<()> {
    let invocation = command_line(argv);
    match command {
        Command::Rownorm(a) => rownorm(a, invocation),
        Command::Distance(a) => distance(a, invocation),
        Command::Leverage(a) => leverage(a, invocation),
        Command::Sweep(a) => sweep(a, invocation),
        Command::Oracle(a) => oracle(a, invocation),
        Command::Generate(a) => generate(a),
    }
}

fn command_line(argv: &[OsString]) -> String {
    argv.iter()
        .map(|a| {
            let s = a.to_string_lossy();
            if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_./=,:+@%".contains(c)) {
                s.into_owned()
            } else {
                format!("'{}'", s.replace('\'', r"'\''"))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn provenance(subcommand: &str, invocation: String, mut extra: Vec<String>) -> Vec<String> {
    let mut lines = vec![
        format!("rnorm {} {subcommand}", env!("CARGO_PKG_VERSION")),
        format!("command: {invocation}"),
    ];
    lines.append(&mut extra);
    lines
}

fn query_line(q: QueryCounts) -> String {
    format!("queries_forward={} queries_transpose={}", q.forward, q.transpose)
}

fn input_line(path: &Path, m: &LoadedMatrix) -> String {
    let (r, c) = m.shape();
    format!("input={} shape={r}x{c}", path.display())
}

fn rownorm(a: RownormArgs, invocation: String) -> Result<()> {
    let method: Method = a.run.method.into();
    let widths = a.widths.resolve(method)?;
    let m = io::load_matrix(&a.input.input, a.input.format)?;
    let op = m.operator();
    let (rep, width_line) = match widths {
        Resolved::Adaptive { m_s, m_g } => (
            estimate_rownorms_adaptive(op, m_s, m_g, a.run.seed)?,
            format!("m_s={m_s} m_g={m_g}"),
        ),
        Resolved::Jl { width } => (estimate_rownorms_jl(op, width, a.run.seed)?, format!("width={width}")),
    };
    let exact = if a.run.emit_exact {
        Some(exact_rownorms(&m.to_dense()?))
    } else {
        None
    };
    let comments = provenance(
        "rownorm",
        invocation,
        vec![
            input_line(&a.input.input, &m),
            format!(
                "method={} seed={} {width_line} rank_used={}",
                method.name(),
                a.run.seed,
                rep.rank_used
            ),
            query_line(rep.queries),
            format!("total_estimate={}", rep.total),
        ],
    );
    let mut header = vec!["i", "estimate"];
    if exact.is_some() {
        header.push("exact");
    }
    let mut sink = CsvSink::create(a.run.out.as_deref(), &comments, &header)?;
    for (i, e) in rep.estimates.iter().enumerate() {
        let mut row = vec![i.to_string(), e.to_string()];
        if let Some(x) = &exact {
            row.push(x[i].to_string());
        }
        sink.row(row)?;
    }
    sink.finish()?;
    if a.run.out.is_some() {
        println!("total_estimate={}", rep.total);
    }
    Ok(())
}

fn load_pairs(path: Option<&Path>, points: usize) -> Result<PairSet> {
    match path {
        Some(p) => io::read_pairs(p),
        None => {
            if points.saturating_mul(points.saturating_sub(1)) / 2 > MAX_IMPLICIT_PAIRS {
                return Err(Error::Usage(format!("{points} rows give too many pairs; pass --pairs")));
            }
            Ok(PairSet::all_pairs(points))
        }
    }
}

fn distance(a: DistanceArgs, invocation: String) -> Result<()> {
    let method: Method = a.run.method.into();
    let widths = a.widths.resolve(method)?;
    let m = io::load_matrix(&a.input.input, a.input.format)?;
    let op = m.operator();
    let pairs = load_pairs(a.pairs.as_deref(), op.n_rows())?;
    let (rep, width_line) = match widths {
        Resolved::Adaptive { m_s, m_g } => (
            estimate_distances_adaptive(op, &pairs, m_s, m_g, a.run.seed)?,
            format!("m_s={m_s} m_g={m_g}"),
        ),
        Resolved::Jl { width } => (
            estimate_distances_jl(op, &pairs, width, a.run.seed)?,
            format!("width={width}"),
        ),
    };
    let exact = if a.run.emit_exact {
        Some(exact_distances(&m.to_dense()?, &pairs)?)
    } else {
        None
    };
    let pair_source = a.pairs.as_ref().map_or("all".to_string(), |p| p.display().to_string());
    let comments = provenance(
        "distance",
        invocation,
        vec![
            input_line(&a.input.input, &m),
            format!("pairs={pair_source} count={}", pairs.len()),
            format!(
                "method={} seed={} {width_line} rank_used={}",
                method.name(),
                a.run.seed,
                rep.rank_used
            ),
            query_line(rep.queries),
            format!("total_estimate={}", rep.total),
        ],
    );
    let mut header = vec!["i", "j", "estimate"];
    if exact.is_some() {
        header.push("exact");
    }
    let mut sink = CsvSink::create(a.run.out.as_deref(), &comments, &header)?;
    for (k, (i, j)) in pairs.iter().enumerate() {
        let mut row = vec![i.to_string(), j.to_string(), rep.estimates[k].to_string()];
        if let Some(x) = &exact {
            row.push(x[k].to_string());
        }
        sink.row(row)?;
    }
    sink.finish()?;
    if a.run.out.is_some() {
        println!("total_estimate={}", rep.total);
    }
    Ok(())
}

fn leverage(a: LeverageArgs, invocation: String) -> Result<()> {
    let widths = Widths {
        budget: a.budget,
        m_s: a.m_s,
        m_g: a.m_g,
        width: None,
    };
    let Resolved::Adaptive { m_s, m_g } = widths.resolve(Method::Adaptive)? else {
        unreachable!("adaptive widths")
    };
    let m = io::load_matrix(&a.input.input, a.input.format)?;
    let op = m.operator();
    let r1 = a.r1.unwrap_or_else(|| default_embedding_rows(op.n_cols()));
    let rep = estimate_leverage_adaptive(op, r1, m_s, m_g, a.seed)?;
    let exact = if a.emit_exact {
        Some(exact_leverage(&m.to_dense()?))
    } else {
        None
    };
    let mut summary = format!("sum_theta_estimate={}", rep.total);
    if let Some(x) = &exact {
        summary.push_str(&format!(" sum_theta_exact={}", x.iter().sum::<f64>()));
    }
    let comments = provenance(
        "leverage",
        invocation,
        vec![
            input_line(&a.input.input, &m),
            format!(
                "seed={} r1={r1} epsilon1={} m_s={m_s} m_g={m_g} rank_used={}",
                a.seed, rep.epsilon1, rep.rank_used
            ),
            query_line(rep.queries),
            summary.clone(),
        ],
    );
    let mut header = vec!["row", "theta_estimate"];
    if exact.is_some() {
        header.push("theta_exact");
    }
    let mut sink = CsvSink::create(a.out.as_deref(), &comments, &header)?;
    for (i, t) in rep.scores.iter().enumerate() {
        let mut row = vec![i.to_string(), t.to_string()];
        if let Some(x) = &exact {
            row.push(x[i].to_string());
        }
        sink.row(row)?;
    }
    sink.finish()?;
    if a.out.is_some() {
        println!("{summary}");
    }
    Ok(())
}

fn check_size(d: usize, allow_large: bool) -> Result<()> {
    if d > LARGE_DIM && !allow_large {
        return Err(Error::Usage(format!(
            "d = {d} needs a dense {d}x{d} matrix; pass --allow-large to proceed"
        )));
    }
    Ok(())
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "sweep".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn sweep(a: SweepArgs, invocation: String) -> Result<()> {
    check_size(a.d, a.allow_large)?;
    let config = SweepConfig {
        d: a.d,
        exponents: a.exponents,
        budgets: a.budgets,
        reps: a.reps,
        matrix_seed: a.matrix_seed,
        seed: a.seed,
        methods: a.methods.iter().map(|&m| m.into()).collect(),
    };
    config.validate()?;
    let records = bench::run_sweep(&config, a.jobs)?;
    let comments = provenance(
        "sweep",
        invocation,
        vec![
            format!(
                "d={} matrix_seed={} seeds={}..{} split=quarters",
                config.d,
                config.matrix_seed,
                config.seed,
                config.seed + config.reps as u64 - 1
            ),
            format!("cells={}", records.len()),
        ],
    );
    bench::write_records(a.out.as_deref(), &comments, &records)?;
    let summary_out = a.summary.or_else(|| a.out.as_deref().map(summary_path));
    if let Some(path) = &summary_out {
        bench::write_summary(Some(path), &comments, &bench::summarize(&records))?;
    }
    if a.out.is_some() {
        for &c in &config.exponents {
            for &m in &config.methods {
                if let Ok(s) = bench::fit_slope(&records, m, c, Metric::Frobenius) {
                    println!("c={c} method={} frobenius_slope={s:.3}", m.name());
                }
            }
        }
    }
    Ok(())
}

fn oracle(a: OracleArgs, invocation: String) -> Result<()> {
    let m = io::load_matrix(&a.input.input, a.input.format)?;
    let dense = m.to_dense()?;
    let mut comments = provenance("oracle", invocation, vec![input_line(&a.input.input, &m)]);
    match a.kind {
        OracleKind::Rownorm => {
            let x = exact_rownorms(&dense);
            comments.push(format!("total_exact={}", x.iter().sum::<f64>()));
            let mut sink = CsvSink::create(a.out.as_deref(), &comments, &["i", "exact"])?;
            for (i, v) in x.iter().enumerate() {
                sink.row([i.to_string(), v.to_string()])?;
            }
            sink.finish()
        }
        OracleKind::Distance => {
            let pairs = load_pairs(a.pairs.as_deref(), dense.rows())?;
            let x = exact_distances(&dense, &pairs)?;
            let mut sink = CsvSink::create(a.out.as_deref(), &comments, &["i", "j", "exact"])?;
            for ((i, j), v) in pairs.iter().zip(&x) {
                sink.row([i.to_string(), j.to_string(), v.to_string()])?;
            }
            sink.finish()
        }
        OracleKind::Leverage => {
            let x = exact_leverage(&dense);
            comments.push(format!("sum_theta_exact={}", x.iter().sum::<f64>()));
            let mut sink = CsvSink::create(a.out.as_deref(), &comments, &["row", "theta_exact"])?;
            for (i, v) in x.iter().enumerate() {
                sink.row([i.to_string(), v.to_string()])?;
            }
            sink.finish()
        }
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let m = match a.kind {
        MatrixKind::Powerlaw => {
            check_size(a.d, a.allow_large)?;
            make_powerlaw_matrix(&SpectrumSpec::new(a.d, a.exponent, a.seed))?
        }
        MatrixKind::Gaussian => {
            let (Some(rows), Some(cols)) = (a.rows, a.cols) else {
                return Err(Error::Usage("gaussian matrices need --rows and --cols".into()));
            };
            if rows == 0 || cols == 0 {
                return Err(Error::Usage("--rows and --cols must be positive".into()));
            }
            if rows.saturating_mul(cols) > LARGE_DIM * LARGE_DIM && !a.allow_large {
                return Err(Error::Usage(format!(
                    "{rows}x{cols} is large; pass --allow-large to proceed"
                )));
            }
            gaussian_block(rows, cols, a.seed, STREAM_RANGE, 1.0)
        }
    };
    io::write_dense(&a.out, &m)
}
