//! Error-versus-budget sweeps on synthetic power-law matrices.
//!
//! Every cell `(c, budget, seed, method)` gets the same number of operator queries: the
//! adaptive estimator splits the budget into four equal widths `m_S = m_G = ⌊budget/4⌋`,
//! the Gaussian baseline uses a single block of width `budget`.

use std::collections::HashMap;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rnorm_core::synth::{fit_loglog_slope, frobenius_rel_error, max_elementwise_rel_error};
use rnorm_core::{
    estimate_rownorms_adaptive, estimate_rownorms_jl, exact_rownorms, make_powerlaw_matrix, DenseMatrix, DenseOperator,
    LinearOperator, Method, QueryCounts, SpectrumSpec,
};

use crate::error::{Error, Result};
use crate::io::CsvSink;

pub const RECORD_HEADER: [&str; 8] = [
    "method",
    "c",
    "d",
    "budget",
    "seed",
    "max_elem_err",
    "frob_err",
    "wall_time_s",
];

pub const SUMMARY_HEADER: [&str; 12] = [
    "method",
    "c",
    "d",
    "budget",
    "reps",
    "queries",
    "max_elem_mean",
    "max_elem_std",
    "max_elem_median",
    "frob_mean",
    "frob_std",
    "frob_median",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub d: usize,
    /// Decay exponents; one test matrix is generated per exponent.
    pub exponents: Vec<f64>,
    pub budgets: Vec<usize>,
    pub reps: usize,
    pub matrix_seed: u64,
    /// Estimator seeds are `seed, seed + 1, …, seed + reps − 1`, shared by both methods.
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl SweepConfig {
    pub fn new(d: usize, exponents: Vec<f64>, budgets: Vec<usize>, reps: usize) -> Self {
        Self {
            d,
            exponents,
            budgets,
            reps,
            matrix_seed: 7,
            seed: 0,
            methods: vec![Method::Adaptive, Method::Jl],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Core(rnorm_core::Error::Parameter(msg)));
        if self.d < 2 {
            return bad(format!("dimension must be at least 2, got {}", self.d));
        }
        if self.exponents.is_empty() || self.budgets.is_empty() || self.methods.is_empty() {
            return bad("sweep needs at least one exponent, budget and method".into());
        }
        if let Some(c) = self.exponents.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return bad(format!("decay exponent must be finite and >= 0, got {c}"));
        }
        if self.reps == 0 {
            return bad("repetitions must be at least 1".into());
        }
        for &b in &self.budgets {
            split_budget(b)?;
            if self.methods.contains(&Method::Adaptive) && b / 4 >= self.d {
                return bad(format!("budget {b} gives sketch width {} >= d = {}", b / 4, self.d));
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.exponents.len() * self.budgets.len() * self.reps * self.methods.len()
    }
}

/// `(m_S, m_G)` for the adaptive estimator under a total budget.
pub fn split_budget(budget: usize) -> Result<(usize, usize)> {
    let quarter = budget / 4;
    if quarter == 0 {
        return Err(Error::Core(rnorm_core::Error::Parameter(format!(
            "budget {budget} is too small to split into four blocks"
        ))));
    }
    Ok((quarter, quarter))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub method: Method,
    pub c: f64,
    pub d: usize,
    pub budget: usize,
    pub seed: u64,
    /// Meter reading after the run.
    pub queries: QueryCounts,
    pub max_elem_err: f64,
    pub frob_err: f64,
    pub wall_time: Duration,
}

impl ErrorRecord {
    pub fn fields(&self) -> [String; 8] {
        [
            self.method.name().to_string(),
            self.c.to_string(),
            self.d.to_string(),
            self.budget.to_string(),
            self.seed.to_string(),
            self.max_elem_err.to_string(),
            self.frob_err.to_string(),
            format!("{:.6}", self.wall_time.as_secs_f64()),
        ]
    }
}

struct Instance {
    c: f64,
    a: DenseMatrix,
    exact: Vec<f64>,
}

fn run_cell(inst: &Instance, method: Method, budget: usize, seed: u64) -> Result<ErrorRecord> {
    let op = DenseOperator::borrowed(&inst.a);
    let start = Instant::now();
    let rep = match method {
        Method::Adaptive => {
            let (m_s, m_g) = split_budget(budget)?;
            estimate_rownorms_adaptive(&op, m_s, m_g, seed)?
        }
        Method::Jl => estimate_rownorms_jl(&op, budget, seed)?,
    };
    let wall_time = start.elapsed();
    assert_eq!(rep.queries, op.queries(), "estimator misreported its queries");
    let max_elem_err = max_elementwise_rel_error(&rep.estimates, &inst.exact);
    let frob_err = frobenius_rel_error(&rep.estimates, &inst.exact);
    if !(max_elem_err.is_finite() && frob_err.is_finite()) {
        return Err(Error::Core(rnorm_core::Error::Input(format!(
            "non-finite error for {} at c = {}, budget {budget}, seed {seed}",
            method.name(),
            inst.c
        ))));
    }
    Ok(ErrorRecord {
        method,
        c: inst.c,
        d: inst.a.rows(),
        budget,
        seed,
        queries: rep.queries,
        max_elem_err,
        frob_err,
        wall_time,
    })
}

/// Runs every cell of `config` on a pool of `jobs` threads (0 picks the number of CPUs).
///
/// Records come back in canonical order: exponent, then budget, then seed, then method, each
/// in the order given in `config`, regardless of which thread finished first.
pub fn run_sweep(config: &SweepConfig, jobs: usize) -> Result<Vec<ErrorRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| {
        let instances: Vec<Instance> = config
            .exponents
            .par_iter()
            .map(|&c| {
                let a = make_powerlaw_matrix(&SpectrumSpec::new(config.d, c, config.matrix_seed))?;
                let exact = exact_rownorms(&a);
                Ok(Instance { c, a, exact })
            })
            .collect::<Result<_>>()?;
        let mut cells = Vec::with_capacity(config.cells());
        for inst in &instances {
            for &budget in &config.budgets {
                for rep in 0..config.reps as u64 {
                    for &method in &config.methods {
                        cells.push((inst, budget, config.seed + rep, method));
                    }
                }
            }
        }
        cells
            .into_par_iter()
            .map(|(inst, budget, seed, method)| run_cell(inst, method, budget, seed))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub median: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) {
            0.5 * (sorted[mid - 1] + sorted[mid])
        } else {
            sorted[mid]
        };
        Self { mean, std, median }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub method: Method,
    pub c: f64,
    pub d: usize,
    pub budget: usize,
    pub reps: usize,
    /// Mean total meter reading.
    pub queries: f64,
    pub max_elem: Stats,
    pub frob: Stats,
}

impl CellSummary {
    pub fn fields(&self) -> [String; 12] {
        [
            self.method.name().to_string(),
            self.c.to_string(),
            self.d.to_string(),
            self.budget.to_string(),
            self.reps.to_string(),
            self.queries.to_string(),
            self.max_elem.mean.to_string(),
            self.max_elem.std.to_string(),
            self.max_elem.median.to_string(),
            self.frob.mean.to_string(),
            self.frob.std.to_string(),
            self.frob.median.to_string(),
        ]
    }
}

type CellKey = (Method, u64, usize, usize);

fn key(r: &ErrorRecord) -> CellKey {
    (r.method, r.c.to_bits(), r.d, r.budget)
}

/// Aggregates records over seeds, one row per `(method, c, d, budget)` in first-seen order.
pub fn summarize(records: &[ErrorRecord]) -> Vec<CellSummary> {
    let mut order: Vec<CellKey> = Vec::new();
    let mut groups: HashMap<CellKey, Vec<&ErrorRecord>> = HashMap::new();
    for r in records {
        groups
            .entry(key(r))
            .or_insert_with(|| {
                order.push(key(r));
                Vec::new()
            })
            .push(r);
    }
    order
        .iter()
        .map(|k| {
            let g = &groups[k];
            let first = g[0];
            let col = |f: fn(&ErrorRecord) -> f64| g.iter().map(|r| f(r)).collect::<Vec<_>>();
            CellSummary {
                method: first.method,
                c: first.c,
                d: first.d,
                budget: first.budget,
                reps: g.len(),
                queries: g.iter().map(|r| r.queries.total() as f64).sum::<f64>() / g.len() as f64,
                max_elem: Stats::of(&col(|r| r.max_elem_err)),
                frob: Stats::of(&col(|r| r.frob_err)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    MaxElementwise,
    Frobenius,
}

/// Log-log slope of the per-budget mean error for one method and exponent.
pub fn fit_slope(records: &[ErrorRecord], method: Method, c: f64, metric: Metric) -> Result<f64> {
    let points: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.method == method && r.c == c)
        .map(|r| {
            let e = match metric {
                Metric::MaxElementwise => r.max_elem_err,
                Metric::Frobenius => r.frob_err,
            };
            (r.budget, e)
        })
        .collect();
    Ok(fit_loglog_slope(&points)?)
}

/// `|queries(adaptive) − queries(jl)|` for every `(c, budget, seed)` that ran both methods.
pub fn budget_gaps(records: &[ErrorRecord]) -> Vec<(f64, usize, u64, usize)> {
    let mut jl: HashMap<(u64, usize, u64), usize> = HashMap::new();
    for r in records.iter().filter(|r| r.method == Method::Jl) {
        jl.insert((r.c.to_bits(), r.budget, r.seed), r.queries.total());
    }
    records
        .iter()
        .filter(|r| r.method == Method::Adaptive)
        .filter_map(|r| {
            jl.get(&(r.c.to_bits(), r.budget, r.seed))
                .map(|&q| (r.c, r.budget, r.seed, q.abs_diff(r.queries.total())))
        })
        .collect()
}

pub fn write_records(path: Option<&Path>, comments: &[String], records: &[ErrorRecord]) -> Result<()> {
    let mut sink = CsvSink::create(path, comments, &RECORD_HEADER)?;
    for r in records {
        sink.row(r.fields())?;
    }
    sink.finish()
}

pub fn write_summary(path: Option<&Path>, comments: &[String], summary: &[CellSummary]) -> Result<()> {
    let mut sink = CsvSink::create(path, comments, &SUMMARY_HEADER)?;
    for s in summary {
        sink.row(s.fields())?;
    }
    sink.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_policy() {
        assert_eq!(split_budget(64).unwrap(), (16, 16));
        assert_eq!(split_budget(67).unwrap(), (16, 16));
        assert!(split_budget(3).is_err());
    }

    #[test]
    fn stats() {
        let s = Stats::of(&[1.0, 3.0, 2.0, 10.0]);
        assert_eq!(s.mean, 4.0);
        assert_eq!(s.median, 2.5);
        assert!((s.std - (50.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(Stats::of(&[5.0]).std, 0.0);
    }

    #[test]
    fn validation() {
        assert!(SweepConfig::new(16, vec![1.0], vec![64], 1).validate().is_err());
        assert!(SweepConfig::new(16, vec![-1.0], vec![16], 1).validate().is_err());
        assert!(SweepConfig::new(16, vec![1.0], vec![16], 0).validate().is_err());
        assert!(SweepConfig::new(16, vec![1.0], vec![2], 1).validate().is_err());
        assert!(SweepConfig::new(16, vec![1.0], vec![16, 20], 1).validate().is_ok());
    }

    #[test]
    fn small_sweep_is_ordered_and_fair() {
        let cfg = SweepConfig::new(24, vec![0.0, 1.5], vec![8, 13, 20], 2);
        let recs = run_sweep(&cfg, 2).unwrap();
        assert_eq!(recs.len(), cfg.cells());
        assert_eq!(
            (recs[0].method, recs[0].c, recs[0].budget, recs[0].seed),
            (Method::Adaptive, 0.0, 8, 0)
        );
        assert_eq!((recs[1].method, recs[1].seed), (Method::Jl, 0));
        assert_eq!(recs[2].seed, 1);
        for r in &recs {
            match r.method {
                Method::Jl => assert_eq!(r.queries.total(), r.budget),
                Method::Adaptive => assert_eq!(r.queries.total(), 4 * (r.budget / 4)),
            }
        }
        assert!(budget_gaps(&recs).iter().all(|g| g.3 <= 3));
        let summary = summarize(&recs);
        assert_eq!(summary.len(), 2 * 3 * 2);
        assert!(summary.iter().all(|s| s.reps == 2));
    }
}
