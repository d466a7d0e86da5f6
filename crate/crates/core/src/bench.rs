//! Repeated timing of the two loaders over one container file.
//!
//! A benchmark parses the file once, runs a few discarded warmup
//! iterations, then alternates the loaders within every repetition so slow
//! drift (cache state, clock scaling) spreads evenly across both. Each run
//! is recorded raw; summaries carry the median, the sample standard
//! deviation, a five-number spread, a histogram, and the median-vs-median
//! speedup of the indexed loader over the naive one.

use std::fmt;
use std::io;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::container::{ContainerError, ContainerNode, read_tree_from_path};
use crate::loader::{LoadError, LoadInstrumentation, MdWorkspace, load_indexed, load_naive};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("baseline median must be positive to compute a speedup, got {0}")]
    NonPositiveBaseline(f64),
    #[error("report serialization: {0}")]
    Serialize(#[from] serde_json::Error),
    #[error("report sink: {0}")]
    Sink(#[from] io::Error),
}

/// Which loader a run exercised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Naive,
    Indexed,
}

impl Mode {
    pub fn run(
        self,
        root: &ContainerNode,
    ) -> Result<(MdWorkspace, LoadInstrumentation), LoadError> {
        match self {
            Mode::Naive => load_naive(root),
            Mode::Indexed => load_indexed(root),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Naive => "naive",
            Mode::Indexed => "indexed",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Mode::Naive),
            "indexed" => Ok(Mode::Indexed),
            other => Err(format!("unknown mode {other:?}, expected naive or indexed")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub file: PathBuf,
    /// Recorded repetitions per mode.
    pub reps: usize,
    /// Discarded leading iterations (each runs every mode once).
    pub warmup: usize,
    pub modes: Vec<Mode>,
}

impl BenchConfig {
    pub fn new(file: impl Into<PathBuf>) -> Self {
        BenchConfig {
            file: file.into(),
            reps: 25,
            warmup: 3,
            modes: vec![Mode::Naive, Mode::Indexed],
        }
    }
}

/// One timed load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub mode: Mode,
    pub rep: usize,
    pub wall_ms: f64,
    pub phase_index_ms: f64,
    pub phase_meta_ms: f64,
    pub phase_event_ms: f64,
    pub entries_visited: u64,
    pub buffer_allocations: u64,
}

/// Minimum, quartiles, maximum. Quartiles use linear interpolation between
/// order statistics (the convention most stats libraries default to).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Equal-width bins over `[min, max]`; the top boundary counts into the
/// last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub median: f64,
    /// Sample standard deviation (n - 1 denominator); zero for one sample.
    pub stddev: f64,
    pub five: FiveNumber,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: Mode,
    pub wall: SampleStats,
    pub entries_visited: u64,
    pub buffer_allocations: u64,
    /// Median-over-median improvement against the naive runs; present only
    /// on the indexed summary when both modes ran.
    pub speedup_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub file: String,
    pub reps: usize,
    pub warmup: usize,
    pub runs: Vec<RunRecord>,
    pub summaries: Vec<ModeSummary>,
}

impl BenchReport {
    /// Two comma-separated tables split by a blank line: every raw run,
    /// then one summary row per mode.
    pub fn to_csv(&self) -> String {
        use fmt::Write;

        let mut out = String::new();
        out.push_str(
            "mode,rep,wall_ms,phase_index_ms,phase_meta_ms,phase_event_ms,entries_visited,buffer_allocations\n",
        );
        for r in &self.runs {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6},{},{}",
                r.mode,
                r.rep,
                r.wall_ms,
                r.phase_index_ms,
                r.phase_meta_ms,
                r.phase_event_ms,
                r.entries_visited,
                r.buffer_allocations
            )
            .expect("string writes cannot fail");
        }
        out.push('\n');
        out.push_str("mode,median_ms,stddev_ms,q1_ms,q3_ms,min_ms,max_ms,speedup_pct\n");
        for s in &self.summaries {
            let speedup = s.speedup_pct.map(|v| format!("{v:.6}")).unwrap_or_default();
            writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                s.mode,
                s.wall.median,
                s.wall.stddev,
                s.wall.five.q1,
                s.wall.five.q3,
                s.wall.five.min,
                s.wall.five.max,
                speedup
            )
            .expect("string writes cannot fail");
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

/// Serialization formats for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Writes the report to `sink` in the requested format; returns the number
/// of bytes written.
pub fn emit_report(
    report: &BenchReport,
    format: ReportFormat,
    sink: &mut dyn io::Write,
) -> Result<u64, BenchError> {
    let text = match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => report.to_json()?,
    };
    sink.write_all(text.as_bytes())?;
    Ok(text.len() as u64)
}

/// Runs the configured benchmark: parse once, warm up, then alternate the
/// modes inside every repetition.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    if config.reps == 0 {
        return Err(BenchError::InvalidConfig("reps must be at least 1"));
    }
    if config.modes.is_empty() {
        return Err(BenchError::InvalidConfig("at least one mode is required"));
    }

    let root = read_tree_from_path(&config.file)?;

    for _ in 0..config.warmup {
        for &mode in &config.modes {
            std::hint::black_box(mode.run(&root)?);
        }
    }

    let mut runs = Vec::with_capacity(config.reps * config.modes.len());
    for rep in 0..config.reps {
        for &mode in &config.modes {
            let t = Instant::now();
            let loaded = mode.run(&root)?;
            let wall_ms = t.elapsed().as_secs_f64() * 1e3;
            let (workspace, instr) = std::hint::black_box(loaded);
            drop(workspace);
            runs.push(RunRecord {
                mode,
                rep,
                wall_ms,
                phase_index_ms: instr.phase_ms.index_build,
                phase_meta_ms: instr.phase_ms.metadata_read,
                phase_event_ms: instr.phase_ms.event_read,
                entries_visited: instr.entries_visited,
                buffer_allocations: instr.buffer_allocations,
            });
        }
    }

    let mut summaries = Vec::with_capacity(config.modes.len());
    for &mode in &config.modes {
        let samples: Vec<f64> = runs
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| r.wall_ms)
            .collect();
        let stats = compute_stats(&samples).expect("every mode ran at least once");
        let first = runs
            .iter()
            .find(|r| r.mode == mode)
            .expect("every mode ran at least once");
        summaries.push(ModeSummary {
            mode,
            wall: stats,
            entries_visited: first.entries_visited,
            buffer_allocations: first.buffer_allocations,
            speedup_pct: None,
        });
    }
    let naive_median = summaries
        .iter()
        .find(|s| s.mode == Mode::Naive)
        .map(|s| s.wall.median);
    if let Some(baseline) = naive_median {
        for s in &mut summaries {
            if s.mode == Mode::Indexed {
                s.speedup_pct = Some(speedup_pct(baseline, s.wall.median)?);
            }
        }
    }

    Ok(BenchReport {
        file: config.file.display().to_string(),
        reps: config.reps,
        warmup: config.warmup,
        runs,
        summaries,
    })
}

/// Percentage improvement of `improved` over `baseline`:
/// `100 * (baseline - improved) / baseline`.
pub fn speedup_pct(baseline: f64, improved: f64) -> Result<f64, BenchError> {
    if !baseline.is_finite() || baseline <= 0.0 {
        return Err(BenchError::NonPositiveBaseline(baseline));
    }
    Ok(100.0 * (baseline - improved) / baseline)
}

/// Summarises one sample; `None` when it is empty.
pub fn compute_stats(samples: &[f64]) -> Option<SampleStats> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("timings are never NaN"));
    let n = sorted.len();

    let mean = sorted.iter().sum::<f64>() / n as f64;
    let stddev = if n == 1 {
        0.0
    } else {
        let ss: f64 = sorted.iter().map(|x| (x - mean) * (x - mean)).sum();
        (ss / (n - 1) as f64).sqrt()
    };

    let five = FiveNumber {
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[n - 1],
    };

    Some(SampleStats {
        n,
        median: five.median,
        stddev,
        five,
        histogram: histogram(&sorted),
    })
}

/// Linear interpolation between order statistics: at probability `p` the
/// position is `(n - 1) * p`.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `ceil(sqrt(n))` equal-width bins over the sample range; a degenerate
/// range puts everything in the first bin.
fn histogram(sorted: &[f64]) -> Histogram {
    let n = sorted.len();
    let bins = (n as f64).sqrt().ceil() as usize;
    let (min, max) = (sorted[0], sorted[n - 1]);
    let mut counts = vec![0u64; bins];
    for &x in sorted {
        let idx = if max > min {
            (((x - min) / (max - min)) * bins as f64) as usize
        } else {
            0
        };
        counts[idx.min(bins - 1)] += 1;
    }
    Histogram { min, max, counts }
}
