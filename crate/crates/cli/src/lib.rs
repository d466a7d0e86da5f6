//! The command-line surface over the container, loader, and benchmark
//! machinery. [`cli_main`] is the whole program: parse the arguments,
//! dispatch, and map every outcome to an exit code — 0 for success, 1 for
//! runtime or verification failures, 2 for usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::{Parser, Subcommand};

use mdload::bench::{BenchConfig, BenchError, Mode, ReportFormat, emit_report};
use mdload::container::{ContainerNode, read_tree_from_path, write_tree_to_path};
use mdload::index::build_index;
use mdload::loader::{
    LoadInstrumentation, SliceGrid, load_indexed, load_naive, slice_2d, workspace_digest,
};
use mdload::run_benchmark;
use mdload::schema::{EnsembleConfig, count_entries, generate_ensemble};

const EXIT_OK: i32 = 0;
const EXIT_FAILURE: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "mdload",
    version,
    about = "Generate, inspect, load, slice, and benchmark event-ensemble containers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic multi-experiment container
    Generate {
        /// Number of experiment groups
        #[arg(long)]
        experiments: usize,
        /// Sample logs per experiment
        #[arg(long, default_value_t = EnsembleConfig::default().logs_per_experiment)]
        logs: usize,
        /// Event rows per experiment
        #[arg(long, default_value_t = EnsembleConfig::default().events_per_experiment)]
        events: usize,
        /// Generator seed; equal seeds give byte-identical files
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output container path
        #[arg(long)]
        out: PathBuf,
    },
    /// Show what a container holds
    Inspect {
        file: PathBuf,
        /// Dump the class index, one "class<TAB>path" line per node
        #[arg(long)]
        index: bool,
        /// Print entry counts (the default view)
        #[arg(long)]
        census: bool,
    },
    /// Load a container into memory and report digest and access costs
    Load {
        file: PathBuf,
        /// Access pattern: "naive" (enumerate everything) or "indexed"
        #[arg(long, required_unless_present = "verify")]
        mode: Option<String>,
        /// Run both patterns and fail unless their digests agree
        #[arg(long)]
        verify: bool,
    },
    /// Bin events into a 2D histogram and write it as CSV
    Slice {
        file: PathBuf,
        /// Axes to bin over, as "X,Y" (0 = Qx, 1 = Qy, 2 = Qz, 3 = E)
        #[arg(long)]
        dims: String,
        /// Grid shape, as "NXxNY"
        #[arg(long)]
        bins: String,
        /// Axis windows, as "x0:x1,y0:y1" (negative bounds allowed)
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Time repeated loads of each pattern and write a report
    Bench {
        file: PathBuf,
        /// Recorded repetitions per pattern
        #[arg(long, default_value_t = BenchConfig::new("").reps)]
        reps: usize,
        /// Discarded leading iterations
        #[arg(long, default_value_t = BenchConfig::new("").warmup)]
        warmup: usize,
        /// Report path; ".json" selects JSON, anything else CSV
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    /// Argument values that cannot be acted on.
    Usage(String),
    /// The two access patterns produced different workspaces.
    Verification(String),
    /// Everything else that stops a command.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(error: anyhow::Error) -> Self {
        CliError::Runtime(error)
    }
}

/// Runs the program on the given argument vector and returns its exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version are successful outputs; everything else
            // that fails to parse is a usage error.
            let code = if err.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            };
            let _ = err.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            EXIT_USAGE
        }
        Err(CliError::Verification(message)) => {
            eprintln!("verification failed: {message}");
            EXIT_FAILURE
        }
        Err(CliError::Runtime(error)) => {
            eprintln!("error: {error:#}");
            EXIT_FAILURE
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate {
            experiments,
            logs,
            events,
            seed,
            out,
        } => generate(experiments, logs, events, seed, &out),
        Command::Inspect {
            file,
            index,
            census,
        } => inspect(&file, index, census),
        Command::Load { file, mode, verify } => load(&file, mode.as_deref(), verify),
        Command::Slice {
            file,
            dims,
            bins,
            range,
            out,
        } => slice(&file, &dims, &bins, &range, &out),
        Command::Bench {
            file,
            reps,
            warmup,
            out,
        } => bench(&file, reps, warmup, &out),
    }
}

fn read_container(file: &Path) -> Result<ContainerNode, CliError> {
    Ok(read_tree_from_path(file).with_context(|| format!("reading {}", file.display()))?)
}

fn generate(
    experiments: usize,
    logs: usize,
    events: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let config = EnsembleConfig {
        n_experiments: experiments,
        logs_per_experiment: logs,
        events_per_experiment: events,
        rng_seed: seed,
        ..EnsembleConfig::default()
    };
    let tree = generate_ensemble(&config).map_err(|e| CliError::Usage(e.to_string()))?;
    let bytes =
        write_tree_to_path(&tree, out).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "wrote {} ({bytes} bytes, {} entries, {experiments} experiments)",
        out.display(),
        count_entries(&tree).total
    );
    Ok(())
}

fn inspect(file: &Path, index: bool, census: bool) -> Result<(), CliError> {
    let tree = read_container(file)?;
    if census || !index {
        let counts = count_entries(&tree);
        println!("groups      {}", counts.groups);
        println!("datasets    {}", counts.datasets);
        println!("attributes  {}", counts.attributes);
        println!("total       {}", counts.total);
    }
    if index {
        for (class, paths) in build_index(&tree).iter() {
            for path in paths {
                println!("{class}\t{}", path.as_str());
            }
        }
    }
    Ok(())
}

fn report_cost(label: &str, cost: &LoadInstrumentation) {
    println!(
        "{label}: entries_visited {}  buffer_allocations {}  \
         phases index {:.3} ms, metadata {:.3} ms, events {:.3} ms",
        cost.entries_visited,
        cost.buffer_allocations,
        cost.phase_ms.index_build,
        cost.phase_ms.metadata_read,
        cost.phase_ms.event_read
    );
}

fn load(file: &Path, mode_text: Option<&str>, verify: bool) -> Result<(), CliError> {
    // Argument problems outrank runtime ones: reject a bad mode name before
    // touching the file.
    let mode = mode_text
        .map(|text| Mode::from_str(text).map_err(CliError::Usage))
        .transpose()?;
    let tree = read_container(file)?;
    if verify {
        let (naive_ws, naive_cost) = load_naive(&tree).context("enumerating load")?;
        let (indexed_ws, indexed_cost) = load_indexed(&tree).context("indexed load")?;
        let naive_digest = workspace_digest(&naive_ws);
        let indexed_digest = workspace_digest(&indexed_ws);
        if naive_digest != indexed_digest {
            return Err(CliError::Verification(format!(
                "digest mismatch: naive {naive_digest} vs indexed {indexed_digest}"
            )));
        }
        println!("digests match: {naive_digest}");
        report_cost("naive", &naive_cost);
        report_cost("indexed", &indexed_cost);
    } else {
        let mode = mode.expect("clap requires --mode unless --verify is set");
        let (ws, cost) = mode.run(&tree).context("loading")?;
        println!("digest {}", workspace_digest(&ws));
        println!(
            "experiments {}  events {}  dimensions {:?}",
            ws.experiments.len(),
            ws.events.len(),
            ws.dimensions
        );
        report_cost(&mode.to_string(), &cost);
    }
    Ok(())
}

fn parse_usize(text: &str, flag: &str) -> Result<usize, String> {
    text.trim()
        .parse()
        .map_err(|_| format!("{flag}: {text:?} is not a whole number"))
}

fn parse_f64(text: &str, flag: &str) -> Result<f64, String> {
    text.trim()
        .parse()
        .map_err(|_| format!("{flag}: {text:?} is not a number"))
}

fn parse_dims(text: &str) -> Result<(usize, usize), String> {
    let (x, y) = text
        .split_once(',')
        .ok_or_else(|| format!("--dims expects \"X,Y\", got {text:?}"))?;
    Ok((parse_usize(x, "--dims")?, parse_usize(y, "--dims")?))
}

fn parse_bins(text: &str) -> Result<(usize, usize), String> {
    let (x, y) = text
        .split_once('x')
        .ok_or_else(|| format!("--bins expects \"NXxNY\", got {text:?}"))?;
    Ok((parse_usize(x, "--bins")?, parse_usize(y, "--bins")?))
}

/// Axis windows as ((x0, x1), (y0, y1)).
type Ranges = ((f64, f64), (f64, f64));

fn parse_ranges(text: &str) -> Result<Ranges, String> {
    let span = |part: &str| -> Result<(f64, f64), String> {
        let (lo, hi) = part
            .split_once(':')
            .ok_or_else(|| format!("--range expects \"x0:x1,y0:y1\", got {text:?}"))?;
        Ok((parse_f64(lo, "--range")?, parse_f64(hi, "--range")?))
    };
    let (x, y) = text
        .split_once(',')
        .ok_or_else(|| format!("--range expects \"x0:x1,y0:y1\", got {text:?}"))?;
    Ok((span(x)?, span(y)?))
}

/// Renders the grid row-major, one CSV row per y bin, six significant
/// digits per cell, preceded by one comment line naming the axes.
fn grid_to_csv(grid: &SliceGrid) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# {} x {}: {} x {} bins, x [{}, {}], y [{}, {}]",
        grid.x_name(),
        grid.y_name(),
        grid.nx,
        grid.ny,
        grid.x_range.0,
        grid.x_range.1,
        grid.y_range.0,
        grid.y_range.1
    )
    .expect("string writes cannot fail");
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            if ix > 0 {
                out.push(',');
            }
            write!(out, "{:.5e}", grid.value(ix, iy)).expect("string writes cannot fail");
        }
        out.push('\n');
    }
    out
}

fn slice(file: &Path, dims: &str, bins: &str, range: &str, out: &Path) -> Result<(), CliError> {
    let (dim_x, dim_y) = parse_dims(dims).map_err(CliError::Usage)?;
    let bins = parse_bins(bins).map_err(CliError::Usage)?;
    let ranges = parse_ranges(range).map_err(CliError::Usage)?;
    let tree = read_container(file)?;
    let (ws, _) = load_indexed(&tree).context("loading")?;
    // Rejections here are all argument problems (bad axes, empty grid,
    // inverted windows), so they report as usage errors.
    let grid =
        slice_2d(&ws, dim_x, dim_y, bins, ranges).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::write(out, grid_to_csv(&grid))
        .with_context(|| format!("writing {}", out.display()))?;
    println!(
        "wrote {} ({}x{} bins over {} events, total signal {:.6})",
        out.display(),
        grid.nx,
        grid.ny,
        ws.events.len(),
        grid.total()
    );
    Ok(())
}

fn bench(file: &Path, reps: usize, warmup: usize, out: &Path) -> Result<(), CliError> {
    let mut config = BenchConfig::new(file);
    config.reps = reps;
    config.warmup = warmup;
    let report = run_benchmark(&config).map_err(|e| match e {
        BenchError::InvalidConfig(message) => CliError::Usage(message.to_owned()),
        other => CliError::Runtime(anyhow::Error::new(other).context("benchmark")),
    })?;

    let format = match out.extension().and_then(|e| e.to_str()) {
        Some("json") => ReportFormat::Json,
        _ => ReportFormat::Csv,
    };
    let mut sink = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    let bytes = emit_report(&report, format, &mut sink)
        .map_err(|e| CliError::Runtime(anyhow::Error::new(e).context("writing report")))?;

    for summary in &report.summaries {
        let speedup = summary
            .speedup_pct
            .map(|v| format!("  speedup {v:.1}%"))
            .unwrap_or_default();
        println!(
            "{}: median {:.3} ms  stddev {:.3} ms over {} reps{speedup}",
            summary.mode, summary.wall.median, summary.wall.stddev, summary.wall.n
        );
    }
    println!("wrote {} ({bytes} bytes)", out.display());
    Ok(())
}
