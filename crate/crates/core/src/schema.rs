//! The ensemble layout: generator, entry census, and validation.
//!
//! One container file holds one multi-dimensional event workspace reduced
//! from a set of single-orientation experiments:
//!
//! ```text
//! /
//! └── MDEventWorkspace             NXentry
//!     ├── coordinate_system        i64 scalar
//!     ├── dimensions               i64 [4]
//!     ├── box_structure            NXdata   8 datasets, opaque to loaders
//!     ├── event_data               NXdata   event table, f32 [n_events, 8]
//!     ├── process                  NXgroup  provenance texts
//!     └── experiment{k}            NXgroup  k = 0..n, contiguous
//!         ├── instrument           NXinstrument  f64 scalar settings
//!         ├── sample               NXdata        f64 scalar properties
//!         ├── goniometer           NXpositioner  f64 rotation axes
//!         └── logs                 NXgroup
//!             └── log_{i}          NXlog    "value" + "time" f64 series
//! ```
//!
//! Groups carry exactly one `NX_class` attribute; datasets carry none.
//! Counting every group, dataset, and attribute as one entry, a default
//! configuration costs 30 fixed entries plus 1097 per experiment: 1,127 at
//! one experiment, 11,000 at ten, 43,910 at forty, 88,887 at eighty-one,
//! 198,587 at one hundred eighty-one.
//!
//! Generation is a pure function of the configuration: one seeded stream
//! drives every drawn value, so equal configurations produce byte-identical
//! containers.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::container::{AttributeValue, ContainerNode, Dtype};

/// Attribute every group is classed by.
pub const NX_CLASS: &str = "NX_class";

/// Class datasets report under; they carry no class attribute of their own.
pub const DATASET_CLASS: &str = "SDS";

/// Class assigned to groups that are missing `NX_class`.
pub const FALLBACK_CLASS: &str = "NXgroup";

/// Event table column order.
pub const EVENT_COLUMNS: [&str; 8] = [
    "signal",
    "errorSq",
    "runIndex",
    "detectorId",
    "Qx",
    "Qy",
    "Qz",
    "E",
];

/// Momentum transfer range events are drawn from, per Q axis.
pub const Q_RANGE: (f64, f64) = (-10.0, 10.0);
/// Energy transfer range events are drawn from.
pub const E_RANGE: (f64, f64) = (-20.0, 80.0);

const SAMPLE_NAMES: [&str; 17] = [
    "lattice_a",
    "lattice_b",
    "lattice_c",
    "lattice_alpha",
    "lattice_beta",
    "lattice_gamma",
    "ub_00",
    "ub_01",
    "ub_02",
    "ub_10",
    "ub_11",
    "ub_12",
    "ub_20",
    "ub_21",
    "ub_22",
    "temperature",
    "mass",
];

const GONIOMETER_AXES: [&str; 3] = ["omega", "chi", "phi"];

const PROCESS_STEPS: [(&str, &str); 11] = [
    ("program", "mdload"),
    ("program_version", "0.1.0"),
    ("framework", "reduction-service"),
    ("framework_version", "6.8"),
    ("date", "1970-01-01T00:00:00+00:00"),
    ("host", "analysis-node-00"),
    ("user", "operator"),
    ("command", "reduce --ensemble"),
    ("reduction_step", "merge-runs"),
    ("environment", "production"),
    ("notes", "synthetic ensemble"),
];

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// Knobs for one generated ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n_experiments: usize,
    pub logs_per_experiment: usize,
    pub instrument_datasets: usize,
    pub sample_entries: usize,
    pub goniometer_datasets: usize,
    pub events_per_experiment: usize,
    pub rng_seed: u64,
    pub signal_scale: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            n_experiments: 1,
            logs_per_experiment: 262,
            instrument_datasets: 20,
            sample_entries: 17,
            goniometer_datasets: 2,
            events_per_experiment: 10_000,
            rng_seed: 0,
            signal_scale: 1.0,
        }
    }
}

impl EnsembleConfig {
    /// A default configuration with the given experiment count.
    pub fn with_experiments(n_experiments: usize) -> Self {
        EnsembleConfig {
            n_experiments,
            ..EnsembleConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        if !self.signal_scale.is_finite() || self.signal_scale < 1e-30 || self.signal_scale > 1e30 {
            return Err(SchemaError::InvalidConfig(format!(
                "signal_scale must be finite and within [1e-30, 1e30], got {}",
                self.signal_scale
            )));
        }
        Ok(())
    }

    /// Entries one experiment contributes: five classed groups with their
    /// class attributes, the configured scalar datasets, and four entries
    /// per log (group, class attribute, value, time).
    pub fn entries_per_experiment(&self) -> u64 {
        10 + (self.instrument_datasets
            + self.sample_entries
            + self.goniometer_datasets
            + 4 * self.logs_per_experiment) as u64
    }

    /// Entries outside the experiment groups; independent of the knobs.
    pub fn fixed_entries(&self) -> u64 {
        30
    }

    /// Closed-form total entry count for this configuration.
    pub fn expected_entries(&self) -> u64 {
        self.fixed_entries() + self.n_experiments as u64 * self.entries_per_experiment()
    }
}

fn le_f64(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn le_i64(values: &[i64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn le_i32(values: &[i32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn le_u32(values: &[u32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn classed_group(name: impl Into<String>, class: &str) -> ContainerNode {
    let mut g = ContainerNode::group(name);
    g.set_attr(NX_CLASS, AttributeValue::text(class))
        .expect("class attribute name is valid");
    g
}

fn push(parent: &mut ContainerNode, child: ContainerNode) {
    parent.add_child(child).expect("layout names are unique");
}

fn f64_scalar(name: impl Into<String>, value: f64) -> ContainerNode {
    ContainerNode::dataset(name, Dtype::F64, vec![], value.to_le_bytes().to_vec())
        .expect("scalar payload matches")
}

fn f64_series(name: impl Into<String>, values: &[f64]) -> ContainerNode {
    ContainerNode::dataset(name, Dtype::F64, vec![values.len() as u64], le_f64(values))
        .expect("series payload matches")
}

fn text_dataset(name: impl Into<String>, text: &str) -> ContainerNode {
    ContainerNode::dataset(
        name,
        Dtype::Bytes,
        vec![text.len() as u64],
        text.as_bytes().to_vec(),
    )
    .expect("text payload matches")
}

fn instrument_name(i: usize) -> String {
    format!("setting_{i:02}")
}

fn sample_name(i: usize) -> String {
    SAMPLE_NAMES
        .get(i)
        .map(|s| (*s).to_owned())
        .unwrap_or_else(|| format!("extra_{i:02}"))
}

fn sample_value(rng: &mut ChaCha8Rng, i: usize) -> f64 {
    match i {
        0..=2 => rng.random_range(3.0..15.0),   // lattice lengths
        3..=5 => rng.random_range(60.0..120.0), // lattice angles
        6..=14 => rng.random_range(-1.0..1.0),  // orientation matrix
        15 => rng.random_range(1.5..300.0),     // temperature
        16 => rng.random_range(0.1..50.0),      // mass
        _ => rng.random_range(0.0..1.0),
    }
}

fn goniometer_axis_name(i: usize) -> String {
    GONIOMETER_AXES
        .get(i)
        .map(|s| (*s).to_owned())
        .unwrap_or_else(|| format!("axis_{i:02}"))
}

fn log_name(i: usize) -> String {
    format!("log_{i:04}")
}

/// Builds one ensemble tree from the configuration. Same config, same tree.
pub fn generate_ensemble(cfg: &EnsembleConfig) -> Result<ContainerNode, SchemaError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    // Event table first: the box summary depends on the signal totals.
    let n_events = cfg.n_experiments * cfg.events_per_experiment;
    let mut event_bytes = Vec::with_capacity(n_events * EVENT_COLUMNS.len() * 4);
    let mut signal_total = 0.0f64;
    let mut error_sq_total = 0.0f64;
    for row in 0..n_events {
        let run = (row / cfg.events_per_experiment) as f32;
        let signal = (cfg.signal_scale * rng.random_range(0.1..1.0)) as f32;
        let detector = rng.random_range(0u32..100_000) as f32;
        let q: [f32; 3] = std::array::from_fn(|_| rng.random_range(Q_RANGE.0..Q_RANGE.1) as f32);
        let e = rng.random_range(E_RANGE.0..E_RANGE.1) as f32;
        signal_total += signal as f64;
        error_sq_total += signal as f64;
        for value in [signal, signal, run, detector, q[0], q[1], q[2], e] {
            event_bytes.extend_from_slice(&value.to_le_bytes());
        }
    }

    let mut ws = classed_group("MDEventWorkspace", "NXentry");
    push(
        &mut ws,
        ContainerNode::dataset(
            "coordinate_system",
            Dtype::I64,
            vec![],
            2i64.to_le_bytes().to_vec(),
        )
        .expect("scalar payload matches"),
    );
    push(
        &mut ws,
        ContainerNode::dataset("dimensions", Dtype::I64, vec![4], le_i64(&[100; 4]))
            .expect("dims payload matches"),
    );

    // One top-level box covering the full drawn range.
    let mut boxes = classed_group("box_structure", "NXdata");
    let volume = (Q_RANGE.1 - Q_RANGE.0).powi(3) * (E_RANGE.1 - E_RANGE.0);
    push(
        &mut boxes,
        ContainerNode::dataset("box_type", Dtype::I32, vec![1], le_i32(&[0]))
            .expect("payload matches"),
    );
    push(
        &mut boxes,
        ContainerNode::dataset("depth", Dtype::I32, vec![1], le_i32(&[0]))
            .expect("payload matches"),
    );
    push(
        &mut boxes,
        ContainerNode::dataset(
            "extents",
            Dtype::F64,
            vec![1, 8],
            le_f64(&[
                Q_RANGE.0, Q_RANGE.1, Q_RANGE.0, Q_RANGE.1, Q_RANGE.0, Q_RANGE.1, E_RANGE.0,
                E_RANGE.1,
            ]),
        )
        .expect("payload matches"),
    );
    push(
        &mut boxes,
        ContainerNode::dataset(
            "inverse_volume",
            Dtype::F64,
            vec![1],
            le_f64(&[1.0 / volume]),
        )
        .expect("payload matches"),
    );
    push(
        &mut boxes,
        ContainerNode::dataset("box_children", Dtype::I32, vec![1, 2], le_i32(&[0, 0]))
            .expect("payload matches"),
    );
    push(
        &mut boxes,
        ContainerNode::dataset(
            "box_signal_errorsq",
            Dtype::F64,
            vec![1, 2],
            le_f64(&[signal_total, error_sq_total]),
        )
        .expect("payload matches"),
    );
    push(
        &mut boxes,
        ContainerNode::dataset(
            "box_event_index",
            Dtype::U32,
            vec![1, 2],
            le_u32(&[0, n_events as u32]),
        )
        .expect("payload matches"),
    );
    push(
        &mut boxes,
        text_dataset(
            "controller",
            "split_into=2;split_threshold=1000;max_depth=20",
        ),
    );
    push(&mut ws, boxes);

    let mut events = classed_group("event_data", "NXdata");
    push(
        &mut events,
        ContainerNode::dataset(
            "event_data",
            Dtype::F32,
            vec![n_events as u64, EVENT_COLUMNS.len() as u64],
            event_bytes,
        )
        .expect("event payload matches"),
    );
    push(&mut ws, events);

    let mut process = classed_group("process", FALLBACK_CLASS);
    for (name, value) in PROCESS_STEPS {
        push(&mut process, text_dataset(name, value));
    }
    push(&mut ws, process);

    for k in 0..cfg.n_experiments {
        let mut experiment = classed_group(format!("experiment{k}"), FALLBACK_CLASS);

        let mut instrument = classed_group("instrument", "NXinstrument");
        for i in 0..cfg.instrument_datasets {
            let value = rng.random_range(0.0..1000.0);
            push(&mut instrument, f64_scalar(instrument_name(i), value));
        }
        push(&mut experiment, instrument);

        let mut sample = classed_group("sample", "NXdata");
        for i in 0..cfg.sample_entries {
            let value = sample_value(&mut rng, i);
            push(&mut sample, f64_scalar(sample_name(i), value));
        }
        push(&mut experiment, sample);

        // Orientations step systematically: two degrees per experiment on
        // the first axis, remaining axes parked at zero.
        let mut goniometer = classed_group("goniometer", "NXpositioner");
        for i in 0..cfg.goniometer_datasets {
            let value = if i == 0 { 2.0 * k as f64 } else { 0.0 };
            push(&mut goniometer, f64_scalar(goniometer_axis_name(i), value));
        }
        push(&mut experiment, goniometer);

        let mut logs = classed_group("logs", FALLBACK_CLASS);
        for i in 0..cfg.logs_per_experiment {
            let len = rng.random_range(1usize..=8);
            let mut t = 0.0f64;
            let mut times = Vec::with_capacity(len);
            let mut values = Vec::with_capacity(len);
            for _ in 0..len {
                t += rng.random_range(0.1..60.0);
                times.push(t);
                values.push(rng.random_range(0.0..100.0));
            }
            let mut log = classed_group(log_name(i), "NXlog");
            push(&mut log, f64_series("value", &values));
            push(&mut log, f64_series("time", &times));
            push(&mut logs, log);
        }
        push(&mut experiment, logs);

        push(&mut ws, experiment);
    }

    let mut root = ContainerNode::root();
    push(&mut root, ws);
    Ok(root)
}

/// Entry counts from one full traversal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntryCensus {
    pub groups: u64,
    pub datasets: u64,
    pub attributes: u64,
    pub total: u64,
    /// Nodes per class: groups under their `NX_class` (or
    /// [`FALLBACK_CLASS`] when missing), datasets under [`DATASET_CLASS`].
    pub per_class: BTreeMap<String, u64>,
}

/// Walks the tree and counts every entry: each non-root node and each
/// attribute. The root group itself is the file, not an entry.
pub fn count_entries(root: &ContainerNode) -> EntryCensus {
    fn visit(node: &ContainerNode, is_root: bool, census: &mut EntryCensus) {
        census.attributes += node.attrs().len() as u64;
        if !is_root {
            if node.is_group() {
                census.groups += 1;
                let class = node
                    .attr(NX_CLASS)
                    .and_then(AttributeValue::as_text)
                    .unwrap_or(FALLBACK_CLASS);
                *census.per_class.entry(class.to_owned()).or_insert(0) += 1;
            } else {
                census.datasets += 1;
                *census
                    .per_class
                    .entry(DATASET_CLASS.to_owned())
                    .or_insert(0) += 1;
            }
        }
        for child in node.children() {
            visit(child, false, census);
        }
    }

    let mut census = EntryCensus::default();
    visit(root, true, &mut census);
    census.total = census.groups + census.datasets + census.attributes;
    census
}

/// One way a tree deviates from the generated layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaViolation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct Checker {
    violations: Vec<SchemaViolation>,
}

impl Checker {
    fn flag(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(SchemaViolation {
            path: path.into(),
            message: message.into(),
        });
    }

    fn expect_class(&mut self, node: &ContainerNode, path: &str, want: &str) {
        match node.attr(NX_CLASS).and_then(AttributeValue::as_text) {
            Some(class) if class == want => {}
            Some(class) => self.flag(path, format!("NX_class is {class:?}, expected {want:?}")),
            None => self.flag(path, format!("missing NX_class (expected {want:?})")),
        }
        if node.attrs().len() > 1 {
            self.flag(path, "groups carry exactly the NX_class attribute");
        }
    }

    fn expect_group<'a>(
        &mut self,
        parent: &'a ContainerNode,
        path: &str,
        name: &str,
        class: &str,
    ) -> Option<&'a ContainerNode> {
        let child_path = format!("{path}/{name}");
        match parent.child(name) {
            None => {
                self.flag(path, format!("missing {name:?} group"));
                None
            }
            Some(node) if !node.is_group() => {
                self.flag(child_path, "expected a group, found a dataset");
                None
            }
            Some(node) => {
                self.expect_class(node, &child_path, class);
                Some(node)
            }
        }
    }

    fn expect_dataset_attrs(&mut self, node: &ContainerNode, path: &str) {
        if !node.attrs().is_empty() {
            self.flag(path, "datasets carry no attributes in this layout");
        }
    }

    fn expect_scalar_f64_children(&mut self, group: &ContainerNode, path: &str) {
        for child in group.children() {
            let child_path = format!("{path}/{}", child.name());
            if !child.is_dataset() {
                self.flag(child_path, "expected a dataset");
                continue;
            }
            self.expect_dataset_attrs(child, &child_path);
            if child.dtype() != Some(Dtype::F64) || child.dims() != Some(&[][..]) {
                self.flag(child_path, "expected an f64 scalar");
            }
        }
    }
}

/// Checks a tree against the generated layout. An empty result means the
/// tree is loadable; each violation names the offending path.
pub fn validate_schema(root: &ContainerNode) -> Vec<SchemaViolation> {
    let mut c = Checker {
        violations: Vec::new(),
    };

    if !root.attrs().is_empty() {
        c.flag("/", "unexpected attributes on the root");
    }
    for child in root.children() {
        if child.name() != "MDEventWorkspace" {
            c.flag(format!("/{}", child.name()), "unexpected entry");
        }
    }
    let ws_path = "/MDEventWorkspace";
    let Some(ws) = root.child("MDEventWorkspace") else {
        c.flag("/", "missing \"MDEventWorkspace\" group");
        return c.violations;
    };
    if !ws.is_group() {
        c.flag(ws_path, "expected a group, found a dataset");
        return c.violations;
    }
    c.expect_class(ws, ws_path, "NXentry");

    match ws.child("coordinate_system") {
        Some(node) if node.is_dataset() => {
            let path = format!("{ws_path}/coordinate_system");
            c.expect_dataset_attrs(node, &path);
            if node.dtype() != Some(Dtype::I64) || node.dims() != Some(&[][..]) {
                c.flag(path, "expected an i64 scalar");
            }
        }
        Some(_) => c.flag(format!("{ws_path}/coordinate_system"), "expected a dataset"),
        None => c.flag(ws_path, "missing \"coordinate_system\" dataset"),
    }

    match ws.child("dimensions") {
        Some(node) if node.is_dataset() => {
            let path = format!("{ws_path}/dimensions");
            c.expect_dataset_attrs(node, &path);
            if node.dtype() != Some(Dtype::I64) || node.dims() != Some(&[4][..]) {
                c.flag(path, "expected an i64 dataset of extent [4]");
            }
        }
        Some(_) => c.flag(format!("{ws_path}/dimensions"), "expected a dataset"),
        None => c.flag(ws_path, "missing \"dimensions\" dataset"),
    }

    if let Some(boxes) = c.expect_group(ws, ws_path, "box_structure", "NXdata") {
        let path = format!("{ws_path}/box_structure");
        for child in boxes.children() {
            let child_path = format!("{path}/{}", child.name());
            if !child.is_dataset() {
                c.flag(child_path, "expected a dataset");
            } else {
                c.expect_dataset_attrs(child, &child_path);
            }
        }
    }

    if let Some(events) = c.expect_group(ws, ws_path, "event_data", "NXdata") {
        let path = format!("{ws_path}/event_data");
        for child in events.children() {
            if child.name() != "event_data" {
                c.flag(format!("{path}/{}", child.name()), "unexpected entry");
            }
        }
        match events.child("event_data") {
            Some(table) if table.is_dataset() => {
                let table_path = format!("{path}/event_data");
                c.expect_dataset_attrs(table, &table_path);
                let dims = table.dims().unwrap_or(&[]);
                if table.dtype() != Some(Dtype::F32)
                    || dims.len() != 2
                    || dims[1] != EVENT_COLUMNS.len() as u64
                {
                    c.flag(
                        table_path,
                        format!("expected an f32 table with {} columns", EVENT_COLUMNS.len()),
                    );
                }
            }
            Some(_) => c.flag(format!("{path}/event_data"), "expected a dataset"),
            None => c.flag(path, "missing \"event_data\" dataset"),
        }
    }

    if let Some(process) = c.expect_group(ws, ws_path, "process", FALLBACK_CLASS) {
        let path = format!("{ws_path}/process");
        for child in process.children() {
            let child_path = format!("{path}/{}", child.name());
            if !child.is_dataset() {
                c.flag(child_path, "expected a dataset");
            } else {
                c.expect_dataset_attrs(child, &child_path);
            }
        }
    }

    // Experiment groups: names experiment{k}, indices contiguous from zero.
    const FIXED_CHILDREN: [&str; 5] = [
        "coordinate_system",
        "dimensions",
        "box_structure",
        "event_data",
        "process",
    ];
    let mut indices = Vec::new();
    for child in ws.children() {
        let name = child.name();
        if FIXED_CHILDREN.contains(&name) {
            continue;
        }
        match parse_experiment_index(name) {
            Some(k) => {
                indices.push(k);
                validate_experiment(&mut c, child, &format!("{ws_path}/{name}"));
            }
            None => c.flag(format!("{ws_path}/{name}"), "unexpected entry"),
        }
    }
    indices.sort_unstable();
    if !indices.iter().copied().eq(0..indices.len()) {
        c.flag(
            ws_path,
            format!("non-contiguous experiment indices: {indices:?}"),
        );
    }

    c.violations
}

fn parse_experiment_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("experiment")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // experiment01 is not a generated name; reject leading zeros.
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}

fn validate_experiment(c: &mut Checker, experiment: &ContainerNode, path: &str) {
    if !experiment.is_group() {
        c.flag(path, "expected a group, found a dataset");
        return;
    }
    c.expect_class(experiment, path, FALLBACK_CLASS);
    for child in experiment.children() {
        let name = child.name();
        if !["instrument", "sample", "goniometer", "logs"].contains(&name) {
            c.flag(format!("{path}/{name}"), "unexpected entry");
        }
    }

    if let Some(instrument) = c.expect_group(experiment, path, "instrument", "NXinstrument") {
        c.expect_scalar_f64_children(instrument, &format!("{path}/instrument"));
    }
    if let Some(sample) = c.expect_group(experiment, path, "sample", "NXdata") {
        c.expect_scalar_f64_children(sample, &format!("{path}/sample"));
    }
    if let Some(goniometer) = c.expect_group(experiment, path, "goniometer", "NXpositioner") {
        c.expect_scalar_f64_children(goniometer, &format!("{path}/goniometer"));
    }
    if let Some(logs) = c.expect_group(experiment, path, "logs", FALLBACK_CLASS) {
        let logs_path = format!("{path}/logs");
        for log in logs.children() {
            let log_path = format!("{logs_path}/{}", log.name());
            if !log.is_group() {
                c.flag(log_path, "expected a group");
                continue;
            }
            c.expect_class(log, &log_path, "NXlog");
            let mut extents = [None, None];
            for (slot, series) in ["value", "time"].iter().enumerate() {
                match log.child(series) {
                    Some(node) if node.is_dataset() => {
                        let series_path = format!("{log_path}/{series}");
                        c.expect_dataset_attrs(node, &series_path);
                        let dims = node.dims().unwrap_or(&[]);
                        if node.dtype() != Some(Dtype::F64) || dims.len() != 1 {
                            c.flag(series_path, "expected a 1-d f64 series");
                        } else {
                            extents[slot] = Some(dims[0]);
                        }
                    }
                    Some(_) => c.flag(format!("{log_path}/{series}"), "expected a dataset"),
                    None => c.flag(&log_path, format!("missing {series:?} dataset")),
                }
            }
            if let [Some(v), Some(t)] = extents
                && v != t
            {
                c.flag(
                    &log_path,
                    format!("value extent {v} does not match time extent {t}"),
                );
            }
            for child in log.children() {
                if !["value", "time"].contains(&child.name()) {
                    c.flag(format!("{log_path}/{}", child.name()), "unexpected entry");
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::canonical_digest;

    #[test]
    fn empty_tree_counts_nothing() {
        let census = count_entries(&ContainerNode::root());
        assert_eq!(census, EntryCensus::default());
    }

    #[test]
    fn fixed_overhead_is_thirty_entries() {
        let cfg = EnsembleConfig::with_experiments(0);
        let census = count_entries(&generate_ensemble(&cfg).unwrap());
        assert_eq!(census.total, 30);
        assert_eq!(census.groups, 4);
        assert_eq!(census.datasets, 22);
        assert_eq!(census.attributes, 4);
    }

    #[test]
    fn one_experiment_adds_1097_entries() {
        let cfg = EnsembleConfig::with_experiments(1);
        let census = count_entries(&generate_ensemble(&cfg).unwrap());
        assert_eq!(census.total, 1_127);
        // 267 groups and attributes per experiment, 563 datasets.
        assert_eq!(census.groups, 4 + 267);
        assert_eq!(census.datasets, 22 + 563);
        assert_eq!(census.attributes, 4 + 267);
    }

    #[test]
    fn class_breakdown_matches_the_layout() {
        let cfg = EnsembleConfig {
            events_per_experiment: 50,
            ..EnsembleConfig::with_experiments(2)
        };
        let census = count_entries(&generate_ensemble(&cfg).unwrap());
        assert_eq!(census.per_class["NXentry"], 1);
        assert_eq!(census.per_class["NXdata"], 2 + 2);
        assert_eq!(census.per_class["NXgroup"], 1 + 2 * 2);
        assert_eq!(census.per_class["NXinstrument"], 2);
        assert_eq!(census.per_class["NXpositioner"], 2);
        assert_eq!(census.per_class["NXlog"], 524);
        assert_eq!(census.per_class[DATASET_CLASS], 22 + 2 * 563);
        let (largest, _) = census
            .per_class
            .iter()
            .max_by_key(|(_, count)| **count)
            .unwrap();
        assert_eq!(largest, DATASET_CLASS);
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let cfg = EnsembleConfig {
            events_per_experiment: 100,
            logs_per_experiment: 5,
            ..EnsembleConfig::with_experiments(2)
        };
        let a = generate_ensemble(&cfg).unwrap();
        let b = generate_ensemble(&cfg).unwrap();
        assert_eq!(canonical_digest(&a), canonical_digest(&b));
        assert_eq!(a, b);

        let other_seed = generate_ensemble(&EnsembleConfig {
            rng_seed: 1,
            ..cfg.clone()
        })
        .unwrap();
        assert_ne!(canonical_digest(&a), canonical_digest(&other_seed));
    }

    #[test]
    fn generated_trees_validate_clean() {
        for cfg in [
            EnsembleConfig::with_experiments(0),
            EnsembleConfig {
                events_per_experiment: 25,
                logs_per_experiment: 3,
                ..EnsembleConfig::with_experiments(3)
            },
        ] {
            let tree = generate_ensemble(&cfg).unwrap();
            assert_eq!(validate_schema(&tree), Vec::new());
        }
    }

    #[test]
    fn event_table_is_contiguous_by_run() {
        let cfg = EnsembleConfig {
            events_per_experiment: 40,
            logs_per_experiment: 2,
            ..EnsembleConfig::with_experiments(3)
        };
        let tree = generate_ensemble(&cfg).unwrap();
        let table = tree
            .child("MDEventWorkspace")
            .unwrap()
            .child("event_data")
            .unwrap()
            .child("event_data")
            .unwrap();
        assert_eq!(table.dims(), Some(&[120, 8][..]));
        let bytes = table.payload().unwrap();
        for row in 0..120 {
            let at = row * 8 * 4;
            let signal = f32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
            let run = f32::from_le_bytes(bytes[at + 8..at + 12].try_into().unwrap());
            assert!(signal > 0.0 && signal.is_finite());
            assert_eq!(run, (row / 40) as f32);
            let qx = f32::from_le_bytes(bytes[at + 16..at + 20].try_into().unwrap()) as f64;
            let e = f32::from_le_bytes(bytes[at + 28..at + 32].try_into().unwrap()) as f64;
            assert!(qx >= Q_RANGE.0 && qx <= Q_RANGE.1);
            assert!(e >= E_RANGE.0 && e <= E_RANGE.1);
        }
    }

    #[test]
    fn log_series_lengths_match_and_times_increase() {
        let cfg = EnsembleConfig {
            events_per_experiment: 10,
            logs_per_experiment: 6,
            ..EnsembleConfig::with_experiments(1)
        };
        let tree = generate_ensemble(&cfg).unwrap();
        let logs = tree
            .child("MDEventWorkspace")
            .unwrap()
            .child("experiment0")
            .unwrap()
            .child("logs")
            .unwrap();
        assert_eq!(logs.children().len(), 6);
        for log in logs.children() {
            let value = log.child("value").unwrap();
            let time = log.child("time").unwrap();
            assert_eq!(value.dims(), time.dims());
            let times: Vec<f64> = time
                .payload()
                .unwrap()
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            assert!(times.windows(2).all(|w| w[0] < w[1]));
            assert!(times.first().copied().unwrap_or(1.0) > 0.0);
        }
    }

    #[test]
    fn mutations_are_flagged_with_their_paths() {
        let cfg = EnsembleConfig {
            events_per_experiment: 10,
            logs_per_experiment: 2,
            ..EnsembleConfig::with_experiments(3)
        };
        let mut reclassed = generate_ensemble(&cfg).unwrap();
        reclassed
            .child_mut("MDEventWorkspace")
            .unwrap()
            .child_mut("experiment0")
            .unwrap()
            .child_mut("goniometer")
            .unwrap()
            .set_attr(NX_CLASS, AttributeValue::text("NXdata"))
            .unwrap();
        let violations = validate_schema(&reclassed);
        assert!(
            violations
                .iter()
                .any(|v| v.path == "/MDEventWorkspace/experiment0/goniometer"
                    && v.message.contains("NXpositioner")),
            "got: {violations:?}"
        );

        let mut gapped = generate_ensemble(&cfg).unwrap();
        gapped
            .child_mut("MDEventWorkspace")
            .unwrap()
            .remove_child("experiment1")
            .unwrap();
        let violations = validate_schema(&gapped);
        assert!(
            violations
                .iter()
                .any(|v| v.message.contains("non-contiguous experiment indices")),
            "got: {violations:?}"
        );
    }

    #[test]
    fn config_validation_rejects_bad_signal_scales() {
        for scale in [0.0, -1.0, f64::NAN, f64::INFINITY, 1e40] {
            let cfg = EnsembleConfig {
                signal_scale: scale,
                ..EnsembleConfig::default()
            };
            assert!(generate_ensemble(&cfg).is_err(), "scale {scale} accepted");
        }
    }

    #[test]
    fn closed_form_matches_traversal_for_nondefault_knobs() {
        let cfg = EnsembleConfig {
            n_experiments: 2,
            logs_per_experiment: 7,
            instrument_datasets: 3,
            sample_entries: 20,
            goniometer_datasets: 4,
            events_per_experiment: 5,
            rng_seed: 9,
            signal_scale: 2.0,
        };
        let census = count_entries(&generate_ensemble(&cfg).unwrap());
        assert_eq!(census.total, cfg.expected_entries());
        // 10 + 3 + 20 + 4 + 28 = 65 per experiment.
        assert_eq!(cfg.entries_per_experiment(), 65);
        assert_eq!(census.total, 30 + 2 * 65);
    }

    #[test]
    fn zero_event_table_is_well_formed() {
        let cfg = EnsembleConfig {
            events_per_experiment: 0,
            logs_per_experiment: 1,
            ..EnsembleConfig::with_experiments(2)
        };
        let tree = generate_ensemble(&cfg).unwrap();
        let table = tree
            .child("MDEventWorkspace")
            .unwrap()
            .child("event_data")
            .unwrap()
            .child("event_data")
            .unwrap();
        assert_eq!(table.dims(), Some(&[0, 8][..]));
        assert_eq!(table.payload(), Some(&[][..]));
        assert_eq!(validate_schema(&tree), Vec::new());
    }
}
