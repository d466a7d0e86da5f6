//! Workspace loading: two access patterns, one result.
//!
//! [`load_naive`] re-enumerates the container from the workspace root for
//! every experiment it extracts and takes a fresh buffer for every dataset
//! read. [`load_indexed`] scans the container once into a
//! [`MetadataIndex`](crate::index::MetadataIndex), resolves everything
//! through prefix range queries, and reads each experiment's metadata into
//! one pre-sized arena.
//!
//! Both construct the same [`MdWorkspace`] values bit for bit (compare with
//! [`workspace_digest`]); they differ only in the instrumented costs. Loads
//! are single-threaded; instrumentation belongs to the load call, not the
//! tree.

mod indexed;
mod naive;
mod slice;

pub use indexed::load_indexed;
pub use naive::load_naive;
pub use slice::{SliceError, SliceGrid, slice_2d};

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::container::{ContainerError, DatasetPayload, Dtype};
use crate::schema::SchemaViolation;

/// Dimension names of the four-dimensional event space.
pub const DIM_NAMES: [&str; 4] = ["Qx", "Qy", "Qz", "E"];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("schema validation failed with {} violation(s), first: {}", .0.len(), .0[0])]
    Schema(Vec<SchemaViolation>),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error("malformed dataset at {path}: {reason}")]
    Malformed { path: String, reason: String },
}

/// One event: a weighted point in (Qx, Qy, Qz, E).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdEvent {
    pub signal: f32,
    pub error_sq: f32,
    /// Index into [`MdWorkspace::experiments`].
    pub run_index: u32,
    pub detector_id: u32,
    pub coords: [f32; 4],
}

/// A sampled time series from one log.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogSeries {
    pub values: Vec<f64>,
    pub times: Vec<f64>,
}

/// Per-experiment metadata: every map is keyed by entry name.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentInfo {
    pub index: usize,
    pub instrument: BTreeMap<String, f64>,
    pub sample: BTreeMap<String, f64>,
    pub goniometer: BTreeMap<String, f64>,
    pub logs: BTreeMap<String, LogSeries>,
}

/// An in-memory workspace: the event table, the opaque box structure, and
/// one [`ExperimentInfo`] per contributing experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct MdWorkspace {
    pub coordinate_system: i64,
    /// Contents of the `dimensions` dataset; its length is the
    /// dimensionality (always four in this layout).
    pub dimensions: Vec<i64>,
    pub events: Vec<MdEvent>,
    /// Box-structure datasets by name, carried as raw payloads.
    pub box_structure: BTreeMap<String, DatasetPayload>,
    pub experiments: Vec<ExperimentInfo>,
}

impl MdWorkspace {
    pub fn n_dims(&self) -> usize {
        self.dimensions.len()
    }
}

/// Wall-clock per phase, in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseMs {
    pub index_build: f64,
    pub metadata_read: f64,
    pub event_read: f64,
}

/// What one load cost. Counters start at zero for every load call.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LoadInstrumentation {
    /// Entries passed during discovery scans or index construction.
    pub entries_visited: u64,
    /// Read buffers created: one per dataset read for the naive pattern,
    /// one arena per experiment (plus fixed reads) for the indexed one.
    pub buffer_allocations: u64,
    pub phase_ms: PhaseMs,
}

/// Digest of everything a workspace holds, independent of how it was
/// loaded: experiments in index order, maps in name order, events in row
/// order. Equal digests mean equal workspaces.
pub fn workspace_digest(ws: &MdWorkspace) -> String {
    let mut h = Sha256::new();
    let str_field = |h: &mut Sha256, s: &str| {
        h.update((s.len() as u64).to_le_bytes());
        h.update(s.as_bytes());
    };
    let map_field = |h: &mut Sha256, map: &BTreeMap<String, f64>| {
        h.update((map.len() as u64).to_le_bytes());
        for (name, value) in map {
            str_field(h, name);
            h.update(value.to_le_bytes());
        }
    };

    h.update(ws.coordinate_system.to_le_bytes());
    h.update((ws.dimensions.len() as u64).to_le_bytes());
    for d in &ws.dimensions {
        h.update(d.to_le_bytes());
    }
    for name in DIM_NAMES {
        str_field(&mut h, name);
    }

    h.update((ws.events.len() as u64).to_le_bytes());
    for e in &ws.events {
        h.update(e.signal.to_le_bytes());
        h.update(e.error_sq.to_le_bytes());
        h.update(e.run_index.to_le_bytes());
        h.update(e.detector_id.to_le_bytes());
        for c in e.coords {
            h.update(c.to_le_bytes());
        }
    }

    h.update((ws.box_structure.len() as u64).to_le_bytes());
    for (name, payload) in &ws.box_structure {
        str_field(&mut h, name);
        h.update([payload.dtype.code()]);
        h.update((payload.dims.len() as u64).to_le_bytes());
        for d in &payload.dims {
            h.update(d.to_le_bytes());
        }
        h.update((payload.bytes.len() as u64).to_le_bytes());
        h.update(&payload.bytes);
    }

    h.update((ws.experiments.len() as u64).to_le_bytes());
    for exp in &ws.experiments {
        h.update((exp.index as u64).to_le_bytes());
        map_field(&mut h, &exp.instrument);
        map_field(&mut h, &exp.sample);
        map_field(&mut h, &exp.goniometer);
        h.update((exp.logs.len() as u64).to_le_bytes());
        for (name, series) in &exp.logs {
            str_field(&mut h, name);
            h.update((series.values.len() as u64).to_le_bytes());
            for v in &series.values {
                h.update(v.to_le_bytes());
            }
            h.update((series.times.len() as u64).to_le_bytes());
            for t in &series.times {
                h.update(t.to_le_bytes());
            }
        }
    }

    hex::encode(h.finalize())
}

fn malformed(path: &str, reason: impl Into<String>) -> LoadError {
    LoadError::Malformed {
        path: path.to_owned(),
        reason: reason.into(),
    }
}

// The decode helpers take the error path lazily: they run once per dataset
// on the loaders' hot paths, where building a context string that is thrown
// away on success would be measurable.

fn decode_f64s(bytes: &[u8], path: impl FnOnce() -> String) -> Result<Vec<f64>, LoadError> {
    if !bytes.len().is_multiple_of(8) {
        return Err(malformed(&path(), "byte length is not a multiple of 8"));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn decode_f64_scalar(bytes: &[u8], path: impl FnOnce() -> String) -> Result<f64, LoadError> {
    if bytes.len() != 8 {
        return Err(malformed(&path(), "expected one f64"));
    }
    Ok(f64::from_le_bytes(bytes.try_into().unwrap()))
}

fn decode_i64_scalar(bytes: &[u8], path: impl FnOnce() -> String) -> Result<i64, LoadError> {
    if bytes.len() != 8 {
        return Err(malformed(&path(), "expected one i64"));
    }
    Ok(i64::from_le_bytes(bytes.try_into().unwrap()))
}

fn decode_i64s(bytes: &[u8], path: impl FnOnce() -> String) -> Result<Vec<i64>, LoadError> {
    if !bytes.len().is_multiple_of(8) {
        return Err(malformed(&path(), "byte length is not a multiple of 8"));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| i64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Parses the event table. Row layout matches
/// [`EVENT_COLUMNS`](crate::schema::EVENT_COLUMNS).
fn decode_events(
    payload: &DatasetPayload,
    n_experiments: usize,
    path: &str,
) -> Result<Vec<MdEvent>, LoadError> {
    if payload.dtype != Dtype::F32 || payload.dims.len() != 2 || payload.dims[1] != 8 {
        return Err(malformed(path, "expected an f32 table with 8 columns"));
    }
    let rows = payload.dims[0] as usize;
    if payload.bytes.len() != rows * 32 {
        return Err(malformed(path, "payload does not match the declared rows"));
    }
    let mut events = Vec::with_capacity(rows);
    for row in payload.bytes.chunks_exact(32) {
        let col = |i: usize| f32::from_le_bytes(row[i * 4..i * 4 + 4].try_into().unwrap());
        let run_index = col(2) as u32;
        if run_index as usize >= n_experiments {
            return Err(malformed(
                path,
                format!("run index {run_index} out of range for {n_experiments} experiment(s)"),
            ));
        }
        events.push(MdEvent {
            signal: col(0),
            error_sq: col(1),
            run_index,
            detector_id: col(3) as u32,
            coords: [col(4), col(5), col(6), col(7)],
        });
    }
    Ok(events)
}

fn ms_since(start: std::time::Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// `experiment7` → `Some(7)`. Mirrors the naming rule the schema validator
/// enforces, so loaders only see names this accepts.
fn experiment_ordinal(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("experiment")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}
