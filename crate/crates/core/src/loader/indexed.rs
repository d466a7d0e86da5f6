//! The index-backed loader.
//!
//! One pass over the container builds a class-keyed path index; everything
//! after that is resolved with prefix range queries against the index, so
//! no subtree is ever enumerated twice. Each experiment's metadata is also
//! read into a single arena sized up front from the index's dataset list,
//! replacing hundreds of per-dataset buffers with one allocation per
//! experiment.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::container::{ContainerNode, DatasetRef, EntryPath, TreeReader};
use crate::index::{MetadataIndex, build_index};
use crate::schema::{DATASET_CLASS, validate_schema};

use super::{
    ExperimentInfo, LoadError, LoadInstrumentation, LogSeries, MdWorkspace, PhaseMs, decode_events,
    decode_f64_scalar, decode_f64s, decode_i64_scalar, decode_i64s, experiment_ordinal, malformed,
    ms_since,
};

const WS: &str = "/MDEventWorkspace";

pub fn load_indexed(root: &ContainerNode) -> Result<(MdWorkspace, LoadInstrumentation), LoadError> {
    let violations = validate_schema(root);
    if !violations.is_empty() {
        return Err(LoadError::Schema(violations));
    }

    let mut reader = TreeReader::new(root);
    let mut phase = PhaseMs::default();

    // One traversal: every entry is visited exactly once, here and never
    // again.
    let t = Instant::now();
    let index = build_index(root);
    let mut ordinals: Vec<usize> = index
        .lookup_prefix("NXgroup", WS)
        .iter()
        .filter_map(|p| {
            let tail = p.as_str().strip_prefix("/MDEventWorkspace/")?;
            if tail.contains('/') {
                return None;
            }
            experiment_ordinal(tail)
        })
        .collect();
    ordinals.sort_unstable();
    debug_assert!(ordinals.iter().enumerate().all(|(i, &k)| i == k));
    let n_experiments = ordinals.len();
    phase.index_build += ms_since(t);

    let t = Instant::now();
    let mut experiments = Vec::with_capacity(n_experiments);
    for &k in &ordinals {
        experiments.push(read_experiment(&mut reader, &index, k)?);
    }
    phase.metadata_read += ms_since(t);

    // Fixed structure and the event table: plain reads, located through the
    // index instead of directory listings.
    let t = Instant::now();
    let coord_path = format!("{WS}/coordinate_system");
    let coordinate_system = decode_i64_scalar(&reader.read_dataset(&coord_path)?.bytes, || {
        coord_path.clone()
    })?;
    let dims_path = format!("{WS}/dimensions");
    let dimensions = decode_i64s(&reader.read_dataset(&dims_path)?.bytes, || {
        dims_path.clone()
    })?;

    let box_base = format!("{WS}/box_structure");
    let mut box_structure = BTreeMap::new();
    for path in index.lookup_prefix(DATASET_CLASS, &box_base) {
        let payload = reader.read_dataset(path.as_str())?;
        box_structure.insert(last_segment(path.as_str()).to_owned(), payload);
    }

    let events_path = format!("{WS}/event_data/event_data");
    let events = decode_events(
        &reader.read_dataset(&events_path)?,
        n_experiments,
        &events_path,
    )?;
    phase.event_read += ms_since(t);

    let counters = reader.counters();
    Ok((
        MdWorkspace {
            coordinate_system,
            dimensions,
            events,
            box_structure,
            experiments,
        },
        LoadInstrumentation {
            entries_visited: counters.entries_visited + index.entries_visited(),
            buffer_allocations: counters.buffer_allocations,
            phase_ms: phase,
        },
    ))
}

/// Loads one experiment's metadata through the index.
///
/// Every path the index hands back is resolved exactly once into a handle;
/// the handles first size a single arena for the whole experiment, then
/// every dataset is read through them into that arena.
fn read_experiment<'a>(
    reader: &mut TreeReader<'a>,
    index: &MetadataIndex,
    k: usize,
) -> Result<ExperimentInfo, LoadError> {
    let base = format!("{WS}/experiment{k}");

    // Resolve and size. [(destination map, dataset path, handle)] for the
    // scalar bundles; [(log name, value handle, time handle)] for logs.
    let mut scalars: Vec<(usize, EntryPath, DatasetRef<'a>)> = Vec::new();
    let mut arena_bytes = 0u64;
    for (slot, group) in ["instrument", "sample", "goniometer"].iter().enumerate() {
        for path in index.lookup_prefix(DATASET_CLASS, &format!("{base}/{group}")) {
            let ds = reader.open_dataset(path.as_str())?;
            arena_bytes += ds.byte_len();
            scalars.push((slot, path, ds));
        }
    }
    let logs_base = format!("{base}/logs");
    let log_paths = index.lookup_prefix("NXlog", &logs_base);
    let mut logs: Vec<(String, DatasetRef<'a>, DatasetRef<'a>)> =
        Vec::with_capacity(log_paths.len());
    for log_path in log_paths {
        let group = reader.open_group(log_path.as_str())?;
        let series = |name: &'static str| {
            group
                .dataset(name)
                .ok_or_else(|| malformed(log_path.as_str(), format!("missing {name:?} dataset")))
        };
        let (value, time) = (series("value")?, series("time")?);
        arena_bytes += value.byte_len() + time.byte_len();
        logs.push((last_segment(log_path.as_str()).to_owned(), value, time));
    }

    // One buffer for everything this experiment reads.
    let mut arena: Vec<u8> = Vec::with_capacity(arena_bytes as usize);
    reader.note_buffer_alloc();

    let mut exp = ExperimentInfo {
        index: k,
        ..ExperimentInfo::default()
    };
    for (slot, path, ds) in scalars {
        let range = reader.read_ref_into(ds, &mut arena);
        let value = decode_f64_scalar(&arena[range], || path.to_string())?;
        let map = match slot {
            0 => &mut exp.instrument,
            1 => &mut exp.sample,
            _ => &mut exp.goniometer,
        };
        map.insert(last_segment(path.as_str()).to_owned(), value);
    }
    for (name, value_ds, time_ds) in logs {
        let range = reader.read_ref_into(value_ds, &mut arena);
        let values = decode_f64s(&arena[range], || format!("{logs_base}/{name}/value"))?;
        let range = reader.read_ref_into(time_ds, &mut arena);
        let times = decode_f64s(&arena[range], || format!("{logs_base}/{name}/time"))?;
        exp.logs.insert(name, LogSeries { values, times });
    }

    debug_assert!(
        arena.len() as u64 == arena_bytes,
        "arena sized from the handles must be filled exactly"
    );
    Ok(exp)
}

fn last_segment(path: &str) -> &str {
    path.rsplit('/').next().unwrap_or(path)
}
