//! The enumerate-everything loader.
//!
//! The access pattern deliberately mirrors a loader that treats the
//! container like a filesystem with no catalogue: before touching an
//! experiment it re-enumerates the workspace from the top to find the
//! group, then enumerates each metadata subgroup to learn its children,
//! and every dataset read lands in its own fresh buffer. Discovery work
//! therefore grows with the square of the experiment count, which is
//! exactly what [`load_indexed`](super::load_indexed) removes.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::container::{ContainerNode, NodeKind, TreeReader};
use crate::schema::validate_schema;

use super::{
    ExperimentInfo, LoadError, LoadInstrumentation, LogSeries, MdWorkspace, PhaseMs, decode_events,
    decode_f64_scalar, decode_f64s, decode_i64_scalar, decode_i64s, experiment_ordinal, malformed,
    ms_since,
};

const WS: &str = "/MDEventWorkspace";

pub fn load_naive(root: &ContainerNode) -> Result<(MdWorkspace, LoadInstrumentation), LoadError> {
    let violations = validate_schema(root);
    if !violations.is_empty() {
        return Err(LoadError::Schema(violations));
    }

    let mut reader = TreeReader::new(root);
    let mut phase = PhaseMs::default();

    // Discovery: enumerate the workspace once to learn how many experiments
    // it holds.
    let t = Instant::now();
    let top = reader.list_children(WS)?;
    let n_experiments = top
        .iter()
        .filter(|(name, kind)| *kind == NodeKind::Group && experiment_ordinal(name).is_some())
        .count();
    phase.index_build += ms_since(t);

    let mut experiments = Vec::with_capacity(n_experiments);
    for k in 0..n_experiments {
        // Locate the group by scanning the workspace from the top again —
        // this loader keeps no memory of the previous enumeration.
        let t = Instant::now();
        let name = format!("experiment{k}");
        let listing = reader.list_children(WS)?;
        if !listing
            .iter()
            .any(|(child, kind)| *kind == NodeKind::Group && *child == name)
        {
            return Err(malformed(WS, format!("missing group {name}")));
        }
        let base = format!("{WS}/{name}");
        let instrument_names = group_names(&mut reader, &base, "instrument")?;
        let sample_names = group_names(&mut reader, &base, "sample")?;
        let goniometer_names = group_names(&mut reader, &base, "goniometer")?;
        let log_names = group_names(&mut reader, &base, "logs")?;
        phase.index_build += ms_since(t);

        let t = Instant::now();
        let mut exp = ExperimentInfo {
            index: k,
            ..ExperimentInfo::default()
        };
        read_scalar_map(
            &mut reader,
            &base,
            "instrument",
            &instrument_names,
            &mut exp.instrument,
        )?;
        read_scalar_map(&mut reader, &base, "sample", &sample_names, &mut exp.sample)?;
        read_scalar_map(
            &mut reader,
            &base,
            "goniometer",
            &goniometer_names,
            &mut exp.goniometer,
        )?;
        for log in &log_names {
            let prefix = format!("{base}/logs/{log}");
            let values_path = format!("{prefix}/value");
            let times_path = format!("{prefix}/time");
            let values = decode_f64s(&reader.read_dataset(&values_path)?.bytes, || {
                values_path.clone()
            })?;
            let times = decode_f64s(&reader.read_dataset(&times_path)?.bytes, || {
                times_path.clone()
            })?;
            exp.logs.insert(log.clone(), LogSeries { values, times });
        }
        experiments.push(exp);
        phase.metadata_read += ms_since(t);
    }

    // Fixed structure and the event table.
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
    for (name, _) in reader.list_children(&box_base)? {
        let payload = reader.read_dataset(&format!("{box_base}/{name}"))?;
        box_structure.insert(name, payload);
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
            entries_visited: counters.entries_visited,
            buffer_allocations: counters.buffer_allocations,
            phase_ms: phase,
        },
    ))
}

/// Enumerates one metadata subgroup and returns its child names.
fn group_names(
    reader: &mut TreeReader<'_>,
    base: &str,
    group: &str,
) -> Result<Vec<String>, LoadError> {
    let listing = reader.list_children(&format!("{base}/{group}"))?;
    Ok(listing.into_iter().map(|(name, _)| name).collect())
}

/// Reads every named scalar under `base/group` into the map, one fresh
/// buffer per dataset.
fn read_scalar_map(
    reader: &mut TreeReader<'_>,
    base: &str,
    group: &str,
    names: &[String],
    out: &mut BTreeMap<String, f64>,
) -> Result<(), LoadError> {
    for name in names {
        let path = format!("{base}/{group}/{name}");
        let value = decode_f64_scalar(&reader.read_dataset(&path)?.bytes, || path.clone())?;
        out.insert(name.clone(), value);
    }
    Ok(())
}
