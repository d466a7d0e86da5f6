//! Event-ensemble container storage with indexed metadata loading.
//!
//! This crate models reduced time-of-flight event ensembles stored in a
//! hierarchical, self-describing binary container, and compares two ways of
//! loading them back:
//!
//! * a **naive** loader that re-enumerates the container for every
//!   experiment it extracts, and
//! * an **indexed** loader that scans the container once into a sorted
//!   class-name index and resolves everything else through range queries,
//!   reading per-experiment metadata into pre-sized arenas.
//!
//! Both produce bit-identical workspaces; the difference is the access
//! pattern, and the [`bench`] module measures it.
//!
//! Module map:
//!
//! * [`container`]: tree model, binary codec, instrumented reads, digests.
//! * [`schema`]: the ensemble layout, a deterministic generator, entry
//!   census, and validation.
//! * [`index`]: the sorted class-name to path index.
//! * [`loader`]: the two loaders, workspace types, and 2-D slicing.
//! * [`bench`]: repetition harness, summary statistics, report emission.

pub mod bench;
pub mod container;
pub mod index;
pub mod loader;
pub mod schema;

pub use bench::{
    BenchConfig, BenchError, BenchReport, Mode, ReportFormat, emit_report, run_benchmark,
};
pub use container::{
    AttributeValue, ContainerError, ContainerNode, DatasetPayload, Dtype, EntryPath, IoCounters,
    NodeKind, TreeReader, canonical_digest, read_tree, read_tree_from_path, read_tree_from_slice,
    write_tree, write_tree_to_path, write_tree_to_vec,
};
pub use index::{IndexStats, MetadataIndex, build_index};
pub use loader::{
    ExperimentInfo, LoadError, LoadInstrumentation, LogSeries, MdEvent, MdWorkspace, PhaseMs,
    SliceError, SliceGrid, load_indexed, load_naive, slice_2d, workspace_digest,
};
pub use schema::{
    EnsembleConfig, EntryCensus, SchemaViolation, count_entries, generate_ensemble, validate_schema,
};
