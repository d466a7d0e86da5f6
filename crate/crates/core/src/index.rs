//! Class-name index over container entries.
//!
//! One traversal of the tree buckets every node path under its class name:
//! groups under their `NX_class` attribute, datasets under `"SDS"`. Buckets
//! keep their paths sorted by raw bytes, so class lookups are a map probe
//! and prefix lookups are binary-searched range scans, never filters over
//! the whole bucket.
//!
//! The index stores paths only. Resolving a path back to its node goes
//! through the container API; dropping the tree invalidates nothing here.

use std::collections::BTreeMap;

use crate::container::{AttributeValue, ContainerNode, EntryPath};
use crate::schema::{DATASET_CLASS, FALLBACK_CLASS, NX_CLASS};

/// Bucket sizes per class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexStats {
    pub per_class: BTreeMap<String, u64>,
    /// Indexed node count: groups plus datasets. Attributes are visited
    /// during the build but are not index keys.
    pub total: u64,
}

/// Sorted class-name to path index, immutable once built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetadataIndex {
    by_class: BTreeMap<String, Vec<EntryPath>>,
    entries_visited: u64,
    warnings: Vec<String>,
}

/// Builds the index in one depth-first traversal, visiting every entry
/// (node or attribute) exactly once.
pub fn build_index(root: &ContainerNode) -> MetadataIndex {
    // The path is grown and truncated in one shared buffer: this routine
    // runs once per loaded file over every entry, so per-node formatting
    // shows up directly in the load's index phase.
    fn walk(node: &ContainerNode, buf: &mut String, is_root: bool, ix: &mut MetadataIndex) {
        if !is_root {
            ix.entries_visited += 1;
            let class: &str = if node.is_group() {
                match node.attr(NX_CLASS) {
                    Some(AttributeValue::Text(class)) => class,
                    Some(_) => {
                        ix.warnings.push(format!(
                            "{buf}: non-text NX_class, indexed as {FALLBACK_CLASS:?}"
                        ));
                        FALLBACK_CLASS
                    }
                    None => {
                        ix.warnings.push(format!(
                            "{buf}: missing NX_class, indexed as {FALLBACK_CLASS:?}"
                        ));
                        FALLBACK_CLASS
                    }
                }
            } else {
                DATASET_CLASS
            };
            let bucket = match ix.by_class.get_mut(class) {
                Some(bucket) => bucket,
                None => ix.by_class.entry(class.to_owned()).or_default(),
            };
            bucket.push(EntryPath::new_node_path(buf.clone()));
        }
        ix.entries_visited += node.attrs().len() as u64;
        for child in node.children() {
            let parent_len = buf.len();
            buf.push('/');
            buf.push_str(child.name());
            walk(child, buf, false, ix);
            buf.truncate(parent_len);
        }
    }

    let mut ix = MetadataIndex::default();
    walk(root, &mut String::new(), true, &mut ix);
    for paths in ix.by_class.values_mut() {
        paths.sort_unstable();
        // Sibling names are unique, so full paths are too.
        debug_assert!(paths.windows(2).all(|w| w[0] < w[1]));
    }
    ix
}

impl MetadataIndex {
    /// All paths of a class, sorted ascending. Unknown classes are empty.
    pub fn lookup_class(&self, class: &str) -> &[EntryPath] {
        self.by_class.get(class).map_or(&[], Vec::as_slice)
    }

    /// The paths of a class that are `prefix` itself or live below it
    /// (start with `prefix` + `/`).
    ///
    /// Cost is two binary searches plus the matched range: in byte order
    /// `/` is 0x2f, so everything below `prefix` sorts within
    /// `[prefix + "/", prefix + "0")`, with only the exact node itself
    /// possibly sitting apart (names may contain bytes below `/`).
    pub fn lookup_prefix(&self, class: &str, prefix: &str) -> Vec<EntryPath> {
        let paths = self.lookup_class(class);
        let mut out = Vec::new();
        let at = paths.partition_point(|p| p.as_str() < prefix);
        if paths.get(at).is_some_and(|p| p.as_str() == prefix) {
            out.push(paths[at].clone());
        }
        let floor = format!("{prefix}/");
        let ceil = format!("{prefix}0");
        let lo = paths.partition_point(|p| p.as_str() < floor.as_str());
        let hi = paths.partition_point(|p| p.as_str() < ceil.as_str());
        out.extend_from_slice(&paths[lo..hi]);
        out
    }

    /// Classes and their sorted paths, in class order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[EntryPath])> {
        self.by_class
            .iter()
            .map(|(class, paths)| (class.as_str(), paths.as_slice()))
    }

    pub fn stats(&self) -> IndexStats {
        let per_class: BTreeMap<String, u64> = self
            .by_class
            .iter()
            .map(|(class, paths)| (class.clone(), paths.len() as u64))
            .collect();
        let total = per_class.values().sum();
        IndexStats { per_class, total }
    }

    /// Entries passed during the build: every node and attribute, once.
    pub fn entries_visited(&self) -> u64 {
        self.entries_visited
    }

    /// Groups that had to be indexed under the fallback class.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}
