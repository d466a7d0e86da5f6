//! Instrumented access to a container tree.
//!
//! A [`TreeReader`] wraps a tree for one reading session and keeps that
//! session's cost counters. Counters belong to the reader, never to the tree:
//! two sessions over the same tree count independently.
//!
//! The cost model mirrors a hierarchical file walking its on-disk structures:
//!
//! * [`TreeReader::list_children`] physically scans the subtree below the
//!   listed group (that is how a directory listing is rediscovered) and adds
//!   one `entries_visited` per entry it passes: every node below the root plus
//!   every attribute.
//! * Dataset reads add their payload length to `bytes_read`, and the variants
//!   that hand out a fresh buffer add one `buffer_allocations`.
//! * Resolving a known path is pointer chasing, not discovery, and counts
//!   nothing.

use std::ops::Range;

use super::{ContainerError, ContainerNode, Dtype, NodeKind, Result, resolve_node};

/// Access-cost counters for one reading session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IoCounters {
    /// Entries passed during subtree scans (nodes and attributes).
    pub entries_visited: u64,
    /// Payload bytes handed out by dataset reads.
    pub bytes_read: u64,
    /// Fresh payload buffers created on behalf of the caller.
    pub buffer_allocations: u64,
}

/// An owned copy of one dataset's payload.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetPayload {
    pub dtype: Dtype,
    pub dims: Vec<u64>,
    pub bytes: Vec<u8>,
}

/// One reading session over a tree.
pub struct TreeReader<'a> {
    root: &'a ContainerNode,
    counters: IoCounters,
}

impl<'a> TreeReader<'a> {
    pub fn new(root: &'a ContainerNode) -> Self {
        TreeReader {
            root,
            counters: IoCounters::default(),
        }
    }

    pub fn root(&self) -> &'a ContainerNode {
        self.root
    }

    pub fn counters(&self) -> IoCounters {
        self.counters
    }

    /// Records one caller-side buffer allocation (for callers that manage
    /// their own read buffers, e.g. arenas).
    pub fn note_buffer_alloc(&mut self) {
        self.counters.buffer_allocations += 1;
    }

    /// Lists the immediate children of a group in stored order.
    ///
    /// Costs a scan of the whole subtree under `path`: `entries_visited`
    /// grows by the number of entries at or below the listed group (the
    /// group itself counts unless it is the root, which is not an entry).
    pub fn list_children(&mut self, path: &str) -> Result<Vec<(String, NodeKind)>> {
        let node = resolve_node(self.root, path)?;
        if !node.is_group() {
            return Err(ContainerError::NotAGroup(path.to_owned()));
        }
        let is_tree_root = std::ptr::eq(node, self.root);
        self.counters.entries_visited += scan_subtree(node, is_tree_root);
        Ok(node
            .children()
            .iter()
            .map(|c| (c.name().to_owned(), c.kind()))
            .collect())
    }

    /// Reads one attribute by node path and attribute name.
    pub fn read_attr(&mut self, path: &str, name: &str) -> Result<super::AttributeValue> {
        let node = resolve_node(self.root, path)?;
        node.attr(name)
            .cloned()
            .ok_or_else(|| ContainerError::AttrNotFound {
                path: path.to_owned(),
                name: name.to_owned(),
            })
    }

    /// Dataset dtype and extents without touching the payload.
    pub fn dataset_info(&mut self, path: &str) -> Result<(Dtype, &'a [u64])> {
        let node = self.dataset_node(path)?;
        Ok((node.dtype().unwrap(), node.dims().unwrap()))
    }

    /// Reads a whole dataset payload into a fresh buffer.
    pub fn read_dataset(&mut self, path: &str) -> Result<DatasetPayload> {
        let node = self.dataset_node(path)?;
        let bytes = node.payload().unwrap().to_vec();
        self.counters.bytes_read += bytes.len() as u64;
        self.counters.buffer_allocations += 1;
        Ok(DatasetPayload {
            dtype: node.dtype().unwrap(),
            dims: node.dims().unwrap().to_vec(),
            bytes,
        })
    }

    /// Reads a whole dataset payload by appending it to a caller-provided
    /// buffer, returning the appended byte range. No allocation is counted;
    /// the caller owns the buffer's lifecycle.
    pub fn read_dataset_into(
        &mut self,
        path: &str,
        buf: &mut Vec<u8>,
    ) -> Result<(Dtype, &'a [u64], Range<usize>)> {
        let node = self.dataset_node(path)?;
        let payload = node.payload().unwrap();
        let start = buf.len();
        buf.extend_from_slice(payload);
        self.counters.bytes_read += payload.len() as u64;
        Ok((
            node.dtype().unwrap(),
            node.dims().unwrap(),
            start..start + payload.len(),
        ))
    }

    /// Resolves a dataset path once and returns a handle; size queries and
    /// reads through the handle skip re-resolution. Opening counts nothing
    /// (it is path resolution); reads through the handle count bytes like
    /// any other read.
    pub fn open_dataset(&self, path: &str) -> Result<DatasetRef<'a>> {
        Ok(DatasetRef {
            node: self.dataset_node(path)?,
        })
    }

    /// Resolves a group path once for direct child access.
    pub fn open_group(&self, path: &str) -> Result<GroupRef<'a>> {
        let node = resolve_node(self.root, path)?;
        if !node.is_group() {
            return Err(ContainerError::NotAGroup(path.to_owned()));
        }
        Ok(GroupRef { node })
    }

    /// [`read_dataset_into`](TreeReader::read_dataset_into) through an
    /// already-resolved handle.
    pub fn read_ref_into(&mut self, ds: DatasetRef<'a>, buf: &mut Vec<u8>) -> Range<usize> {
        let payload = ds.node.payload().unwrap();
        let start = buf.len();
        buf.extend_from_slice(payload);
        self.counters.bytes_read += payload.len() as u64;
        start..start + payload.len()
    }

    fn dataset_node(&self, path: &str) -> Result<&'a ContainerNode> {
        let node = resolve_node(self.root, path)?;
        if !node.is_dataset() {
            return Err(ContainerError::NotADataset(path.to_owned()));
        }
        Ok(node)
    }
}

/// A resolved dataset handle.
#[derive(Debug, Clone, Copy)]
pub struct DatasetRef<'a> {
    node: &'a ContainerNode,
}

impl<'a> DatasetRef<'a> {
    pub fn dtype(&self) -> Dtype {
        self.node.dtype().unwrap()
    }

    pub fn dims(&self) -> &'a [u64] {
        self.node.dims().unwrap()
    }

    /// Payload size: element size times the product of the extents.
    pub fn byte_len(&self) -> u64 {
        self.node.payload().unwrap().len() as u64
    }
}

/// A resolved group handle.
#[derive(Debug, Clone, Copy)]
pub struct GroupRef<'a> {
    node: &'a ContainerNode,
}

impl<'a> GroupRef<'a> {
    /// The named child if it exists and is a dataset.
    pub fn dataset(&self, name: &str) -> Option<DatasetRef<'a>> {
        self.node
            .child(name)
            .filter(|c| c.is_dataset())
            .map(|node| DatasetRef { node })
    }
}

/// Entry count of the subtree rooted at `node`, walked for real so the cost
/// is paid, not just reported.
fn scan_subtree(node: &ContainerNode, is_tree_root: bool) -> u64 {
    let own = if is_tree_root { 0 } else { 1 };
    let mut count = own + node.attrs().len() as u64;
    for child in node.children() {
        count += scan_subtree(child, false);
    }
    count
}
