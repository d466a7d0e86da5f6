//! Hierarchical container model: groups, datasets, and attributes.
//!
//! A tree of [`ContainerNode`]s is the in-memory form of one container file.
//! Groups hold named children in insertion order; datasets hold a typed,
//! dimensioned payload; both carry a flat attribute list. Structural rules
//! (unique sibling names, payload length matching the declared extents) are
//! enforced at assembly time, so a tree that exists is a tree that encodes.
//!
//! Trees are immutable once handed to a reader or loader; all mutation happens
//! through the assembly API before that point.

mod codec;
mod digest;
mod path;
mod reader;

pub use codec::{
    FORMAT_VERSION, MAGIC, read_tree, read_tree_from_path, read_tree_from_slice, write_tree,
    write_tree_to_path, write_tree_to_vec,
};
pub use digest::canonical_digest;
pub use path::{EntryPath, EntryRef, enumerate_entries, resolve_entry, resolve_node};
pub use reader::{DatasetPayload, DatasetRef, GroupRef, IoCounters, TreeReader};

use thiserror::Error;

pub type Result<T, E = ContainerError> = std::result::Result<T, E>;

/// Everything that can go wrong while assembling, encoding, decoding, or
/// addressing a container tree.
#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:02x?}, expected \"NXP1\"")]
    BadMagic([u8; 4]),
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated input while reading {0}")]
    Truncated(&'static str),
    #[error("duplicate child name {0:?}")]
    DuplicateChild(String),
    #[error("duplicate attribute name {0:?}")]
    DuplicateAttr(String),
    #[error("invalid node kind byte {0:#04x}")]
    InvalidNodeKind(u8),
    #[error("invalid dtype byte {0:#04x}")]
    InvalidDtype(u8),
    #[error("invalid attribute value type byte {0:#04x}")]
    InvalidAttrType(u8),
    #[error("invalid name {0:?}: {1}")]
    InvalidName(String, &'static str),
    #[error("root node must be an unnamed group")]
    InvalidRoot,
    #[error("dataset payload is {actual} bytes, dims require {expected}")]
    PayloadSizeMismatch { expected: u64, actual: u64 },
    #[error("dataset extents overflow the addressable size: {0:?}")]
    OversizedDataset(Vec<u64>),
    #[error("name of {0} bytes exceeds the u16 length field")]
    NameTooLong(usize),
    #[error("text value of {0} bytes exceeds the u32 length field")]
    TextTooLong(usize),
    #[error("{0} count exceeds its record field width")]
    CountOverflow(&'static str),
    #[error("non-utf8 bytes in {0}")]
    InvalidUtf8(&'static str),
    #[error("invalid entry path {path:?}: {reason}")]
    InvalidPath { path: String, reason: &'static str },
    #[error("no node at {0:?}")]
    NodeNotFound(String),
    #[error("{0:?} is not a group")]
    NotAGroup(String),
    #[error("{0:?} is not a dataset")]
    NotADataset(String),
    #[error("no attribute {name:?} on {path:?}")]
    AttrNotFound { path: String, name: String },
}

/// Node kind discriminant, mirroring the on-disk kind byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Group,
    Dataset,
}

impl std::fmt::Display for NodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NodeKind::Group => "group",
            NodeKind::Dataset => "dataset",
        })
    }
}

/// Attribute payloads: text, signed integer, or real.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeValue {
    Text(String),
    Int(i64),
    Real(f64),
}

impl AttributeValue {
    pub fn text(value: impl Into<String>) -> Self {
        AttributeValue::Text(value.into())
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttributeValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            AttributeValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            AttributeValue::Real(v) => Some(*v),
            _ => None,
        }
    }
}

impl From<&str> for AttributeValue {
    fn from(s: &str) -> Self {
        AttributeValue::Text(s.to_owned())
    }
}

impl From<i64> for AttributeValue {
    fn from(v: i64) -> Self {
        AttributeValue::Int(v)
    }
}

impl From<f64> for AttributeValue {
    fn from(v: f64) -> Self {
        AttributeValue::Real(v)
    }
}

/// Element types a dataset can hold, mirroring the on-disk dtype byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dtype {
    F32,
    F64,
    I32,
    I64,
    U32,
    Bytes,
}

impl Dtype {
    pub fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
            Dtype::I32 => 2,
            Dtype::I64 => 3,
            Dtype::U32 => 4,
            Dtype::Bytes => 5,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => Dtype::F32,
            1 => Dtype::F64,
            2 => Dtype::I32,
            3 => Dtype::I64,
            4 => Dtype::U32,
            5 => Dtype::Bytes,
            other => return Err(ContainerError::InvalidDtype(other)),
        })
    }

    /// Bytes per element.
    pub fn element_size(self) -> u64 {
        match self {
            Dtype::F32 | Dtype::I32 | Dtype::U32 => 4,
            Dtype::F64 | Dtype::I64 => 8,
            Dtype::Bytes => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Body {
    Group {
        children: Vec<ContainerNode>,
    },
    Dataset {
        dtype: Dtype,
        dims: Vec<u64>,
        payload: Vec<u8>,
    },
}

/// One node of a container tree.
///
/// Constructed through [`ContainerNode::group`] / [`ContainerNode::dataset`]
/// and assembled with [`ContainerNode::add_child`]; the assembly API rejects
/// duplicate sibling names, malformed names, and payload/extent mismatches,
/// so every reachable tree satisfies the structural invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainerNode {
    name: String,
    attrs: Vec<(String, AttributeValue)>,
    body: Body,
}

/// Checks the naming rules shared by node and attribute names. `/` is the
/// path separator and `@` the attribute marker, so neither may appear.
fn check_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(ContainerError::InvalidName(
            name.to_owned(),
            "empty (only the root group is unnamed)",
        ));
    }
    if name.contains('/') {
        return Err(ContainerError::InvalidName(name.to_owned(), "contains '/'"));
    }
    if name.contains('@') {
        return Err(ContainerError::InvalidName(name.to_owned(), "contains '@'"));
    }
    if name.len() > u16::MAX as usize {
        return Err(ContainerError::NameTooLong(name.len()));
    }
    Ok(())
}

impl ContainerNode {
    /// An unnamed group: the root of a new tree.
    pub fn root() -> Self {
        ContainerNode {
            name: String::new(),
            attrs: Vec::new(),
            body: Body::Group {
                children: Vec::new(),
            },
        }
    }

    /// An empty group. The name is validated when the node is attached.
    pub fn group(name: impl Into<String>) -> Self {
        ContainerNode {
            name: name.into(),
            attrs: Vec::new(),
            body: Body::Group {
                children: Vec::new(),
            },
        }
    }

    /// A dataset. The payload length must equal
    /// `dtype.element_size() * product(dims)`; a scalar has empty `dims`.
    pub fn dataset(
        name: impl Into<String>,
        dtype: Dtype,
        dims: Vec<u64>,
        payload: Vec<u8>,
    ) -> Result<Self> {
        let expected = payload_len(dtype, &dims)?;
        if payload.len() as u64 != expected {
            return Err(ContainerError::PayloadSizeMismatch {
                expected,
                actual: payload.len() as u64,
            });
        }
        Ok(ContainerNode {
            name: name.into(),
            attrs: Vec::new(),
            body: Body::Dataset {
                dtype,
                dims,
                payload,
            },
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> NodeKind {
        match self.body {
            Body::Group { .. } => NodeKind::Group,
            Body::Dataset { .. } => NodeKind::Dataset,
        }
    }

    pub fn is_group(&self) -> bool {
        matches!(self.body, Body::Group { .. })
    }

    pub fn is_dataset(&self) -> bool {
        matches!(self.body, Body::Dataset { .. })
    }

    /// Attributes in insertion order.
    pub fn attrs(&self) -> &[(String, AttributeValue)] {
        &self.attrs
    }

    pub fn attr(&self, name: &str) -> Option<&AttributeValue> {
        self.attrs.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    /// Sets or replaces an attribute. Names follow the node naming rules;
    /// text values must fit the u32 length field.
    pub fn set_attr(&mut self, name: impl Into<String>, value: AttributeValue) -> Result<()> {
        let name = name.into();
        check_name(&name)?;
        if let AttributeValue::Text(ref s) = value
            && s.len() > u32::MAX as usize
        {
            return Err(ContainerError::TextTooLong(s.len()));
        }
        match self.attrs.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = value,
            None => self.attrs.push((name, value)),
        }
        Ok(())
    }

    /// Removes an attribute, returning its value if it was present.
    pub fn remove_attr(&mut self, name: &str) -> Option<AttributeValue> {
        let at = self.attrs.iter().position(|(n, _)| n == name)?;
        Some(self.attrs.remove(at).1)
    }

    /// Children in insertion order; empty for datasets.
    pub fn children(&self) -> &[ContainerNode] {
        match &self.body {
            Body::Group { children } => children,
            Body::Dataset { .. } => &[],
        }
    }

    pub fn child(&self, name: &str) -> Option<&ContainerNode> {
        self.children().iter().find(|c| c.name == name)
    }

    pub fn child_mut(&mut self, name: &str) -> Option<&mut ContainerNode> {
        match &mut self.body {
            Body::Group { children } => children.iter_mut().find(|c| c.name == name),
            Body::Dataset { .. } => None,
        }
    }

    /// Attaches a child, validating its name and uniqueness among siblings.
    pub fn add_child(&mut self, child: ContainerNode) -> Result<()> {
        check_name(&child.name)?;
        let children = match &mut self.body {
            Body::Group { children } => children,
            Body::Dataset { .. } => return Err(ContainerError::NotAGroup(self.name.clone())),
        };
        if children.iter().any(|c| c.name == child.name) {
            return Err(ContainerError::DuplicateChild(child.name));
        }
        children.push(child);
        Ok(())
    }

    /// Detaches and returns a child, if present.
    pub fn remove_child(&mut self, name: &str) -> Option<ContainerNode> {
        match &mut self.body {
            Body::Group { children } => {
                let at = children.iter().position(|c| c.name == name)?;
                Some(children.remove(at))
            }
            Body::Dataset { .. } => None,
        }
    }

    pub fn dtype(&self) -> Option<Dtype> {
        match &self.body {
            Body::Dataset { dtype, .. } => Some(*dtype),
            Body::Group { .. } => None,
        }
    }

    pub fn dims(&self) -> Option<&[u64]> {
        match &self.body {
            Body::Dataset { dims, .. } => Some(dims),
            Body::Group { .. } => None,
        }
    }

    pub fn payload(&self) -> Option<&[u8]> {
        match &self.body {
            Body::Dataset { payload, .. } => Some(payload),
            Body::Group { .. } => None,
        }
    }
}

/// Payload byte length implied by a dtype and extents, with overflow checks.
fn payload_len(dtype: Dtype, dims: &[u64]) -> Result<u64> {
    let elements = dims
        .iter()
        .try_fold(1u64, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| ContainerError::OversizedDataset(dims.to_vec()))?;
    elements
        .checked_mul(dtype.element_size())
        .ok_or_else(|| ContainerError::OversizedDataset(dims.to_vec()))
}
