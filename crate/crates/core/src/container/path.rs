//! Absolute entry paths.
//!
//! Nodes are addressed as `/`-separated absolute paths (`/` is the root);
//! attributes as `<node-path>@<attr-name>`. Since `/` and `@` are both
//! banned from names, every well-formed path resolves to at most one entry.

use std::fmt;

use super::{ContainerError, ContainerNode, Result};

/// A validated absolute entry path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntryPath(String);

impl EntryPath {
    /// The root path `/`.
    pub fn root() -> Self {
        EntryPath("/".to_owned())
    }

    /// Parses and validates a path string.
    pub fn parse(text: &str) -> Result<Self> {
        let invalid = |reason| ContainerError::InvalidPath {
            path: text.to_owned(),
            reason,
        };
        if !text.starts_with('/') {
            return Err(invalid("must start with '/'"));
        }
        if text == "/" {
            return Ok(EntryPath(text.to_owned()));
        }
        let (node_part, attr_part) = match text.split_once('@') {
            Some((n, a)) => (n, Some(a)),
            None => (text, None),
        };
        if let Some(attr) = attr_part {
            if attr.is_empty() {
                return Err(invalid("empty attribute name"));
            }
            if attr.contains('@') {
                return Err(invalid("more than one '@'"));
            }
        }
        if node_part != "/" {
            for segment in node_part[1..].split('/') {
                if segment.is_empty() {
                    return Err(invalid("empty path segment"));
                }
            }
        }
        Ok(EntryPath(text.to_owned()))
    }

    /// Wraps a node path assembled from segments that already passed the
    /// node naming rules, skipping re-validation. Hot paths (index build)
    /// use this; everything arriving from outside goes through [`parse`].
    ///
    /// [`parse`]: EntryPath::parse
    pub(crate) fn new_node_path(text: String) -> Self {
        // Deliberately cheaper than a full parse: this sits on the index
        // build's per-node path and the inputs come from validated names.
        debug_assert!(text.starts_with('/') && !text.ends_with('/') && !text.contains('@'));
        EntryPath(text)
    }

    /// Appends a child name. The name must satisfy the node naming rules and
    /// the path must not already address an attribute.
    pub fn join(&self, name: &str) -> Self {
        debug_assert!(!name.is_empty() && !name.contains('/') && !name.contains('@'));
        debug_assert!(!self.0.contains('@'));
        if self.0 == "/" {
            EntryPath(format!("/{name}"))
        } else {
            EntryPath(format!("{}/{name}", self.0))
        }
    }

    /// Addresses an attribute of the node this path points at.
    pub fn attr(&self, name: &str) -> Self {
        debug_assert!(!name.is_empty() && !name.contains('/') && !name.contains('@'));
        EntryPath(format!("{}@{name}", self.0))
    }

    /// Splits into the node path and, if present, the attribute name.
    pub fn split_attr(&self) -> (&str, Option<&str>) {
        match self.0.split_once('@') {
            Some((node, attr)) => (node, Some(attr)),
            None => (self.0.as_str(), None),
        }
    }

    pub fn is_attr(&self) -> bool {
        self.0.contains('@')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for EntryPath {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl From<EntryPath> for String {
    fn from(p: EntryPath) -> String {
        p.0
    }
}

/// What an [`EntryPath`] resolves to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryRef<'a> {
    Node(&'a ContainerNode),
    Attr {
        node: &'a ContainerNode,
        name: &'a str,
        value: &'a super::AttributeValue,
    },
}

/// Walks a node path (no `@` part) down from `root`.
pub fn resolve_node<'a>(root: &'a ContainerNode, path: &str) -> Result<&'a ContainerNode> {
    if !path.starts_with('/') {
        return Err(ContainerError::InvalidPath {
            path: path.to_owned(),
            reason: "must start with '/'",
        });
    }
    if path.contains('@') {
        return Err(ContainerError::InvalidPath {
            path: path.to_owned(),
            reason: "addresses an attribute, not a node",
        });
    }
    let mut node = root;
    if path == "/" {
        return Ok(node);
    }
    let mut walked = String::new();
    for segment in path[1..].split('/') {
        if segment.is_empty() {
            return Err(ContainerError::InvalidPath {
                path: path.to_owned(),
                reason: "empty path segment",
            });
        }
        walked.push('/');
        walked.push_str(segment);
        if node.is_dataset() {
            return Err(ContainerError::NotAGroup(node.name().to_owned()));
        }
        node = node
            .child(segment)
            .ok_or_else(|| ContainerError::NodeNotFound(walked.clone()))?;
    }
    Ok(node)
}

/// Resolves a full entry path to its node or attribute.
pub fn resolve_entry<'a>(root: &'a ContainerNode, path: &EntryPath) -> Result<EntryRef<'a>> {
    let (node_path, attr) = path.split_attr();
    let node = resolve_node(root, node_path)?;
    match attr {
        None => Ok(EntryRef::Node(node)),
        Some(name) => {
            let (name, value) = node
                .attrs()
                .iter()
                .find(|(n, _)| n == name)
                .map(|(n, v)| (n.as_str(), v))
                .ok_or_else(|| ContainerError::AttrNotFound {
                    path: node_path.to_owned(),
                    name: name.to_owned(),
                })?;
            Ok(EntryRef::Attr { node, name, value })
        }
    }
}

/// Enumerates every entry path in the tree in depth-first stored order:
/// for each node, its own path (the root has none), then its attribute
/// paths, then its children. The root's attributes enumerate as `/@name`.
pub fn enumerate_entries(root: &ContainerNode) -> Vec<EntryPath> {
    let mut out = Vec::new();
    walk(root, &EntryPath::root(), true, &mut out);
    out
}

fn walk(node: &ContainerNode, path: &EntryPath, is_root: bool, out: &mut Vec<EntryPath>) {
    if !is_root {
        out.push(path.clone());
    }
    for (name, _) in node.attrs() {
        out.push(path.attr(name));
    }
    for child in node.children() {
        let child_path = path.join(child.name());
        walk(child, &child_path, false, out);
    }
}
