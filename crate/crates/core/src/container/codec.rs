//! Bit-exact binary encoding of container trees.
//!
//! All integers are little-endian. A file is a 12-byte header followed by
//! the root node record; the root is always a group with an empty name.
//!
//! ```text
//! header    := magic "NXP1" | version u32 (= 1) | flags u32 (= 0)
//! node      := kind u8 (0 group, 1 dataset)
//!            | name-len u16 | name bytes (utf-8)
//!            | attr-count u16 | attr*
//!            | group: child-count u32 | node* (depth-first)
//!            | dataset: dtype u8 | ndim u8 | dims u64* | payload bytes
//! attr      := name-len u16 | name bytes
//!            | value-type u8 (0 text, 1 int, 2 real)
//!            | text: byte-len u32 | bytes / int: i64 / real: f64
//! dtype     := 0 f32 | 1 f64 | 2 i32 | 3 i64 | 4 u32 | 5 bytes
//! ```
//!
//! The payload length is implied: `element-size(dtype) * product(dims)`,
//! where a scalar (`ndim = 0`) has one element. Encoding is canonical, so
//! equal trees always produce identical bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{AttributeValue, Body, ContainerError, ContainerNode, Dtype, Result, check_name};

/// File magic, `"NXP1"`.
pub const MAGIC: [u8; 4] = *b"NXP1";
/// Only format version written or accepted.
pub const FORMAT_VERSION: u32 = 1;

struct CountingWriter<W> {
    inner: W,
    written: u64,
}

impl<W: Write> CountingWriter<W> {
    fn put(&mut self, bytes: &[u8]) -> Result<()> {
        self.inner.write_all(bytes)?;
        self.written += bytes.len() as u64;
        Ok(())
    }
}

/// Encodes a tree. The root must be an unnamed group. Returns the number of
/// bytes written.
pub fn write_tree<W: Write>(root: &ContainerNode, sink: &mut W) -> Result<u64> {
    if !root.is_group() || !root.name().is_empty() {
        return Err(ContainerError::InvalidRoot);
    }
    let mut w = CountingWriter {
        inner: sink,
        written: 0,
    };
    w.put(&MAGIC)?;
    w.put(&FORMAT_VERSION.to_le_bytes())?;
    w.put(&0u32.to_le_bytes())?;
    write_node(root, &mut w)?;
    Ok(w.written)
}

/// Encodes a tree into a fresh byte vector.
pub fn write_tree_to_vec(root: &ContainerNode) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_tree(root, &mut out)?;
    Ok(out)
}

/// Encodes a tree to a file, buffered.
pub fn write_tree_to_path(root: &ContainerNode, path: impl AsRef<Path>) -> Result<u64> {
    let mut sink = BufWriter::new(File::create(path)?);
    let n = write_tree(root, &mut sink)?;
    sink.flush()?;
    Ok(n)
}

fn write_node<W: Write>(node: &ContainerNode, w: &mut CountingWriter<W>) -> Result<()> {
    let kind: u8 = match node.body {
        Body::Group { .. } => 0,
        Body::Dataset { .. } => 1,
    };
    w.put(&[kind])?;
    let name = node.name().as_bytes();
    let name_len: u16 = name
        .len()
        .try_into()
        .map_err(|_| ContainerError::NameTooLong(name.len()))?;
    w.put(&name_len.to_le_bytes())?;
    w.put(name)?;

    let attr_count: u16 = node
        .attrs()
        .len()
        .try_into()
        .map_err(|_| ContainerError::CountOverflow("attribute"))?;
    w.put(&attr_count.to_le_bytes())?;
    for (name, value) in node.attrs() {
        let name = name.as_bytes();
        let name_len: u16 = name
            .len()
            .try_into()
            .map_err(|_| ContainerError::NameTooLong(name.len()))?;
        w.put(&name_len.to_le_bytes())?;
        w.put(name)?;
        match value {
            AttributeValue::Text(s) => {
                w.put(&[0u8])?;
                let byte_len: u32 = s
                    .len()
                    .try_into()
                    .map_err(|_| ContainerError::TextTooLong(s.len()))?;
                w.put(&byte_len.to_le_bytes())?;
                w.put(s.as_bytes())?;
            }
            AttributeValue::Int(v) => {
                w.put(&[1u8])?;
                w.put(&v.to_le_bytes())?;
            }
            AttributeValue::Real(v) => {
                w.put(&[2u8])?;
                w.put(&v.to_le_bytes())?;
            }
        }
    }

    match &node.body {
        Body::Group { children } => {
            let child_count: u32 = children
                .len()
                .try_into()
                .map_err(|_| ContainerError::CountOverflow("child"))?;
            w.put(&child_count.to_le_bytes())?;
            for child in children {
                write_node(child, w)?;
            }
        }
        Body::Dataset {
            dtype,
            dims,
            payload,
        } => {
            w.put(&[dtype.code()])?;
            let ndim: u8 = dims
                .len()
                .try_into()
                .map_err(|_| ContainerError::CountOverflow("dimension"))?;
            w.put(&[ndim])?;
            for d in dims {
                w.put(&d.to_le_bytes())?;
            }
            w.put(payload)?;
        }
    }
    Ok(())
}

struct Decoder<R> {
    src: R,
}

impl<R: Read> Decoder<R> {
    fn fill(&mut self, buf: &mut [u8], what: &'static str) -> Result<()> {
        self.src.read_exact(buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                ContainerError::Truncated(what)
            } else {
                ContainerError::Io(e)
            }
        })
    }

    fn u8(&mut self, what: &'static str) -> Result<u8> {
        let mut b = [0u8; 1];
        self.fill(&mut b, what)?;
        Ok(b[0])
    }

    fn u16(&mut self, what: &'static str) -> Result<u16> {
        let mut b = [0u8; 2];
        self.fill(&mut b, what)?;
        Ok(u16::from_le_bytes(b))
    }

    fn u32(&mut self, what: &'static str) -> Result<u32> {
        let mut b = [0u8; 4];
        self.fill(&mut b, what)?;
        Ok(u32::from_le_bytes(b))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64> {
        let mut b = [0u8; 8];
        self.fill(&mut b, what)?;
        Ok(u64::from_le_bytes(b))
    }

    fn text(&mut self, len: usize, what: &'static str) -> Result<String> {
        let mut bytes = vec![0u8; len];
        self.fill(&mut bytes, what)?;
        String::from_utf8(bytes).map_err(|_| ContainerError::InvalidUtf8(what))
    }
}

/// Decodes one tree from a byte source. Bytes past the root record are left
/// unread.
pub fn read_tree<R: Read>(source: &mut R) -> Result<ContainerNode> {
    let mut d = Decoder { src: source };
    let mut magic = [0u8; 4];
    d.fill(&mut magic, "magic")?;
    if magic != MAGIC {
        return Err(ContainerError::BadMagic(magic));
    }
    let version = d.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(ContainerError::UnsupportedVersion(version));
    }
    let _flags = d.u32("flags")?;
    read_node(&mut d, true)
}

/// Decodes a tree from an in-memory encoding.
pub fn read_tree_from_slice(mut bytes: &[u8]) -> Result<ContainerNode> {
    read_tree(&mut bytes)
}

/// Decodes a tree from a file, buffered.
pub fn read_tree_from_path(path: impl AsRef<Path>) -> Result<ContainerNode> {
    read_tree(&mut BufReader::new(File::open(path)?))
}

fn read_attrs<R: Read>(d: &mut Decoder<R>) -> Result<Vec<(String, AttributeValue)>> {
    let count = d.u16("attribute count")?;
    let mut attrs: Vec<(String, AttributeValue)> = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let name_len = d.u16("attribute name length")? as usize;
        let name = d.text(name_len, "attribute name")?;
        check_name(&name)?;
        if attrs.iter().any(|(n, _)| *n == name) {
            return Err(ContainerError::DuplicateAttr(name));
        }
        let value = match d.u8("attribute value type")? {
            0 => {
                let byte_len = d.u32("text length")? as usize;
                AttributeValue::Text(d.text(byte_len, "text value")?)
            }
            1 => {
                let mut b = [0u8; 8];
                d.fill(&mut b, "int value")?;
                AttributeValue::Int(i64::from_le_bytes(b))
            }
            2 => {
                let mut b = [0u8; 8];
                d.fill(&mut b, "real value")?;
                AttributeValue::Real(f64::from_le_bytes(b))
            }
            other => return Err(ContainerError::InvalidAttrType(other)),
        };
        attrs.push((name, value));
    }
    Ok(attrs)
}

fn read_node<R: Read>(d: &mut Decoder<R>, is_root: bool) -> Result<ContainerNode> {
    let kind = d.u8("node kind")?;
    if kind > 1 {
        return Err(ContainerError::InvalidNodeKind(kind));
    }
    let name_len = d.u16("name length")? as usize;
    let name = d.text(name_len, "node name")?;
    if is_root {
        if kind != 0 || !name.is_empty() {
            return Err(ContainerError::InvalidRoot);
        }
    } else {
        check_name(&name)?;
    }
    let attrs = read_attrs(d)?;

    let mut node = if kind == 0 {
        let mut group = ContainerNode::group(name);
        let child_count = d.u32("child count")?;
        for _ in 0..child_count {
            group.add_child(read_node(d, false)?)?;
        }
        group
    } else {
        let dtype = Dtype::from_code(d.u8("dtype")?)?;
        let ndim = d.u8("ndim")? as usize;
        let mut dims = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            dims.push(d.u64("dimension extent")?);
        }
        let len = super::payload_len(dtype, &dims)?;
        if len > isize::MAX as u64 {
            return Err(ContainerError::OversizedDataset(dims));
        }
        // Grow as bytes arrive instead of trusting the declared length with a
        // single oversized allocation.
        let mut payload = Vec::new();
        let got = (&mut d.src)
            .take(len)
            .read_to_end(&mut payload)
            .map_err(ContainerError::Io)?;
        if (got as u64) < len {
            return Err(ContainerError::Truncated("dataset payload"));
        }
        ContainerNode::dataset(name, dtype, dims, payload)?
    };
    for (attr_name, value) in attrs {
        node.set_attr(attr_name, value)?;
    }
    Ok(node)
}
